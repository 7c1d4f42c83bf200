/** Typed client for the junctionscan service.
 *
 * Every mutation the workbench performs goes through this client; the UI
 * never computes pipeline values itself.
 */

import type {
  EvaluationPayload,
  GroundTruth,
  ResultsPayload,
  SegmentSummary,
  TripSummary,
  Waypoint,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async send<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method,
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  listTrips(): Promise<{ trips: TripSummary[] }> {
    return this.get('/trips');
  }

  tripWaypoints(tripId: string): Promise<{ trip_id: string; waypoints: Waypoint[] }> {
    return this.get(`/trips/${encodeURIComponent(tripId)}/waypoints`);
  }

  createMark(tripId: string, lat: number, lon: number, note = ''): Promise<{ segment_id: string }> {
    return this.send('POST', `/trips/${encodeURIComponent(tripId)}/marks`, { lat, lon, note });
  }

  listSegments(): Promise<{ segments: SegmentSummary[] }> {
    return this.get('/segments');
  }

  processSegment(segmentId: string): Promise<{ segment_id: string; failure: string | null }> {
    return this.send('POST', `/segments/${encodeURIComponent(segmentId)}/process`);
  }

  segmentResults(segmentId: string): Promise<ResultsPayload> {
    return this.get(`/segments/${encodeURIComponent(segmentId)}/results`);
  }

  putGroundTruth(segmentId: string, truth: GroundTruth): Promise<{ groundtruth: GroundTruth }> {
    return this.send('PUT', `/segments/${encodeURIComponent(segmentId)}/groundtruth`, truth);
  }

  evaluation(groupBy: 'none' | 'signage' | 'maneuver'): Promise<EvaluationPayload> {
    return this.get(`/evaluation?group_by=${groupBy}`);
  }

  roiFrameUrl(segmentId: string, frame: number): string {
    return `${this.base}/segments/${encodeURIComponent(segmentId)}/frames/${frame}/roi`;
  }
}
