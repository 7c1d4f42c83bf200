/** In-memory mock of the junctionscan service for workbench tests.
 *
 * Implements the documented endpoints over a fetch-compatible function,
 * including the server-side validation the real service performs
 * (unknown ids, entry >= exit, far-off marks).
 */

import type { GroundTruth, ResultsPayload, Waypoint } from '../src/types.js';
import type { FetchLike } from '../src/api.js';

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

export class MockServer {
  readonly calls: RecordedCall[] = [];
  readonly waypoints: Waypoint[];
  private readonly segments = new Map<string, { processed: boolean }>();
  private readonly results = new Map<string, ResultsPayload>();
  private readonly truths = new Map<string, GroundTruth>();
  private markCounter = 0;

  constructor(private readonly tripId = 'trip-1',
              waypoints: Waypoint[] | null = null) {
    this.waypoints = waypoints ?? MockServer.straightTrip();
  }

  static straightTrip(): Waypoint[] {
    const out: Waypoint[] = [];
    for (let i = 0; i < 20; i += 1) {
      out.push({ timestamp_ms: i * 2000, lat: 42.3 + i * 0.00018, lon: -71.08 });
    }
    return out;
  }

  addSegment(segmentId: string, results: ResultsPayload | null = null): void {
    this.segments.set(segmentId, { processed: results !== null });
    if (results) this.results.set(segmentId, results);
  }

  get fetch(): FetchLike {
    return (input, init) => Promise.resolve(this.route(input, init));
  }

  private route(url: string, init?: RequestInit): Response {
    const method = init?.method ?? 'GET';
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    const body = typeof init?.body === 'string' ? JSON.parse(init.body) : undefined;
    this.calls.push({ method, path, body });

    const respond = (status: number, payload: unknown) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { 'content-type': 'application/json' },
      });

    if (method === 'GET' && path === '/trips') {
      return respond(200, {
        schema_version: '1',
        trips: [{ trip_id: this.tripId, vehicle_id: 'SIM-1', frame_count: 9000 }],
      });
    }

    let match = path.match(/^\/trips\/([^/]+)\/waypoints$/);
    if (method === 'GET' && match) {
      if (match[1] !== this.tripId) return respond(404, { detail: 'trip not found' });
      return respond(200, { schema_version: '1', trip_id: this.tripId,
                            waypoints: this.waypoints });
    }

    match = path.match(/^\/trips\/([^/]+)\/marks$/);
    if (method === 'POST' && match) {
      if (match[1] !== this.tripId) return respond(404, { detail: 'trip not found' });
      const { lat, lon } = body as { lat: number; lon: number };
      const near = this.waypoints.some(
        (w) => Math.abs(w.lat - lat) < 0.002 && Math.abs(w.lon - lon) < 0.003);
      if (!near) return respond(422, { detail: 'closest approach exceeds 200 m' });
      this.markCounter += 1;
      const segmentId = `${this.tripId}-m${String(this.markCounter).padStart(3, '0')}`;
      this.segments.set(segmentId, { processed: false });
      return respond(201, { schema_version: '1', segment_id: segmentId,
                            trip_id: this.tripId, frame_count: 600, truncated: false });
    }

    if (method === 'GET' && path === '/segments') {
      const segments = [...this.segments.entries()].map(([segment_id, state]) => ({
        segment_id,
        processed: state.processed,
        annotated: this.truths.has(segment_id),
        job: { state: state.processed ? 'done' : 'pending', error: null },
      }));
      return respond(200, { schema_version: '1', segments });
    }

    match = path.match(/^\/segments\/([^/]+)\/process$/);
    if (method === 'POST' && match) {
      const segment = this.segments.get(match[1]);
      if (!segment) return respond(404, { detail: 'segment not found' });
      segment.processed = true;
      return respond(200, { schema_version: '1', segment_id: match[1],
                            job: { state: 'done', error: null }, failure: null });
    }

    match = path.match(/^\/segments\/([^/]+)\/results$/);
    if (method === 'GET' && match) {
      const results = this.results.get(match[1]);
      if (!results) return respond(404, { detail: 'no results for segment' });
      return respond(200, results);
    }

    match = path.match(/^\/segments\/([^/]+)\/groundtruth$/);
    if (method === 'PUT' && match) {
      if (!this.segments.has(match[1])) return respond(404, { detail: 'segment not found' });
      const truth = body as GroundTruth;
      if (truth.entry_frame >= truth.exit_frame) {
        return respond(422, { detail: 'entry_frame must precede exit_frame' });
      }
      this.truths.set(match[1], truth);
      return respond(200, { schema_version: '1', segment_id: match[1], groundtruth: truth });
    }

    if (method === 'GET' && path.startsWith('/evaluation')) {
      if (this.truths.size === 0) return respond(404, { detail: 'no pairs' });
      const group = {
        label: 'traffic_light', count: this.truths.size, failures: 0,
        entry_time_median_s: 0.1, entry_time_iqr_s: [0.05, 0.2],
        entry_distance_median_m: 1.0, entry_distance_iqr_m: [0.5, 2.0],
        dice_median: 0.95, dice_iqr: [0.9, 1.0],
        signage_accuracy_pct: 100, maneuver_accuracy_pct: 100,
      };
      return respond(200, {
        schema_version: '1', total_cases: this.truths.size, total_failures: 0,
        groupings: { none: [group], signage: [group], maneuver: [group] },
      });
    }

    return respond(404, { detail: `unhandled ${method} ${path}` });
  }
}
