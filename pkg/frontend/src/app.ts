/** Workbench wiring: trip picker + map, segment list, timeline, ROI
 * strip viewer, annotation, and evaluation panels.
 *
 * All state lives on the server; after every mutation the affected
 * panels re-fetch.  409s from concurrent processing and validation 422s
 * surface in the status line.
 */

import { ApiClient, ApiError } from './api.js';
import { AnnotatePanel } from './annotate.js';
import { EvaluationPanel } from './evaluation.js';
import { WaypointMap } from './map.js';
import { TimelineView } from './timeline.js';
import type { GroundTruth, ResultsPayload } from './types.js';

export class Workbench {
  readonly root: HTMLElement;
  readonly map: WaypointMap;
  readonly timeline: TimelineView;
  readonly annotate: AnnotatePanel;
  readonly evaluation: EvaluationPanel;

  private readonly tripSelect: HTMLSelectElement;
  private readonly segmentList: HTMLUListElement;
  private readonly status: HTMLElement;
  private readonly roiImage: HTMLImageElement;
  private currentTrip: string | null = null;
  private currentSegment: string | null = null;
  private currentResults: ResultsPayload | null = null;
  private currentTruth: GroundTruth | null = null;

  constructor(private readonly api: ApiClient) {
    this.root = document.createElement('div');
    this.root.className = 'workbench';

    this.status = document.createElement('p');
    this.status.setAttribute('data-role', 'status');
    this.root.appendChild(this.status);

    this.tripSelect = document.createElement('select');
    this.tripSelect.setAttribute('data-role', 'trip-select');
    this.tripSelect.addEventListener('change', () => {
      void this.selectTrip(this.tripSelect.value);
    });
    this.root.appendChild(this.tripSelect);

    this.map = new WaypointMap({
      onMark: (mark) => {
        void this.createMark(mark.lat, mark.lon);
      },
    });
    this.root.appendChild(this.map.svg);

    this.segmentList = document.createElement('ul');
    this.segmentList.setAttribute('data-role', 'segment-list');
    this.root.appendChild(this.segmentList);

    this.roiImage = document.createElement('img');
    this.roiImage.setAttribute('data-role', 'roi-strip');
    this.roiImage.alt = 'ROI strip for the cursor frame';
    this.roiImage.hidden = true;
    this.timeline = new TimelineView({
      onCursor: (frame) => this.showRoiFrame(frame),
    });
    this.root.appendChild(this.timeline.root);
    this.root.appendChild(this.roiImage);

    this.annotate = new AnnotatePanel(this.api, {
      onSaved: (truth) => {
        this.currentTruth = truth;
        if (this.currentResults) this.timeline.render(this.currentResults, truth);
        void this.evaluation.refresh();
        void this.refreshSegments();
      },
    });
    this.root.appendChild(this.annotate.root);

    this.evaluation = new EvaluationPanel(this.api);
    this.root.appendChild(this.evaluation.root);
  }

  async start(): Promise<void> {
    const { trips } = await this.api.listTrips();
    this.tripSelect.textContent = '';
    for (const trip of trips) {
      const option = document.createElement('option');
      option.value = trip.trip_id;
      option.textContent = trip.trip_id;
      this.tripSelect.appendChild(option);
    }
    if (trips.length) await this.selectTrip(trips[0].trip_id);
    await this.refreshSegments();
    await this.evaluation.refresh();
  }

  async selectTrip(tripId: string): Promise<void> {
    this.currentTrip = tripId;
    const { waypoints } = await this.api.tripWaypoints(tripId);
    this.map.setWaypoints(waypoints);
    this.setStatus(`trip ${tripId}: ${waypoints.length} waypoints`);
  }

  async createMark(lat: number, lon: number): Promise<void> {
    if (!this.currentTrip) return;
    try {
      const created = await this.api.createMark(this.currentTrip, lat, lon);
      this.map.addMark({ lat, lon }, created.segment_id);
      this.setStatus(`created segment ${created.segment_id}`);
      await this.refreshSegments();
    } catch (err) {
      this.setStatus(err instanceof ApiError ? `mark rejected: ${err.message}` : String(err));
    }
  }

  async refreshSegments(): Promise<void> {
    const { segments } = await this.api.listSegments();
    this.segmentList.textContent = '';
    for (const segment of segments) {
      const item = document.createElement('li');
      item.setAttribute('data-segment', segment.segment_id);
      const open = document.createElement('button');
      open.type = 'button';
      open.textContent = `${segment.segment_id}${segment.processed ? '' : ' (unprocessed)'}` +
        `${segment.annotated ? ' *' : ''}`;
      open.addEventListener('click', () => {
        void this.openSegment(segment.segment_id, segment.processed);
      });
      item.appendChild(open);
      this.segmentList.appendChild(item);
    }
  }

  async openSegment(segmentId: string, processed: boolean): Promise<void> {
    this.currentSegment = segmentId;
    this.currentTruth = null;
    try {
      if (!processed) {
        const outcome = await this.api.processSegment(segmentId);
        if (outcome.failure) this.setStatus(`processed with failure: ${outcome.failure}`);
      }
      this.currentResults = await this.api.segmentResults(segmentId);
    } catch (err) {
      this.setStatus(err instanceof ApiError ? `processing: ${err.message}` : String(err));
      return;
    }
    this.timeline.render(this.currentResults, this.currentTruth);
    this.annotate.setSegment(segmentId);
    if (this.currentResults.result) {
      this.annotate.setFrames(this.currentResults.result.entry_frame,
                              this.currentResults.result.exit_frame);
    }
    this.setStatus(`segment ${segmentId} loaded`);
  }

  private showRoiFrame(frame: number): void {
    if (!this.currentSegment) return;
    this.roiImage.hidden = false;
    this.roiImage.src = this.api.roiFrameUrl(this.currentSegment, frame);
  }

  private setStatus(message: string): void {
    this.status.textContent = message;
  }
}
