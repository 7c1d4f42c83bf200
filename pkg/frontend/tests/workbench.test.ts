/** Workbench tests against the mock server, including the acceptance
 * checks: marking creates a segment via the documented endpoint,
 * inverted annotations are rejected, and the timeline renders all five
 * tracks plus both entry markers from a golden results payload.
 */

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { AnnotatePanel } from '../src/annotate.js';
import { TimelineView } from '../src/timeline.js';
import { Workbench } from '../src/app.js';
import type { GroundTruth, ResultsPayload } from '../src/types.js';
import { MockServer } from './mock-server.js';
import goldenJson from './fixtures/golden-results.json';
import goldenTruthJson from './fixtures/golden-groundtruth.json';

const golden = goldenJson as unknown as ResultsPayload;
const goldenTruth = goldenTruthJson as unknown as GroundTruth;

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

describe('marking intersections', () => {
  let server: MockServer;
  let workbench: Workbench;

  beforeEach(async () => {
    server = new MockServer();
    workbench = new Workbench(new ApiClient('', server.fetch));
    document.body.textContent = '';
    document.body.appendChild(workbench.root);
    await workbench.start();
  });

  it('creates a segment through POST /trips/{id}/marks', async () => {
    const wp = server.waypoints[10];
    await workbench.createMark(wp.lat, wp.lon);
    const markCalls = server.calls.filter(
      (c) => c.method === 'POST' && c.path === '/trips/trip-1/marks');
    expect(markCalls).toHaveLength(1);
    expect(markCalls[0].body).toMatchObject({ lat: wp.lat, lon: wp.lon });

    // the new segment shows up in the segment list
    const items = workbench.root.querySelectorAll('[data-segment]');
    expect([...items].map((el) => el.getAttribute('data-segment'))).toContain('trip-1-m001');
    expect(workbench.root.querySelector('[data-role="status"]')!.textContent)
      .toContain('trip-1-m001');
  });

  it('maps click coordinates back to lat/lon on the trip path', async () => {
    const wp = server.waypoints[5];
    const x = 16; // left padding; the trip is a vertical line in this fixture
    const yMid = 180;
    const mark = workbench.map.pointToLatLon(x, yMid);
    expect(mark).not.toBeNull();
    expect(Math.abs(mark!.lon - wp.lon)).toBeLessThan(0.01);
  });

  it('surfaces a rejected far-off mark', async () => {
    await workbench.createMark(10.0, 10.0);
    expect(workbench.root.querySelector('[data-role="status"]')!.textContent)
      .toContain('mark rejected');
    const items = workbench.root.querySelectorAll('[data-segment]');
    expect(items).toHaveLength(0);
  });

  it('duplicate marks get distinct segment ids', async () => {
    const wp = server.waypoints[10];
    await workbench.createMark(wp.lat, wp.lon);
    await workbench.createMark(wp.lat, wp.lon);
    const ids = [...workbench.root.querySelectorAll('[data-segment]')]
      .map((el) => el.getAttribute('data-segment'));
    expect(ids).toContain('trip-1-m001');
    expect(ids).toContain('trip-1-m002');
  });
});

describe('annotation panel', () => {
  let server: MockServer;
  let panel: AnnotatePanel;
  let saved: GroundTruth | null;

  beforeEach(() => {
    server = new MockServer();
    server.addSegment('seg-1', golden);
    saved = null;
    panel = new AnnotatePanel(new ApiClient('', server.fetch), {
      onSaved: (truth) => { saved = truth; },
    });
    document.body.textContent = '';
    document.body.appendChild(panel.root);
    panel.setSegment('seg-1');
  });

  it('blocks entry >= exit before any request is made', async () => {
    panel.setFrames(480, 300);
    const result = await panel.save();
    expect(result).toBeNull();
    const error = panel.root.querySelector('[data-role="annotate-error"]') as HTMLElement;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain('entry frame must be before exit frame');
    expect(server.calls.filter((c) => c.method === 'PUT')).toHaveLength(0);
    expect(saved).toBeNull();
  });

  it('surfaces a server-side 422 inline', async () => {
    // bypass the client-side check to prove the server response is shown
    const api = new ApiClient('', server.fetch);
    await expect(api.putGroundTruth('seg-1', {
      entry_frame: 480, exit_frame: 300, signage: 'traffic_light', maneuver: 'straight',
    })).rejects.toMatchObject({ status: 422 });
  });

  it('saves a valid annotation', async () => {
    panel.setFrames(goldenTruth.entry_frame, goldenTruth.exit_frame);
    const result = await panel.save();
    expect(result).not.toBeNull();
    expect(saved).not.toBeNull();
    const put = server.calls.find((c) => c.method === 'PUT');
    expect(put?.path).toBe('/segments/seg-1/groundtruth');
    expect(put?.body).toMatchObject({
      entry_frame: goldenTruth.entry_frame,
      exit_frame: goldenTruth.exit_frame,
    });
  });
});

describe('timeline', () => {
  it('renders all five tracks and both entry markers from the golden payload', () => {
    const view = new TimelineView();
    view.render(golden, goldenTruth);
    const tracks = view.root.querySelectorAll('[data-track]');
    expect([...tracks].map((el) => el.getAttribute('data-track')))
      .toEqual(['speed', 'm1', 'm2', 'density', 'scans']);
    expect(view.root.querySelectorAll('[data-role="entry-estimated"]').length)
      .toBeGreaterThan(0);
    expect(view.root.querySelectorAll('[data-role="entry-groundtruth"]').length)
      .toBeGreaterThan(0);
    expect(view.root.querySelectorAll('[data-role="trace"]')).toHaveLength(5);
  });

  it('shades the halt on the speed track and the turn on the M1 track', () => {
    const view = new TimelineView();
    view.render(golden, null);
    const speedTrack = view.root.querySelector('[data-track="speed"]')!;
    expect(speedTrack.querySelectorAll('[data-role="halt"]').length)
      .toBe(golden.motion.halts.length);
    const m1Track = view.root.querySelector('[data-track="m1"]')!;
    expect(m1Track.querySelectorAll('[data-role="turn"]')).toHaveLength(1);
  });

  it('shows the fired rules and the entry delta when truth is present', () => {
    const view = new TimelineView();
    view.render(golden, goldenTruth);
    const caption = view.root.querySelector('[data-role="rule-caption"]')!;
    expect(caption.textContent).toContain(golden.result!.entry_rule);
    expect(caption.textContent).toContain(golden.result!.exit_rule);
    expect(caption.textContent).toContain('entry delta');
  });

  it('clicking a detected event jumps the cursor to it', () => {
    const frames: number[] = [];
    const view = new TimelineView({ onCursor: (frame) => frames.push(frame) });
    view.render(golden, null);
    const turnRect = view.root.querySelector('[data-role="turn"]') as SVGRectElement;
    turnRect.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(frames).toContain(golden.result!.associated_turn!.peak_frame);
    const cursor = view.root.querySelector('[data-role="cursor"]')!;
    expect(cursor.getAttribute('visibility')).toBe('visible');
  });

  it('renders a failure note instead of tracks for failed clips', () => {
    const failed = { ...golden, result: null, failure: 'Unsupported',
                     failure_message: 'no signage and no turn' } as ResultsPayload;
    const view = new TimelineView();
    view.render(failed, null);
    expect(view.root.querySelectorAll('[data-track]')).toHaveLength(0);
    expect(view.root.textContent).toContain('Unsupported');
  });
});

describe('end-to-end workbench flow', () => {
  it('process, review, annotate, evaluate', async () => {
    const server = new MockServer();
    server.addSegment('trip-1-m001', golden);
    const workbench = new Workbench(new ApiClient('', server.fetch));
    document.body.textContent = '';
    document.body.appendChild(workbench.root);
    await workbench.start();
    await workbench.refreshSegments();

    await workbench.openSegment('trip-1-m001', true);
    expect(workbench.root.querySelectorAll('[data-track]')).toHaveLength(5);

    workbench.annotate.setFrames(goldenTruth.entry_frame, goldenTruth.exit_frame);
    await workbench.annotate.save();
    await flush();

    await workbench.evaluation.refresh();
    const table = workbench.root.querySelector('[data-role="evaluation-table"]')!;
    expect(table.textContent).toContain('traffic_light');
    // ground-truth markers joined the timeline after saving
    expect(workbench.root.querySelectorAll('[data-role="entry-groundtruth"]').length)
      .toBeGreaterThan(0);
  });
});
