/** Synchronized evidence timeline.
 *
 * Five tracks share one frame axis: vehicle speed, the M1 and M2 motion
 * signals, the signage density function, and head-scan magnitudes.
 * Overlays show the estimated entry/exit (and ground truth when
 * annotated), halts on the speed track, the associated turn extent on
 * the M1 track, and stop-line crossings.  A vertical cursor follows the
 * pointer across every track; clicking a detected event jumps the cursor
 * to it.  The view renders server payloads only - it never recomputes
 * pipeline values.
 */

import type { GroundTruth, ResultsPayload } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

const TRACK_DEFS: { key: TrackKey; label: string; color: string }[] = [
  { key: 'speed', label: 'speed (m/s)', color: '#2c6e49' },
  { key: 'm1', label: 'M1', color: '#3a6ea5' },
  { key: 'm2', label: 'M2', color: '#b0413e' },
  { key: 'density', label: 'signage density', color: '#8e5fa8' },
  { key: 'scans', label: 'head scans (deg)', color: '#c97b2d' },
];

type TrackKey = 'speed' | 'm1' | 'm2' | 'density' | 'scans';

export interface TimelineOptions {
  width?: number;
  trackHeight?: number;
  onCursor?: (frame: number) => void;
}

const PAD_LEFT = 70;
const PAD_RIGHT = 12;
const TRACK_GAP = 8;

export class TimelineView {
  readonly root: HTMLElement;
  private cursorLine: SVGLineElement | null = null;
  private cursorText: SVGTextElement | null = null;
  private frameCount = 0;
  private plotWidth = 0;

  constructor(private readonly options: TimelineOptions = {}) {
    this.root = document.createElement('div');
    this.root.className = 'timeline';
  }

  render(payload: ResultsPayload, truth: GroundTruth | null = null): void {
    this.root.textContent = '';
    if (payload.failure !== null) {
      const note = document.createElement('p');
      note.className = 'timeline-failure';
      note.textContent = `pipeline failure: ${payload.failure} - ${payload.failure_message ?? ''}`;
      this.root.appendChild(note);
      return;
    }

    const width = this.options.width ?? 900;
    const trackHeight = this.options.trackHeight ?? 64;
    const height = TRACK_DEFS.length * (trackHeight + TRACK_GAP) + 30;
    this.frameCount = payload.frame_count;
    this.plotWidth = width - PAD_LEFT - PAD_RIGHT;

    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
    svg.setAttribute('width', String(width));
    svg.setAttribute('height', String(height));
    svg.setAttribute('class', 'timeline-svg');

    const series: Record<TrackKey, number[]> = {
      speed: payload.speed_mps,
      m1: payload.signals.m1,
      m2: payload.signals.m2,
      density: payload.scene.density ?? new Array(payload.frame_count).fill(0),
      scans: this.scanSeries(payload),
    };

    TRACK_DEFS.forEach((def, i) => {
      const top = i * (trackHeight + TRACK_GAP);
      svg.appendChild(this.renderTrack(def.key, def.label, def.color, series[def.key],
                                       top, trackHeight, payload, truth));
    });

    svg.appendChild(this.renderRuleCaption(payload, truth,
                                           TRACK_DEFS.length * (trackHeight + TRACK_GAP) + 4));
    this.installCursor(svg, height - 26);
    this.root.appendChild(svg);
  }

  /** Scan magnitudes as an impulse series on the shared frame axis. */
  private scanSeries(payload: ResultsPayload): number[] {
    const series = new Array<number>(payload.frame_count).fill(0);
    for (const scan of payload.scans) {
      for (let f = scan.start_frame; f <= scan.end_frame && f < series.length; f += 1) {
        series[f] = scan.magnitude_deg;
      }
    }
    return series;
  }

  private x(frame: number): number {
    const n = Math.max(this.frameCount - 1, 1);
    return PAD_LEFT + (frame / n) * this.plotWidth;
  }

  private renderTrack(key: TrackKey, label: string, color: string, values: number[],
                      top: number, height: number, payload: ResultsPayload,
                      truth: GroundTruth | null): SVGGElement {
    const group = document.createElementNS(SVG_NS, 'g');
    group.setAttribute('data-track', key);

    const frame = document.createElementNS(SVG_NS, 'rect');
    frame.setAttribute('x', String(PAD_LEFT));
    frame.setAttribute('y', String(top));
    frame.setAttribute('width', String(this.plotWidth));
    frame.setAttribute('height', String(height));
    frame.setAttribute('fill', '#fafafa');
    frame.setAttribute('stroke', '#ccc');
    group.appendChild(frame);

    const text = document.createElementNS(SVG_NS, 'text');
    text.setAttribute('x', '4');
    text.setAttribute('y', String(top + height / 2));
    text.setAttribute('class', 'track-label');
    text.setAttribute('font-size', '11');
    text.textContent = label;
    group.appendChild(text);

    // shaded overlays go under the trace
    if (key === 'speed') {
      for (const halt of payload.motion.halts) {
        group.appendChild(this.span(halt.start_frame, halt.end_frame, top, height,
                                    'rgba(176,65,62,0.18)', 'halt', halt.start_frame));
      }
    }
    if (key === 'm1' && payload.result?.associated_turn) {
      const turn = payload.result.associated_turn;
      group.appendChild(this.span(turn.start_frame, turn.end_frame, top, height,
                                  'rgba(58,110,165,0.18)', 'turn', turn.peak_frame));
    }
    if (key === 'density') {
      for (const crossing of payload.stop_lines.crossings) {
        group.appendChild(this.tick(crossing.frame_idx, top, height, '#555', 'crossing'));
      }
    }

    group.appendChild(this.tracePath(values, top, height, color));
    for (const marker of this.entryExitMarkers(payload, truth, top, height)) {
      group.appendChild(marker);
    }
    return group;
  }

  private tracePath(values: number[], top: number, height: number, color: string): SVGPathElement {
    const path = document.createElementNS(SVG_NS, 'path');
    let lo = Math.min(...values, 0);
    let hi = Math.max(...values, 1e-9);
    if (hi === lo) hi = lo + 1;
    const step = Math.max(1, Math.floor(values.length / this.plotWidth));
    const points: string[] = [];
    for (let f = 0; f < values.length; f += step) {
      const y = top + height - ((values[f] - lo) / (hi - lo)) * (height - 4) - 2;
      points.push(`${points.length ? 'L' : 'M'}${this.x(f).toFixed(1)},${y.toFixed(1)}`);
    }
    path.setAttribute('d', points.join(' '));
    path.setAttribute('fill', 'none');
    path.setAttribute('stroke', color);
    path.setAttribute('stroke-width', '1.2');
    path.setAttribute('data-role', 'trace');
    return path;
  }

  private span(startFrame: number, endFrame: number, top: number, height: number,
               fill: string, role: string, jumpFrame: number): SVGRectElement {
    const rect = document.createElementNS(SVG_NS, 'rect');
    rect.setAttribute('x', this.x(startFrame).toFixed(1));
    rect.setAttribute('y', String(top));
    rect.setAttribute('width', Math.max(this.x(endFrame) - this.x(startFrame), 1).toFixed(1));
    rect.setAttribute('height', String(height));
    rect.setAttribute('fill', fill);
    rect.setAttribute('data-role', role);
    rect.setAttribute('cursor', 'pointer');
    rect.addEventListener('click', (event) => {
      event.stopPropagation();
      this.setCursor(jumpFrame);
    });
    return rect;
  }

  private tick(frame: number, top: number, height: number, color: string,
               role: string): SVGLineElement {
    const line = document.createElementNS(SVG_NS, 'line');
    const x = this.x(frame).toFixed(1);
    line.setAttribute('x1', x);
    line.setAttribute('x2', x);
    line.setAttribute('y1', String(top));
    line.setAttribute('y2', String(top + height));
    line.setAttribute('stroke', color);
    line.setAttribute('stroke-dasharray', '3,2');
    line.setAttribute('data-role', role);
    line.setAttribute('cursor', 'pointer');
    line.addEventListener('click', (event) => {
      event.stopPropagation();
      this.setCursor(frame);
    });
    return line;
  }

  private entryExitMarkers(payload: ResultsPayload, truth: GroundTruth | null,
                           top: number, height: number): SVGLineElement[] {
    const markers: SVGLineElement[] = [];
    const add = (frame: number, color: string, role: string) => {
      const line = document.createElementNS(SVG_NS, 'line');
      const x = this.x(frame).toFixed(1);
      line.setAttribute('x1', x);
      line.setAttribute('x2', x);
      line.setAttribute('y1', String(top));
      line.setAttribute('y2', String(top + height));
      line.setAttribute('stroke', color);
      line.setAttribute('stroke-width', '1.6');
      line.setAttribute('data-role', role);
      markers.push(line);
    };
    if (payload.result) {
      add(payload.result.entry_frame, '#2c6e49', 'entry-estimated');
      add(payload.result.exit_frame, '#2c6e49', 'exit-estimated');
    }
    if (truth) {
      add(truth.entry_frame, '#b0413e', 'entry-groundtruth');
      add(truth.exit_frame, '#b0413e', 'exit-groundtruth');
    }
    return markers;
  }

  private renderRuleCaption(payload: ResultsPayload, truth: GroundTruth | null,
                            y: number): SVGTextElement {
    const text = document.createElementNS(SVG_NS, 'text');
    text.setAttribute('x', String(PAD_LEFT));
    text.setAttribute('y', String(y + 12));
    text.setAttribute('font-size', '12');
    text.setAttribute('data-role', 'rule-caption');
    const result = payload.result;
    let caption = 'no result';
    if (result) {
      caption = `entry rule: ${result.entry_rule}   exit rule: ${result.exit_rule}`;
      if (truth) {
        const delta = (payload.time_s[result.entry_frame] - payload.time_s[truth.entry_frame]);
        caption += `   entry delta vs ground truth: ${delta >= 0 ? '+' : ''}${delta.toFixed(2)} s`;
      }
    }
    text.textContent = caption;
    return text;
  }

  private installCursor(svg: SVGSVGElement, plotBottom: number): void {
    const cursor = document.createElementNS(SVG_NS, 'line');
    cursor.setAttribute('y1', '0');
    cursor.setAttribute('y2', String(plotBottom));
    cursor.setAttribute('stroke', '#222');
    cursor.setAttribute('stroke-width', '1');
    cursor.setAttribute('data-role', 'cursor');
    cursor.setAttribute('visibility', 'hidden');
    svg.appendChild(cursor);
    this.cursorLine = cursor;

    const readout = document.createElementNS(SVG_NS, 'text');
    readout.setAttribute('y', '12');
    readout.setAttribute('font-size', '11');
    readout.setAttribute('data-role', 'cursor-readout');
    svg.appendChild(readout);
    this.cursorText = readout;

    svg.addEventListener('mousemove', (event) => {
      const rect = svg.getBoundingClientRect();
      const x = event.clientX - rect.left;
      const n = Math.max(this.frameCount - 1, 1);
      const frame = Math.round(((x - PAD_LEFT) / this.plotWidth) * n);
      if (frame >= 0 && frame < this.frameCount) this.setCursor(frame);
    });
  }

  setCursor(frame: number): void {
    if (!this.cursorLine || !this.cursorText) return;
    const x = this.x(frame).toFixed(1);
    this.cursorLine.setAttribute('x1', x);
    this.cursorLine.setAttribute('x2', x);
    this.cursorLine.setAttribute('visibility', 'visible');
    this.cursorText.setAttribute('x', String(Math.min(parseFloat(x) + 6, PAD_LEFT + this.plotWidth - 60)));
    this.cursorText.textContent = `frame ${frame}`;
    this.options.onCursor?.(frame);
  }
}
