/** Waypoint map: trip polylines on a plain SVG canvas.
 *
 * No tile imagery or geocoding; the polyline plus a scale bar is enough
 * to recognize an intersection from the trip shape and click its center.
 * Clicks convert back to lat/lon and are reported to the mark callback.
 */

import type { Waypoint } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface MapMark {
  lat: number;
  lon: number;
}

export interface WaypointMapOptions {
  width?: number;
  height?: number;
  onMark?: (mark: MapMark) => void;
}

interface Projection {
  toX(lon: number): number;
  toY(lat: number): number;
  toLon(x: number): number;
  toLat(y: number): number;
}

function buildProjection(waypoints: Waypoint[], width: number, height: number,
                         pad: number): Projection {
  const lats = waypoints.map((w) => w.lat);
  const lons = waypoints.map((w) => w.lon);
  const latMid = (Math.min(...lats) + Math.max(...lats)) / 2;
  // meters per degree, equirectangular around the trip's latitude
  const mLat = 111194.9;
  const mLon = mLat * Math.cos((latMid * Math.PI) / 180);
  const spanLat = Math.max((Math.max(...lats) - Math.min(...lats)) * mLat, 1);
  const spanLon = Math.max((Math.max(...lons) - Math.min(...lons)) * mLon, 1);
  const scale = Math.min((width - 2 * pad) / spanLon, (height - 2 * pad) / spanLat);
  const lon0 = Math.min(...lons);
  const lat1 = Math.max(...lats);
  return {
    toX: (lon) => pad + (lon - lon0) * mLon * scale,
    toY: (lat) => pad + (lat1 - lat) * mLat * scale,
    toLon: (x) => lon0 + (x - pad) / (mLon * scale),
    toLat: (y) => lat1 - (y - pad) / (mLat * scale),
  };
}

export class WaypointMap {
  readonly svg: SVGSVGElement;
  private projection: Projection | null = null;
  private readonly marksLayer: SVGGElement;
  private readonly width: number;
  private readonly height: number;

  constructor(private readonly options: WaypointMapOptions = {}) {
    this.width = options.width ?? 520;
    this.height = options.height ?? 360;
    this.svg = document.createElementNS(SVG_NS, 'svg');
    this.svg.setAttribute('class', 'waypoint-map');
    this.svg.setAttribute('viewBox', `0 0 ${this.width} ${this.height}`);
    this.svg.setAttribute('width', String(this.width));
    this.svg.setAttribute('height', String(this.height));
    this.marksLayer = document.createElementNS(SVG_NS, 'g');
    this.svg.addEventListener('click', (event) => this.handleClick(event));
  }

  setWaypoints(waypoints: Waypoint[]): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    if (waypoints.length < 2) return;
    this.projection = buildProjection(waypoints, this.width, this.height, 16);
    const path = document.createElementNS(SVG_NS, 'polyline');
    path.setAttribute(
      'points',
      waypoints
        .map((w) => `${this.projection!.toX(w.lon).toFixed(1)},${this.projection!.toY(w.lat).toFixed(1)}`)
        .join(' '),
    );
    path.setAttribute('fill', 'none');
    path.setAttribute('stroke', '#3a6ea5');
    path.setAttribute('stroke-width', '2');
    path.setAttribute('data-role', 'trip-path');
    this.svg.appendChild(path);
    this.svg.appendChild(this.marksLayer);
  }

  addMark(mark: MapMark, label: string): void {
    if (!this.projection) return;
    const dot = document.createElementNS(SVG_NS, 'circle');
    dot.setAttribute('cx', this.projection.toX(mark.lon).toFixed(1));
    dot.setAttribute('cy', this.projection.toY(mark.lat).toFixed(1));
    dot.setAttribute('r', '5');
    dot.setAttribute('fill', '#b0413e');
    dot.setAttribute('data-role', 'mark');
    dot.setAttribute('data-label', label);
    this.marksLayer.appendChild(dot);
  }

  /** Exposed for tests: translate view coordinates back to lat/lon. */
  pointToLatLon(x: number, y: number): MapMark | null {
    if (!this.projection) return null;
    return { lat: this.projection.toLat(y), lon: this.projection.toLon(x) };
  }

  private handleClick(event: MouseEvent): void {
    if (!this.projection || !this.options.onMark) return;
    const rect = this.svg.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    const mark = this.pointToLatLon(x, y);
    if (mark) this.options.onMark(mark);
  }
}
