/** Ground-truth annotation panel.
 *
 * Entry/exit frames plus signage, maneuver, and geometry labels.  An
 * entry at or past the exit is blocked client-side before any request is
 * made; the server enforces the same rule and its 422 is surfaced inline
 * if it disagrees for any other reason.
 */

import { ApiClient, ApiError } from './api.js';
import type { Geometry, GroundTruth, Maneuver, Signage } from './types.js';

const SIGNAGE: Signage[] = ['stop_sign', 'traffic_light', 'none'];
const MANEUVERS: Maneuver[] = ['left', 'right', 'straight'];
const GEOMETRIES: Geometry[] = ['four_way', 't', 'y'];

export interface AnnotatePanelOptions {
  onSaved?: (truth: GroundTruth) => void;
}

export class AnnotatePanel {
  readonly root: HTMLElement;
  private readonly entryInput: HTMLInputElement;
  private readonly exitInput: HTMLInputElement;
  private readonly signageSelect: HTMLSelectElement;
  private readonly maneuverSelect: HTMLSelectElement;
  private readonly geometrySelect: HTMLSelectElement;
  private readonly error: HTMLElement;
  private segmentId: string | null = null;

  constructor(private readonly api: ApiClient,
              private readonly options: AnnotatePanelOptions = {}) {
    this.root = document.createElement('form');
    this.root.className = 'annotate-panel';
    this.entryInput = this.numberField('entry frame', 'entry-frame');
    this.exitInput = this.numberField('exit frame', 'exit-frame');
    this.signageSelect = this.selectField('signage', 'signage', SIGNAGE);
    this.maneuverSelect = this.selectField('maneuver', 'maneuver', MANEUVERS);
    this.geometrySelect = this.selectField('geometry', 'geometry', GEOMETRIES);

    const save = document.createElement('button');
    save.type = 'submit';
    save.textContent = 'save ground truth';
    this.root.appendChild(save);

    this.error = document.createElement('p');
    this.error.className = 'annotate-error';
    this.error.setAttribute('data-role', 'annotate-error');
    this.error.hidden = true;
    this.root.appendChild(this.error);

    this.root.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.save();
    });
  }

  setSegment(segmentId: string, existing: GroundTruth | null = null): void {
    this.segmentId = segmentId;
    this.error.hidden = true;
    if (existing) {
      this.entryInput.value = String(existing.entry_frame);
      this.exitInput.value = String(existing.exit_frame);
      this.signageSelect.value = existing.signage;
      this.maneuverSelect.value = existing.maneuver;
      if (existing.geometry) this.geometrySelect.value = existing.geometry;
    }
  }

  /** Exposed for tests and for the timeline's cursor-to-field shortcut. */
  setFrames(entry: number, exitFrame: number): void {
    this.entryInput.value = String(entry);
    this.exitInput.value = String(exitFrame);
  }

  async save(): Promise<GroundTruth | null> {
    if (!this.segmentId) return null;
    const entry = Number(this.entryInput.value);
    const exitFrame = Number(this.exitInput.value);
    if (!Number.isFinite(entry) || !Number.isFinite(exitFrame) || entry < 0) {
      this.showError('entry and exit must be non-negative frame numbers');
      return null;
    }
    if (entry >= exitFrame) {
      this.showError('entry frame must be before exit frame');
      return null;
    }
    const truth: GroundTruth = {
      entry_frame: entry,
      exit_frame: exitFrame,
      signage: this.signageSelect.value as Signage,
      maneuver: this.maneuverSelect.value as Maneuver,
      geometry: this.geometrySelect.value as Geometry,
    };
    try {
      await this.api.putGroundTruth(this.segmentId, truth);
    } catch (err) {
      this.showError(err instanceof ApiError ? err.message : String(err));
      return null;
    }
    this.error.hidden = true;
    this.options.onSaved?.(truth);
    return truth;
  }

  private showError(message: string): void {
    this.error.textContent = message;
    this.error.hidden = false;
  }

  private numberField(label: string, role: string): HTMLInputElement {
    const wrap = document.createElement('label');
    wrap.textContent = label;
    const input = document.createElement('input');
    input.type = 'number';
    input.min = '0';
    input.setAttribute('data-role', role);
    wrap.appendChild(input);
    this.root.appendChild(wrap);
    return input;
  }

  private selectField(label: string, role: string, values: string[]): HTMLSelectElement {
    const wrap = document.createElement('label');
    wrap.textContent = label;
    const select = document.createElement('select');
    select.setAttribute('data-role', role);
    for (const value of values) {
      const option = document.createElement('option');
      option.value = value;
      option.textContent = value;
      select.appendChild(option);
    }
    wrap.appendChild(select);
    this.root.appendChild(wrap);
    return select;
  }
}
