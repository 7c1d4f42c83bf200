/** Grouped accuracy table fed by GET /evaluation. */

import { ApiClient, ApiError } from './api.js';
import type { GroupStats } from './types.js';

function fmt(median: number, iqr: [number, number], digits = 2): string {
  return `${median.toFixed(digits)} [${iqr[0].toFixed(digits)}-${iqr[1].toFixed(digits)}]`;
}

export class EvaluationPanel {
  readonly root: HTMLElement;
  private readonly table: HTMLTableElement;
  private readonly status: HTMLElement;
  private groupBy: 'signage' | 'maneuver' = 'signage';

  constructor(private readonly api: ApiClient) {
    this.root = document.createElement('section');
    this.root.className = 'evaluation-panel';

    const picker = document.createElement('select');
    picker.setAttribute('data-role', 'group-by');
    for (const value of ['signage', 'maneuver']) {
      const option = document.createElement('option');
      option.value = value;
      option.textContent = `group by ${value}`;
      picker.appendChild(option);
    }
    picker.addEventListener('change', () => {
      this.groupBy = picker.value as 'signage' | 'maneuver';
      void this.refresh();
    });
    this.root.appendChild(picker);

    this.status = document.createElement('p');
    this.status.setAttribute('data-role', 'evaluation-status');
    this.root.appendChild(this.status);

    this.table = document.createElement('table');
    this.table.setAttribute('data-role', 'evaluation-table');
    this.root.appendChild(this.table);
  }

  async refresh(): Promise<void> {
    let payload;
    try {
      payload = await this.api.evaluation(this.groupBy);
    } catch (err) {
      this.table.textContent = '';
      this.status.textContent = err instanceof ApiError && err.status === 404
        ? 'no annotated segments yet'
        : `evaluation failed: ${err}`;
      return;
    }
    this.status.textContent =
      `${payload.total_cases} cases, ${payload.total_failures} failures`;
    this.renderTable(payload.groupings[this.groupBy] ?? []);
  }

  private renderTable(groups: GroupStats[]): void {
    this.table.textContent = '';
    const header = this.table.insertRow();
    for (const title of ['category', 'count', 'entry time error (s)',
                         'entry distance error (m)', 'overlap', 'signage %', 'maneuver %']) {
      const cell = document.createElement('th');
      cell.textContent = title;
      header.appendChild(cell);
    }
    for (const group of groups) {
      const row = this.table.insertRow();
      row.insertCell().textContent = group.label;
      row.insertCell().textContent = String(group.count);
      row.insertCell().textContent = fmt(group.entry_time_median_s, group.entry_time_iqr_s);
      row.insertCell().textContent = fmt(group.entry_distance_median_m,
                                         group.entry_distance_iqr_m, 1);
      row.insertCell().textContent = fmt(group.dice_median, group.dice_iqr);
      row.insertCell().textContent = group.signage_accuracy_pct.toFixed(0);
      row.insertCell().textContent = group.maneuver_accuracy_pct.toFixed(0);
    }
  }
}
