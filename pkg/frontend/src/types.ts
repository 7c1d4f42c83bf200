/** Payload types for the junctionscan service API (schema_version 1). */

export type Signage = 'stop_sign' | 'traffic_light' | 'none';
export type Maneuver = 'left' | 'right' | 'straight';
export type Geometry = 'four_way' | 't' | 'y';

export interface TripSummary {
  trip_id: string;
  vehicle_id: string | null;
  frame_count: number | null;
}

export interface Waypoint {
  timestamp_ms: number;
  lat: number;
  lon: number;
}

export interface SegmentSummary {
  segment_id: string;
  processed: boolean;
  annotated: boolean;
  job: { state: string; error: string | null };
}

export interface CrossingEvent {
  frame_idx: number;
  distance_m: number;
  clamped: boolean;
}

export interface TurnEvent {
  direction: 'left' | 'right';
  peak_frame: number;
  start_frame: number;
  end_frame: number;
  peak_value: number;
  distance_span_m: number;
  speed_at_peak_mps: number;
}

export interface HaltInterval {
  start_frame: number;
  end_frame: number; // exclusive: the first frame with resumed motion
  min_speed_mps: number;
}

export interface HeadScan {
  direction: 'left' | 'right';
  start_frame: number;
  end_frame: number;
  peak_frame: number;
  magnitude_deg: number;
}

export interface IntersectionResult {
  signage: Signage;
  maneuver: Maneuver;
  entry_frame: number;
  exit_frame: number;
  entry_distance_m: number;
  exit_distance_m: number;
  entry_rule: string;
  exit_rule: string;
  associated_crossing: CrossingEvent | null;
  associated_turn: TurnEvent | null;
  halts: HaltInterval[];
  truncated: boolean;
}

export interface ResultsPayload {
  schema_version: string;
  segment_id: string;
  frame_rate: number;
  frame_count: number;
  time_s: number[];
  distance_m: number[];
  speed_mps: number[];
  signals: { m1: number[]; m2: number[]; smoothing_window: number };
  stop_lines: { tracks: unknown[]; crossings: CrossingEvent[] };
  motion: { turns: TurnEvent[]; halts: HaltInterval[] };
  scene: {
    signage: Signage;
    density: number[] | null;
    passing_frame: number | null;
  };
  scans: HeadScan[];
  result: IntersectionResult | null;
  failure: string | null;
  failure_message: string | null;
}

export interface GroundTruth {
  segment_id?: string;
  entry_frame: number;
  exit_frame: number;
  signage: Signage;
  maneuver: Maneuver;
  geometry?: Geometry | null;
}

export interface GroupStats {
  label: string;
  count: number;
  failures: number;
  entry_time_median_s: number;
  entry_time_iqr_s: [number, number];
  entry_distance_median_m: number;
  entry_distance_iqr_m: [number, number];
  dice_median: number;
  dice_iqr: [number, number];
  signage_accuracy_pct: number;
  maneuver_accuracy_pct: number;
}

export interface EvaluationPayload {
  total_cases: number;
  total_failures: number;
  groupings: Record<string, GroupStats[]>;
}
