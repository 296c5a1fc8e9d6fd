// Shapes of the counter service's /api/v1 responses.

export interface Counts {
  entries: number;
  exits: number;
  regret_enter: number;
  regret_exit: number;
  occupancy: number;
}

export interface CountsResponse extends Counts {
  timestamp_us: number;
}

export interface StatusResponse {
  running: boolean;
  paused: boolean;
  eos: boolean;
  degraded: boolean;
  source: string;
  backend: string;
  paced: boolean;
  frames_processed: number;
  frames_dropped: number;
  queue_depth: number;
  last_frame_index: number;
  last_timestamp_us: number;
  last_event_seq: number;
  counts: Counts;
  occupancy_consistent: boolean;
  uptime_s: number;
  error: string | null;
}

export interface CrossingEvent {
  seq: number;
  kind: 'entry' | 'exit' | 'regret_enter' | 'regret_exit';
  frame_index: number;
  timestamp_us: number;
  counts_after: Counts;
  snapshot_id: string | null;
}

export interface EventsPage {
  events: CrossingEvent[];
  next_seq: number;
}

export interface ReportBucket {
  entries: number;
  exits: number;
  regret_enter: number;
  regret_exit: number;
  occupancy_end: number;
}

export interface Report {
  from_us: number;
  to_us: number;
  bucket_us: number;
  buckets: ReportBucket[];
  totals: Omit<ReportBucket, 'occupancy_end'>;
  occupancy_start: number;
  occupancy_end: number;
}

export type ControlAction = 'start' | 'stop' | 'reset' | 'clear_logs';

export interface ControlResponse {
  ok: boolean;
  action: ControlAction;
  status: StatusResponse;
}
