import type { ApiClient } from './api.js';
import type { CountsResponse, CrossingEvent, StatusResponse } from './types.js';
import { isStale } from './viewmodel.js';

export interface PollerHooks {
  onCounts(counts: CountsResponse): void;
  onStatus(status: StatusResponse): void;
  onEvents(fresh: CrossingEvent[]): void;
  onStale(stale: boolean): void;
  onError(message: string | null): void;
}

/** Drives the 1 Hz refresh: counts, status and any new events per tick.
 *  At most one tick runs at a time; a slow response skips ticks instead of
 *  stacking requests. */
export class Poller {
  missedPolls = 0;
  nextSeq = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;

  constructor(
    private readonly client: ApiClient,
    private readonly hooks: PollerHooks,
    readonly intervalMs = 1000,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      const counts = await this.client.counts();
      const status = await this.client.status();
      const page = await this.client.events(this.nextSeq);
      this.nextSeq = page.next_seq;
      this.missedPolls = 0;
      this.hooks.onCounts(counts);
      this.hooks.onStatus(status);
      if (page.events.length > 0) {
        this.hooks.onEvents(page.events);
      }
      this.hooks.onError(null);
    } catch (err) {
      this.missedPolls++;
      this.hooks.onError(err instanceof Error ? err.message : String(err));
    } finally {
      this.inFlight = false;
      this.hooks.onStale(isStale(this.missedPolls));
    }
  }

  /** After reset or clear_logs the server keeps its sequence numbers, so
   *  re-polling from 0 would replay history; keep nextSeq as is. Only a
   *  brand-new backing service needs a rewind. */
  rewind(): void {
    this.nextSeq = 0;
  }
}
