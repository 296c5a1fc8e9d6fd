// Pure view-state rules, kept out of the DOM layer so they are testable.

export const CAPACITY_KEY = 'depthgate.capacity_limit';
export const BASE_URL_KEY = 'depthgate.base_url';
export const DEFAULT_BASE_URL = 'http://127.0.0.1:8787';

/** Over capacity iff a limit is set and occupancy strictly exceeds it. */
export function overCapacity(occupancy: number, limit: number | null): boolean {
  return limit !== null && occupancy > limit;
}

/** Counts are stale once more than three poll periods pass without a
 *  successful poll. */
export function isStale(missedPolls: number): boolean {
  return missedPolls > 3;
}

type StorageLike = Pick<Storage, 'getItem' | 'setItem' | 'removeItem'>;

export function loadCapacity(storage: StorageLike): number | null {
  const raw = storage.getItem(CAPACITY_KEY);
  if (raw === null) return null;
  const value = Number(raw);
  return Number.isInteger(value) && value >= 0 ? value : null;
}

export function saveCapacity(storage: StorageLike, limit: number | null): void {
  if (limit === null) {
    storage.removeItem(CAPACITY_KEY);
  } else {
    storage.setItem(CAPACITY_KEY, String(limit));
  }
}

export function loadBaseUrl(storage: StorageLike): string {
  const raw = storage.getItem(BASE_URL_KEY);
  if (!raw) return DEFAULT_BASE_URL;
  try {
    new URL(raw);
    return raw.replace(/\/+$/, '');
  } catch {
    return DEFAULT_BASE_URL;
  }
}

export function saveBaseUrl(storage: StorageLike, url: string): void {
  storage.setItem(BASE_URL_KEY, url.replace(/\/+$/, ''));
}

export function formatTimestamp(timestampUs: number): string {
  const totalSeconds = Math.floor(timestampUs / 1_000_000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  const ms = Math.floor((timestampUs % 1_000_000) / 1000);
  return `${minutes}:${String(seconds).padStart(2, '0')}.${String(ms).padStart(3, '0')}`;
}
