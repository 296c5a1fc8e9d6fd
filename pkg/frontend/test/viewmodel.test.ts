import { describe, expect, it } from 'vitest';

import {
  CAPACITY_KEY,
  DEFAULT_BASE_URL,
  formatTimestamp,
  isStale,
  loadBaseUrl,
  loadCapacity,
  overCapacity,
  saveBaseUrl,
  saveCapacity,
} from '../src/viewmodel.js';

function fakeStorage(initial: Record<string, string> = {}) {
  const map = new Map(Object.entries(initial));
  return {
    getItem: (k: string) => map.get(k) ?? null,
    setItem: (k: string, v: string) => void map.set(k, v),
    removeItem: (k: string) => void map.delete(k),
  };
}

describe('overCapacity', () => {
  it('is false with no limit set', () => {
    expect(overCapacity(1000, null)).toBe(false);
  });

  it('is false at exactly the limit', () => {
    expect(overCapacity(50, 50)).toBe(false);
  });

  it('is true one above the limit', () => {
    expect(overCapacity(51, 50)).toBe(true);
  });

  it('handles a zero limit', () => {
    expect(overCapacity(0, 0)).toBe(false);
    expect(overCapacity(1, 0)).toBe(true);
  });

  it('handles negative occupancy', () => {
    expect(overCapacity(-2, 0)).toBe(false);
  });
});

describe('isStale', () => {
  it('fresh through three missed polls, stale on the fourth', () => {
    expect(isStale(0)).toBe(false);
    expect(isStale(1)).toBe(false);
    expect(isStale(3)).toBe(false);
    expect(isStale(4)).toBe(true);
  });
});

describe('capacity persistence', () => {
  it('round-trips a limit', () => {
    const storage = fakeStorage();
    saveCapacity(storage, 75);
    expect(loadCapacity(storage)).toBe(75);
  });

  it('clearing removes the key', () => {
    const storage = fakeStorage({ [CAPACITY_KEY]: '10' });
    saveCapacity(storage, null);
    expect(loadCapacity(storage)).toBe(null);
  });

  it('rejects garbage and negatives from storage', () => {
    expect(loadCapacity(fakeStorage({ [CAPACITY_KEY]: 'lots' }))).toBe(null);
    expect(loadCapacity(fakeStorage({ [CAPACITY_KEY]: '-3' }))).toBe(null);
    expect(loadCapacity(fakeStorage({ [CAPACITY_KEY]: '2.5' }))).toBe(null);
  });

  it('defaults to unset', () => {
    expect(loadCapacity(fakeStorage())).toBe(null);
  });
});

describe('base url persistence', () => {
  it('defaults to the local service', () => {
    expect(loadBaseUrl(fakeStorage())).toBe(DEFAULT_BASE_URL);
  });

  it('round-trips and strips trailing slashes', () => {
    const storage = fakeStorage();
    saveBaseUrl(storage, 'http://10.0.0.5:9000/');
    expect(loadBaseUrl(storage)).toBe('http://10.0.0.5:9000');
  });

  it('falls back on an unparseable url', () => {
    const storage = fakeStorage();
    storage.setItem('depthgate.base_url', 'not a url');
    expect(loadBaseUrl(storage)).toBe(DEFAULT_BASE_URL);
  });
});

describe('formatTimestamp', () => {
  it('renders minutes, seconds and milliseconds', () => {
    expect(formatTimestamp(0)).toBe('0:00.000');
    expect(formatTimestamp(33_333)).toBe('0:00.033');
    expect(formatTimestamp(61_500_000)).toBe('1:01.500');
  });
});
