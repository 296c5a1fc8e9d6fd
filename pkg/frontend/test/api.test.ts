import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

function recordingClient(responder: (url: string, init?: RequestInit) => Response) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const client = new ApiClient('http://svc:1', async (url, init) => {
    calls.push({ url, init });
    return responder(url, init);
  });
  return { client, calls };
}

describe('ApiClient urls', () => {
  it('hits the documented routes', async () => {
    const { client, calls } = recordingClient(() => jsonResponse({}));
    await client.counts();
    await client.status();
    await client.events(7, 50);
    await client.report(60_000_000, 5, 99);
    expect(calls.map((c) => c.url)).toEqual([
      'http://svc:1/api/v1/counts',
      'http://svc:1/api/v1/status',
      'http://svc:1/api/v1/events?since_seq=7&limit=50',
      'http://svc:1/api/v1/report?bucket=60000000&from=5&to=99',
    ]);
  });

  it('posts control actions as json', async () => {
    const { client, calls } = recordingClient(() =>
      jsonResponse({ ok: true, action: 'stop', status: {} }),
    );
    const ack = await client.control('stop');
    expect(ack.ok).toBe(true);
    expect(calls[0].init?.method).toBe('POST');
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ action: 'stop' });
  });

  it('builds snapshot urls from event ids', () => {
    const { client } = recordingClient(() => jsonResponse({}));
    expect(client.snapshotUrl('00000012')).toBe('http://svc:1/api/v1/snapshots/00000012');
  });
});

describe('ApiClient errors', () => {
  it('surfaces the service error shape', async () => {
    const { client } = recordingClient(() =>
      jsonResponse({ error: { code: 'bad_request', message: 'limit out of range' } }, 400),
    );
    const err = await client.events(0, 9999).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe('bad_request');
    expect(err.message).toBe('limit out of range');
  });

  it('copes with a non-json error body', async () => {
    const { client } = recordingClient(() => new Response('boom', { status: 502 }));
    const err = await client.counts().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe('http_error');
  });

  it('keeps working after a failed request', async () => {
    let first = true;
    const { client } = recordingClient(() => {
      if (first) {
        first = false;
        return new Response('down', { status: 503 });
      }
      return jsonResponse({ entries: 1 });
    });
    await expect(client.counts()).rejects.toBeInstanceOf(ApiError);
    const counts = await client.counts();
    expect(counts.entries).toBe(1);
  });
});

describe('ApiClient request serialization', () => {
  it('never overlaps two requests', async () => {
    const log: string[] = [];
    let release: (() => void) | null = null;
    const client = new ApiClient('http://svc:1', async (url) => {
      log.push(`start ${url.slice(-6)}`);
      if (release === null) {
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      log.push(`end ${url.slice(-6)}`);
      return jsonResponse({});
    });

    const a = client.counts();
    const b = client.status();
    await new Promise((r) => setTimeout(r, 10));
    expect(log).toEqual(['start counts']); // second request queued, not started
    release?.();
    await Promise.all([a, b]);
    expect(log).toEqual(['start counts', 'end counts', 'start status', 'end status']);
  });
});
