import type {
  ControlAction,
  ControlResponse,
  CountsResponse,
  EventsPage,
  Report,
  StatusResponse,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

/** Client for the counter service. All requests share one queue so polls
 *  and control writes never interleave. */
export class ApiClient {
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  status(): Promise<StatusResponse> {
    return this.request('/api/v1/status');
  }

  counts(): Promise<CountsResponse> {
    return this.request('/api/v1/counts');
  }

  events(sinceSeq: number, limit = 100): Promise<EventsPage> {
    return this.request(`/api/v1/events?since_seq=${sinceSeq}&limit=${limit}`);
  }

  report(bucketUs: number, fromUs?: number, toUs?: number): Promise<Report> {
    const params = new URLSearchParams({ bucket: String(bucketUs) });
    if (fromUs !== undefined) params.set('from', String(fromUs));
    if (toUs !== undefined) params.set('to', String(toUs));
    return this.request(`/api/v1/report?${params}`);
  }

  control(action: ControlAction): Promise<ControlResponse> {
    return this.request('/api/v1/control', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ action }),
    });
  }

  snapshotUrl(id: string): string {
    return `${this.baseUrl}/api/v1/snapshots/${id}`;
  }

  async snapshotBytes(id: string): Promise<Uint8Array> {
    return this.enqueue(async () => {
      const resp = await this.fetchImpl(this.snapshotUrl(id));
      if (!resp.ok) {
        throw new ApiError(resp.status, 'not_found', `snapshot ${id} missing`);
      }
      return new Uint8Array(await resp.arrayBuffer());
    });
  }

  private request<T>(path: string, init?: RequestInit): Promise<T> {
    return this.enqueue(async () => {
      const resp = await this.fetchImpl(this.baseUrl + path, init);
      if (!resp.ok) {
        throw await this.toError(resp);
      }
      return (await resp.json()) as T;
    });
  }

  private enqueue<T>(run: () => Promise<T>): Promise<T> {
    const next = this.queue.then(run, run);
    this.queue = next.then(
      () => undefined,
      () => undefined,
    );
    return next;
  }

  private async toError(resp: Response): Promise<ApiError> {
    try {
      const body = (await resp.json()) as { error?: { code?: string; message?: string } };
      return new ApiError(
        resp.status,
        body.error?.code ?? 'http_error',
        body.error?.message ?? resp.statusText ?? `HTTP ${resp.status}`,
      );
    } catch {
      return new ApiError(resp.status, 'http_error', resp.statusText || `HTTP ${resp.status}`);
    }
  }
}
