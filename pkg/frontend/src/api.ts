import type {
  Diff,
  ErrorBody,
  Issue,
  NodeDetail,
  Phase,
  ServerStatus,
  Snapshot,
  Summary,
  UploadResult,
} from './types.js';

/** Error envelope from the server, carrying the machine-readable code. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly issues: Issue[];

  constructor(status: number, body: ErrorBody) {
    super(body.error.message);
    this.code = body.error.code;
    this.status = status;
    this.issues = body.issues ?? [];
  }
}

async function decode<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let body: ErrorBody;
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    body = {
      error: { code: 'E_TRANSPORT', message: `HTTP ${response.status}` },
    };
  }
  throw new ApiError(response.status, body);
}

/**
 * Thin typed client for the HTTP API.  One method per endpoint, no
 * caching, no reshaping: the payloads flow to the view untouched.
 */
export class ApiClient {
  constructor(private readonly base: string = '') {}

  private get<T>(path: string): Promise<T> {
    return fetch(this.base + path).then((r) => decode<T>(r));
  }

  status(): Promise<ServerStatus> {
    return this.get('/api/status');
  }

  phases(): Promise<Phase[]> {
    return this.get('/api/phases');
  }

  summary(): Promise<Summary> {
    return this.get('/api/summary');
  }

  snapshot(phase: number): Promise<Snapshot> {
    return this.get(`/api/snapshot/${phase}`);
  }

  diff(from: number, to: number): Promise<Diff> {
    return this.get(`/api/diff/${from}/${to}`);
  }

  node(id: number, phase?: number): Promise<NodeDetail> {
    const suffix = phase === undefined ? '' : `?phase=${phase}`;
    return this.get(`/api/nodes/${id}${suffix}`);
  }

  search(query: string, phase: number): Promise<number[]> {
    const q = encodeURIComponent(query);
    return this.get(`/api/search?q=${q}&phase=${phase}`);
  }

  upload(body: Blob | ArrayBuffer | string, name?: string): Promise<UploadResult> {
    const suffix = name === undefined ? '' : `?name=${encodeURIComponent(name)}`;
    return fetch(`${this.base}/api/upload${suffix}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body,
    }).then((r) => decode<UploadResult>(r));
  }
}
