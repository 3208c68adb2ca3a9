// Thin client for /api/v1. The fetch implementation is injectable so
// tests can stub the service; no selection logic lives here.

import type {
  CompareResponse,
  HealthResponse,
  PackageDetail,
  RecommendRequest,
  RecommendResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: unknown,
    public diagnostics: string[] = [],
  ) {
    super(`${code} (HTTP ${status})`);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'error';
  let detail: unknown = response.statusText;
  let diagnostics: string[] = [];
  try {
    const body = (await response.json()) as {
      error?: string;
      detail?: unknown;
      diagnostics?: string[];
    };
    code = body.error ?? code;
    detail = body.detail ?? detail;
    diagnostics = body.diagnostics ?? [];
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, detail, diagnostics);
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>('/api/v1/health');
  }

  recommend(request: RecommendRequest, signal?: AbortSignal): Promise<RecommendResponse> {
    return this.request<RecommendResponse>('/api/v1/recommend', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
      signal,
    });
  }

  packageDetail(name: string): Promise<PackageDetail> {
    return this.request<PackageDetail>(`/api/v1/packages/${encodeURIComponent(name)}`);
  }

  compare(names: string[]): Promise<CompareResponse> {
    return this.request<CompareResponse>('/api/v1/compare', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ names }),
    });
  }
}
