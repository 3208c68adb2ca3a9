// Session state and the single-flight recommend workflow. State survives
// page reloads through an injectable key-value storage, and a newer
// submission always cancels the one still in flight.

import { ApiClient, ApiError } from './api.js';
import type {
  Coefficients,
  RecommendFilters,
  RecommendRequest,
  RecommendResponse,
} from './types.js';
import { DEFAULT_COEFFICIENTS } from './types.js';

export const STORAGE_KEY = 'pkgraph-session/1';
export const BASKET_LIMIT = 5;

export interface KeyValueStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface SessionState {
  story: string;
  k: number;
  filters: RecommendFilters;
  coefficients: Coefficients;
  lastResponse: RecommendResponse | null;
  basket: string[];
}

export function initialState(): SessionState {
  return {
    story: '',
    k: 10,
    filters: { exclude_vulnerable: false, min_quality: null, required_attributes: [] },
    coefficients: { ...DEFAULT_COEFFICIENTS },
    lastResponse: null,
    basket: [],
  };
}

export type SubmitOutcome =
  | { kind: 'results'; response: RecommendResponse }
  | { kind: 'invalid-story'; message: string }
  | { kind: 'empty-intent'; guidance: string }
  | { kind: 'empty-result'; diagnostics: string[] }
  | { kind: 'service-down'; message: string }
  | { kind: 'cancelled' };

function isAbort(error: unknown): boolean {
  return error instanceof Error && error.name === 'AbortError';
}

export class SessionStore {
  state: SessionState;
  private inFlight: AbortController | null = null;

  constructor(
    private client: ApiClient,
    private storage: KeyValueStorage | null = null,
  ) {
    this.state = this.restore() ?? initialState();
  }

  private restore(): SessionState | null {
    if (!this.storage) {
      return null;
    }
    const raw = this.storage.getItem(STORAGE_KEY);
    if (raw === null) {
      return null;
    }
    try {
      const parsed = JSON.parse(raw) as Partial<SessionState>;
      const base = initialState();
      return {
        ...base,
        ...parsed,
        filters: { ...base.filters, ...(parsed.filters ?? {}) },
        coefficients: { ...base.coefficients, ...(parsed.coefficients ?? {}) },
        basket: (parsed.basket ?? []).slice(0, BASKET_LIMIT),
      };
    } catch {
      return null;
    }
  }

  persist(): void {
    this.storage?.setItem(STORAGE_KEY, JSON.stringify(this.state));
  }

  setStory(story: string): void {
    this.state.story = story;
    this.persist();
  }

  setK(k: number): void {
    this.state.k = k;
    this.persist();
  }

  setFilters(filters: Partial<RecommendFilters>): void {
    this.state.filters = { ...this.state.filters, ...filters };
    this.persist();
  }

  /** Submit the current story; cancels any recommend still in flight. */
  async submitStory(): Promise<SubmitOutcome> {
    if (!this.state.story.trim()) {
      return { kind: 'invalid-story', message: 'Describe what you need before submitting.' };
    }
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const request: RecommendRequest = {
      story: this.state.story,
      k: this.state.k,
      filters: this.state.filters,
    };
    try {
      const response = await this.client.recommend(request, controller.signal);
      this.state.lastResponse = response;
      this.persist();
      return { kind: 'results', response };
    } catch (error) {
      if (isAbort(error)) {
        return { kind: 'cancelled' };
      }
      if (error instanceof ApiError && error.code === 'empty_intent') {
        return { kind: 'empty-intent', guidance: String(error.detail) };
      }
      if (error instanceof ApiError && error.code === 'empty_result') {
        return { kind: 'empty-result', diagnostics: error.diagnostics };
      }
      // network failure or 5xx: keep the session intact and let the UI
      // offer a retry
      return { kind: 'service-down', message: error instanceof Error ? error.message : String(error) };
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
      }
    }
  }

  addToBasket(name: string): boolean {
    if (this.state.basket.includes(name)) {
      return true;
    }
    if (this.state.basket.length >= BASKET_LIMIT) {
      return false;
    }
    this.state.basket.push(name);
    this.persist();
    return true;
  }

  removeFromBasket(name: string): void {
    this.state.basket = this.state.basket.filter((entry) => entry !== name);
    this.persist();
  }
}
