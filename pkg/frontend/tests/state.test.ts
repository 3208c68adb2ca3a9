import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { BASKET_LIMIT, SessionStore, STORAGE_KEY, initialState } from '../src/state.js';
import { stubTrioFetch, TRIO_RECOMMEND } from './trio.js';

class MemoryStorage {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

function makeStore(storage = new MemoryStorage()) {
  const { fetchImpl, calls } = stubTrioFetch();
  const client = new ApiClient('', fetchImpl);
  return { store: new SessionStore(client, storage), calls, storage };
}

describe('session persistence', () => {
  it('survives a reload through storage', async () => {
    const storage = new MemoryStorage();
    const first = makeStore(storage);
    first.store.setStory('web framework');
    const outcome = await first.store.submitStory();
    expect(outcome.kind).toBe('results');
    first.store.addToBasket('django');
    first.store.addToBasket('spacy');

    // a fresh store over the same storage sees the same session
    const second = makeStore(storage);
    expect(second.store.state.story).toBe('web framework');
    expect(second.store.state.basket).toEqual(['django', 'spacy']);
    expect(second.store.state.lastResponse?.recommendations[0].package).toBe('django');
  });

  it('ignores corrupted storage contents', () => {
    const storage = new MemoryStorage();
    storage.setItem(STORAGE_KEY, '{definitely not json');
    const { store } = makeStore(storage);
    expect(store.state).toEqual(initialState());
  });
});

describe('story submission', () => {
  it('does not send a request for an empty story', async () => {
    const { store, calls } = makeStore();
    store.setStory('   ');
    const outcome = await store.submitStory();
    expect(outcome.kind).toBe('invalid-story');
    expect(calls).toHaveLength(0);
  });

  it('replaces results on re-submission', async () => {
    const { store } = makeStore();
    store.setStory('web framework');
    await store.submitStory();
    const before = store.state.lastResponse;
    await store.submitStory();
    expect(store.state.lastResponse).toEqual(before);
    expect(store.state.lastResponse).toEqual(TRIO_RECOMMEND);
  });

  it('keeps state when the service is down', async () => {
    const storage = new MemoryStorage();
    const goodStore = makeStore(storage);
    goodStore.store.setStory('web framework');
    await goodStore.store.submitStory();

    const failingFetch = async () => {
      throw new TypeError('fetch failed');
    };
    const broken = new SessionStore(new ApiClient('', failingFetch), storage);
    const outcome = await broken.submitStory();
    expect(outcome.kind).toBe('service-down');
    expect(broken.state.lastResponse).toEqual(TRIO_RECOMMEND); // preserved
  });

  it('maps 422 empty-intent responses to inline guidance', async () => {
    const emptyIntentFetch = async () =>
      new Response(JSON.stringify({ error: 'empty_intent', detail: 'only function words' }), {
        status: 422,
        headers: { 'Content-Type': 'application/json' },
      });
    const store = new SessionStore(new ApiClient('', emptyIntentFetch), new MemoryStorage());
    store.setStory('I need it for the');
    const outcome = await store.submitStory();
    expect(outcome).toEqual({ kind: 'empty-intent', guidance: 'only function words' });
  });

  it('maps 422 empty-result responses to diagnostics', async () => {
    const emptyResultFetch = async () =>
      new Response(
        JSON.stringify({
          error: 'empty_result',
          detail: 'no candidate satisfied the query',
          diagnostics: ['0 of 4 packages matched the topical terms'],
        }),
        { status: 422, headers: { 'Content-Type': 'application/json' } },
      );
    const store = new SessionStore(new ApiClient('', emptyResultFetch), new MemoryStorage());
    store.setStory('quantum gravity toolkit');
    const outcome = await store.submitStory();
    expect(outcome.kind).toBe('empty-result');
    if (outcome.kind === 'empty-result') {
      expect(outcome.diagnostics).toHaveLength(1);
    }
  });

  it('cancels the in-flight request when a newer one starts', async () => {
    const seenSignals: AbortSignal[] = [];
    const slowFetch = async (_url: string, init?: RequestInit): Promise<Response> => {
      const signal = init?.signal as AbortSignal;
      seenSignals.push(signal);
      if (seenSignals.length === 1) {
        // the first request hangs until it is aborted by the second
        await new Promise<void>((resolve) => {
          signal.addEventListener('abort', () => resolve());
        });
        throw new DOMException('aborted', 'AbortError');
      }
      return new Response(JSON.stringify(TRIO_RECOMMEND), {
        status: 200,
        headers: { 'Content-Type': 'application/json' },
      });
    };
    const store = new SessionStore(new ApiClient('', slowFetch), new MemoryStorage());
    store.setStory('web framework');
    const first = store.submitStory();
    const second = store.submitStory();
    const [firstOutcome, secondOutcome] = await Promise.all([first, second]);
    expect(firstOutcome.kind).toBe('cancelled');
    expect(secondOutcome.kind).toBe('results');
    expect(seenSignals[0].aborted).toBe(true);
    expect(seenSignals[1].aborted).toBe(false);
  });
});

describe('comparison basket', () => {
  it('holds at most five packages and deduplicates', () => {
    const { store } = makeStore();
    for (const name of ['a', 'b', 'c', 'd', 'e']) {
      expect(store.addToBasket(name)).toBe(true);
    }
    expect(store.addToBasket('a')).toBe(true); // already present
    expect(store.addToBasket('f')).toBe(false); // over the limit
    expect(store.state.basket).toHaveLength(BASKET_LIMIT);
  });

  it('removes packages without touching the rest', () => {
    const { store } = makeStore();
    store.addToBasket('a');
    store.addToBasket('b');
    store.removeFromBasket('a');
    expect(store.state.basket).toEqual(['b']);
  });
});
