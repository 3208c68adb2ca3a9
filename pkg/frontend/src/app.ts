// Browser wiring: connects the form, results panel, compare basket, and
// explain panel to the session store. All markup comes from render.ts;
// this file only moves strings into the document and routes events.

import { ApiClient } from './api.js';
import {
  renderCompareHint,
  renderCompareMatrix,
  renderEmptyResult,
  renderExplain,
  renderInlineGuidance,
  renderResultsPanel,
  renderServiceBanner,
} from './render.js';
import { SessionStore } from './state.js';
import type { CompareResponse, SegmentName } from './types.js';

export function initApp(root: Document, client?: ApiClient): SessionStore {
  const api = client ?? new ApiClient('');
  const store = new SessionStore(api, window.localStorage);

  const form = root.querySelector('#story-form') as HTMLFormElement;
  const storyInput = root.querySelector('#story-input') as HTMLTextAreaElement;
  const kInput = root.querySelector('#k-input') as HTMLInputElement;
  const excludeVulnerable = root.querySelector('#exclude-vulnerable') as HTMLInputElement;
  const results = root.querySelector('#results') as HTMLElement;
  const notices = root.querySelector('#notices') as HTMLElement;
  const compare = root.querySelector('#compare') as HTMLElement;
  const basketList = root.querySelector('#basket') as HTMLElement;
  const explain = root.querySelector('#explain') as HTMLElement;

  let lastCompare: CompareResponse | null = null;

  storyInput.value = store.state.story;
  kInput.value = String(store.state.k);
  excludeVulnerable.checked = store.state.filters.exclude_vulnerable;
  if (store.state.lastResponse) {
    results.innerHTML = renderResultsPanel(store.state.lastResponse);
  }
  renderBasket();

  async function submit(): Promise<void> {
    store.setStory(storyInput.value);
    store.setK(Number(kInput.value) || 10);
    store.setFilters({ exclude_vulnerable: excludeVulnerable.checked });
    notices.innerHTML = '';
    const outcome = await store.submitStory();
    switch (outcome.kind) {
      case 'results':
        results.innerHTML = renderResultsPanel(outcome.response);
        break;
      case 'invalid-story':
        notices.innerHTML = renderInlineGuidance(outcome.message);
        break;
      case 'empty-intent':
        notices.innerHTML = renderInlineGuidance(outcome.guidance);
        break;
      case 'empty-result':
        notices.innerHTML = renderEmptyResult(outcome.diagnostics);
        break;
      case 'service-down':
        notices.innerHTML = renderServiceBanner(outcome.message);
        break;
      case 'cancelled':
        break;
    }
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void submit();
  });

  notices.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains('retry')) {
      void submit();
    }
  });

  results.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const pkg = target.dataset.package;
    if (!pkg) {
      return;
    }
    if (target.classList.contains('basket-add')) {
      if (!store.addToBasket(pkg)) {
        notices.innerHTML = renderInlineGuidance('The comparison basket holds at most 5 packages.');
      }
      renderBasket();
      void refreshCompare();
      return;
    }
    if (target.classList.contains('segment')) {
      void showExplain(pkg, target.dataset.segment as SegmentName);
    }
  });

  basketList.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const pkg = target.dataset.package;
    if (pkg && target.classList.contains('basket-remove')) {
      store.removeFromBasket(pkg);
      renderBasket();
      // shrink the matrix from the data already on hand; the remaining
      // columns need no refetch
      if (lastCompare && store.state.basket.length >= 2) {
        compare.innerHTML = renderCompareMatrix({
          packages: lastCompare.packages.filter((name) => store.state.basket.includes(name)),
          attributes: lastCompare.attributes,
        });
      } else if (store.state.basket.length < 2) {
        compare.innerHTML = renderCompareHint();
      }
    }
  });

  function renderBasket(): void {
    basketList.innerHTML = store.state.basket
      .map(
        (name) =>
          `<li>${name} <button class="basket-remove" data-package="${name}">remove</button></li>`,
      )
      .join('');
    if (store.state.basket.length < 2) {
      compare.innerHTML = renderCompareHint();
    }
  }

  async function refreshCompare(): Promise<void> {
    if (store.state.basket.length < 2) {
      return;
    }
    try {
      lastCompare = await api.compare(store.state.basket);
      compare.innerHTML = renderCompareMatrix(lastCompare);
    } catch (error) {
      notices.innerHTML = renderServiceBanner(error instanceof Error ? error.message : String(error));
    }
  }

  async function showExplain(pkg: string, segment: SegmentName): Promise<void> {
    const rec = store.state.lastResponse?.recommendations.find((r) => r.package === pkg);
    if (!rec) {
      return;
    }
    try {
      const detail = await api.packageDetail(pkg);
      explain.innerHTML = renderExplain(rec, segment, {
        coefficients: store.state.coefficients,
        detail,
        requiredAttributes: store.state.lastResponse?.query_echo.required_attributes,
      });
    } catch (error) {
      notices.innerHTML = renderServiceBanner(error instanceof Error ? error.message : String(error));
    }
  }

  return store;
}

declare global {
  interface Window {
    pkgraphStore?: SessionStore;
  }
}

if (typeof document !== 'undefined' && document.querySelector('#story-form')) {
  window.pkgraphStore = initApp(document);
}
