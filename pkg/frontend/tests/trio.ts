// Stubbed-service fixture: the exact /api/v1 payloads the backend
// produces for the three-package demo graph (one seeded unfixed
// advisory on django, quality scores from seeded reviews).

import type {
  CompareResponse,
  HealthResponse,
  PackageDetail,
  RecommendResponse,
} from '../src/types.js';

export const TRIO_RECOMMEND: RecommendResponse = {
  recommendations: [
    {
      package: 'django',
      total: 0.7583333333333333,
      components: {
        topical: 1.0,
        quality: 0.6666666666666666,
        usage: 1.0,
        vulnerability_penalty: 0.25,
      },
      matched_terms: [
        { term: 'web framework', kind: 'developer_defined' },
        { term: 'web framework', kind: 'taxonomy' },
      ],
      evidence_links: [
        'advisory:CVE-2024-90001',
        'topic:registry:django:5.0',
        'topic:repo:search',
      ],
    },
    {
      package: 'selenium',
      total: 0.7365212388971971,
      components: {
        topical: 0.8,
        quality: 1.0,
        usage: 0.6826061944859853,
        vulnerability_penalty: 0.0,
      },
      matched_terms: [
        { term: 'web framework', kind: 'taxonomy' },
        { term: 'web framework', kind: 'user_defined' },
      ],
      evidence_links: [
        'topic:repo:api.github.com/qatools/browsersuite',
        'topic:repo:search',
      ],
    },
    {
      package: 'spacy',
      total: 0.4722706232293572,
      components: {
        topical: 0.6,
        quality: 0.0,
        usage: 0.8613531161467861,
        vulnerability_penalty: 0.0,
      },
      matched_terms: [{ term: 'web framework', kind: 'taxonomy' }],
      evidence_links: ['topic:repo:search'],
    },
  ],
  query_echo: {
    terms: [{ term: 'web framework', weight: 1.0 }],
    required_attributes: [],
    constraints: { exclude_vulnerable: false, min_quality: null, runtime_constraint: null },
    k: 3,
  },
  graph_build_timestamp: 1714400000,
};

export const DJANGO_DETAIL: PackageDetail = {
  package: {
    name: 'django',
    display_name: 'django',
    registry_available: true,
    first_seen: null,
    last_seen: null,
  },
  topics: [
    { kind: 'developer_defined', term: 'orm', source: 'registry:django:5.0' },
    { kind: 'developer_defined', term: 'templates', source: 'registry:django:5.0' },
    { kind: 'developer_defined', term: 'web framework', source: 'registry:django:5.0' },
    { kind: 'taxonomy', term: 'web framework', source: 'repo:search' },
    { kind: 'user_defined', term: 'ecommerce', source: 'repo:api.github.com/pyshop/storefront' },
  ],
  metadata: [],
  vulnerabilities: [
    {
      id: 'CVE-2024-90001',
      severity: 'high',
      fixed: false,
      affected_ranges: [{ introduced: '0', fixed: null }],
    },
  ],
  quality: {
    performance_efficiency: { score: 0.0, counts: { low: 1, medium: 0, high: 0 } },
    reliability: { score: 1.0, counts: { low: 0, medium: 0, high: 1 } },
    usability: { score: 1.0, counts: { low: 0, medium: 0, high: 1 } },
  },
  usage: { script_count: 4, repo_count: 1 },
};

export const TRIO_COMPARE: CompareResponse = {
  packages: ['spacy', 'django'],
  attributes: [
    { attribute: 'functional_suitability', scores: { spacy: null, django: null } },
    { attribute: 'performance_efficiency', scores: { spacy: null, django: 0.0 } },
    { attribute: 'compatibility', scores: { spacy: null, django: null } },
    { attribute: 'usability', scores: { spacy: null, django: 1.0 } },
    { attribute: 'reliability', scores: { spacy: 0.0, django: 1.0 } },
    { attribute: 'security', scores: { spacy: null, django: null } },
    { attribute: 'maintainability', scores: { spacy: null, django: null } },
    { attribute: 'portability', scores: { spacy: null, django: null } },
  ],
};

export const TRIO_HEALTH: HealthResponse = {
  status: 'ok',
  graph_build_timestamp: 1714400000,
  snapshot_format: 'pkgraph-snapshot/1',
};

type JsonBody = unknown;

function jsonResponse(body: JsonBody, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

/** A fetch stub serving the trio fixture, recording every request. */
export function stubTrioFetch() {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    if (init?.signal?.aborted) {
      throw new DOMException('aborted', 'AbortError');
    }
    if (url.endsWith('/api/v1/health')) {
      return jsonResponse(TRIO_HEALTH);
    }
    if (url.endsWith('/api/v1/recommend')) {
      return jsonResponse(TRIO_RECOMMEND);
    }
    if (url.endsWith('/api/v1/packages/django')) {
      return jsonResponse(DJANGO_DETAIL);
    }
    if (url.endsWith('/api/v1/compare')) {
      return jsonResponse(TRIO_COMPARE);
    }
    return jsonResponse({ error: 'unknown_package', detail: url }, 404);
  };
  return { fetchImpl, calls };
}
