// Payload types for /api/v1 — the UI is a pure client of these shapes
// and never re-derives rankings or scores on its own.

export type TopicKind = 'user_defined' | 'developer_defined' | 'taxonomy';

export const QUALITY_ATTRIBUTES = [
  'functional_suitability',
  'performance_efficiency',
  'compatibility',
  'usability',
  'reliability',
  'security',
  'maintainability',
  'portability',
] as const;

export type QualityAttribute = (typeof QUALITY_ATTRIBUTES)[number];

export interface ScoreComponents {
  topical: number;
  quality: number;
  usage: number;
  vulnerability_penalty: number;
}

export type SegmentName = keyof ScoreComponents;

export interface MatchedTerm {
  term: string;
  kind: TopicKind;
}

export interface Recommendation {
  package: string;
  total: number;
  components: ScoreComponents;
  matched_terms: MatchedTerm[];
  evidence_links: string[];
}

export interface WeightedTermEcho {
  term: string;
  weight: number;
}

export interface QueryEcho {
  terms: WeightedTermEcho[];
  required_attributes: string[];
  constraints: {
    exclude_vulnerable: boolean;
    min_quality: number | null;
    runtime_constraint: string | null;
  };
  k: number;
}

export interface RecommendResponse {
  recommendations: Recommendation[];
  query_echo: QueryEcho;
  graph_build_timestamp: number | null;
}

export interface RecommendFilters {
  exclude_vulnerable: boolean;
  min_quality: number | null;
  required_attributes: string[];
}

export interface Coefficients {
  topical: number;
  quality: number;
  usage: number;
  vulnerability: number;
}

export const DEFAULT_COEFFICIENTS: Coefficients = {
  topical: 0.5,
  quality: 0.2,
  usage: 0.2,
  vulnerability: 0.3,
};

export interface RecommendRequest {
  story: string;
  k: number;
  filters?: Partial<RecommendFilters>;
  coefficients?: Partial<Coefficients>;
}

export interface VulnerabilityInfo {
  id: string;
  severity: string;
  fixed: boolean;
  affected_ranges: { introduced: string; fixed: string | null }[];
}

export interface QualityCell {
  score: number;
  counts: { low: number; medium: number; high: number };
}

export interface PackageDetail {
  package: {
    name: string;
    display_name: string;
    registry_available: boolean;
    first_seen: number | null;
    last_seen: number | null;
  };
  topics: { kind: TopicKind; term: string; source: string }[];
  metadata: Record<string, unknown>[];
  vulnerabilities: VulnerabilityInfo[];
  quality: Partial<Record<QualityAttribute, QualityCell>>;
  usage: { script_count: number; repo_count: number } | null;
}

export interface CompareResponse {
  packages: string[];
  attributes: { attribute: QualityAttribute; scores: Record<string, number | null> }[];
}

export interface HealthResponse {
  status: string;
  graph_build_timestamp: number | null;
  snapshot_format: string;
}
