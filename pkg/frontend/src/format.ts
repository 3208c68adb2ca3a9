// Numeric display formatting. Everything user-visible rounds to two
// decimals half-up, matching the convention the backend's reports use.

const HALF_TOLERANCE = 1e-9;

/** Round to 2 decimals, halves up (0.125 -> "0.13", never banker's). */
export function roundHalfUp2(value: number): string {
  if (!Number.isFinite(value)) {
    return '0.00';
  }
  const sign = value < 0 ? -1 : 1;
  const cents = Math.abs(value) * 100;
  const floor = Math.floor(cents);
  const rounded = cents - floor >= 0.5 - HALF_TOLERANCE ? floor + 1 : floor;
  return ((sign * rounded) / 100).toFixed(2);
}

/** Score with the no-evidence dash: null means "no data", not zero. */
export function formatScoreCell(score: number | null): string {
  return score === null ? '—' : roundHalfUp2(score);
}

/** Verbal quality band used by the compare view (presentation only). */
export function qualityBand(score: number | null): string {
  if (score === null) {
    return '—';
  }
  if (score < 0.33) {
    return 'low';
  }
  if (score < 0.67) {
    return 'medium';
  }
  return 'high';
}

/** The saturating vulnerability penalty formula, echoed verbatim. */
export function vulnerabilityFormula(unfixedCount: number): string {
  const penalty = Math.min(1, 0.25 * unfixedCount);
  return `min(1, 0.25 × ${unfixedCount}) = ${roundHalfUp2(penalty)}`;
}

/** One weighted term of the total: "0.5 × 0.80 = 0.40". */
export function contributionFormula(coefficient: number, component: number): string {
  return `${coefficient} × ${roundHalfUp2(component)} = ${roundHalfUp2(coefficient * component)}`;
}
