import { describe, expect, it } from 'vitest';

import {
  contributionFormula,
  formatScoreCell,
  qualityBand,
  roundHalfUp2,
  vulnerabilityFormula,
} from '../src/format.js';

describe('roundHalfUp2', () => {
  it('rounds halves up, not to even', () => {
    expect(roundHalfUp2(0.125)).toBe('0.13');
    expect(roundHalfUp2(0.375)).toBe('0.38');
    expect(roundHalfUp2(0.005)).toBe('0.01');
  });

  it('renders plain two-decimal values', () => {
    expect(roundHalfUp2(0.7583333333333333)).toBe('0.76');
    expect(roundHalfUp2(1)).toBe('1.00');
    expect(roundHalfUp2(0)).toBe('0.00');
    expect(roundHalfUp2(0.6826061944859853)).toBe('0.68');
  });

  it('handles negatives symmetrically', () => {
    expect(roundHalfUp2(-0.125)).toBe('-0.13');
  });
});

describe('formatScoreCell', () => {
  it('distinguishes no-evidence from zero', () => {
    expect(formatScoreCell(null)).toBe('—');
    expect(formatScoreCell(0)).toBe('0.00');
  });
});

describe('qualityBand', () => {
  it('bands scores into low / medium / high', () => {
    expect(qualityBand(0.1)).toBe('low');
    expect(qualityBand(0.33)).toBe('medium');
    expect(qualityBand(0.5)).toBe('medium');
    expect(qualityBand(0.67)).toBe('high');
    expect(qualityBand(1.0)).toBe('high');
    expect(qualityBand(null)).toBe('—');
  });
});

describe('formula echoes', () => {
  it('renders the saturating vulnerability penalty', () => {
    expect(vulnerabilityFormula(2)).toBe('min(1, 0.25 × 2) = 0.50');
    expect(vulnerabilityFormula(1)).toBe('min(1, 0.25 × 1) = 0.25');
    expect(vulnerabilityFormula(0)).toBe('min(1, 0.25 × 0) = 0.00');
    expect(vulnerabilityFormula(9)).toBe('min(1, 0.25 × 9) = 1.00');
  });

  it('renders coefficient times component', () => {
    expect(contributionFormula(0.5, 1)).toBe('0.5 × 1.00 = 0.50');
    expect(contributionFormula(0.2, 0.6666666666666666)).toBe('0.2 × 0.67 = 0.13');
  });
});
