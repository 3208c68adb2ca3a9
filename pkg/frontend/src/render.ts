// HTML renderers. Pure functions from API payloads to markup: the
// rankings shown are exactly the rankings received, and every number
// displays with the same two-decimal half-up convention the backend
// reports use.

import {
  contributionFormula,
  formatScoreCell,
  qualityBand,
  roundHalfUp2,
  vulnerabilityFormula,
} from './format.js';
import type {
  Coefficients,
  CompareResponse,
  PackageDetail,
  Recommendation,
  RecommendResponse,
  SegmentName,
} from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

const SEGMENTS: { name: SegmentName; label: string }[] = [
  { name: 'topical', label: 'T' },
  { name: 'quality', label: 'Q' },
  { name: 'usage', label: 'U' },
  { name: 'vulnerability_penalty', label: 'V' },
];

function renderSegmentBar(rec: Recommendation): string {
  const cells = SEGMENTS.map(({ name, label }) => {
    const value = rec.components[name];
    const width = Math.max(4, Math.round(value * 100));
    return (
      `<button class="segment segment-${name}" data-package="${escapeHtml(rec.package)}"` +
      ` data-segment="${name}" style="--w:${width}"` +
      ` title="${label} = ${roundHalfUp2(value)}">` +
      `${label} ${roundHalfUp2(value)}</button>`
    );
  });
  return `<div class="segment-bar">${cells.join('')}</div>`;
}

export function renderResultCard(rec: Recommendation, rank: number): string {
  const terms = rec.matched_terms
    .map((m) => `<span class="term-chip">${escapeHtml(m.term)} <em>(${m.kind})</em></span>`)
    .join(' ');
  const links = rec.evidence_links
    .map((link) => `<li class="evidence-link">${escapeHtml(link)}</li>`)
    .join('');
  return `
<article class="result-card" data-package="${escapeHtml(rec.package)}" data-rank="${rank}">
  <header>
    <span class="rank">#${rank}</span>
    <h3>${escapeHtml(rec.package)}</h3>
    <span class="total">${roundHalfUp2(rec.total)}</span>
    <button class="basket-add" data-package="${escapeHtml(rec.package)}">+ compare</button>
  </header>
  ${renderSegmentBar(rec)}
  <p class="matched">${terms || '<span class="term-chip none">no topical match</span>'}</p>
  <details class="evidence">
    <summary>evidence (${rec.evidence_links.length})</summary>
    <ul>${links}</ul>
  </details>
</article>`;
}

export function renderResultsPanel(response: RecommendResponse): string {
  const cards = response.recommendations
    .map((rec, index) => renderResultCard(rec, index + 1))
    .join('\n');
  const terms = response.query_echo.terms
    .map((t) => escapeHtml(t.term))
    .join(', ');
  const attrs = response.query_echo.required_attributes.map(escapeHtml).join(', ');
  return `
<section class="results">
  <p class="query-echo">query: <strong>${terms || '(attribute-only)'}</strong>${
    attrs ? ` requiring <strong>${attrs}</strong>` : ''
  }</p>
  ${cards}
</section>`;
}

export function renderInlineGuidance(message: string): string {
  return `<p class="guidance" role="status">${escapeHtml(message)}</p>`;
}

export function renderEmptyResult(diagnostics: string[]): string {
  const rows = diagnostics.map((line) => `<li>${escapeHtml(line)}</li>`).join('');
  return `<div class="guidance empty-result"><p>No package satisfied the query.</p><ul>${rows}</ul></div>`;
}

export function renderServiceBanner(message: string): string {
  return (
    `<div class="banner error" role="alert">service unreachable: ${escapeHtml(message)} ` +
    `<button class="retry">retry</button></div>`
  );
}

export function renderCompareHint(): string {
  return '<p class="compare-hint">Add at least two packages to the basket to compare them.</p>';
}

export function renderCompareMatrix(compare: CompareResponse): string {
  const header = compare.packages
    .map((name) => `<th scope="col">${escapeHtml(name)}</th>`)
    .join('');
  const rows = compare.attributes
    .map((row) => {
      const cells = compare.packages
        .map((name) => {
          const score = row.scores[name] ?? null;
          return (
            `<td class="score-cell${score === null ? ' no-evidence' : ''}">` +
            `${formatScoreCell(score)}<span class="band">${qualityBand(score)}</span></td>`
          );
        })
        .join('');
      return `<tr><th scope="row">${escapeHtml(row.attribute)}</th>${cells}</tr>`;
    })
    .join('\n');
  return `
<table class="compare-matrix">
  <thead><tr><th scope="col">attribute</th>${header}</tr></thead>
  <tbody>
${rows}
  </tbody>
</table>`;
}

export interface ExplainContext {
  coefficients: Coefficients;
  detail?: PackageDetail;
  requiredAttributes?: string[];
}

/** Clicking a score segment reveals the formula term, the coefficient,
 * and the raw inputs that produced it. */
export function renderExplain(
  rec: Recommendation,
  segment: SegmentName,
  context: ExplainContext,
): string {
  const { coefficients, detail } = context;
  const parts: string[] = [];
  const heading = (label: string, coefficient: number, value: number, sign = '+') =>
    `<h4>${escapeHtml(rec.package)} · ${label}</h4>` +
    `<p class="formula">${sign === '-' ? '− ' : ''}${contributionFormula(coefficient, value)}</p>`;

  if (segment === 'topical') {
    parts.push(heading('topical match', coefficients.topical, rec.components.topical));
    const matches = rec.matched_terms
      .map((m) => `<li>${escapeHtml(m.term)} matched a ${m.kind} topic</li>`)
      .join('');
    parts.push(`<ul>${matches || '<li>no topical match</li>'}</ul>`);
  } else if (segment === 'quality') {
    parts.push(heading('quality evidence', coefficients.quality, rec.components.quality));
    const required = context.requiredAttributes ?? [];
    if (detail) {
      const attrs = required.length > 0 ? required : Object.keys(detail.quality);
      const rows = attrs.map((attr) => {
        const cell = detail.quality[attr as keyof typeof detail.quality];
        if (!cell) {
          return `<li>${escapeHtml(attr)}: no evidence → neutral prior 0.50</li>`;
        }
        return (
          `<li>${escapeHtml(attr)}: ${roundHalfUp2(cell.score)} ` +
          `(L${cell.counts.low} M${cell.counts.medium} H${cell.counts.high})</li>`
        );
      });
      parts.push(`<ul>${rows.join('') || '<li>no evidence → neutral prior 0.50</li>'}</ul>`);
    }
  } else if (segment === 'usage') {
    parts.push(heading('log-normalized usage', coefficients.usage, rec.components.usage));
    if (detail?.usage) {
      parts.push(
        `<p>seen in ${detail.usage.script_count} script file(s) across ` +
        `${detail.usage.repo_count} repository(ies), normalized to ` +
        `${roundHalfUp2(rec.components.usage)} on a log scale.</p>`,
      );
    }
  } else {
    parts.push(heading(
      'vulnerability penalty', coefficients.vulnerability,
      rec.components.vulnerability_penalty, '-'));
    if (detail) {
      const unfixed = detail.vulnerabilities.filter((v) => !v.fixed);
      parts.push(`<p class="formula penalty">${vulnerabilityFormula(unfixed.length)}</p>`);
      const ids = unfixed
        .map((v) => `<li class="advisory">${escapeHtml(v.id)} (${escapeHtml(v.severity)})</li>`)
        .join('');
      parts.push(`<ul>${ids || '<li>no unfixed advisories</li>'}</ul>`);
    }
  }
  return `<aside class="explain-panel" data-package="${escapeHtml(rec.package)}" data-segment="${segment}">${parts.join('\n')}</aside>`;
}
