"""Evaluation machinery: classification metrics against consensus labels,
recommendation coverage and agreement, paired significance tests, and
finite-population sample sizing.

The significance tests switch between exact small-sample computations and
asymptotic approximations; the variant that actually ran is reported in
the result's `method` field so downstream analysis can audit it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from pkgraph.errors import PkgraphError


class EmptyEvaluation(PkgraphError):
    """All confusion counts are zero."""


class EmptySelection(PkgraphError):
    """Coverage needs a non-empty ground-truth selection."""


class InsufficientResults(PkgraphError):
    """A ranked list is shorter than the requested cutoff."""


class NoDiscordantPairs(PkgraphError):
    """McNemar's test is undefined when no pair disagrees."""


class NoDifferences(PkgraphError):
    """All paired differences are zero."""


class UnsupportedConfidence(PkgraphError):
    """Sample sizing supports the 0.90 / 0.95 / 0.99 confidence levels."""


# ---------------------------------------------------------------------------
# Classification metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ClassificationMetrics:
    """None means the metric's denominator was zero ("undefined"), which is
    deliberately distinct from a zero score."""

    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    accuracy: float

    def as_dict(self) -> Dict[str, Union[float, str]]:
        return {
            name: ("undefined" if value is None else value)
            for name, value in (
                ("precision", self.precision),
                ("recall", self.recall),
                ("f1", self.f1),
                ("accuracy", self.accuracy),
            )
        }


def classification_metrics(cc: ConfusionCounts) -> ClassificationMetrics:
    if cc.total == 0:
        raise EmptyEvaluation("confusion counts are all zero")
    precision = cc.tp / (cc.tp + cc.fp) if (cc.tp + cc.fp) > 0 else None
    recall = cc.tp / (cc.tp + cc.fn) if (cc.tp + cc.fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    accuracy = (cc.tp + cc.tn) / cc.total
    return ClassificationMetrics(precision=precision, recall=recall, f1=f1, accuracy=accuracy)


# ---------------------------------------------------------------------------
# Coverage and agreement
# ---------------------------------------------------------------------------

def coverage(selected: Set[str], recommended: Set[str]) -> float:
    """Fraction of ground-truth selections present in the recommendations."""
    selected = set(selected)
    if not selected:
        raise EmptySelection("selected set is empty")
    return len(selected & set(recommended)) / len(selected)


def weighted_coverage(selected: Mapping[str, float], recommended: Set[str]) -> float:
    """Coverage with each selection weighted by its usage frequency."""
    if not selected:
        raise EmptySelection("selected set is empty")
    for item, freq in selected.items():
        if freq <= 0:
            raise ValueError(f"frequency for {item!r} must be positive")
    recommended = set(recommended)
    covered = sum(freq for item, freq in selected.items() if item in recommended)
    return covered / sum(selected.values())


def topk_agreement(list_a: Sequence[str], list_b: Sequence[str], k: int) -> float:
    """Overlap of the two top-k prefixes, as a fraction of k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(list_a) < k or len(list_b) < k:
        raise InsufficientResults(
            f"both lists must have at least k={k} entries (got {len(list_a)} and {len(list_b)})")
    return len(set(list_a[:k]) & set(list_b[:k])) / k


# ---------------------------------------------------------------------------
# Paired significance tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McNemarResult:
    statistic: float
    p_value: float
    method: str


def _chi2_sf_1df(x: float) -> float:
    """Upper tail of the chi-square distribution with one degree of freedom."""
    return math.erfc(math.sqrt(x / 2.0))


def mcnemar(b: int, c: int) -> McNemarResult:
    """McNemar's test on discordant pair counts (A-only hits, B-only hits).

    Large samples (b + c >= 25) use the continuity-corrected chi-square
    statistic; smaller ones use the exact two-sided binomial test.
    """
    if b < 0 or c < 0:
        raise ValueError("discordant counts must be non-negative")
    n = b + c
    if n == 0:
        raise NoDiscordantPairs("b + c must be positive")
    if n >= 25:
        statistic = (abs(b - c) - 1) ** 2 / n
        return McNemarResult(
            statistic=statistic,
            p_value=min(1.0, _chi2_sf_1df(statistic)),
            method="chi-square-continuity-corrected",
        )
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1)) / 2 ** n
    return McNemarResult(statistic=float(k), p_value=min(1.0, 2 * tail), method="exact-binomial")


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n_effective: int
    method: str


def _midranks(values: Sequence[float]) -> List[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        midrank = (i + j) / 2 + 1
        for idx in order[i : j + 1]:
            ranks[idx] = midrank
        i = j + 1
    return ranks


def _wilcoxon_exact_p(doubled_ranks: Sequence[int], doubled_w: int) -> float:
    """Two-sided exact p via the null distribution of the positive-rank sum.

    Dynamic programming over achievable (doubled) rank sums enumerates all
    2^n sign assignments without listing them.
    """
    total = sum(doubled_ranks)
    dist = [0] * (total + 1)
    dist[0] = 1
    for dr in doubled_ranks:
        nxt = dist[:]
        for s in range(total - dr + 1):
            if dist[s]:
                nxt[s + dr] += dist[s]
        dist = nxt
    cumulative = sum(dist[: doubled_w + 1])
    return min(1.0, 2 * cumulative / 2 ** len(doubled_ranks))


def wilcoxon_signed_rank(
    x: Sequence[float], y: Optional[Sequence[float]] = None, exact_threshold: int = 25
) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test.

    `x` is either the differences directly or the first sample with `y` as
    its pair. Zero differences are dropped; ties in |d| get midranks. Up to
    `exact_threshold` effective pairs the p-value is exact over all sign
    assignments, beyond that a tie-corrected normal approximation is used.
    """
    if y is not None:
        if len(x) != len(y):
            raise ValueError("paired samples must have equal length")
        diffs = [a - b for a, b in zip(x, y)]
    else:
        diffs = list(x)
    if not diffs:
        raise ValueError("at least one pair is required")
    diffs = [d for d in diffs if d != 0]
    n = len(diffs)
    if n == 0:
        raise NoDifferences("all paired differences are zero")
    magnitudes = [abs(d) for d in diffs]
    ranks = _midranks(magnitudes)
    w_plus = sum(r for d, r in zip(diffs, ranks) if d > 0)
    w_minus = sum(r for d, r in zip(diffs, ranks) if d < 0)
    statistic = min(w_plus, w_minus)
    if n <= exact_threshold:
        doubled = [round(2 * r) for r in ranks]
        p = _wilcoxon_exact_p(doubled, round(2 * statistic))
        return WilcoxonResult(statistic=statistic, p_value=p, n_effective=n, method="exact")
    mean = n * (n + 1) / 4
    tie_counts: Dict[float, int] = {}
    for magnitude in magnitudes:
        tie_counts[magnitude] = tie_counts.get(magnitude, 0) + 1
    tie_term = sum(t ** 3 - t for t in tie_counts.values()) / 48
    variance = n * (n + 1) * (2 * n + 1) / 24 - tie_term
    z = (statistic - mean) / math.sqrt(variance)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
    return WilcoxonResult(statistic=statistic, p_value=p, n_effective=n,
                          method="normal-approximation")


# ---------------------------------------------------------------------------
# Sample sizing
# ---------------------------------------------------------------------------

_SUPPORTED_CONFIDENCE = (0.90, 0.95, 0.99)


def sample_size(population: int, confidence: float, margin: float) -> int:
    """Required sample size at the given confidence level and margin of
    error, with finite population correction (maximum-variance p = 0.5)."""
    if population < 1:
        raise ValueError("population must be >= 1")
    if not any(math.isclose(confidence, c) for c in _SUPPORTED_CONFIDENCE):
        raise UnsupportedConfidence(f"confidence must be one of {_SUPPORTED_CONFIDENCE}")
    if not (0.0 < margin < 1.0):
        raise ValueError("margin must be in (0, 1)")
    z = NormalDist().inv_cdf(1 - (1 - confidence) / 2)
    n0 = z * z * 0.25 / (margin * margin)
    corrected = n0 / (1 + (n0 - 1) / population)
    return math.ceil(corrected)


# ---------------------------------------------------------------------------
# Evaluation input files
# ---------------------------------------------------------------------------

def _data_rows(path) -> List[List[str]]:
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cells = line.split("\t")
            if len(cells) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 tab-separated columns")
            rows.append(cells)
    return rows


def read_classification_file(path, positive_label: str = "1") -> ConfusionCounts:
    """Read (item_id, gold_label, predicted_label) rows into a confusion
    table with respect to `positive_label`."""
    tp = fp = fn = tn = 0
    for _, gold, predicted in _data_rows(path):
        gold_positive = gold.strip() == positive_label
        predicted_positive = predicted.strip() == positive_label
        if gold_positive and predicted_positive:
            tp += 1
        elif not gold_positive and predicted_positive:
            fp += 1
        elif gold_positive and not predicted_positive:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def read_paired_file(path) -> List[Tuple[float, float]]:
    """Read (item_id, outcome_A, outcome_B) rows as paired scores."""
    pairs = []
    for _, a, b in _data_rows(path):
        try:
            pairs.append((float(a), float(b)))
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric outcome in row for {a!r}/{b!r}") from exc
    return pairs


def paired_outcomes_are_binary(pairs: Iterable[Tuple[float, float]]) -> bool:
    return all(a in (0.0, 1.0) and b in (0.0, 1.0) for a, b in pairs)


def discordant_counts(pairs: Iterable[Tuple[float, float]]) -> Tuple[int, int]:
    """(A-only hits, B-only hits) from binary paired outcomes."""
    materialized = list(pairs)
    b = sum(1 for a, bb in materialized if a == 1.0 and bb == 0.0)
    c = sum(1 for a, bb in materialized if a == 0.0 and bb == 1.0)
    return b, c
