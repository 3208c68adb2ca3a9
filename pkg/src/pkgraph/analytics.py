"""Corpus characterization reports: frequency histograms, top-k usage,
registry availability splits, and keyword distributions.

Percentages are rendered with two decimals using half-up rounding so
report strings are exactly reproducible; the interval convention is
lower-open, upper-closed (a count equal to an edge falls in the bucket
the edge closes).
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from typing import Dict, Iterable, Mapping, Tuple, Union

from pkgraph.errors import PkgraphError
from pkgraph.imports import Resolution, ResolutionCategory

DEFAULT_BUCKET_EDGES = (1, 10, 100, 1_000, 10_000, 50_000, 100_000)


class InvalidCount(PkgraphError):
    """Occurrence counts must be at least 1."""


class InconsistentTotals(PkgraphError):
    """A stated total is smaller than an individual count."""


def format_percent(numerator: int, denominator: int) -> str:
    """`numerator/denominator` as a percentage string with exactly two
    decimals, rounded half-up."""
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    with localcontext() as ctx:
        ctx.prec = 50
        value = (Decimal(numerator) * 100) / Decimal(denominator)
        return str(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class BucketSpec:
    """Ascending interval edges; the first bucket is the singleton x = 1,
    the last is open-ended above the final edge."""

    edges: Tuple[int, ...] = DEFAULT_BUCKET_EDGES

    def __post_init__(self) -> None:
        edges = tuple(self.edges)
        object.__setattr__(self, "edges", edges)
        if not edges or edges[0] != 1:
            raise ValueError("the first bucket must be the singleton x = 1")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("edges must be strictly ascending")
        if any(e < 1 for e in edges):
            raise ValueError("edges must be positive")

    @property
    def bucket_count(self) -> int:
        return len(self.edges) + 1

    def labels(self) -> Tuple[str, ...]:
        out = ["x = 1"]
        for low, high in zip(self.edges, self.edges[1:]):
            out.append(f"{low:,} < x <= {high:,}")
        out.append(f"x > {self.edges[-1]:,}")
        return tuple(out)

    def index_for(self, count: int) -> int:
        if count < 1:
            raise InvalidCount(f"counts must be >= 1, got {count}")
        idx = bisect_left(self.edges, count)
        return idx  # == len(edges) for the open-ended overflow bucket


@dataclass(frozen=True)
class ReportRow:
    label: str
    count: int
    percentage: str


@dataclass(frozen=True)
class DistributionReport:
    rows: Tuple[ReportRow, ...]
    total_items: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        if sum(row.count for row in self.rows) != self.total_items:
            raise ValueError("bucket counts must sum to the total")
        if self.total_items > 0:
            total_pct = sum(Decimal(row.percentage) for row in self.rows)
            if abs(total_pct - 100) > Decimal("0.01") * len(self.rows):
                raise ValueError(f"percentages sum to {total_pct}, outside rounding tolerance")


def _distribution(counts_per_bucket, spec: BucketSpec, total: int) -> DistributionReport:
    labels = spec.labels()
    rows = tuple(
        ReportRow(
            label=labels[i],
            count=counts_per_bucket[i],
            percentage=format_percent(counts_per_bucket[i], total) if total else "n/a",
        )
        for i in range(spec.bucket_count)
    )
    return DistributionReport(rows=rows, total_items=total)


def usage_histogram(stats: Mapping[str, int], spec: BucketSpec = BucketSpec()) -> DistributionReport:
    """Bucket packages by how many files use them; every package lands in
    exactly one bucket. Zero counts are rejected: an unused package has no
    business in usage statistics."""
    buckets = [0] * spec.bucket_count
    for package in stats:
        buckets[spec.index_for(stats[package])] += 1
    return _distribution(buckets, spec, len(stats))


@dataclass(frozen=True)
class UsageRow:
    package: str
    count: int
    percentage: str


def top_k_usage(stats: Mapping[str, int], k: int, total_scripts: int) -> Tuple[UsageRow, ...]:
    """Top-k packages by file count with their share of all scripts."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if stats and total_scripts < max(stats.values()):
        raise InconsistentTotals(
            f"total_scripts={total_scripts} is below the largest count {max(stats.values())}")
    ranked = sorted(stats.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return tuple(
        UsageRow(package=name, count=count, percentage=format_percent(count, total_scripts))
        for name, count in ranked
    )


@dataclass(frozen=True)
class AvailabilitySplit:
    registry_count: int
    other_count: int
    registry_percentage: str
    other_percentage: str


def _split(registry_count: int, other_count: int) -> AvailabilitySplit:
    total = registry_count + other_count
    return AvailabilitySplit(
        registry_count=registry_count,
        other_count=other_count,
        registry_percentage=format_percent(registry_count, total) if total else "n/a",
        other_percentage=format_percent(other_count, total) if total else "n/a",
    )


def availability_split(resolutions: Iterable[Resolution]) -> AvailabilitySplit:
    """Partition distinct resolved names into registry-available and not.

    Registry hits are deduplicated by package (two import names mapping to
    one distribution count once); other categories by top-level name.
    Local (relative) imports are not packages and are excluded.
    """
    registry = set()
    other = set()
    for res in resolutions:
        if res.category is ResolutionCategory.REGISTRY:
            registry.add(res.package)
        elif res.category in (ResolutionCategory.STDLIB, ResolutionCategory.UNRESOLVED):
            other.add(res.top_level)
    return _split(len(registry), len(other))


def availability_from_packages(flags: Mapping[str, bool]) -> AvailabilitySplit:
    """Same split computed from package -> registry_available flags."""
    registry = sum(1 for available in flags.values() if available)
    return _split(registry, len(flags) - registry)


@dataclass(frozen=True)
class KeywordRow:
    keyword: str
    count: int
    percentage: str


@dataclass(frozen=True)
class KeywordFrequencyReport:
    """Occurrence-count distribution over unique keywords plus the most
    frequent keywords with their share of all occurrences."""

    distribution: DistributionReport
    top: Tuple[KeywordRow, ...]
    unique_keywords: int
    total_occurrences: int


def keyword_frequency(
    occurrences: Union[Mapping[str, int], Iterable[str]],
    spec: BucketSpec = BucketSpec(),
    top_n: int = 10,
) -> KeywordFrequencyReport:
    """Characterize a keyword multiset (mapping keyword -> count, or an
    iterable with repeats)."""
    if isinstance(occurrences, Mapping):
        counts: Dict[str, int] = dict(occurrences)
    else:
        counts = {}
        for keyword in occurrences:
            counts[keyword] = counts.get(keyword, 0) + 1
    for keyword, count in counts.items():
        if count < 1:
            raise InvalidCount(f"keyword {keyword!r} has count {count}")
    total_occurrences = sum(counts.values())
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    top = tuple(
        KeywordRow(keyword=kw, count=c, percentage=format_percent(c, total_occurrences))
        for kw, c in ranked
    )
    return KeywordFrequencyReport(
        distribution=usage_histogram(counts, spec),
        top=top,
        unique_keywords=len(counts),
        total_occurrences=total_occurrences,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_tsv(headers: Tuple[str, ...], rows: Iterable[Tuple]) -> str:
    lines = ["\t".join(headers)]
    for row in rows:
        lines.append("\t".join(str(cell) for cell in row))
    return "\n".join(lines) + "\n"


def render_table(headers: Tuple[str, ...], rows: Iterable[Tuple]) -> str:
    materialized = [tuple(str(cell) for cell in row) for row in rows]
    widths = [len(h) for h in headers]
    for row in materialized:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in materialized)
    return "\n".join(lines) + "\n"


def distribution_rows(report: DistributionReport) -> Iterable[Tuple]:
    return [(row.label, row.count, row.percentage) for row in report.rows]


DISTRIBUTION_HEADERS = ("interval", "count", "percentage")
USAGE_HEADERS = ("package", "count", "percentage")
KEYWORD_HEADERS = ("keyword", "count", "percentage")
