"""Evaluation machinery: classification metrics, coverage, paired
significance tests, and finite-population sample sizing."""

from pkgraph.evalstats import (
    ConfusionCounts,
    classification_metrics,
    coverage,
    mcnemar,
    sample_size,
    topk_agreement,
    weighted_coverage,
    wilcoxon_signed_rank,
)

metrics = classification_metrics(ConfusionCounts(tp=9, fp=1, fn=1, tn=9))
print("classification:", metrics.as_dict())

undefined = classification_metrics(ConfusionCounts(tp=0, fp=0, fn=5, tn=5))
print("no positive predictions ->", undefined.as_dict())
print()

selected = {"numpy", "pandas", "polars", "duckdb"}
recommended = {"numpy", "pandas", "polars", "pyarrow"}
print(f"coverage          : {coverage(selected, recommended):.2f}")
frequencies = {"numpy": 180_000, "pandas": 90_000, "polars": 4_000, "duckdb": 2_500}
print(f"weighted coverage : {weighted_coverage(frequencies, recommended):.4f}")
print(f"top-10 agreement  : {topk_agreement(list('abcdefghij'), list('abcdefghxy'), 10):.2f}")
print()

# Paired significance tests report which computation actually ran.
large = mcnemar(40, 18)
print(f"mcnemar(40, 18): statistic={large.statistic:.3f} p={large.p_value:.4f} "
      f"[{large.method}]")
small = mcnemar(3, 1)
print(f"mcnemar(3, 1)  : statistic={small.statistic:.0f} p={small.p_value:.4f} "
      f"[{small.method}]")

w = wilcoxon_signed_rank([0.91, 0.88, 0.97, 0.91], [0.88, 0.94, 0.99, 0.97])
print(f"wilcoxon       : W={w.statistic} p={w.p_value:.4f} n={w.n_effective} [{w.method}]")
print()

for population in (16_887, 12_137, 2_700, 100):
    print(f"sample size for population {population:>6,} at 95%/5%: "
          f"{sample_size(population, 0.95, 0.05)}")
