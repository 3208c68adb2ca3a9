"""Corpus characterization: long-tail usage histograms, top-k usage
tables, availability splits, and keyword frequency reports.

Counts here are synthetic but long-tail shaped: most packages appear in
a handful of files while a few dominate the corpus.
"""

import random

from pkgraph.analytics import (
    DISTRIBUTION_HEADERS,
    KEYWORD_HEADERS,
    USAGE_HEADERS,
    availability_from_packages,
    distribution_rows,
    keyword_frequency,
    render_table,
    top_k_usage,
    usage_histogram,
)

rng = random.Random(7)
stats = {}
for i in range(400):
    stats[f"pkg-{i:03d}"] = max(1, int(rng.paretovariate(0.6)))
stats["numpy"] = 179_815
stats["torch"] = 132_157
total_scripts = 798_669

print("usage histogram (package count per usage interval):")
print(render_table(DISTRIBUTION_HEADERS, distribution_rows(usage_histogram(stats))))

print("top 5 packages by file count:")
rows = top_k_usage(stats, 5, total_scripts)
print(render_table(USAGE_HEADERS, [(r.package, r.count, r.percentage) for r in rows]))

flags = {name: rng.random() < 0.46 for name in stats}
split = availability_from_packages(flags)
print("registry availability split:")
print(render_table(("group", "count", "percentage"), [
    ("registry", split.registry_count, split.registry_percentage),
    ("other", split.other_count, split.other_percentage),
]))

keywords = ["machine learning"] * 41 + ["deep learning"] * 15 + ["testing"] * 11
keywords += [f"niche-topic-{i}" for i in range(80)]
report = keyword_frequency(keywords, top_n=5)
print(f"keywords: {report.unique_keywords} unique, {report.total_occurrences} occurrences")
print(render_table(KEYWORD_HEADERS,
                   [(r.keyword, r.count, r.percentage) for r in report.top]))
