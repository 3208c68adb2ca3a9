"""Static import extraction and corpus scanning.

The extractor tokenizes source text and parses the import grammar from
the token stream; comments and string literals never produce records,
imports inside conditionals and try blocks do. A corpus scan counts each
package once per file and classifies every top-level name.
"""

import tempfile
from pathlib import Path

from pkgraph.imports import Resolver, extract_imports, scan_corpus

SOURCE = '''\
"""Module docstring mentioning import os — not a real import."""
import numpy as np
from sklearn.model_selection import train_test_split
from . import local_helpers

try:
    import fast_parser
except ImportError:
    import slow_parser as fast_parser

# import commented_out
s = "import quoted_out"
'''

print("records extracted:")
for record in extract_imports(SOURCE, filename="example.py"):
    alias = f" as {record.alias}" if record.alias else ""
    print(f"  line {record.line:2d}  {record.style.value:8s} {record.module}{alias}"
          f"   (top level: {record.top_level or '-'})")
print()

# Scan a tiny two-repo corpus. The resolver consults an alias table, the
# standard-library list, then the registry index.
files = {
    "webshop/app.py": "import numpy\nimport numpy as np\nimport internp_util\n",
    "webshop/jobs.py": "from numpy.linalg import norm\nimport os\n",
    "mlpipe/train.py": "import sklearn\nimport numpy\n",
}
with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    resolver = Resolver(registry_index={"numpy", "scikit-learn"},
                        alias_table={"sklearn": "scikit-learn"})
    result = scan_corpus(root, resolver)

print(f"scanned {result.files_scanned} files")
for name, stat in result.usage.items():
    print(f"  {name:15s} scripts={stat.script_count} repos={stat.repo_count}")
print("unresolved:")
for top, use in result.unresolved.items():
    print(f"  {top:15s} files={use.file_count} first seen in {use.example_file}")
print("classification of every distinct top-level name:")
for top, resolution in sorted(result.resolutions.items()):
    print(f"  {top or '(relative)':15s} -> {resolution.category.value}"
          + (f" ({resolution.package})" if resolution.package else ""))
