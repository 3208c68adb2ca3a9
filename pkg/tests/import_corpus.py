"""Hand-labeled import-extraction corpus: 50 source files covering the
whole recognized grammar plus the comment/string traps, each with its
expected records as (module, top_level, style, alias, line) tuples.

Labels were assigned by hand from the source text; keep them that way —
they are the ground truth the extractor is judged against, not a mirror
of its output.
"""

from __future__ import annotations

CORPUS = [
    ("plain_simple",
     ["import os"],
     [("os", "os", "plain", None, 1)]),

    ("plain_alias",
     ["import numpy as np"],
     [("numpy", "numpy", "plain", "np", 1)]),

    ("plain_dotted",
     ["import os.path"],
     [("os.path", "os", "plain", None, 1)]),

    ("plain_dotted_alias",
     ["import xml.etree.ElementTree as ET"],
     [("xml.etree.ElementTree", "xml", "plain", "ET", 1)]),

    ("plain_list",
     ["import os, sys"],
     [("os", "os", "plain", None, 1),
      ("sys", "sys", "plain", None, 1)]),

    ("plain_list_alias_mix",
     ["import os, numpy as np, sys"],
     [("os", "os", "plain", None, 1),
      ("numpy", "numpy", "plain", "np", 1),
      ("sys", "sys", "plain", None, 1)]),

    ("from_simple",
     ["from os import path"],
     [("os", "os", "from", None, 1)]),

    ("from_dotted",
     ["from sklearn.model_selection import train_test_split"],
     [("sklearn.model_selection", "sklearn", "from", None, 1)]),

    ("from_alias_names",
     ["from collections import OrderedDict as OD, defaultdict"],
     [("collections", "collections", "from", None, 1)]),

    ("from_star",
     ["from os.path import *"],
     [("os.path", "os", "from", None, 1)]),

    ("relative_bare",
     ["from . import utils"],
     [(".", "", "relative", None, 1)]),

    ("relative_named",
     ["from .models import User"],
     [(".models", "models", "relative", None, 1)]),

    ("relative_double",
     ["from ..pkg import mod"],
     [("..pkg", "pkg", "relative", None, 1)]),

    ("relative_triple",
     ["from ...deep.pkg import thing"],
     [("...deep.pkg", "deep", "relative", None, 1)]),

    ("relative_compact",
     ["from.import x"],
     [(".", "", "relative", None, 1)]),

    ("paren_multiline",
     ["from pkg import (",
      "    alpha,",
      "    beta,",
      ")"],
     [("pkg", "pkg", "from", None, 1)]),

    ("paren_multiline_comments",
     ["from pkg.sub import (",
      "    alpha,  # first entry",
      "    beta,",
      ")"],
     [("pkg.sub", "pkg", "from", None, 1)]),

    ("paren_multiline_aliases",
     ["from big.module import (",
      "    one as o,",
      "    two,",
      ")"],
     [("big.module", "big", "from", None, 1)]),

    ("comment_full_line",
     ["# import ghost"],
     []),

    ("comment_inline_keeps_real",
     ["import real  # import fake"],
     [("real", "real", "plain", None, 1)]),

    ("string_single_quoted",
     ["s = 'import ghost'"],
     []),

    ("string_double_quoted",
     ['s = "from x import y"'],
     []),

    ("string_triple_quoted",
     ['text = """',
      "import hidden",
      "from x import y",
      '"""'],
     []),

    ("docstring_then_import",
     ['"""Module docstring.', "import ghost", '"""', "import real"],
     [("real", "real", "plain", None, 4)]),

    ("fstring_trap",
     ["msg = f'import {x}'"],
     []),

    ("raw_string_trap",
     ["pattern = r'import x'"],
     []),

    ("conditional_import",
     ["if True:",
      "    import cond"],
     [("cond", "cond", "plain", None, 2)]),

    ("try_except_imports",
     ["try:",
      "    import fast_path",
      "except ImportError:",
      "    import slow_path as fast_path"],
     [("fast_path", "fast_path", "plain", None, 2),
      ("slow_path", "slow_path", "plain", "fast_path", 4)]),

    ("function_body_import",
     ["def handler():",
      "    import inner",
      "    return inner"],
     [("inner", "inner", "plain", None, 2)]),

    ("class_body_import",
     ["class Config:",
      "    import os as _os"],
     [("os", "os", "plain", "_os", 2)]),

    ("semicolon_statement",
     ["x = 1; import semi"],
     [("semi", "semi", "plain", None, 1)]),

    ("inline_compound",
     ["if ok: import inline"],
     [("inline", "inline", "plain", None, 1)]),

    ("backslash_continuation",
     ["import \\",
      "    cont"],
     [("cont", "cont", "plain", None, 2)]),

    ("imports_between_code",
     ["import first",
      "value = compute()",
      "from second import thing",
      "print(value)",
      "import third"],
     [("first", "first", "plain", None, 1),
      ("second", "second", "from", None, 3),
      ("third", "third", "plain", None, 5)]),

    ("shebang_and_encoding",
     ["#!/usr/bin/env python",
      "# -*- coding: utf-8 -*-",
      "import enc"],
     [("enc", "enc", "plain", None, 3)]),

    ("future_import",
     ["from __future__ import annotations"],
     [("__future__", "__future__", "from", None, 1)]),

    ("deep_dotted",
     ["import a.b.c.d.e"],
     [("a.b.c.d.e", "a", "plain", None, 1)]),

    ("no_imports",
     ["x = 1",
      "print(x)"],
     []),

    ("empty_file",
     [],
     []),

    ("only_comments",
     ["# nothing",
      "# import here either"],
     []),

    ("windows_line_endings",
     ["import win\r", "import dos\r"],
     [("win", "win", "plain", None, 1),
      ("dos", "dos", "plain", None, 2)]),

    ("tab_indented_import",
     ["if True:",
      "\timport tabbed"],
     [("tabbed", "tabbed", "plain", None, 2)]),

    ("dict_colon_trap",
     ["d = {1: 'import x'}",
      "import after_dict"],
     [("after_dict", "after_dict", "plain", None, 2)]),

    ("lambda_trap",
     ["f = lambda: 0",
      "import after_lambda"],
     [("after_lambda", "after_lambda", "plain", None, 2)]),

    ("annotation_trap",
     ["x: int = 5",
      "import after_annotation"],
     [("after_annotation", "after_annotation", "plain", None, 2)]),

    ("yield_from_trap",
     ["def gen():",
      "    yield from source()",
      "import after_yield"],
     [("after_yield", "after_yield", "plain", None, 3)]),

    ("raise_from_trap",
     ["try:",
      "    pass",
      "except ValueError as err:",
      "    raise RuntimeError('no') from err",
      "import after_raise"],
     [("after_raise", "after_raise", "plain", None, 5)]),

    ("unterminated_string_keeps_prefix",
     ["import before",
      "s = '''left open",
      "import ghost"],
     [("before", "before", "plain", None, 1)]),

    ("call_argument_trap",
     ["configure(",
      "    'import inside_call'",
      ")",
      "import after_call"],
     [("after_call", "after_call", "plain", None, 4)]),

    ("slice_colon_trap",
     ["y = x[1:2]",
      "import after_slice"],
     [("after_slice", "after_slice", "plain", None, 2)]),
]

assert len(CORPUS) == 50, f"corpus must stay at 50 files, found {len(CORPUS)}"


def file_source(lines) -> str:
    return "\n".join(lines) + ("\n" if lines else "")
