"""Static extraction of import statements and resolution to packages.

The extractor runs the standard tokenizer over source text and parses the
import grammar from the token stream: comments and string literals never
produce records, multi-line and conditional imports do, and no syntax
tree is built. Files that stop tokenizing cleanly (broken strings,
inconsistent indentation) yield the records found up to that point.
"""

from __future__ import annotations

import io
import logging
import tokenize
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Set, Tuple, Union

from pkgraph._data import read_data_lines, read_file_lines
from pkgraph.errors import PkgraphError
from pkgraph.graph import UsageStat, normalize_name

logger = logging.getLogger(__name__)


class DecodeError(PkgraphError):
    """Source bytes are not valid UTF-8."""


class ImportStyle(str, Enum):
    PLAIN = "plain"
    FROM = "from"
    RELATIVE = "relative"


@dataclass(frozen=True)
class ImportRecord:
    """One import occurrence as written in the source."""

    module: str
    style: ImportStyle
    line: int
    file: str = ""
    alias: Optional[str] = None
    top_level: str = field(init=False)

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError("line numbers start at 1")
        if not self.module:
            raise ValueError("module path must be non-empty")
        is_relative = self.module.startswith(".")
        if is_relative != (self.style is ImportStyle.RELATIVE):
            raise ValueError(f"style {self.style.value!r} inconsistent with module {self.module!r}")
        stripped = self.module.lstrip(".")
        object.__setattr__(self, "top_level", stripped.split(".", 1)[0] if stripped else "")


_INSIGNIFICANT = (tokenize.COMMENT, tokenize.NL)


def _collect_tokens(source: str) -> List[tokenize.TokenInfo]:
    reader = io.StringIO(source).readline
    tokens: List[tokenize.TokenInfo] = []
    try:
        for tok in tokenize.generate_tokens(reader):
            tokens.append(tok)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        # Keep whatever tokenized cleanly; the grammar below is resilient
        # to a truncated stream.
        pass
    return tokens


def _skip_insignificant(tokens: List[tokenize.TokenInfo], i: int) -> int:
    while i < len(tokens) and tokens[i].type in _INSIGNIFICANT:
        i += 1
    return i


def _skip_to_statement_end(tokens: List[tokenize.TokenInfo], i: int) -> int:
    """Advance to (not past) the NEWLINE/`;` that ends the statement."""
    while i < len(tokens):
        tok = tokens[i]
        if tok.type in (tokenize.NEWLINE, tokenize.ENDMARKER):
            return i
        if tok.type == tokenize.OP and tok.string == ";":
            return i
        i += 1
    return i


def _parse_dotted(tokens: List[tokenize.TokenInfo], i: int) -> Tuple[Optional[str], int, int]:
    """Parse NAME ('.' NAME)* returning (dotted, row_of_first_name, next_i)."""
    i = _skip_insignificant(tokens, i)
    n = len(tokens)
    if i >= n or tokens[i].type != tokenize.NAME:
        return None, 0, i
    parts = [tokens[i].string]
    row = tokens[i].start[0]
    i += 1
    while (
        i + 1 < n
        and tokens[i].type == tokenize.OP
        and tokens[i].string == "."
        and tokens[i + 1].type == tokenize.NAME
    ):
        parts.append(tokens[i + 1].string)
        i += 2
    return ".".join(parts), row, i


def _parse_plain_import(
    tokens: List[tokenize.TokenInfo], start: int, records: List[ImportRecord], filename: str
) -> int:
    i = start + 1
    n = len(tokens)
    while True:
        dotted, row, i = _parse_dotted(tokens, i)
        if dotted is None or dotted == "import":
            return _skip_to_statement_end(tokens, i)
        alias = None
        i = _skip_insignificant(tokens, i)
        if i < n and tokens[i].type == tokenize.NAME and tokens[i].string == "as":
            i = _skip_insignificant(tokens, i + 1)
            if i >= n or tokens[i].type != tokenize.NAME:
                return _skip_to_statement_end(tokens, i)
            alias = tokens[i].string
            i += 1
        records.append(
            ImportRecord(module=dotted, style=ImportStyle.PLAIN, line=row, file=filename, alias=alias)
        )
        i = _skip_insignificant(tokens, i)
        if i < n and tokens[i].type == tokenize.OP and tokens[i].string == ",":
            i += 1
            continue
        return i


def _parse_from_import(
    tokens: List[tokenize.TokenInfo], start: int, records: List[ImportRecord], filename: str
) -> int:
    row = tokens[start].start[0]
    i = _skip_insignificant(tokens, start + 1)
    n = len(tokens)
    dots = 0
    while i < n and tokens[i].type == tokenize.OP and set(tokens[i].string) == {"."}:
        dots += len(tokens[i].string)
        i = _skip_insignificant(tokens, i + 1)
    dotted = None
    if i < n and tokens[i].type == tokenize.NAME and tokens[i].string != "import":
        dotted, _, i = _parse_dotted(tokens, i)
        i = _skip_insignificant(tokens, i)
    if (
        i < n
        and tokens[i].type == tokenize.NAME
        and tokens[i].string == "import"
        and (dots or dotted)
    ):
        module = "." * dots + (dotted or "")
        style = ImportStyle.RELATIVE if dots else ImportStyle.FROM
        records.append(ImportRecord(module=module, style=style, line=row, file=filename))
        i += 1
    return _skip_to_statement_end(tokens, i)


def extract_imports(source: Union[str, bytes], filename: str = "<source>") -> List[ImportRecord]:
    """All import statements in `source`, in source order.

    Recognizes plain imports (with aliases and comma lists), from-imports
    including parenthesized multi-line ones, and relative imports.
    Imports inside comments or string literals are never reported;
    imports inside conditional or try blocks are. Raises DecodeError for
    byte input that is not valid UTF-8.
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"{filename}: {exc}") from exc
    tokens = _collect_tokens(source)
    records: List[ImportRecord] = []
    new_statement = True
    depth = 0
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.type in _INSIGNIFICANT:
            i += 1
            continue
        if tok.type in (tokenize.NEWLINE, tokenize.INDENT, tokenize.DEDENT, tokenize.ENDMARKER):
            new_statement = True
            i += 1
            continue
        if tok.type == tokenize.OP:
            if tok.string in "([{":
                depth += 1
            elif tok.string in ")]}":
                depth = max(0, depth - 1)
            new_statement = tok.string == ";" or (tok.string == ":" and depth == 0)
            i += 1
            continue
        if tok.type == tokenize.NAME and new_statement and tok.string == "import":
            i = _parse_plain_import(tokens, i, records, filename)
            new_statement = False
            continue
        if tok.type == tokenize.NAME and new_statement and tok.string == "from":
            i = _parse_from_import(tokens, i, records, filename)
            new_statement = False
            continue
        new_statement = False
        i += 1
    return records


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

class ResolutionCategory(str, Enum):
    REGISTRY = "registry"
    STDLIB = "stdlib"
    LOCAL = "local"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class Resolution:
    top_level: str
    category: ResolutionCategory
    package: Optional[str] = None

    def __post_init__(self) -> None:
        if self.category is ResolutionCategory.REGISTRY and not self.package:
            raise ValueError("registry resolutions must carry a package name")
        if self.category in (ResolutionCategory.LOCAL, ResolutionCategory.UNRESOLVED) and self.package:
            raise ValueError(f"{self.category.value} resolutions must not carry a package name")


STDLIB_POLICIES = ("strict", "registry-shadow")


@lru_cache(maxsize=None)
def default_stdlib_modules() -> frozenset:
    return frozenset(read_data_lines("stdlib_modules.txt"))


@lru_cache(maxsize=None)
def default_alias_table() -> Mapping[str, str]:
    return dict(_parse_alias_lines(read_data_lines("module_aliases.txt")))


def _parse_alias_lines(lines) -> Dict[str, str]:
    table: Dict[str, str] = {}
    for line in lines:
        parts = line.split("\t") if "\t" in line else line.split(None, 1)
        if len(parts) != 2:
            raise ValueError(f"alias lines need two columns, got {line!r}")
        table[parts[0].strip()] = parts[1].strip()
    return table


def load_alias_table(path) -> Dict[str, str]:
    return _parse_alias_lines(read_file_lines(path))


def load_name_set(path) -> frozenset:
    return frozenset(read_file_lines(path))


class Resolver:
    """Maps top-level module names to packages.

    Precedence: alias table, then the standard-library set, then an exact
    registry match on the normalized name, else unresolved. Relative
    imports are local by definition and never looked up.

    stdlib_policy "strict" always classifies standard-library names as
    stdlib; "registry-shadow" lets a registry entry of the same name win,
    for corpora where such names are treated as installable packages.
    """

    def __init__(
        self,
        registry_index,
        alias_table: Optional[Mapping[str, str]] = None,
        stdlib_modules=None,
        stdlib_policy: str = "strict",
    ):
        if stdlib_policy not in STDLIB_POLICIES:
            raise ValueError(f"stdlib_policy must be one of {STDLIB_POLICIES}, got {stdlib_policy!r}")
        self.registry_index = frozenset(normalize_name(name) for name in registry_index)
        self.alias_table = dict(alias_table) if alias_table is not None else dict(default_alias_table())
        self.stdlib_modules = (
            frozenset(stdlib_modules) if stdlib_modules is not None else default_stdlib_modules()
        )
        self.stdlib_policy = stdlib_policy

    def resolve(self, top_level: str) -> Resolution:
        if not top_level:
            return Resolution("", ResolutionCategory.LOCAL)
        alias = self.alias_table.get(top_level)
        if alias is not None:
            return Resolution(top_level, ResolutionCategory.REGISTRY, normalize_name(alias))
        if top_level in self.stdlib_modules:
            if self.stdlib_policy == "registry-shadow":
                candidate = normalize_name(top_level)
                if candidate in self.registry_index:
                    return Resolution(top_level, ResolutionCategory.REGISTRY, candidate)
            return Resolution(top_level, ResolutionCategory.STDLIB)
        candidate = normalize_name(top_level)
        if candidate in self.registry_index:
            return Resolution(top_level, ResolutionCategory.REGISTRY, candidate)
        return Resolution(top_level, ResolutionCategory.UNRESOLVED)

    def resolve_record(self, record: ImportRecord) -> Resolution:
        if record.style is ImportStyle.RELATIVE:
            return Resolution(record.top_level, ResolutionCategory.LOCAL)
        return self.resolve(record.top_level)


def resolve(
    top_level: str,
    registry_index,
    alias_table: Optional[Mapping[str, str]] = None,
    stdlib_set=None,
    stdlib_policy: str = "strict",
) -> Resolution:
    return Resolver(registry_index, alias_table, stdlib_set, stdlib_policy).resolve(top_level)


# ---------------------------------------------------------------------------
# Corpus scanning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnresolvedUse:
    top_level: str
    file_count: int
    example_file: str
    repo_count: int = 0


@dataclass
class ScanResult:
    """Aggregated corpus statistics.

    `usage` counts each package once per file regardless of how many
    imports of it the file contains; `repo_packages` maps each top-level
    repository directory to the registry packages its files use.
    `resolutions` classifies every distinct non-relative top-level name;
    relative imports are folded into the single key "."
    """

    usage: Dict[str, UsageStat]
    unresolved: Dict[str, UnresolvedUse]
    resolutions: Dict[str, Resolution]
    repo_packages: Dict[str, frozenset]
    files_scanned: int
    skipped: List[Tuple[str, str]]


def scan_corpus(root, resolver: Resolver) -> ScanResult:
    """Scan every *.py file under `root`; results do not depend on
    directory traversal order. Unreadable files are logged, skipped, and
    tallied."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root {root} is not a directory")
    files = sorted(p for p in root.rglob("*.py") if p.is_file())

    package_files: Dict[str, Set[str]] = {}
    package_repos: Dict[str, Set[str]] = {}
    unresolved_files: Dict[str, Set[str]] = {}
    unresolved_repos: Dict[str, Set[str]] = {}
    resolutions: Dict[str, Resolution] = {}
    repo_packages: Dict[str, Set[str]] = {}
    skipped: List[Tuple[str, str]] = []
    files_scanned = 0

    for path in files:
        rel = path.relative_to(root).as_posix()
        repo = rel.split("/", 1)[0] if "/" in rel else "."
        try:
            records = extract_imports(path.read_bytes(), filename=rel)
        except (OSError, DecodeError) as exc:
            logger.warning("skipping %s: %s", rel, exc)
            skipped.append((rel, str(exc)))
            continue
        files_scanned += 1
        repo_packages.setdefault(repo, set())
        for record in records:
            resolution = resolver.resolve_record(record)
            if record.style is ImportStyle.RELATIVE:
                resolutions.setdefault(".", Resolution("", ResolutionCategory.LOCAL))
            else:
                resolutions.setdefault(record.top_level, resolution)
            if resolution.category is ResolutionCategory.REGISTRY:
                package_files.setdefault(resolution.package, set()).add(rel)
                package_repos.setdefault(resolution.package, set()).add(repo)
                repo_packages[repo].add(resolution.package)
            elif resolution.category is ResolutionCategory.UNRESOLVED:
                unresolved_files.setdefault(record.top_level, set()).add(rel)
                unresolved_repos.setdefault(record.top_level, set()).add(repo)

    usage = {
        package: UsageStat(
            package=package,
            script_count=len(package_files[package]),
            repo_count=len(package_repos[package]),
        )
        for package in sorted(package_files)
    }
    unresolved = {
        top: UnresolvedUse(
            top_level=top,
            file_count=len(unresolved_files[top]),
            example_file=min(unresolved_files[top]),
            repo_count=len(unresolved_repos[top]),
        )
        for top in sorted(unresolved_files)
    }
    return ScanResult(
        usage=usage,
        unresolved=unresolved,
        resolutions=resolutions,
        repo_packages={repo: frozenset(pkgs) for repo, pkgs in sorted(repo_packages.items())},
        files_scanned=files_scanned,
        skipped=sorted(skipped),
    )


def write_unresolved_report(result: ScanResult, path) -> None:
    """Tab-separated report of unresolved top-level names."""
    rows = sorted(result.unresolved.values(), key=lambda u: (-u.file_count, u.top_level))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("top_level\toccurrence_count\texample_file\n")
        for row in rows:
            handle.write(f"{row.top_level}\t{row.file_count}\t{row.example_file}\n")
