"""Pluggable annotators: polarity, quality-attribute mapping, intent terms.

A deterministic lexicon/keyword baseline ships in-package; external
annotators (e.g. model-backed ones) plug in through a line-oriented
subprocess protocol. Every annotator declares its capabilities up front
and invoking an undeclared one fails loudly instead of guessing.
"""

from __future__ import annotations

import re
import subprocess
import threading
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Set, Tuple, TypeVar

from pkgraph._data import read_data_lines
from pkgraph.errors import PkgraphError
from pkgraph.quality import PolarityLabel, QualityAttribute

POLARITY = "polarity"
QUALITY_MAPPING = "quality_mapping"
TOPICS = "topics"
INTENT = "intent"
CAPABILITIES = (POLARITY, QUALITY_MAPPING, TOPICS, INTENT)


class CapabilityError(PkgraphError):
    """The annotator does not declare the requested capability."""


class AnnotatorError(PkgraphError):
    """An external annotator failed or returned a malformed response."""


class InvalidInput(PkgraphError):
    """Empty or otherwise unusable annotator input."""


class EmptyIntent(PkgraphError):
    """A user story yielded no usable terms."""


class Tie(PkgraphError):
    """Majority vote had no unique mode under the abstain policy."""


@dataclass(frozen=True)
class WeightedTerm:
    """A query term with a confidence weight in (0, 1]; defaults to 1.0
    for extractors that provide no confidence."""

    term: str
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.term:
            raise ValueError("term must be non-empty")
        if not (0.0 < self.weight <= 1.0):
            raise ValueError(f"weight must be in (0, 1], got {self.weight!r}")


# ---------------------------------------------------------------------------
# Packaged data tables
# ---------------------------------------------------------------------------

def parse_tabbed_table(lines: Iterable[str]) -> Dict[str, str]:
    """Parse `term<TAB>label` rows; later rows win on duplicate terms."""
    table: Dict[str, str] = {}
    for line in lines:
        parts = line.split("\t") if "\t" in line else line.split(None, 1)
        if len(parts) != 2:
            raise ValueError(f"expected two tab-separated columns, got {line!r}")
        table[parts[0].strip()] = parts[1].strip()
    return table


@lru_cache(maxsize=None)
def default_lexicon() -> Mapping[str, str]:
    return parse_tabbed_table(read_data_lines("sentiment_lexicon.txt"))


@lru_cache(maxsize=None)
def default_keyword_table() -> Mapping[str, QualityAttribute]:
    raw = parse_tabbed_table(read_data_lines("quality_keywords.txt"))
    return {term: QualityAttribute(label) for term, label in raw.items()}


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset:
    return frozenset(read_data_lines("intent_stopwords.txt"))


_WORD_RE = re.compile(r"[a-z0-9][a-z0-9'\-]*")


def tokenize(text: str) -> List[str]:
    return _WORD_RE.findall(text.lower())


def match_keyword_terms(tokens: Sequence[str], table: Mapping[str, object]) -> List[str]:
    """Return table keys present in the token stream.

    Single-word keys match individual tokens; multi-word keys match
    consecutive token runs.
    """
    hits: List[str] = []
    single = {k for k in table if " " not in k}
    phrases = [tuple(k.split()) for k in table if " " in k]
    for tok in tokens:
        if tok in single:
            hits.append(tok)
    for phrase in phrases:
        n = len(phrase)
        for i in range(len(tokens) - n + 1):
            if tuple(tokens[i : i + n]) == phrase:
                hits.append(" ".join(phrase))
                break
    return hits


# ---------------------------------------------------------------------------
# Annotator interface
# ---------------------------------------------------------------------------

class Annotator:
    """Base annotator: public methods enforce declared capabilities and
    delegate to the per-capability hooks subclasses implement."""

    id: str = "base"
    capabilities: frozenset = frozenset()

    def _require(self, capability: str) -> None:
        if capability not in self.capabilities:
            raise CapabilityError(f"annotator {self.id!r} does not declare {capability!r}")

    def classify_polarity(self, text: str) -> PolarityLabel:
        self._require(POLARITY)
        _check_text(text)
        return self._classify_polarity(text)

    def map_quality_attributes(self, text: str) -> Set[QualityAttribute]:
        self._require(QUALITY_MAPPING)
        _check_text(text)
        return self._map_quality_attributes(text)

    def extract_intent_terms(self, user_story: str) -> List[WeightedTerm]:
        self._require(INTENT)
        _check_text(user_story)
        return self._extract_intent_terms(user_story)

    def _classify_polarity(self, text: str) -> PolarityLabel:
        raise NotImplementedError

    def _map_quality_attributes(self, text: str) -> Set[QualityAttribute]:
        raise NotImplementedError

    def _extract_intent_terms(self, user_story: str) -> List[WeightedTerm]:
        raise NotImplementedError


def _check_text(text: str) -> None:
    if not text or not text.strip():
        raise InvalidInput("annotator input text must be non-empty")


class BaselineAnnotator(Annotator):
    """Deterministic lexicon/keyword annotator; pure function of its input.

    Polarity counts lexicon hits per side and picks the majority side
    (neutral on a tie or no hits). Attribute mapping collects keyword-table
    hits. Intent extraction chunks consecutive non-function-words into
    lowercase terms, approximating adjective+noun phrases without a tagger.
    """

    id = "baseline-lexicon"
    capabilities = frozenset({POLARITY, QUALITY_MAPPING, INTENT})

    def __init__(
        self,
        lexicon: Mapping[str, str] | None = None,
        keyword_table: Mapping[str, QualityAttribute] | None = None,
        stopwords: Iterable[str] | None = None,
    ):
        self.lexicon = dict(lexicon) if lexicon is not None else dict(default_lexicon())
        self.keyword_table = (
            dict(keyword_table) if keyword_table is not None else dict(default_keyword_table())
        )
        self.stopwords = frozenset(stopwords) if stopwords is not None else default_stopwords()

    def _classify_polarity(self, text: str) -> PolarityLabel:
        positive = negative = 0
        for tok in tokenize(text):
            side = self.lexicon.get(tok)
            if side == "positive":
                positive += 1
            elif side == "negative":
                negative += 1
        if positive > negative:
            return PolarityLabel.POSITIVE
        if negative > positive:
            return PolarityLabel.NEGATIVE
        return PolarityLabel.NEUTRAL

    def _map_quality_attributes(self, text: str) -> Set[QualityAttribute]:
        tokens = tokenize(text)
        return {self.keyword_table[hit] for hit in match_keyword_terms(tokens, self.keyword_table)}

    def _extract_intent_terms(self, user_story: str) -> List[WeightedTerm]:
        chunks: List[str] = []
        current: List[str] = []
        for tok in tokenize(user_story):
            if tok in self.stopwords:
                if current:
                    chunks.append(" ".join(current))
                    current = []
            else:
                current.append(tok)
        if current:
            chunks.append(" ".join(current))
        seen = set()
        terms = []
        for chunk in chunks:
            if chunk not in seen:
                seen.add(chunk)
                terms.append(WeightedTerm(term=chunk, weight=1.0))
        if not terms:
            raise EmptyIntent("story contains only function words")
        return terms


# ---------------------------------------------------------------------------
# External adapter: one request line in, one schema-checked line out
# ---------------------------------------------------------------------------

def _escape_line(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


class PipeAnnotator(Annotator):
    """Annotator backed by external subprocesses speaking a line protocol.

    One process per capability (lazily started). Each request is a single
    escaped line of input text; each response must be a single line
    matching the capability's output schema:

      polarity        -> one of: positive | neutral | negative
      quality_mapping -> comma-separated attribute names (may be empty)
      intent          -> comma-separated `term` or `term:weight` entries

    Anything else raises AnnotatorError so callers can fall back to the
    baseline.
    """

    def __init__(self, annotator_id: str, commands: Mapping[str, Sequence[str]], max_in_flight: int = 1):
        unknown = set(commands) - set(CAPABILITIES)
        if unknown:
            raise ValueError(f"unknown capabilities: {sorted(unknown)}")
        self.id = annotator_id
        self.capabilities = frozenset(commands)
        self.max_in_flight = max_in_flight
        self._commands = {cap: list(argv) for cap, argv in commands.items()}
        self._procs: Dict[str, subprocess.Popen] = {}
        self._lock = threading.Lock()
        self._slots = threading.Semaphore(max_in_flight)

    def _proc(self, capability: str) -> subprocess.Popen:
        proc = self._procs.get(capability)
        if proc is None or proc.poll() is not None:
            try:
                proc = subprocess.Popen(
                    self._commands[capability],
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise AnnotatorError(f"cannot start adapter for {capability!r}: {exc}") from exc
            self._procs[capability] = proc
        return proc

    def _ask(self, capability: str, text: str) -> str:
        with self._slots:
            with self._lock:
                proc = self._proc(capability)
                try:
                    assert proc.stdin is not None and proc.stdout is not None
                    proc.stdin.write(_escape_line(text) + "\n")
                    proc.stdin.flush()
                    line = proc.stdout.readline()
                except (OSError, ValueError) as exc:
                    raise AnnotatorError(f"adapter transport failure for {capability!r}: {exc}") from exc
        if line == "":
            raise AnnotatorError(f"adapter for {capability!r} closed its output")
        return line.rstrip("\n")

    def _classify_polarity(self, text: str) -> PolarityLabel:
        answer = self._ask(POLARITY, text).strip()
        try:
            return PolarityLabel(answer)
        except ValueError:
            raise AnnotatorError(f"malformed polarity response: {answer!r}") from None

    def _map_quality_attributes(self, text: str) -> Set[QualityAttribute]:
        answer = self._ask(QUALITY_MAPPING, text).strip()
        if not answer:
            return set()
        attrs: Set[QualityAttribute] = set()
        for part in answer.split(","):
            try:
                attrs.add(QualityAttribute(part.strip()))
            except ValueError:
                raise AnnotatorError(f"malformed attribute response: {answer!r}") from None
        return attrs

    def _extract_intent_terms(self, user_story: str) -> List[WeightedTerm]:
        answer = self._ask(INTENT, user_story).strip()
        if not answer:
            raise EmptyIntent("adapter returned no terms")
        terms: List[WeightedTerm] = []
        for part in answer.split(","):
            part = part.strip()
            term, sep, weight_text = part.rpartition(":")
            if not sep:
                term, weight_text = part, ""
            try:
                weight = float(weight_text) if weight_text else 1.0
                terms.append(WeightedTerm(term=term, weight=weight))
            except ValueError:
                raise AnnotatorError(f"malformed intent response: {answer!r}") from None
        return terms

    def close(self) -> None:
        with self._lock:
            for proc in self._procs.values():
                if proc.poll() is None:
                    proc.terminate()
                    try:
                        proc.wait(timeout=5)
                    except subprocess.TimeoutExpired:
                        proc.kill()
            self._procs.clear()

    def __enter__(self) -> "PipeAnnotator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def classify_polarity(annotator: Annotator, text: str) -> PolarityLabel:
    return annotator.classify_polarity(text)


def map_quality_attributes(annotator: Annotator, text: str) -> Set[QualityAttribute]:
    return annotator.map_quality_attributes(text)


def extract_intent_terms(annotator: Annotator, user_story: str) -> List[WeightedTerm]:
    return annotator.extract_intent_terms(user_story)


L = TypeVar("L", bound=Hashable)


def majority_vote(labels: Sequence[L], tie_policy: str = "abstain") -> Tuple[L, float]:
    """Pick the modal label; returns (winner, modal count / total).

    tie_policy "abstain" raises Tie when there is no unique mode;
    "first_annotator" resolves ties in favor of the earliest label.
    """
    if not labels:
        raise ValueError("labels must be non-empty")
    if tie_policy not in ("abstain", "first_annotator"):
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    counts = Counter(labels)
    top = max(counts.values())
    winners = [label for label in dict.fromkeys(labels) if counts[label] == top]
    if len(winners) > 1 and tie_policy == "abstain":
        raise Tie(f"no unique mode among {len(labels)} labels")
    return winners[0], top / len(labels)
