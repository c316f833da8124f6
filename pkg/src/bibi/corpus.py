"""Data model and file ingestion for both shared-task tracks.

Covers sentiment sentences (raw value plus derived polarity), QA-SRL items,
dependency parses, minimal pairs, and system prediction tables.  All loaders
are pure functions of file content; loaded datasets are immutable.
"""

from __future__ import annotations

import json
import string
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator


class CorpusError(Exception):
    """A file failed to parse or violated a dataset invariant."""


class Task(str, Enum):
    SENTIMENT = "sentiment"
    QASRL = "qasrl"


class Polarity(Enum):
    NEGATIVE = -1
    NEUTRAL = 0
    POSITIVE = 1

    def __str__(self) -> str:
        return {-1: "-1", 0: "0", 1: "+1"}[self.value]

    @classmethod
    def parse(cls, s: str) -> "Polarity":
        try:
            return cls(int(s))
        except (ValueError, KeyError):
            raise CorpusError(f"not a polarity label: {s!r}")


#: Sides of a minimal pair, used in prediction item references.
ORIGINAL = "orig"
MODIFIED = "mod"


def map_sentiment_value(value: float) -> Polarity:
    """Map a raw sentiment value in [0, 1] to a polarity.

    Values below 0.4 are negative, above 0.6 positive; the middle band
    (inclusive of both boundaries) is neutral and excluded from training.
    """
    if not 0.0 <= value <= 1.0:
        raise CorpusError(f"sentiment value {value} outside [0, 1]")
    if value < 0.4:
        return Polarity.NEGATIVE
    if value > 0.6:
        return Polarity.POSITIVE
    return Polarity.NEUTRAL


_PUNCT = set(string.punctuation)


def tokenize_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokenize into (form, start, end) char spans.

    Splits on Unicode whitespace, then peels leading/trailing ASCII
    punctuation into separate tokens.  Word-internal punctuation (as in
    "doesn't") is kept.  This is the single tokenizer shared by every module.
    """
    out: list[tuple[str, int, int]] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        lo, hi = i, j
        while lo < hi and text[lo] in _PUNCT:
            out.append((text[lo], lo, lo + 1))
            lo += 1
        trailing: list[tuple[str, int, int]] = []
        while hi > lo and text[hi - 1] in _PUNCT:
            trailing.append((text[hi - 1], hi - 1, hi))
            hi -= 1
        if lo < hi:
            out.append((text[lo:hi], lo, hi))
        out.extend(reversed(trailing))
        i = j
    return out


def tokenize(text: str) -> list[str]:
    return [form for form, _, _ in tokenize_with_spans(text)]


@dataclass(frozen=True)
class LabeledSentence:
    id: str
    text: str
    value: float
    polarity: Polarity
    phrases: tuple[tuple[str, float], ...] = ()

    @property
    def excluded_from_training(self) -> bool:
        return self.polarity is Polarity.NEUTRAL


@dataclass(frozen=True)
class QasrlItem:
    id: str
    sentence: str
    predicate_token_index: int
    predicate: str
    question: str
    answers: tuple[str, ...]


@dataclass(frozen=True)
class DependencyParse:
    """Tokens with 0-based head indices; head -1 marks the root."""

    forms: tuple[str, ...]
    heads: tuple[int, ...]
    relations: tuple[str, ...]

    def __post_init__(self) -> None:
        n = len(self.forms)
        if not (len(self.heads) == len(self.relations) == n):
            raise CorpusError("parse column lengths disagree")
        roots = [i for i, h in enumerate(self.heads) if h == -1]
        if len(roots) != 1:
            raise CorpusError(f"parse must have exactly one root, got {len(roots)}")
        for i, h in enumerate(self.heads):
            if h != -1 and not 0 <= h < n:
                raise CorpusError(f"head index {h} out of range at token {i}")
        # Root reachability from every token doubles as the cycle check.
        for i in range(n):
            seen = set()
            j = i
            while j != -1:
                if j in seen:
                    raise CorpusError(f"cycle in parse involving token {i}")
                seen.add(j)
                j = self.heads[j]

    def __len__(self) -> int:
        return len(self.forms)


@dataclass(frozen=True)
class MinimalPair:
    pair_id: str
    team: str
    task: Task
    original_item_id: str
    original: dict
    modified: dict
    gold_original: object
    gold_modified: object
    rationale: str | None = None


@dataclass
class SentimentDataset:
    items: list[LabeledSentence] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.by_id = {s.id: s for s in self.items}

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[LabeledSentence]:
        return iter(self.items)

    def training_items(self) -> list[LabeledSentence]:
        return [s for s in self.items if not s.excluded_from_training]


@dataclass
class QasrlDataset:
    items: list[QasrlItem] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.by_id = {it.id: it for it in self.items}

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[QasrlItem]:
        return iter(self.items)


class PredictionTable:
    """Predictions keyed by (system, item_ref).

    item_ref is "<pair_id>:orig", "<pair_id>:mod", or a dev item id.
    Payloads are kept as strings; scoring interprets them per task.
    """

    def __init__(self) -> None:
        self._table: dict[tuple[str, str], str] = {}

    def add(self, system: str, item_ref: str, payload: str) -> None:
        key = (system, item_ref)
        if key in self._table:
            raise CorpusError(f"duplicate prediction for system={system} item={item_ref}")
        self._table[key] = payload

    def get(self, system: str, item_ref: str) -> str | None:
        return self._table.get((system, item_ref))

    def systems(self) -> list[str]:
        return sorted({sys for sys, _ in self._table})

    def items_for(self, system: str) -> dict[str, str]:
        return {ref: p for (sys, ref), p in self._table.items() if sys == system}

    def __len__(self) -> int:
        return len(self._table)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PredictionTable) and self._table == other._table


def pair_ref(pair_id: str, side: str) -> str:
    if side not in (ORIGINAL, MODIFIED):
        raise ValueError(f"bad pair side {side!r}")
    return f"{pair_id}:{side}"


def _jsonl_records(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {e}") from e
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _require(obj: dict, key: str, path: Path, lineno: int) -> object:
    if key not in obj:
        raise CorpusError(f"{path}:{lineno}: missing required field {key!r}")
    return obj[key]


def ingest_sentiment(path: str | Path) -> SentimentDataset:
    """Load a sentiment JSONL file; neutral sentences are kept but flagged."""
    path = Path(path)
    items: list[LabeledSentence] = []
    seen: set[str] = set()
    for lineno, obj in _jsonl_records(path):
        sid = str(_require(obj, "id", path, lineno))
        if sid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate id {sid!r}")
        seen.add(sid)
        text = str(_require(obj, "text", path, lineno))
        value = _require(obj, "value", path, lineno)
        if not isinstance(value, (int, float)):
            raise CorpusError(f"{path}:{lineno}: value must be a number")
        phrases = tuple(
            (str(p[0]), float(p[1])) for p in obj.get("phrases", [])
        )
        items.append(
            LabeledSentence(
                id=sid,
                text=text,
                value=float(value),
                polarity=map_sentiment_value(float(value)),
                phrases=phrases,
            )
        )
    return SentimentDataset(items)


def ingest_qasrl(path: str | Path) -> QasrlDataset:
    """Load a QA-SRL JSONL file, enforcing the substring and predicate rules."""
    path = Path(path)
    items: list[QasrlItem] = []
    seen: set[str] = set()
    for lineno, obj in _jsonl_records(path):
        iid = str(_require(obj, "id", path, lineno))
        if iid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate id {iid!r}")
        seen.add(iid)
        sentence = str(_require(obj, "sentence", path, lineno))
        pred_index = _require(obj, "pred_index", path, lineno)
        predicate = str(_require(obj, "predicate", path, lineno))
        question = str(_require(obj, "question", path, lineno))
        answers = _require(obj, "answers", path, lineno)
        if not isinstance(answers, list) or not answers:
            raise CorpusError(f"{path}:{lineno}: item {iid!r} needs a non-empty answer list")
        tokens = tokenize(sentence)
        if not isinstance(pred_index, int) or not 0 <= pred_index < len(tokens):
            raise CorpusError(f"{path}:{lineno}: item {iid!r} predicate index out of range")
        if tokens[pred_index] != predicate:
            raise CorpusError(
                f"{path}:{lineno}: item {iid!r} predicate {predicate!r} does not match "
                f"token {tokens[pred_index]!r} at index {pred_index}"
            )
        for ans in answers:
            if str(ans) not in sentence:
                raise CorpusError(
                    f"{path}:{lineno}: item {iid!r} answer {ans!r} is not a substring of the sentence"
                )
        items.append(
            QasrlItem(
                id=iid,
                sentence=sentence,
                predicate_token_index=pred_index,
                predicate=predicate,
                question=question,
                answers=tuple(str(a) for a in answers),
            )
        )
    if not items:
        warnings.warn(f"{path}: empty QA-SRL dataset")
    return QasrlDataset(items)


def ingest_parses(path: str | Path) -> dict[str, DependencyParse]:
    """Load CoNLL-style parse blocks keyed by the '#id' header of each block."""
    path = Path(path)
    parses: dict[str, DependencyParse] = {}
    current_id: str | None = None
    rows: list[tuple[str, int, str]] = []

    def flush() -> None:
        nonlocal current_id, rows
        if current_id is None:
            return
        if current_id in parses:
            raise CorpusError(f"{path}: duplicate parse for id {current_id!r}")
        forms = tuple(r[0] for r in rows)
        heads = tuple(r[1] - 1 for r in rows)  # file is 1-based, 0 = root
        rels = tuple(r[2] for r in rows)
        try:
            parses[current_id] = DependencyParse(forms, heads, rels)
        except CorpusError as e:
            raise CorpusError(f"{path}: parse for {current_id!r}: {e}") from e
        current_id, rows = None, []

    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush()
                continue
            if line.startswith("#id"):
                flush()
                current_id = line[3:].strip()
                if not current_id:
                    raise CorpusError(f"{path}:{lineno}: empty parse id")
                continue
            if current_id is None:
                raise CorpusError(f"{path}:{lineno}: token row before any '#id' header")
            cols = line.split("\t")
            if len(cols) != 4:
                raise CorpusError(f"{path}:{lineno}: expected 4 tab-separated columns")
            try:
                idx, head = int(cols[0]), int(cols[2])
            except ValueError as e:
                raise CorpusError(f"{path}:{lineno}: non-integer index or head") from e
            if idx != len(rows) + 1:
                raise CorpusError(f"{path}:{lineno}: token indices must be 1-based and consecutive")
            rows.append((cols[1], head, cols[3]))
    flush()
    return parses


_SENTIMENT_LABELS = {-1, 1}


def _parse_pair_label(raw: object, task: Task, path: Path, lineno: int) -> object:
    if task is Task.SENTIMENT:
        if raw not in _SENTIMENT_LABELS:
            raise CorpusError(f"{path}:{lineno}: sentiment gold label must be -1 or +1, got {raw!r}")
        return Polarity(raw)
    # QA-SRL golds are the answer string(s).
    if isinstance(raw, str):
        return (raw,)
    if isinstance(raw, list) and raw and all(isinstance(a, str) for a in raw):
        return tuple(raw)
    raise CorpusError(f"{path}:{lineno}: QA-SRL gold label must be an answer string or list")


def ingest_pairs(path: str | Path) -> list[MinimalPair]:
    """Load minimal pairs; structural rules only (starter identity is checked
    by the validation module)."""
    path = Path(path)
    pairs: list[MinimalPair] = []
    seen: set[str] = set()
    for lineno, obj in _jsonl_records(path):
        pid = str(_require(obj, "pair_id", path, lineno))
        if pid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate pair_id {pid!r}")
        seen.add(pid)
        raw_task = _require(obj, "task", path, lineno)
        try:
            task = Task(raw_task)
        except ValueError:
            raise CorpusError(f"{path}:{lineno}: unknown task tag {raw_task!r}")
        original = _require(obj, "original", path, lineno)
        modified = _require(obj, "modified", path, lineno)
        if not isinstance(original, dict) or not isinstance(modified, dict):
            raise CorpusError(f"{path}:{lineno}: pair sides must be objects")
        if task is Task.QASRL:
            if original.get("question") != modified.get("question"):
                raise CorpusError(
                    f"{path}:{lineno}: pair {pid!r} changes the question; "
                    "the question must stay unaltered"
                )
        pairs.append(
            MinimalPair(
                pair_id=pid,
                team=str(_require(obj, "team", path, lineno)),
                task=task,
                original_item_id=str(_require(obj, "original_id", path, lineno)),
                original=original,
                modified=modified,
                gold_original=_parse_pair_label(
                    _require(obj, "gold_original", path, lineno), task, path, lineno
                ),
                gold_modified=_parse_pair_label(
                    _require(obj, "gold_modified", path, lineno), task, path, lineno
                ),
                rationale=obj.get("rationale"),
            )
        )
    return pairs


def ingest_predictions(path: str | Path, task: Task) -> PredictionTable:
    """Load a predictions TSV: system <TAB> item_ref <TAB> payload."""
    path = Path(path)
    table = PredictionTable()
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise CorpusError(f"{path}:{lineno}: expected 3 tab-separated columns")
            system, item_ref, payload = cols
            if task is Task.SENTIMENT:
                try:
                    Polarity.parse(payload)
                except CorpusError:
                    raise CorpusError(
                        f"{path}:{lineno}: sentiment payload must be -1, 0, or +1, got {payload!r}"
                    )
            try:
                table.add(system, item_ref, payload)
            except CorpusError as e:
                raise CorpusError(f"{path}:{lineno}: {e}") from e
    return table


def pair_side_text(pair: MinimalPair, side: str) -> str:
    """The sentence text of one side of a pair, for either task."""
    payload = pair.original if side == ORIGINAL else pair.modified
    key = "text" if pair.task is Task.SENTIMENT else "sentence"
    value = payload.get(key)
    if not isinstance(value, str):
        raise CorpusError(f"pair {pair.pair_id!r} side {side} lacks a {key!r} string")
    return value
