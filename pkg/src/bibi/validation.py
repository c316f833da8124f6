"""Minimal-pair construction rules and label adjudication.

The shared task requires every pair to consist of one unaltered starter
sentence plus a targeted change.  "Targeted" is made concrete here as a
token-level edit budget; breaker labels can additionally be checked against
external labels, marking disagreements contested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .corpus import (
    MODIFIED,
    ORIGINAL,
    MinimalPair,
    Polarity,
    QasrlDataset,
    SentimentDataset,
    Task,
    pair_side_text,
    tokenize,
)


class ValidationError(Exception):
    pass


@dataclass(frozen=True)
class EditOp:
    """One token-level edit, positioned in the evolving token sequence.

    Ops apply left to right: INSERT places a token at pos, DELETE removes the
    token at pos, SUBSTITUTE replaces it.
    """

    kind: str  # INSERT | DELETE | SUBSTITUTE
    pos: int
    old: str | None = None
    new: str | None = None


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]

    @property
    def cost(self) -> int:
        return len(self.ops)


def apply_script(tokens: list[str], script: EditScript) -> list[str]:
    out = list(tokens)
    for op in script.ops:
        if op.kind == "INSERT":
            out.insert(op.pos, op.new)
        elif op.kind == "DELETE":
            del out[op.pos]
        elif op.kind == "SUBSTITUTE":
            out[op.pos] = op.new
        else:
            raise ValidationError(f"unknown edit op {op.kind!r}")
    return out


def token_diff(original: str, modified: str) -> EditScript:
    """Minimum-cost token edit script between two sentences (unit costs).

    Ties prefer SUBSTITUTE over DELETE+INSERT and resolve leftmost-first,
    so the script is deterministic.
    """
    a = tokenize(original)
    b = tokenize(modified)
    if not a or not b:
        raise ValidationError("both sentences must tokenize to non-empty sequences")
    n, m = len(a), len(b)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dist[i - 1][j - 1] + (a[i - 1] != b[j - 1])
            dist[i][j] = min(sub, dist[i - 1][j] + 1, dist[i][j - 1] + 1)

    # Backtrace from the end, preferring diagonal moves (match/substitute),
    # then deletion, then insertion; reversed, that yields the leftmost script.
    ops: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (a[i - 1] != b[j - 1]):
            if a[i - 1] != b[j - 1]:
                ops.append(EditOp("SUBSTITUTE", j - 1, old=a[i - 1], new=b[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(EditOp("DELETE", j, old=a[i - 1]))
            i -= 1
        else:
            ops.append(EditOp("INSERT", j - 1, new=b[j - 1]))
            j -= 1
    ops.reverse()
    script = EditScript(tuple(ops))
    assert apply_script(a, script) == b, "edit script failed to reproduce the modified sequence"
    return script


class ViolationCode(str, Enum):
    NOT_FROM_STARTER = "NOT_FROM_STARTER"
    QUESTION_CHANGED = "QUESTION_CHANGED"
    ANSWER_NOT_SUBSTRING = "ANSWER_NOT_SUBSTRING"
    EDIT_TOO_LARGE = "EDIT_TOO_LARGE"
    LABEL_OUT_OF_DOMAIN = "LABEL_OUT_OF_DOMAIN"
    LABEL_DISPUTED = "LABEL_DISPUTED"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    detail: str


@dataclass
class ValidationConfig:
    #: Token-edit budget; calibrated so the most extensive legitimate change
    #: we have seen (a clause reordering) still validates.
    max_edit_cost: int = 6


def _strip_one_newline(text: str) -> str:
    return text[:-1] if text.endswith("\n") else text


def validate_pair(
    pair: MinimalPair,
    starter: SentimentDataset | QasrlDataset,
    config: ValidationConfig | None = None,
) -> list[Violation]:
    """Check one pair against the construction rules; empty list means clean."""
    config = config or ValidationConfig()
    violations: list[Violation] = []

    starter_item = starter.by_id.get(pair.original_item_id)
    if starter_item is None:
        violations.append(
            Violation(
                ViolationCode.NOT_FROM_STARTER,
                f"original_id {pair.original_item_id!r} is not in the starter dataset",
            )
        )
    else:
        starter_text = starter_item.text if pair.task is Task.SENTIMENT else starter_item.sentence
        original_text = pair_side_text(pair, ORIGINAL)
        if _strip_one_newline(original_text).encode("utf-8") != _strip_one_newline(
            starter_text
        ).encode("utf-8"):
            violations.append(
                Violation(
                    ViolationCode.NOT_FROM_STARTER,
                    f"original side is not byte-identical to starter item {pair.original_item_id!r}",
                )
            )

    try:
        cost = token_diff(pair_side_text(pair, ORIGINAL), pair_side_text(pair, MODIFIED)).cost
    except ValidationError as e:
        violations.append(Violation(ViolationCode.EDIT_TOO_LARGE, str(e)))
        cost = None
    if cost is not None and cost > config.max_edit_cost:
        violations.append(
            Violation(
                ViolationCode.EDIT_TOO_LARGE,
                f"edit cost {cost} exceeds the budget of {config.max_edit_cost}",
            )
        )

    if pair.task is Task.SENTIMENT:
        for side, gold in (("original", pair.gold_original), ("modified", pair.gold_modified)):
            if gold not in (Polarity.NEGATIVE, Polarity.POSITIVE):
                violations.append(
                    Violation(
                        ViolationCode.LABEL_OUT_OF_DOMAIN,
                        f"{side} label must be -1 or +1, got {gold!r}",
                    )
                )
    else:
        if pair.original.get("question") != pair.modified.get("question"):
            violations.append(
                Violation(ViolationCode.QUESTION_CHANGED, "the question must stay unaltered")
            )
        for side_name, side, gold in (
            ("original", ORIGINAL, pair.gold_original),
            ("modified", MODIFIED, pair.gold_modified),
        ):
            sentence = pair_side_text(pair, side)
            for answer in gold if isinstance(gold, (tuple, list)) else (gold,):
                if not isinstance(answer, str) or answer not in sentence:
                    violations.append(
                        Violation(
                            ViolationCode.ANSWER_NOT_SUBSTRING,
                            f"{side_name} answer {answer!r} is not a substring of its sentence",
                        )
                    )
    return violations


class AdjudicationStatus(str, Enum):
    CONFIRMED = "CONFIRMED"
    CONTESTED = "CONTESTED"


@dataclass(frozen=True)
class AdjudicationResult:
    pair_id: str
    side: str  # orig | mod
    breaker_label: object
    external_labels: tuple
    status: AdjudicationStatus


def adjudicate(
    pair: MinimalPair,
    external: dict[str, list],
    majority_threshold: float = 0.5,
) -> list[AdjudicationResult]:
    """Compare breaker labels against external labels, per adjudicated side.

    CONFIRMED requires a strict majority (> threshold) of external labels to
    agree with the breaker; ties and disagreements are CONTESTED.
    """
    results = []
    for side, breaker_label in ((ORIGINAL, pair.gold_original), (MODIFIED, pair.gold_modified)):
        if side not in external:
            continue
        labels = external[side]
        if not labels:
            raise ValidationError(f"pair {pair.pair_id!r} side {side}: empty external label list")
        if pair.task is Task.SENTIMENT:
            labels = [Polarity(l) if not isinstance(l, Polarity) else l for l in labels]
        agree = sum(1 for l in labels if l == breaker_label)
        status = (
            AdjudicationStatus.CONFIRMED
            if agree / len(labels) > majority_threshold
            else AdjudicationStatus.CONTESTED
        )
        results.append(
            AdjudicationResult(
                pair_id=pair.pair_id,
                side=side,
                breaker_label=breaker_label,
                external_labels=tuple(labels),
                status=status,
            )
        )
    return results
