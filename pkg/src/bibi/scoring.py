"""Break detection, breaker scores, builder metrics, and leaderboard reports.

A pair "breaks" a system when exactly one of its two items is predicted
correctly.  Breaker teams are scored by the dev-accuracy-weighted average
break fraction across systems (reported x100); builders by average F1 over
all pair items and by the percentage of pairs that break them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .corpus import (
    MODIFIED,
    ORIGINAL,
    CorpusError,
    MinimalPair,
    Polarity,
    PredictionTable,
    QasrlDataset,
    SentimentDataset,
    Task,
    pair_ref,
    pair_side_text,
)

#: Minimum character overlap for a QA-SRL answer to count as correct.
OVERLAP_THRESHOLD = 0.75


class ScoringError(Exception):
    pass


def sentiment_correct(pred: Polarity, gold: Polarity) -> bool:
    """Exact polarity match; gold labels are binary, neutral is never correct."""
    if gold is Polarity.NEUTRAL:
        raise ScoringError("gold sentiment labels must be binary (-1 or +1)")
    return pred is gold


def _span_of(span_or_text: tuple[int, int] | str, sentence: str | None, what: str) -> tuple[int, int]:
    if isinstance(span_or_text, str):
        if sentence is None:
            raise ScoringError("string spans require the sentence")
        start = sentence.find(span_or_text)
        if start < 0:
            raise ScoringError(f"{what} {span_or_text!r} not found in sentence")
        span = (start, start + len(span_or_text))
    else:
        span = span_or_text
    if span[1] <= span[0]:
        raise ScoringError(f"{what} span {span} is empty")
    return span


def answer_overlap(
    pred: tuple[int, int] | str,
    gold: tuple[int, int] | str,
    sentence: str | None = None,
) -> float:
    """Character-range overlap of two spans, normalized by the longer span.

    Strings are anchored at their first occurrence in the sentence.
    """
    p = _span_of(pred, sentence, "prediction")
    g = _span_of(gold, sentence, "gold answer")
    inter = min(p[1], g[1]) - max(p[0], g[0])
    if inter <= 0:
        return 0.0
    return inter / max(p[1] - p[0], g[1] - g[0])


def qasrl_correct(pred: str, sentence: str, golds: tuple[str, ...] | list[str]) -> bool:
    """True iff the prediction overlaps some gold answer by >= 75% of chars.

    Predictions absent from the sentence (or empty) are simply incorrect:
    systems may emit anything.
    """
    if not golds:
        raise ScoringError("QA-SRL item has no gold answers")
    if not pred or pred not in sentence:
        return False
    best = max(answer_overlap(pred, gold, sentence) for gold in golds)
    return best >= OVERLAP_THRESHOLD


def pair_breaks(correct_original: bool, correct_modified: bool) -> bool:
    """Direction-agnostic break criterion: exactly one side correct."""
    return correct_original != correct_modified


@dataclass(frozen=True)
class BreakRecord:
    system: str
    pair_id: str
    correct_original: bool
    correct_modified: bool
    breaks: bool
    missing_original: bool = False
    missing_modified: bool = False


@dataclass
class SystemRecord:
    system: str
    dev_accuracy: float
    predictions: PredictionTable

    def __post_init__(self) -> None:
        if not 0.0 <= self.dev_accuracy <= 1.0:
            raise ScoringError(f"dev accuracy {self.dev_accuracy} outside [0, 1]")


@dataclass
class BreakerScore:
    team: str
    per_system: list[dict]  # system, break_count, pair_count, weighted_term
    score: float  # x100


@dataclass
class BuilderScore:
    system: str
    avg_f1: float
    percent_broken: float
    per_team_f1: list[tuple[str, float]]
    f1_variants: dict[str, float] = field(default_factory=dict)


def _side_correct(system: SystemRecord, pair: MinimalPair, side: str) -> tuple[bool, bool]:
    """(correct, missing) for one side of a pair under one system."""
    payload = system.predictions.get(system.system, pair_ref(pair.pair_id, side))
    if payload is None:
        return False, True
    gold = pair.gold_original if side == ORIGINAL else pair.gold_modified
    if pair.task is Task.SENTIMENT:
        return sentiment_correct(Polarity.parse(payload), gold), False
    sentence = pair_side_text(pair, side)
    return qasrl_correct(payload, sentence, gold), False


def break_stats(system: SystemRecord, pairs: list[MinimalPair]) -> list[BreakRecord]:
    """One BreakRecord per pair; missing predictions count as incorrect."""
    records = []
    for pair in pairs:
        co, mo = _side_correct(system, pair, ORIGINAL)
        cm, mm = _side_correct(system, pair, MODIFIED)
        records.append(
            BreakRecord(
                system=system.system,
                pair_id=pair.pair_id,
                correct_original=co,
                correct_modified=cm,
                breaks=pair_breaks(co, cm),
                missing_original=mo,
                missing_modified=mm,
            )
        )
    return records


def breaker_score(team: str, team_pairs: list[MinimalPair], systems: list[SystemRecord]) -> BreakerScore:
    """Dev-accuracy-weighted mean break fraction across systems, x100."""
    if not team_pairs:
        raise ScoringError(f"team {team!r} has no pairs")
    if not systems:
        raise ScoringError("at least one system is required")
    n_pairs = len(team_pairs)
    per_system = []
    total = 0.0
    for sys_rec in systems:
        breaks = sum(r.breaks for r in break_stats(sys_rec, team_pairs))
        term = sys_rec.dev_accuracy * breaks / n_pairs
        per_system.append(
            {
                "system": sys_rec.system,
                "break_count": breaks,
                "pair_count": n_pairs,
                "weighted_term": term,
            }
        )
        total += term
    return BreakerScore(team=team, per_system=per_system, score=100.0 * total / len(systems))


def _macro_f1_sentiment(golds: list[Polarity], preds: list[Polarity | None]) -> dict[str, float]:
    """Macro-averaged F1 over the two polar classes, plus report variants."""
    tp = {Polarity.NEGATIVE: 0, Polarity.POSITIVE: 0}
    fp = {Polarity.NEGATIVE: 0, Polarity.POSITIVE: 0}
    fn = {Polarity.NEGATIVE: 0, Polarity.POSITIVE: 0}
    for gold, pred in zip(golds, preds):
        if pred is gold:
            tp[gold] += 1
        else:
            fn[gold] += 1
            if pred in fp:
                fp[pred] += 1

    def f1(cls: Polarity) -> float:
        denom_p = tp[cls] + fp[cls]
        denom_r = tp[cls] + fn[cls]
        p = tp[cls] / denom_p if denom_p else 0.0
        r = tp[cls] / denom_r if denom_r else 0.0
        return 2 * p * r / (p + r) if p + r else 0.0

    # Average over polar classes observed in gold or predictions, so a
    # single-class item set with perfect predictions still scores 1.0.
    present = [
        cls
        for cls in (Polarity.NEGATIVE, Polarity.POSITIVE)
        if cls in golds or cls in preds
    ]
    stp = sum(tp.values())
    sfp = sum(fp.values())
    sfn = sum(fn.values())
    micro_p = stp / (stp + sfp) if stp + sfp else 0.0
    micro_r = stp / (stp + sfn) if stp + sfn else 0.0
    micro = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    return {
        "macro_f1": sum(f1(cls) for cls in present) / len(present) if present else 0.0,
        "micro_f1": micro,
        "positive_f1": f1(Polarity.POSITIVE),
    }


def _team_f1(system: SystemRecord, team_pairs: list[MinimalPair]) -> dict[str, float]:
    """F1 over all items (both sides) of one team's pairs.

    Sentiment: macro F1 over the polar classes.  QA-SRL: each item's
    correctness is a binary outcome, so F1 reduces to accuracy.
    """
    task = team_pairs[0].task
    if task is Task.SENTIMENT:
        golds: list[Polarity] = []
        preds: list[Polarity | None] = []
        for pair in team_pairs:
            for side, gold in ((ORIGINAL, pair.gold_original), (MODIFIED, pair.gold_modified)):
                payload = system.predictions.get(system.system, pair_ref(pair.pair_id, side))
                golds.append(gold)
                preds.append(Polarity.parse(payload) if payload is not None else None)
        return _macro_f1_sentiment(golds, preds)
    correct = 0
    total = 0
    for pair in team_pairs:
        co, _ = _side_correct(system, pair, ORIGINAL)
        cm, _ = _side_correct(system, pair, MODIFIED)
        correct += int(co) + int(cm)
        total += 2
    acc = correct / total
    return {"macro_f1": acc, "micro_f1": acc, "positive_f1": acc}


def group_pairs_by_team(pairs: list[MinimalPair]) -> dict[str, list[MinimalPair]]:
    grouped: dict[str, list[MinimalPair]] = {}
    for pair in pairs:
        grouped.setdefault(pair.team, []).append(pair)
    return dict(sorted(grouped.items()))


def builder_metrics(system: SystemRecord, pairs_by_team: dict[str, list[MinimalPair]]) -> BuilderScore:
    """Average F1 (per-team, then unweighted mean) and percent of pairs broken."""
    per_team: list[tuple[str, float]] = []
    variant_sums = {"micro_f1": 0.0, "positive_f1": 0.0}
    for team, team_pairs in sorted(pairs_by_team.items()):
        if not team_pairs:
            warnings.warn(f"team {team!r} has zero items; excluded from the F1 mean")
            continue
        scores = _team_f1(system, team_pairs)
        per_team.append((team, scores["macro_f1"]))
        for k in variant_sums:
            variant_sums[k] += scores[k]
    if not per_team:
        raise ScoringError("no team contributed any items")
    all_pairs = [p for tp in pairs_by_team.values() for p in tp]
    breaks = sum(r.breaks for r in break_stats(system, all_pairs))
    return BuilderScore(
        system=system.system,
        avg_f1=sum(f for _, f in per_team) / len(per_team),
        percent_broken=100.0 * breaks / len(all_pairs),
        per_team_f1=per_team,
        f1_variants={k: v / len(per_team) for k, v in variant_sums.items()},
    )


def dev_accuracy(
    predictions: PredictionTable,
    system: str,
    dev_gold: SentimentDataset | QasrlDataset,
    task: Task,
) -> float:
    """Accuracy on the blind dev set.

    Sentiment uses exact polarity match over non-neutral items; QA-SRL uses
    the 75% character-overlap criterion.  Missing predictions are incorrect.
    """
    correct = 0
    total = 0
    for item in dev_gold:
        if task is Task.SENTIMENT and item.polarity is Polarity.NEUTRAL:
            continue
        total += 1
        payload = predictions.get(system, item.id)
        if payload is None:
            continue
        if task is Task.SENTIMENT:
            correct += int(Polarity.parse(payload) is item.polarity)
        else:
            correct += int(qasrl_correct(payload, item.sentence, item.answers))
    if total == 0:
        raise ScoringError("dev set has no scorable items")
    return correct / total


@dataclass
class ScoreReport:
    builders: list[BuilderScore]
    breakers: list[BreakerScore]
    matrix: dict[str, dict[str, float]]  # system -> team -> breaking percent
    records: list[BreakRecord]

    def to_json_dict(self) -> dict:
        return {
            "builders": [
                {
                    "system": b.system,
                    "avg_f1": round(b.avg_f1, 2),
                    "percent_broken": round(b.percent_broken, 2),
                    "per_team_f1": [
                        {"team": t, "f1": round(f, 2)} for t, f in b.per_team_f1
                    ],
                    "f1_variants": {k: round(v, 2) for k, v in sorted(b.f1_variants.items())},
                }
                for b in self.builders
            ],
            "breakers": [
                {
                    "team": s.team,
                    "score": round(s.score, 2),
                    "per_system": [
                        {
                            "system": t["system"],
                            "break_count": t["break_count"],
                            "pair_count": t["pair_count"],
                            "weighted_term": round(t["weighted_term"], 4),
                        }
                        for t in s.per_system
                    ],
                }
                for s in self.breakers
            ],
            "matrix": {
                system: {team: round(pct, 2) for team, pct in sorted(row.items())}
                for system, row in sorted(self.matrix.items())
            },
            "records": [
                {
                    "system": r.system,
                    "pair_id": r.pair_id,
                    "correct_original": r.correct_original,
                    "correct_modified": r.correct_modified,
                    "breaks": r.breaks,
                    "missing_original": r.missing_original,
                    "missing_modified": r.missing_modified,
                }
                for r in self.records
            ],
        }

    def render_text(self) -> str:
        lines = ["Builder scores", f"{'System':<24}{'avg F1':>8}{'% broken':>10}"]
        for b in self.builders:
            lines.append(f"{b.system:<24}{b.avg_f1:>8.3f}{b.percent_broken:>10.2f}")
        lines += ["", "Breaker scores", f"{'Team':<24}{'score':>8}"]
        for s in self.breakers:
            lines.append(f"{s.team:<24}{s.score:>8.2f}")
        teams = sorted({t for row in self.matrix.values() for t in row})
        if teams:
            lines += ["", "Breaking percentages (system x team)"]
            lines.append("".join([f"{'System':<24}"] + [f"{t:>12}" for t in teams]))
            for system in sorted(self.matrix):
                row = self.matrix[system]
                lines.append(
                    "".join(
                        [f"{system:<24}"]
                        + [f"{row.get(t, 0.0):>12.2f}" for t in teams]
                    )
                )
        return "\n".join(lines) + "\n"


def leaderboard(
    systems: list[SystemRecord],
    pairs: list[MinimalPair],
    *,
    dev_predictions: PredictionTable | None = None,
    dev_gold: SentimentDataset | QasrlDataset | None = None,
    task: Task | None = None,
) -> ScoreReport:
    """Full report: builder table, breaker table, break matrix, pair records.

    If dev predictions and gold are given, dev accuracies are (re)computed
    from them; otherwise the accuracies already on the SystemRecords are used.
    """
    if not pairs:
        raise ScoringError("no pairs to score")
    if dev_predictions is not None and dev_gold is not None and task is not None:
        systems = [
            SystemRecord(s.system, dev_accuracy(dev_predictions, s.system, dev_gold, task), s.predictions)
            for s in systems
        ]
    systems = sorted(systems, key=lambda s: s.system)
    by_team = group_pairs_by_team(pairs)

    builders = sorted(
        (builder_metrics(s, by_team) for s in systems),
        key=lambda b: (-b.avg_f1, b.system),
    )
    breakers = sorted(
        (breaker_score(team, team_pairs, systems) for team, team_pairs in by_team.items()),
        key=lambda s: (-s.score, s.team),
    )
    matrix: dict[str, dict[str, float]] = {}
    records: list[BreakRecord] = []
    for sys_rec in systems:
        row = {}
        for team, team_pairs in by_team.items():
            recs = break_stats(sys_rec, team_pairs)
            row[team] = 100.0 * sum(r.breaks for r in recs) / len(team_pairs)
        matrix[sys_rec.system] = row
        records.extend(break_stats(sys_rec, pairs))
    return ScoreReport(builders=builders, breakers=breakers, matrix=matrix, records=records)
