"""Shared fixtures: the seven sample minimal pairs, six systems' predictions
on them, and the hand-derived break matrix used by the acceptance suite."""

from __future__ import annotations

import json
from pathlib import Path

SYSTEMS = ["Strawman", "PCNN", "Bag-of-ngrams", "SCNN", "DCNN", "RNTN"]
TEAMS = ["Utrecht", "OSU", "Melbourne", "VTeX"]

# (pair_id, team, original_id, original text, modified text, gold_orig, gold_mod)
SAMPLE_PAIRS = [
    (
        "Utrecht-1",
        "Utrecht",
        "st-u1",
        "Through elliptical and seemingly oblique methods, he forges moments of staggering emotional power",
        "Through elliptical and seemingly oblique methods, he forges moments of staggering emotional pain",
        1,
        1,
    ),
    (
        "Utrecht-2",
        "Utrecht",
        "st-u2",
        "[Bettis] has a smoldering, humorless intensity that's unnerving.",
        "[Bettis] has a smoldering, humorless intensity that's hilarious.",
        -1,
        1,
    ),
    (
        "OSU-1",
        "OSU",
        "st-o1",
        "A bizarre (and sometimes repulsive) exercise that's a little too willing to swoon in its own weird embrace.",
        "A bizarre (and sometimes repulsive) exercise that's just willing enough to swoon in its own weird embrace.",
        -1,
        1,
    ),
    (
        "OSU-2",
        "OSU",
        "st-o2",
        "Proves that fresh new work can be done in the horror genre if the director follows his or her own shadowy muse.",
        "Proves that dull new work can be done in the horror genre if the director follows his or her own shadowy muse.",
        1,
        -1,
    ),
    (
        "Melbourne-1",
        "Melbourne",
        "st-m1",
        "Exactly the kind of unexpected delight one hopes for every time the lights go down.",
        "Exactly the kind of thrill one hopes for every time the lights go down.",
        1,
        1,
    ),
    (
        "Melbourne-2",
        "Melbourne",
        "st-m2",
        "American drama doesn't get any more meaty and muscular than this.",
        "This doesn't get any more meaty and muscular than American drama.",
        1,
        -1,
    ),
    (
        "VTeX-1",
        "VTeX",
        "st-v1",
        "Rarely have good intentions been wrapped in such a sticky package.",
        "Rarely have good intentions been wrapped in such a adventurous package.",
        -1,
        1,
    ),
]

# Per-pair predictions, (original, modified), in SYSTEMS order.
SAMPLE_PREDICTIONS = {
    "Utrecht-1": [(1, -1), (1, 1), (1, -1), (1, 1), (1, 1), (-1, -1)],
    "Utrecht-2": [(-1, 1), (-1, 1), (1, 1), (-1, -1), (1, 1), (-1, -1)],
    "OSU-1": [(-1, -1), (-1, -1), (-1, -1), (-1, -1), (-1, -1), (-1, -1)],
    "OSU-2": [(1, 1), (-1, -1), (1, 1), (1, -1), (1, 1), (1, -1)],
    "Melbourne-1": [(1, -1), (1, 1), (-1, -1), (1, 1), (1, 1), (1, 0)],
    "Melbourne-2": [(-1, -1), (1, 1), (-1, 1), (-1, -1), (-1, -1), (-1, 0)],
    "VTeX-1": [(-1, 1), (-1, 1), (-1, -1), (-1, 1), (1, 1), (1, 1)],
}

# Hand-derived from the predictions above: matrix[pair_id][system] = breaks?
EXPECTED_BREAKS = {
    "Utrecht-1": [1, 0, 1, 0, 0, 0],
    "Utrecht-2": [0, 0, 1, 1, 1, 1],
    "OSU-1": [1, 1, 1, 1, 1, 1],
    "OSU-2": [1, 1, 1, 0, 1, 0],
    "Melbourne-1": [1, 0, 0, 0, 0, 1],
    "Melbourne-2": [1, 1, 0, 1, 1, 0],
    "VTeX-1": [0, 0, 1, 0, 1, 1],
}


def write_sentiment_corpus(path: Path, n: int, prefix: str = "s") -> list[dict]:
    """Tiny separable review corpus; even ids positive, odd negative."""
    fillers = ["film", "plot", "acting", "scene", "story", "script"]
    records = []
    for i in range(n):
        word = "good" if i % 2 == 0 else "bad"
        records.append(
            {
                "id": f"{prefix}{i}",
                "text": f"the {fillers[i % len(fillers)]} was {word}",
                "value": 0.9 if word == "good" else 0.1,
            }
        )
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    return records


def write_dev_predictions(
    path: Path, system: str, records: list[dict], wrong_ids: set[str] = frozenset()
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            gold = 1 if rec["value"] > 0.5 else -1
            pred = -gold if rec["id"] in wrong_ids else gold
            f.write(f"{system}\t{rec['id']}\t{_fmt(pred)}\n")


def _fmt(label: int) -> str:
    return {-1: "-1", 0: "0", 1: "+1"}[label]


def write_starter_file(path: Path) -> None:
    """Starter dataset containing each pair's original, with a raw value
    consistent with its gold polarity."""
    with open(path, "w", encoding="utf-8") as f:
        for _, _, sid, original, _, gold_orig, _ in SAMPLE_PAIRS:
            value = 0.9 if gold_orig == 1 else 0.1
            f.write(json.dumps({"id": sid, "text": original, "value": value}) + "\n")


def write_pairs_file(path: Path, teams: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pid, team, sid, original, modified, gold_orig, gold_mod in SAMPLE_PAIRS:
            if teams is not None and team not in teams:
                continue
            f.write(
                json.dumps(
                    {
                        "pair_id": pid,
                        "team": team,
                        "task": "sentiment",
                        "original_id": sid,
                        "original": {"text": original},
                        "modified": {"text": modified},
                        "gold_original": gold_orig,
                        "gold_modified": gold_mod,
                    }
                )
                + "\n"
            )


def write_predictions_file(path: Path, systems: list[str] | None = None) -> None:
    systems = systems or SYSTEMS
    with open(path, "w", encoding="utf-8") as f:
        for pid, preds in SAMPLE_PREDICTIONS.items():
            for system, (orig, mod) in zip(SYSTEMS, preds):
                if system not in systems:
                    continue
                f.write(f"{system}\t{pid}:orig\t{_fmt(orig)}\n")
                f.write(f"{system}\t{pid}:mod\t{_fmt(mod)}\n")
