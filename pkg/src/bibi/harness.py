"""Round lifecycle: build -> break -> score, with file-backed persistence.

A round is a self-contained directory (datasets, submissions, models,
reports) plus a round.json manifest.  Every mutation rewrites the manifest
via an atomic replace, and all mutations on a round are serialized through a
per-round lock, so a crash between any two operations leaves the round
re-loadable.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from filelock import FileLock

from . import baselines, scoring, validation
from .corpus import (
    CorpusError,
    MinimalPair,
    PredictionTable,
    Task,
    ingest_pairs,
    ingest_parses,
    ingest_predictions,
    ingest_qasrl,
    ingest_sentiment,
)

DEFAULT_STORE_ENV = "BIBI_STORE"
DEFAULT_STORE_DIR = "bibi-store"


class HarnessError(Exception):
    pass


class PhaseError(HarnessError):
    """An operation was attempted in the wrong round phase."""


class Phase(str, Enum):
    BUILD = "BUILD"
    BREAK = "BREAK"
    SCORE = "SCORE"
    CLOSED = "CLOSED"


_PHASE_ORDER = [Phase.BUILD, Phase.BREAK, Phase.SCORE, Phase.CLOSED]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def default_store_dir() -> Path:
    return Path(os.environ.get(DEFAULT_STORE_ENV, DEFAULT_STORE_DIR))


@dataclass
class RoundConfig:
    max_edit_cost: int = 6
    dev_coverage_threshold: float = 0.95


class Round:
    """Handle on one round directory; state lives in round.json."""

    def __init__(self, directory: Path):
        self.dir = Path(directory)
        self.manifest_path = self.dir / "round.json"
        if not self.manifest_path.exists():
            raise HarnessError(f"{self.dir} is not a round directory")
        self._lock = FileLock(str(self.dir / "round.lock"))
        self.reload()

    def reload(self) -> None:
        self.manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))

    def _save(self) -> None:
        atomic_write_text(
            self.manifest_path, json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        )

    @property
    def round_id(self) -> str:
        return self.manifest["round_id"]

    @property
    def task(self) -> Task:
        return Task(self.manifest["task"])

    @property
    def phase(self) -> Phase:
        return Phase(self.manifest["phase"])

    @property
    def phase_history(self) -> list[Phase]:
        return [Phase(e["phase"]) for e in self.manifest["phase_history"]]

    @property
    def config(self) -> RoundConfig:
        return RoundConfig(**self.manifest.get("config", {}))

    def _require_phase(self, *allowed: Phase) -> None:
        if self.phase not in allowed:
            raise PhaseError(
                f"round {self.round_id!r} is in phase {self.phase.value}; "
                f"this operation requires {' or '.join(p.value for p in allowed)}"
            )

    # dataset access

    def dataset_path(self, name: str) -> Path:
        return self.dir / self.manifest["datasets"][name]

    def load_dataset(self, name: str):
        path = self.dataset_path(name)
        if self.task is Task.SENTIMENT:
            return ingest_sentiment(path)
        return ingest_qasrl(path)

    def load_parses(self) -> dict:
        if "parses" not in self.manifest["datasets"]:
            return {}
        return ingest_parses(self.dataset_path("parses"))

    def baseline_models(self) -> dict[str, object]:
        models = {}
        for name, rel in self.manifest.get("models", {}).items():
            models[name] = baselines.load_model(self.dir / rel)
        return models

    # mutations

    def submit_dev_predictions(self, system: str, predictions_file: str | Path) -> float:
        """Record a builder's blind-dev predictions; returns dev accuracy."""
        with self._lock:
            self.reload()
            self._require_phase(Phase.BUILD)
            table = ingest_predictions(predictions_file, self.task)
            dev = self.load_dataset("dev")
            scorable = [
                item
                for item in dev
                if self.task is Task.QASRL or not item.excluded_from_training
            ]
            missing = [item.id for item in scorable if table.get(system, item.id) is None]
            coverage = 1.0 - len(missing) / len(scorable) if scorable else 0.0
            threshold = self.config.dev_coverage_threshold
            if coverage < threshold:
                raise HarnessError(
                    f"dev predictions for {system!r} cover {coverage:.1%} of the dev set "
                    f"(threshold {threshold:.0%}); missing ids: {', '.join(missing[:10])}"
                    + ("..." if len(missing) > 10 else "")
                )
            accuracy = scoring.dev_accuracy(table, system, dev, self.task)
            dest = self.dir / "dev_predictions" / f"{system}.tsv"
            dest.parent.mkdir(exist_ok=True)
            shutil.copyfile(predictions_file, dest)
            self.manifest.setdefault("systems", {})[system] = {
                "dev_accuracy": accuracy,
                "dev_predictions": str(dest.relative_to(self.dir)),
            }
            self._save()
            return accuracy

    def advance_phase(self) -> Phase:
        with self._lock:
            self.reload()
            current = self.phase
            if current is Phase.CLOSED:
                raise PhaseError(f"round {self.round_id!r} is closed")
            nxt = _PHASE_ORDER[_PHASE_ORDER.index(current) + 1]
            if current is Phase.BUILD and not self.manifest.get("systems"):
                raise PhaseError("cannot open BREAK: no system has submitted dev predictions")
            if current is Phase.BREAK:
                clean = sum(
                    len(t.get("clean_pair_ids", [])) for t in self.manifest.get("teams", {}).values()
                )
                if clean == 0:
                    raise PhaseError("cannot open SCORE: no validated pairs were submitted")
            if current is Phase.SCORE and not (self.dir / "report.json").exists():
                raise PhaseError("cannot close the round before it has been scored")
            self.manifest["phase"] = nxt.value
            self.manifest["phase_history"].append({"phase": nxt.value, "at": _now()})
            self._save()
            return nxt

    def submit_pairs(self, team: str, pairs_file: str | Path) -> list[dict]:
        """Ingest, validate, and store a breaker team's pairs.

        Returns the per-pair validation report; clean pairs join the round's
        test set.  Pair ids already used in this round reject the later copy.
        """
        with self._lock:
            self.reload()
            self._require_phase(Phase.BREAK)
            pairs = ingest_pairs(pairs_file)
            for pair in pairs:
                if pair.task is not self.task:
                    raise HarnessError(
                        f"pair {pair.pair_id!r} is for task {pair.task.value}, "
                        f"round is {self.task.value}"
                    )
            starter = self.load_dataset("starter")
            config = validation.ValidationConfig(max_edit_cost=self.config.max_edit_cost)
            existing_ids = {
                pid
                for t in self.manifest.get("teams", {}).values()
                for pid in t.get("all_pair_ids", [])
            }
            report = []
            clean_ids = []
            for pair in pairs:
                if pair.pair_id in existing_ids:
                    report.append(
                        {
                            "pair_id": pair.pair_id,
                            "violations": [
                                {
                                    "code": "DUPLICATE_PAIR_ID",
                                    "detail": "pair_id already submitted in this round",
                                }
                            ],
                            "edit_cost": None,
                        }
                    )
                    continue
                violations = validation.validate_pair(pair, starter, config)
                try:
                    cost = validation.token_diff(
                        _pair_text(pair, "orig"), _pair_text(pair, "mod")
                    ).cost
                except validation.ValidationError:
                    cost = None
                report.append(
                    {
                        "pair_id": pair.pair_id,
                        "violations": [
                            {"code": v.code.value, "detail": v.detail} for v in violations
                        ],
                        "edit_cost": cost,
                    }
                )
                if not violations:
                    clean_ids.append(pair.pair_id)
            if not clean_ids:
                warnings.warn(f"submission from team {team!r} contained no valid pairs")

            pairs_dir = self.dir / "pairs"
            pairs_dir.mkdir(exist_ok=True)
            dest = pairs_dir / f"{team}.jsonl"
            shutil.copyfile(pairs_file, dest)
            report_path = pairs_dir / f"{team}.report.jsonl"
            atomic_write_text(
                report_path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in report)
            )
            entry = self.manifest.setdefault("teams", {}).setdefault(team, {})
            entry["pairs_file"] = str(dest.relative_to(self.dir))
            entry["report_file"] = str(report_path.relative_to(self.dir))
            entry.setdefault("all_pair_ids", []).extend(r["pair_id"] for r in report)
            entry.setdefault("clean_pair_ids", []).extend(clean_ids)
            self._save()
            return report

    def submit_test_predictions(self, system: str, predictions_file: str | Path) -> int:
        with self._lock:
            self.reload()
            self._require_phase(Phase.SCORE)
            if system not in self.manifest.get("systems", {}):
                raise HarnessError(
                    f"system {system!r} is not registered (no dev predictions on record)"
                )
            table = ingest_predictions(predictions_file, self.task)
            dest = self.dir / "test_predictions" / f"{system}.tsv"
            dest.parent.mkdir(exist_ok=True)
            shutil.copyfile(predictions_file, dest)
            self.manifest["systems"][system]["test_predictions"] = str(
                dest.relative_to(self.dir)
            )
            self._save()
            return len(table)

    def effective_pairs(
        self,
        exclude_contested: bool = False,
        external_labels_file: str | Path | None = None,
    ) -> list[MinimalPair]:
        """The round's test set: all clean pairs, optionally minus pairs whose
        breaker label is contested by external labels."""
        pairs: list[MinimalPair] = []
        for team, entry in sorted(self.manifest.get("teams", {}).items()):
            clean = set(entry.get("clean_pair_ids", []))
            if not clean:
                continue
            for pair in ingest_pairs(self.dir / entry["pairs_file"]):
                if pair.pair_id in clean:
                    pairs.append(pair)
        if exclude_contested:
            if external_labels_file is None:
                raise HarnessError("--exclude-contested requires an external labels file")
            external = _load_external_labels(external_labels_file)
            kept = []
            for pair in pairs:
                results = validation.adjudicate(pair, external.get(pair.pair_id, {}))
                if any(r.status is validation.AdjudicationStatus.CONTESTED for r in results):
                    continue
                kept.append(pair)
            pairs = kept
        return pairs

    def score(
        self,
        exclude_contested: bool = False,
        external_labels_file: str | Path | None = None,
        keep_open: bool = False,
    ) -> scoring.ScoreReport:
        """Score the round and write report.json / report.txt.

        Re-scoring an already closed round is allowed and, absent new
        submissions, reproduces the report byte for byte.
        """
        with self._lock:
            self.reload()
            self._require_phase(Phase.SCORE, Phase.CLOSED)
            pairs = self.effective_pairs(exclude_contested, external_labels_file)
            if not pairs:
                raise HarnessError("no pairs to score")
            systems = []
            for name, entry in sorted(self.manifest.get("systems", {}).items()):
                table = PredictionTable()
                if "test_predictions" in entry:
                    table = ingest_predictions(self.dir / entry["test_predictions"], self.task)
                else:
                    warnings.warn(
                        f"system {name!r} submitted no test predictions; all counted incorrect"
                    )
                systems.append(
                    scoring.SystemRecord(
                        system=name, dev_accuracy=entry["dev_accuracy"], predictions=table
                    )
                )
            report = scoring.leaderboard(systems, pairs)
            atomic_write_text(
                self.dir / "report.json",
                json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
            )
            atomic_write_text(self.dir / "report.txt", report.render_text())
            if self.phase is Phase.SCORE and not keep_open:
                self.manifest["phase"] = Phase.CLOSED.value
                self.manifest["phase_history"].append({"phase": Phase.CLOSED.value, "at": _now()})
            self._save()
            return report

    def probe(self, original: dict, modified: dict, labels: dict) -> dict:
        """Validate a candidate pair and run the organizer baselines on both
        sides.  Available in BREAK (the interactive construction loop)."""
        self.reload()
        self._require_phase(Phase.BREAK)
        pair = _draft_pair(self.task, original, modified, labels)
        starter = self.load_dataset("starter")
        violations = validation.validate_pair(
            pair, starter, validation.ValidationConfig(max_edit_cost=self.config.max_edit_cost)
        )
        try:
            cost = validation.token_diff(_pair_text(pair, "orig"), _pair_text(pair, "mod")).cost
        except validation.ValidationError:
            cost = None
        predictions = {}
        for name, model in self.baseline_models().items():
            if isinstance(model, baselines.SentimentModel):
                orig_label, orig_score = baselines.predict_sentiment(
                    model, _pair_text(pair, "orig")
                )
                mod_label, mod_score = baselines.predict_sentiment(model, _pair_text(pair, "mod"))
                predictions[name] = {
                    "original": {"label": str(orig_label), "score": orig_score},
                    "modified": {"label": str(mod_label), "score": mod_score},
                }
            # QA-SRL probes would need a live parser for the modified side;
            # parses are external inputs, so those baselines stay file-based.
        return {
            "violations": [{"code": v.code.value, "detail": v.detail} for v in violations],
            "edit_cost": cost,
            "predictions": predictions,
        }


def _pair_text(pair: MinimalPair, side: str) -> str:
    from .corpus import pair_side_text

    return pair_side_text(pair, side)


def _draft_pair(task: Task, original: dict, modified: dict, labels: dict) -> MinimalPair:
    from .corpus import _parse_pair_label  # shared label-domain check

    return MinimalPair(
        pair_id="_probe",
        team="_probe",
        task=task,
        original_item_id=str(labels.get("original_id", original.get("id", ""))),
        original=original,
        modified=modified,
        gold_original=_parse_pair_label(labels["gold_original"], task, Path("<probe>"), 0),
        gold_modified=_parse_pair_label(labels["gold_modified"], task, Path("<probe>"), 0),
    )


def _load_external_labels(path: str | Path) -> dict[str, dict[str, list]]:
    """External labels JSONL: {"pair_id", "side", "labels": [...]}."""
    out: dict[str, dict[str, list]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            out.setdefault(obj["pair_id"], {})[obj["side"]] = obj["labels"]
    return out


class RoundStore:
    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_store_dir()

    def round_ids(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / "round.json").exists())

    def load(self, round_id: str) -> Round:
        path = self.root / round_id
        if not (path / "round.json").exists():
            raise HarnessError(f"no round {round_id!r} in store {self.root}")
        return Round(path)

    def init_round(
        self,
        round_id: str,
        task: Task,
        train_file: str | Path,
        dev_file: str | Path,
        starter_file: str | Path,
        parses_file: str | Path | None = None,
        force: bool = False,
        train_baseline: bool = False,
        baseline_seed: int = 13,
        config: RoundConfig | None = None,
    ) -> Round:
        """Create a round directory in BUILD phase; datasets must ingest cleanly."""
        round_dir = self.root / round_id
        if round_dir.exists():
            if not force:
                raise HarnessError(f"round {round_id!r} already exists (use --force to replace)")
            shutil.rmtree(round_dir)
        for name, path in (("train", train_file), ("dev", dev_file), ("starter", starter_file)):
            if not Path(path).exists():
                raise HarnessError(f"{name} file does not exist: {path}")

        ingest = ingest_sentiment if task is Task.SENTIMENT else ingest_qasrl
        train_ds = ingest(train_file)
        ingest(dev_file)
        ingest(starter_file)
        parses = ingest_parses(parses_file) if parses_file else None

        round_dir.mkdir(parents=True)
        datasets = {}
        checksums = {}
        sources = {"train": train_file, "dev": dev_file, "starter": starter_file}
        if parses_file:
            sources["parses"] = parses_file
        for name, src in sources.items():
            ext = ".conll" if name == "parses" else ".jsonl"
            dest = round_dir / f"{name}{ext}"
            shutil.copyfile(src, dest)
            datasets[name] = dest.name
            checksums[name] = _sha256(dest)

        models = {}
        if train_baseline:
            models_dir = round_dir / "models"
            models_dir.mkdir()
            if task is Task.SENTIMENT:
                model = baselines.train_sentiment(
                    train_ds, baselines.TrainConfig(seed=baseline_seed)
                )
                baselines.save_model(model, models_dir / "bag-of-ngrams.json")
                models["bag-of-ngrams"] = "models/bag-of-ngrams.json"
            elif parses is not None:
                model = baselines.train_qasrl(
                    train_ds, parses, baselines.QasrlConfig(seed=baseline_seed)
                )
                baselines.save_model(model, models_dir / "qasrl-baseline.json")
                models["qasrl-baseline"] = "models/qasrl-baseline.json"

        manifest = {
            "round_id": round_id,
            "task": task.value,
            "phase": Phase.BUILD.value,
            "phase_history": [{"phase": Phase.BUILD.value, "at": _now()}],
            "datasets": datasets,
            "checksums": checksums,
            "models": models,
            "systems": {},
            "teams": {},
            "config": {
                "max_edit_cost": (config or RoundConfig()).max_edit_cost,
                "dev_coverage_threshold": (config or RoundConfig()).dev_coverage_threshold,
            },
        }
        atomic_write_text(
            round_dir / "round.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        )
        return Round(round_dir)
