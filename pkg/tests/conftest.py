from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fixtures  # noqa: E402

from bibi.corpus import Task, ingest_pairs, ingest_predictions  # noqa: E402


@pytest.fixture
def sample_pairs(tmp_path):
    path = tmp_path / "pairs.jsonl"
    fixtures.write_pairs_file(path)
    return ingest_pairs(path)


@pytest.fixture
def sample_predictions(tmp_path):
    path = tmp_path / "predictions.tsv"
    fixtures.write_predictions_file(path)
    return ingest_predictions(path, Task.SENTIMENT)


@pytest.fixture
def starter_file(tmp_path):
    path = tmp_path / "starter.jsonl"
    fixtures.write_starter_file(path)
    return path
