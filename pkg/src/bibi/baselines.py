"""Organizer reference systems.

Two classifiers: a bag-of-ngrams linear sentiment classifier (hashed n-gram
counts, logistic loss, seeded SGD) and a QA-SRL answer selector (candidate
spans from a dependency parse, skip-gram question features, binary logistic
regression with argmax at inference).  Training is deliberately
single-threaded and seeded so repeated runs are bit-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .corpus import (
    DependencyParse,
    Polarity,
    QasrlDataset,
    QasrlItem,
    SentimentDataset,
    tokenize,
    tokenize_with_spans,
)
from .scoring import OVERLAP_THRESHOLD, answer_overlap


class BaselineError(Exception):
    pass


def hash_feature(feature: str, dimension: int) -> int:
    """Deterministic feature hash: blake2b, truncated, modulo the table size."""
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


@dataclass(frozen=True)
class SparseVector:
    indices: tuple[int, ...]  # strictly increasing
    values: tuple[float, ...]
    dimension: int

    def __post_init__(self) -> None:
        if any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise BaselineError("sparse indices must be strictly increasing")
        if self.indices and self.indices[-1] >= self.dimension:
            raise BaselineError("sparse index out of range")

    @classmethod
    def from_counts(cls, counts: dict[int, float], dimension: int) -> "SparseVector":
        items = sorted((i, v) for i, v in counts.items() if v != 0.0)
        return cls(
            indices=tuple(i for i, _ in items),
            values=tuple(float(v) for _, v in items),
            dimension=dimension,
        )

    def dot(self, weights: dict[int, float]) -> float:
        return sum(v * weights.get(i, 0.0) for i, v in zip(self.indices, self.values))


def _ngrams(tokens: list[str], n_max: int) -> list[str]:
    grams = []
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            grams.append("_".join(tokens[i : i + n]))
    return grams


def featurize_ngrams(text: str, n_max: int, dimension: int) -> SparseVector:
    """Hashed token n-gram counts, n from 1 to n_max; collisions accumulate."""
    if n_max < 1:
        raise BaselineError("n_max must be >= 1")
    if dimension < 1 or dimension & (dimension - 1):
        raise BaselineError("dimension must be a power of two")
    counts: dict[int, float] = {}
    for gram in _ngrams(tokenize(text), n_max):
        idx = hash_feature(gram, dimension)
        counts[idx] = counts.get(idx, 0.0) + 1.0
    return SparseVector.from_counts(counts, dimension)


@dataclass
class TrainConfig:
    learning_rate: float = 0.5  # decays as 1/sqrt(t)
    epochs: int = 10
    l2: float = 1e-6
    seed: int = 13
    n_max: int = 3
    dimension: int = 1 << 18
    neutral_band: float = 0.0  # dead zone tau around 0.5 at prediction time


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_loss(
    weights: dict[int, float],
    bias: float,
    examples: list[tuple[SparseVector, int]],
    l2: float,
) -> float:
    """Mean log loss plus the L2 penalty over the stored weights."""
    total = 0.0
    for x, y in examples:
        z = x.dot(weights) + bias
        # log(1 + exp(-z*y')) with y' in {-1,+1}, numerically stable
        margin = z if y == 1 else -z
        total += math.log1p(math.exp(-abs(margin))) + max(-margin, 0.0)
    penalty = 0.5 * l2 * sum(w * w for w in weights.values())
    return total / len(examples) + penalty


def logistic_gradient(
    weights: dict[int, float],
    bias: float,
    x: SparseVector,
    y: int,
    l2: float,
) -> tuple[dict[int, float], float]:
    """Gradient of the per-example regularized log loss (for testing)."""
    g = _sigmoid(x.dot(weights) + bias) - y
    grad = {i: g * v + l2 * weights.get(i, 0.0) for i, v in zip(x.indices, x.values)}
    return grad, g


def sgd_train(
    examples: list[tuple[SparseVector, int]],
    config: TrainConfig,
) -> tuple[dict[int, float], float, list[float]]:
    """Seeded SGD over shuffled epochs; returns weights, bias, per-epoch loss.

    L2 is applied to the features touched by each example, which keeps the
    weight table sparse; at 1e-6 the difference from full decay is noise.
    """
    if not examples:
        raise BaselineError("no training examples")
    rng = random.Random(config.seed)
    weights: dict[int, float] = {}
    bias = 0.0
    order = list(range(len(examples)))
    t = 0
    losses = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        for idx in order:
            t += 1
            x, y = examples[idx]
            lr = config.learning_rate / math.sqrt(t)
            g = _sigmoid(x.dot(weights) + bias) - y
            for i, v in zip(x.indices, x.values):
                w = weights.get(i, 0.0)
                weights[i] = w - lr * (g * v + config.l2 * w)
            bias -= lr * g
        losses.append(logistic_loss(weights, bias, examples, config.l2))
    return weights, bias, losses


@dataclass
class SentimentModel:
    weights: dict[int, float]
    bias: float
    config: TrainConfig
    epoch_losses: list[float] = field(default_factory=list)


def train_sentiment(dataset: SentimentDataset, config: TrainConfig | None = None) -> SentimentModel:
    """Fit the bag-of-ngrams classifier; neutral-flagged items are excluded."""
    config = config or TrainConfig()
    examples = []
    classes = set()
    for item in dataset.training_items():
        y = 1 if item.polarity is Polarity.POSITIVE else 0
        classes.add(y)
        examples.append((featurize_ngrams(item.text, config.n_max, config.dimension), y))
    if len(classes) < 2:
        raise BaselineError("training data must contain both polarities")
    weights, bias, losses = sgd_train(examples, config)
    return SentimentModel(weights=weights, bias=bias, config=config, epoch_losses=losses)


def predict_sentiment(model: SentimentModel, text: str) -> tuple[Polarity, float]:
    """Sigmoid score with an optional neutral dead zone; ties go positive."""
    x = featurize_ngrams(text, model.config.n_max, model.config.dimension)
    score = _sigmoid(x.dot(model.weights) + model.bias)
    tau = model.config.neutral_band
    if score > 0.5 + tau:
        return Polarity.POSITIVE, score
    if score < 0.5 - tau:
        return Polarity.NEGATIVE, score
    if tau == 0.0:
        return Polarity.POSITIVE, score  # exact tie
    return Polarity.NEUTRAL, score


def skipgram_features(tokens: list[str], n_max: int = 5, max_skip: int = 4) -> dict[str, int]:
    """Skip-gram counts: k-token subsequences, k <= n_max, with gaps of at
    most max_skip between adjacent selected positions.  Gap sizes are elided
    in the rendered feature string."""
    if not tokens:
        raise BaselineError("token list must be non-empty")
    counts: dict[str, int] = {}

    def extend(prefix: list[str], last: int) -> None:
        gram = "_".join(prefix)
        counts[gram] = counts.get(gram, 0) + 1
        if len(prefix) == n_max:
            return
        for nxt in range(last + 1, min(last + max_skip + 2, len(tokens))):
            extend(prefix + [tokens[nxt]], nxt)

    for start in range(len(tokens)):
        extend([tokens[start]], start)
    return counts


@dataclass(frozen=True)
class CandidateSpan:
    start: int  # token index, inclusive
    end: int  # token index, exclusive
    head_index: int
    relation_path: str


def _subtree_range(parse: DependencyParse, root: int) -> tuple[int, int]:
    children: dict[int, list[int]] = {}
    for i, h in enumerate(parse.heads):
        children.setdefault(h, []).append(i)
    stack = [root]
    lo = hi = root
    while stack:
        node = stack.pop()
        lo = min(lo, node)
        hi = max(hi, node)
        stack.extend(children.get(node, []))
    return lo, hi + 1


def candidate_spans(
    parse: DependencyParse,
    predicate_index: int,
    expand_subtree: bool = True,
) -> list[CandidateSpan]:
    """Answer candidates: tokens within undirected tree distance 2 of the
    predicate, each widened to its dependency subtree's contiguous range."""
    if not 0 <= predicate_index < len(parse):
        raise BaselineError(f"predicate index {predicate_index} out of range")
    neighbors: dict[int, list[tuple[int, str]]] = {i: [] for i in range(len(parse))}
    for i, (h, rel) in enumerate(zip(parse.heads, parse.relations)):
        if h == -1:
            continue
        neighbors[h].append((i, rel))  # head -> dependent, labeled by the dependent
        neighbors[i].append((h, rel + "^"))  # dependent -> head
    paths: dict[int, str] = {}
    frontier = [(predicate_index, "")]
    for _ in range(2):
        nxt = []
        for node, path in frontier:
            for other, label in neighbors[node]:
                if other == predicate_index or other in paths:
                    continue
                paths[other] = f"{path}/{label}" if path else label
                nxt.append((other, paths[other]))
        frontier = nxt
    spans = []
    seen: set[tuple[int, int]] = set()
    for node in sorted(paths):
        lo, hi = _subtree_range(parse, node) if expand_subtree else (node, node + 1)
        if (lo, hi) in seen:
            continue
        seen.add((lo, hi))
        spans.append(CandidateSpan(start=lo, end=hi, head_index=node, relation_path=paths[node]))
    return sorted(spans, key=lambda s: (s.start, s.end))


#: Auxiliaries skipped when locating the question's main verb.
_AUXILIARIES = {
    "is", "are", "was", "were", "do", "does", "did",
    "has", "have", "had", "will", "would", "can", "could",
    "should", "may", "might",
}


def question_verb(question: str) -> str:
    """First token after the wh-word that is not an auxiliary."""
    tokens = tokenize(question)
    for tok in tokens[1:]:
        if tok.lower() not in _AUXILIARIES and any(c.isalnum() for c in tok):
            return tok
    return tokens[-1] if tokens else ""


def qasrl_features(
    item: QasrlItem,
    candidate: CandidateSpan,
    parse: DependencyParse,
    n_max: int = 5,
    max_skip: int = 4,
    dimension: int = 1 << 18,
) -> SparseVector:
    """Features for one (item, candidate) pair: predicate, question verb,
    question string, relation path, and question skip-grams conjoined with
    the relation path."""
    rel = candidate.relation_path
    counts: dict[int, float] = {}

    def bump(feature: str, value: float = 1.0) -> None:
        idx = hash_feature(feature, dimension)
        counts[idx] = counts.get(idx, 0.0) + value

    bump(f"pred={item.predicate}")
    bump(f"qverb={question_verb(item.question)}")
    bump(f"qstr={item.question}")
    bump(f"rel={rel}")
    for gram, count in skipgram_features(tokenize(item.question), n_max, max_skip).items():
        bump(f"sg={gram}|rel={rel}", float(count))
    return SparseVector.from_counts(counts, dimension)


@dataclass
class QasrlConfig:
    learning_rate: float = 0.5
    epochs: int = 10
    l2: float = 1e-6
    seed: int = 13
    n_max: int = 5
    max_skip: int = 4
    dimension: int = 1 << 18
    expand_subtree: bool = True


@dataclass
class QasrlModel:
    weights: dict[int, float]
    bias: float
    config: QasrlConfig
    epoch_losses: list[float] = field(default_factory=list)


def candidate_text(item: QasrlItem, candidate: CandidateSpan) -> str:
    spans = tokenize_with_spans(item.sentence)
    return item.sentence[spans[candidate.start][1] : spans[candidate.end - 1][2]]


def _candidate_char_span(item: QasrlItem, candidate: CandidateSpan) -> tuple[int, int]:
    spans = tokenize_with_spans(item.sentence)
    return spans[candidate.start][1], spans[candidate.end - 1][2]


def candidate_is_correct(item: QasrlItem, candidate: CandidateSpan) -> bool:
    """Training label: does the candidate overlap a gold answer by >= 75%?"""
    span = _candidate_char_span(item, candidate)
    best = 0.0
    for gold in item.answers:
        start = item.sentence.find(gold)
        best = max(best, answer_overlap(span, (start, start + len(gold))))
    return best >= OVERLAP_THRESHOLD


def _item_examples(
    item: QasrlItem, parse: DependencyParse, config: QasrlConfig
) -> list[tuple[SparseVector, int, CandidateSpan]]:
    out = []
    for cand in candidate_spans(parse, item.predicate_token_index, config.expand_subtree):
        x = qasrl_features(item, cand, parse, config.n_max, config.max_skip, config.dimension)
        out.append((x, int(candidate_is_correct(item, cand)), cand))
    return out


def train_qasrl(
    dataset: QasrlDataset,
    parses: dict[str, DependencyParse],
    config: QasrlConfig | None = None,
) -> QasrlModel:
    config = config or QasrlConfig()
    examples: list[tuple[SparseVector, int]] = []
    positives = 0
    for item in dataset:
        parse = parses.get(item.id)
        if parse is None:
            warnings.warn(f"no parse for item {item.id!r}; skipped")
            continue
        if len(parse) != len(tokenize(item.sentence)):
            warnings.warn(f"parse/tokenization length mismatch for item {item.id!r}; skipped")
            continue
        for x, y, _ in _item_examples(item, parse, config):
            examples.append((x, y))
            positives += y
    if positives == 0:
        raise BaselineError("no candidate matched a gold answer; cannot train")
    train_cfg = TrainConfig(
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        l2=config.l2,
        seed=config.seed,
        dimension=config.dimension,
    )
    weights, bias, losses = sgd_train(examples, train_cfg)
    return QasrlModel(weights=weights, bias=bias, config=config, epoch_losses=losses)


def predict_qasrl(model: QasrlModel, item: QasrlItem, parse: DependencyParse) -> str:
    """Highest-scoring candidate's text; ties break to the earliest, shortest
    span.  No candidates yields an empty answer (scored incorrect)."""
    cfg = model.config
    best: tuple[float, int, int] | None = None
    best_cand: CandidateSpan | None = None
    for cand in candidate_spans(parse, item.predicate_token_index, cfg.expand_subtree):
        x = qasrl_features(item, cand, parse, cfg.n_max, cfg.max_skip, cfg.dimension)
        score = _sigmoid(x.dot(model.weights) + model.bias)
        key = (-score, cand.start, cand.end - cand.start)
        if best is None or key < best:
            best = key
            best_cand = cand
    if best_cand is None:
        warnings.warn(f"item {item.id!r} has no candidates; returning empty answer")
        return ""
    return candidate_text(item, best_cand)


MODEL_FORMAT = "bibi-model/1"


def save_model(model: SentimentModel | QasrlModel, path: str | Path) -> None:
    task = "sentiment" if isinstance(model, SentimentModel) else "qasrl"
    payload = {
        "format": MODEL_FORMAT,
        "task": task,
        "config": asdict(model.config),
        "bias": model.bias,
        "weights": {str(i): w for i, w in sorted(model.weights.items())},
        "epoch_losses": model.epoch_losses,
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_model(path: str | Path) -> SentimentModel | QasrlModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise BaselineError(f"unsupported model format {payload.get('format')!r}")
    weights = {int(i): float(w) for i, w in payload["weights"].items()}
    if payload["task"] == "sentiment":
        return SentimentModel(
            weights=weights,
            bias=payload["bias"],
            config=TrainConfig(**payload["config"]),
            epoch_losses=payload.get("epoch_losses", []),
        )
    return QasrlModel(
        weights=weights,
        bias=payload["bias"],
        config=QasrlConfig(**payload["config"]),
        epoch_losses=payload.get("epoch_losses", []),
    )
