"""Disaster-tweet pipeline: corpus loading, 80:10:10 split, baseline classifier.

The baseline is a smoothed bag-of-words generative classifier (multinomial
naive Bayes) over lowercased alphanumeric tokens. It is deliberately small
and deterministic; anything smarter (a transformer, say) can be swapped in
behind the same ``TextClassifier`` protocol. Positive, zone-matchable
classifications become "report" readings for the ingest feed.
"""

from __future__ import annotations

import csv
import json
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from .ingest import SensorReading

CORPUS_COLUMNS = ("id", "keyword", "location", "text", "target")
TOKENIZER_VERSION = "lower-alnum-v1"
MODEL_FORMAT = "dtdms-baseline-v1"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class CorpusFormatError(ValueError):
    """The corpus CSV is missing columns or contains invalid rows."""


class ModelFormatError(ValueError):
    """A saved model file is unreadable or from a different format version."""


class TextClassifier(Protocol):
    """Anything that labels a text 0/1 with a confidence score."""

    def classify(self, text: str) -> tuple[int, float]: ...


@dataclass(frozen=True)
class TweetRecord:
    id: str
    keyword: str
    location: str
    text: str
    target: int | None  # 0 | 1, None when unlabeled


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)  # train, dev, test
    seed: int = 0

    def __post_init__(self):
        if any(r <= 0 for r in self.ratios):
            raise ValueError(f"each split ratio must be > 0, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {self.ratios}")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop empties."""
    return _TOKEN_RE.findall(text.lower())


def load_corpus(csv_path: str | Path) -> list[TweetRecord]:
    """Load a labeled corpus CSV with header id,keyword,location,text,target.

    Empty target cells yield unlabeled records; anything else must be 0/1.
    """
    path = Path(csv_path)
    records: list[TweetRecord] = []
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [c for c in CORPUS_COLUMNS if c not in header]
        if missing:
            raise CorpusFormatError(f"corpus {path}: missing column(s) {missing}")
        for rownum, row in enumerate(reader, start=2):
            raw_target = (row.get("target") or "").strip()
            if raw_target == "":
                target: int | None = None
            elif raw_target in ("0", "1"):
                target = int(raw_target)
            else:
                raise CorpusFormatError(
                    f"corpus {path}: row {rownum}: target must be 0 or 1, got {raw_target!r}"
                )
            rec = TweetRecord(
                id=str(row["id"]),
                keyword=row.get("keyword") or "",
                location=row.get("location") or "",
                text=row.get("text") or "",
                target=target,
            )
            if rec.id in seen_ids:
                raise CorpusFormatError(f"corpus {path}: row {rownum}: duplicate id {rec.id!r}")
            seen_ids.add(rec.id)
            records.append(rec)
    return records


def split_corpus(
    records: Sequence[TweetRecord], spec: SplitSpec
) -> tuple[list[TweetRecord], list[TweetRecord], list[TweetRecord]]:
    """Deterministic shuffled split; dev/test take floor(n*ratio), train the rest."""
    if not records:
        raise ValueError("cannot split an empty corpus")
    n = len(records)
    n_dev = math.floor(n * spec.ratios[1])
    n_test = math.floor(n * spec.ratios[2])
    n_train = n - n_dev - n_test
    indices = list(range(n))
    random.Random(spec.seed).shuffle(indices)
    shuffled = [records[i] for i in indices]
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_dev],
        shuffled[n_train + n_dev :],
    )


@dataclass(frozen=True)
class BaselineModel:
    """Multinomial naive Bayes with add-one smoothing over two classes."""

    vocabulary: dict[str, int]  # token -> index
    log_likelihood: tuple[tuple[float, ...], tuple[float, ...]]  # [class][token index]
    priors: tuple[float, float]
    tokenizer_version: str = TOKENIZER_VERSION

    def classify(self, text: str) -> tuple[int, float]:
        """(label, posterior of that label); unknown tokens are ignored.

        Empty or fully-unknown text falls back to the prior argmax.
        """
        log_posterior = [math.log(self.priors[0]), math.log(self.priors[1])]
        for token in tokenize(text):
            idx = self.vocabulary.get(token)
            if idx is None:
                continue
            log_posterior[0] += self.log_likelihood[0][idx]
            log_posterior[1] += self.log_likelihood[1][idx]
        # normalize the pair via log-sum-exp
        peak = max(log_posterior)
        weights = [math.exp(lp - peak) for lp in log_posterior]
        total = weights[0] + weights[1]
        posterior = (weights[0] / total, weights[1] / total)
        label = 1 if posterior[1] > posterior[0] else 0
        return label, posterior[label]

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "tokenizer_version": self.tokenizer_version,
            "vocabulary": self.vocabulary,
            "log_likelihood": [list(self.log_likelihood[0]), list(self.log_likelihood[1])],
            "priors": list(self.priors),
        }


def train(train_set: Sequence[TweetRecord]) -> BaselineModel:
    """Fit the baseline on labeled records; needs both classes present."""
    labeled = [r for r in train_set if r.target is not None]
    class_docs = {0: 0, 1: 0}
    token_counts: dict[str, list[int]] = {}
    total_tokens = [0, 0]
    for rec in labeled:
        c = rec.target
        class_docs[c] += 1
        for token in tokenize(rec.text):
            counts = token_counts.setdefault(token, [0, 0])
            counts[c] += 1
            total_tokens[c] += 1
    if class_docs[0] == 0 or class_docs[1] == 0:
        raise ValueError(
            f"training set must contain both classes (got {class_docs[0]} zeros, {class_docs[1]} ones)"
        )
    vocabulary = {token: i for i, token in enumerate(sorted(token_counts))}
    v = len(vocabulary)
    log_likelihood: tuple[list[float], list[float]] = ([0.0] * v, [0.0] * v)
    for token, idx in vocabulary.items():
        counts = token_counts[token]
        for c in (0, 1):
            log_likelihood[c][idx] = math.log((counts[c] + 1) / (total_tokens[c] + v))
    n = class_docs[0] + class_docs[1]
    return BaselineModel(
        vocabulary=vocabulary,
        log_likelihood=(tuple(log_likelihood[0]), tuple(log_likelihood[1])),
        priors=(class_docs[0] / n, class_docs[1] / n),
    )


def classify(model: TextClassifier, text: str) -> tuple[int, float]:
    return model.classify(text)


def evaluate(model: TextClassifier, test_set: Sequence[TweetRecord]) -> dict:
    """Accuracy plus per-class precision/recall on a labeled set."""
    labeled = [r for r in test_set if r.target is not None]
    if not labeled:
        raise ValueError("cannot evaluate on an empty (or unlabeled) test set")
    confusion = {(a, p): 0 for a in (0, 1) for p in (0, 1)}  # (actual, predicted)
    for rec in labeled:
        predicted, _ = model.classify(rec.text)
        confusion[(rec.target, predicted)] += 1
    n = len(labeled)
    correct = confusion[(0, 0)] + confusion[(1, 1)]
    per_class = {}
    for c in (0, 1):
        predicted_c = confusion[(0, c)] + confusion[(1, c)]
        actual_c = confusion[(c, 0)] + confusion[(c, 1)]
        per_class[str(c)] = {
            "precision": (confusion[(c, c)] / predicted_c) if predicted_c else 0.0,
            "recall": (confusion[(c, c)] / actual_c) if actual_c else 0.0,
        }
    return {"accuracy": correct / n, "per_class": per_class, "n": n}


def save_model(model: BaselineModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )


def load_model(path: str | Path) -> BaselineModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    if data.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"unsupported model format {data.get('format')!r}")
    if data.get("tokenizer_version") != TOKENIZER_VERSION:
        raise ModelFormatError(
            f"model tokenizer {data.get('tokenizer_version')!r} does not match {TOKENIZER_VERSION!r}"
        )
    return BaselineModel(
        vocabulary={str(k): int(v) for k, v in data["vocabulary"].items()},
        log_likelihood=(tuple(data["log_likelihood"][0]), tuple(data["log_likelihood"][1])),
        priors=(float(data["priors"][0]), float(data["priors"][1])),
    )


def to_report_readings(
    model: TextClassifier,
    records: Sequence[TweetRecord],
    zones: Sequence[str],
    ts: float = 0.0,
    sensor_id: str = "nlp-feed",
) -> list[SensorReading]:
    """Turn positive, zone-matchable classifications into report readings.

    Zone matching is exact (case-insensitive, trimmed); these markers are
    display-only and never alter damage state downstream.
    """
    zone_lookup = {z.strip().lower(): z for z in zones}
    readings: list[SensorReading] = []
    for rec in records:
        label, _ = model.classify(rec.text)
        if label != 1:
            continue
        zone = zone_lookup.get(rec.location.strip().lower())
        if zone is None:
            continue
        readings.append(
            SensorReading(ts=ts, sensor_id=sensor_id, kind="report", target_id=zone, value=1)
        )
    return readings
