"""Synthetic ictal/interictal benchmark: generator, split, AUC and the experiment driver."""

from __future__ import annotations

import csv
import hashlib
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .forest import ForestConfig, train_forest
from .pipeline import PipelineConfig, extract_batch, format_config
from .signal_core import SpatiotemporalSignal


def generate_synthetic(n_per_class: int, n_channels: int = 8, n_samples: int = 400,
                       sample_rate_hz: float = 400.0, seed: int = 0):
    """Return ``[(signal, label), ...]``, all label-0 samples first.

    Interictal (0) samples are independent unit-variance Gaussian noise per
    channel. Ictal (1) samples add one 4-8 Hz sinusoid of amplitude 2, shared
    by every channel, on top of that noise.
    """
    if n_per_class < 0 or n_channels < 1 or n_samples < 1 or sample_rate_hz <= 0:
        raise ValueError("sizes must be positive")
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate_hz
    out = []
    for label in (0, 1):
        for _ in range(n_per_class):
            data = rng.standard_normal((n_channels, n_samples))
            if label:
                freq = rng.uniform(4.0, 8.0)
                phase = rng.uniform(0.0, 2 * np.pi)
                data += 2.0 * np.sin(2 * np.pi * freq * t + phase)
            out.append((SpatiotemporalSignal(data, sample_rate_hz), label))
    return out


def auc(scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic; ties count half."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores but {labels.size} labels")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    ranks = np.empty(s.size)
    # average 1-based ranks over runs of tied scores
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], s.size]
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def stratified_split(labels, seed: int = 0):
    """Half of each class to train, the rest to test; returns sorted index arrays."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        half = (idx.size + 1) // 2
        train.append(idx[:half])
        test.append(idx[half:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def select_by_variance(X_train, top_q: int) -> np.ndarray:
    """Column indices of the ``top_q`` highest-variance training features.

    A stand-in for feature selection; ties keep the earlier column.
    """
    var = np.asarray(X_train, dtype=np.float64).var(axis=0)
    keep = np.argsort(-var, kind="stable")[:top_q]
    return np.sort(keep)


@dataclass(frozen=True)
class DataParams:
    n_per_class: int = 100
    n_channels: int = 8
    n_samples: int = 400
    sample_rate_hz: float = 400.0


@dataclass(frozen=True)
class ExperimentReport:
    seed: int
    config_hash: str
    auc: float
    n_features: int
    n_train: int
    n_test: int
    n_failed: int
    shuffled_labels: bool
    timings: dict = field(default_factory=dict, compare=False)

    def to_csv(self, include_timings: bool = False) -> str:
        buf = io.StringIO()
        cols = ["seed", "config_hash", "auc", "n_features", "n_train", "n_test",
                "n_failed", "shuffled_labels"]
        row = [self.seed, self.config_hash, repr(self.auc), self.n_features, self.n_train,
               self.n_test, self.n_failed, int(self.shuffled_labels)]
        if include_timings:
            for stage, secs in self.timings.items():
                cols.append(f"time_{stage}_s")
                row.append(f"{secs:.6f}")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        writer.writerow(row)
        return buf.getvalue()


def config_hash(cfg: PipelineConfig, forest: ForestConfig, data: DataParams, extra: str = "") -> str:
    text = format_config(cfg) + repr(forest) + repr(data) + extra
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def run_experiment(cfg: PipelineConfig = PipelineConfig(), forest: ForestConfig = ForestConfig(),
                   data: DataParams = DataParams(), seed: int = 0, shuffle_labels: bool = False,
                   top_q: int | None = None, jobs: int = 1) -> ExperimentReport:
    """Generate, extract, split half/half per class, train, score the test half.

    ``shuffle_labels`` permutes all labels before the split, so AUC follows
    the null distribution.
    ``top_q`` keeps the highest-variance training features.
    """
    timings = {}
    t0 = time.perf_counter()
    dataset = generate_synthetic(data.n_per_class, data.n_channels, data.n_samples,
                                 data.sample_rate_hz, seed)
    timings["generate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    batch = extract_batch([s for s, _ in dataset], cfg, jobs=jobs)
    labels = np.array([dataset[i][1] for i in batch.indices])
    timings["extract"] = time.perf_counter() - t0

    if shuffle_labels:
        labels = np.random.default_rng([seed, 1]).permutation(labels)
    train, test = stratified_split(labels, seed)
    X_train, X_test = batch.features[train], batch.features[test]
    y_train = labels[train]
    if top_q is not None:
        keep = select_by_variance(X_train, top_q)
        X_train, X_test = X_train[:, keep], X_test[:, keep]

    t0 = time.perf_counter()
    model = train_forest(X_train, y_train, ForestConfig(**{**forest.__dict__, "seed": seed}), jobs=jobs)
    timings["train"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    scores = model.predict_scores(X_test)
    timings["predict"] = time.perf_counter() - t0

    return ExperimentReport(
        seed=seed,
        config_hash=config_hash(cfg, forest, data, f"shuffle={shuffle_labels};top_q={top_q}"),
        auc=auc(scores, labels[test]),
        n_features=X_train.shape[1],
        n_train=int(train.size),
        n_test=int(test.size),
        n_failed=len(batch.errors),
        shuffled_labels=shuffle_labels,
        timings=timings,
    )
