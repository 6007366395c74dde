"""Three-level hierarchical feature extraction.

Level 0 takes topology of the raw signal and splits it through the filter
bank. Level 1 takes topology of every band, whole and per time window, and
decimates each band. Level 2 takes topology and spectral features of every
decimated band on its full spatiotemporal graph.

Feature names follow ``L<level>.<raw|bC>.<full|wK>.<metric>``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import BatchError, ConfigError
from .graph_learning import (
    DEFAULT_MAX_DENSE_VERTICES,
    DEFAULT_MAX_TENSOR_ENTRIES,
    VertexIndexMap,
    collapse_autocovariance,
    dense_adjacency,
    learn_weights,
    threshold_graph,
)
from .gsp import gsp_embedding
from .signal_core import DEFAULT_BANDS_HZ, SpatiotemporalSignal, downsample, filter_bank, partition
from .topology import N_TOPOLOGY_FEATURES, TopologyEmbedding, topology_embedding

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    bands_hz: tuple[float, ...] = DEFAULT_BANDS_HZ
    n_windows: int = 4
    stride: int | None = None  # None: window width, i.e. no overlap
    n_coarse: int = 20
    lag0: int = 1
    lag1: int = 1
    lag2: int = 10
    kappa: float | None = None  # None: per-graph median
    n_graph_bands: int = 4
    n_scales: int = 4
    z: int = 3
    max_tensor_entries: int = DEFAULT_MAX_TENSOR_ENTRIES
    max_dense_vertices: int = DEFAULT_MAX_DENSE_VERTICES

    def __post_init__(self):
        object.__setattr__(self, "bands_hz", tuple(float(b) for b in self.bands_hz))
        if len(self.bands_hz) < 2:
            raise ConfigError("bands_hz", "need at least two edges")
        if self.bands_hz[0] < 0 or any(b <= a for a, b in zip(self.bands_hz, self.bands_hz[1:])):
            raise ConfigError("bands_hz", f"edges must be non-negative and strictly ascending: {self.bands_hz}")
        for name in ("n_windows", "n_coarse", "n_graph_bands", "n_scales", "z",
                     "max_tensor_entries", "max_dense_vertices"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)}")
        for name in ("lag0", "lag1", "lag2"):
            if getattr(self, name) < 0:
                raise ConfigError(name, f"must be non-negative, got {getattr(self, name)}")
        if self.stride is not None and self.stride < 1:
            raise ConfigError("stride", f"must be positive, got {self.stride}")
        if self.kappa is not None and self.kappa < 0:
            raise ConfigError("kappa", f"must be non-negative, got {self.kappa}")
        if self.n_coarse < 2:
            raise ConfigError("n_coarse", "must be at least 2")
        if self.lag2 >= self.n_coarse:
            raise ConfigError("lag2", f"must be below n_coarse={self.n_coarse}, got {self.lag2}")

    @property
    def n_bands(self) -> int:
        return len(self.bands_hz) - 1

    def check_signal(self, n_channels: int, n_samples: int) -> None:
        """Raise ConfigError naming the field that does not fit an S x T signal."""
        T = n_samples
        if T % self.n_windows:
            raise ConfigError("n_windows", f"K={self.n_windows} does not divide T={T}")
        width = T // self.n_windows
        if width < 2:
            raise ConfigError("n_windows", f"window width T/K={width} is below 2 samples")
        stride = width if self.stride is None else self.stride
        if (self.n_windows - 1) * stride + width > T:
            raise ConfigError("stride", f"{self.n_windows} windows with stride {stride} exceed T={T}")
        if self.n_coarse > T:
            raise ConfigError("n_coarse", f"T2={self.n_coarse} exceeds T={T}")
        if self.lag0 >= T:
            raise ConfigError("lag0", f"must be below T={T}")
        if self.lag1 >= width:
            raise ConfigError("lag1", f"must be below the window width {width}")
        if n_channels * self.n_coarse > self.max_dense_vertices:
            raise ConfigError("n_coarse", f"S*T2={n_channels * self.n_coarse} exceeds max_dense_vertices")


_LIST_FIELDS = {"bands_hz"}
_OPTIONAL_FIELDS = {"stride", "kappa"}


def _field_types():
    return {f.name: f.default for f in fields(PipelineConfig)}


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are errors.

    ``bands_hz`` takes a comma-separated list; ``stride`` and ``kappa`` accept
    ``auto`` for their adaptive defaults.
    """
    defaults = _field_types()
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            raise ConfigError(key, "unknown key")
        try:
            if key in _LIST_FIELDS:
                updates[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key in _OPTIONAL_FIELDS and value.lower() in ("auto", "none", ""):
                updates[key] = None
            elif key == "kappa":
                updates[key] = float(value)
            else:
                updates[key] = int(value)
        except ValueError:
            raise ConfigError(key, f"cannot parse {value!r}") from None
    return replace(base or PipelineConfig(), **updates)


def load_config(path) -> PipelineConfig:
    return parse_config(Path(path).read_text())


def format_config(cfg: PipelineConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in _LIST_FIELDS:
            text = ", ".join(repr(v) for v in value)
        elif value is None:
            text = "auto"
        else:
            text = repr(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.names),):
            raise ValueError(f"{len(self.names)} names but values of shape {values.shape}")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        object.__setattr__(self, "values", values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def _topology_names(prefix):
    return [f"{prefix}.{m}" for m in TopologyEmbedding.names()]


def _gsp_names(prefix, cfg):
    names = [f"{prefix}.E{m + 1}" for m in range(cfg.n_graph_bands)]
    names += [f"{prefix}.lambda_min", f"{prefix}.lambda_max", f"{prefix}.lambda_mean"]
    for t in range(cfg.n_scales):
        names += [f"{prefix}.sgwt.t{t + 1}.min{q + 1}" for q in range(cfg.z)]
        names += [f"{prefix}.sgwt.t{t + 1}.max{q + 1}" for q in range(cfg.z)]
    names.append(f"{prefix}.quadratic_form")
    return names


def feature_names(cfg: PipelineConfig) -> tuple[str, ...]:
    names = _topology_names("L0.raw.full")
    for c in range(1, cfg.n_bands + 1):
        names += _topology_names(f"L1.b{c}.full")
        for k in range(1, cfg.n_windows + 1):
            names += _topology_names(f"L1.b{c}.w{k}")
    for c in range(1, cfg.n_bands + 1):
        names += _topology_names(f"L2.b{c}.full")
        names += _gsp_names(f"L2.b{c}.full", cfg)
    return tuple(names)


def feature_count(cfg: PipelineConfig) -> int:
    """Closed-form length of the feature vector."""
    level01 = N_TOPOLOGY_FEATURES * (1 + cfg.n_bands * (cfg.n_windows + 1))
    level2 = cfg.n_bands * (N_TOPOLOGY_FEATURES + cfg.n_graph_bands + 3 + 2 * cfg.n_scales * cfg.z + 1)
    return level01 + level2


def _topology_path(x, lag, cfg):
    tau = learn_weights(x, lag, max_entries=cfg.max_tensor_entries)
    graph = threshold_graph(collapse_autocovariance(tau), cfg.kappa)
    return tau, topology_embedding(graph)


def extract_features(x: SpatiotemporalSignal, cfg: PipelineConfig = PipelineConfig()) -> FeatureVector:
    cfg.check_signal(x.n_channels, x.n_samples)
    values: list[float] = []

    _, topo = _topology_path(x, cfg.lag0, cfg)
    values += topo.values()

    bands = filter_bank(x, cfg.bands_hz)
    for band in bands:
        _, topo = _topology_path(band, cfg.lag1, cfg)
        values += topo.values()
        for window in partition(band, cfg.n_windows, cfg.stride):
            _, topo = _topology_path(window, cfg.lag1, cfg)
            values += topo.values()

    for band in bands:
        coarse = downsample(band, cfg.n_coarse)
        tau, topo = _topology_path(coarse, cfg.lag2, cfg)
        values += topo.values()
        W = dense_adjacency(tau, max_vertices=cfg.max_dense_vertices)
        signal = VertexIndexMap(coarse.n_channels, coarse.n_samples).flatten_signal(coarse.data)
        emb = gsp_embedding(W, signal, cfg.n_graph_bands, cfg.n_scales, cfg.z)
        values += emb.band_energies
        values += [emb.lambda_min, emb.lambda_max, emb.lambda_mean]
        values += emb.wavelet_coeffs
        values.append(emb.quadratic_form)

    fv = FeatureVector(feature_names(cfg), np.array(values))
    if not np.all(np.isfinite(fv.values)):
        bad = [n for n, v in zip(fv.names, fv.values) if not np.isfinite(v)]
        raise FloatingPointError(f"non-finite features: {bad[:5]}")
    return fv


@dataclass(frozen=True, eq=False)
class BatchResult:
    """Feature rows for the samples that succeeded, in input order."""

    names: tuple[str, ...]
    features: np.ndarray
    indices: tuple[int, ...]
    errors: dict[int, str]


def extract_batch(samples, cfg: PipelineConfig = PipelineConfig(), jobs: int = 1) -> BatchResult:
    """Run :func:`extract_features` on every sample.

    Failures are collected per sample index; BatchError is raised only when
    every sample fails.
    """
    samples = list(samples)
    names = feature_names(cfg)
    if samples:
        shapes = {(s.n_channels, s.n_samples, s.sample_rate_hz) for s in samples}
        if len(shapes) > 1:
            raise ValueError(f"batch mixes signal shapes/rates: {sorted(shapes)}")

    def run(i):
        try:
            return i, extract_features(samples[i], cfg), None
        except Exception as exc:  # noqa: BLE001 - reported per sample
            log.warning("sample %d failed: %s", i, exc)
            return i, None, f"{type(exc).__name__}: {exc}"

    if jobs > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(len(samples))))
    else:
        results = [run(i) for i in range(len(samples))]

    rows = [fv.values for _, fv, _ in results if fv is not None]
    indices = tuple(i for i, fv, _ in results if fv is not None)
    errors = {i: err for i, _, err in results if err is not None}
    if samples and not rows:
        raise BatchError(errors)
    features = np.vstack(rows) if rows else np.empty((0, len(names)))
    return BatchResult(names, features, indices, errors)
