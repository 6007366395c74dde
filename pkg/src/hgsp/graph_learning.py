"""Spatiotemporal edge-weight learning.

Weights are absolute products of centred samples. Spatial blocks ``A_k``
couple channels at one instant; temporal blocks ``B_{k,l}`` couple channel
``i`` at time ``k-l`` with channel ``j`` at time ``k``. Both are held in a
4-D tensor indexed ``[i, j, k, l]`` with ``l = 0`` for the spatial blocks.
All indices here are zero-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, SizeError
from .signal_core import SpatiotemporalSignal

DEFAULT_MAX_TENSOR_ENTRIES = 50_000_000
DEFAULT_MAX_DENSE_VERTICES = 5000
_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class VertexIndexMap:
    """Bijection between flat vertex ``u`` and (channel i, time k).

    Vertices are laid out time-major, ``u = k * S + i``, so each time slot
    forms one contiguous S x S block of the adjacency matrix.
    """

    n_channels: int
    n_samples: int

    @property
    def n_vertices(self) -> int:
        return self.n_channels * self.n_samples

    def flat(self, i, k):
        i = np.asarray(i)
        k = np.asarray(k)
        if np.any((i < 0) | (i >= self.n_channels) | (k < 0) | (k >= self.n_samples)):
            raise IndexError("channel/time index out of range")
        return k * self.n_channels + i

    def pair(self, u):
        u = np.asarray(u)
        if np.any((u < 0) | (u >= self.n_vertices)):
            raise IndexError("vertex index out of range")
        return u % self.n_channels, u // self.n_channels

    def flatten_signal(self, data: np.ndarray) -> np.ndarray:
        """S x T matrix -> length ST graph signal in vertex order."""
        return np.asarray(data).T.reshape(-1)


@dataclass(frozen=True, eq=False)
class WeightTensor:
    """Non-zero blocks of the spatiotemporal adjacency, shape (S, S, T, L+1).

    Entries with ``l >= 1`` and ``k < l`` have no earlier time slot and are
    stored as zero.
    """

    values: np.ndarray

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[2]

    @property
    def max_lag(self) -> int:
        return self.values.shape[3] - 1

    @property
    def index_map(self) -> VertexIndexMap:
        return VertexIndexMap(self.n_channels, self.n_samples)

    def spatial_block(self, k: int) -> np.ndarray:
        return self.values[:, :, k, 0]

    def temporal_block(self, k: int, lag: int) -> np.ndarray:
        if not 1 <= lag <= self.max_lag or k < lag:
            raise IndexError(f"no temporal block for k={k}, lag={lag}")
        return self.values[:, :, k, lag]

    def n_entries(self) -> int:
        """Number of structurally present entries (zero-padded ones excluded)."""
        S, T, L = self.n_channels, self.n_samples, self.max_lag
        return S * S * sum(T - l for l in range(L + 1))


@dataclass(frozen=True, eq=False)
class SpatialGraph:
    """S x S spatial graph.

    ``source_weights`` keeps the pre-threshold weighted matrix when the graph
    came out of :func:`threshold_graph`.
    """

    weights: np.ndarray
    binary: bool = False
    source_weights: np.ndarray | None = None
    kappa: float | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        object.__setattr__(self, "weights", w)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]


def center_spatial(x: SpatiotemporalSignal) -> np.ndarray:
    """Subtract from each time sample its mean across channels."""
    return x.data - x.data.mean(axis=0, keepdims=True)


def center_temporal(x: SpatiotemporalSignal) -> np.ndarray:
    """Subtract from each channel its mean over time."""
    return x.data - x.data.mean(axis=1, keepdims=True)


def learn_weights(x: SpatiotemporalSignal, max_lag: int,
                  max_entries: int = DEFAULT_MAX_TENSOR_ENTRIES) -> WeightTensor:
    """Learn the weight tensor of ``x`` with temporal edges up to ``max_lag`` hops.

    Cost is O(L S^2 T) time and memory.
    """
    S, T = x.data.shape
    if max_lag < 0 or max_lag >= T:
        raise ValueError(f"lag L must satisfy 0 <= L < T={T}, got {max_lag}")
    size = S * S * T * (max_lag + 1)
    if size > max_entries:
        raise SizeError(
            f"weight tensor needs {size} entries (S={S}, T={T}, L={max_lag}), cap is {max_entries}")
    xs = center_spatial(x)
    xt = center_temporal(x)
    tau = np.zeros((S, S, T, max_lag + 1))
    tau[:, :, :, 0] = np.abs(xs[:, None, :] * xs[None, :, :])
    for lag in range(1, max_lag + 1):
        tau[:, :, lag:, lag] = np.abs(xt[:, None, :T - lag] * xt[None, :, lag:])
    tau.setflags(write=False)
    return WeightTensor(tau)


def estimate_dense_bytes(n_channels: int, n_samples: int, bytes_per_entry: int = 8) -> int:
    """Bytes needed to hold the full ST x ST adjacency matrix densely."""
    if n_channels < 1 or n_samples < 1 or bytes_per_entry < 1:
        raise ValueError("arguments must be positive")
    total = (n_channels * n_samples) ** 2 * bytes_per_entry
    if total > _INT64_MAX:
        raise OverflowError(f"dense size {total} bytes exceeds int64 range")
    return total


def dense_adjacency(tau: WeightTensor, max_vertices: int = DEFAULT_MAX_DENSE_VERTICES) -> np.ndarray:
    """Assemble the symmetric ST x ST block adjacency matrix.

    Diagonal block k holds ``A_k``; the block at (row k, column k-l) holds
    ``B_{k,l}`` and its mirror holds the transpose.
    """
    S, T, L = tau.n_channels, tau.n_samples, tau.max_lag
    N = S * T
    if N > max_vertices:
        raise SizeError(
            f"dense adjacency would have {N} vertices (cap {max_vertices}) and need "
            f"{estimate_dense_bytes(S, T)} bytes; downsample first")
    # (k, i, k', j) view of the flat matrix
    W = np.zeros((T, S, T, S))
    k = np.arange(T)
    W[k, :, k, :] = tau.values[:, :, :, 0].transpose(2, 0, 1)
    for lag in range(1, L + 1):
        kk = np.arange(lag, T)
        blocks = tau.values[:, :, lag:, lag].transpose(2, 0, 1)
        W[kk, :, kk - lag, :] = blocks
        W[kk - lag, :, kk, :] = blocks.transpose(0, 2, 1)
    return W.reshape(N, N)


def collapse_autocovariance(tau: WeightTensor) -> np.ndarray:
    """Average each lag slice over time, giving R with shape (S, S, L+1).

    Every lag is divided by T, including lags with only T - l valid terms.
    """
    return tau.values.sum(axis=2) / tau.n_samples


def median_kappa(R: np.ndarray) -> float:
    return float(np.median(_mean_over_lags(R)))


def _mean_over_lags(R):
    R = np.asarray(R, dtype=np.float64)
    if R.ndim == 2:
        R = R[:, :, None]
    m = R.mean(axis=2)
    # lagged slices are not symmetric in (i, j); the spatial graph is undirected
    return 0.5 * (m + m.T)


def threshold_graph(R: np.ndarray, kappa: float | None = None) -> SpatialGraph:
    """Binary spatial graph: edge (i, j) iff the lag-averaged R exceeds ``kappa``.

    ``kappa=None`` uses the median of the S^2 lag-averaged values. The
    diagonal is thresholded like any other entry, so self loops can appear.
    """
    mean_r = _mean_over_lags(R)
    if kappa is None:
        kappa = float(np.median(mean_r))
    elif kappa < 0:
        raise ValueError(f"kappa must be non-negative, got {kappa}")
    binary = (mean_r > kappa).astype(np.float64)
    return SpatialGraph(binary, binary=True, source_weights=mean_r, kappa=float(kappa))


def write_tensor(tau: WeightTensor, path) -> None:
    """Coordinate-list text dump: header ``# S T L`` then ``i,j,k,l,value`` lines."""
    S, T, L = tau.n_channels, tau.n_samples, tau.max_lag
    with Path(path).open("w") as fh:
        fh.write(f"# {S} {T} {L}\n")
        for l in range(L + 1):
            for k in range(l, T):
                for i in range(S):
                    for j in range(S):
                        fh.write(f"{i},{j},{k},{l},{float(tau.values[i, j, k, l])!r}\n")


def read_tensor(path) -> WeightTensor:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise FormatError(f"{path}: missing '# S T L' header")
    try:
        S, T, L = (int(v) for v in lines[0][1:].split())
    except ValueError:
        raise FormatError(f"{path}: bad header {lines[0]!r}") from None
    values = np.zeros((S, S, T, L + 1))
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            i, j, k, l, v = line.split(",")
            values[int(i), int(j), int(k), int(l)] = float(v)
        except (ValueError, IndexError):
            raise FormatError(f"{path}:{lineno}: bad entry {line!r}") from None
    values.setflags(write=False)
    return WeightTensor(values)
