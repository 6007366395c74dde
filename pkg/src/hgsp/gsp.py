"""Spectral features of a graph signal on the combinatorial Laplacian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    """Ascending eigenvalues and matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class GspEmbedding:
    band_energies: tuple[float, ...]
    lambda_min: float
    lambda_max: float
    lambda_mean: float
    wavelet_coeffs: tuple[float, ...]
    quadratic_form: float


def _check_weights(W):
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionError(f"adjacency must be square, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise ValueError("adjacency contains NaN or Inf")
    if np.any(W < 0):
        raise ValueError("adjacency must be non-negative")
    if not np.allclose(W, W.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(W).max(initial=0.0)))):
        raise ValueError("adjacency must be symmetric")
    return W


def laplacian(W) -> np.ndarray:
    """``D - W`` with ``D`` the diagonal of row sums."""
    W = _check_weights(W)
    return np.diag(W.sum(axis=1)) - W


def spectrum(lap) -> LaplacianSpectrum:
    """Symmetric eigendecomposition with a fixed sign per eigenvector.

    Each eigenvector is flipped so its first clearly non-zero component is
    positive.
    """
    lap = np.asarray(lap, dtype=np.float64)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise DimensionError(f"Laplacian must be square, got shape {lap.shape}")
    try:
        vals, vecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigendecomposition of {lap.shape[0]}x{lap.shape[0]} Laplacian failed: {exc}") from exc
    if vecs.size:
        tol = 1e-10 * np.abs(vecs).max(axis=0)
        first = np.argmax(np.abs(vecs) > tol, axis=0)
        signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
        signs[signs == 0] = 1.0
        vecs = vecs * signs
    return LaplacianSpectrum(vals, vecs)


def _check_signal(spec, x):
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != spec.size:
        raise DimensionError(f"signal length {x.shape[0]} does not match graph size {spec.size}")
    return x


def gft(spec: LaplacianSpectrum, x) -> np.ndarray:
    """Graph Fourier coefficients ``<x, u_n>`` in ascending-eigenvalue order."""
    return spec.eigenvectors.T @ _check_signal(spec, x)


def inverse_gft(spec: LaplacianSpectrum, x_hat) -> np.ndarray:
    return spec.eigenvectors @ _check_signal(spec, x_hat)


def default_graph_bands(spec: LaplacianSpectrum, n_bands: int = 4) -> np.ndarray:
    """Equal-width bands over [0, lambda_max] for this spectrum.

    The lower edge drops below zero when round-off pushes the smallest
    eigenvalue negative, and the top edge sits just above lambda_max, so every
    eigenvalue lands in a band.
    """
    if n_bands < 1:
        raise ValueError(f"need at least one band, got {n_bands}")
    lam = spec.eigenvalues
    top = float(lam.max()) * (1 + 1e-9) if lam.size and lam.max() > 0 else 1.0
    edges = np.linspace(0.0, top, n_bands + 1)
    if lam.size:
        edges[0] = min(0.0, float(lam.min()))
    return edges


def band_energies(spec: LaplacianSpectrum, x, boundaries) -> np.ndarray:
    """Energy of the GFT in each band ``[b_{m-1}, b_m)``."""
    b = np.asarray(boundaries, dtype=np.float64)
    if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0):
        raise ValueError(f"band boundaries must be strictly ascending, got {b}")
    power = gft(spec, x) ** 2
    band = np.searchsorted(b, spec.eigenvalues, side="right") - 1
    inside = (band >= 0) & (band < b.size - 1)
    return np.bincount(band[inside], weights=power[inside], minlength=b.size - 1)


def eigen_summary(spec: LaplacianSpectrum) -> tuple[float, float, float]:
    lam = spec.eigenvalues
    return float(lam.min()), float(lam.max()), float(lam.mean())


def wavelet_kernel(s):
    """Band-pass kernel ``s * exp(1 - s)``: zero at 0, peak 1 at s = 1."""
    s = np.asarray(s, dtype=np.float64)
    return s * np.exp(1.0 - s)


def default_scales(spec: LaplacianSpectrum, n_scales: int = 4) -> np.ndarray:
    """Log-spaced scales with ``t * lambda_max`` running from 1 to 40."""
    lam_max = float(spec.eigenvalues.max()) if spec.size else 0.0
    if lam_max <= 0:
        lam_max = 1.0
    return np.geomspace(1.0, 40.0, n_scales) / lam_max


def sgwt_features(spec: LaplacianSpectrum, x, scales, z: int = 3) -> np.ndarray:
    """Spectral wavelet coefficients at the extreme graph frequencies.

    For every scale t the coefficients ``g(t * lambda_n) * x_hat_n`` are taken at
    the z smallest eigenvalues (ascending) followed by the z largest
    (descending), giving ``2 * len(scales) * z`` values, scale-major.
    """
    scales = np.asarray(scales, dtype=np.float64).reshape(-1)
    if scales.size < 1:
        raise ValueError("need at least one scale")
    if z < 1 or z > spec.size:
        raise ValueError(f"z must lie in [1, {spec.size}], got {z}")
    x_hat = gft(spec, x)
    picks = np.concatenate([np.arange(z), np.arange(spec.size - 1, spec.size - 1 - z, -1)])
    lam = spec.eigenvalues[picks]
    return (wavelet_kernel(scales[:, None] * lam[None, :]) * x_hat[picks][None, :]).reshape(-1)


def quadratic_form(lap, x) -> float:
    lap = np.asarray(lap, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if lap.ndim != 2 or lap.shape != (x.size, x.size):
        raise DimensionError(f"signal length {x.size} does not match Laplacian shape {lap.shape}")
    return float(x @ lap @ x)


def gsp_embedding(W, x, n_bands: int = 4, n_scales: int = 4, z: int = 3) -> GspEmbedding:
    """All spectral features of signal ``x`` on adjacency ``W`` with default bands and scales."""
    lap = laplacian(W)
    spec = spectrum(lap)
    x = _check_signal(spec, x)
    lam_min, lam_max, lam_mean = eigen_summary(spec)
    return GspEmbedding(
        band_energies=tuple(band_energies(spec, x, default_graph_bands(spec, n_bands)).tolist()),
        lambda_min=lam_min,
        lambda_max=lam_max,
        lambda_mean=lam_mean,
        wavelet_coeffs=tuple(sgwt_features(spec, x, default_scales(spec, n_scales), z).tolist()),
        quadratic_form=quadratic_form(lap, x),
    )
