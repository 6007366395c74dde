"""Spatiotemporal signal container, file readers, ideal filter bank,
time-window partitioning and decimation."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError

# Conventional EEG bands with Beta split, plus a high band up to 5 kHz.
DEFAULT_BANDS_HZ = (0.0, 7.0, 10.0, 12.0, 18.0, 24.0, 30.0, 100.0, 5000.0)


@dataclass(frozen=True, eq=False)
class SpatiotemporalSignal:
    """S x T real matrix; rows are channels, columns are time samples."""

    data: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"signal must be 2-D (channels x samples), got shape {data.shape}")
        if data.shape[0] < 2:
            raise ValueError(f"need at least 2 channels, got {data.shape[0]}")
        if data.shape[1] < 2:
            raise ValueError(f"need at least 2 samples, got {data.shape[1]}")
        if not np.all(np.isfinite(data)):
            raise ValueError("signal contains NaN or Inf")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    def with_data(self, data, sample_rate_hz=None) -> "SpatiotemporalSignal":
        return SpatiotemporalSignal(data, self.sample_rate_hz if sample_rate_hz is None else sample_rate_hz)


def load_signal(path, format: str = "csv", sample_rate_hz: float = 400.0,
                n_channels: int | None = None) -> SpatiotemporalSignal:
    """Read a signal file.

    CSV files hold one channel per row. ``raw_f64`` files hold little-endian
    float64 values, channel-major, and need ``n_channels``.
    """
    path = Path(path)
    if format == "csv":
        rows = []
        with path.open(newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    rows.append([float(cell) for cell in row])
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: non-numeric value") from None
        if not rows:
            raise FormatError(f"{path}: empty file")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise FormatError(f"{path}: ragged rows (lengths {sorted(widths)})")
        data = np.array(rows, dtype=np.float64)
    elif format == "raw_f64":
        if not n_channels or n_channels < 1:
            raise ValueError("raw_f64 needs a positive n_channels")
        raw = path.read_bytes()
        if len(raw) % (8 * n_channels):
            raise FormatError(
                f"{path}: {len(raw)} bytes is not divisible into {n_channels} float64 channels")
        data = np.frombuffer(raw, dtype="<f8").reshape(n_channels, -1)
    else:
        raise ValueError(f"unknown format {format!r}")
    return SpatiotemporalSignal(data, sample_rate_hz)


def save_signal(x: SpatiotemporalSignal, path, format: str = "csv") -> None:
    path = Path(path)
    if format == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            for row in x.data:
                writer.writerow([repr(float(v)) for v in row])
    elif format == "raw_f64":
        path.write_bytes(np.ascontiguousarray(x.data, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown format {format!r}")


def _band_mask(n_samples, sample_rate_hz, lo, hi):
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / sample_rate_hz)
    nyquist = sample_rate_hz / 2.0
    mask = (freqs >= lo) & (freqs < hi)
    # the exact-Nyquist bin (even T) goes to the band that reaches Nyquist
    if n_samples % 2 == 0 and hi >= nyquist and lo <= nyquist:
        mask[-1] = True
    return mask


def bandpass(x: SpatiotemporalSignal, band_lo_hz: float, band_hi_hz: float) -> SpatiotemporalSignal:
    """Ideal band-pass: keep DFT bins with ``band_lo_hz <= f < band_hi_hz``.

    Operating on the one-sided spectrum keeps conjugate symmetry, so the
    output is exactly real.
    """
    if band_lo_hz < 0 or band_hi_hz < 0:
        raise ValueError(f"band edges must be non-negative, got [{band_lo_hz}, {band_hi_hz})")
    if band_lo_hz >= band_hi_hz:
        raise ValueError(f"band_lo_hz ({band_lo_hz}) must be below band_hi_hz ({band_hi_hz})")
    spectrum = np.fft.rfft(x.data, axis=1)
    spectrum[:, ~_band_mask(x.n_samples, x.sample_rate_hz, band_lo_hz, band_hi_hz)] = 0.0
    return x.with_data(np.fft.irfft(spectrum, n=x.n_samples, axis=1))


def clamp_bands(edges_hz: Sequence[float], sample_rate_hz: float) -> tuple[float, ...]:
    """Validate band edges and clamp those above Nyquist, warning once."""
    edges = [float(e) for e in edges_hz]
    if len(edges) < 2:
        raise ValueError("need at least two band edges")
    if edges[0] < 0:
        raise ValueError(f"band edges must be non-negative, got {edges[0]}")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError(f"band edges must be strictly ascending: {edges}")
    nyquist = sample_rate_hz / 2.0
    if edges[-1] > nyquist:
        warnings.warn(f"band edges above Nyquist ({nyquist:g} Hz) clamped", stacklevel=2)
        edges = [min(e, nyquist) for e in edges]
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError(
                f"clamping at Nyquist ({nyquist:g} Hz) collapses bands; edges {list(edges_hz)}")
    return tuple(edges)


def filter_bank(x: SpatiotemporalSignal, bands_hz: Sequence[float] = DEFAULT_BANDS_HZ) -> list[SpatiotemporalSignal]:
    """Split ``x`` into C band-limited copies, one per consecutive edge pair."""
    edges = clamp_bands(bands_hz, x.sample_rate_hz)
    spectrum = np.fft.rfft(x.data, axis=1)
    out = []
    for lo, hi in zip(edges, edges[1:]):
        mask = _band_mask(x.n_samples, x.sample_rate_hz, lo, hi)
        band = np.where(mask, spectrum, 0.0)
        out.append(x.with_data(np.fft.irfft(band, n=x.n_samples, axis=1)))
    return out


def partition(x: SpatiotemporalSignal, n_windows: int, stride: int | None = None) -> list[SpatiotemporalSignal]:
    """Cut ``x`` into ``n_windows`` windows of width T/K, window k starting at k*stride.

    ``stride`` defaults to the window width (non-overlapping).
    """
    T = x.n_samples
    if n_windows < 1:
        raise ValueError(f"n_windows must be positive, got {n_windows}")
    if T % n_windows:
        raise ValueError(f"T={T} is not divisible by K={n_windows}")
    width = T // n_windows
    if stride is None:
        stride = width
    if stride < 1:
        raise ValueError(f"stride must be positive, got {stride}")
    if (n_windows - 1) * stride + width > T:
        raise ValueError(f"{n_windows} windows of width {width} with stride {stride} exceed T={T}")
    return [x.with_data(x.data[:, k * stride:k * stride + width]) for k in range(n_windows)]


def downsample(x: SpatiotemporalSignal, n_out: int) -> SpatiotemporalSignal:
    """Plain decimation to ``n_out`` columns.

    Keeps columns 0, s, 2s, ... with s = floor(T1 / n_out), truncated to the
    first ``n_out`` of them.
    """
    T1 = x.n_samples
    if n_out < 2 or n_out > T1:
        raise ValueError(f"n_out must lie in [2, {T1}], got {n_out}")
    step = T1 // n_out
    idx = np.arange(n_out) * step
    return x.with_data(x.data[:, idx], x.sample_rate_hz * n_out / T1)
