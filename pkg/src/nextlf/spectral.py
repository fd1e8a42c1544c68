"""Frequency-domain conversion, band-pass conditioning, tangential data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import signal

from .correlate import IrfEstimate
from .dataset import TimeSeriesSet

__all__ = [
    "FrfSamples",
    "InterpolationData",
    "irf_to_frf",
    "bandpass",
    "bandpass_design",
    "build_interpolation_data",
]


@dataclass(frozen=True)
class FrfSamples:
    """Vector FRF sampled on the imaginary axis.

    `freqs` are angular frequencies [rad/s]; column ``b`` of `H` is the
    p-vector ``H(i * freqs[b])``.
    """

    freqs: np.ndarray
    H: np.ndarray
    channels: tuple[str, ...] = ()

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float, copy=True)
        H = np.array(self.H, dtype=complex, copy=True)
        if H.ndim == 1:
            H = H[None, :]
        if freqs.ndim != 1 or H.shape[1] != freqs.size:
            raise ValueError("H must have one column per frequency")
        if freqs.size < 4:
            raise ValueError("at least 4 frequency samples are required")
        if np.any(freqs < 0) or np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be non-negative and strictly increasing")
        freqs.setflags(write=False)
        H.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def p(self) -> int:
        return self.H.shape[0]

    @property
    def hz(self) -> np.ndarray:
        return self.freqs / (2 * np.pi)


@dataclass(frozen=True)
class InterpolationData:
    """Right data ``(lam, R, W)`` and left data ``(mu, L, V)``.

    Shapes: ``lam (rho,)``, ``R (m, rho)``, ``W (p, rho)``, ``mu (v,)``,
    ``L (v, p)``, ``V (v, m)``. The data must be closed under
    conjugation. A real realization additionally needs the layout produced
    by :func:`build_interpolation_data`: adjacent conjugate pairs,
    ``lam[2i + 1] == conj(lam[2i])``, on both sides.
    """

    lam: np.ndarray
    R: np.ndarray
    W: np.ndarray
    mu: np.ndarray
    L: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("lam", "R", "W", "mu", "L", "V"):
            a = np.array(getattr(self, name), dtype=complex, copy=True)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        lam, R, W, mu, L, V = (arrays[k] for k in ("lam", "R", "W", "mu", "L", "V"))
        rho, v = lam.size, mu.size
        if R.shape[1] != rho or W.shape[1] != rho:
            raise ValueError("R and W need one column per right point")
        if L.shape[0] != v or V.shape[0] != v:
            raise ValueError("L and V need one row per left point")
        if L.shape[1] != W.shape[0] or V.shape[1] != R.shape[0]:
            raise ValueError("inconsistent input/output dimensions")
        if np.intersect1d(lam, mu).size:
            raise ValueError("right and left interpolation points must be distinct")
        if not (_is_closed(lam, R.T, W.T) and _is_closed(mu, L, V)):
            raise ValueError("interpolation data must be closed under conjugation")

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @property
    def paired(self) -> bool:
        return is_paired(self.lam, self.R.T, self.W.T) and is_paired(self.mu, self.L, self.V)


def _is_closed(points, dirs, data) -> bool:
    # Every triple must have its conjugate triple somewhere in the set.
    if is_paired(points, dirs, data):
        return True
    remaining = list(range(points.size))
    while remaining:
        i = remaining.pop(0)
        target = (np.conj(points[i]), np.conj(dirs[i]), np.conj(data[i]))
        if points[i].imag == 0 and np.array_equal(dirs[i], target[1]) and np.array_equal(data[i], target[2]):
            continue
        for j in remaining:
            if (
                points[j] == target[0]
                and np.array_equal(dirs[j], target[1])
                and np.array_equal(data[j], target[2])
            ):
                remaining.remove(j)
                break
        else:
            return False
    return True


def is_paired(points, dirs, data) -> bool:
    """True when entries come in adjacent conjugate pairs ``(2i, 2i + 1)``."""
    if points.size % 2:
        return False
    return (
        np.array_equal(points[1::2], np.conj(points[0::2]))
        and np.array_equal(dirs[1::2], np.conj(dirs[0::2]))
        and np.array_equal(data[1::2], np.conj(data[0::2]))
    )


def irf_to_frf(irf: IrfEstimate) -> FrfSamples:
    """Rectangle-rule Laplace transform of the IRF on the DFT grid.

    ``H(i w_b) = dt * sum_k h[k] exp(-i w_b k dt)`` for
    ``w_b = 2 pi b fs / n_lags``, ``b = 0 .. n_lags // 2``.
    """
    if irf.n_lags < 4:
        raise ValueError("at least 4 lags are required")
    dt = 1.0 / irf.fs
    H = dt * np.fft.rfft(irf.h, axis=1)
    freqs = 2 * np.pi * np.fft.rfftfreq(irf.n_lags, dt)
    return FrfSamples(freqs, H, tuple(c.name for c in irf.channels))


def bandpass_design(f_lo: float, f_hi: float, fs: float):
    """Second-order sections of the Butterworth band-pass used by :func:`bandpass`.

    The filter runs forward and backward, so each pass gets half of the
    overall budget: at most 1 % ripple over ``[1.25 f_lo, 0.8 f_hi]`` and
    at least 40 dB attenuation at ``f_lo / 2`` and
    ``min(2 f_hi, 0.95 fs / 2)``. The order is the smallest meeting that
    budget.
    """
    nyq = fs / 2
    if not 0 < f_lo < f_hi < nyq:
        raise ValueError(f"invalid band [{f_lo}, {f_hi}] Hz for fs = {fs} Hz")
    wp = [1.25 * f_lo, 0.8 * f_hi]
    ws = [0.5 * f_lo, min(2 * f_hi, 0.95 * nyq)]
    if wp[0] >= wp[1] or ws[1] <= wp[1]:
        raise ValueError(f"band [{f_lo}, {f_hi}] Hz is too narrow to filter")
    gpass = -10 * np.log10(0.99)  # 20*log10(0.99) split over two passes
    gstop = 20.0
    order, wn = signal.buttord(wp, ws, gpass, gstop, fs=fs)
    return signal.butter(order, wn, btype="bandpass", output="sos", fs=fs)


def bandpass(ts: TimeSeriesSet, f_lo: float, f_hi: float) -> TimeSeriesSet:
    """Zero-phase Butterworth band-pass of every channel."""
    sos = bandpass_design(f_lo, f_hi, ts.fs)
    return ts.with_samples(signal.sosfiltfilt(sos, ts.samples, axis=1))


def build_interpolation_data(
    frf: FrfSamples,
    band: Optional[Sequence[float]] = None,
    direction_seed: int = 0,
) -> InterpolationData:
    """Split FRF bins into right/left tangential interpolation data.

    In-band bins (``band`` in Hz, inclusive; the DC bin is always dropped)
    alternate between the right set (even positions) and the left set (odd
    positions). Right directions are the scalar 1, so right data are the
    FRF columns themselves; each left point gets a random unit row vector
    in ``R^p`` from a generator seeded with `direction_seed`. Every point is
    followed by its complex conjugate.
    """
    hz = frf.hz
    mask = hz > 0
    if band is not None:
        lo, hi = band
        if not lo < hi:
            raise ValueError(f"invalid band {band}")
        mask &= (hz >= lo) & (hz <= hi)
    bins = np.flatnonzero(mask)
    if bins.size < 4:
        raise ValueError(f"only {bins.size} frequency bins in band; at least 4 needed")
    right, left = bins[0::2], bins[1::2]
    p = frf.p

    s_r = 1j * frf.freqs[right]
    H_r = frf.H[:, right]
    lam = _interleave(s_r, np.conj(s_r))
    W = _interleave(H_r, np.conj(H_r), axis=1)
    R = np.ones((1, lam.size), dtype=complex)

    rng = np.random.default_rng(direction_seed)
    dirs = rng.standard_normal((left.size, p))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    s_l = 1j * frf.freqs[left]
    v = np.einsum("jp,pj->j", dirs, frf.H[:, left])
    mu = _interleave(s_l, np.conj(s_l))
    L = _interleave(dirs, dirs, axis=0)
    V = _interleave(v, np.conj(v))[:, None]
    return InterpolationData(lam, R, W, mu, L, V)


def _interleave(a, b, axis=0):
    a = np.asarray(a)
    b = np.asarray(b)
    out = np.empty(
        a.shape[:axis] + (2 * a.shape[axis],) + a.shape[axis + 1 :],
        dtype=np.result_type(a, b),
    )
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(0, None, 2)
    out[tuple(idx)] = a
    idx[axis] = slice(1, None, 2)
    out[tuple(idx)] = b
    return out
