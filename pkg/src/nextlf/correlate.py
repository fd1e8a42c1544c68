"""Natural Excitation Technique: impulse-response estimates from correlations.

Under broadband stationary excitation the cross-correlation between a
reference response and every other response decays like a free
vibration of the structure, with the same poles. The correlation rows
therefore stand in for impulse responses in input-output identification
methods.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .dataset import Channel, TimeSeriesSet

__all__ = ["IrfEstimate", "next_irf", "default_n_lags"]


@dataclass(frozen=True)
class IrfEstimate:
    """Correlation functions at non-negative lags, one row per channel."""

    fs: float
    h: np.ndarray
    ref_channel: int
    channels: tuple[Channel, ...]

    def __post_init__(self):
        h = np.array(self.h, dtype=float, copy=True)
        if h.ndim == 1:
            h = h[None, :]
        if h.shape[1] < 2:
            raise ValueError("an IRF needs at least 2 lags")
        if not self.fs > 0:
            raise ValueError("fs must be positive")
        if not 0 <= self.ref_channel < h.shape[0]:
            raise ValueError(f"reference channel {self.ref_channel} out of range")
        if len(self.channels) != h.shape[0]:
            raise ValueError("one channel label per IRF row is required")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def n_lags(self) -> int:
        return self.h.shape[1]

    @property
    def n_channels(self) -> int:
        return self.h.shape[0]

    @property
    def lags(self) -> np.ndarray:
        """Lag times [s]."""
        return np.arange(self.n_lags) / self.fs


def default_n_lags(n_samples: int) -> int:
    return int(min(2048, n_samples // 4))


def _direct(x: np.ndarray, ref: np.ndarray, n_lags: int) -> np.ndarray:
    # Zero-padded FFT gives the exact linear sums sum_t ref[t] * x[t + k].
    n = x.shape[1]
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    R = np.fft.rfft(ref, nfft)
    X = np.fft.rfft(x, nfft, axis=1)
    sums = np.fft.irfft(np.conj(R)[None, :] * X, nfft, axis=1)[:, :n_lags]
    return sums / (n - np.arange(n_lags))


def _welch(x: np.ndarray, ref: np.ndarray, n_lags: int) -> np.ndarray:
    nperseg = 2 * n_lags
    nfft = 2 * nperseg
    window = signal.get_window("hann", nperseg)
    _, P = signal.csd(
        ref, x, window=window, nperseg=nperseg, noverlap=nperseg // 2, nfft=nfft,
        detrend=False, return_onesided=False, scaling="spectrum", axis=-1,
    )
    # 'spectrum' scaling divides by sum(w)**2; undo it, then divide each
    # lag by the window's own correlation to remove the taper bias.
    corr = np.fft.ifft(P, axis=-1).real[:, :n_lags] * window.sum() ** 2
    w_corr = np.array([window[: nperseg - k] @ window[k:] for k in range(n_lags)])
    return corr / w_corr


def next_irf(
    ts: TimeSeriesSet,
    ref_channel: int = 0,
    n_lags: Optional[int] = None,
    estimator: str = "direct",
    normalization: str = "unbiased",
) -> IrfEstimate:
    """Cross-correlate every channel against a reference channel.

    Row ``c`` of the result holds ``R[ref, c](k) = E[x_ref(t) x_c(t + k dt)]``
    for ``k = 0 .. n_lags - 1``.

    Parameters
    ----------
    ts : TimeSeriesSet
        Output-only record.
    ref_channel : int
        Row index of the reference channel.
    n_lags : int, optional
        Number of lags; defaults to ``min(2048, n_samples // 4)`` and may not
        exceed ``n_samples / 2``.
    estimator : {"direct", "spectral"}
        ``direct`` evaluates the lagged products over the whole record;
        ``spectral`` averages Hann-windowed cross-power spectra over
        half-overlapping segments of ``2 * n_lags`` samples and transforms
        back.
    normalization : {"unbiased", "biased"}
        ``unbiased`` divides lag ``k`` by ``N - k`` (right for stationary
        records); ``biased`` divides by ``N``. For a finite-energy transient,
        such as a free decay, the lagged sum already converges and the
        ``N - k`` divisor would bend the decay envelope, so ``biased`` is the
        appropriate choice there.

    Returns
    -------
    IrfEstimate
    """
    n = ts.n_samples
    if not 0 <= ref_channel < ts.n_channels:
        raise ValueError(
            f"reference channel {ref_channel} out of range for {ts.n_channels} channels"
        )
    if n_lags is None:
        n_lags = default_n_lags(n)
    n_lags = int(n_lags)
    if n_lags < 2:
        raise ValueError("n_lags must be at least 2")
    if n_lags > n / 2:
        raise ValueError(f"n_lags={n_lags} exceeds half the record length ({n} samples)")
    if normalization not in ("unbiased", "biased"):
        raise ValueError(f"unknown normalization {normalization!r}")

    x = ts.samples
    ref = x[ref_channel]
    if np.ptp(ref) == 0:
        raise ValueError(f"reference channel {ref_channel} is constant (zero variance)")

    if estimator == "direct":
        h = _direct(x, ref, n_lags)
    elif estimator == "spectral":
        h = _welch(x, ref, n_lags)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    if normalization == "biased":
        h = h * (n - np.arange(n_lags)) / n
    return IrfEstimate(ts.fs, h, ref_channel, ts.channels)
