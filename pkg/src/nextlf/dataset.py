"""Multichannel vibration records: data model, CSV persistence, conditioning."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

__all__ = [
    "Channel",
    "TimeSeriesSet",
    "NoiseSpec",
    "load_timeseries_csv",
    "write_timeseries_csv",
    "detrend",
    "add_noise",
]

# Relative tolerance on sample-interval jitter accepted when reading a time column.
TIME_JITTER_TOL = 1e-6


@dataclass(frozen=True)
class Channel:
    """Metadata of one measured channel."""

    name: str
    location: str = ""
    direction: str = ""


@dataclass(frozen=True)
class TimeSeriesSet:
    """Uniformly sampled multichannel record.

    Parameters
    ----------
    fs : float
        Sampling frequency [Hz].
    channels : sequence of Channel
        One entry per row of `samples`; names must be unique.
    samples : ndarray, shape (n_channels, n_samples)
        Real sample values.
    unit : str
        Free-text physical unit label.
    """

    fs: float
    channels: tuple[Channel, ...]
    samples: np.ndarray
    unit: str = ""

    def __post_init__(self):
        channels = tuple(
            c if isinstance(c, Channel) else Channel(str(c)) for c in self.channels
        )
        object.__setattr__(self, "channels", channels)
        samples = np.array(self.samples, dtype=float, copy=True)
        if samples.ndim == 1:
            samples = samples[None, :]
        if samples.ndim != 2:
            raise ValueError("samples must be a 2-D array (n_channels, n_samples)")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

        if not np.isfinite(self.fs) or self.fs <= 0:
            raise ValueError(f"sampling frequency must be positive, got {self.fs}")
        if not channels:
            raise ValueError("no channels")
        if len(channels) != samples.shape[0]:
            raise ValueError(
                f"{len(channels)} channel labels for {samples.shape[0]} sample rows"
            )
        if samples.shape[1] < 2:
            raise ValueError("a record needs at least 2 samples")
        names = [c.name for c in channels]
        if len(set(names)) != len(names):
            raise ValueError(f"channel names must be unique: {names}")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.fs

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.channels]

    def with_samples(self, samples: np.ndarray) -> "TimeSeriesSet":
        """Copy of this record carrying new sample values (same shape)."""
        samples = np.asarray(samples, dtype=float)
        if samples.shape != self.samples.shape:
            raise ValueError("replacement samples must keep the record shape")
        return replace(self, samples=samples)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive measurement noise relative to each channel's standard deviation.

    ``distribution="uniform"`` draws from [0, 1), which is what the common
    ``signal + std(signal)*rand(...)*level`` recipe does; ``"gaussian"`` draws
    standard normal samples.
    """

    level: float
    seed: int = 0
    distribution: str = "gaussian"

    def __post_init__(self):
        if not np.isfinite(self.level) or self.level < 0:
            raise ValueError(f"noise level must be >= 0, got {self.level}")
        if self.distribution not in ("gaussian", "uniform"):
            raise ValueError(f"unknown noise distribution {self.distribution!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("noise seed must be an unsigned integer")


def load_timeseries_csv(path, unit: str = "") -> TimeSeriesSet:
    """Read a record written as ``t,<ch1>,<ch2>,...`` CSV.

    The sampling frequency is inferred from the time column, which must be
    strictly increasing and uniform to within ``TIME_JITTER_TOL``.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc

    rows = [r for r in rows if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ValueError(f"{path}: no channels")
    width = len(header)

    values = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise ValueError(
                f"{path}: ragged row {i}: expected {width} cells, found {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                values[i - 1, j] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {i}, column {j}: {cell!r}"
                ) from None

    if values.shape[0] < 2:
        raise ValueError(f"{path}: a record needs at least 2 samples")
    t = values[:, 0]
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ValueError(f"{path}: time column is not strictly increasing")
    dt = (t[-1] - t[0]) / (len(t) - 1)
    jitter = float(np.max(np.abs(steps - dt)) / dt)
    if jitter >= TIME_JITTER_TOL:
        raise ValueError(
            f"{path}: non-uniform time grid (max relative jitter {jitter:.3g})"
        )
    return TimeSeriesSet(
        fs=1.0 / dt,
        channels=tuple(Channel(name) for name in header[1:]),
        samples=values[:, 1:].T,
        unit=unit,
    )


def write_timeseries_csv(ts: TimeSeriesSet, path) -> None:
    """Write `ts` as CSV with a leading ``t`` column, 17 significant digits."""
    if not ts.channels:
        raise ValueError("no channels")
    path = Path(path)
    t = ts.time
    lines = [",".join(["t", *ts.names])]
    data = np.vstack([t, ts.samples]).T
    lines.extend(",".join(f"{v:.17g}" for v in row) for row in data)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def detrend(ts: TimeSeriesSet) -> TimeSeriesSet:
    """Remove the mean of every channel."""
    x = ts.samples
    return ts.with_samples(x - x.mean(axis=1, keepdims=True))


def add_noise(ts: TimeSeriesSet, spec: NoiseSpec) -> TimeSeriesSet:
    """Corrupt every channel with noise scaled by its own standard deviation.

    ``out[c] = in[c] + std(in[c]) * level * n``, with ``n`` drawn from
    the distribution named in `spec` using a generator seeded by
    ``spec.seed``.
    """
    if spec.level == 0:
        return ts
    rng = np.random.default_rng(spec.seed)
    shape = ts.samples.shape
    if spec.distribution == "gaussian":
        n = rng.standard_normal(shape)
    else:
        n = rng.random(shape)
    sigma = ts.samples.std(axis=1, ddof=1, keepdims=True)
    return ts.with_samples(ts.samples + sigma * spec.level * n)

