"""End-to-end output-only identification: preprocessing to stable modes."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

from . import dataset as ds
from .correlate import IrfEstimate, next_irf
from .era import EraFactors, modal_from_discrete
from .loewner import build_pencil, modal_from_realization, realize
from .modal import StabilityCriteria, StabilizationDiagram, extract_stable, stabilization_sweep
from .modes import ModalSet
from .spectral import FrfSamples, bandpass, build_interpolation_data, irf_to_frf

__all__ = [
    "IdentifyConfig",
    "IdentificationResult",
    "StageError",
    "parse_orders",
    "identify",
]

METHODS = ("loewner", "era")


class StageError(ValueError):
    """Validation failure tagged with the pipeline stage it came from."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def parse_orders(text: str) -> tuple[int, int, int]:
    """Parse ``start:step:stop`` (inclusive stop) or ``start:stop`` (step 2)."""
    parts = str(text).split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"invalid order range {text!r}; expected start:step:stop") from None
    if len(nums) == 2:
        nums = [nums[0], 2, nums[1]]
    if len(nums) != 3:
        raise ValueError(f"invalid order range {text!r}; expected start:step:stop")
    return _check_orders(tuple(nums))


def _check_orders(orders) -> tuple[int, int, int]:
    start, step, stop = (int(v) for v in orders)
    if start < 1 or step < 1 or stop < start:
        raise ValueError(f"order range {start}:{step}:{stop} is empty or invalid")
    return start, step, stop


@dataclass(frozen=True)
class IdentifyConfig:
    """Every input of an identification run.

    The JSON form (:meth:`to_dict`) is echoed into reports, and
    :meth:`from_dict` of that echo reproduces the run exactly.
    """

    method: str = "loewner"
    ref_channel: int = 0
    n_lags: Optional[int] = None
    estimator: str = "direct"
    normalization: str = "unbiased"
    detrend: bool = True
    band: Optional[tuple[float, float]] = None
    bandpass: bool = False
    orders: tuple[int, int, int] = (16, 2, 100)
    criteria: StabilityCriteria = field(default_factory=StabilityCriteria)
    seed: int = 0
    hankel_rows: Optional[int] = None
    hankel_cols: Optional[int] = None
    jobs: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.estimator not in ("direct", "spectral"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.normalization not in ("unbiased", "biased"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.band is not None:
            lo, hi = (float(v) for v in self.band)
            if not 0 <= lo < hi:
                raise ValueError(f"invalid band [{lo}, {hi}] Hz")
            object.__setattr__(self, "band", (lo, hi))
        if self.bandpass and self.band is None:
            raise ValueError("bandpass filtering needs a band")
        if self.ref_channel < 0:
            raise ValueError("reference channel must be non-negative")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        object.__setattr__(self, "orders", _check_orders(self.orders))

    @property
    def order_list(self) -> list[int]:
        start, step, stop = self.orders
        return list(range(start, stop + 1, step))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "ref_channel": self.ref_channel,
            "n_lags": self.n_lags,
            "estimator": self.estimator,
            "normalization": self.normalization,
            "detrend": self.detrend,
            "band": None if self.band is None else list(self.band),
            "bandpass": self.bandpass,
            "orders": list(self.orders),
            "criteria": self.criteria.to_dict(),
            "seed": self.seed,
            "hankel_rows": self.hankel_rows,
            "hankel_cols": self.hankel_cols,
            "jobs": self.jobs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IdentifyConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown identify option(s): {', '.join(sorted(unknown))}")
        if "criteria" in d:
            d["criteria"] = StabilityCriteria(**d["criteria"])
        if d.get("band") is not None:
            d["band"] = tuple(d["band"])
        if "orders" in d:
            o = d["orders"]
            d["orders"] = parse_orders(o) if isinstance(o, str) else tuple(o)
        return cls(**d)

    def with_(self, **changes) -> "IdentifyConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class IdentificationResult:
    modes: ModalSet
    diagram: StabilizationDiagram
    irf: IrfEstimate
    frf: Optional[FrfSamples]
    timing: dict


def _stage(name):
    class _Ctx:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            self.elapsed = time.perf_counter() - self.t0
            if exc_type is not None and issubclass(exc_type, ValueError) and not isinstance(
                exc, StageError
            ):
                raise StageError(name, str(exc)) from exc
            return False

    return _Ctx()


def identify(ts: ds.TimeSeriesSet, config: IdentifyConfig = IdentifyConfig()) -> IdentificationResult:
    """Run the whole chain on one record.

    detrend, optional band-pass, NExT correlation, then either the
    Loewner pencil on the FRF of the correlation functions or ERA on the
    correlation functions themselves, an order sweep and stable-mode
    extraction. Modes are kept inside `config.band` when one is given,
    otherwise below the Nyquist frequency.
    """
    if not 0 <= config.ref_channel < ts.n_channels:
        raise StageError(
            "input",
            f"reference channel {config.ref_channel} out of range for {ts.n_channels} channels",
        )
    timing = {}
    freq_range = config.band if config.band is not None else (0.0, ts.fs / 2)

    with _stage("preprocess") as st:
        x = ds.detrend(ts) if config.detrend else ts
        if config.bandpass:
            x = bandpass(x, *config.band)
    timing["preprocess"] = st.elapsed

    with _stage("correlate") as st:
        irf = next_irf(x, config.ref_channel, config.n_lags, config.estimator, config.normalization)
    timing["correlate"] = st.elapsed

    frf = None
    with _stage(config.method) as st:
        if config.method == "loewner":
            frf = irf_to_frf(irf)
            data = build_interpolation_data(frf, config.band, direction_seed=config.seed)
            pencil = build_pencil(data)
            pencil.projection(True)

            def at_order(k):
                return modal_from_realization(realize(pencil, k), freq_range)
        else:
            factors = EraFactors(irf, config.hankel_rows, config.hankel_cols)

            def at_order(k):
                return modal_from_discrete(factors.realize(k), freq_range)
    timing["factorize"] = st.elapsed

    with _stage("stabilization") as st:
        diagram = stabilization_sweep(at_order, config.order_list, config.criteria, config.jobs)
        modes = extract_stable(diagram)
    timing["stabilization"] = st.elapsed

    names = tuple(ts.names)
    modes = ModalSet(modes.modes, modes.spurious, modes.note, names)
    return IdentificationResult(modes, diagram, irf, frf, timing)
