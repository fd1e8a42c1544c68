"""Output-only modal identification with NExT correlation functions.

Correlation functions of ambient responses are turned into modal
parameters either through a Loewner-pencil realization of their
frequency response or through the Eigensystem Realization Algorithm.
"""

from .correlate import IrfEstimate, next_irf
from .dataset import Channel, NoiseSpec, TimeSeriesSet, add_noise, detrend, load_timeseries_csv
from .era import era_realize, modal_from_discrete
from .loewner import build_pencil, evaluate_realization, modal_from_realization, realize
from .modal import StabilityCriteria, extract_stable, mac, pair_modes, stabilization_sweep
from .modes import ModalSet, Mode
from .pipeline import IdentifyConfig, identify
from .simulate import modal_solve, reference_beam, simulate_response
from .spectral import bandpass, build_interpolation_data, irf_to_frf

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "IdentifyConfig",
    "IrfEstimate",
    "ModalSet",
    "Mode",
    "NoiseSpec",
    "StabilityCriteria",
    "TimeSeriesSet",
    "add_noise",
    "bandpass",
    "build_interpolation_data",
    "build_pencil",
    "detrend",
    "era_realize",
    "evaluate_realization",
    "extract_stable",
    "identify",
    "irf_to_frf",
    "load_timeseries_csv",
    "mac",
    "modal_from_discrete",
    "modal_from_realization",
    "modal_solve",
    "next_irf",
    "pair_modes",
    "realize",
    "reference_beam",
    "simulate_response",
    "stabilization_sweep",
]
