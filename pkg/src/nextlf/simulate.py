"""Synthetic test structures and their simulated responses.

Two families of structures are provided: a uniform Euler-Bernoulli
cantilever discretized with two-node Hermitian elements, and a lumped
shear-type chain. Both come with an analytical modal baseline
(:func:`modal_solve`) and can be driven by an impulse or by seeded white
noise (:func:`simulate_response`). Responses are computed by modal
superposition with each damped SDOF discretized exactly, so the records
carry no integrator error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import scipy.linalg as la
from scipy import signal

from .dataset import Channel, TimeSeriesSet
from .modes import ModalSet, Mode, normalize_shape

__all__ = [
    "BeamModel",
    "StructuralModel",
    "ForceSpec",
    "SimulationConfig",
    "element_matrices",
    "assemble_beam",
    "reference_beam",
    "shear_frame",
    "normal_modes",
    "modal_solve",
    "modal_coordinates",
    "simulate_response",
    "parse_simulation_config",
    "load_simulation_config",
]


@dataclass(frozen=True)
class BeamModel:
    """Uniform cantilever split into `n_elements` equal elements (SI units)."""

    n_elements: int
    total_length: float
    density: float
    youngs_modulus: float
    area: float
    inertia: float
    boundary: str = "cantilever"

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError("n_elements must be a positive integer")
        for name in ("total_length", "density", "youngs_modulus", "area", "inertia"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.boundary != "cantilever":
            raise ValueError(f"unsupported boundary condition {self.boundary!r}")

    @property
    def element_length(self) -> float:
        return self.total_length / self.n_elements


@dataclass(frozen=True)
class StructuralModel:
    """Linear structure ``M q'' + C q' + K q = f`` with uniform modal damping.

    `measured_dofs` indexes the degrees of freedom exported as response
    channels; it defaults to every DOF.
    """

    M: np.ndarray
    K: np.ndarray
    dof_labels: tuple[str, ...]
    modal_damping: float = 0.0
    measured_dofs: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        K = np.array(self.K, dtype=float)
        n = M.shape[0]
        if M.shape != (n, n) or K.shape != (n, n):
            raise ValueError("M and K must be square and of equal size")
        if not (np.array_equal(M, M.T) and np.array_equal(K, K.T)):
            raise ValueError("M and K must be symmetric")
        if len(self.dof_labels) != n:
            raise ValueError("one label per degree of freedom is required")
        if not 0 <= self.modal_damping < 1:
            raise ValueError(
                f"modal damping must satisfy 0 <= zeta < 1, got {self.modal_damping}"
            )
        for name, mat in (("M", M), ("K", K)):
            try:
                np.linalg.cholesky(mat)
            except np.linalg.LinAlgError:
                raise ValueError(f"{name} is not positive definite") from None
        measured = tuple(range(n)) if self.measured_dofs is None else tuple(
            int(i) for i in self.measured_dofs
        )
        if not measured or any(not 0 <= i < n for i in measured):
            raise ValueError("measured_dofs must index existing DOFs")
        M.setflags(write=False)
        K.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "dof_labels", tuple(self.dof_labels))
        object.__setattr__(self, "measured_dofs", measured)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    def dof_index(self, dof: Union[int, str]) -> int:
        if isinstance(dof, str):
            try:
                return self.dof_labels.index(dof)
            except ValueError:
                raise ValueError(f"unknown DOF label {dof!r}") from None
        if not 0 <= int(dof) < self.n_dof:
            raise ValueError(f"DOF index {dof} outside model with {self.n_dof} DOFs")
        return int(dof)

    def with_damping(self, zeta: float) -> "StructuralModel":
        return StructuralModel(self.M, self.K, self.dof_labels, zeta, self.measured_dofs)


@dataclass(frozen=True)
class ForceSpec:
    """Excitation applied at one or more DOFs (index or label).

    ``kind="impulse"`` imparts an impulse of `amplitude` [N s] at t=0;
    ``kind="white_noise"`` applies zero-order-held Gaussian force samples
    with standard deviation `amplitude` [N], drawn from `seed`, with an
    independent series at each listed DOF.
    """

    kind: str = "impulse"
    dof: Union[int, str, Sequence[Union[int, str]]] = 0
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("impulse", "white_noise"):
            raise ValueError(f"unknown force kind {self.kind!r}")
        if not np.isfinite(self.amplitude):
            raise ValueError("force amplitude must be finite")

    def dofs(self) -> list:
        if isinstance(self.dof, (list, tuple)):
            return list(self.dof)
        return [self.dof]

    def load_vector(self, model: StructuralModel) -> np.ndarray:
        f = np.zeros(model.n_dof)
        for d in self.dofs():
            f[model.dof_index(d)] += self.amplitude
        return f


def element_matrices(rho, A, L_e, E, I) -> tuple[np.ndarray, np.ndarray]:
    """Consistent mass and stiffness matrices of a 2-node Euler-Bernoulli element.

    DOF order is (v1, theta1, v2, theta2).
    """
    for name, v in (("rho", rho), ("A", A), ("L_e", L_e), ("E", E), ("I", I)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    L = L_e
    Me = (rho * A * L / 420.0) * np.array(
        [
            [156, 22 * L, 54, -13 * L],
            [22 * L, 4 * L**2, 13 * L, -3 * L**2],
            [54, 13 * L, 156, -22 * L],
            [-13 * L, -3 * L**2, -22 * L, 4 * L**2],
        ],
        dtype=float,
    )
    Ke = (E * I / L**3) * np.array(
        [
            [12, 6 * L, -12, 6 * L],
            [6 * L, 4 * L**2, -6 * L, 2 * L**2],
            [-12, -6 * L, 12, -6 * L],
            [6 * L, 2 * L**2, -6 * L, 4 * L**2],
        ],
        dtype=float,
    )
    return Me, Ke


def assemble_beam(model: BeamModel, zeta: float = 0.0) -> StructuralModel:
    """Assemble the clamped-free beam; node 0 is clamped and removed.

    The reduced system has ``2 * n_elements`` DOFs ordered
    ``v1, theta1, v2, theta2, ...``; only the transverse displacements
    ``v_i`` are measured.
    """
    n = model.n_elements
    Me, Ke = element_matrices(
        model.density, model.area, model.element_length, model.youngs_modulus,
        model.inertia,
    )
    size = 2 * (n + 1)
    M = np.zeros((size, size))
    K = np.zeros((size, size))
    for e in range(n):
        s = slice(2 * e, 2 * e + 4)
        M[s, s] += Me
        K[s, s] += Ke
    # Symmetrize exactly: accumulated rounding must not break symmetry checks.
    M = 0.5 * (M + M.T)[2:, 2:]
    K = 0.5 * (K + K.T)[2:, 2:]
    labels = tuple(f"{kind}{i}" for i in range(1, n + 1) for kind in ("v", "theta"))
    return StructuralModel(M, K, labels, zeta, measured_dofs=tuple(range(0, 2 * n, 2)))


def reference_beam(
    f1: float = 5.10,
    n_elements: int = 8,
    total_length: float = 1.0,
    density: float = 2700.0,
    youngs_modulus: float = 70e9,
    area: float = 2.5e-4,
) -> BeamModel:
    """Aluminium cantilever whose second moment of area is solved for `f1`.

    Frequencies scale with ``sqrt(I)`` at fixed mass, so one eigensolve at
    unit inertia fixes the value exactly. Frequency ratios do not depend
    on the physical constants.
    """
    trial = BeamModel(n_elements, total_length, density, youngs_modulus, area, 1.0)
    f1_unit = modal_solve(assemble_beam(trial)).frequencies[0]
    inertia = (f1 / f1_unit) ** 2
    return BeamModel(n_elements, total_length, density, youngs_modulus, area, inertia)


def shear_frame(masses, stiffnesses, zeta: float = 0.0) -> StructuralModel:
    """Chain of floor masses; ``stiffnesses[0]`` ties floor 1 to the ground."""
    m = np.asarray(masses, dtype=float)
    k = np.asarray(stiffnesses, dtype=float)
    if m.ndim != 1 or m.shape != k.shape or m.size == 0:
        raise ValueError("masses and stiffnesses must be equal-length lists")
    if np.any(m <= 0) or np.any(k <= 0):
        raise ValueError("masses and stiffnesses must be positive")
    n = m.size
    K = np.diag(k + np.append(k[1:], 0.0))
    if n > 1:
        K -= np.diag(k[1:], 1) + np.diag(k[1:], -1)
    labels = tuple(f"floor{i}" for i in range(1, n + 1))
    return StructuralModel(np.diag(m), K, labels, zeta)


def normal_modes(model: StructuralModel) -> tuple[np.ndarray, np.ndarray]:
    """Undamped circular frequencies and mass-normalized modes (columns)."""
    try:
        w2, phi = la.eigh(model.K, model.M)
    except la.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    return np.sqrt(w2), phi


def modal_solve(model: StructuralModel) -> ModalSet:
    """Analytical baseline on the measured DOFs.

    Frequencies are the undamped ones, ``sqrt(eig(K, M)) / 2 pi``; every
    mode carries ``model.modal_damping``.
    """
    omega, phi = normal_modes(model)
    idx = list(model.measured_dofs)
    modes = [
        Mode(w / (2 * np.pi), model.modal_damping, normalize_shape(phi[idx, r]))
        for r, w in enumerate(omega)
    ]
    return ModalSet(tuple(modes), channels=tuple(model.dof_labels[i] for i in idx))


def _retained_modes(omega, fs, include_above_nyquist):
    if include_above_nyquist:
        return np.arange(omega.size)
    return np.flatnonzero(omega / (2 * np.pi) < fs / 2)


def modal_coordinates(
    model: StructuralModel,
    force: ForceSpec,
    fs: float,
    n_samples: int,
    include_above_nyquist: bool = False,
):
    """Modal displacements and velocities, each shape (n_modes, n_samples).

    Returns ``(q, qdot, omega, phi)`` for the retained modes. Modes at or
    above the Nyquist frequency are dropped unless
    `include_above_nyquist` is set, standing in for an anti-aliasing
    filter.
    """
    omega, phi = normal_modes(model)
    keep = _retained_modes(omega, fs, include_above_nyquist)
    omega, phi = omega[keep], phi[:, keep]
    zeta = model.modal_damping
    dt = 1.0 / fs
    t = np.arange(n_samples) * dt
    p = phi.T @ force.load_vector(model)

    q = np.zeros((omega.size, n_samples))
    qd = np.zeros_like(q)
    if force.kind == "impulse":
        for r, (w, pr) in enumerate(zip(omega, p)):
            wd = w * np.sqrt(1 - zeta**2)
            env = pr * np.exp(-zeta * w * t)
            q[r] = env * np.sin(wd * t) / wd
            qd[r] = env * (np.cos(wd * t) - zeta * w * np.sin(wd * t) / wd)
        return q, qd, omega, phi

    # One independent unit-variance series per loaded DOF, so the forcing
    # is spatially uncorrelated.
    dofs = [model.dof_index(d) for d in force.dofs()]
    u = np.random.default_rng(force.seed).standard_normal((len(dofs), n_samples))
    modal_force = force.amplitude * (phi[dofs].T @ u)
    for r, w in enumerate(omega):
        Ac = np.array([[0.0, 1.0], [-(w**2), -2 * zeta * w]])
        aug = np.zeros((3, 3))
        aug[:2, :2] = Ac
        aug[1, 2] = 1.0
        G = la.expm(aug * dt)
        Ad, Bd = G[:2, :2], G[:2, 2:]
        for row, out in ((0, q), (1, qd)):
            Cr = np.eye(2)[row : row + 1]
            b, a = signal.ss2tf(Ad, Bd, Cr, np.zeros((1, 1)))
            out[r] = signal.lfilter(b[0], a, modal_force[r])
    return q, qd, omega, phi


def simulate_response(
    model: StructuralModel,
    force: ForceSpec,
    fs: float,
    duration: float,
    include_above_nyquist: bool = False,
) -> TimeSeriesSet:
    """Displacement histories at the measured DOFs.

    ``round(duration * fs)`` samples are produced, starting at t = 0.
    """
    if not fs > 0 or not duration > 0:
        raise ValueError("fs and duration must be positive")
    n = int(round(duration * fs))
    if n < 2:
        raise ValueError("duration too short for the sampling frequency")
    q, _, _, phi = modal_coordinates(model, force, fs, n, include_above_nyquist)
    idx = list(model.measured_dofs)
    y = phi[idx] @ q
    channels = tuple(Channel(model.dof_labels[i], location=model.dof_labels[i]) for i in idx)
    return TimeSeriesSet(fs, channels, y, unit="m")


@dataclass(frozen=True)
class SimulationConfig:
    """Parsed simulation document: structure, excitation and sampling."""

    model: StructuralModel
    force: ForceSpec
    fs: float
    duration: float
    source: dict


def _model_from_config(cfg: dict) -> StructuralModel:
    kind = cfg.get("model", "beam")
    zeta = float(cfg.get("zeta", 0.0))
    if kind == "shear_frame":
        return shear_frame(cfg["masses"], cfg["stiffnesses"], zeta)
    if kind != "beam":
        raise ValueError(f"unknown model type {kind!r}")
    common = dict(
        n_elements=int(cfg.get("n_elements", 8)),
        total_length=float(cfg.get("length_m", 1.0)),
        density=float(cfg.get("rho", 2700.0)),
        youngs_modulus=float(cfg.get("E", 70e9)),
        area=float(cfg.get("area", 2.5e-4)),
    )
    if "inertia" in cfg:
        beam = BeamModel(inertia=float(cfg["inertia"]), **common)
    else:
        beam = reference_beam(f1=float(cfg.get("f1_hz", 5.10)), **common)
    return assemble_beam(beam, zeta)


def parse_simulation_config(cfg: dict) -> SimulationConfig:
    """Validate a simulation document (see README for the schema)."""
    try:
        model = _model_from_config(cfg)
        fcfg = dict(cfg.get("force", {}))
        force = ForceSpec(
            kind=fcfg.get("kind", "impulse"),
            dof=fcfg.get("dof", 0),
            amplitude=float(fcfg.get("amplitude", 1.0)),
            seed=int(fcfg.get("seed", 0)),
        )
        for d in force.dofs():
            model.dof_index(d)
        fs = float(cfg.get("fs", 1800.0))
        duration = float(cfg.get("duration", 30.0))
    except KeyError as exc:
        raise ValueError(f"missing configuration key {exc}") from None
    if not fs > 0 or not duration > 0:
        raise ValueError("fs and duration must be positive")
    return SimulationConfig(model, force, fs, duration, dict(cfg))


def load_simulation_config(path) -> SimulationConfig:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    return parse_simulation_config(cfg)
