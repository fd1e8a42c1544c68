"""Loewner-pencil realization from tangential frequency-response data.

Given right data ``H(lam_i) r_i = w_i`` and left data ``l_j H(mu_j) = v_j``,
the Loewner matrix holds the divided differences

    LL[j, i]  = (v_j r_i - l_j w_i) / (mu_j - lam_i)
    LLs[j, i] = (mu_j v_j r_i - lam_i l_j w_i) / (mu_j - lam_i)

and the descriptor system ``E = -LL, A = -LLs, B = V, C = W``
interpolates the data. With redundant (noisy or oversampled) data the
pencil is projected on the dominant singular subspaces of ``[LL, LLs]``
and ``[LL; LLs]`` first. Because every data point is paired with its
conjugate, the pencil is mapped to real arithmetic by a fixed unitary
block transform before projection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg as la

from .modes import ModalSet, Mode, normalize_shape
from .spectral import InterpolationData

__all__ = [
    "LoewnerPencil",
    "StateSpaceRealization",
    "build_pencil",
    "realize",
    "evaluate_realization",
    "modal_from_realization",
    "poles_to_modes",
    "RANK_TOL",
]

# Singular values below RANK_TOL * sigma_1 are treated as numerical zeros.
RANK_TOL = 1e-10

_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class StateSpaceRealization:
    """Descriptor system ``E x' = A x + B u, y = C x`` (D is zero).

    ``domain="discrete"`` marks a sampled-time model (``x[k+1] = A x[k] +
    B u[k]`` with ``E = I``) at sampling frequency `fs`.
    """

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    domain: str = "continuous"
    fs: Optional[float] = None

    def __post_init__(self):
        k = self.A.shape[0]
        if self.E.shape != (k, k) or self.B.shape[0] != k or self.C.shape[1] != k:
            raise ValueError("inconsistent realization dimensions")
        if self.domain not in ("continuous", "discrete"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.domain == "discrete" and not (self.fs and self.fs > 0):
            raise ValueError("a discrete realization needs a positive fs")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def D(self) -> np.ndarray:
        return np.zeros((self.C.shape[0], self.B.shape[1]))

    def is_regular(self, seed: int = 0) -> bool:
        """Probe ``A - sigma E`` at a random complex shift."""
        rng = np.random.default_rng(seed)
        sigma = complex(*rng.standard_normal(2)) * max(1.0, la.norm(self.A, 2))
        smin = la.svdvals(self.A - sigma * self.E)[-1]
        return bool(smin > 1e-12 * la.norm(self.A - sigma * self.E, 2))


@dataclass(frozen=True, eq=False)
class LoewnerPencil:
    """Loewner and shifted Loewner matrices with the data that built them."""

    LL: np.ndarray
    LLs: np.ndarray
    V: np.ndarray
    W: np.ndarray
    data: InterpolationData = field(repr=False)

    def sylvester_residuals(self) -> tuple[float, float]:
        """Relative residuals of the two Sylvester identities.

        ``LL Lam - M LL = L W - V R`` and
        ``LLs Lam - M LLs = L W Lam - M V R``, each normalized by
        ``||LL||_F * max(|lam|, |mu|)`` (``||LLs||_F`` for the second).
        """
        d = self.data
        lam, mu = d.lam, d.mu
        scale = max(np.abs(lam).max(), np.abs(mu).max())
        r1 = (self.LL * lam[None, :] - mu[:, None] * self.LL) - (d.L @ d.W - d.V @ d.R)
        r2 = (self.LLs * lam[None, :] - mu[:, None] * self.LLs) - (
            (d.L @ d.W) * lam[None, :] - mu[:, None] * (d.V @ d.R)
        )
        n1 = la.norm(self.LL) * scale or 1.0
        n2 = la.norm(self.LLs) * scale or 1.0
        return float(la.norm(r1) / n1), float(la.norm(r2) / n2)

    @cached_property
    def real_form(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(LL, LLs, V, W)`` after the conjugate-pair block transform."""
        if not self.data.paired:
            raise ValueError(
                "a real realization needs interpolation points in adjacent conjugate pairs"
            )
        LL = _pair_rows(_pair_cols(self.LL))
        LLs = _pair_rows(_pair_cols(self.LLs))
        V = _pair_rows(self.V)
        W = _pair_cols(self.W)
        out = []
        for name, a in (("LL", LL), ("LLs", LLs), ("V", V), ("W", W)):
            scale = np.abs(a).max() or 1.0
            if np.abs(a.imag).max() > 1e-8 * scale:
                raise ValueError(
                    f"{name} did not become real; the data are not conjugate-closed"
                )
            out.append(np.ascontiguousarray(a.real))
        return tuple(out)

    @cached_property
    def _projection_real(self):
        return _Projection(*self.real_form)

    @cached_property
    def _projection_complex(self):
        return _Projection(self.LL, self.LLs, self.V, self.W)

    def projection(self, real: bool = True) -> "_Projection":
        return self._projection_real if real else self._projection_complex


def _pair_cols(a: np.ndarray) -> np.ndarray:
    # a @ J with J = blockdiag([[1, -1j], [1, 1j]] / sqrt(2))
    x, y = a[:, 0::2], a[:, 1::2]
    out = np.empty(a.shape, dtype=complex)
    out[:, 0::2] = (x + y) * _SQRT_HALF
    out[:, 1::2] = 1j * (y - x) * _SQRT_HALF
    return out


def _pair_rows(a: np.ndarray) -> np.ndarray:
    # J^H @ a
    x, y = a[0::2], a[1::2]
    out = np.empty(a.shape, dtype=complex)
    out[0::2] = (x + y) * _SQRT_HALF
    out[1::2] = 1j * (x - y) * _SQRT_HALF
    return out


class _Projection:
    """SVD factors of a pencil, with the projected matrices at full rank.

    The leading ``k x k`` blocks of the projected matrices are exactly the
    rank-``k`` realization, so a whole order sweep costs two SVDs.
    """

    def __init__(self, LL, LLs, V, W):
        Y, s_row, _ = la.svd(np.hstack([LL, LLs]), full_matrices=False)
        _, s_col, Xh = la.svd(np.vstack([LL, LLs]), full_matrices=False)
        kmax = min(LL.shape)
        Y = Y[:, :kmax]
        X = Xh[:kmax].conj().T
        Yh = Y.conj().T
        self.singular_values = s_row[:kmax]
        self.singular_values_col = s_col[:kmax]
        self.E = -Yh @ LL @ X
        self.A = -Yh @ LLs @ X
        self.B = Yh @ V
        self.C = W @ X
        self.kmax = kmax

    def rank(self, tol: float = RANK_TOL) -> int:
        s1, s2 = self.singular_values, self.singular_values_col
        if s1[0] == 0 or s2[0] == 0:
            return 0
        return int(min(np.sum(s1 > tol * s1[0]), np.sum(s2 > tol * s2[0])))


def build_pencil(data: InterpolationData) -> LoewnerPencil:
    """Loewner and shifted Loewner matrices of the tangential data."""
    lam, mu = data.lam, data.mu
    denom = mu[:, None] - lam[None, :]
    if np.any(denom == 0):
        raise ValueError("right and left interpolation points must be distinct")
    Vr = data.V @ data.R
    Lw = data.L @ data.W
    LL = (Vr - Lw) / denom
    LLs = (mu[:, None] * Vr - Lw * lam[None, :]) / denom
    return LoewnerPencil(LL, LLs, data.V, data.W, data)


def realize(
    pencil: LoewnerPencil,
    order: Optional[int] = None,
    *,
    real: bool = True,
    tol: float = RANK_TOL,
) -> StateSpaceRealization:
    """Project the pencil to a descriptor realization of order `order`.

    Parameters
    ----------
    pencil : LoewnerPencil
    order : int, optional
        Requested order. When omitted, the numerical rank (singular values
        above ``tol * sigma_1``) is used; a larger request is clamped to it
        with a warning.
    real : bool
        Work on the realified pencil (default). ``False`` keeps complex
        arithmetic, mainly for cross-checking.

    Returns
    -------
    StateSpaceRealization
        ``E = -Y* LL X``, ``A = -Y* LLs X``, ``B = Y* V``, ``C = W X``.
    """
    proj = pencil.projection(real)
    rank = proj.rank(tol)
    if rank == 0:
        raise ValueError("Loewner pencil has numerical rank 0; nothing to realize")
    if order is None:
        k = rank
    else:
        k = int(order)
        if not 1 <= k <= proj.kmax:
            raise ValueError(f"order must lie in [1, {proj.kmax}], got {order}")
        if k > rank:
            warnings.warn(
                f"order {k} exceeds the numerical rank {rank}; using {rank}",
                RuntimeWarning,
                stacklevel=2,
            )
            k = rank
    return StateSpaceRealization(
        proj.E[:k, :k].copy(), proj.A[:k, :k].copy(), proj.B[:k].copy(),
        proj.C[:, :k].copy(),
    )


def evaluate_realization(r: StateSpaceRealization, s: complex) -> np.ndarray:
    """Transfer matrix ``C (s E - A)^-1 B`` at the complex point `s`."""
    M = s * r.E - r.A
    if np.linalg.cond(M) > 1e14:
        poles = la.eigvals(r.A, r.E)
        poles = poles[np.isfinite(poles)]
        if poles.size:
            near = poles[np.argmin(np.abs(poles - s))]
            if abs(near - s) <= 1e-6 * max(1.0, abs(s)):
                raise ValueError(f"s = {s} coincides with a system pole at {near}")
        raise ValueError(f"s E - A is numerically singular at s = {s}")
    return r.C @ la.solve(M, r.B)


def poles_to_modes(
    lam: np.ndarray,
    shapes: np.ndarray,
    freq_range: Optional[tuple[float, float]] = None,
    extra_spurious=(),
) -> ModalSet:
    """Keep the stable, oscillatory poles ``Re < 0 < Im`` as modes.

    `shapes` holds one output-space vector per pole (columns). Poles with
    ``Im > 0`` and ``Re >= 0`` are returned as spurious. Modes outside
    `freq_range` [Hz] are dropped.
    """
    lam = np.asarray(lam, dtype=complex)
    modes, spurious = [], list(extra_spurious)
    for i, z in enumerate(lam):
        if not np.isfinite(z):
            continue
        mag = abs(z)
        if mag == 0 or z.imag <= 1e-9 * mag:
            continue
        if z.real >= 0:
            spurious.append(z)
            continue
        f = mag / (2 * np.pi)
        if freq_range is not None and not freq_range[0] <= f <= freq_range[1]:
            continue
        phi = shapes[:, i]
        if not np.any(phi):
            spurious.append(z)
            continue
        modes.append(Mode(f, -z.real / mag, normalize_shape(phi)))
    note = "" if modes else "no stable oscillatory poles found"
    return ModalSet(tuple(modes), tuple(spurious), note)


def modal_from_realization(
    r: StateSpaceRealization,
    freq_range: Optional[tuple[float, float]] = None,
) -> ModalSet:
    """Modal parameters from the generalized eigenproblem ``A x = lam E x``.

    ``f = |lam| / 2 pi``, ``zeta = -Re(lam) / |lam|`` and the shape is
    ``C x`` scaled to a unit, real, largest entry.
    """
    if r.domain != "continuous":
        raise ValueError("modal_from_realization expects a continuous-time model")
    (alpha, beta), vecs = la.eig(r.A, r.E, homogeneous_eigvals=True)
    finite = np.abs(beta) > 1e-14 * np.abs(alpha)
    lam = np.full(alpha.shape, np.inf, dtype=complex)
    lam[finite] = alpha[finite] / beta[finite]
    return poles_to_modes(lam, r.C @ vecs, freq_range)
