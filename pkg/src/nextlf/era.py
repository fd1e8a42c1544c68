"""Eigensystem Realization Algorithm on NExT correlation functions.

Benchmark path for the Loewner identification: block Hankel matrices of
the IRF samples are factored by SVD and a discrete-time state matrix is
read off the shifted Hankel matrix.
"""

from __future__ import annotations

import warnings
from typing import Optional

import numpy as np
import scipy.linalg as la

from .correlate import IrfEstimate
from .loewner import RANK_TOL, StateSpaceRealization, poles_to_modes
from .modes import ModalSet

__all__ = ["era_realize", "modal_from_discrete", "default_hankel_size", "EraFactors"]


def default_hankel_size(n_lags: int) -> int:
    return n_lags // 2 - 1


class EraFactors:
    """SVD of the block Hankel matrix, reusable across model orders.

    ``H0[i, j] = h[1 + i + j]`` (blocks of p rows) and
    ``H1[i, j] = h[2 + i + j]``.
    """

    def __init__(self, irf: IrfEstimate, rows: Optional[int] = None, cols: Optional[int] = None):
        rows = default_hankel_size(irf.n_lags) if rows is None else int(rows)
        cols = default_hankel_size(irf.n_lags) if cols is None else int(cols)
        if rows < 1 or cols < 1:
            raise ValueError("Hankel dimensions must be positive")
        if rows + cols > irf.n_lags - 1:
            raise ValueError(
                f"insufficient lags: {rows} rows + {cols} cols needs "
                f"{rows + cols + 1} lags, have {irf.n_lags}"
            )
        h = irf.h
        p = h.shape[0]
        self.p, self.rows, self.cols, self.fs = p, rows, cols, irf.fs
        # H0 rows are ordered (lag block i, channel c).
        idx = np.arange(rows)[:, None] + np.arange(cols)[None, :]
        H0 = h[:, 1 + idx].transpose(1, 0, 2).reshape(p * rows, cols)
        H1 = h[:, 2 + idx].transpose(1, 0, 2).reshape(p * rows, cols)
        U, s, Vt = la.svd(H0, full_matrices=False)
        self.singular_values = s
        self.U = U
        self.Vt = Vt
        self._G = U.T @ H1 @ Vt.T

    @property
    def kmax(self) -> int:
        return self.singular_values.size

    def rank(self, tol: float = RANK_TOL) -> int:
        s = self.singular_values
        if s[0] == 0:
            return 0
        return int(np.sum(s > tol * s[0]))

    def realize(self, order: Optional[int] = None, tol: float = RANK_TOL) -> StateSpaceRealization:
        rank = self.rank(tol)
        if rank == 0:
            raise ValueError("Hankel matrix has numerical rank 0; nothing to realize")
        if order is None:
            k = rank
        else:
            k = int(order)
            if not 1 <= k <= min(self.p * self.rows, self.cols):
                raise ValueError(
                    f"order must lie in [1, {min(self.p * self.rows, self.cols)}], got {order}"
                )
            if k > rank:
                warnings.warn(
                    f"order {k} exceeds the Hankel numerical rank {rank}; using {rank}",
                    RuntimeWarning,
                    stacklevel=2,
                )
                k = rank
        s_half = np.sqrt(self.singular_values[:k])
        Ad = self._G[:k, :k] / s_half[:, None] / s_half[None, :]
        C = self.U[: self.p, :k] * s_half[None, :]
        B = (s_half[:, None] * self.Vt[:k, :1])
        return StateSpaceRealization(np.eye(k), Ad, B, C, domain="discrete", fs=self.fs)


def era_realize(
    irf: IrfEstimate,
    order: Optional[int] = None,
    hankel_rows: Optional[int] = None,
    hankel_cols: Optional[int] = None,
) -> StateSpaceRealization:
    """Discrete-time realization of order `order` from the IRF.

    ``A_d = S^-1/2 U^T H1 V S^-1/2``, ``C`` the first block row of
    ``U S^1/2`` and ``B`` the first column of ``S^1/2 V^T``. Hankel
    dimensions default to ``n_lags // 2 - 1`` block rows and columns.
    """
    return EraFactors(irf, hankel_rows, hankel_cols).realize(order)


def modal_from_discrete(
    r: StateSpaceRealization,
    freq_range: Optional[tuple[float, float]] = None,
) -> ModalSet:
    """Map discrete eigenvalues ``z`` to ``lam = fs * log(z)`` and extract modes.

    Eigenvalues on the negative real axis have no unambiguous continuous
    counterpart and are reported as spurious; real positive ones are
    overdamped and skipped.
    """
    if r.domain != "discrete":
        raise ValueError("modal_from_discrete expects a discrete-time model")
    z, vecs = la.eig(r.A, r.E)
    spurious = []
    lam = np.full(z.shape, np.inf, dtype=complex)
    for i, zi in enumerate(z):
        mag = abs(zi)
        if mag == 0:
            continue
        if abs(zi.imag) <= 1e-12 * mag:
            if zi.real < 0:
                spurious.append(r.fs * np.log(complex(zi)))
            continue
        lam[i] = r.fs * np.log(zi)
    return poles_to_modes(lam, r.C @ vecs, freq_range, extra_spurious=spurious)
