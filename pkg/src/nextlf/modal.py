"""Mode comparison, stabilization diagrams and stable-mode extraction."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .modes import ModalSet, Mode

__all__ = [
    "mac",
    "mac_matrix",
    "pair_modes",
    "compare_modes",
    "StabilityCriteria",
    "Link",
    "StabilizationEntry",
    "StabilizationDiagram",
    "stabilization_sweep",
    "extract_stable",
]


def mac(phi_a, phi_b) -> float:
    """Modal Assurance Criterion ``|a^H b|^2 / ((a^H a)(b^H b))``."""
    a = np.asarray(phi_a, dtype=complex).ravel()
    b = np.asarray(phi_b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError(f"shape length mismatch: {a.size} vs {b.size}")
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na == 0 or nb == 0:
        raise ValueError("MAC is undefined for a zero vector")
    value = abs(np.vdot(a, b)) ** 2 / (na * nb)
    return float(min(value, 1.0))


def mac_matrix(a: ModalSet, b: ModalSet) -> np.ndarray:
    return np.array([[mac(ma.shape, mb.shape) for mb in b] for ma in a])


def pair_modes(a: ModalSet, b: ModalSet, max_df: float = 0.05) -> list[tuple[int, int]]:
    """Greedy best-MAC matching of `a` onto `b`.

    Candidates must satisfy ``|f_a - f_b| / f_a <= max_df``; each mode is
    used at most once. Pairs are returned sorted by the index into `a`.
    """
    cands = []
    for i, ma in enumerate(a):
        for j, mb in enumerate(b):
            df = abs(ma.frequency - mb.frequency) / ma.frequency
            if df <= max_df:
                cands.append((-mac(ma.shape, mb.shape), df, i, j))
    cands.sort()
    used_a, used_b, pairs = set(), set(), []
    for _, _, i, j in cands:
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            pairs.append((i, j))
    return sorted(pairs)


def compare_modes(reference: ModalSet, test: ModalSet, max_df: float = 0.05) -> dict:
    """Paired comparison table of `test` against `reference`.

    Returns ``{"pairs": [...], "missing": [...], "extra": [...]}``, where
    each pair row holds both frequencies and dampings, their percentage
    differences and the MAC.
    """
    pairs = pair_modes(reference, test, max_df)
    rows = []
    for i, j in pairs:
        r, t = reference[i], test[j]
        rows.append({
            "mode": i + 1,
            "index_test": j,
            "f_ref": r.frequency,
            "f_test": t.frequency,
            "df_pct": 100 * (t.frequency - r.frequency) / r.frequency,
            "zeta_ref": r.damping,
            "zeta_test": t.damping,
            "dzeta_pct": 100 * (t.damping - r.damping) / r.damping if r.damping else None,
            "mac": mac(r.shape, t.shape),
        })
    paired_a = {i for i, _ in pairs}
    paired_b = {j for _, j in pairs}
    return {
        "pairs": rows,
        "missing": [i for i in range(len(reference)) if i not in paired_a],
        "extra": [j for j in range(len(test)) if j not in paired_b],
    }


@dataclass(frozen=True)
class StabilityCriteria:
    """Thresholds for calling a pole stable against the previous order.

    df_tol and dz_tol are relative changes in frequency and damping,
    mac_tol the minimum shape correlation, and min_consecutive the number
    of successive stable orders a mode must survive to be extracted.
    """

    df_tol: float = 0.01
    dz_tol: float = 0.05
    mac_tol: float = 0.98
    min_consecutive: int = 5

    def __post_init__(self):
        if not (self.df_tol > 0 and self.dz_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.mac_tol <= 1:
            raise ValueError("mac_tol must lie in (0, 1]")
        if int(self.min_consecutive) != self.min_consecutive or self.min_consecutive < 1:
            raise ValueError("min_consecutive must be a positive integer")

    def to_dict(self) -> dict:
        return {
            "df_tol": self.df_tol,
            "dz_tol": self.dz_tol,
            "mac_tol": self.mac_tol,
            "min_consecutive": self.min_consecutive,
        }


@dataclass(frozen=True)
class Link:
    """Change of a mode relative to its predecessor at the previous order."""

    predecessor: int
    df: float
    dz: float
    mac: float

    def flags(self, c: StabilityCriteria) -> tuple[bool, bool, bool]:
        return (self.df <= c.df_tol, self.dz <= c.dz_tol, self.mac >= c.mac_tol)

    def stable(self, c: StabilityCriteria) -> bool:
        return all(self.flags(c))


@dataclass(frozen=True)
class StabilizationEntry:
    order: int
    modes: ModalSet
    links: tuple[Optional[Link], ...] = ()
    error: str = ""
    warnings: tuple[str, ...] = ()

    def flags(self, c: StabilityCriteria) -> list[Optional[tuple[bool, bool, bool]]]:
        """Per-mode (freq, damp, shape) flags; None without a predecessor."""
        return [None if lk is None else lk.flags(c) for lk in self.links]


@dataclass(frozen=True)
class StabilizationDiagram:
    entries: tuple[StabilizationEntry, ...]
    criteria: StabilityCriteria = field(default_factory=StabilityCriteria)

    @property
    def orders(self) -> list[int]:
        return [e.order for e in self.entries]

    def to_dict(self) -> dict:
        out = []
        for e in self.entries:
            flags = e.flags(self.criteria)
            out.append({
                "order": e.order,
                "error": e.error,
                "poles": [
                    {
                        "frequency_hz": m.frequency,
                        "damping": m.damping,
                        "flags": None if fl is None else list(fl),
                    }
                    for m, fl in zip(e.modes, flags)
                ],
                "n_spurious": len(e.modes.spurious),
            })
        return {"criteria": self.criteria.to_dict(), "entries": out}


def _link(mode: Mode, previous: ModalSet, c: StabilityCriteria) -> Optional[Link]:
    """Link to the best-MAC predecessor within df_tol, else the nearest one."""
    if not len(previous):
        return None
    f = previous.frequencies
    df = np.abs(f - mode.frequency) / f
    near = np.flatnonzero(df <= c.df_tol)
    if near.size:
        macs = [mac(mode.shape, previous[j].shape) for j in near]
        j = int(near[int(np.argmax(macs))])
    else:
        j = int(np.argmin(df))
    ref = previous[j]
    dz = abs(mode.damping - ref.damping) / ref.damping if ref.damping > 0 else np.inf
    return Link(predecessor=j, df=float(df[j]), dz=float(dz), mac=mac(mode.shape, ref.shape))


def stabilization_sweep(
    identify: Callable[[int], ModalSet],
    orders: Iterable[int],
    criteria: Optional[StabilityCriteria] = None,
    jobs: int = 1,
) -> StabilizationDiagram:
    """Identify at every order and link each mode to the previous order.

    A failure at one order is recorded in its entry and the sweep goes
    on. With ``jobs > 1`` orders are identified concurrently; the diagram
    is still assembled in ascending order.
    """
    orders = sorted(set(int(k) for k in orders))
    if not orders:
        raise ValueError("order range is empty")
    criteria = criteria or StabilityCriteria()

    def run(k):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                return identify(k), "", tuple(str(w.message) for w in caught)
            except (ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
                return ModalSet(note=str(exc)), f"{type(exc).__name__}: {exc}", ()

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, orders))
    else:
        results = [run(k) for k in orders]

    entries = []
    prev: Optional[ModalSet] = None
    for k, (modes, err, warns) in zip(orders, results):
        if prev is None or err:
            links = tuple(None for _ in modes)
        else:
            links = tuple(_link(m, prev, criteria) for m in modes)
        entries.append(StabilizationEntry(k, modes, links, err, warns))
        prev = None if err else modes
    return StabilizationDiagram(tuple(entries), criteria)


def _chains(diagram: StabilizationDiagram, c: StabilityCriteria) -> list[list[tuple[int, int]]]:
    """Tracks of (entry, mode) instances joined by stable links."""
    chain_of: dict[tuple[int, int], int] = {}
    chains: list[list[tuple[int, int]]] = []
    for i, entry in enumerate(diagram.entries):
        taken = set()
        stable = [
            (lk.df, j, lk.predecessor)
            for j, lk in enumerate(entry.links)
            if lk is not None and lk.stable(c)
        ]
        for _, j, pj in sorted(stable):
            key = (i - 1, pj)
            if pj in taken:
                continue
            taken.add(pj)
            if key not in chain_of:
                chain_of[key] = len(chains)
                chains.append([key])
            cid = chain_of[key]
            chains[cid].append((i, j))
            chain_of[(i, j)] = cid
    return chains


def extract_stable(
    diagram: StabilizationDiagram,
    criteria: Optional[StabilityCriteria] = None,
) -> ModalSet:
    """Modes that stay fully stable over `min_consecutive` successive orders.

    Each qualifying track is summarized by its median frequency and
    damping and by the shape found at its median order. Tracks that never
    coexist at one order and whose medians are within ``df_tol`` are
    treated as one broken track and merged.
    """
    if not diagram.entries:
        raise ValueError("stabilization diagram is empty")
    c = criteria or diagram.criteria
    tracks = [ch for ch in _chains(diagram, c) if len(ch) - 1 >= c.min_consecutive]

    def inst(key):
        i, j = key
        return diagram.entries[i].modes[j]

    groups = sorted(
        ([t] for t in tracks), key=lambda g: np.median([inst(k).frequency for k in g[0]])
    )
    merged: list[list[tuple[int, int]]] = []
    for g in groups:
        members = g[0]
        if merged:
            last = merged[-1]
            f_last = np.median([inst(k).frequency for k in last])
            f_new = np.median([inst(k).frequency for k in members])
            disjoint = not ({i for i, _ in last} & {i for i, _ in members})
            if disjoint and abs(f_new - f_last) / f_last <= c.df_tol:
                last.extend(members)
                continue
        merged.append(list(members))

    modes = []
    for members in merged:
        members = sorted(members)
        f = float(np.median([inst(k).frequency for k in members]))
        z = float(np.median([inst(k).damping for k in members]))
        shape = inst(members[len(members) // 2]).shape
        modes.append(Mode(f, z, shape))
    channels = next((e.modes.channels for e in diagram.entries if e.modes.channels), ())
    note = "" if modes else "no mode met the stability criteria"
    return ModalSet(tuple(modes), note=note, channels=channels)
