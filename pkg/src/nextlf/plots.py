"""Deterministic SVG figures: FRF, stabilization diagram, mode shapes."""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .modes import ModalSet
from .spectral import FrfSamples

__all__ = ["plot_frf", "plot_stabilization", "plot_shapes", "save_svg"]

_RC = {
    "svg.hashsalt": "nextlf",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "font.size": 9,
}
_SIZE = (8.0, 6.0)


def save_svg(fig: Figure, path) -> None:
    """Write `fig` as SVG without timestamps or random element ids."""
    buf = io.BytesIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    path = Path(path)
    try:
        path.write_bytes(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def plot_frf(frf: FrfSamples, path, channels=None) -> None:
    """Log-magnitude and phase of the FRF columns against frequency [Hz]."""
    if not isinstance(frf, FrfSamples):
        raise ValueError("an FRF plot needs FrfSamples")
    rows = range(frf.p) if channels is None else channels
    hz = frf.hz[1:]
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=_SIZE)
        ax_mag, ax_ph = fig.subplots(2, 1, sharex=True)
        for c in rows:
            h = frf.H[c, 1:]
            label = frf.channels[c] if frf.channels else f"ch{c}"
            ax_mag.semilogy(hz, np.abs(h), lw=0.8, label=label)
            ax_ph.plot(hz, np.degrees(np.angle(h)), lw=0.6)
        ax_mag.set_ylabel("|H|")
        ax_ph.set_ylabel("phase [deg]")
        ax_ph.set_xlabel("frequency [Hz]")
        ax_mag.legend(fontsize=6, ncol=4, loc="upper right")
        for ax in (ax_mag, ax_ph):
            ax.grid(True, lw=0.3)
        fig.tight_layout()
    save_svg(fig, path)


_GLYPHS = (
    # (label, marker, colour) by number of stability flags met
    ("new", ".", "0.6"),
    ("freq", "v", "tab:orange"),
    ("freq+damp", "^", "tab:blue"),
    ("stable", "o", "tab:green"),
)


def _glyph(flags):
    if flags is None or not flags[0]:
        return 0
    if flags[0] and flags[1] and flags[2]:
        return 3
    return 2 if flags[1] else 1


def plot_stabilization(diagram: dict, path, modes: ModalSet | None = None) -> None:
    """Pole frequency against model order, one glyph per stability state.

    `diagram` is the JSON form written into reports. Extracted `modes`, if
    given, are drawn as vertical guide lines.
    """
    if not isinstance(diagram, dict) or "entries" not in diagram:
        raise ValueError("a stabilization plot needs a diagram document")
    pts = {g: ([], []) for g in range(len(_GLYPHS))}
    for e in diagram["entries"]:
        for pole in e["poles"]:
            g = _glyph(pole["flags"])
            pts[g][0].append(pole["frequency_hz"])
            pts[g][1].append(e["order"])
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=_SIZE)
        ax = fig.subplots()
        if modes is not None:
            for m in modes:
                ax.axvline(m.frequency, color="0.85", lw=0.8, zorder=0)
        for g, (label, marker, colour) in enumerate(_GLYPHS):
            f, k = pts[g]
            ax.scatter(f, k, s=10, marker=marker, c=colour, label=label, lw=0.5)
        ax.set_xlabel("frequency [Hz]")
        ax.set_ylabel("model order")
        ax.legend(fontsize=7, loc="lower right")
        ax.grid(True, lw=0.3)
        fig.tight_layout()
    save_svg(fig, path)


def plot_shapes(modes: ModalSet, path, max_modes: int = 8) -> None:
    """Real part of each normalized shape against channel position."""
    if not isinstance(modes, ModalSet):
        raise ValueError("a shape plot needs a ModalSet")
    if not len(modes):
        raise ValueError("no modes to plot")
    shown = modes.modes[:max_modes]
    ncol = min(4, len(shown))
    nrow = -(-len(shown) // ncol)
    p = shown[0].shape.size
    labels = list(modes.channels) if len(modes.channels) == p else [str(i) for i in range(p)]
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=_SIZE)
        axes = np.atleast_1d(fig.subplots(nrow, ncol, sharey=True, squeeze=False)).ravel()
        x = np.arange(1, p + 1)
        for ax, (i, m) in zip(axes, enumerate(shown)):
            ax.axhline(0, color="0.7", lw=0.5)
            ax.plot(x, m.shape.real, "o-", ms=3, lw=1)
            ax.set_title(f"mode {i + 1}: {m.frequency:.2f} Hz", fontsize=8)
            ax.set_xticks(x)
            ax.set_xticklabels(labels, fontsize=6, rotation=90)
            ax.set_ylim(-1.1, 1.1)
        for ax in axes[len(shown):]:
            ax.set_visible(False)
        fig.tight_layout()
    save_svg(fig, path)
