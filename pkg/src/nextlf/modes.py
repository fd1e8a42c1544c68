"""Identified or analytical modal parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Mode", "ModalSet", "normalize_shape"]


def normalize_shape(phi) -> np.ndarray:
    """Scale `phi` so its largest-magnitude entry equals ``1 + 0j``."""
    phi = np.asarray(phi, dtype=complex)
    peak = phi[np.argmax(np.abs(phi))]
    if peak == 0:
        raise ValueError("cannot normalize a zero mode shape")
    return phi / peak


@dataclass(frozen=True)
class Mode:
    """One mode: natural frequency [Hz], damping ratio, complex shape."""

    frequency: float
    damping: float
    shape: np.ndarray

    def __post_init__(self):
        shape = np.array(self.shape, dtype=complex, copy=True)
        shape.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "damping", float(self.damping))

    @property
    def omega(self) -> float:
        return 2 * np.pi * self.frequency

    def to_dict(self) -> dict:
        return {
            "frequency_hz": self.frequency,
            "damping": self.damping,
            "shape": [[float(z.real), float(z.imag)] for z in self.shape],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Mode":
        shape = np.array([complex(re, im) for re, im in d["shape"]])
        return cls(d["frequency_hz"], d["damping"], shape)


@dataclass(frozen=True)
class ModalSet:
    """Modes sorted by ascending frequency.

    `spurious` collects eigenvalues [rad/s] that were rejected as
    non-physical (unstable or ambiguous); their count is a useful noise
    diagnostic. `note` carries a human-readable diagnostic when no
    physical mode was found.
    """

    modes: tuple[Mode, ...] = ()
    spurious: tuple[complex, ...] = ()
    note: str = ""
    channels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        modes = tuple(sorted(self.modes, key=lambda m: m.frequency))
        for m in modes:
            if not m.frequency > 0:
                raise ValueError(f"mode frequency must be positive, got {m.frequency}")
            if not 0 <= m.damping < 1:
                raise ValueError(f"damping ratio outside [0, 1): {m.damping}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "spurious", tuple(complex(z) for z in self.spurious))
        object.__setattr__(self, "channels", tuple(self.channels))

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i) -> Mode:
        return self.modes[i]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.frequency for m in self.modes])

    @property
    def dampings(self) -> np.ndarray:
        return np.array([m.damping for m in self.modes])

    @property
    def shapes(self) -> np.ndarray:
        """Mode shapes as columns, shape (p, n_modes)."""
        if not self.modes:
            return np.zeros((len(self.channels), 0), dtype=complex)
        return np.column_stack([m.shape for m in self.modes])

    def within(self, f_lo: float, f_hi: float) -> "ModalSet":
        """Modes with ``f_lo <= frequency <= f_hi``."""
        keep = tuple(m for m in self.modes if f_lo <= m.frequency <= f_hi)
        return ModalSet(keep, self.spurious, self.note, self.channels)

    def to_dict(self) -> dict:
        return {
            "channels": list(self.channels),
            "modes": [m.to_dict() for m in self.modes],
            "n_spurious": len(self.spurious),
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModalSet":
        return cls(
            tuple(Mode.from_dict(m) for m in d["modes"]),
            note=d.get("note", ""),
            channels=tuple(d.get("channels", ())),
        )
