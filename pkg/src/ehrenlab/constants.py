"""Physical constants (SI) and the hbar = 1 internal unit system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError

# Exact SI values (2019 redefinition) and CODATA 2018 recommended values.
H = 6.62607015e-34  # J s
HBAR = H / (2.0 * math.pi)  # J s, 1.054571817e-34
K_B = 1.380649e-23  # J / K
G_N = 6.67430e-11  # m^3 kg^-1 s^-2
G_EARTH = 9.80665  # m / s^2
C_LIGHT = 2.99792458e8  # m / s
M_ELECTRON = 9.1093837015e-31  # kg
M_PROTON = 1.67262192369e-27  # kg
M_HYDROGEN = 1.6735575e-27  # kg

# CGS helpers for the order-of-magnitude worked examples.
HBAR_CGS = HBAR * 1e7  # erg s
GRAM = 1e-3  # kg
CM = 1e-2  # m


@dataclass(frozen=True)
class Constants:
    hbar: float = HBAR
    h: float = H
    k_B: float = K_B
    G_N: float = G_N
    g_earth: float = G_EARTH
    h_over_kB: float = field(default=H / K_B)


CONSTANTS = Constants()

# Dimension exponents (length, mass, time).
DIMENSIONS: dict[str, tuple[int, int, int]] = {
    "dimensionless": (0, 0, 0),
    "length": (1, 0, 0),
    "mass": (0, 1, 0),
    "time": (0, 0, 1),
    "frequency": (0, 0, -1),
    "velocity": (1, 0, -1),
    "acceleration": (1, 0, -2),
    "momentum": (1, 1, -1),
    "force": (1, 1, -2),
    "energy": (2, 1, -2),
    "action": (2, 1, -1),
    "stiffness": (0, 1, -2),
    "gm": (3, 0, -2),  # G * M, m^3 s^-2
}


def _exponents(dim) -> tuple[int, int, int]:
    if isinstance(dim, str):
        try:
            return DIMENSIONS[dim]
        except KeyError:
            raise ConfigurationError(f"unknown dimension {dim!r}") from None
    a, b, c = dim
    return int(a), int(b), int(c)


@dataclass(frozen=True)
class UnitSystem:
    """Length and mass scales; the time scale follows from hbar = 1.

    ``time_scale = mass_scale * length_scale**2 / hbar``.
    """

    length_scale: float = 1.0
    mass_scale: float = 1.0
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("length_scale", "mass_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"UnitSystem.{name} must be positive and finite, got {v!r}")

    @property
    def time_scale(self) -> float:
        return self.mass_scale * self.length_scale**2 / self.hbar

    def factor(self, dim) -> float:
        """SI value of one internal unit of the given dimension."""
        a, b, c = _exponents(dim)
        return self.length_scale**a * self.mass_scale**b * self.time_scale**c

    @classmethod
    def natural(cls) -> "UnitSystem":
        """Identity-like system with hbar itself set to 1 (pure internal runs)."""
        return cls(1.0, 1.0, hbar=1.0)


def to_internal(q, dim, u: UnitSystem):
    return q / u.factor(dim)


def from_internal(q, dim, u: UnitSystem):
    return q * u.factor(dim)
