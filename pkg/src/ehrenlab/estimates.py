"""Order-of-magnitude calculators in physical units: spreading times and uncertainty budgets."""

from __future__ import annotations

from dataclasses import dataclass

from .constants import GRAM, HBAR, HBAR_CGS, M_ELECTRON, M_HYDROGEN
from .grid import AuditRecord, heisenberg_audit
from .propagator import doubling_time, spread_width

MICRON = 1e-6  # m


@dataclass(frozen=True)
class DoublingRow:
    name: str
    mass: float  # kg
    width: float  # m, the packet parameter a
    doubling_time: float  # s
    reference: float | None = None  # s

    @property
    def ratio(self) -> float | None:
        return None if self.reference is None else self.doubling_time / self.reference


def doubling_time_si(mass_kg: float, a_m: float) -> float:
    return doubling_time(mass_kg, a_m, HBAR)


def spread_si(mass_kg: float, a_m: float, t_s: float) -> float:
    """Total width a(t) in metres."""
    return float(spread_width(mass_kg, a_m, t_s, HBAR))


# quoted one-significant-figure values for a 1 micron packet
REFERENCE_DOUBLING = (
    ("electron", M_ELECTRON, 1e-8),
    ("hydrogen", M_HYDROGEN, 1e-5),
    ("1 g body", GRAM, 1e19),
)


def doubling_table(width: float = MICRON, rows=REFERENCE_DOUBLING) -> list[DoublingRow]:
    return [DoublingRow(name, m, width, doubling_time_si(m, width), ref) for name, m, ref in rows]


@dataclass(frozen=True)
class MirrorAudit:
    dp: float  # g cm / s
    dx: float  # cm
    record: AuditRecord


def mirror_audit(mass_g: float, amplitude_cm: float, frequency_hz: float) -> MirrorAudit:
    """Oscillating mirror: dp ~ M x nu, dx ~ x, compared with hbar/2 in cgs.

    Uses the cyclic frequency without 2 pi, as in the usual back-of-envelope estimate.
    """
    dp = mass_g * amplitude_cm * frequency_hz
    return MirrorAudit(dp, amplitude_cm, heisenberg_audit(amplitude_cm, dp, HBAR_CGS))


def rule_of_thumb_audit(dp_cgs: float = 1e-6, dx_cm: float = 1e-4) -> AuditRecord:
    """Macroscopic measurement precision (g cm/s, cm) against hbar/2."""
    return heisenberg_audit(dx_cm, dp_cgs, HBAR_CGS)
