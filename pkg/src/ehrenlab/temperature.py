"""Quantum-classical boundary temperature T0 = h nu / k_B and the reference table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .constants import CONSTANTS
from .errors import ConfigurationError, DomainError

ANOMALY_BAND = 3.0
TABLE_COLUMNS = ("name", "size", "n_constituents", "frequency_hz", "reference_T0_K")


@dataclass(frozen=True)
class SystemCard:
    name: str
    frequency: float  # Hz
    size: str = ""
    n_constituents: float = 1.0
    reference_T0: float | None = None  # K

    def __post_init__(self):
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise DomainError(f"{self.name}: frequency must be positive, got {self.frequency}")
        if not self.n_constituents >= 1:
            raise DomainError(f"{self.name}: N must be >= 1")


@dataclass(frozen=True)
class TemperatureEstimate:
    T0: float
    ratio_to_reference: float | None = None


def boundary_temperature(nu: float, reference: float | None = None) -> TemperatureEstimate:
    if not nu > 0:
        raise DomainError(f"frequency must be positive, got {nu}")
    T0 = nu * CONSTANTS.h_over_kB
    return TemperatureEstimate(T0, None if reference is None else T0 / reference)


def frequency_for(T0: float) -> float:
    """Inverse of the linear relation."""
    if not T0 > 0:
        raise DomainError("temperature must be positive")
    return T0 / CONSTANTS.h_over_kB


@dataclass(frozen=True)
class TableRow:
    name: str
    frequency: float
    T0: float
    reference_T0: float | None
    ratio: float | None  # reference / computed, >= 1 means the table is warmer
    factor: float | None  # max(ratio, 1/ratio)
    anomaly: bool


def table_report(cards) -> list[TableRow]:
    rows = []
    for c in cards:
        est = boundary_temperature(c.frequency)
        if c.reference_T0 is None:
            rows.append(TableRow(c.name, c.frequency, est.T0, None, None, None, False))
            continue
        ratio = c.reference_T0 / est.T0
        factor = max(ratio, 1.0 / ratio)
        rows.append(TableRow(c.name, c.frequency, est.T0, c.reference_T0, ratio, factor, factor > ANOMALY_BAND))
    return rows


def _parse_optional(value: str):
    value = value.strip()
    return float(value) if value else None


def read_cards(source) -> list[SystemCard]:
    """Read a card deck (CSV with the TABLE_COLUMNS header) from a path or text stream."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_cards(fh)
    reader = csv.DictReader(source)
    missing = [c for c in ("name", "frequency_hz") if c not in (reader.fieldnames or [])]
    if missing:
        raise ConfigurationError(f"card deck missing columns: {', '.join(missing)}")
    cards = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            cards.append(SystemCard(
                name=rec["name"],
                frequency=float(rec["frequency_hz"]),
                size=rec.get("size", "") or "",
                n_constituents=float(rec.get("n_constituents") or 1.0),
                reference_T0=_parse_optional(rec.get("reference_T0_K") or ""),
            ))
        except ValueError as exc:
            raise ConfigurationError(f"card deck line {lineno}: {exc}") from exc
    return cards


def builtin_cards() -> list[SystemCard]:
    text = resources.files("ehrenlab.data").joinpath("boundary_temperatures.csv").read_text(encoding="utf-8")
    return read_cards(io.StringIO(text))


def builtin_table_text() -> str:
    return resources.files("ehrenlab.data").joinpath("boundary_temperatures.csv").read_text(encoding="utf-8")


def write_report(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["name", "frequency_hz", "T0_K", "reference_T0_K", "ratio", "factor", "anomaly"])
    for r in rows:
        w.writerow([r.name, repr(r.frequency), repr(r.T0),
                    "" if r.reference_T0 is None else repr(r.reference_T0),
                    "" if r.ratio is None else repr(r.ratio),
                    "" if r.factor is None else repr(r.factor), int(r.anomaly)])
