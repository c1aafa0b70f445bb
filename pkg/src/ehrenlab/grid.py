"""Wave functions on a uniform periodic 1D grid (internal units, hbar = 1)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    ConfigurationError,
    CorruptStateError,
    DomainError,
    LeakageError,
    LeakageWarning,
)
from .potentials import Free, PotentialSpec

LEAK_WARN = 1e-6
LEAK_ERROR = 1e-3
EDGE_FRACTION = 0.05


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigurationError("grid requires x_max > x_min")
        n = self.n_points
        if n < 64 or n & (n - 1):
            raise ConfigurationError(f"grid n_points must be a power of two >= 64, got {n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


@dataclass
class WaveFunction:
    grid: Grid1D
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise ConfigurationError("amplitude array does not match grid size")

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density) * self.grid.dx)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes / math.sqrt(self.norm()))

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes.copy())


@dataclass(frozen=True)
class GaussianPacketSpec:
    """psi(x) ~ exp(-(x - x0)^2 / a^2 + i p0 x), so Delta x = a/2."""

    x0: float
    p0: float
    a: float
    m: float

    def __post_init__(self):
        if not (self.a > 0 and self.m > 0):
            raise ConfigurationError("Gaussian packet requires a > 0 and m > 0")


@dataclass(frozen=True)
class MomentStats:
    mean_x: float
    mean_p: float
    sigma_x: float
    sigma_p: float
    energy: float
    norm: float

    @property
    def uncertainty_product(self) -> float:
        return self.sigma_x * self.sigma_p


def make_gaussian(spec: GaussianPacketSpec, grid: Grid1D) -> WaveFunction:
    if spec.a < 4 * grid.dx:
        raise ConfigurationError(
            f"packet too narrow for grid: a={spec.a} < 4*dx={4 * grid.dx}"
        )
    if spec.x0 - grid.x_min < 6 * spec.a or grid.x_max - spec.x0 < 6 * spec.a:
        if 12 * spec.a > grid.span:
            raise ConfigurationError("packet too wide for grid (needs span >= 12 a)")
        raise ConfigurationError("packet too near the grid boundary (needs 6 a clearance)")
    x = grid.x
    psi = np.exp(-((x - spec.x0) ** 2) / spec.a**2 + 1j * spec.p0 * x)
    return WaveFunction(grid, psi).normalized()


def _check_finite(psi: WaveFunction):
    if not np.all(np.isfinite(psi.amplitudes)):
        raise CorruptStateError("wave function contains NaN or infinite amplitudes")


def moments(psi: WaveFunction, potential: PotentialSpec | None = None, m: float = 1.0) -> MomentStats:
    """Position/momentum means, dispersions and <H>; momentum moments are spectral."""
    _check_finite(psi)
    grid = psi.grid
    rho = psi.density
    norm = float(rho.sum() * grid.dx)
    w = rho / rho.sum()
    x = grid.x
    mean_x = float(np.dot(w, x))
    var_x = float(np.dot(w, (x - mean_x) ** 2))

    phi = np.fft.fft(psi.amplitudes)
    wk = np.abs(phi) ** 2
    wk /= wk.sum()
    k = grid.k
    mean_p = float(np.dot(wk, k))
    var_p = float(np.dot(wk, (k - mean_p) ** 2))
    kinetic = float(np.dot(wk, k * k)) / (2.0 * m)
    if potential is None:
        potential = Free()
    energy = kinetic + float(np.dot(w, potential.value(x)))
    return MomentStats(mean_x, mean_p, math.sqrt(max(var_x, 0.0)), math.sqrt(max(var_p, 0.0)), energy, norm)


def expect(psi: WaveFunction, f) -> float:
    """<psi| f(x) |psi> for a function or sampled array."""
    values = f(psi.grid.x) if callable(f) else np.asarray(f)
    return float(np.sum(psi.density * values) * psi.grid.dx / psi.norm())


def edge_leakage(psi: WaveFunction) -> float:
    """Probability in the outer 5% of the grid on either side."""
    n = psi.grid.n_points
    band = max(1, int(round(EDGE_FRACTION * n)))
    rho = psi.density
    return float((rho[:band].sum() + rho[-band:].sum()) * psi.grid.dx / psi.norm())


def check_leakage(psi: WaveFunction, step: int | None = None) -> float:
    leak = edge_leakage(psi)
    where = "" if step is None else f" at step {step}"
    if leak > LEAK_ERROR:
        raise LeakageError(f"boundary leakage {leak:.3e}{where} exceeds {LEAK_ERROR}")
    if leak > LEAK_WARN:
        warnings.warn(f"boundary leakage {leak:.3e}{where}", LeakageWarning, stacklevel=2)
    return leak


@dataclass(frozen=True)
class AuditRecord:
    product: float
    ratio_to_bound: float


def heisenberg_audit(dx_meas: float, dp_meas: float, hbar: float = 1.0) -> AuditRecord:
    """Compare a measured dx*dp with the bound hbar/2 (pass hbar in the inputs' units)."""
    if not (dx_meas > 0 and dp_meas > 0):
        raise DomainError("uncertainties must be positive")
    product = dx_meas * dp_meas
    return AuditRecord(product, product / (0.5 * hbar))
