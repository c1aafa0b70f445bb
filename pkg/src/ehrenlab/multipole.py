"""Multipole expansion of a point-source gravitational potential about a body's CM,
and a 1D two-particle tidal toy solved with the perturbation engine.

Working convention is attractive: V = -G M0 sum_i m_i / |r_i - R0|.  The
alternative transcription (repulsive-looking overall sign, quadrupole terms
-1 and +3 without M0) is kept alongside as ``quadrupole_transcribed`` so the
two can be compared against the Taylor oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalState, ClassicalTrajectory, PointMass, integrate
from .constants import G_N
from .errors import ConfigurationError, DomainError, ExpansionInvalidError, RegimeWarning
from .grid import Grid1D, WaveFunction, expect
from .perturbation import (
    Spectrum,
    oracle_exact,
    perturbation_series,
    remainder_slope,
    solve_spectrum,
)
from .potentials import Harmonic, Polynomial

REGIME_MAX = 0.1  # L0 / d


def _recentre(masses, positions):
    M = masses.sum()
    r = positions - (masses @ positions) / M
    # second pass removes most of the round-off left by the first
    return r - (masses @ r) / M


@dataclass
class BodyModel:
    """Point constituents with positions measured from their centre of mass."""

    masses: np.ndarray
    positions: np.ndarray  # (N, 3); recentred on construction
    springs: list = field(default_factory=list)  # (i, j, kappa)

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None] * np.array([1.0, 0.0, 0.0])
        if pos.shape != (self.masses.size, 3):
            raise ConfigurationError("positions must be (N, 3) matching the masses")
        if np.any(self.masses <= 0):
            raise ConfigurationError("constituent masses must be positive")
        self.positions = _recentre(self.masses, pos)

    @classmethod
    def point(cls, mass: float) -> "BodyModel":
        return cls(np.array([mass]), np.zeros((1, 3)))

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def reduced_masses(self) -> np.ndarray:
        """mu_i from 1/mu_i = 1/m_i - 1/M (infinite for a single constituent)."""
        inv = 1.0 / self.masses - 1.0 / self.total_mass
        with np.errstate(divide="ignore"):
            return np.where(inv > 0, 1.0 / np.where(inv > 0, inv, 1.0), np.inf)

    @property
    def size(self) -> float:
        return float(np.max(np.linalg.norm(self.positions, axis=1)))

    @property
    def dipole_moment(self) -> np.ndarray:
        return np.array([math.fsum(self.masses * self.positions[:, a]) for a in range(3)])

    @property
    def quadrupole_tensor(self) -> np.ndarray:
        """Q_ab = sum m (3 r_a r_b - r^2 delta_ab)."""
        r = self.positions
        r2 = np.sum(r * r, axis=1)
        return 3.0 * np.einsum("i,ia,ib->ab", self.masses, r, r) - np.eye(3) * np.dot(self.masses, r2)


@dataclass(frozen=True)
class PointSource:
    mass: float
    position: tuple = (0.0, 0.0, 0.0)
    G: float = G_N

    @property
    def gm0(self) -> float:
        return self.G * self.mass

    @property
    def R0(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


@dataclass
class MultipoleExpansion:
    center: np.ndarray
    separation: np.ndarray  # d = R - R0
    monopole: float
    dipole: float
    quadrupole: float  # standard Taylor term, attractive sign
    quadrupole_transcribed: float  # -G sum m r^2/d^3 + 3 G sum m (r.d)^2/d^5, as written
    order: int
    remainder_bound: float
    source_mass: float

    @property
    def value(self) -> float:
        terms = [self.monopole, self.dipole, self.quadrupole][: self.order + 1]
        return float(sum(terms))

    @property
    def transcription_ratio(self) -> float:
        """Transcribed quadrupole (with the missing M0 restored) over the standard one."""
        if self.quadrupole == 0:
            return math.nan
        return self.quadrupole_transcribed * self.source_mass / self.quadrupole


def _quadrupole_terms(body: BodyModel, d):
    dn = np.linalg.norm(d)
    r = body.positions
    rd = r @ d
    s_r2 = float(np.dot(body.masses, np.sum(r * r, axis=1)))
    s_rd2 = float(np.dot(body.masses, rd * rd))
    return dn, s_r2, s_rd2


def expand_potential(body: BodyModel, source: PointSource, center=None, order: int = 2) -> MultipoleExpansion:
    """Monopole, dipole and quadrupole terms of the source potential at the body's CM."""
    if order not in (0, 1, 2):
        raise DomainError("expansion order must be 0, 1 or 2")
    R = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    d = R - source.R0
    dn, s_r2, s_rd2 = _quadrupole_terms(body, d)
    if dn == 0 or body.size / dn >= REGIME_MAX:
        raise ExpansionInvalidError(
            f"size/distance = {body.size / dn if dn else math.inf:.3g} outside the expansion regime (< {REGIME_MAX})"
        )
    G, M0, M = source.G, source.mass, body.total_mass
    mono = -G * M * M0 / dn
    dip = G * M0 * float(body.dipole_moment @ d) / dn**3
    quad = -G * M0 * (3.0 * s_rd2 / dn**5 - s_r2 / dn**3) / 2.0
    quad_tr = -G * s_r2 / dn**3 + 3.0 * G * s_rd2 / dn**5
    bound = abs(mono) * (body.size / dn) ** 3
    return MultipoleExpansion(R, d, mono, dip, quad, quad_tr, order, bound, M0)


def direct_potential(body: BodyModel, source: PointSource, center=None) -> float:
    R = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    dist = np.linalg.norm(body.positions + R - source.R0, axis=1)
    return float(-source.G * source.mass * np.sum(body.masses / dist))


def taylor_oracle(body: BodyModel, source: PointSource, center=None, degree: int = 12, n_nodes: int = 41):
    """Taylor coefficients c_k of V(eps) = -G M0 sum m_i/|d + eps r_i| at eps = 0.

    Fitted on Chebyshev nodes in eps in [-1, 1]; with size/d < 0.1 the series
    converges geometrically and the fit recovers c_0..c_2 to ~1e-11 relative.
    """
    R = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    d = R - source.R0
    eps = np.cos(np.pi * (np.arange(n_nodes) + 0.5) / n_nodes)
    r = body.positions
    vals = np.array([-source.G * source.mass * np.sum(body.masses / np.linalg.norm(d + e * r, axis=1)) for e in eps])
    cheb = np.polynomial.chebyshev.Chebyshev.fit(eps, vals, degree, domain=[-1, 1])
    return cheb.convert(kind=np.polynomial.Polynomial).coef[:3]


def quadrupole_force(body: BodyModel, source: PointSource, center=None) -> np.ndarray:
    """-grad_R of the standard quadrupole term."""
    R = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    d = R - source.R0
    dn = np.linalg.norm(d)
    r = body.positions
    m = body.masses
    rd = r @ d
    r2 = np.sum(r * r, axis=1)
    # V_q = -G M0/2 sum m [3 (r.d)^2 / d^5 - r^2 / d^3]
    grad = np.einsum("i,ia->a", m * 6.0 * rd / dn**5, r) + d * np.dot(m, -15.0 * rd**2 / dn**7 + 3.0 * r2 / dn**5)
    return 0.5 * source.G * source.mass * grad


def monopole_force(body: BodyModel, source: PointSource, center=None) -> np.ndarray:
    R = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    d = R - source.R0
    return -source.G * source.mass * body.total_mass * d / np.linalg.norm(d) ** 3


def monopole_newton(body: BodyModel, source: PointSource, s0: ClassicalState, dt: float, n: int,
                    record_every: int = 1) -> ClassicalTrajectory:
    """CM trajectory under the monopole force; warns if the expansion regime is left."""
    field_ = PointMass(source.gm0, source.R0)
    s = ClassicalState.single(s0.R[0], s0.P[0], body.total_mass)
    traj = integrate(s, field_, dt, n, record_every)
    if body.size > 0:
        dist = np.linalg.norm(traj.R[:, 0, :] - source.R0, axis=1)
        ratio = body.size / np.min(dist)
        if ratio >= REGIME_MAX:
            warnings.warn(f"size/distance reached {ratio:.3g} along the trajectory", RegimeWarning, stacklevel=2)
    return traj


# ---------------------------------------------------------------- 1D tidal toy


@dataclass
class TidalToy:
    """Two masses on a spring, colinear with a point source at CM distance d.

    Internal coordinate r = x1 - x2 with reduced mass mu; the quadrupole term of
    the attractive potential is V_mp(r) = -G M0 mu r^2 / d^3 (it stretches the body).
    """

    m1: float
    m2: float
    kappa: float
    gm0: float
    d: float
    grid: Grid1D
    K: int = 64

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2

    @property
    def mu(self) -> float:
        return self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def omega(self) -> float:
        return math.sqrt(self.kappa / self.mu)

    @property
    def V0(self) -> Harmonic:
        return Harmonic(self.mu, self.omega)

    def tidal_strength(self, d: float | None = None) -> float:
        d = self.d if d is None else d
        return self.gm0 * self.mu / d**3

    def V_mp(self, d: float | None = None) -> Polynomial:
        return Polynomial((0.0, 0.0, -self.tidal_strength(d)))

    def dV_mp_dd(self, r):
        """d V_mp / d d at fixed internal r."""
        return 3.0 * self.gm0 * self.mu * np.asarray(r) ** 2 / self.d**4

    @property
    def monopole_force(self) -> float:
        return -self.gm0 * self.total_mass / self.d**2

    def spectrum(self) -> Spectrum:
        return solve_spectrum(self.V0, self.mu, self.grid, self.K)

    def exact_r2(self, lam: float) -> float:
        """<r^2> of the ground state with the softened spring, hbar = 1."""
        w2 = self.omega**2 - 2.0 * lam * self.tidal_strength() / self.mu
        if w2 <= 0:
            raise DomainError("tidal term overcomes the binding")
        return 1.0 / (2.0 * self.mu * math.sqrt(w2))


@dataclass
class TidalResult:
    lams: np.ndarray
    monopole_force: float
    F1: float
    F2: float
    series_force: np.ndarray  # monopole + lam F1 + lam^2 F2
    oracle_force: np.ndarray  # Hellmann-Feynman on the exact state
    fd_force: np.ndarray  # -dE/dd by central difference
    remainder_slope: float
    parity_terms: dict  # F^(1) pieces in the internal coordinate
    internal_F1: float


def tidal_force_correction(toy: TidalToy, lams, n: int = 0, fd_step: float = 1e-4) -> TidalResult:
    lams = np.asarray(lams, dtype=float)
    spec = toy.spectrum()
    Vmp = toy.V_mp()
    ser = perturbation_series(spec, n, Vmp, 2, dV0=0.0, dVp=toy.dV_mp_dd)
    internal = perturbation_series(spec, n, Vmp, 1)  # x-derivative generator
    series = toy.monopole_force + lams * ser.forces[1] + lams**2 * ser.forces[2]
    oracle = np.empty_like(lams)
    fd = np.empty_like(lams)
    h = fd_step * toy.d
    for i, lam in enumerate(lams):
        o = oracle_exact(toy.V0, Vmp, lam, n, toy.grid, toy.mu, dV0=0.0, dVp=toy.dV_mp_dd)
        oracle[i] = toy.monopole_force + o.force
        e = []
        for dd in (toy.d + h, toy.d - h):
            Vd = Polynomial((0.0, 0.0, -toy.tidal_strength(dd)))
            e.append(oracle_exact(toy.V0, Vd, lam, n, toy.grid, toy.mu, dV0=0.0, dVp=0.0).energy)
        fd[i] = toy.monopole_force - (e[0] - e[1]) / (2.0 * h)
    rem = oracle - series
    slope = remainder_slope(lams, rem) if lams.size > 1 and np.all(rem != 0) else math.nan
    return TidalResult(lams, toy.monopole_force, float(ser.forces[1]), float(ser.forces[2]), series, oracle, fd,
                       slope, internal.force_terms["F1"], float(internal.forces[1]))


@dataclass
class DeformationProfile:
    lam: float
    r2_shift: float  # from the second-order series state
    r2_shift_exact: float
    induced_quadrupole: float  # sum m (3 r~^2 - r~^2) = 2 mu <r^2> shift in 1D


def deformation_profile(toy: TidalToy, lam: float, n: int = 0, spec: Spectrum | None = None) -> DeformationProfile:
    spec = toy.spectrum() if spec is None else spec
    ser = perturbation_series(spec, n, toy.V_mp(), 2, dV0=0.0, dVp=0.0)
    r2 = lambda x: x * x  # noqa: E731
    base = expect(WaveFunction(toy.grid, spec.vectors[:, n]), r2)
    shift = expect(ser.state(lam), r2) - base
    exact = toy.exact_r2(lam) - toy.exact_r2(0.0)
    return DeformationProfile(lam, shift, exact, 2.0 * toy.mu * shift)
