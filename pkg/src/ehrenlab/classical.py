"""Symplectic integration of Newtonian point masses (3D, Gaussian units for EM)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .errors import ConfigurationError, DomainError, SingularityError


@dataclass
class ClassicalState:
    R: np.ndarray  # (S, 3)
    P: np.ndarray  # (S, 3)
    M: np.ndarray  # (S,)

    def __post_init__(self):
        self.R = np.atleast_2d(np.asarray(self.R, dtype=float)).copy()
        self.P = np.atleast_2d(np.asarray(self.P, dtype=float)).copy()
        self.M = np.atleast_1d(np.asarray(self.M, dtype=float)).copy()
        if self.R.shape != self.P.shape or self.R.shape[1] != 3 or self.R.shape[0] != self.M.shape[0]:
            raise ConfigurationError("ClassicalState arrays disagree in shape")
        if np.any(self.M <= 0):
            raise ConfigurationError("masses must be positive")

    @classmethod
    def single(cls, r, p, m) -> "ClassicalState":
        return cls(np.reshape(r, (1, 3)), np.reshape(p, (1, 3)), [m])

    def copy(self) -> "ClassicalState":
        return ClassicalState(self.R, self.P, self.M)

    @property
    def velocities(self):
        return self.P / self.M[:, None]

    @property
    def total_momentum(self):
        return self.P.sum(axis=0)

    @property
    def center_of_mass(self):
        return (self.M[:, None] * self.R).sum(axis=0) / self.M.sum()

    def kinetic_energy(self) -> float:
        return float(0.5 * np.sum(self.P**2 / self.M[:, None]))


# ---------------------------------------------------------------- force fields


class ForceField:
    kind = "abstract"
    magnetic = False

    def fused(self) -> dict | None:
        """Parameters for the compiled Verlet kernel, or None to use the Python loop."""
        return None

    def force(self, R, M) -> np.ndarray:
        raise NotImplementedError

    def potential(self, R, M) -> float:
        """Total potential energy; NaN when the field is not conservative."""
        return math.nan

    def check(self, R, initial_R=None):
        pass


@dataclass
class UniformGravity(ForceField):
    g: float
    kind = "uniform_gravity"

    def force(self, R, M):
        F = np.zeros_like(R)
        F[:, 2] = -M * self.g
        return F

    def potential(self, R, M):
        return float(np.sum(M * self.g * R[:, 2]))

    def fused(self):
        return {"accel": (0.0, 0.0, -self.g)}


@dataclass
class HarmonicField(ForceField):
    omega: float
    center: Sequence[float] = (0.0, 0.0, 0.0)
    kind = "harmonic"

    def force(self, R, M):
        return -(M * self.omega**2)[:, None] * (R - np.asarray(self.center))

    def potential(self, R, M):
        d = R - np.asarray(self.center)
        return float(0.5 * self.omega**2 * np.sum(M[:, None] * d * d))

    def fused(self):
        return {"omega2": self.omega**2, "center": tuple(self.center)}


@dataclass
class PointMass(ForceField):
    """Attraction to a fixed mass: F = -G M0 M (R - R0) / (|R - R0|^2 + s^2)^(3/2)."""

    gm0: float
    R0: Sequence[float] = (0.0, 0.0, 0.0)
    softening: float = 0.0
    kind = "point_mass"

    def _sep(self, R):
        return R - np.asarray(self.R0, dtype=float)

    def force(self, R, M):
        d = self._sep(R)
        r2 = np.sum(d * d, axis=1) + self.softening**2
        return -(self.gm0 * M / r2**1.5)[:, None] * d

    def potential(self, R, M):
        d = self._sep(R)
        r = np.sqrt(np.sum(d * d, axis=1) + self.softening**2)
        return float(-np.sum(self.gm0 * M / r))

    def check(self, R, initial_R=None):
        r = np.linalg.norm(self._sep(R), axis=1)
        floor = 10.0 * self.softening
        if initial_R is not None:
            floor = max(floor, 1e-9 * float(np.min(np.linalg.norm(self._sep(initial_R), axis=1))))
        if np.any(r < floor) or np.any(r == 0):
            raise SingularityError(f"body approached the point mass (r = {r.min():.3e})")

    def fused(self):
        return {"gm0": self.gm0, "R0": tuple(self.R0), "soft": self.softening}


@dataclass
class ConstantE(ForceField):
    """Uniform electric field; force Q E on every body (Phi = -E.r)."""

    Q: float | Sequence[float]
    E: Sequence[float]
    kind = "constant_E"

    def force(self, R, M):
        Q = np.broadcast_to(np.asarray(self.Q, dtype=float), M.shape)
        return Q[:, None] * np.asarray(self.E, dtype=float)[None, :]

    def potential(self, R, M):
        Q = np.broadcast_to(np.asarray(self.Q, dtype=float), M.shape)
        return float(-np.sum(Q[:, None] * R * np.asarray(self.E, dtype=float)))

    def fused(self):
        return {"charge": self.Q, "E": tuple(self.E)}


@dataclass
class UniformB(ForceField):
    """Uniform magnetic field, F = (Q/c) v x B (Gaussian units)."""

    Q: float | Sequence[float]
    B: Sequence[float]
    c: float = 1.0
    kind = "uniform_B"
    magnetic = True

    def force(self, R, M):
        return np.zeros_like(R)

    def potential(self, R, M):
        return 0.0


@dataclass
class MagneticMoment(ForceField):
    """Force -grad(mu . B(R)) on a body with fixed moment mu.

    The matching potential energy is +mu . B; the usual dipole energy -mu . B
    flips the sign of the force.
    """

    mu: Sequence[float]
    B_field: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float | None = 1e-6
    kind = "magnetic_moment"

    def force(self, R, M):
        return np.array([magnetic_moment_force(self.mu, self.B_field, r, self.jacobian, self.fd_step) for r in R])

    def potential(self, R, M):
        mu = np.asarray(self.mu, dtype=float)
        return float(sum(np.dot(mu, self.B_field(r)) for r in R))


def magnetic_moment_force(mu, B_field, R, jacobian=None, fd_step: float | None = 1e-6) -> np.ndarray:
    """Return -grad_R (mu . B(R)).

    ``jacobian(R)[i, j] = dB_i/dx_j`` is used when given; otherwise a central
    difference with step ``fd_step``. With neither, the gradient is unavailable.
    """
    mu = np.asarray(mu, dtype=float)
    R = np.asarray(R, dtype=float)
    if jacobian is not None:
        J = np.asarray(jacobian(R), dtype=float)
        return -(mu @ J)
    if fd_step is None:
        raise ConfigurationError("magnetic field gradient unavailable: no jacobian and no fd_step")
    if not callable(B_field):
        raise ConfigurationError("B_field must be callable")
    grad = np.empty(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = fd_step
        grad[j] = (np.dot(mu, B_field(R + e)) - np.dot(mu, B_field(R - e))) / (2 * fd_step)
    return -grad


# ---------------------------------------------------------------- integration


@dataclass
class ClassicalTrajectory:
    times: np.ndarray
    R: np.ndarray  # (T, S, 3)
    P: np.ndarray  # (T, S, 3)
    M: np.ndarray
    energy: np.ndarray
    angular_momentum: np.ndarray  # (T, 3), about the field centre

    def state(self, i: int = -1) -> ClassicalState:
        return ClassicalState(self.R[i], self.P[i], self.M)

    def axis(self, body: int = 0, axis: int = 0):
        return self.R[:, body, axis], self.P[:, body, axis]


def _angular_momentum(R, P, center):
    return np.cross(R - center, P).sum(axis=0)


def _field_center(f):
    for name in ("R0", "center"):
        if hasattr(f, name):
            return np.asarray(getattr(f, name), dtype=float)
    return np.zeros(3)


def _boris_rotate(v, qm_over_c, B, dt):
    t = (0.5 * dt * qm_over_c)[:, None] * B[None, :]
    t2 = np.sum(t * t, axis=1)[:, None]
    s = 2.0 * t / (1.0 + t2)
    v_prime = v + np.cross(v, t)
    return v + np.cross(v_prime, s)



_FUSED_DEFAULTS = {
    "accel": (0.0, 0.0, 0.0),
    "omega2": 0.0,
    "center": (0.0, 0.0, 0.0),
    "gm0": 0.0,
    "R0": (0.0, 0.0, 0.0),
    "soft": 0.0,
    "charge": 0.0,
    "E": (0.0, 0.0, 0.0),
}


@njit(cache=True)
def _fused_force(R, M, Q, accel, omega2, center, gm0, R0, soft, E, F):
    for i in range(R.shape[0]):
        r2 = soft * soft
        for a in range(3):
            d = R[i, a] - R0[a]
            r2 += d * d
        inv3 = gm0 / (r2 * np.sqrt(r2)) if gm0 != 0.0 else 0.0
        for a in range(3):
            F[i, a] = M[i] * (accel[a] - omega2 * (R[i, a] - center[a]) - inv3 * (R[i, a] - R0[a])) + Q[i] * E[a]


@njit(cache=True)
def _fused_energy(R, P, M, Q, accel, omega2, center, gm0, R0, soft, E):
    e = 0.0
    for i in range(R.shape[0]):
        r2 = soft * soft
        for a in range(3):
            d = R[i, a] - R0[a]
            r2 += d * d
            c = R[i, a] - center[a]
            e += 0.5 * P[i, a] * P[i, a] / M[i] - M[i] * accel[a] * R[i, a]
            e += 0.5 * M[i] * omega2 * c * c - Q[i] * E[a] * R[i, a]
        if gm0 != 0.0:
            e -= gm0 * M[i] / np.sqrt(r2)
    return e


@njit(cache=True)
def _fused_verlet(R, P, M, Q, accel, omega2, center, gm0, R0, soft, E, dt, n_steps, record_every,
                  floor, out_R, out_P, out_E):
    """Returns -1 on success or the step index at which a singularity was hit."""
    S = R.shape[0]
    F = np.empty_like(R)
    _fused_force(R, M, Q, accel, omega2, center, gm0, R0, soft, E, F)
    out_R[0] = R
    out_P[0] = P
    out_E[0] = _fused_energy(R, P, M, Q, accel, omega2, center, gm0, R0, soft, E)
    k = 1
    for step in range(1, n_steps + 1):
        for i in range(S):
            for a in range(3):
                P[i, a] += 0.5 * dt * F[i, a]
                R[i, a] += dt * P[i, a] / M[i]
        if gm0 != 0.0:
            for i in range(S):
                r2 = 0.0
                for a in range(3):
                    d = R[i, a] - R0[a]
                    r2 += d * d
                if r2 < floor * floor or r2 == 0.0:
                    return step
        _fused_force(R, M, Q, accel, omega2, center, gm0, R0, soft, E, F)
        for i in range(S):
            for a in range(3):
                P[i, a] += 0.5 * dt * F[i, a]
        if step % record_every == 0 or step == n_steps:
            out_R[k] = R
            out_P[k] = P
            out_E[k] = _fused_energy(R, P, M, Q, accel, omega2, center, gm0, R0, soft, E)
            k += 1
    return -1


@njit(cache=True)
def _boris_kernel(R, V, qm_c, B, dt, n_steps, record_every, out_R, out_V):
    k = 1
    out_R[0] = R
    out_V[0] = V
    for step in range(1, n_steps + 1):
        for i in range(R.shape[0]):
            h = 0.5 * qm_c[i] * dt
            t0, t1, t2 = h * B[0], h * B[1], h * B[2]
            s = 2.0 / (1.0 + t0 * t0 + t1 * t1 + t2 * t2)
            v0, v1, v2 = V[i, 0], V[i, 1], V[i, 2]
            # v' = v + v x t ; v+ = v + v' x s t
            p0 = v0 + (v1 * t2 - v2 * t1)
            p1 = v1 + (v2 * t0 - v0 * t2)
            p2 = v2 + (v0 * t1 - v1 * t0)
            V[i, 0] = v0 + s * (p1 * t2 - p2 * t1)
            V[i, 1] = v1 + s * (p2 * t0 - p0 * t2)
            V[i, 2] = v2 + s * (p0 * t1 - p1 * t0)
            for a in range(3):
                R[i, a] += dt * V[i, a]
        if step % record_every == 0 or step == n_steps:
            out_R[k] = R
            out_V[k] = V
            k += 1


def _integrate_boris(R, P, M, qm_c, B, dt, n_steps, record_every, center):
    n_rec = _n_records(n_steps, record_every)
    out_R = np.empty((n_rec, R.shape[0], 3))
    out_V = np.empty_like(out_R)
    _boris_kernel(R, P / M[:, None], qm_c, B, dt, n_steps, record_every, out_R, out_V)
    out_P = out_V * M[None, :, None]
    steps = np.minimum(np.arange(n_rec) * record_every, n_steps)
    E = 0.5 * np.sum(out_P**2 / M[None, :, None], axis=(1, 2))
    L = np.cross(out_R - center, out_P).sum(axis=1)
    return ClassicalTrajectory(steps * dt, out_R, out_P, M.copy(), E, L)


def _n_records(n_steps, record_every):
    return 1 + n_steps // record_every + (1 if n_steps % record_every else 0)


def _integrate_fused(s0, f, params, dt, n_steps, record_every):
    p = dict(_FUSED_DEFAULTS, **params)
    M = s0.M
    Q = np.ascontiguousarray(np.broadcast_to(np.asarray(p["charge"], dtype=float), M.shape))
    R = s0.R.copy()
    P = s0.P.copy()
    vec = lambda v: np.asarray(v, dtype=float)
    floor = 0.0
    if p["gm0"] != 0.0:
        sep = np.linalg.norm(R - vec(p["R0"]), axis=1)
        floor = max(10.0 * p["soft"], 1e-9 * float(sep.min()))
        f.check(R, R)
    n_rec = _n_records(n_steps, record_every)
    out_R = np.empty((n_rec, R.shape[0], 3))
    out_P = np.empty_like(out_R)
    out_E = np.empty(n_rec)
    bad = _fused_verlet(R, P, M, Q, vec(p["accel"]), float(p["omega2"]), vec(p["center"]), float(p["gm0"]),
                        vec(p["R0"]), float(p["soft"]), vec(p["E"]), dt, n_steps, record_every,
                        floor, out_R, out_P, out_E)
    if bad >= 0:
        raise SingularityError(f"body approached the point mass at step {bad}")
    steps = np.minimum(np.arange(n_rec) * record_every, n_steps)
    center = _field_center(f)
    L = np.cross(out_R - center, out_P).sum(axis=1)
    return ClassicalTrajectory(steps * dt, out_R, out_P, M.copy(), out_E, L)


def integrate(
    s0: ClassicalState,
    f: ForceField,
    dt: float,
    n_steps: int,
    record_every: int = 1,
    fast: bool = True,
) -> ClassicalTrajectory:
    """Velocity Verlet for position-dependent forces, Boris rotation for uniform B."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    params = f.fused()
    if params is not None and fast:
        return _integrate_fused(s0, f, params, dt, n_steps, record_every)
    R = s0.R.copy()
    P = s0.P.copy()
    M = s0.M
    R_init = R.copy()
    center = _field_center(f)
    f.check(R, R_init)

    times, Rs, Ps, Es, Ls = [], [], [], [], []

    def record(step):
        times.append(step * dt)
        Rs.append(R.copy())
        Ps.append(P.copy())
        Es.append(float(0.5 * np.sum(P**2 / M[:, None])) + f.potential(R, M))
        Ls.append(_angular_momentum(R, P, center))

    if f.magnetic:
        Q = np.ascontiguousarray(np.broadcast_to(np.asarray(f.Q, dtype=float), M.shape))
        qm_c = Q / (M * f.c)
        B = np.asarray(f.B, dtype=float)
        if fast:
            return _integrate_boris(R, P, M, qm_c, B, dt, n_steps, record_every, center)
        record(0)
        v = P / M[:, None]
        for step in range(1, n_steps + 1):
            v = _boris_rotate(v, qm_c, B, dt)
            R = R + dt * v
            P = M[:, None] * v
            if step % record_every == 0 or step == n_steps:
                record(step)
    else:
        record(0)
        F = f.force(R, M)
        for step in range(1, n_steps + 1):
            P = P + 0.5 * dt * F
            R = R + dt * P / M[:, None]
            f.check(R, R_init)
            F = f.force(R, M)
            P = P + 0.5 * dt * F
            if step % record_every == 0 or step == n_steps:
                record(step)
    return ClassicalTrajectory(np.array(times), np.array(Rs), np.array(Ps), M.copy(), np.array(Es), np.array(Ls))


@dataclass(frozen=True)
class GyrationCheck:
    cyclotron_freq: float
    radius: float
    expected_freq: float
    expected_radius: float
    max_speed_change: float  # largest per-step relative change of |v|
    transverse_drift: float


def lorentz_step_check(
    Q: float, B, v0, M: float = 1.0, c: float = 1.0, periods: float = 4.0, steps_per_period: int = 20000
) -> GyrationCheck:
    """Run the Boris pusher in a uniform B and measure gyration frequency and radius."""
    # scalars mean B along z and v0 along x
    B = np.array([0.0, 0.0, float(B)]) if np.ndim(B) == 0 else np.asarray(B, dtype=float)
    v0 = np.array([float(v0), 0.0, 0.0]) if np.ndim(v0) == 0 else np.asarray(v0, dtype=float)
    bmag = float(np.linalg.norm(B))
    if bmag == 0:
        raise DomainError("lorentz_step_check requires a non-zero magnetic field")
    omega = abs(Q) * bmag / (M * c)
    T = 2.0 * np.pi / omega
    dt = T / steps_per_period
    n = int(round(periods * steps_per_period))
    s0 = ClassicalState.single(np.zeros(3), M * v0, M)
    traj = integrate(s0, UniformB(Q, B, c), dt, n)
    bhat = B / bmag
    v = traj.P[:, 0, :] / M
    r = traj.R[:, 0, :]
    speed = np.linalg.norm(v, axis=1)
    max_speed_change = float(np.max(np.abs(np.diff(speed))) / speed[0]) if n else 0.0
    v_par = v @ bhat
    v_perp = v - v_par[:, None] * bhat
    r_perp = r - (r @ bhat)[:, None] * bhat
    vperp0 = float(np.linalg.norm(v_perp[0]))
    if vperp0 == 0.0:
        drift = float(np.max(np.linalg.norm(r_perp, axis=1)))
        return GyrationCheck(0.0, 0.0, omega, 0.0, max_speed_change, drift)
    # orthonormal basis of the plane normal to B
    e1 = v_perp[0] / vperp0
    e2 = np.cross(bhat, e1)
    phase = np.unwrap(np.arctan2(v_perp @ e2, v_perp @ e1))
    freq = abs(np.polyfit(traj.times, phase, 1)[0])
    # algebraic circle fit in the (e1, e2) plane
    u, w = r_perp @ e1, r_perp @ e2
    A = np.column_stack([u, w, np.ones_like(u)])
    sol, *_ = np.linalg.lstsq(A, u * u + w * w, rcond=None)
    cu, cw = sol[0] / 2, sol[1] / 2
    radius = math.sqrt(sol[2] + cu * cu + cw * cw)
    return GyrationCheck(freq, radius, omega, vperp0 / omega, max_speed_change, 0.0)


# ---------------------------------------------------------------- many-body


class PairPotential:
    """Translation-invariant pair interaction U(r_ij), r_ij = R_i - R_j."""

    def energy(self, d: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, d: np.ndarray) -> np.ndarray:
        """dU/d(r_ij)."""
        raise NotImplementedError


@dataclass
class GravityPair(PairPotential):
    gmm: float  # G m_i m_j
    softening: float = 0.0

    def energy(self, d):
        return -self.gmm / math.sqrt(float(d @ d) + self.softening**2)

    def gradient(self, d):
        r2 = float(d @ d) + self.softening**2
        return self.gmm * d / r2**1.5


@dataclass
class SpringPair(PairPotential):
    k: float
    rest_length: float = 0.0

    def energy(self, d):
        r = math.sqrt(float(d @ d))
        return 0.5 * self.k * (r - self.rest_length) ** 2

    def gradient(self, d):
        if self.rest_length == 0.0:
            return self.k * d
        r = math.sqrt(float(d @ d))
        return self.k * (r - self.rest_length) * d / r


@dataclass
class ManyBodySystem:
    masses: np.ndarray
    pairs: list[tuple[int, int, PairPotential]] = field(default_factory=list)
    min_separation: float = 0.0

    def forces(self, R):
        F = np.zeros_like(R)
        for i, j, pot in self.pairs:
            d = R[i] - R[j]
            if self.min_separation and float(d @ d) < self.min_separation**2:
                raise SingularityError(f"bodies {i} and {j} collided")
            g = pot.gradient(d)
            F[i] -= g
            F[j] += g
        return F

    def potential(self, R):
        return float(sum(pot.energy(R[i] - R[j]) for i, j, pot in self.pairs))

    def hamiltonian(self, R, P):
        return float(0.5 * np.sum(P**2 / self.masses[:, None])) + self.potential(R)


_GRAVITY, _SPRING = 0, 1


def _pair_table(system):
    """Encode pairs as arrays for the fused kernel, or None if a pair type is not supported."""
    n = len(system.pairs)
    ij = np.empty((n, 2), dtype=np.int64)
    kind = np.empty(n, dtype=np.int64)
    par = np.empty((n, 2))
    for k, (i, j, pot) in enumerate(system.pairs):
        ij[k] = i, j
        if type(pot) is GravityPair:
            kind[k], par[k] = _GRAVITY, (pot.gmm, pot.softening)
        elif type(pot) is SpringPair:
            kind[k], par[k] = _SPRING, (pot.k, pot.rest_length)
        else:
            return None
    return ij, kind, par


@njit(cache=True)
def _pair_forces(R, ij, kind, par, min_sep, F):
    """Fill F; returns the index of a colliding pair or -1."""
    F[:, :] = 0.0
    u = 0.0
    for k in range(ij.shape[0]):
        i, j = ij[k, 0], ij[k, 1]
        d0 = R[i, 0] - R[j, 0]
        d1 = R[i, 1] - R[j, 1]
        d2 = R[i, 2] - R[j, 2]
        r2 = d0 * d0 + d1 * d1 + d2 * d2
        if min_sep > 0.0 and r2 < min_sep * min_sep:
            return k, u
        if kind[k] == 0:
            s2 = r2 + par[k, 1] * par[k, 1]
            c = par[k, 0] / (s2 * np.sqrt(s2))
            u -= par[k, 0] / np.sqrt(s2)
        else:
            r = np.sqrt(r2)
            if par[k, 1] == 0.0:
                c = par[k, 0]
            else:
                c = par[k, 0] * (r - par[k, 1]) / r
            u += 0.5 * par[k, 0] * (r - par[k, 1]) ** 2
        F[i, 0] -= c * d0
        F[i, 1] -= c * d1
        F[i, 2] -= c * d2
        F[j, 0] += c * d0
        F[j, 1] += c * d1
        F[j, 2] += c * d2
    return -1, u


@njit(cache=True)
def _kinetic(P, M):
    e = 0.0
    for i in range(P.shape[0]):
        for a in range(3):
            e += 0.5 * P[i, a] * P[i, a] / M[i]
    return e


@njit(cache=True)
def _fused_kdk(R, P, M, ij, kind, par, min_sep, dt, n_steps, record_every, out_R, out_P, out_E):
    F = np.empty_like(R)
    bad, u = _pair_forces(R, ij, kind, par, min_sep, F)
    if bad >= 0:
        return 0
    out_R[0] = R
    out_P[0] = P
    out_E[0] = _kinetic(P, M) + u
    k = 1
    for step in range(1, n_steps + 1):
        for i in range(R.shape[0]):
            for a in range(3):
                P[i, a] += 0.5 * dt * F[i, a]
                R[i, a] += dt * P[i, a] / M[i]
        bad, u = _pair_forces(R, ij, kind, par, min_sep, F)
        if bad >= 0:
            return step
        for i in range(R.shape[0]):
            for a in range(3):
                P[i, a] += 0.5 * dt * F[i, a]
        if step % record_every == 0 or step == n_steps:
            out_R[k] = R
            out_P[k] = P
            out_E[k] = _kinetic(P, M) + u
            k += 1
    return -1


def canonical_many_body(
    system: ManyBodySystem, s0: ClassicalState, dt: float, n_steps: int, record_every: int = 1,
    fast: bool = True,
) -> ClassicalTrajectory:
    """Kick-drift-kick splitting of dR/dt = dH/dP, dP/dt = -dH/dR for S bodies."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    M = np.asarray(system.masses, dtype=float)
    if M.shape[0] != s0.R.shape[0] or M.shape[0] < 1:
        raise ConfigurationError("system masses must match the state (S >= 1)")
    R, P = s0.R.copy(), s0.P.copy()
    table = _pair_table(system) if fast and system.pairs else None
    if table is not None:
        n_rec = _n_records(n_steps, record_every)
        out_R = np.empty((n_rec, R.shape[0], 3))
        out_P = np.empty_like(out_R)
        out_E = np.empty(n_rec)
        bad = _fused_kdk(R, P, M, *table, float(system.min_separation), dt, n_steps, record_every,
                         out_R, out_P, out_E)
        if bad >= 0:
            raise SingularityError(f"bodies collided at step {bad}")
        steps = np.minimum(np.arange(n_rec) * record_every, n_steps)
        L = np.cross(out_R, out_P).sum(axis=1)
        return ClassicalTrajectory(steps * dt, out_R, out_P, M.copy(), out_E, L)

    times, Rs, Ps, Es, Ls = [], [], [], [], []

    def record(step):
        times.append(step * dt)
        Rs.append(R.copy())
        Ps.append(P.copy())
        Es.append(system.hamiltonian(R, P))
        Ls.append(_angular_momentum(R, P, np.zeros(3)))

    record(0)
    F = system.forces(R)
    for step in range(1, n_steps + 1):
        P = P + 0.5 * dt * F
        R = R + dt * P / M[:, None]
        F = system.forces(R)
        P = P + 0.5 * dt * F
        if step % record_every == 0 or step == n_steps:
            record(step)
    return ClassicalTrajectory(np.array(times), np.array(Rs), np.array(Ps), M.copy(), np.array(Es), np.array(Ls))


def make_force_field(kind: str, **params) -> ForceField:
    kinds = {
        "uniform_gravity": UniformGravity,
        "harmonic": HarmonicField,
        "point_mass": PointMass,
        "constant_E": ConstantE,
        "uniform_B": UniformB,
    }
    if kind not in kinds:
        raise ConfigurationError(f"unknown force field {kind!r}")
    try:
        return kinds[kind](**params)
    except TypeError as exc:
        raise ConfigurationError(f"force field {kind!r}: {exc}") from None
