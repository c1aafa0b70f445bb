"""Ehrenfest identities on recorded trajectories and quantum-vs-Newton comparison."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalState, ClassicalTrajectory, ForceField, integrate
from .errors import ConfigurationError, DomainError
from .grid import WaveFunction, expect
from .potentials import PotentialSpec
from .propagator import QuantumTrajectory


@dataclass
class ResidualSeries:
    times: np.ndarray
    residual: np.ndarray
    scale: float  # normalization for the relative residual

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def max_relative(self) -> float:
        return self.max_abs / self.scale if self.scale > 0 else self.max_abs


def _central_derivative(times, y):
    times = np.asarray(times)
    if times.size < 3:
        raise DomainError("Ehrenfest residuals need at least 3 recorded points")
    h = np.diff(times)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise DomainError("recorded times must be uniformly spaced")
    return (y[2:] - y[:-2]) / (2.0 * h[0])


def _uniform_prefix(traj: QuantumTrajectory) -> int:
    """Length of the uniformly spaced part (a trailing short record is dropped)."""
    t = traj.times
    if t.size >= 3 and not np.isclose(t[-1] - t[-2], t[1] - t[0], rtol=1e-9, atol=0):
        return t.size - 1
    return t.size


def verify_ehrenfest1(traj: QuantumTrajectory, m: float | None = None) -> ResidualSeries:
    """Residual d<x>/dt - <p>/m, central difference at interior records."""
    m = traj.mass if m is None else m
    n = _uniform_prefix(traj)
    x, p = traj.mean_x[:n], traj.mean_p[:n]
    res = _central_derivative(traj.times[:n], x) - p[1:-1] / m
    return ResidualSeries(traj.times[1 : n - 1], res, float(np.max(np.abs(p))) / m)


def mean_force(states, V: PotentialSpec) -> np.ndarray:
    """<dV/dx> for each state."""
    return np.array([expect(s, V.gradient) for s in states])


def verify_ehrenfest2(traj: QuantumTrajectory, V: PotentialSpec, psi_series=None) -> ResidualSeries:
    """Residual d<p>/dt + <dV/dx>."""
    if psi_series is None:
        psi_series = traj.wavefunctions()
    n = _uniform_prefix(traj)
    states = list(psi_series)[:n]
    if len(states) != n:
        raise ConfigurationError("psi_series does not match the trajectory records")
    grad = mean_force(states, V)  # raises ConfigurationError for tabulated V without derivative
    res = _central_derivative(traj.times[:n], traj.mean_p[:n]) + grad[1:-1]
    scale = float(np.max(np.abs(grad)))
    return ResidualSeries(traj.times[1 : n - 1], res, scale)


def v_class_difference(traj: QuantumTrajectory, V: PotentialSpec, psi_series=None) -> np.ndarray:
    """<V(x)> - V(<x>) per record: expectation versus evaluation at the centre."""
    if psi_series is None:
        psi_series = traj.wavefunctions()
    return np.array([expect(s, V.value) - float(V.value(np.array([mx]))[0])
                     for s, mx in zip(psi_series, traj.mean_x)])


class AxisPotential(ForceField):
    """A 1D PotentialSpec acting along one Cartesian axis of a 3D body."""

    kind = "axis_potential"

    def __init__(self, V: PotentialSpec, axis: int = 0):
        self.V = V
        self.axis = axis

    def force(self, R, M):
        F = np.zeros_like(R)
        F[:, self.axis] = -self.V.gradient(R[:, self.axis])
        return F

    def potential(self, R, M):
        return float(np.sum(self.V.value(R[:, self.axis])))


def matched_classical(V: PotentialSpec, m: float, x0: float, p0: float, dt: float, n_steps: int,
                      record_every: int = 1, axis: int = 0) -> ClassicalTrajectory:
    """Newtonian trajectory with the same initial mean position/momentum as a packet."""
    r = np.zeros(3)
    p = np.zeros(3)
    r[axis], p[axis] = x0, p0
    return integrate(ClassicalState.single(r, p, m), AxisPotential(V, axis), dt, n_steps, record_every)


@dataclass
class CorrespondenceReport:
    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    x_classical: np.ndarray
    p_classical: np.ndarray
    ehrenfest1_residual: np.ndarray
    ehrenfest2_residual: np.ndarray | None
    deviation: dict = field(default_factory=dict)
    classification: str = "approximate"
    growth_rate: float = 0.0
    span: float = 1.0

    @property
    def max_dx(self) -> float:
        return self.deviation["max_dx"]

    @property
    def max_dx_over_span(self) -> float:
        return self.deviation["max_dx"] / self.span


def compare_to_newton(q: QuantumTrajectory, c: ClassicalTrajectory, V: PotentialSpec | None = None,
                      axis: int = 0, body: int = 0) -> CorrespondenceReport:
    if q.times.shape != c.times.shape or not np.allclose(q.times, c.times, rtol=1e-12, atol=1e-12):
        raise ConfigurationError("quantum and classical time grids differ")
    xc, pc = c.axis(body, axis)
    dx = q.mean_x - xc
    dp = q.mean_p - pc
    r1 = verify_ehrenfest1(q)
    r2 = None
    if V is not None and q.states is not None:
        r2 = verify_ehrenfest2(q, V).residual
    exact = V is not None and V.exact_class
    growth = float(np.polyfit(q.times, np.abs(dx), 1)[0]) if q.times.size > 1 else 0.0
    span = q.grid.span if q.grid is not None else 1.0
    return CorrespondenceReport(
        q.times, q.mean_x, q.mean_p, xc, pc, r1.residual, r2,
        {"max_dx": float(np.max(np.abs(dx))), "max_dp": float(np.max(np.abs(dp)))},
        "exact" if exact else "approximate", growth, span,
    )
