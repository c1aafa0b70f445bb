"""Time evolution of 1D wave functions and free-packet spreading formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, CorruptStateError, DomainError
from .grid import Grid1D, MomentStats, WaveFunction, check_leakage, moments
from .potentials import PotentialSpec


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    n_steps: int
    record_every: int = 1
    method: str = "split_step"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.record_every < 1 or self.n_steps < 0:
            raise ConfigurationError("record_every >= 1 and n_steps >= 0 required")
        if self.method not in ("split_step", "crank_nicolson"):
            raise ConfigurationError(f"unknown method {self.method!r}")


@dataclass
class QuantumTrajectory:
    times: np.ndarray
    stats: list[MomentStats]
    grid: Grid1D | None = None
    mass: float = 1.0
    states: list[np.ndarray] | None = field(default=None, repr=False)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.stats])

    @property
    def mean_x(self):
        return self.series("mean_x")

    @property
    def mean_p(self):
        return self.series("mean_p")

    @property
    def sigma_x(self):
        return self.series("sigma_x")

    @property
    def sigma_p(self):
        return self.series("sigma_p")

    @property
    def energy(self):
        return self.series("energy")

    @property
    def norm(self):
        return self.series("norm")

    def wavefunctions(self) -> list[WaveFunction]:
        if self.states is None:
            raise ConfigurationError("trajectory was recorded without states (keep_states=False)")
        return [WaveFunction(self.grid, a) for a in self.states]


def _split_step(psi, V, m, cfg, on_record):
    grid = psi.grid
    k2 = grid.k**2 / (2.0 * m)
    half_kin = np.exp(-0.5j * cfg.dt * k2)
    full_kin = half_kin * half_kin
    pot = np.exp(-1j * cfg.dt * V.value(grid.x))
    a = psi.amplitudes.copy()
    step = 0
    while step < cfg.n_steps:
        block = min(cfg.record_every, cfg.n_steps - step)
        # consecutive kinetic half-steps inside a block are fused
        phi = np.fft.fft(a) * half_kin
        for j in range(block):
            a = np.fft.ifft(phi) * pot
            phi = np.fft.fft(a)
            phi *= full_kin if j < block - 1 else half_kin
        a = np.fft.ifft(phi)
        step += block
        on_record(step, a)
    return a


def _cn_operators(grid: Grid1D, V: PotentialSpec, m: float, dt: float):
    n = grid.n_points
    c = 1.0 / (2.0 * m * grid.dx**2)
    diag = 2.0 * c + V.value(grid.x)
    off = -c * np.ones(n - 1)
    H = sp.diags([off, diag, off], [-1, 0, 1], format="lil", dtype=complex)
    H[0, n - 1] = -c
    H[n - 1, 0] = -c
    H = H.tocsc()
    eye = sp.identity(n, dtype=complex, format="csc")
    A = (eye + 0.5j * dt * H).tocsc()
    B = (eye - 0.5j * dt * H).tocsr()
    return splu(A), B


def _crank_nicolson(psi, V, m, cfg, on_record):
    limit = 0.5 * m * psi.grid.dx**2
    if cfg.dt > limit:
        raise ConfigurationError(
            f"crank_nicolson requires dt <= 0.5 m dx^2 / hbar = {limit:.3e}, got {cfg.dt}"
        )
    lu, B = _cn_operators(psi.grid, V, m, cfg.dt)
    a = psi.amplitudes.copy()
    for step in range(1, cfg.n_steps + 1):
        a = lu.solve(B @ a)
        if step % cfg.record_every == 0 or step == cfg.n_steps:
            on_record(step, a)
    return a


def evolve(
    psi0: WaveFunction,
    V: PotentialSpec,
    m: float,
    cfg: EvolutionConfig,
    keep_states: bool = False,
    check_edges: bool = True,
) -> tuple[WaveFunction, QuantumTrajectory]:
    """Integrate i d(psi)/dt = (p^2/2m + V) psi and record moments.

    The initial state is recorded at t = 0, then every ``cfg.record_every``
    steps (and at the final step).
    """
    grid = psi0.grid
    times = [0.0]
    stats = [moments(psi0, V, m)]
    states = [psi0.amplitudes.copy()] if keep_states else None
    if check_edges:
        check_leakage(psi0, 0)

    def on_record(step, a):
        if not np.all(np.isfinite(a)):
            raise CorruptStateError(f"non-finite amplitudes at step {step}")
        w = WaveFunction(grid, a)
        if check_edges:
            check_leakage(w, step)
        times.append(step * cfg.dt)
        stats.append(moments(w, V, m))
        if keep_states:
            states.append(a.copy())

    if cfg.method == "split_step":
        a = _split_step(psi0, V, m, cfg, on_record)
    else:
        a = _crank_nicolson(psi0, V, m, cfg, on_record)
    traj = QuantumTrajectory(np.array(times), stats, grid, m, states)
    return WaveFunction(grid, a), traj


def spread_width(m: float, a: float, t, hbar: float = 1.0):
    """Total Gaussian width a(t) = sqrt(a^2 + 4 hbar^2 t^2 / (m^2 a^2)); Delta x = a(t)/2."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(a * a + 4.0 * hbar**2 * t * t / (m * m * a * a))


def doubling_time(m: float, a: float, hbar: float = 1.0) -> float:
    """Time at which the width a(t) reaches 2a: (sqrt(3)/2) m a^2 / hbar."""
    if not (m > 0 and a > 0):
        raise DomainError("doubling_time requires m > 0 and a > 0")
    return 0.5 * math.sqrt(3.0) * m * a * a / hbar


@dataclass(frozen=True)
class SpreadResult:
    width: float
    asymptotic: float | None  # 2 hbar t / (m a), reported deep in the spreading regime


def asymptotic_spread(m: float, a: float, t: float, hbar: float = 1.0) -> SpreadResult:
    if not (m > 0 and a > 0 and t >= 0):
        raise DomainError("asymptotic_spread requires m, a > 0 and t >= 0")
    width = float(spread_width(m, a, t, hbar))
    lin = 2.0 * hbar * t / (m * a)
    return SpreadResult(width, lin if lin / a > 10 else None)
