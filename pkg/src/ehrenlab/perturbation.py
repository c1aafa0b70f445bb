"""Nondegenerate Rayleigh-Schroedinger series for H0 + lam V' and Ehrenfest force corrections.

Everything is expressed in the truncated eigenbasis |k> of a finite-difference H0
(hard walls at the grid edges).  Wave-function corrections use the intermediate
normalization <n|psi^(L)> = 0 for L >= 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (
    BasisTruncationError,
    ConfigurationError,
    DegeneracyError,
    DomainError,
    LevelTrackingError,
    TruncationWarning,
)
from .grid import Grid1D, WaveFunction
from .potentials import PotentialSpec

TRUNCATION_TOL = 1e-6
TOP_FRACTION = 0.10


def fd_hamiltonian(V, m: float, grid: Grid1D, hbar: float = 1.0):
    """Diagonal and off-diagonal of the 3-point H = p^2/2m + V with Dirichlet edges."""
    x = grid.x
    c = hbar**2 / (2.0 * m * grid.dx**2)
    values = V.value(x) if isinstance(V, PotentialSpec) else np.asarray(V(x) if callable(V) else V, dtype=float)
    return 2.0 * c + values, np.full(grid.n_points - 1, -c)


def _fix_sign(vecs):
    # deterministic real phase: first sizeable component positive
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        i = int(np.argmax(np.abs(col) > 1e-3 * np.max(np.abs(col))))
        if col[i] < 0:
            vecs[:, j] = -col
    return vecs


@dataclass
class Spectrum:
    energies: np.ndarray
    vectors: np.ndarray  # (n_points, K), columns normalized with sum |psi|^2 dx = 1
    grid: Grid1D
    m: float
    V0: PotentialSpec | None = None

    @property
    def n_states(self) -> int:
        return self.energies.size

    @property
    def gap_min(self) -> float:
        return float(np.min(np.diff(self.energies))) if self.n_states > 1 else math.inf

    @property
    def eigenvectors(self) -> list[WaveFunction]:
        return [WaveFunction(self.grid, self.vectors[:, k]) for k in range(self.n_states)]

    def gram(self) -> np.ndarray:
        return self.vectors.conj().T @ self.vectors * self.grid.dx

    def matrix(self, f) -> np.ndarray:
        """<k| f(x) |l> in this basis."""
        values = _grid_function(f, self.grid)
        return (self.vectors.conj().T * (values * self.grid.dx)) @ self.vectors

    def with_phases(self, theta) -> "Spectrum":
        """Same basis with |k> -> exp(i theta_k)|k>."""
        return Spectrum(self.energies, self.vectors * np.exp(1j * np.asarray(theta))[None, :],
                        self.grid, self.m, self.V0)


def _grid_function(f, grid: Grid1D) -> np.ndarray:
    x = grid.x
    if isinstance(f, PotentialSpec):
        return f.value(x)
    if callable(f):
        return np.asarray(f(x), dtype=float) * np.ones_like(x)
    arr = np.asarray(f, dtype=float)
    return arr * np.ones_like(x) if arr.ndim == 0 else arr


def _gradient_function(V, grid):
    if isinstance(V, PotentialSpec):
        return V.gradient(grid.x)
    raise ConfigurationError("force operator needs an analytic gradient (pass dV explicitly)")


def solve_spectrum(V0: PotentialSpec, m: float, grid: Grid1D, K: int) -> Spectrum:
    """Lowest K eigenpairs of the tridiagonal finite-difference H0."""
    if not 1 <= K <= grid.n_points // 4:
        raise ConfigurationError(f"K must be in [1, n_points/4 = {grid.n_points // 4}], got {K}")
    d, e = fd_hamiltonian(V0, m, grid)
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, K - 1))
    v = _fix_sign(v / math.sqrt(grid.dx))
    spec = Spectrum(w, v, grid, m, V0)
    if K > 1:
        width = w[-1] - w[0]
        if spec.gap_min <= 1e-8 * width:
            raise DegeneracyError(f"near-degenerate spectrum: gap {spec.gap_min:.3e}, width {width:.3e}")
    return spec


@dataclass
class PerturbationSeries:
    n: int
    L_max: int
    energy0: float
    epsilons: np.ndarray  # epsilons[L-1] = eps_L
    wf_corrections: list[np.ndarray]  # coefficients of psi^(L) in |k>, L = 0..L_max
    forces: np.ndarray  # F^(0..L_max)
    force_terms: dict = field(default_factory=dict)
    norms: np.ndarray | None = None  # <psi|psi> Taylor coefficients
    truncation: dict = field(default_factory=dict)
    spectrum: Spectrum | None = field(default=None, repr=False)

    def energy(self, lam: float, order: int | None = None) -> float:
        order = self.L_max if order is None else order
        return self.energy0 + sum(lam ** (L + 1) * self.epsilons[L] for L in range(order))

    def force(self, lam: float, order: int | None = None) -> float:
        order = self.L_max if order is None else order
        return float(sum(lam**L * self.forces[L] for L in range(order + 1)))

    def coefficients(self, lam: float, order: int | None = None) -> np.ndarray:
        order = self.L_max if order is None else order
        return sum(lam**L * self.wf_corrections[L] for L in range(order + 1))

    def state(self, lam: float, order: int | None = None) -> WaveFunction:
        """Normalized psi^(0) + lam psi^(1) + ... on the grid."""
        c = self.coefficients(lam, order)
        s = self.spectrum
        return WaveFunction(s.grid, s.vectors @ c).normalized()


def _guard(name, terms, K, strict, report):
    top = int(math.ceil((1.0 - TOP_FRACTION) * K))
    total = float(np.sum(np.abs(terms)))
    ratio = float(np.sum(np.abs(terms[top:])) / total) if total > 0 else 0.0
    report[name] = ratio
    if ratio > TRUNCATION_TOL:
        msg = f"{name}: top {TOP_FRACTION:.0%} of the basis carries {ratio:.2e} of the sum"
        if strict:
            raise BasisTruncationError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=3)


def _bra_ket(a, A, b):
    return complex(a.conj() @ A @ b)


def perturbation_series(
    spec: Spectrum,
    n: int,
    Vp,
    L_max: int = 2,
    dV0=None,
    dVp=None,
    normalized: bool = False,
    strict: bool = False,
) -> PerturbationSeries:
    """Energies, wave-function coefficients and forces through order L_max.

    ``dV0``/``dVp`` are the operators whose expectation gives the force
    (default: x-derivatives of V0 and V').  Passing other operators covers the
    case where the force acts on a coordinate the basis does not resolve, e.g.
    a centre-of-mass parameter.  ``normalized=True`` returns the Taylor
    coefficients of -<psi|dV|psi>/<psi|psi> instead of the plain expansion.
    """
    K = spec.n_states
    if not 0 <= n < K:
        raise DomainError(f"level n={n} outside the basis of {K} states")
    grid = spec.grid
    Vm = spec.matrix(Vp)
    A0 = spec.matrix(_gradient_function(spec.V0, grid) if dV0 is None else _grid_function(dV0, grid))
    Ap = spec.matrix(_gradient_function(Vp, grid) if dVp is None else _grid_function(dVp, grid))
    E = spec.energies
    denom = E[n] - E
    denom[n] = np.inf  # primed sums: k = n excluded

    c = [np.zeros(K, dtype=complex)]
    c[0][n] = 1.0
    eps = []
    trunc: dict = {}
    for L in range(1, L_max + 1):
        v = Vm @ c[L - 1]
        _guard(f"eps_{L}", Vm[n, :] * c[L - 1], K, strict, trunc)
        eps.append(v[n])
        rhs = v - sum(eps[Kk - 1] * c[L - Kk] for Kk in range(1, L))
        cl = rhs / denom
        cl[n] = 0.0
        _guard(f"psi_{L}", cl, K, strict, trunc)
        c.append(cl)

    forces = np.empty(L_max + 1)
    for L in range(L_max + 1):
        f = -sum(_bra_ket(c[Kk], A0, c[L - Kk]) for Kk in range(L + 1))
        f -= sum(_bra_ket(c[Kk], Ap, c[L - Kk - 1]) for Kk in range(L))
        forces[L] = f.real
    norms = np.array([sum(_bra_ket(c[Kk], np.eye(K), c[L - Kk]) for Kk in range(L + 1)).real
                      for L in range(L_max + 1)])
    if normalized:
        # divide the series by <psi|psi> = 1 + lam^2 N2 + ...
        fn = np.empty_like(forces)
        for L in range(L_max + 1):
            fn[L] = forces[L] - sum(norms[j] * fn[L - j] for j in range(1, L + 1))
        forces = fn

    terms = {}
    if L_max >= 1:
        terms["F1"] = {
            "-<0|dV'|0>": -_bra_ket(c[0], Ap, c[0]).real,
            "-<0|dV0|1>": -_bra_ket(c[0], A0, c[1]).real,
            "-<1|dV0|0>": -_bra_ket(c[1], A0, c[0]).real,
        }
    if L_max >= 2:
        terms["F2"] = {
            "-<0|dV0|2>": -_bra_ket(c[0], A0, c[2]).real,
            "-<1|dV0|1>": -_bra_ket(c[1], A0, c[1]).real,
            "-<2|dV0|0>": -_bra_ket(c[2], A0, c[0]).real,
            "-<0|dV'|1>": -_bra_ket(c[0], Ap, c[1]).real,
            "-<1|dV'|0>": -_bra_ket(c[1], Ap, c[0]).real,
        }
    eps_arr = np.array(eps, dtype=complex)
    if np.all(np.abs(eps_arr.imag) <= 1e-12 * (1 + np.abs(eps_arr.real))):
        eps_arr = eps_arr.real
    return PerturbationSeries(n, L_max, float(E[n]), eps_arr, c, forces, terms, norms, trunc, spec)


def energy_correction(spec: Spectrum, n: int, Vp, L: int, strict: bool = False) -> float:
    if L < 1:
        raise DomainError("energy corrections start at L = 1")
    return perturbation_series(spec, n, Vp, L, dV0=0.0, dVp=0.0, strict=strict).epsilons[L - 1]


def wavefunction_correction(spec: Spectrum, n: int, Vp, L: int, strict: bool = False) -> np.ndarray:
    return perturbation_series(spec, n, Vp, L, dV0=0.0, dVp=0.0, strict=strict).wf_corrections[L]


def force_correction(spec: Spectrum, n: int, V0: PotentialSpec | None, Vp, L: int, dV0=None, dVp=None,
                     normalized: bool = False, strict: bool = False) -> float:
    """F^(L); V0 defaults to the potential the spectrum was built from."""
    if V0 is not None and dV0 is None:
        dV0 = V0.gradient(spec.grid.x)
    return float(perturbation_series(spec, n, Vp, L, dV0, dVp, normalized, strict).forces[L])


@dataclass
class OracleResult:
    """Exact level n of H0 + lam V'; compare ``energy - energy0`` with series shifts."""

    lam: float
    energy: float
    force: float
    energy0: float  # unperturbed level from the same solver call pattern
    overlap: float
    index: int
    state: WaveFunction


def oracle_exact(V0: PotentialSpec, Vp, lam: float, n: int, grid: Grid1D, m: float = 1.0,
                 dV0=None, dVp=None, reference: np.ndarray | None = None, extra_states: int = 8) -> OracleResult:
    """Exact diagonalization of H0 + lam V' on the grid, following level n by overlap."""
    d0, e = fd_hamiltonian(V0, m, grid)
    n_sel = min(n + extra_states, grid.n_points) - 1
    w0 = eigh_tridiagonal(d0, e, eigvals_only=True, select="i", select_range=(0, n_sel))
    if reference is None:
        _, v0 = eigh_tridiagonal(d0, e, select="i", select_range=(n, n))
        reference = v0[:, 0]
    else:
        reference = np.asarray(reference) * math.sqrt(grid.dx)
    vp = _grid_function(Vp, grid)
    w, v = eigh_tridiagonal(d0 + lam * vp, e, select="i", select_range=(0, n_sel))
    ov = np.abs(v.T @ reference.conj()) / np.linalg.norm(reference)
    j = int(np.argmax(ov))
    if ov[j] < 0.5:
        raise LevelTrackingError(f"level {n} lost at lam={lam}: best overlap {ov[j]:.3f}")
    psi = v[:, j] / math.sqrt(grid.dx)
    if np.dot(psi, reference.real) < 0:
        psi = -psi
    a0 = _gradient_function(V0, grid) if dV0 is None else _grid_function(dV0, grid)
    ap = _gradient_function(Vp, grid) if dVp is None else _grid_function(dVp, grid)
    rho = psi * psi * grid.dx
    force = -float(np.dot(rho, a0 + lam * ap))
    return OracleResult(lam, float(w[j]), force, float(w0[n]), float(ov[j]), j, WaveFunction(grid, psi))


def remainder_slope(lams, remainders) -> float:
    """Least-squares slope of log|remainder| against log lam."""
    lams = np.asarray(lams, dtype=float)
    r = np.abs(np.asarray(remainders, dtype=float))
    return float(np.polyfit(np.log(lams), np.log(r), 1)[0])
