"""One-dimensional potentials V(x) with analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


class PotentialSpec:
    kind: str = "abstract"
    #: Potentials at most quadratic in x, for which Ehrenfest means follow Newton exactly.
    exact_class: bool = False

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class Free(PotentialSpec):
    kind = "free"
    exact_class = True

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def gradient(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Linear(PotentialSpec):
    """V = slope * x, i.e. a constant force -slope."""

    slope: float
    kind = "linear"
    exact_class = True

    def value(self, x):
        return self.slope * np.asarray(x, dtype=float)

    def gradient(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.slope)


@dataclass(frozen=True)
class UniformGravity(PotentialSpec):
    """V = M g z with the grid coordinate playing the role of height z."""

    mass: float
    g: float
    kind = "gravity_uniform"
    exact_class = True

    def value(self, x):
        return self.mass * self.g * np.asarray(x, dtype=float)

    def gradient(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.mass * self.g)


@dataclass(frozen=True)
class Harmonic(PotentialSpec):
    """V = m omega^2 (x - center)^2 / 2."""

    mass: float
    omega: float
    center: float = 0.0
    kind = "harmonic"
    exact_class = True

    def value(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return 0.5 * self.mass * self.omega**2 * y * y

    def gradient(self, x):
        return self.mass * self.omega**2 * (np.asarray(x, dtype=float) - self.center)


@dataclass(frozen=True)
class SoftenedCoulomb(PotentialSpec):
    """Attractive V = -k / sqrt((x - X0)^2 + s^2)."""

    strength: float
    softening: float
    center: float = 0.0
    kind = "softened_coulomb"

    def __post_init__(self):
        if not self.softening > 0:
            raise ConfigurationError("softened_coulomb requires softening > 0")

    def value(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return -self.strength / np.sqrt(y * y + self.softening**2)

    def gradient(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return self.strength * y / (y * y + self.softening**2) ** 1.5


@dataclass(frozen=True)
class Polynomial(PotentialSpec):
    """V = sum_k coeffs[k] * (x - center)^k."""

    coeffs: tuple
    center: float = 0.0
    kind = "polynomial"

    @property
    def exact_class(self):
        return len(np.trim_zeros(np.asarray(self.coeffs, float), "b")) <= 3

    def value(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return np.polynomial.polynomial.polyval(y, self.coeffs)

    def gradient(self, x):
        y = np.asarray(x, dtype=float) - self.center
        return np.polynomial.polynomial.polyval(y, np.polynomial.polynomial.polyder(self.coeffs))


class Tabulated(PotentialSpec):
    """Potential sampled on a grid; the derivative is optional."""

    kind = "tabulated"

    def __init__(self, x, values, derivative=None):
        self.x = np.asarray(x, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.derivative = None if derivative is None else np.asarray(derivative, dtype=float)
        if self.x.shape != self.values.shape:
            raise ConfigurationError("tabulated potential: x and values differ in length")
        if self.derivative is not None and self.derivative.shape != self.x.shape:
            raise ConfigurationError("tabulated potential: derivative length mismatch")

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        tol = 1e-9 * max(1.0, float(np.ptp(self.x)))
        if x.min() < self.x[0] - tol or x.max() > self.x[-1] + tol:
            raise ConfigurationError("tabulated samples do not cover the requested grid")
        return x

    def value(self, x):
        return np.interp(self._check(x), self.x, self.values)

    def gradient(self, x):
        if self.derivative is None:
            raise ConfigurationError("tabulated potential has no derivative samples")
        return np.interp(self._check(x), self.x, self.derivative)


class Sum(PotentialSpec):
    kind = "sum"

    def __init__(self, *terms: PotentialSpec):
        self.terms = terms

    @property
    def exact_class(self):
        return all(t.exact_class for t in self.terms)

    def value(self, x):
        return sum(t.value(x) for t in self.terms)

    def gradient(self, x):
        return sum(t.gradient(x) for t in self.terms)


_KINDS = {
    "free": Free,
    "linear": Linear,
    "gravity_uniform": UniformGravity,
    "harmonic": Harmonic,
    "softened_coulomb": SoftenedCoulomb,
    "polynomial": Polynomial,
}


def make_potential(kind: str, **params) -> PotentialSpec:
    """Build a potential from a kind name and keyword parameters (config files)."""
    if kind == "tabulated":
        return Tabulated(params["x"], params["values"], params.get("derivative"))
    if kind not in _KINDS:
        raise ConfigurationError(f"unknown potential kind {kind!r}")
    if kind == "polynomial" and "coeffs" in params:
        params = dict(params, coeffs=tuple(params["coeffs"]))
    try:
        return _KINDS[kind](**params)
    except TypeError as exc:
        raise ConfigurationError(f"potential {kind!r}: {exc}") from None
