"""Numerical checks of Newton's equations for expectation values of quantum wave packets."""

from .constants import CONSTANTS, UnitSystem, from_internal, to_internal
from .errors import ConfigurationError, DomainError, EhrenlabError, NumericalError
from .grid import GaussianPacketSpec, Grid1D, WaveFunction, heisenberg_audit, make_gaussian, moments
from .propagator import EvolutionConfig, evolve

__version__ = "0.1.0"
