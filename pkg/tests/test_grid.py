import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ehrenlab.errors import ConfigurationError, CorruptStateError, DomainError, LeakageError, LeakageWarning
from ehrenlab.grid import (
    GaussianPacketSpec,
    Grid1D,
    WaveFunction,
    check_leakage,
    expect,
    heisenberg_audit,
    make_gaussian,
    moments,
)
from ehrenlab.constants import HBAR_CGS
from ehrenlab.potentials import Harmonic

GRID = Grid1D(-20.0, 20.0, 1024)


def test_grid_geometry():
    g = Grid1D(-1.0, 3.0, 64)
    assert g.dx == 4.0 / 64
    assert g.span == 4.0
    assert g.x[0] == -1.0 and g.x.size == 64
    assert g.k[1] == pytest.approx(2 * math.pi / 4.0)


@pytest.mark.parametrize("args", [(1.0, 0.0, 64), (0.0, 1.0, 32), (0.0, 1.0, 100)])
def test_grid_rejects(args):
    with pytest.raises(ConfigurationError):
        Grid1D(*args)


def test_gaussian_saturates_heisenberg():
    st_ = moments(make_gaussian(GaussianPacketSpec(0.0, 0.0, 1.0, 1.0), GRID))
    assert st_.uncertainty_product == pytest.approx(0.5, rel=1e-6)
    assert abs(st_.mean_p) < 1e-9


def test_gaussian_momentum_shift():
    st_ = moments(make_gaussian(GaussianPacketSpec(0.0, 5.0, 1.0, 1.0), GRID))
    assert st_.mean_p == pytest.approx(5.0, rel=1e-6)


def test_gaussian_position_and_width():
    st_ = moments(make_gaussian(GaussianPacketSpec(2.0, 0.0, 0.5, 1.0), GRID))
    assert st_.mean_x == pytest.approx(2.0, rel=1e-6)
    assert st_.sigma_x == pytest.approx(0.25, rel=1e-6)


@given(x0=st.floats(-5, 5), p0=st.floats(-10, 10), a=st.floats(0.4, 2.0))
def test_gaussian_moments_property(x0, p0, a):
    g = Grid1D(-20.0, 20.0, 2048)
    assert a >= 8 * g.dx
    s = moments(make_gaussian(GaussianPacketSpec(x0, p0, a, 1.0), g))
    assert s.mean_x == pytest.approx(x0, rel=1e-6, abs=1e-9)
    assert s.mean_p == pytest.approx(p0, rel=1e-6, abs=1e-9)
    assert s.sigma_x == pytest.approx(a / 2, rel=1e-6)
    assert s.sigma_p == pytest.approx(1 / a, rel=1e-6)
    assert s.norm == pytest.approx(1.0, abs=1e-8)


@given(coeffs=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                       min_size=1, max_size=6))
def test_any_state_respects_uncertainty(coeffs):
    g = Grid1D(-20.0, 20.0, 1024)
    x = g.x
    psi = sum(c * (x ** j) * np.exp(-x * x / 2) for j, c in enumerate(coeffs))
    if np.max(np.abs(psi)) < 1e-6:
        return
    s = moments(WaveFunction(g, psi).normalized())
    assert s.uncertainty_product >= 0.5 - 1e-9


def test_harmonic_ground_energy():
    s = moments(make_gaussian(GaussianPacketSpec(0.0, 0.0, math.sqrt(2.0), 1.0), GRID), Harmonic(1.0, 1.0))
    assert s.energy == pytest.approx(0.5, rel=1e-6)


def test_packet_validation():
    with pytest.raises(ConfigurationError, match="narrow"):
        make_gaussian(GaussianPacketSpec(0.0, 0.0, 0.05, 1.0), GRID)
    with pytest.raises(ConfigurationError, match="wide"):
        make_gaussian(GaussianPacketSpec(0.0, 0.0, 5.0, 1.0), GRID)
    with pytest.raises(ConfigurationError, match="boundary"):
        make_gaussian(GaussianPacketSpec(15.0, 0.0, 1.0, 1.0), GRID)
    with pytest.raises(ConfigurationError):
        GaussianPacketSpec(0.0, 0.0, -1.0, 1.0)


def test_nan_is_corrupt():
    a = np.ones(GRID.n_points, dtype=complex)
    a[3] = np.nan
    with pytest.raises(CorruptStateError):
        moments(WaveFunction(GRID, a))


def test_leakage_levels():
    x = GRID.x
    centred = WaveFunction(GRID, np.exp(-x * x)).normalized()
    assert check_leakage(centred) < 1e-12
    edge = WaveFunction(GRID, np.exp(-((x - 19.5) ** 2))).normalized()
    with pytest.raises(LeakageError):
        check_leakage(edge)
    slight = WaveFunction(GRID, np.exp(-((x - 14.0) ** 2) / 4.0)).normalized()
    with pytest.warns(LeakageWarning):
        check_leakage(slight)


def test_expect():
    psi = make_gaussian(GaussianPacketSpec(1.0, 0.0, 1.0, 1.0), GRID)
    assert expect(psi, lambda x: x) == pytest.approx(1.0, rel=1e-10)


def test_audit_examples():
    r = heisenberg_audit(1e-4, 1e-6, HBAR_CGS)
    assert r.product == pytest.approx(1e-10)
    assert r.ratio_to_bound == pytest.approx(1.9e17, rel=0.02)
    ligo = heisenberg_audit(1e-16, 4e-10, HBAR_CGS)
    assert ligo.product == pytest.approx(4e-26)
    assert ligo.ratio_to_bound == pytest.approx(76, rel=0.01)
    assert heisenberg_audit(0.5, 1.0).ratio_to_bound == 1.0
    with pytest.raises(DomainError):
        heisenberg_audit(0.0, 1.0)
