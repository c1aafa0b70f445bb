import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ehrenlab.classical import ClassicalState, PointMass, integrate
from ehrenlab.errors import ConfigurationError, DomainError, ExpansionInvalidError, RegimeWarning
from ehrenlab.grid import Grid1D
from ehrenlab.multipole import (
    BodyModel,
    PointSource,
    TidalToy,
    deformation_profile,
    direct_potential,
    expand_potential,
    monopole_force,
    monopole_newton,
    quadrupole_force,
    taylor_oracle,
    tidal_force_correction,
)

from oracles import kepler_period, taylor_coefficients_mp

SRC = PointSource(5.0, (0.0, 0.0, 0.0), G=1.0)


@st.composite
def bodies(draw):
    n = draw(st.integers(2, 8))
    masses = draw(arrays(float, n, elements=st.floats(0.1, 10.0)))
    pos = draw(arrays(float, (n, 3), elements=st.floats(-1.0, 1.0)))
    if np.max(np.linalg.norm(pos - pos.mean(axis=0), axis=1)) < 1e-3:
        pos = pos + np.eye(n, 3)
    return BodyModel(masses, pos)


def _placement(body, ratio=20.0, direction=(1.0, 0.4, -0.2)):
    u = np.asarray(direction) / np.linalg.norm(direction)
    return u * ratio * body.size


@settings(max_examples=1000)
@given(body=bodies())
def test_dipole_vanishes(body):
    scale = float(np.sum(body.masses * np.linalg.norm(body.positions, axis=1)))
    assert np.linalg.norm(body.dipole_moment) <= 1e-15 * scale
    e = expand_potential(body, SRC, _placement(body))
    assert abs(e.dipole) <= 1e-15 * abs(e.monopole)


@settings(max_examples=40)
@given(body=bodies())
def test_transcription_is_constant_factor(body):
    e = expand_potential(body, SRC, _placement(body))
    assert e.transcription_ratio == pytest.approx(-2.0, rel=1e-9)


def test_two_equal_masses():
    body = BodyModel([1.0, 1.0], [[-0.1, 0, 0], [0.1, 0, 0]])
    e = expand_potential(body, SRC, (5.0, 0, 0))
    assert abs(e.dipole) < 1e-15
    assert body.reduced_masses == pytest.approx([2.0, 2.0])


def test_point_body_is_monopole():
    body = BodyModel.point(3.0)
    e = expand_potential(body, SRC, (2.0, 1.0, 0.0))
    assert e.dipole == 0.0 and e.quadrupole == 0.0
    assert e.value == pytest.approx(direct_potential(body, SRC, (2.0, 1.0, 0.0)), rel=1e-15)
    assert e.monopole == pytest.approx(-SRC.gm0 * 3.0 / math.sqrt(5.0), rel=1e-15)


def test_one_dimensional_positions():
    body = BodyModel([1.0, 3.0], [0.0, 0.4])
    np.testing.assert_allclose(body.positions, [[-0.3, 0, 0], [0.1, 0, 0]], atol=1e-15)


def test_coefficients_against_mpmath():
    rng = np.random.default_rng(3)
    for _ in range(5):
        body = BodyModel(rng.uniform(0.5, 2, 4), rng.uniform(-1, 1, (4, 3)))
        D = _placement(body, 15.0, rng.normal(size=3))
        c = taylor_coefficients_mp(body.masses, body.positions, D, SRC.gm0)
        e = expand_potential(body, SRC, D)
        assert e.monopole == pytest.approx(c[0], rel=1e-13)
        assert abs(e.dipole - c[1]) < 1e-14 * abs(c[0])
        assert e.quadrupole == pytest.approx(c[2], rel=1e-11)
        fit = taylor_oracle(body, SRC, D)
        assert fit[2] == pytest.approx(c[2], rel=1e-7)


def test_expansion_accuracy_improves_with_distance():
    body = BodyModel([1.0, 2.0, 0.5], [[0.3, 0, 0], [-0.1, 0.2, 0], [0, -0.5, 0.3]])
    errs = []
    for ratio in (15.0, 30.0):
        D = _placement(body, ratio)
        e = expand_potential(body, SRC, D)
        errs.append(abs(e.value - direct_potential(body, SRC, D)))
        assert errs[-1] < e.remainder_bound
    # first neglected term is octupole: error ~ (size/d)^4 relative to the 1/d monopole
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.15)


def test_quadrupole_force_is_gradient():
    body = BodyModel([1.0, 2.0, 0.5], [[0.3, 0, 0], [-0.1, 0.2, 0], [0, -0.5, 0.3]])
    D = _placement(body, 20.0)
    h = 1e-5 * np.linalg.norm(D)
    grad = np.array([(expand_potential(body, SRC, D + h * e).quadrupole
                      - expand_potential(body, SRC, D - h * e).quadrupole) / (2 * h) for e in np.eye(3)])
    np.testing.assert_allclose(quadrupole_force(body, SRC, D), -grad, rtol=1e-6)


def test_force_ratio_scaling():
    body = BodyModel([1.0, 2.0, 0.5], [[0.3, 0, 0], [-0.1, 0.2, 0], [0, -0.5, 0.3]])
    d = np.geomspace(12, 120, 5)
    ratio = [np.linalg.norm(quadrupole_force(body, SRC, _placement(body, r)))
             / np.linalg.norm(monopole_force(body, SRC, _placement(body, r))) for r in d]
    slope = np.polyfit(np.log(1 / d), np.log(ratio), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)


def test_regime_guard():
    body = BodyModel([1.0, 1.0], [[-1, 0, 0], [1, 0, 0]])
    with pytest.raises(ExpansionInvalidError):
        expand_potential(body, SRC, (5.0, 0, 0))
    with pytest.raises(DomainError):
        expand_potential(body, SRC, (50.0, 0, 0), order=3)
    with pytest.raises(ConfigurationError):
        BodyModel([1.0, -1.0], [[0, 0, 0], [1, 0, 0]])


def _circular(body, d, steps_per_period=20_000, periods=1):
    v = math.sqrt(SRC.gm0 / d)
    M = body.total_mass
    T = kepler_period(d, SRC.gm0)
    s0 = ClassicalState.single([d, 0, 0], [0, M * v, 0], M)
    return T, monopole_newton(body, SRC, s0, T / steps_per_period, periods * steps_per_period, 10)


def test_monopole_orbit_period():
    body = BodyModel([1.0, 1.0], [[-0.05, 0, 0], [0.05, 0, 0]])
    T, tr = _circular(body, 10.0)
    phase = np.unwrap(np.arctan2(tr.R[:, 0, 1], tr.R[:, 0, 0]))
    T_num = 2 * math.pi / np.polyfit(tr.times, phase, 1)[0]
    assert T_num == pytest.approx(T, rel=1e-6)


def test_monopole_orbit_mass_independent():
    a = BodyModel([1.0, 1.0], [[-0.05, 0, 0], [0.05, 0, 0]])
    b = BodyModel([2.0, 2.0], [[-0.05, 0, 0], [0.05, 0, 0]])
    np.testing.assert_allclose(_circular(a, 10.0, 2000)[1].R, _circular(b, 10.0, 2000)[1].R, atol=1e-12)


def test_monopole_matches_point_mass():
    body = BodyModel([1.0, 3.0], [[-0.05, 0, 0], [0.05, 0, 0]])
    s0 = ClassicalState.single([10, 0, 0], [0, 2.0, 0.3], body.total_mass)
    a = monopole_newton(body, SRC, s0, 1e-2, 2000, 100)
    b = integrate(s0, PointMass(SRC.gm0), 1e-2, 2000, 100)
    np.testing.assert_array_equal(a.R, b.R)


def test_free_limit():
    body = BodyModel([1.0, 1.0], [[-0.05, 0, 0], [0.05, 0, 0]])
    src = PointSource(0.0, (0, 0, 0), 1.0)
    s0 = ClassicalState.single([10, 0, 0], [0, 2.0, 0], 2.0)
    tr = monopole_newton(body, src, s0, 0.01, 100, 10)
    np.testing.assert_allclose(tr.R[:, 0, 1], tr.times, atol=1e-12)


def test_regime_warning_mid_trajectory():
    body = BodyModel([1.0, 1.0], [[-0.5, 0, 0], [0.5, 0, 0]])
    s0 = ClassicalState.single([20, 0, 0], [0, 0.3, 0], 2.0)
    with pytest.warns(RegimeWarning):
        monopole_newton(body, SRC, s0, 1e-2, 6000)


# ---------------------------------------------------------------- tidal toy


@pytest.fixture(scope="module")
def toy():
    return TidalToy(1.0, 1.0, 1.0, 1.0, 2.0, Grid1D(-10.0, 10.0, 2048), K=64)


@pytest.fixture(scope="module")
def tidal(toy):
    return tidal_force_correction(toy, np.geomspace(1e-3, 1e-2, 6))


def test_tidal_parity(tidal):
    for name, value in tidal.parity_terms.items():
        if "dV0" in name:
            assert abs(value) < 1e-10
    assert abs(tidal.internal_F1 - tidal.parity_terms["-<0|dV'|0>"]) < 1e-10


def test_tidal_series_remainder(tidal, toy):
    assert tidal.remainder_slope >= 2.7
    assert tidal.F1 != 0.0
    # the first-order force is -<d V_mp / d d> in the unperturbed ground state
    assert tidal.F1 == pytest.approx(-3 * toy.gm0 * toy.mu / toy.d**4 / (2 * toy.mu * toy.omega), rel=1e-5)


def test_tidal_hellmann_feynman(tidal):
    np.testing.assert_allclose(tidal.oracle_force, tidal.fd_force, atol=1e-6)


def test_tidal_zero_coupling(toy):
    res = tidal_force_correction(toy, np.array([0.0]))
    assert res.oracle_force[0] == pytest.approx(toy.monopole_force, abs=1e-15)
    assert deformation_profile(toy, 0.0).r2_shift == pytest.approx(0.0, abs=1e-14)


def test_deformation_stretches_at_first_order(toy):
    spec = toy.spectrum()
    lams = np.geomspace(1e-3, 1e-2, 6)
    prof = [deformation_profile(toy, lam, spec=spec) for lam in lams]
    shift = np.array([p.r2_shift for p in prof])
    assert np.all(shift > 0)
    slope = np.polyfit(np.log(lams), np.log(shift), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)
    for p in prof:
        assert p.r2_shift == pytest.approx(p.r2_shift_exact, rel=1e-2)
        assert p.induced_quadrupole == pytest.approx(2 * toy.mu * p.r2_shift)


def test_tidal_binding_overcome(toy):
    with pytest.raises(DomainError):
        toy.exact_r2(1e3)
