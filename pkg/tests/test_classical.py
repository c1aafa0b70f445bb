import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehrenlab.classical import (
    ClassicalState,
    ConstantE,
    GravityPair,
    HarmonicField,
    MagneticMoment,
    ManyBodySystem,
    PointMass,
    SpringPair,
    UniformB,
    UniformGravity,
    canonical_many_body,
    integrate,
    lorentz_step_check,
    magnetic_moment_force,
    make_force_field,
)
from ehrenlab.errors import ConfigurationError, DomainError, SingularityError

from oracles import kepler_period


def test_uniform_gravity_drop_is_exact():
    s0 = ClassicalState.single([0, 0, 100.0], [0, 0, 0], 2.0)
    tr = integrate(s0, UniformGravity(9.8), 0.01, 300, 30)
    z = tr.R[:, 0, 2]
    np.testing.assert_allclose(z, 100.0 - 0.5 * 9.8 * tr.times**2, rtol=1e-10)


def test_constant_field_parabola():
    s0 = ClassicalState.single([0, 0, 0], [1.0, 0, 0], 2.0)
    tr = integrate(s0, ConstantE(0.5, (0.0, 3.0, 0.0)), 0.01, 200, 20)
    np.testing.assert_allclose(tr.R[:, 0, 1], 0.5 * (0.5 * 3.0 / 2.0) * tr.times**2, atol=1e-12)
    np.testing.assert_allclose(tr.R[:, 0, 0], 0.5 * tr.times, atol=1e-12)


def test_harmonic_cosine():
    s0 = ClassicalState.single([1, 0, 0], [0, 0, 0], 1.0)
    # Verlet phase error is dt^2 t / 24, about 2.6e-6 at dt = 1e-3 over ten periods
    dt = 5e-4
    n = int(round(10 * 2 * math.pi / dt))
    tr = integrate(s0, HarmonicField(1.0), dt, n, 200)
    assert np.max(np.abs(tr.R[:, 0, 0] - np.cos(tr.times))) < 1e-6


def test_circular_kepler_orbit():
    gm, r = 1.0, 1.0
    T = kepler_period(r, gm)
    s0 = ClassicalState.single([r, 0, 0], [0, math.sqrt(gm / r), 0], 1.0)
    steps = 50_000
    tr = integrate(s0, PointMass(gm), T / steps, 20 * steps, 250)
    radius = np.linalg.norm(tr.R[:, 0], axis=1)
    assert np.max(np.abs(radius - r)) < 1e-8
    Lz = tr.angular_momentum[:, 2]
    assert np.max(np.abs(Lz / Lz[0] - 1)) < 1e-8


def test_energy_error_is_second_order_and_bounded():
    s0 = ClassicalState.single([1, 0, 0], [0, 1.2, 0], 1.0)
    T = kepler_period(1.0 / (2 - 1.44), 1.0)
    C = []
    for steps in (2000, 4000):
        dt = T / steps
        tr = integrate(s0, PointMass(1.0), dt, 10 * steps, 10)
        C.append(np.max(np.abs(tr.energy / tr.energy[0] - 1)) / dt**2)
    assert C[1] == pytest.approx(C[0], rel=0.05)


def test_no_secular_drift_harmonic_million_steps():
    s0 = ClassicalState.single([1, 0, 0], [0, 0, 0], 1.0)
    tr = integrate(s0, HarmonicField(1.0), 0.01, 1_000_000, 10_000)
    rel = np.abs(tr.energy / tr.energy[0] - 1)
    assert rel.max() < 0.01**2
    first, last = rel[: rel.size // 2].max(), rel[rel.size // 2 :].max()
    assert last < 1.05 * first


def test_time_reversal():
    s0 = ClassicalState.single([1, 0.2, 0], [0.1, 1.1, 0.05], 1.0)
    f = PointMass(1.0)
    fwd = integrate(s0, f, 1e-3, 5000, 5000)
    back = ClassicalState(fwd.R[-1], -fwd.P[-1], s0.M)
    rev = integrate(back, f, 1e-3, 5000, 5000)
    np.testing.assert_allclose(rev.R[-1], s0.R, atol=1e-9)
    np.testing.assert_allclose(-rev.P[-1], s0.P, atol=1e-9)


@pytest.mark.parametrize("field", [UniformGravity(1.0), HarmonicField(2.0, (0.1, 0, 0)),
                                   PointMass(1.0, (0.0, 0.0, 0.0), 0.05), ConstantE(1.0, (0.3, 0, 0.1))])
def test_fast_path_matches_python(field):
    s0 = ClassicalState([[1, 0, 0], [0, 1.5, 0.3]], [[0, 1, 0], [-0.8, 0, 0.1]], [1.0, 2.0])
    a = integrate(s0, field, 1e-3, 500, 50)
    b = integrate(s0, field, 1e-3, 500, 50, fast=False)
    np.testing.assert_allclose(a.R, b.R, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(a.energy, b.energy, rtol=1e-12, atol=1e-14)


def test_point_mass_singularity():
    s0 = ClassicalState.single([1, 0, 0], [-1, 0, 0], 1.0)
    with pytest.raises(SingularityError):
        integrate(s0, PointMass(1.0, softening=0.01), 1e-3, 5000)
    with pytest.raises(SingularityError):
        integrate(s0, PointMass(1.0, softening=0.01), 1e-3, 5000, fast=False)


def test_state_validation():
    with pytest.raises(ConfigurationError):
        ClassicalState([[0, 0, 0]], [[0, 0]], [1.0])
    with pytest.raises(ConfigurationError):
        ClassicalState([[0, 0, 0]], [[0, 0, 0]], [0.0])
    with pytest.raises(DomainError):
        integrate(ClassicalState.single([0, 0, 0], [0, 0, 0], 1.0), HarmonicField(1.0), 0.0, 1)
    with pytest.raises(ConfigurationError):
        make_force_field("tachyon")


# ---------------------------------------------------------------- magnetic


def test_unit_cyclotron():
    g = lorentz_step_check(1.0, 1.0, 1.0)
    assert g.cyclotron_freq == pytest.approx(1.0, rel=1e-6)
    assert g.radius == pytest.approx(1.0, rel=1e-6)
    assert g.max_speed_change < 1e-12


@given(Q=st.floats(0.2, 5), B=st.floats(0.2, 5), M=st.floats(0.2, 5), c=st.floats(0.5, 3))
@settings(max_examples=20)
def test_cyclotron_frequency_property(Q, B, M, c):
    g = lorentz_step_check(Q, B, 1.0, M, c, periods=2, steps_per_period=5000)
    assert g.cyclotron_freq == pytest.approx(Q * B / (M * c), rel=1e-6)
    assert g.max_speed_change < 1e-12


def test_radius_halves_with_double_field():
    r1 = lorentz_step_check(1.0, 1.0, 1.0).radius
    r2 = lorentz_step_check(1.0, 2.0, 1.0).radius
    assert r2 == pytest.approx(r1 / 2, rel=1e-6)


def test_parallel_velocity_is_straight():
    g = lorentz_step_check(1.0, [0, 0, 1.0], [0, 0, 2.0])
    assert g.transverse_drift < 1e-12


def test_zero_field_rejected():
    with pytest.raises(DomainError):
        lorentz_step_check(1.0, 0.0, 1.0)


def test_boris_fast_matches_python():
    s0 = ClassicalState([[0, 0, 0], [1, 1, 0]], [[1, 0, 0.2], [0, -2, 0]], [1.0, 3.0])
    f = UniformB([1.0, -0.5], (0.2, 0.1, 1.0), 2.0)
    a = integrate(s0, f, 1e-2, 1000, 100)
    b = integrate(s0, f, 1e-2, 1000, 100, fast=False)
    np.testing.assert_allclose(a.R, b.R, atol=1e-12)
    np.testing.assert_allclose(a.P, b.P, atol=1e-12)


def test_moment_force_examples():
    mu = np.array([0.0, 0.0, 2.0])
    uniform = lambda r: np.array([0.0, 0.0, 5.0])  # noqa: E731
    np.testing.assert_allclose(magnetic_moment_force(mu, uniform, np.ones(3)), 0.0, atol=1e-9)
    b = 3.0
    linear = lambda r: np.array([0.0, 0.0, b * r[2]])  # noqa: E731
    np.testing.assert_allclose(magnetic_moment_force(mu, linear, np.ones(3)), [0, 0, -2.0 * b], rtol=1e-8)
    perp = np.array([1.0, 0.0, 0.0])
    bz = lambda r: np.array([0.0, 0.0, np.sin(r[2])])  # noqa: E731
    np.testing.assert_allclose(magnetic_moment_force(perp, bz, np.ones(3)), 0.0, atol=1e-12)


def test_moment_force_jacobian_matches_fd():
    mu = np.array([0.3, -1.0, 0.7])
    B = lambda r: np.array([r[0] * r[1], np.sin(r[2]), r[0] ** 2])  # noqa: E731
    J = lambda r: np.array([[r[1], r[0], 0], [0, 0, np.cos(r[2])], [2 * r[0], 0, 0]])  # noqa: E731
    R = np.array([0.4, -1.2, 0.9])
    np.testing.assert_allclose(magnetic_moment_force(mu, B, R, J), magnetic_moment_force(mu, B, R), rtol=1e-8)
    with pytest.raises(ConfigurationError):
        magnetic_moment_force(mu, B, R, None, None)


def test_moment_field_conserves_energy():
    mu = (0.0, 0.0, 1.0)
    f = MagneticMoment(mu, lambda r: np.array([0.0, 0.0, 0.5 * r[2] ** 2]),
                       lambda r: np.array([[0, 0, 0], [0, 0, 0], [0, 0, r[2]]]))
    tr = integrate(ClassicalState.single([0, 0, 1.0], [0.2, 0, 0], 1.0), f, 1e-3, 3000, 100)
    assert np.max(np.abs(tr.energy - tr.energy[0])) < 1e-6


# ---------------------------------------------------------------- many-body


def test_two_body_circular_pair():
    G, m, sep = 1.0, 1.0, 1.0
    v = math.sqrt(G * m / (2 * sep))  # each body on a circle of radius sep/2
    T = kepler_period(sep, 2 * G * m)
    s0 = ClassicalState([[0.5, 0, 0], [-0.5, 0, 0]], [[0, m * v, 0], [0, -m * v, 0]], [m, m])
    sys_ = ManyBodySystem(np.array([m, m]), [(0, 1, GravityPair(G * m * m))])
    steps = 20_000
    tr = canonical_many_body(sys_, s0, T / steps, 10 * steps, 200)
    assert np.max(np.abs(tr.P.sum(axis=1))) < 1e-12
    assert np.max(np.abs(tr.energy / tr.energy[0] - 1)) < 1e-8


def test_single_free_body():
    s0 = ClassicalState.single([1, 2, 3], [0.5, -1, 2], 2.0)
    tr = canonical_many_body(ManyBodySystem(np.array([2.0])), s0, 0.1, 100, 10)
    np.testing.assert_array_equal(tr.P[:, 0], np.broadcast_to(s0.P[0], tr.P[:, 0].shape))
    np.testing.assert_allclose(tr.R[:, 0], s0.R[0] + np.outer(tr.times, s0.P[0] / 2.0), atol=1e-12)


def _spring_triangle():
    M = np.array([1.0, 2.0, 3.0])
    pairs = [(0, 1, SpringPair(2.0, 1.0)), (1, 2, SpringPair(1.0)), (0, 2, SpringPair(3.0, 0.5))]
    s0 = ClassicalState([[0, 0, 0], [1.1, 0, 0], [0, 0.9, 0.2]], [[0.1, 0.3, 0], [0, -0.2, 0.1], [0.5, 0, 0]], M)
    return ManyBodySystem(M, pairs), s0


def test_springs_move_centre_of_mass_uniformly():
    sys_, s0 = _spring_triangle()
    tr = canonical_many_body(sys_, s0, 1e-3, 5000, 50)
    cm = np.einsum("i,tia->ta", s0.M, tr.R) / s0.M.sum()
    expected = s0.center_of_mass + np.outer(tr.times, s0.total_momentum / s0.M.sum())
    assert np.max(np.abs(cm - expected)) < 1e-10


def test_pair_kernel_matches_python():
    sys_, s0 = _spring_triangle()
    sys_.pairs.append((0, 1, GravityPair(0.7, 0.2)))
    a = canonical_many_body(sys_, s0, 1e-3, 2000, 100)
    b = canonical_many_body(sys_, s0, 1e-3, 2000, 100, fast=False)
    np.testing.assert_allclose(a.R, b.R, atol=1e-12)
    np.testing.assert_allclose(a.energy, b.energy, rtol=1e-12)


vec3 = st.tuples(*[st.floats(-1, 1)] * 3)


@settings(max_examples=25)
@given(pos=st.lists(vec3, min_size=3, max_size=3), mom=st.lists(vec3, min_size=3, max_size=3),
       masses=st.lists(st.floats(0.5, 3), min_size=3, max_size=3), soft=st.floats(0.3, 1.0))
def test_momentum_conserved_to_round_off(pos, mom, masses, soft):
    R = np.array(pos) + np.array([[0, 0, 0], [3, 0, 0], [0, 3, 0]])
    M = np.array(masses)
    pairs = [(i, j, GravityPair(M[i] * M[j], soft)) for i in range(3) for j in range(i + 1, 3)]
    pairs.append((0, 2, SpringPair(0.5, 2.0)))
    tr = canonical_many_body(ManyBodySystem(M, pairs), ClassicalState(R, mom, M), 1e-3, 2000, 2000)
    P0 = np.sum(mom, axis=0)
    assert np.max(np.abs(tr.P[-1].sum(axis=0) - P0)) < 1e-12


def test_many_body_collision():
    M = np.array([1.0, 1.0])
    s0 = ClassicalState([[0, 0, 0], [1, 0, 0]], [[0.5, 0, 0], [-0.5, 0, 0]], M)
    sys_ = ManyBodySystem(M, [(0, 1, GravityPair(1.0))], min_separation=0.05)
    with pytest.raises(SingularityError):
        canonical_many_body(sys_, s0, 1e-3, 5000)
    with pytest.raises(SingularityError):
        canonical_many_body(sys_, s0, 1e-3, 5000, fast=False)
