import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ehrenlab.constants import (
    CONSTANTS,
    HBAR,
    M_ELECTRON,
    UnitSystem,
    from_internal,
    to_internal,
)
from ehrenlab.errors import ConfigurationError

scales = st.floats(min_value=1e-12, max_value=1e6, allow_nan=False, allow_infinity=False)
values = st.floats(min_value=-1e30, max_value=1e30, allow_nan=False).filter(lambda v: abs(v) > 1e-30)
dims = st.sampled_from(["length", "mass", "time", "energy", "momentum", "action", "force", "frequency"])


def test_h_is_two_pi_hbar():
    assert CONSTANTS.h == pytest.approx(2 * math.pi * CONSTANTS.hbar, rel=1e-12)


def test_h_over_kB_recomputed():
    assert CONSTANTS.h_over_kB == pytest.approx(CONSTANTS.h / CONSTANTS.k_B, rel=1e-12)
    assert CONSTANTS.h_over_kB == pytest.approx(4.8e-11, rel=5e-3)


def test_hbar_maps_to_one():
    u = UnitSystem(1e-6, M_ELECTRON)
    assert to_internal(HBAR, "action", u) == pytest.approx(1.0, rel=1e-14)


def test_identity_cases():
    assert to_internal(1.0, "length", UnitSystem(1.0, 1.0)) == 1.0
    assert to_internal(M_ELECTRON, "mass", UnitSystem(1.0, M_ELECTRON)) == 1.0


def test_time_and_energy_units():
    u = UnitSystem(1e-6, M_ELECTRON)
    t0 = u.time_scale
    assert from_internal(1.0, "time", u) == pytest.approx(t0, rel=1e-14)
    assert from_internal(1.0, "energy", u) == pytest.approx(HBAR / t0, rel=1e-12)


def test_round_trip_action():
    u = UnitSystem(3e-9, 2e-26)
    assert from_internal(to_internal(3.7, "action", u), "action", u) == pytest.approx(3.7, rel=1e-12)


@given(length=scales, mass=scales, q=values, dim=dims)
def test_round_trip_property(length, mass, q, dim):
    u = UnitSystem(length, mass)
    back = from_internal(to_internal(q, dim, u), dim, u)
    assert abs(back - q) <= 1e-12 * abs(q)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_invalid_scales(bad):
    with pytest.raises(ConfigurationError):
        UnitSystem(bad, 1.0)
    with pytest.raises(ConfigurationError):
        UnitSystem(1.0, bad)


def test_unknown_dimension():
    with pytest.raises(ConfigurationError):
        to_internal(1.0, "luminosity", UnitSystem())
