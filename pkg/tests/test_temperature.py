import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ehrenlab.errors import ConfigurationError, DomainError
from ehrenlab.temperature import (
    SystemCard,
    boundary_temperature,
    builtin_cards,
    frequency_for,
    read_cards,
    table_report,
    write_report,
)


def test_drum_resonator_c70():
    assert boundary_temperature(1e9).T0 == pytest.approx(4.8e-2, rel=0.005)
    assert boundary_temperature(2e7, 1e-3).ratio_to_reference == pytest.approx(0.96, rel=0.04)
    assert boundary_temperature(1e14).T0 == pytest.approx(4.8e3, rel=0.005)


def test_one_kelvin_frequency():
    assert frequency_for(1.0) == pytest.approx(2.08e10, rel=2e-3)
    assert boundary_temperature(frequency_for(1.0)).T0 == pytest.approx(1.0, rel=1e-14)


@given(nu=st.floats(1e-3, 1e20), c=st.floats(1e-6, 1e6))
def test_linear_in_frequency(nu, c):
    assert boundary_temperature(c * nu).T0 == pytest.approx(c * boundary_temperature(nu).T0, rel=1e-12)


def test_builtin_table():
    rows = {r.name: r for r in table_report(builtin_cards())}
    assert len(rows) == 4
    within = [r for r in rows.values() if r.factor <= 2.1]
    assert len(within) == 3
    flagged = [r.name for r in rows.values() if r.anomaly]
    assert len(flagged) == 1 and "LIGO" in flagged[0]
    ligo = rows[flagged[0]]
    assert ligo.T0 == pytest.approx(4.8e-9, rel=0.005)
    assert ligo.reference_T0 == 1.4e-6


def test_empty_table():
    assert table_report([]) == []


def test_card_validation():
    with pytest.raises(DomainError):
        SystemCard("bad", 0.0)
    with pytest.raises(DomainError):
        SystemCard("bad", 1.0, n_constituents=0.5)
    with pytest.raises(DomainError):
        boundary_temperature(-1.0)
    with pytest.raises(DomainError):
        frequency_for(0.0)


def test_deck_round_trip():
    deck = "name,frequency_hz,reference_T0_K\nA,1e9,0.1\nB,5e3,\n"
    cards = read_cards(io.StringIO(deck))
    assert [c.name for c in cards] == ["A", "B"] and cards[1].reference_T0 is None
    out = io.StringIO()
    write_report(table_report(cards), out)
    lines = out.getvalue().splitlines()
    assert lines[0].startswith("name,frequency_hz,T0_K")
    assert lines[2].endswith(",,,0")


def test_deck_errors():
    with pytest.raises(ConfigurationError, match="frequency_hz"):
        read_cards(io.StringIO("name,nu\nA,1\n"))
    with pytest.raises(ConfigurationError, match="line 2"):
        read_cards(io.StringIO("name,frequency_hz\nA,fast\n"))
