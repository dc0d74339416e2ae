import pytest
from hypothesis import given, strategies as st

from viscodg.units import UNITS, UnitError, parse_quantity


def test_gpa_round_trip():
    assert parse_quantity("25.6 GPa") == pytest.approx(2.56e10, rel=1e-15)


@pytest.mark.parametrize("text, value", [
    ("3.72 ms", 3.72e-3), ("2.2 g/cm3", 2200.0), ("0.5 km", 500.0), ("45 Hz", 45.0), ("-1e3 m", -1000.0),
])
def test_common_units(text, value):
    assert parse_quantity(text) == pytest.approx(value, rel=1e-14)


@pytest.mark.parametrize("text", ["", "GPa", "1 parsec", "1.2.3 m", "3 m m"])
def test_rejects_malformed(text):
    with pytest.raises(UnitError):
        parse_quantity(text)


def test_bare_number_needs_default():
    with pytest.raises(UnitError):
        parse_quantity("12")
    assert parse_quantity("12", default_unit="ms") == pytest.approx(0.012)


@given(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from(sorted(UNITS)))
def test_scaling_is_linear(x, unit):
    assert parse_quantity(f"{x!r} {unit}") == pytest.approx(x * UNITS[unit], rel=1e-12, abs=1e-300)
