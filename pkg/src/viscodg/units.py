"""Unit-suffixed scalar parsing.

Every quantity entering the solver is converted to SI at parse time, so
``"25.6 GPa"`` becomes ``2.56e10`` and ``"3.72 ms"`` becomes ``3.72e-3``.
"""

import re

UNITS = {
    # stress / stiffness
    "Pa": 1.0,
    "kPa": 1e3,
    "MPa": 1e6,
    "GPa": 1e9,
    # density
    "kg/m3": 1.0,
    "g/cm3": 1e3,
    # time
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    # length
    "m": 1.0,
    "km": 1e3,
    "cm": 1e-2,
    "mm": 1e-3,
    # frequency
    "Hz": 1.0,
    "kHz": 1e3,
    "MHz": 1e6,
    # force
    "N": 1.0,
}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*([A-Za-z/0-9]*)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(text, default_unit=None):
    """Parse ``"<number> [unit]"`` and return the SI value as a float.

    A bare number is accepted only when ``default_unit`` is given.
    """
    m = _QUANTITY.match(text)
    if m is None:
        raise UnitError(f"cannot parse quantity {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    if not unit:
        if default_unit is None:
            raise UnitError(f"quantity {text!r} needs a unit suffix")
        unit = default_unit
    if unit not in UNITS:
        raise UnitError(f"unknown unit {unit!r} in {text!r}")
    return value * UNITS[unit]
