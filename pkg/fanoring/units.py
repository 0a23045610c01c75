from __future__ import annotations

import math
import re

from scipy import constants


# Units

THZ = 1e12
_FREQUENCY = re.compile(
    r"^\s*(?P<value>[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)\s*(?P<unit>THz|rad/s)?\s*$"
)


def thz_to_rad_s(value: float) -> float:
    """Convert an ordinary frequency in THz to an angular frequency."""
    return 2.0 * math.pi * THZ * value


def rad_s_to_thz(value: float) -> float:
    return value / (2.0 * math.pi * THZ)


def mev_to_joule(value: float) -> float:
    return value * 1e-3 * constants.electron_volt


def parse_frequency(value: object) -> object:
    """Read a number in rad/s, or a string with an explicit THz or rad/s suffix."""
    if isinstance(value, bool) or not isinstance(value, str):
        return value
    match = _FREQUENCY.match(value)
    if match is None:
        raise ValueError(
            f"cannot read frequency {value!r}; use a number in rad/s or a "
            "'THz' / 'rad/s' suffix"
        )
    number = float(match["value"])
    if match["unit"] == "THz":
        return thz_to_rad_s(number)
    return number
