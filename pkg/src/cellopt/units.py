"""dB / dBm conversion helpers.

All internal math works in linear units (watts, hertz, bits/s).  Decibel
values only appear at the configuration boundary, so these helpers are the
single place where conversions happen.
"""

from __future__ import annotations

import math


def db_to_linear(db: float) -> float:
    """Convert a dB value to a linear power factor."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a linear power factor to dB."""
    if x <= 0.0:
        raise ValueError(f"cannot express non-positive factor {x!r} in dB")
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm power level to watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    """Convert a power in watts to dBm."""
    if w <= 0.0:
        raise ValueError(f"cannot express non-positive power {w!r} in dBm")
    return 10.0 * math.log10(w) + 30.0


def noise_power_watts(density_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """Total noise power over ``bandwidth_hz`` from a dBm/Hz density."""
    return dbm_to_watts(density_dbm_per_hz + 10.0 * math.log10(bandwidth_hz))
