"""Unit conversion constants.

Every model-internal quantity is SI: lengths in meters, areas in square
meters, volumes in cubic meters.  Conversions from the conventional units
used in configuration files (acres, millimeters, psi) happen exactly once,
at load time, and once more when formatting report output.
"""

ACRE_M2 = 4046.8564224        # square meters per acre (international acre)
MM_PER_M = 1000.0
FT_PER_M = 1.0 / 0.3048
M_PER_FT = 0.3048
PSI_TO_FT_WATER = 2.31        # feet of water column per psi of gauge pressure


def acres_to_m2(acres: float) -> float:
    return acres * ACRE_M2


def m2_to_acres(m2: float) -> float:
    return m2 / ACRE_M2


def mm_to_m(mm: float) -> float:
    return mm / MM_PER_M
