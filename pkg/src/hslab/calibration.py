"""Frozen grid-scale slack constants for the structural checks.

Values are measured once by ``scripts/calibrate.py`` on a refinement family
of the reference scenarios, rounded up with margin, and committed.  Checks
read them as defaults; tests pin against them.  Regenerating the file is a
deliberate act, not part of the test run.
"""

CONSTANTS: dict[str, float] = {
    # sup |lap p + G(p)| two cells inside the saturated set, units of h
    "structure_interior_1d": 4.0,
    "structure_interior_2d": 4.0,
    # max (floor - min(lap p + G(p))) past the settling window, on cells at
    # least 0.1 inside the positivity set, units of h
    "aronson_benilan_1d": 8.0,
    "aronson_benilan_2d": 8.0,
    # trapezoid rebuild of the time-integrated pressure, units of cadence^2 * T
    "obstacle_reconstruction": 10.0,
    # slack for the discrete one-sided dp/dt floor, absolute
    "pressure_rate": 1.0,
    # gradient-energy envelope multiplier and quartic dissipation cap
    "energy_h1": 10.0,
    "energy_quartic": 10.0,
    # Hausdorff gap between stiffest-run support and limit support, cells
    "gamma_hausdorff_cells": 4.0,
}
