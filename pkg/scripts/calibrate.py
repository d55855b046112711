"""One-time refinement study behind the constants in hslab.calibration.

Runs the reference scenarios on a grid-refinement family, prints the
measured slack per check in units of the committed bound, and fails if any
frozen constant has lost its headroom.  Regenerating the constants is a
deliberate act: rerun this script, inspect the tables, then edit
src/hslab/calibration.py by hand.

Usage: python3 scripts/calibrate.py [--full]

The default family keeps the runtime under a minute; --full adds the
finest rows (512-cell 1D, 128-cell 2D) used for the committed values.
"""

import argparse
import math
import sys

import numpy as np

from hslab import calibration as cal
from hslab.diagnostics import (
    PmeRunData,
    check_aronson_benilan,
    check_energy_monitors,
    check_gamma_convergence,
    check_obstacle_equivalence,
    check_pressure_rate,
    check_structure_theorem,
)
from hslab.grid import Grid, ScalarField
from hslab.growth import GrowthLaw
from hslab.heleshaw import HsRunConfig, hs_run
from hslab.pme import PmeState, pme_run, scale_initial_data

LAW = GrowthLaw.linear(g0=1.0, p_max=1.0)


def _chi_1d(cells: int, radius: float = 0.3) -> ScalarField:
    grid = Grid(dim=1, cells=cells, half_width=1.0)
    x = grid.axis_centers
    return ScalarField(grid, np.where(np.abs(x) <= radius, 1.0, 0.0))


def _ball_2d(cells: int, radius: float = 0.3) -> ScalarField:
    grid = Grid(dim=2, cells=cells, half_width=1.0)
    xs, ys = grid.coordinate_fields()
    return ScalarField(grid, np.where(np.sqrt(xs**2 + ys**2) <= radius, 1.0, 0.0))


def _hs(profile: ScalarField, t_final: float, snap: float, dt: float = 2.5e-3,
        psor_tol: float = 1e-9):
    cfg = HsRunConfig(dt=dt, t_final=t_final, snapshot_every=snap, psor_tol=psor_tol)
    return hs_run(profile, LAW, cfg)


def _pme(profile: ScalarField, gamma: float, t_final: float, snap: float) -> PmeRunData:
    state = PmeState(
        gamma=gamma, t=0.0, n=scale_initial_data(profile, gamma, LAW), law=LAW
    )
    return PmeRunData.from_states(pme_run(state, t_final, snap))


def study_structure_interior(full: bool) -> list[str]:
    rows = []
    for cells in (128, 256) + ((512,) if full else ()):
        hs = _hs(_chi_1d(cells), 0.2, 0.01)
        res = check_structure_theorem(hs)
        h = hs[0].p.grid.h
        rows.append(("1d", cells, res.measured / h))
    for cells in (64,) + ((128,) if full else ()):
        hs = _hs(_ball_2d(cells), 0.2, 0.05)
        res = check_structure_theorem(hs)
        h = hs[0].p.grid.h
        rows.append(("2d", cells, res.measured / h))
    out = ["structure_interior: sup |lap p + G(p)| two cells inside, / h"]
    failures = []
    for dim, cells, ratio in rows:
        frozen = cal.CONSTANTS[f"structure_interior_{dim}"]
        out.append(f"  {dim} cells={cells:4d}  measured/h = {ratio:7.3f}  frozen K = {frozen:g}")
        if ratio > frozen:
            failures.append(f"structure_interior_{dim} exceeded at {cells}")
    return out + failures


def study_aronson_benilan(full: bool) -> list[str]:
    # the settling-window one-sided bound, measured 0.1 inside the support.
    # gamma = 80 carries an interior defect that does not vanish with h
    # (finite-stiffness relaxation, roughly 2.8 / gamma); the frozen K covers
    # the O(h) staircase for the gammas the criteria assert (<= 40), and the
    # table below documents where the cells-bound stops being the right model.
    out = ["aronson_benilan: max(floor - min(lap p + G)) past the window, / h"]
    failures = []
    for cells in (128, 256) + ((512,) if full else ()):
        prof = _chi_1d(cells)
        h = prof.grid.h
        for gamma in (20.0, 40.0, 80.0):
            run = _pme(prof, gamma, 0.5, 0.05)
            res = check_aronson_benilan(run)
            ratio = res.measured / h
            note = ""
            frozen = cal.CONSTANTS["aronson_benilan_1d"]
            if gamma <= 40.0 and ratio > frozen:
                failures.append(f"aronson_benilan_1d exceeded at cells={cells} gamma={gamma:g}")
            if gamma > 40.0:
                note = "  (informative: interior defect ~ 2.8/gamma, not O(h))"
            out.append(
                f"  1d cells={cells:4d} gamma={gamma:3g}  measured/h = {ratio:7.3f}"
                f"  frozen K = {frozen:g}{note}"
            )
    return out + failures


def study_obstacle_reconstruction() -> list[str]:
    # trapezoid rebuild error must fall with the square of the cadence
    out = ["obstacle_reconstruction: trapezoid gap / (cadence^2 max(T,1))"]
    failures = []
    gaps = {}
    for snap in (0.02, 0.01, 0.005):
        hs = _hs(_chi_1d(128), 0.2, snap)
        res = check_obstacle_equivalence(hs, psor_tol=1e-9)
        gap = float(res.context["reconstruction_gap"])
        gaps[snap] = gap
        ratio = gap / (snap * snap * 1.0)
        frozen = cal.CONSTANTS["obstacle_reconstruction"]
        out.append(f"  cadence={snap:5.3f}  gap = {gap:.3e}  gap/bound-unit = {ratio:6.3f}  frozen C = {frozen:g}")
        if ratio > frozen:
            failures.append(f"obstacle_reconstruction exceeded at cadence {snap}")
    # the coarsest rung is contaminated by the t = 0 transient (the first
    # pressure comes from a masked solve, not the obstacle), so the clean
    # quadrature order shows on the fine pair
    fine = gaps[0.01] / gaps[0.005]
    out.append(f"  gap shrink 0.02->0.01: x{gaps[0.02] / gaps[0.01]:.2f},"
               f" 0.01->0.005: x{fine:.2f} (quadratic means about x4)")
    if fine < 2.0:
        failures.append("obstacle_reconstruction quadrature order lost (exceeded)")
    return out + failures


def study_rate_and_energy() -> list[str]:
    out = ["pressure_rate / energy_monitors on the desk ladder"]
    failures = []
    prof = _chi_1d(128)
    runs = [_pme(prof, g, 0.5, 0.05) for g in (10.0, 20.0, 40.0)]
    worst_rate = -math.inf
    for run in runs:
        # the rate check needs a forward-difference pair past the window;
        # gamma = 10 settles exactly at the last snapshot
        if run.times[-2] < 5.0 / (run.gamma * LAW.semiconvexity_constant()):
            continue
        res = check_pressure_rate(run)
        worst_rate = max(worst_rate, res.measured)
    out.append(f"  worst pressure_rate defect = {worst_rate:.3e}  frozen slack = {cal.CONSTANTS['pressure_rate']:g}")
    if worst_rate > cal.CONSTANTS["pressure_rate"]:
        failures.append("pressure_rate exceeded")
    res = check_energy_monitors(runs)
    out.append(
        f"  h1 ratio = {res.measured:.3f} (cap {cal.CONSTANTS['energy_h1']:g}),"
        f" quartic = {float(res.context['quartic_total']):.3f}"
        f" (cap {cal.CONSTANTS['energy_quartic']:g})"
    )
    if not res.passed:
        failures.append("energy envelope exceeded")
    return out + failures


def study_gamma_hausdorff(full: bool) -> list[str]:
    out = ["gamma_hausdorff_cells: final support gap to the stiff limit, / h"]
    failures = []
    for cells in (128,) + ((256,) if full else ()):
        prof = _chi_1d(cells)
        hs = _hs(prof, 0.5, 0.05, dt=2e-3, psor_tol=5e-10)
        runs = [_pme(prof, g, 0.5, 0.05) for g in (5.0, 10.0, 20.0, 40.0, 80.0)]
        res = check_gamma_convergence(runs, hs)
        h = prof.grid.h
        gap = float(res.context["hausdorff_ladder"].split(",")[-1])
        frozen = cal.CONSTANTS["gamma_hausdorff_cells"]
        note = "" if res.passed else "  (over: the gap is gamma-limited, not grid-limited)"
        out.append(f"  cells={cells:4d}  final gap/h = {gap / h:5.2f}  frozen = {frozen:g}{note}")
        if gap / h > frozen:
            failures.append(f"gamma_hausdorff_cells exceeded at {cells}")
    return out + failures


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--full", action="store_true", help="include the finest rows")
    args = parser.parse_args(argv)
    sections = [
        study_structure_interior(args.full),
        study_aronson_benilan(args.full),
        study_obstacle_reconstruction(),
        study_rate_and_energy(),
        study_gamma_hausdorff(args.full),
    ]
    bad = False
    for lines in sections:
        for line in lines:
            print(line)
            if "exceeded" in line and not line.startswith(" "):
                bad = True
        print()
    if bad:
        print("FAIL: at least one frozen constant has lost its headroom")
        return 1
    print("ok: all frozen constants hold on the refinement family")
    return 0


if __name__ == "__main__":
    sys.exit(main())
