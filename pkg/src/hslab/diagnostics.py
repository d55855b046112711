"""Structural checks run against finished trajectories.

Each check compresses one structural property of the model into a single
pass/fail line with the measured number, the bound it was held to, and enough
context to rerun it.  Checks never mutate their inputs and are deterministic,
so a report can be regenerated bit-identically from the same snapshots.

Grid-scale slack constants (the K in bounds of the form K*h) are frozen in
:mod:`hslab.calibration` by a one-time refinement study; checks take them as
arguments with those frozen defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import calibration as cal
from .barriers import integrate_front_ode
from .geometry import (
    front_position_1d,
    hausdorff_distance,
    lebesgue_density,
    flatness_ratio,
    positivity_set,
    radial_bounds,
)
from .grid import RegionMask, ScalarField, grad_sq, integrate, laplacian
from .growth import GrowthLaw
from .heleshaw import HsState
from .obstacle import complementarity_residual
from .pme import PmeState, pressure_of


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    tolerance: float
    context: dict[str, str] = field(default_factory=dict)

    def render(self) -> str:
        ctx = ";".join(f"{k}={v}" for k, v in sorted(self.context.items()))
        return (
            f"check {self.name} passed={self.passed} measured={self.measured!r} "
            f"bound={self.bound!r} tolerance={self.tolerance!r} context[{ctx}]"
        )


@dataclass(frozen=True)
class DiagnosticsReport:
    checks: tuple[CheckResult, ...]
    manifest: dict[str, str]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = ["# hslab-report v1"]
        for key in sorted(self.manifest):
            lines.append(f"# {key} = {self.manifest[key]}")
        lines.extend(c.render() for c in self.checks)
        n_fail = sum(not c.passed for c in self.checks)
        lines.append(f"# summary checks={len(self.checks)} failed={n_fail}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class PmeRunData:
    """A finished finite-stiffness trajectory, reduced to what checks need."""

    gamma: float
    law: GrowthLaw
    times: tuple[float, ...]
    density: tuple[ScalarField, ...]
    pressure: tuple[ScalarField, ...]

    @classmethod
    def from_states(cls, states: Sequence[PmeState]) -> "PmeRunData":
        if not states:
            raise ValueError("empty run")
        return cls(
            gamma=states[0].gamma,
            law=states[0].law,
            times=tuple(s.t for s in states),
            density=tuple(s.n for s in states),
            pressure=tuple(pressure_of(s) for s in states),
        )


def _interior_mask(member: np.ndarray, rings: int) -> np.ndarray:
    """Erode a mask so surviving cells sit `rings` cells inside it."""
    out = member.copy()
    for _ in range(rings):
        eroded = out.copy()
        for axis in range(out.ndim):
            eroded &= np.roll(out, 1, axis=axis) & np.roll(out, -1, axis=axis)
            sl_first = [slice(None)] * out.ndim
            sl_first[axis] = 0
            eroded[tuple(sl_first)] = False
            sl_last = [slice(None)] * out.ndim
            sl_last[axis] = -1
            eroded[tuple(sl_last)] = False
        out = eroded
    return out


# ---------------------------------------------------------------------------
# stiff-limit checks


def check_structure_theorem(
    hs: Sequence[HsState],
    slack_interior: Optional[float] = None,
    exact_tol: float = 1e-8,
) -> CheckResult:
    """Phase dichotomy split by the stored saturation mask {p > threshold}:
    density 1 on it, free growth off it, and the quasi-static balance
    lap p + G(p) = 0 two cells inside it.  The cellwise complementarity
    product p (lap p + G(p)) on the same interior cells rides along in
    context."""
    law = hs[0].law
    h = hs[0].n0.grid.h
    if slack_interior is None:
        slack_interior = cal.CONSTANTS[f"structure_interior_{hs[0].n0.grid.dim}d"]
    worst_on, worst_off, worst_interior, worst_product = 0.0, 0.0, 0.0, 0.0
    for state in hs[1:]:
        saturated = state.saturated.member
        free = np.minimum(1.0, np.exp(law.g0 * state.t) * state.n0.values)
        if saturated.any():
            worst_on = max(worst_on, float(np.max(np.abs(state.n.values[saturated] - 1.0))))
        if (~saturated).any():
            worst_off = max(
                worst_off, float(np.max(np.abs(state.n.values[~saturated] - free[~saturated])))
            )
        interior = _interior_mask(saturated, 2)
        if interior.any():
            balance = laplacian(state.p).values + law.eval(state.p.values)
            worst_interior = max(worst_interior, float(np.max(np.abs(balance[interior]))))
            product = np.abs(state.p.values * balance)
            worst_product = max(worst_product, float(np.max(product[interior])))
    phase_err = max(worst_on, worst_off)
    passed = phase_err <= exact_tol and worst_interior <= slack_interior * h
    return CheckResult(
        name="structure_theorem",
        passed=passed,
        measured=worst_interior,
        bound=slack_interior * h,
        tolerance=exact_tol,
        context={
            "phase_error_on": repr(worst_on),
            "phase_error_off": repr(worst_off),
            "interior_product": repr(worst_product),
            "snapshots": str(len(hs)),
        },
    )


def check_obstacle_equivalence(
    hs: Sequence[HsState],
    psor_tol: float,
    quad_constant: Optional[float] = None,
) -> CheckResult:
    """(a) every stored w solves its stored forcing to solver tolerance;
    (b) w rebuilt by trapezoid quadrature of the pressure history matches."""
    law = hs[0].law
    if quad_constant is None:
        quad_constant = cal.CONSTANTS["obstacle_reconstruction"]
    worst_comp = 0.0
    for state in hs[1:]:
        worst_comp = max(worst_comp, complementarity_residual(state.w, state.forcing))
    comp_bound = psor_tol * 1.01 + 1e-12

    worst_rec = 0.0
    w_rec = np.zeros(hs[0].n0.grid.shape)
    cadence = 0.0
    for prev, curr in zip(hs[:-1], hs[1:]):
        span = curr.t - prev.t
        cadence = max(cadence, span)
        lo = math.exp(-law.g0 * prev.t) * prev.p.values
        hi = math.exp(-law.g0 * curr.t) * curr.p.values
        w_rec = w_rec + 0.5 * span * (lo + hi)
        worst_rec = max(worst_rec, float(np.max(np.abs(w_rec - curr.w.values))))
    t_final = hs[-1].t
    rec_bound = quad_constant * cadence * cadence * max(t_final, 1.0)
    passed = worst_comp <= comp_bound and worst_rec <= rec_bound
    return CheckResult(
        name="obstacle_equivalence",
        passed=passed,
        measured=worst_comp,
        bound=comp_bound,
        tolerance=psor_tol,
        context={
            "reconstruction_gap": repr(worst_rec),
            "reconstruction_bound": repr(rec_bound),
            "cadence": repr(cadence),
        },
    )


def check_mass_bounds_hs(hs: Sequence[HsState], rel_tol: float = 1e-8) -> CheckResult:
    """Density mass under e^{g0 t} growth of the initial mass; pressure mass
    under p_max times the same envelope (looser tolerance, quadrature-limited)."""
    law = hs[0].law
    m0 = integrate(hs[0].n0)
    worst_n, worst_p = -math.inf, -math.inf
    for state in hs:
        envelope = math.exp(law.g0 * state.t) * m0
        worst_n = max(worst_n, integrate(state.n) / envelope - 1.0)
        worst_p = max(worst_p, integrate(state.p) / (law.p_max * envelope) - 1.0)
    passed = worst_n <= rel_tol and worst_p <= 1e-6
    return CheckResult(
        name="mass_bounds_hs",
        passed=passed,
        measured=worst_n,
        bound=rel_tol,
        tolerance=rel_tol,
        context={"pressure_excess": repr(worst_p), "initial_mass": repr(m0)},
    )


def check_pressure_monotone(
    hs: Sequence[HsState], psor_tol: float, dt: float
) -> CheckResult:
    """Pressure never decreases in time at any cell, up to 10x solver noise
    as amplified by the backward-difference recovery."""
    law = hs[0].law
    slack = 10.0 * psor_tol * math.exp(law.g0 * hs[-1].t) / dt
    worst = 0.0
    for prev, curr in zip(hs[:-1], hs[1:]):
        drop = float(np.min(curr.p.values - prev.p.values))
        worst = max(worst, -drop)
    return CheckResult(
        name="pressure_monotone",
        passed=worst <= slack,
        measured=worst,
        bound=slack,
        tolerance=psor_tol,
        context={"pairs": str(len(hs) - 1)},
    )


def _front_denominator(state: HsState, front: float) -> float:
    grid = state.n0.grid
    i_out = min(grid.cells - 1, int(np.searchsorted(grid.axis_centers, front)))
    return 1.0 - math.exp(state.law.g0 * state.t) * float(state.n0.values[i_out])


def check_stefan_velocity(
    hs: Sequence[HsState],
    threshold: float = 1e-7,
    rel_tol: float = 0.05,
    degenerate_floor: float = 0.05,
) -> CheckResult:
    """Measured front speed against the sampled jump relation
    speed = |grad p| / (1 - e^{g0 t} n0), averaged over snapshot pairs.

    Pairs whose denominator falls below the floor are excluded from the
    average and only reported.
    """
    errors = []
    degenerate = 0
    h = hs[0].n0.grid.h

    def _point_prediction(state: HsState, r_front: float) -> Optional[float]:
        grid = state.n0.grid
        i_front = int(np.searchsorted(grid.axis_centers, r_front)) - 1
        if i_front < 1:
            return None
        slope = abs(float(state.p.values[i_front - 1] - state.p.values[i_front])) / h
        denom = 1.0 - math.exp(state.law.g0 * state.t) * float(
            state.n0.values[min(grid.cells - 1, i_front + 1)]
        )
        if denom < degenerate_floor:
            return None
        return slope / denom

    for prev, curr in zip(hs[:-1], hs[1:]):
        try:
            r_prev = front_position_1d(prev.p, threshold)
            r_curr = front_position_1d(curr.p, threshold)
        except ValueError:
            continue
        if r_curr - r_prev <= 0.0:
            continue
        speed = (r_curr - r_prev) / (curr.t - prev.t)
        # the measured speed is an interval average, so average the jump
        # relation over both endpoints as well (midpoint quadrature)
        pred_prev = _point_prediction(prev, r_prev)
        pred_curr = _point_prediction(curr, r_curr)
        if pred_prev is None or pred_curr is None:
            degenerate += 1
            continue
        predicted = 0.5 * (pred_prev + pred_curr)
        if predicted > 0.0:
            errors.append(abs(speed - predicted) / predicted)
    if not errors:
        return CheckResult(
            name="stefan_velocity",
            passed=False,
            measured=math.inf,
            bound=rel_tol,
            tolerance=rel_tol,
            context={"pairs": "0", "degenerate_pairs": str(degenerate)},
        )
    mean_err = float(np.mean(errors))
    return CheckResult(
        name="stefan_velocity",
        passed=mean_err <= rel_tol,
        measured=mean_err,
        bound=rel_tol,
        tolerance=rel_tol,
        context={
            "pairs": str(len(errors)),
            "degenerate_pairs": str(degenerate),
            "worst_pair": repr(float(np.max(errors))),
        },
    )


def check_stefan_ode(
    hs: Sequence[HsState], threshold: float = 1e-7, rel_tol: float = 0.03
) -> CheckResult:
    """1D front trajectory against RK4 integration of dR/dt = p_max k tanh(kR).

    Valid for saturated-indicator initial data (nothing to absorb ahead of
    the front), which the caller is responsible for providing.
    """
    law = hs[0].law
    times = [s.t for s in hs]
    fronts = []
    for state in hs:
        fronts.append(front_position_1d(state.p, threshold))
    reference = integrate_front_ode(law, fronts[0], np.asarray(times))
    rel = np.abs(np.asarray(fronts) - reference) / reference
    worst = float(np.max(rel))
    return CheckResult(
        name="stefan_ode",
        passed=worst <= rel_tol,
        measured=worst,
        bound=rel_tol,
        tolerance=rel_tol,
        context={"r_start": repr(fronts[0]), "r_final": repr(fronts[-1])},
    )


def _bump(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def check_stefan_weak(
    hs: Sequence[HsState],
    eps_ladder: Optional[Sequence[float]] = None,
    delta_ladder: Optional[Sequence[float]] = None,
    shrink_factor: float = 4.0,
    gradient_scale: float = 1.0,
    min_band_cells: float = 4.0,
) -> CheckResult:
    """Smoothed weak form of the front condition.

    For a window selector beta supported on delta < p < delta + eps, the
    space-time sum of beta(p) [ (1 - e^{g0 t} n0) dp/dt - |grad p|^2 ] phi
    must sink toward zero as the window tightens; the last rung still
    resolved by the grid must come in at least `shrink_factor` below the
    first.  A rung whose selector band averages fewer than `min_band_cells`
    cells is under the grid floor: its residual collapses no matter what
    the integrand holds, so it can neither pass nor fail the shrink rule.

    `gradient_scale` deliberately misweights the |grad p|^2 term; anything
    but 1.0 is a self-test knob expected to make the check fail.
    """
    if len(hs) < 3:
        raise ValueError("need at least 3 snapshots to difference the pressure in time")
    law = hs[0].law
    grid = hs[0].n0.grid
    if eps_ladder is None:
        # scale to the pressure actually reached, not p_max: the window
        # selector must intersect the realized range to see the front
        base = max(float(np.max(s.p.values)) for s in hs)
        eps_ladder = [0.4 * base, 0.2 * base, 0.1 * base, 0.05 * base]
    if delta_ladder is None:
        delta_ladder = [0.5 * eps for eps in eps_ladder]
    if len(delta_ladder) != len(eps_ladder):
        raise ValueError("eps and delta ladders must have equal length")
    t_final = hs[-1].t
    coords = grid.coordinate_fields()
    phi_x = np.ones(grid.shape)
    for c in coords:
        phi_x = phi_x * _bump(c / (0.5 * grid.half_width))
    vol = grid.h**grid.dim

    residuals = []
    band_cells = []
    for eps, delta in zip(eps_ladder, delta_ladder):
        total = 0.0
        selected = 0
        contributing = 0
        for prev, curr in zip(hs[:-1], hs[1:]):
            span = curr.t - prev.t
            t_mid = 0.5 * (prev.t + curr.t)
            phi_t = float(_bump(np.asarray([(t_mid - 0.5 * t_final) / (0.25 * t_final)]))[0])
            if phi_t == 0.0:
                continue
            p_mid = 0.5 * (prev.p.values + curr.p.values)
            band = (p_mid > delta) & (p_mid < delta + eps)
            if not band.any():
                continue
            selected += int(np.count_nonzero(band))
            contributing += 1
            window = band.astype(np.float64) / eps
            dp_dt = (curr.p.values - prev.p.values) / span
            hold = 1.0 - np.exp(law.g0 * t_mid) * hs[0].n0.values
            gmid = gradient_scale * grad_sq(ScalarField(grid, p_mid)).values
            integrand = window * (hold * dp_dt - gmid) * phi_x * phi_t
            total += float(np.sum(integrand)) * vol * span
        residuals.append(abs(total))
        band_cells.append(selected / contributing if contributing else 0.0)

    usable = [i for i, b in enumerate(band_cells) if b >= min_band_cells]
    context = {
        "ladder": ",".join(repr(r) for r in residuals),
        "band_cells": ",".join(f"{b:.1f}" for b in band_cells),
        "eps_ladder": ",".join(repr(float(e)) for e in eps_ladder),
        "delta_ladder": ",".join(repr(float(d)) for d in delta_ladder),
    }
    if len(usable) < 2:
        context["reason"] = "ladder is under the grid floor; nothing to compare"
        return CheckResult(
            name="stefan_weak",
            passed=False,
            measured=math.inf,
            bound=0.0,
            tolerance=shrink_factor,
            context=context,
        )
    first, last = residuals[usable[0]], residuals[usable[-1]]
    context["floor_rungs"] = str(len(residuals) - len(usable))
    passed = last <= first / shrink_factor
    return CheckResult(
        name="stefan_weak",
        passed=passed,
        measured=last,
        bound=first / shrink_factor,
        tolerance=shrink_factor,
        context=context,
    )


def check_reflection_monotonicity(
    hs: Sequence[HsState],
    support_radius: float,
    psor_tol: float,
    dt: float,
    threshold: float = 1e-7,
) -> CheckResult:
    """Radial monotonicity of p along grid rays from the origin beyond the
    support hull, plus the two-sided radius pinch R+ - R- <= 2 R_supp + 2h.

    Violations are held to 10x the solver tolerance as seen through the
    backward-difference pressure recovery (amplification e^{g0 T} / dt)."""
    grid = hs[0].n0.grid
    law = hs[0].law
    h = grid.h
    noise = psor_tol * math.exp(law.g0 * hs[-1].t) / dt
    slack = 10.0 * noise
    worst_violation = 0.0
    worst_pinch = -math.inf
    for state in hs[1:]:
        for ray in _grid_rays(grid):
            coords = np.sqrt(np.sum(ray.positions**2, axis=1))
            vals = state.p.values[tuple(ray.indices.T)]
            keep = coords > support_radius
            if np.count_nonzero(keep) < 2:
                continue
            v = vals[keep]
            rises = np.diff(v)
            if rises.size:
                worst_violation = max(worst_violation, float(np.max(rises)))
        region = positivity_set(state.p, threshold)
        if not region.is_empty():
            r_minus, r_plus = radial_bounds(region)
            worst_pinch = max(worst_pinch, (r_plus - r_minus) - (2.0 * support_radius + 2.0 * h))
    passed = worst_violation <= slack and worst_pinch <= 0.0
    return CheckResult(
        name="reflection_monotonicity",
        passed=passed,
        measured=worst_violation,
        bound=slack,
        tolerance=noise,
        context={
            "radius_pinch_excess": repr(worst_pinch),
            "support_radius": repr(support_radius),
        },
    )


@dataclass(frozen=True)
class _Ray:
    indices: np.ndarray  # (k, dim) integer cell indices, marching outward
    positions: np.ndarray  # (k, dim) cell centers


def _grid_rays(grid) -> list[_Ray]:
    """Outward cell sequences from the box center along axes and diagonals."""
    c = grid.cells
    half = c // 2
    rays = []
    if grid.dim == 1:
        right = np.arange(half, c)
        left = np.arange(half - 1, -1, -1)
        for seq in (right, left):
            idx = seq[:, None]
            rays.append(_Ray(idx, grid.axis_centers[seq][:, None]))
        return rays
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    for sx, sy in steps:
        i0 = half if sx >= 0 else half - 1
        j0 = half if sy >= 0 else half - 1
        seq = []
        i, j = i0, j0
        while 0 <= i < c and 0 <= j < c:
            seq.append((i, j))
            i += sx
            j += sy
        idx = np.asarray(seq, dtype=int)
        pos = np.column_stack([grid.axis_centers[idx[:, 0]], grid.axis_centers[idx[:, 1]]])
        rays.append(_Ray(idx, pos))
    return rays


def check_flatness_criteria(
    hs: Sequence[HsState],
    threshold: float = 1e-7,
    density_floor: float = 0.3,
    sample_count: int = 4,
) -> CheckResult:
    """Probe the vacuum side of the late-time front: the vacuum's density in
    small balls must stay macroscopic, and its minimal diameter scales with
    the probe radius.  Radii 4h, 8h, 16h at front-adjacent probe points."""
    state = hs[-1]
    grid = state.n0.grid
    h = grid.h
    region = positivity_set(state.p, threshold)
    if region.is_empty():
        return CheckResult(
            name="flatness_criteria",
            passed=False,
            measured=math.inf,
            bound=density_floor,
            tolerance=density_floor,
            context={"reason": "empty positivity set"},
        )
    worst_density = math.inf
    ratios = []
    probes = _boundary_probes(region, sample_count)
    for probe in probes:
        for r in (4.0 * h, 8.0 * h, 16.0 * h):
            outward = probe + _outward_shift(probe, r)
            if np.any(np.abs(outward) + r > grid.half_width):
                continue
            dens = lebesgue_density(state.p, outward, r, threshold)
            ratio = flatness_ratio(state.p, outward, r, threshold)
            worst_density = min(worst_density, dens)
            ratios.append(ratio)
    passed = worst_density >= density_floor and bool(ratios)
    return CheckResult(
        name="flatness_criteria",
        passed=passed,
        measured=worst_density,
        bound=density_floor,
        tolerance=density_floor,
        context={
            "probes": str(len(probes)),
            "min_ratio": repr(min(ratios) if ratios else math.nan),
            "max_ratio": repr(max(ratios) if ratios else math.nan),
        },
    )


def _boundary_probes(region: RegionMask, sample_count: int = 4) -> list[np.ndarray]:
    """A few deterministic cell centers just outside the region boundary."""
    member = region.member
    interior = _interior_mask(member, 1)
    rim = member & ~interior
    pts = region.grid.center_points()[rim.ravel()]
    if pts.shape[0] == 0:
        pts = region.grid.center_points()[member.ravel()]
    take = np.linspace(0, pts.shape[0] - 1, num=min(sample_count, pts.shape[0]), dtype=int)
    return [pts[i] for i in take]


def _outward_shift(probe: np.ndarray, r: float) -> np.ndarray:
    norm = float(np.sqrt(np.sum(probe**2)))
    if norm == 0.0:
        direction = np.zeros_like(probe)
        direction[0] = 1.0
    else:
        direction = probe / norm
    return direction * (r + 1e-12)


# ---------------------------------------------------------------------------
# finite-stiffness checks


def check_mass_bounds_pme(run: PmeRunData, rel_tol: float = 1e-8) -> CheckResult:
    """Mass under the e^{g0 t} envelope of the initial mass at every snapshot."""
    m0 = integrate(run.density[0])
    worst = -math.inf
    for t, n in zip(run.times, run.density):
        worst = max(worst, integrate(n) / (math.exp(run.law.g0 * t) * m0) - 1.0)
    return CheckResult(
        name=f"mass_bounds_pme_gamma_{run.gamma:g}",
        passed=worst <= rel_tol,
        measured=worst,
        bound=rel_tol,
        tolerance=rel_tol,
        context={"initial_mass": repr(m0)},
    )


def check_aronson_benilan(
    run: PmeRunData,
    slack: Optional[float] = None,
    margin_distance: float = 0.1,
    threshold: float = 1e-7,
) -> CheckResult:
    """One-sided lower bound on lap p + G(p) after the settling window
    t >= 5 / (gamma c), on interior cells.

    Interior means at least margin_distance inside the positivity set.  The
    margin is a physical length, not a cell count: the scheme fills front
    cells one at a time, so second differences within a band near the free
    boundary carry an O(1/h) staircase spike that never thins below a few
    cells, and the density toe itself is barely C^1 for large gamma.  A
    fixed length excludes that band at every resolution."""
    if slack is None:
        slack = cal.CONSTANTS[f"aronson_benilan_{run.density[0].grid.dim}d"]
    c = run.law.semiconvexity_constant()
    h = run.density[0].grid.h
    margin = max(1, math.ceil(margin_distance / h))
    window = 5.0 / (run.gamma * c)
    worst = -math.inf
    used = 0
    empty = 0
    for t, p in zip(run.times, run.pressure):
        if t < window:
            continue
        interior = _interior_mask(positivity_set(p, threshold).member, margin)
        if not interior.any():
            empty += 1
            continue
        used += 1
        gc = run.gamma * c
        floor = -c * math.exp(-gc * t) / (1.0 - math.exp(-gc * t))
        value = laplacian(p).values + run.law.eval(p.values)
        worst = max(worst, floor - float(np.min(value[interior])))
    if used == 0:
        return CheckResult(
            name=f"aronson_benilan_gamma_{run.gamma:g}",
            passed=False,
            measured=math.inf,
            bound=slack * h,
            tolerance=slack,
            context={"reason": f"no usable snapshots past the settling window {window:.3g}"},
        )
    return CheckResult(
        name=f"aronson_benilan_gamma_{run.gamma:g}",
        passed=worst <= slack * h,
        measured=worst,
        bound=slack * h,
        tolerance=slack,
        context={
            "window": repr(window),
            "snapshots_used": str(used),
            "empty_interior": str(empty),
            "margin_cells": str(margin),
        },
    )


def check_pressure_rate(run: PmeRunData, slack: Optional[float] = None) -> CheckResult:
    """Discrete-time version of the same one-sidedness for dp/dt."""
    if slack is None:
        slack = cal.CONSTANTS["pressure_rate"]
    c = run.law.semiconvexity_constant()
    window = 5.0 / (run.gamma * c)
    worst = -math.inf
    used = 0
    for k in range(len(run.times) - 1):
        t = run.times[k]
        if t < window:
            continue
        used += 1
        span = run.times[k + 1] - run.times[k]
        rate = (run.pressure[k + 1].values - run.pressure[k].values) / span
        gc = run.gamma * c
        decay = math.exp(-gc * t) / (1.0 - math.exp(-gc * t))
        floor = -run.gamma * c * decay * run.pressure[k].values
        worst = max(worst, float(np.max(floor - rate)))
    passed = used > 0 and worst <= slack
    return CheckResult(
        name=f"pressure_rate_gamma_{run.gamma:g}",
        passed=passed,
        measured=worst if used else math.inf,
        bound=slack,
        tolerance=slack,
        context={"pairs_used": str(used)},
    )


def check_energy_monitors(
    runs: Sequence[PmeRunData],
    h1_constant: Optional[float] = None,
    quartic_constant: Optional[float] = None,
) -> CheckResult:
    """Record the gradient energy and the quartic dissipation total for each
    run and hold them under frozen envelopes, uniformly across the ladder."""
    if h1_constant is None:
        h1_constant = cal.CONSTANTS["energy_h1"]
    if quartic_constant is None:
        quartic_constant = cal.CONSTANTS["energy_quartic"]
    worst_h1 = 0.0
    worst_quartic = 0.0
    for run in runs:
        g0 = run.law.g0
        for t, p in zip(run.times, run.pressure):
            if t <= 0.0:
                continue
            energy = integrate(grad_sq(p))
            envelope = (1.0 + 1.0 / (run.gamma * t)) * math.exp(g0 * t)
            worst_h1 = max(worst_h1, energy / envelope)
        dissipation = 0.0
        for k in range(len(run.times) - 1):
            span = run.times[k + 1] - run.times[k]
            p = run.pressure[k + 1].values
            n = run.density[k + 1].values
            p_safe = np.maximum(p, 1e-6)
            quartic = grad_sq(run.pressure[k + 1]).values ** 2
            cell = n / p_safe * quartic
            dissipation += span * float(np.sum(cell)) * run.density[0].grid.h ** run.density[
                0
            ].grid.dim / (2.0 * run.gamma)
        worst_quartic = max(worst_quartic, dissipation)
    passed = worst_h1 <= h1_constant and worst_quartic <= quartic_constant
    return CheckResult(
        name="energy_monitors",
        passed=passed,
        measured=worst_h1,
        bound=h1_constant,
        tolerance=h1_constant,
        context={"quartic_total": repr(worst_quartic), "quartic_bound": repr(quartic_constant)},
    )


def default_suite(
    hs: Sequence[HsState],
    runs: Sequence[PmeRunData],
    psor_tol: float,
    dt: float,
    manifest: Optional[dict[str, str]] = None,
) -> DiagnosticsReport:
    """The standard report: every check whose preconditions the data meets.

    Scenario-specific checks (island timing, barrier comparisons) are driven
    directly by their tests, not here.
    """
    law = hs[0].law
    grid = hs[0].n0.grid
    n0 = hs[0].n0
    checks: list[CheckResult] = [
        check_structure_theorem(hs),
        check_obstacle_equivalence(hs, psor_tol=psor_tol),
        check_mass_bounds_hs(hs),
        check_pressure_monotone(hs, psor_tol=psor_tol, dt=dt),
    ]
    support = positivity_set(n0, 0.0)
    if not support.is_empty():
        _, r_supp = radial_bounds(support)
        checks.append(
            check_reflection_monotonicity(
                hs, support_radius=r_supp, psor_tol=psor_tol, dt=dt
            )
        )
    if grid.dim == 1:
        checks.append(check_stefan_velocity(hs))
        saturated_indicator = bool(
            np.all((n0.values == 0.0) | (n0.values == 1.0)) and np.any(n0.values == 1.0)
        )
        if saturated_indicator:
            checks.append(check_stefan_ode(hs))
    checks.append(check_stefan_weak(hs))
    checks.append(check_flatness_criteria(hs))
    c = law.semiconvexity_constant()
    for run in runs:
        checks.append(check_mass_bounds_pme(run))
        window = 5.0 / (run.gamma * c)
        # gate on the run's own snapshot times: the settling window may end
        # exactly at the last snapshot, which leaves the rate check (it needs
        # a forward difference) without a single usable pair
        if run.times[-1] >= window:
            checks.append(check_aronson_benilan(run))
        if len(run.times) >= 2 and run.times[-2] >= window:
            checks.append(check_pressure_rate(run))
    if runs:
        checks.append(check_energy_monitors(runs))
        if len(runs) >= 2:
            checks.append(check_gamma_convergence(runs, hs))
    return DiagnosticsReport(checks=tuple(checks), manifest=dict(manifest or {}))


def _ladder_admissible(seq: Sequence[float]) -> tuple[int, float]:
    """Count increases along a should-be-nonincreasing sequence and the worst
    relative size of one."""
    inversions = 0
    worst = 0.0
    for a, b in zip(seq[:-1], seq[1:]):
        if b > a:
            inversions += 1
            worst = max(worst, (b - a) / a if a > 0 else math.inf)
    return inversions, worst


def check_gamma_convergence(
    runs: Sequence[PmeRunData],
    hs: Sequence[HsState],
    mask_threshold: float = 1e-3,
    hausdorff_cells: Optional[float] = None,
    inversion_tol: float = 0.10,
) -> CheckResult:
    """Distances to the stiff limit must fall along the gamma ladder.

    At every shared snapshot time, three sequences over gamma: L1 density
    distance, L1 pressure distance, and the Hausdorff distance between
    density positivity sets (same threshold on both sides, set above the
    scheme's leakage floor).  Each sequence may show at most one inversion
    of at most `inversion_tol` relative size; the stiffest run's final-time
    Hausdorff distance must land within a few cells of zero."""
    if hausdorff_cells is None:
        hausdorff_cells = cal.CONSTANTS["gamma_hausdorff_cells"]
    runs = sorted(runs, key=lambda r: r.gamma)
    grid = hs[0].n0.grid
    h = grid.h
    vol = h**grid.dim
    hs_times = [s.t for s in hs]
    for run in runs:
        if len(run.times) != len(hs_times) or any(
            abs(a - b) > 1e-9 for a, b in zip(run.times, hs_times)
        ):
            raise ValueError("ladder run snapshot times do not match the stiff-limit run")
    worst_inversions = 0
    worst_inversion_size = 0.0
    final_n = []
    final_p = []
    final_haus = []
    for j, state in enumerate(hs):
        l1_n = [
            float(np.sum(np.abs(r.density[j].values - state.n.values))) * vol for r in runs
        ]
        l1_p = [
            float(np.sum(np.abs(r.pressure[j].values - state.p.values))) * vol for r in runs
        ]
        limit_mask = positivity_set(state.n, mask_threshold)
        haus = [
            hausdorff_distance(positivity_set(r.density[j], mask_threshold), limit_mask)
            for r in runs
        ]
        for seq in (l1_n, l1_p, haus):
            inversions, size = _ladder_admissible(seq)
            worst_inversions = max(worst_inversions, inversions)
            worst_inversion_size = max(worst_inversion_size, size)
        final_n, final_p, final_haus = l1_n, l1_p, haus
    ladder_ok = worst_inversions <= 1 and worst_inversion_size <= inversion_tol
    dist = final_haus[-1]
    hausdorff_ok = dist <= hausdorff_cells * h
    return CheckResult(
        name="gamma_convergence",
        passed=ladder_ok and hausdorff_ok,
        measured=dist,
        bound=hausdorff_cells * h,
        tolerance=inversion_tol,
        context={
            "l1_ladder": ",".join(repr(d) for d in final_n),
            "l1_pressure_ladder": ",".join(repr(d) for d in final_p),
            "hausdorff_ladder": ",".join(repr(d) for d in final_haus),
            "gammas": ",".join(f"{r.gamma:g}" for r in runs),
            "inversions": str(worst_inversions),
            "worst_inversion": repr(worst_inversion_size),
        },
    )
