"""Stiff-limit evolution via a per-step obstacle problem.

Instead of chasing the stiff density equation, each accepted step solves one
linear-complementarity problem for the time-integrated pressure

    w(x, t) = integral_0^t exp(-g0 s) p(x, s) ds,

whose forcing bundles the initial density, the elapsed-time decay, and an
accumulated quadrature of the growth nonlinearity:

    F(t) = exp(-g0 t) - n0 + integral_0^t exp(-g0 s) (g0 - G(p(s))) ds.

Pressure is recovered from the backward difference of w and fed back through
a short fixed-point loop on F.  The density never needs its own PDE solve:
it is 1 on the saturated region {p > threshold} and grows freely as
exp(g0 t) n0 elsewhere, capped at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .grid import (
    Grid,
    RegionMask,
    ScalarField,
    integrate,
    laplacian,
    warn_if_support_near_edge,
)
from .growth import GrowthLaw
from .obstacle import ObstacleDivergenceError, ObstacleSpec, psor_solve

_SATURATION_TOL = 1e-12


class HsSolverError(RuntimeError):
    """A step violated a structural guarantee (monotone w, solver convergence)."""


@dataclass(frozen=True, eq=False)
class HsRunConfig:
    """Knobs for the stiff-limit run."""

    dt: float
    t_final: float
    snapshot_every: float
    picard_iters: int = 3
    p_threshold: float = 1e-7
    psor_tol: float = 1e-9
    psor_omega: float = 1.7
    psor_max_iters: int = 200_000

    def __post_init__(self) -> None:
        if self.dt <= 0.0 or self.t_final <= 0.0 or self.snapshot_every <= 0.0:
            raise ValueError("dt, t_final and snapshot_every must be positive")
        if self.dt > self.t_final:
            raise ValueError(f"dt = {self.dt} exceeds t_final = {self.t_final}")
        if self.picard_iters < 1:
            raise ValueError(f"picard_iters must be >= 1, got {self.picard_iters}")
        if self.p_threshold <= 0.0:
            raise ValueError(f"p_threshold must be positive, got {self.p_threshold}")


@dataclass(frozen=True, eq=False)
class HsState:
    """Full stiff-limit state at one instant.

    ``n0`` is the frozen initial density; ``quad_accum`` carries the running
    quadrature of exp(-g0 s)(g0 - G(p(s))), advanced exactly once per
    accepted step.
    """

    t: float
    law: GrowthLaw
    n0: ScalarField
    n: ScalarField
    p: ScalarField
    w: ScalarField
    forcing: ScalarField
    saturated: RegionMask
    quad_accum: ScalarField

    def __post_init__(self) -> None:
        v0 = self.n0.values
        if v0.min() < 0.0 or v0.max() > 1.0 + _SATURATION_TOL:
            raise ValueError("initial density must lie in [0, 1]")
        if self.p.values.min() < -1e-12:
            raise ValueError("pressure must be nonnegative")


def solve_pressure_on_region(
    grid: Grid,
    region: RegionMask,
    law: GrowthLaw,
    tol: float = 1e-10,
) -> ScalarField:
    """Quasi-static pressure: -lap_h p = G(p) on the region, p = 0 outside.

    Linear laws reduce to one symmetric positive definite solve, done with
    conjugate gradients; tabulated laws wrap the same solve in a fixed-point
    loop on the G argument.
    """
    if region.grid != grid:
        raise ValueError("region lives on a different grid")
    mask = region.member
    p = np.zeros(grid.shape)
    if not mask.any():
        return ScalarField(grid, p)
    k = int(np.count_nonzero(mask))

    def masked_apply(shift: float) -> Callable[[np.ndarray], np.ndarray]:
        def apply(vec: np.ndarray) -> np.ndarray:
            field = np.zeros(grid.shape)
            field[mask] = vec
            out = -laplacian(ScalarField(grid, field)).values + shift * field
            return out[mask]

        return apply

    if law.is_linear:
        op = LinearOperator((k, k), matvec=masked_apply(law.g0 / law.p_max), dtype=np.float64)
        rhs = np.full(k, law.g0)
        sol, info = cg(op, rhs, rtol=0.0, atol=tol, maxiter=50 * grid.cells * grid.dim)
        if info != 0:
            raise HsSolverError(f"pressure solve failed to reach {tol:.1e} (cg info {info})")
        p[mask] = sol
        return ScalarField(grid, p)

    op = LinearOperator((k, k), matvec=masked_apply(0.0), dtype=np.float64)
    current = np.zeros(k)
    for _ in range(200):
        rhs = law.eval(np.maximum(current, 0.0))
        sol, info = cg(op, rhs, rtol=0.0, atol=tol, maxiter=50 * grid.cells * grid.dim)
        if info != 0:
            raise HsSolverError(f"pressure solve failed to reach {tol:.1e} (cg info {info})")
        delta = float(np.max(np.abs(sol - current)))
        current = sol
        if delta <= 10.0 * tol * max(1.0, law.p_max):
            p[mask] = current
            return ScalarField(grid, p)
    raise HsSolverError("fixed-point loop on the growth argument did not settle")


def initial_state(n0: ScalarField, law: GrowthLaw, p_threshold: float = 1e-7) -> HsState:
    """State at t = 0.

    The pressure carries the t -> 0+ quasi-static limit on the initially
    saturated cells (pressure is right-continuous in time, and the time
    quadratures below lose an order if the first sample sits at 0 instead of
    the limit value).
    """
    grid = n0.grid
    warn_if_support_near_edge(RegionMask(grid, n0.values > 0.0), "stiff-limit initial data")
    saturated0 = RegionMask(grid, n0.values >= 1.0 - _SATURATION_TOL)
    p0 = solve_pressure_on_region(grid, saturated0, law)
    return HsState(
        t=0.0,
        law=law,
        n0=n0.copy(),
        n=n0.copy(),
        p=p0,
        w=ScalarField.zeros(grid),
        forcing=ScalarField(grid, 1.0 - n0.values),
        saturated=RegionMask(grid, p0.values > p_threshold),
        quad_accum=ScalarField.zeros(grid),
    )


def forcing_field(
    state: HsState, t_new: float, p_predictor: ScalarField
) -> tuple[ScalarField, ScalarField]:
    """Obstacle forcing at t_new and the advanced quadrature accumulator.

    The running integral of exp(-g0 s)(g0 - G(p(s))) moves forward by one
    trapezoid panel built from the committed pressure at state.t and the
    predictor at t_new.  Nothing is committed here; the caller decides.
    """
    if t_new <= state.t:
        raise ValueError(f"t_new = {t_new} must exceed state.t = {state.t}")
    g0 = state.law.g0
    dt = t_new - state.t
    lo = np.exp(-g0 * state.t) * (g0 - state.law.eval(state.p.values))
    hi = np.exp(-g0 * t_new) * (g0 - state.law.eval(p_predictor.values))
    accum = state.quad_accum.values + 0.5 * dt * (lo + hi)
    forcing = np.exp(-g0 * t_new) - state.n0.values + accum
    grid = state.n0.grid
    return ScalarField(grid, forcing), ScalarField(grid, accum)


def hs_step(state: HsState, cfg: HsRunConfig) -> HsState:
    """One accepted step of length cfg.dt.

    Fixed-point rounds: freeze a pressure predictor, rebuild the forcing,
    re-solve the obstacle problem warm-started from the previous w, recover
    the pressure from the backward difference of w, repeat.  The last
    round's fields are committed together so the stored forcing is exactly
    the one the stored w solves.
    """
    t_new = state.t + cfg.dt
    g0 = state.law.g0
    p_hat = state.p
    w_old = state.w
    warm = state.w
    for _ in range(cfg.picard_iters):
        forcing, accum = forcing_field(state, t_new, p_hat)
        try:
            sol = psor_solve(
                ObstacleSpec(
                    forcing=forcing,
                    tol=cfg.psor_tol,
                    omega=cfg.psor_omega,
                    max_iters=cfg.psor_max_iters,
                    warm_start=warm,
                )
            )
        except ObstacleDivergenceError as exc:
            raise HsSolverError(f"obstacle solve failed at t = {t_new:.6g}: {exc}") from exc
        warm = sol.w
        growth_factor = np.exp(g0 * t_new)
        p_hat = ScalarField(
            state.n0.grid,
            np.clip(growth_factor * (sol.w.values - w_old.values) / cfg.dt, 0.0, state.law.p_max),
        )
    drop = float(np.min(warm.values - w_old.values))
    if drop < -10.0 * cfg.psor_tol:
        raise HsSolverError(
            f"integrated pressure lost monotonicity at t = {t_new:.6g} (min drop {drop:.3e})"
        )
    free_density = np.minimum(1.0, np.exp(g0 * t_new) * state.n0.values)
    saturated_mask = p_hat.values > cfg.p_threshold
    n_new = np.where(saturated_mask, 1.0, free_density)
    return HsState(
        t=t_new,
        law=state.law,
        n0=state.n0,
        n=ScalarField(state.n0.grid, n_new),
        p=p_hat,
        w=warm,
        forcing=forcing,
        saturated=RegionMask(state.n0.grid, saturated_mask),
        quad_accum=accum,
    )


def hs_run(n0: ScalarField, law: GrowthLaw, cfg: HsRunConfig) -> list[HsState]:
    """March to t_final with fixed dt, emitting copies on the snapshot cadence.

    Snapshot times snap to whole steps; cfg.snapshot_every should be a
    multiple of cfg.dt for exact cadence (enforced within 1e-9 relative).
    """
    ratio = cfg.snapshot_every / cfg.dt
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        raise ValueError(
            f"snapshot_every = {cfg.snapshot_every} is not a multiple of dt = {cfg.dt}"
        )
    every = max(1, int(round(ratio)))
    span_ratio = cfg.t_final / cfg.snapshot_every
    if abs(span_ratio - round(span_ratio)) > 1e-9 * max(1.0, span_ratio):
        raise ValueError(
            f"t_final = {cfg.t_final} is not a multiple of snapshot_every = {cfg.snapshot_every}"
        )
    n_steps = int(round(cfg.t_final / cfg.dt))
    if abs(n_steps * cfg.dt - cfg.t_final) > 1e-9 * cfg.t_final:
        raise ValueError(f"t_final = {cfg.t_final} is not a multiple of dt = {cfg.dt}")
    state = initial_state(n0, law, cfg.p_threshold)
    snapshots = [state]
    for step in range(1, n_steps + 1):
        state = hs_step(state, cfg)
        if step % every == 0 or step == n_steps:
            snapshots.append(state)
    return snapshots


def mass_of(state: HsState) -> float:
    return integrate(state.n)


def pressure_mass_bound(state: HsState) -> tuple[float, float]:
    """(integral of p, its theoretical cap p_max e^{g0 t} integral of n0)."""
    cap = state.law.p_max * float(np.exp(state.law.g0 * state.t)) * integrate(state.n0)
    return integrate(state.p), cap
