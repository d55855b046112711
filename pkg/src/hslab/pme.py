"""Finite-stiffness runs: density transport with a power law of state.

The density n moves by div(n grad p) plus growth n*G(p), with pressure
p = n^gamma.  Time stepping is forward Euler at a stability-limited step;
each step clips incidental negative values at zero and aborts the run if a
clip ever exceeds the audit tolerance, so silent mass injection cannot hide.

Runs with a linear growth law go through the compiled kernels; tabulated
laws fall back to a plain numpy loop (correct, slower).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .grid import (
    RegionMask,
    ScalarField,
    flux_divergence,
    grad_sq,
    integrate,
    warn_if_support_near_edge,
)
from .growth import GrowthLaw

DEFAULT_CFL = 0.45
_STATE_TOL = 1e-10


class PmeInstabilityError(RuntimeError):
    """A step produced NaN, a runaway value, or an over-tolerance clip."""


@dataclass(frozen=True, eq=False)
class PmeState:
    """Density snapshot of a finite-stiffness run at one instant."""

    gamma: float
    t: float
    n: ScalarField
    law: GrowthLaw

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma) or self.gamma <= 1.0:
            raise ValueError(f"gamma must be a real number > 1, got {self.gamma}")
        cap = self.law.p_max ** (1.0 / self.gamma)
        v = self.n.values
        if v.min() < -_STATE_TOL or v.max() > cap + _STATE_TOL:
            raise ValueError(
                f"density out of range: min {v.min():.3e}, max {v.max():.3e}, cap {cap:.6g}"
            )


def pressure_of(state: PmeState) -> ScalarField:
    """Law of state p = n^gamma."""
    v = state.n.values
    if v.min() < 0.0:
        raise ValueError(f"negative density {v.min():.3e} has no pressure")
    return ScalarField(state.n.grid, v**state.gamma)


def scale_initial_data(profile: ScalarField, gamma: float, law: GrowthLaw) -> ScalarField:
    """Map a shape in [0, 1] to initial density p_max^(1/gamma) * profile.

    Scaled this way, a saturated cell starts exactly at the homeostatic
    pressure regardless of gamma, which is what makes runs at different
    gamma comparable.
    """
    v = profile.values
    if v.min() < 0.0 or v.max() > 1.0:
        raise ValueError(
            f"initial profile must lie in [0, 1], got [{v.min():.3e}, {v.max():.3e}]"
        )
    if not np.isfinite(gamma) or gamma <= 1.0:
        raise ValueError(f"gamma must be a real number > 1, got {gamma}")
    return ScalarField(profile.grid, law.p_max ** (1.0 / gamma) * v)


def stable_dt(state: PmeState, cfl_safety: float = DEFAULT_CFL) -> float:
    """Stability-limited explicit step for the current state."""
    if not (0.0 < cfl_safety <= 1.0):
        raise ValueError(f"cfl_safety must lie in (0, 1], got {cfl_safety}")
    g = state.n.grid
    p = pressure_of(state)
    max_p = float(p.values.max())
    max_grad = math.sqrt(float(grad_sq(p).values.max()))
    denom = state.gamma * max_p + max_grad * g.h + _kernels.DT_FLOOR
    return cfl_safety * g.h * g.h / (2.0 * g.dim * denom)


def _int_pow_flags(gamma: float) -> tuple[int, bool]:
    if float(gamma).is_integer() and 1 < gamma < 2**30:
        return int(gamma), True
    return 0, False


def pme_step(state: PmeState, dt: float) -> PmeState:
    """One forward Euler step of length dt (caller picks a stable dt)."""
    if dt <= 0.0 or not np.isfinite(dt):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    g = state.n.grid
    cap = state.law.p_max ** (1.0 / state.gamma)
    n = state.n.values.copy()
    out = np.empty_like(n)
    if state.law.is_linear:
        p = np.empty_like(n)
        int_gamma, use_int = _int_pow_flags(state.gamma)
        if g.dim == 1:
            _kernels.pressure_into_1d(n, p, state.gamma, int_gamma, use_int)
            status, clip, bad = _kernels.euler_step_1d(
                n, p, out, dt, g.h, state.law.g0, state.law.p_max, 2.0 * cap
            )
        else:
            _kernels.pressure_into_2d(n, p, state.gamma, int_gamma, use_int)
            status, clip, bad = _kernels.euler_step_2d(
                n, p, out, dt, g.h, state.law.g0, state.law.p_max, 2.0 * cap
            )
        _raise_on_status(status, state.t, dt, clip, bad, n)
    else:
        p_field = pressure_of(state)
        rhs = flux_divergence(state.n, p_field).values + n * state.law.eval(p_field.values)
        out = n + dt * rhs
        if not np.all(np.isfinite(out)) or out.max() > 2.0 * cap:
            raise PmeInstabilityError(
                f"unstable step at t = {state.t:.6g}: max density {out.max():.3e}"
            )
        clip = max(0.0, float(-out.min()))
        if clip > _kernels.CLIP_AUDIT:
            raise PmeInstabilityError(
                f"negativity clip {clip:.3e} exceeds audit tolerance at t = {state.t:.6g}"
            )
        out = np.maximum(out, 0.0)
    return replace(state, t=state.t + dt, n=ScalarField(g, out))


def _raise_on_status(status, t, dt, clip, bad, n) -> None:
    if status == 1:
        raise PmeInstabilityError(
            f"unstable step at t = {t:.6g} (dt = {dt:.3e}, cell {bad}, max density {n.max():.3e})"
        )
    if status == 2:
        raise PmeInstabilityError(
            f"negativity clip {clip:.3e} exceeds audit tolerance at t = {t:.6g}"
        )


def snapshot_times(t_final: float, snapshot_every: float) -> list[float]:
    """Cadence times, always including 0 and t_final."""
    if t_final <= 0.0 or snapshot_every <= 0.0:
        raise ValueError("t_final and snapshot_every must be positive")
    times = [0.0]
    k = 1
    while k * snapshot_every < t_final * (1.0 - 1e-12):
        times.append(k * snapshot_every)
        k += 1
    times.append(t_final)
    return times


def pme_run(
    initial: PmeState,
    t_final: float,
    snapshot_every: float,
    cfl_safety: float = DEFAULT_CFL,
) -> list[PmeState]:
    """Advance to t_final, emitting state copies on the snapshot cadence.

    The step size is min(stable_dt, time to the next snapshot), so snapshot
    instants are hit exactly.  Bitwise deterministic for identical inputs.
    """
    if t_final <= initial.t:
        raise ValueError(f"t_final {t_final} must exceed the initial time {initial.t}")
    if not (0.0 < cfl_safety <= 1.0):
        raise ValueError(f"cfl_safety must lie in (0, 1], got {cfl_safety}")
    warn_if_support_near_edge(
        RegionMask(initial.n.grid, initial.n.values > 0.0), "pme_run initial data"
    )
    g = initial.n.grid
    cap = initial.law.p_max ** (1.0 / initial.gamma)
    times = [s for s in snapshot_times(t_final, snapshot_every) if s > initial.t]
    snapshots = [replace(initial, n=initial.n.copy())]
    if initial.law.is_linear:
        int_gamma, use_int = _int_pow_flags(initial.gamma)
        n = initial.n.values.copy()
        t = initial.t
        advance = _kernels.advance_1d if g.dim == 1 else _kernels.advance_2d
        for t_next in times:
            t, steps, status, clip, bad = advance(
                n,
                initial.gamma,
                int_gamma,
                use_int,
                initial.law.g0,
                initial.law.p_max,
                g.h,
                cfl_safety,
                t,
                t_next,
                2.0 * cap,
            )
            _raise_on_status(status, t, float("nan"), clip, bad, n)
            snapshots.append(replace(initial, t=t, n=ScalarField(g, n.copy())))
    else:
        state = initial
        for t_next in times:
            while True:
                remaining = t_next - state.t
                if remaining <= 0.0:
                    break
                dt = stable_dt(state, cfl_safety)
                if dt >= remaining:
                    state = replace(pme_step(state, remaining), t=t_next)
                    break
                state = pme_step(state, dt)
            snapshots.append(state)
    return snapshots


def total_mass(state: PmeState) -> float:
    return integrate(state.n)
