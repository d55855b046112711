"""Closed-form comparison objects: a parabolic supersolution barrier, the
steady 1D pressure profile on an interval, and the front ODE it induces.

These are always evaluated analytically, never discretized; runs are compared
against them, not the other way round.  All derivatives used by the residual
are exact formulas, so a nonnegative residual is a statement about the
barrier itself, not about a scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .growth import GrowthLaw


@dataclass(frozen=True, eq=False)
class Barrier:
    """Expanding parabolic cap P(x, t) = (height - (|x - center| - r0)^2 / 4t)+.

    Valid as a supersolution of the stiff pressure flow for
    0 < t <= min(1 / (4 g0), r0^2 / (16 dim^2 height)); within that window it
    vanishes identically on the ball of radius r0 (2 dim - 1) / (2 dim), which
    is what makes it useful: nothing can invade that core before the window
    closes.
    """

    height: float
    r0: float
    center: tuple[float, ...]
    law: GrowthLaw
    gamma: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.height) or self.height <= 0.0:
            raise ValueError(f"height must be positive, got {self.height}")
        if not np.isfinite(self.r0) or self.r0 <= 0.0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if len(self.center) not in (1, 2):
            raise ValueError(f"center must have 1 or 2 coordinates, got {len(self.center)}")
        if not np.isfinite(self.gamma) or self.gamma <= 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def time_window(self) -> float:
        return min(
            1.0 / (4.0 * self.law.g0),
            self.r0**2 / (16.0 * self.dim**2 * self.height),
        )

    @property
    def flat_radius(self) -> float:
        return self.r0 * (2.0 * self.dim - 1.0) / (2.0 * self.dim)

    def _radius(self, x) -> float:
        pt = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if pt.shape != (self.dim,):
            raise ValueError(f"point must have {self.dim} coordinates, got shape {pt.shape}")
        return float(np.sqrt(np.sum((pt - np.asarray(self.center)) ** 2)))

    def _check_window(self, t: float) -> None:
        if not (0.0 < t <= self.time_window):
            raise ValueError(f"t = {t} outside the validity window (0, {self.time_window:.6g}]")

    def eval(self, x, t: float) -> float:
        """Barrier value at a point inside the ball, within the time window."""
        self._check_window(t)
        rho = self._radius(x)
        if rho > self.r0:
            raise ValueError(f"|x - center| = {rho:.6g} exceeds r0 = {self.r0}")
        return max(0.0, self.height - (rho - self.r0) ** 2 / (4.0 * t))

    def residual(self, x, t: float) -> float:
        """Supersolution defect d_t P - gamma P lap P - |grad P|^2 - gamma P g0.

        Exact partial derivatives of the radial profile; nonnegative
        throughout the smoothness region {P > 0} inside the ball.  The time
        derivative and |grad P|^2 cancel exactly, leaving
        -gamma P (lap P + g0).
        """
        self._check_window(t)
        rho = self._radius(x)
        if rho >= self.r0:
            raise ValueError(f"residual needs an interior point: |x - center| = {rho:.6g}")
        value = self.height - (rho - self.r0) ** 2 / (4.0 * t)
        if value <= 0.0:
            raise ValueError("residual queried outside the smoothness region {P > 0}")
        # radial profile f(rho) = height - (rho - r0)^2 / 4t:
        #   f'  = -(rho - r0) / 2t
        #   f'' = -1 / 2t
        #   lap = f'' + (dim - 1) f' / rho
        lap = -1.0 / (2.0 * t)
        if self.dim > 1:
            lap += -(self.dim - 1) * (rho - self.r0) / (2.0 * t * rho)
        return -self.gamma * value * (lap + self.law.g0)


def stiffness_rate(law: GrowthLaw) -> float:
    """Decay rate k = sqrt(g0 / p_max) of the steady interval profile."""
    return math.sqrt(law.g0 / law.p_max)


def cosh_profile(law: GrowthLaw, half_width: float, x) -> np.ndarray:
    """Steady pressure p_max (1 - cosh(k x) / cosh(k R)) on [-R, R].

    Solves -p'' = G(p) with p(+-R) = 0 for the linear law; the derivation
    needs the linear shape, so tabulated laws are rejected.
    """
    if not law.is_linear:
        raise ValueError("the interval profile is only closed-form for linear laws")
    if half_width <= 0.0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    xs = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(xs) > half_width * (1.0 + 1e-12)):
        raise ValueError("profile queried outside [-R, R]")
    k = stiffness_rate(law)
    return law.p_max * (1.0 - np.cosh(k * xs) / math.cosh(k * half_width))


def front_speed(law: GrowthLaw, half_width: float) -> float:
    """Boundary slope of the interval profile: p_max k tanh(k R).

    With nothing to absorb ahead of the front this slope is the front speed,
    so the support radius obeys dR/dt = p_max k tanh(k R).
    """
    if not law.is_linear:
        raise ValueError("the front ODE is only closed-form for linear laws")
    if half_width <= 0.0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    k = stiffness_rate(law)
    return law.p_max * k * math.tanh(k * half_width)


def integrate_front_ode(law: GrowthLaw, r_start: float, times) -> np.ndarray:
    """Classical RK4 integration of dR/dt = p_max k tanh(k R) on given times.

    Substeps are capped so the local step never exceeds 1e-3 of the total
    span, well below the accuracy anything downstream asserts.
    """
    ts = np.asarray(times, dtype=np.float64)
    if ts.ndim != 1 or ts.size < 1 or np.any(np.diff(ts) <= 0.0):
        raise ValueError("times must be strictly increasing")
    if r_start <= 0.0:
        raise ValueError(f"r_start must be positive, got {r_start}")
    span = float(ts[-1] - ts[0]) if ts.size > 1 else 0.0
    max_dt = max(span * 1e-3, 1e-12)
    out = np.empty(ts.size)
    r = float(r_start)
    out[0] = r

    def rhs(radius: float) -> float:
        return front_speed(law, radius)

    for idx in range(1, ts.size):
        t0, t1 = float(ts[idx - 1]), float(ts[idx])
        nsub = max(1, int(math.ceil((t1 - t0) / max_dt)))
        dt = (t1 - t0) / nsub
        for _ in range(nsub):
            k1 = rhs(r)
            k2 = rhs(r + 0.5 * dt * k1)
            k3 = rhs(r + 0.5 * dt * k2)
            k4 = rhs(r + dt * k3)
            r += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[idx] = r
    return out
