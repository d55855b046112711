"""Pressure-dependent growth rates.

A growth law G maps pressure to a per-unit-density growth rate.  It must be
strictly decreasing with G(p_max) = 0: growth stalls at the homeostatic
pressure and turns into death beyond it.  Two shapes are supported, the
linear law g0 * (1 - p/p_max) and a user-tabulated curve interpolated with a
cubic spline.  Beyond p_max the law continues by its own formula (no
clamping), so eval stays valid for transient overshoots.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

_SEMICONVEXITY_SAMPLES = 10_001
_SIMPSON_PANELS = 512
_ROOT_TOL = 1e-8
# second-difference outlier factor used by the tabulated C1 smoothness screen
_KINK_FACTOR = 50.0


@dataclass(frozen=True, eq=False)
class GrowthLaw:
    """Growth rate as a function of pressure.

    Build with :meth:`linear` or :meth:`from_table`; the raw constructor is
    not validated.
    """

    g0: float
    p_max: float
    _spline: Optional[CubicSpline] = None

    @property
    def is_linear(self) -> bool:
        return self._spline is None

    @classmethod
    def linear(cls, g0: float, p_max: float) -> "GrowthLaw":
        if not np.isfinite(g0) or g0 <= 0.0:
            raise ValueError(f"g0 must be positive and finite, got {g0}")
        if not np.isfinite(p_max) or p_max <= 0.0:
            raise ValueError(f"p_max must be positive and finite, got {p_max}")
        return cls(float(g0), float(p_max))

    @classmethod
    def from_table(cls, pressures, rates) -> "GrowthLaw":
        """Tabulated law from sample points (p_i, G(p_i)).

        The table must start at p = 0, be strictly increasing in p and
        strictly decreasing in G, end within 1e-8 of a root, and look C1
        (no kinks in the difference quotients).
        """
        p = np.asarray(pressures, dtype=np.float64)
        g = np.asarray(rates, dtype=np.float64)
        if p.ndim != 1 or p.shape != g.shape or p.size < 4:
            raise ValueError("table needs matching 1D pressure/rate columns with >= 4 rows")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(g))):
            raise ValueError("table contains non-finite entries")
        if p[0] != 0.0:
            raise ValueError(f"table must start at p = 0, got {p[0]}")
        if not np.all(np.diff(p) > 0.0):
            raise ValueError("table pressures must be strictly increasing")
        if not np.all(np.diff(g) < 0.0):
            raise ValueError("table rates must be strictly decreasing")
        if g[0] <= 0.0:
            raise ValueError(f"G(0) must be positive, got {g[0]}")
        if abs(g[-1]) > _ROOT_TOL:
            raise ValueError(
                f"table must end at a root: |G(p_last)| = {abs(g[-1]):.3e} > {_ROOT_TOL}"
            )
        slopes = np.diff(g) / np.diff(p)
        curvature = np.abs(np.diff(slopes) / (p[2:] - p[:-2]))
        if curvature.size and np.max(curvature) > _KINK_FACTOR * (np.median(curvature) + 1e-12):
            raise ValueError("table fails the C1 screen: difference quotients jump at a kink")
        spline = CubicSpline(p, g, bc_type="natural")
        return cls(float(g[0]), float(p[-1]), spline)

    @classmethod
    def from_csv(cls, path: str | Path) -> "GrowthLaw":
        # a single non-numeric header line is allowed
        text = Path(path).read_text()
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if lines:
            try:
                float(lines[0].split(",")[0])
            except ValueError:
                lines = lines[1:]
        data = np.loadtxt(lines, delimiter=",", dtype=np.float64, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"law table {path} must have exactly 2 columns, got {data.shape[1]}")
        return cls.from_table(data[:, 0], data[:, 1])

    def eval(self, p):
        """G(p) for scalar or array p; negative pressures are rejected."""
        arr = np.asarray(p, dtype=np.float64)
        if np.any(arr < 0.0):
            raise ValueError("growth law queried at negative pressure")
        if self._spline is None:
            out = self.g0 * (1.0 - arr / self.p_max)
        else:
            out = self._spline(arr)
        return float(out) if np.isscalar(p) else out

    def derivative(self, p):
        arr = np.asarray(p, dtype=np.float64)
        if np.any(arr < 0.0):
            raise ValueError("growth law queried at negative pressure")
        if self._spline is None:
            out = np.full_like(arr, -self.g0 / self.p_max)
        else:
            out = self._spline(arr, 1)
        return float(out) if np.isscalar(p) else out

    def semiconvexity_constant(self) -> float:
        """min over [0, p_max] of G(p) - p * G'(p); must come out positive.

        For the linear law the expression is identically g0.
        """
        if self._spline is None:
            return self.g0
        samples = np.linspace(0.0, self.p_max, _SEMICONVEXITY_SAMPLES)
        c = float(np.min(self.eval(samples) - samples * self.derivative(samples)))
        if c <= 0.0:
            raise ValueError(f"law is not admissible: min(G - p G') = {c:.3e} <= 0")
        return c

    def antiderivative_H(self, p: float, alpha: float = 0.0) -> float:
        """Integral of q^alpha * G(q) over [0, p].

        Closed forms for the linear law with alpha in {0, 1}; composite
        Simpson otherwise.
        """
        if not np.isfinite(p) or p < 0.0 or p > self.p_max:
            raise ValueError(f"p must lie in [0, p_max], got {p}")
        if alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {alpha}")
        if self._spline is None and alpha == 0.0:
            return self.g0 * (p - p * p / (2.0 * self.p_max))
        if self._spline is None and alpha == 1.0:
            return self.g0 * (p * p / 2.0 - p**3 / (3.0 * self.p_max))
        if p == 0.0:
            return 0.0
        q = np.linspace(0.0, p, 2 * _SIMPSON_PANELS + 1)
        integrand = q**alpha * self.eval(q)
        return float(simpson(integrand, x=q))
