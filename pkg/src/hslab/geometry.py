"""Instruments that measure rasterized sets.

Every set here is a RegionMask; all distances are Euclidean distances between
cell centers.  Rasterization error is therefore O(h) by construction, and
callers budget for it rather than this module hiding it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from .grid import RegionMask, ScalarField


def positivity_set(f: ScalarField, threshold: float) -> RegionMask:
    """Cells with value strictly above the threshold."""
    if not np.isfinite(threshold):
        raise ValueError(f"threshold must be finite, got {threshold}")
    return RegionMask(f.grid, f.values > threshold)


def member_points(mask: RegionMask) -> np.ndarray:
    """(k, dim) array of member cell centers, in row-major cell order."""
    return mask.grid.center_points()[mask.member.ravel()]


def hausdorff_distance(a: RegionMask, b: RegionMask) -> float:
    """Symmetric Hausdorff distance between member cell centers.

    Conventions: both empty -> 0; exactly one empty -> +inf.
    """
    if a.grid != b.grid:
        raise ValueError("masks live on different grids")
    a_empty, b_empty = a.is_empty(), b.is_empty()
    if a_empty and b_empty:
        return 0.0
    if a_empty or b_empty:
        return math.inf
    pa = member_points(a)
    pb = member_points(b)
    d_ab = float(np.max(cKDTree(pb).query(pa)[0]))
    d_ba = float(np.max(cKDTree(pa).query(pb)[0]))
    return max(d_ab, d_ba)


def neighborhood(a: RegionMask, delta: float) -> RegionMask:
    """Cells whose center lies within delta of some member center of a.

    delta = 0 returns a itself; an empty input stays empty.
    """
    if delta < 0.0 or not np.isfinite(delta):
        raise ValueError(f"delta must be finite and >= 0, got {delta}")
    if a.is_empty():
        return RegionMask(a.grid, np.zeros(a.grid.shape, dtype=bool))
    dist = cKDTree(member_points(a)).query(a.grid.center_points())[0]
    return RegionMask(a.grid, (dist <= delta).reshape(a.grid.shape))


def minimal_diameter(a: RegionMask, n_angles: int = 360) -> float:
    """Smallest width of the member centers over a direction sweep.

    Width along a direction is max minus min of the projections.  In 1D the
    sweep is trivially the extent; in 2D the directions are n_angles equally
    spaced angles over a half turn.  Empty set -> 0 (degenerate convention).
    """
    if a.is_empty():
        return 0.0
    pts = member_points(a)
    if a.grid.dim == 1:
        return float(pts[:, 0].max() - pts[:, 0].min())
    if n_angles < 4:
        raise ValueError(f"n_angles must be >= 4, got {n_angles}")
    angles = np.arange(n_angles) * (math.pi / n_angles)
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    proj = pts @ directions.T
    widths = proj.max(axis=0) - proj.min(axis=0)
    return float(widths.min())


def _ball_mask(grid, center: np.ndarray, r: float) -> np.ndarray:
    pts = grid.center_points()
    dist_sq = np.sum((pts - center) ** 2, axis=1)
    return (dist_sq <= r * r).reshape(grid.shape)


def _snap_to_cell_center(grid, x) -> np.ndarray:
    pt = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if pt.shape != (grid.dim,):
        raise ValueError(f"point must have {grid.dim} coordinates, got shape {pt.shape}")
    idx = np.clip(
        np.floor((pt + grid.half_width) / grid.h).astype(int), 0, grid.cells - 1
    )
    return grid.axis_centers[idx]


def _check_probe_ball(grid, center: np.ndarray, r: float) -> None:
    if r < 3.0 * grid.h:
        raise ValueError(f"probe radius {r:.6g} must be at least 3 h = {3.0 * grid.h:.6g}")
    if np.any(np.abs(center) + r > grid.half_width):
        raise ValueError("probe ball exits the grid")


def flatness_ratio(p: ScalarField, x, r: float, threshold: float) -> float:
    """Minimal diameter of the vanishing set inside a probe ball, over r.

    The vanishing set is {p <= threshold}; x snaps to the nearest cell
    center.  Small values flag a thin sliver of vacuum, large values a fat
    one.
    """
    grid = p.grid
    center = _snap_to_cell_center(grid, x)
    _check_probe_ball(grid, center, r)
    inside = _ball_mask(grid, center, r)
    vanishing = RegionMask(grid, (p.values <= threshold) & inside)
    return minimal_diameter(vanishing) / r


def lebesgue_density(p: ScalarField, x, r: float, threshold: float) -> float:
    """Cell-count fraction of the probe ball where p <= threshold."""
    grid = p.grid
    center = _snap_to_cell_center(grid, x)
    _check_probe_ball(grid, center, r)
    inside = _ball_mask(grid, center, r)
    ball_cells = int(np.count_nonzero(inside))
    if ball_cells == 0:
        raise ValueError("probe ball contains no cell centers")
    hit = int(np.count_nonzero((p.values <= threshold) & inside))
    return hit / ball_cells


def radial_bounds(a: RegionMask, center=None) -> tuple[float, float]:
    """(R_minus, R_plus): inscribed and circumscribed radii about a point.

    R_plus is the largest center distance of a member cell plus h/2; R_minus
    is the largest radius whose disc contains only member cell centers,
    minus h/2, floored at 0.  Empty set -> (0, 0).
    """
    grid = a.grid
    if center is None:
        center = np.zeros(grid.dim)
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    if center.shape != (grid.dim,):
        raise ValueError(f"center must have {grid.dim} coordinates")
    if a.is_empty():
        return 0.0, 0.0
    dist = np.sqrt(np.sum((grid.center_points() - center) ** 2, axis=1))
    member = a.member.ravel()
    r_plus = float(dist[member].max()) + 0.5 * grid.h
    outside = dist[~member]
    if outside.size == 0:
        inner = float(dist.max()) + grid.h
    else:
        inner = float(outside.min())
    r_minus = max(0.0, inner - 0.5 * grid.h)
    return r_minus, r_plus


def front_position_1d(p: ScalarField, threshold: float = 0.0) -> float:
    """Rightmost zero crossing of a 1D pressure profile, subcell-interpolated.

    Takes the rightmost cell with p > threshold and extrapolates the linear
    profile through it and its left neighbour down to zero.  The profile is
    exactly zero past the front, so the interior slope is the only usable
    one; interpolating against the zero side would snap to cell edges.
    Raises if the profile is empty or touches the right edge.
    """
    if p.grid.dim != 1:
        raise ValueError("front tracking is 1D only")
    v = p.values
    active = np.nonzero(v > threshold)[0]
    if active.size == 0:
        raise ValueError("no cell above threshold; front undefined")
    i = int(active[-1])
    x = p.grid.axis_centers
    if i == p.grid.cells - 1:
        raise ValueError("front touches the right edge of the box")
    p_in = float(v[i])
    if i == 0 or float(v[i - 1]) <= p_in:
        return float(x[i]) + 0.5 * p.grid.h
    slope = (float(v[i - 1]) - p_in) / p.grid.h
    # the root may sit past the first untouched cell (its value is pinned at
    # zero until the contact set reaches it); allow up to one extra cell
    frac = p_in / (slope * p.grid.h)
    return float(x[i] + min(2.0, frac) * p.grid.h)


def contact_front_1d(w: ScalarField, threshold: float = 0.0) -> float:
    """Rightmost zero of a field with quadratic contact (like the
    time-integrated pressure of an obstacle problem).

    Near such a front sqrt(w) is linear, so the root is extrapolated from
    sqrt of the last two positive cells.  More accurate than
    front_position_1d for quadratic vanishing.
    """
    if w.grid.dim != 1:
        raise ValueError("contact front is a 1D instrument")
    v = w.values
    active = np.nonzero(v > threshold)[0]
    if active.size < 2:
        raise ValueError("need at least two cells above threshold")
    i = int(active[-1])
    if i == w.grid.cells - 1:
        raise ValueError("front touches the right edge of the box")
    s_last, s_prev = math.sqrt(float(v[i])), math.sqrt(float(v[i - 1]))
    if s_prev <= s_last:
        return float(w.grid.axis_centers[i]) + 0.5 * w.grid.h
    x = float(w.grid.axis_centers[i])
    return x + w.grid.h * s_last / (s_prev - s_last)
