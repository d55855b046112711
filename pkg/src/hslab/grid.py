"""Uniform cell-centered grids and the discrete operators built on them.

The box is [-half_width, half_width]^dim with an equal cell count per axis.
Cell centers sit at -half_width + (i + 1/2) * h.  All fields are one value
per cell; 2D arrays are indexed [ix, iy] and stored C-contiguous.

Boundary conventions are fixed once here and relied on everywhere else:

* ``laplacian``        -- Dirichlet ghost value 0 outside the box
* ``grad_sq``          -- central differences inside, one-sided at the edge
* ``flux_divergence``  -- zero flux through exterior faces (conservative)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Geometry of the computational box."""

    dim: int
    cells: int
    half_width: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.cells) != self.cells or self.cells < 8:
            raise ValueError(f"cells must be an integer >= 8, got {self.cells}")
        if not np.isfinite(self.half_width) or self.half_width <= 0.0:
            raise ValueError(f"half_width must be positive and finite, got {self.half_width}")
        object.__setattr__(self, "cells", int(self.cells))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.cells

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.cells**self.dim

    @cached_property
    def axis_centers(self) -> np.ndarray:
        i = np.arange(self.cells, dtype=np.float64)
        return -self.half_width + (i + 0.5) * self.h

    def center_points(self) -> np.ndarray:
        """All cell centers as a (n_cells, dim) array in row-major cell order."""
        c = self.axis_centers
        if self.dim == 1:
            return c[:, None].copy()
        x, y = np.meshgrid(c, c, indexing="ij")
        return np.column_stack([x.ravel(), y.ravel()])

    def coordinate_fields(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinate arrays of full ``shape``."""
        c = self.axis_centers
        if self.dim == 1:
            return (c.copy(),)
        return tuple(np.meshgrid(c, c, indexing="ij"))


def _validated_values(grid: Grid, values: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != grid.shape:
        raise ValueError(f"{name} shape {arr.shape} does not match grid shape {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One float64 value per cell, validated finite on construction."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _validated_values(self.grid, self.values, "values"))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls.full(grid, 0.0)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Boolean membership flag per cell."""

    grid: Grid
    member: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.member)
        if arr.dtype != np.bool_:
            raise ValueError(f"member must be a boolean array, got dtype {arr.dtype}")
        if arr.shape != self.grid.shape:
            raise ValueError(f"member shape {arr.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "member", np.ascontiguousarray(arr))

    @classmethod
    def empty(cls, grid: Grid) -> "RegionMask":
        return cls(grid, np.zeros(grid.shape, dtype=bool))

    def count(self) -> int:
        return int(np.count_nonzero(self.member))

    def is_empty(self) -> bool:
        return not bool(self.member.any())


def _require_same_grid(a, b, what: str) -> None:
    if a.grid != b.grid:
        raise ValueError(f"{what}: operands live on different grids")


def laplacian(f: ScalarField) -> ScalarField:
    """Standard 3/5-point Laplacian with Dirichlet ghost value 0 at the box edge."""
    v = f.values
    h2 = f.grid.h * f.grid.h
    out = -2.0 * f.grid.dim * v.copy()
    for axis in range(f.grid.dim):
        shifted_up = np.roll(v, -1, axis=axis)
        shifted_dn = np.roll(v, 1, axis=axis)
        # roll wraps around; overwrite the wrapped entries with the ghost value 0
        idx_last = [slice(None)] * f.grid.dim
        idx_last[axis] = -1
        shifted_up[tuple(idx_last)] = 0.0
        idx_first = [slice(None)] * f.grid.dim
        idx_first[axis] = 0
        shifted_dn[tuple(idx_first)] = 0.0
        out += shifted_up + shifted_dn
    return ScalarField(f.grid, out / h2)


def grad_sq(f: ScalarField) -> ScalarField:
    """Squared gradient magnitude: central differences inside, one-sided at the edge."""
    v = f.values
    h = f.grid.h
    out = np.zeros_like(v)
    for axis in range(f.grid.dim):
        d = np.empty_like(v)
        sl = [slice(None)] * f.grid.dim

        def ax(s):
            idx = list(sl)
            idx[axis] = s
            return tuple(idx)

        d[ax(slice(1, -1))] = (v[ax(slice(2, None))] - v[ax(slice(None, -2))]) / (2.0 * h)
        d[ax(0)] = (v[ax(1)] - v[ax(0)]) / h
        d[ax(-1)] = (v[ax(-1)] - v[ax(-2)]) / h
        out += d * d
    return ScalarField(f.grid, out)


def flux_divergence(coeff: ScalarField, potential: ScalarField) -> ScalarField:
    """Conservative divergence of coeff * grad(potential).

    Face coefficients are the arithmetic mean of the two adjacent cells;
    exterior faces carry zero flux, so the cell sum telescopes to zero.
    """
    _require_same_grid(coeff, potential, "flux_divergence")
    n = coeff.values
    p = potential.values
    g = coeff.grid
    h = g.h
    out = np.zeros_like(p)
    for axis in range(g.dim):
        sl = [slice(None)] * g.dim

        def ax(s):
            idx = list(sl)
            idx[axis] = s
            return tuple(idx)

        face_coeff = 0.5 * (n[ax(slice(1, None))] + n[ax(slice(None, -1))])
        face_flux = face_coeff * (p[ax(slice(1, None))] - p[ax(slice(None, -1))]) / h
        out[ax(slice(None, -1))] += face_flux / h
        out[ax(slice(1, None))] -= face_flux / h
    return ScalarField(g, out)


def integrate(f: ScalarField) -> float:
    """Cell-sum quadrature: sum of values times h^dim."""
    return float(np.sum(f.values) * f.grid.h**f.grid.dim)


def support_margin_cells(mask: RegionMask) -> int:
    """Smallest distance (in cells) from any member cell to the box edge."""
    if mask.is_empty():
        return mask.grid.cells
    idx = np.nonzero(mask.member)
    margin = mask.grid.cells
    for axis_idx in idx:
        margin = min(margin, int(axis_idx.min()), int(mask.grid.cells - 1 - axis_idx.max()))
    return margin


def warn_if_support_near_edge(mask: RegionMask, what: str, min_cells: int = 10) -> None:
    """Boundary effects contaminate runs whose data sits close to the box edge."""
    margin = support_margin_cells(mask)
    if margin < min_cells:
        warnings.warn(
            f"{what}: support is {margin} cells from the box edge (want >= {min_cells}); "
            "results near the boundary are unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
