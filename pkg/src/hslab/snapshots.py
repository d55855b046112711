"""Text snapshot files.

One file per saved time: commented header with run metadata, then one CSV row
per cell in row-major order.  Floats are written with repr(), which
round-trips exactly, so read -> write reproduces the file byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField

_MAGIC = "# hslab-snapshot v1"
_AXES = ("x", "y")


class SnapshotFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Field values of one run at one time.  gamma is math.inf for the
    stiff-limit solver."""

    t: float
    gamma: float
    grid: Grid
    fields: dict[str, ScalarField]

    def __post_init__(self) -> None:
        if not self.fields:
            raise ValueError("snapshot needs at least one field")
        for name, f in self.fields.items():
            if f.grid != self.grid:
                raise ValueError(f"field {name!r} lives on a different grid")
            if not name.isidentifier():
                raise ValueError(f"field name {name!r} is not an identifier")


def write_snapshot(path: Path | str, snap: Snapshot) -> None:
    grid = snap.grid
    names = list(snap.fields)
    lines = [
        _MAGIC,
        f"# t = {snap.t!r}",
        f"# gamma = {snap.gamma!r}",
        f"# dim = {grid.dim}",
        f"# cells = {grid.cells}",
        f"# half_width = {grid.half_width!r}",
        f"# fields = {','.join(names)}",
        ",".join(_AXES[: grid.dim] + tuple(names)),
    ]
    points = grid.center_points()
    columns = [snap.fields[name].values.ravel() for name in names]
    for row in range(points.shape[0]):
        cells = [repr(float(points[row, ax])) for ax in range(grid.dim)]
        cells.extend(repr(float(col[row])) for col in columns)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _header_value(line: str, key: str) -> str:
    prefix = f"# {key} = "
    if not line.startswith(prefix):
        raise SnapshotFormatError(f"expected header {key!r}, got line {line!r}")
    return line[len(prefix):]


def read_snapshot(path: Path | str) -> Snapshot:
    text = Path(path).read_text()
    lines = text.splitlines()
    if len(lines) < 9:
        raise SnapshotFormatError(f"{path}: truncated file")
    if lines[0] != _MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic line {lines[0]!r}")
    try:
        t = float(_header_value(lines[1], "t"))
        gamma = float(_header_value(lines[2], "gamma"))
        dim = int(_header_value(lines[3], "dim"))
        cells = int(_header_value(lines[4], "cells"))
        half_width = float(_header_value(lines[5], "half_width"))
        names = _header_value(lines[6], "fields").split(",")
    except ValueError as exc:
        raise SnapshotFormatError(f"{path}: {exc}") from exc
    if math.isnan(gamma) or (not math.isinf(gamma) and gamma <= 1.0):
        raise SnapshotFormatError(f"{path}: gamma must be > 1 or inf, got {gamma!r}")
    grid = Grid(dim=dim, cells=cells, half_width=half_width)
    expected_cols = ",".join(_AXES[:dim] + tuple(names))
    if lines[7] != expected_cols:
        raise SnapshotFormatError(
            f"{path}: column row {lines[7]!r} does not match fields header"
        )
    rows = lines[8:]
    if len(rows) != grid.n_cells:
        raise SnapshotFormatError(
            f"{path}: expected {grid.n_cells} data rows, found {len(rows)}"
        )
    n_cols = dim + len(names)
    try:
        data = np.array(
            [[float(v) for v in row.split(",")] for row in rows], dtype=np.float64
        )
    except ValueError as exc:
        raise SnapshotFormatError(f"{path}: bad data row ({exc})") from exc
    if data.shape != (grid.n_cells, n_cols):
        raise SnapshotFormatError(f"{path}: ragged data rows")
    centers = grid.center_points()
    if not np.array_equal(data[:, :dim], centers):
        raise SnapshotFormatError(f"{path}: coordinate columns do not match the grid")
    fields = {}
    for k, name in enumerate(names):
        fields[name] = ScalarField(grid, data[:, dim + k].reshape(grid.shape).copy())
    return Snapshot(t=t, gamma=gamma, grid=grid, fields=fields)


def snapshot_filename(index: int) -> str:
    return f"snap_{index:04d}.csv"


def list_snapshots(directory: Path | str) -> list[Path]:
    """Snapshot files of a run directory in time order (index order)."""
    out = sorted(Path(directory).glob("snap_[0-9][0-9][0-9][0-9].csv"))
    if not out:
        raise FileNotFoundError(f"no snapshot files under {directory}")
    return out


def write_plotdata(path: Path | str, header: list[str], rows: list[list[float]]) -> None:
    """Small tidy CSV for external plotting; same repr() float policy."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
