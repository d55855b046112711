import math

import numpy as np
import pytest

from hslab.grid import Grid, ScalarField
from hslab.snapshots import (
    Snapshot,
    SnapshotFormatError,
    list_snapshots,
    read_snapshot,
    snapshot_filename,
    write_plotdata,
    write_snapshot,
)


def _sample_snapshot(dim=1, cells=16, gamma=math.inf):
    g = Grid(dim=dim, cells=cells, half_width=1.0)
    rng = np.random.default_rng(7)
    fields = {
        "n": ScalarField(g, rng.random(g.shape)),
        "p": ScalarField(g, rng.random(g.shape)),
    }
    return Snapshot(t=0.125, gamma=gamma, grid=g, fields=fields)


def test_round_trip_is_byte_exact(tmp_path):
    snap = _sample_snapshot()
    path = tmp_path / "snap_0000.csv"
    write_snapshot(path, snap)
    first = path.read_bytes()
    back = read_snapshot(path)
    assert back.t == snap.t
    assert back.gamma == snap.gamma
    assert back.grid == snap.grid
    assert list(back.fields) == ["n", "p"]
    for name in snap.fields:
        np.testing.assert_array_equal(back.fields[name].values, snap.fields[name].values)
    path2 = tmp_path / "again.csv"
    write_snapshot(path2, back)
    assert path2.read_bytes() == first


def test_round_trip_2d(tmp_path):
    snap = _sample_snapshot(dim=2, cells=8, gamma=12.0)
    path = tmp_path / "s.csv"
    write_snapshot(path, snap)
    back = read_snapshot(path)
    assert back.gamma == 12.0
    np.testing.assert_array_equal(back.fields["p"].values, snap.fields["p"].values)
    assert back.fields["p"].values.shape == (8, 8)


def test_snapshot_validation():
    g = Grid(dim=1, cells=8, half_width=1.0)
    other = Grid(dim=1, cells=16, half_width=1.0)
    f = ScalarField(g, np.zeros(8))
    with pytest.raises(ValueError):
        Snapshot(t=0.0, gamma=2.0, grid=g, fields={})
    with pytest.raises(ValueError):
        Snapshot(t=0.0, gamma=2.0, grid=other, fields={"n": f})
    with pytest.raises(ValueError):
        Snapshot(t=0.0, gamma=2.0, grid=g, fields={"bad name": f})


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")


def _valid_lines(tmp_path):
    snap = _sample_snapshot(cells=8)
    path = tmp_path / "ok.csv"
    write_snapshot(path, snap)
    return path.read_text().splitlines()


@pytest.mark.parametrize(
    "mutate,phrase",
    [
        (lambda ls: ["# wrong magic"] + ls[1:], "bad magic"),
        (lambda ls: [ls[0], "# tt = 0.1"] + ls[2:], "expected header 't'"),
        (lambda ls: ls[:2] + ["# gamma = soup"] + ls[3:], "could not convert"),
        (lambda ls: ls[:2] + ["# gamma = 0.5"] + ls[3:], "gamma must be > 1"),
        (lambda ls: ls[:2] + ["# gamma = nan"] + ls[3:], "gamma must be > 1"),
        (lambda ls: ls[:7] + ["x,n,q"] + ls[8:], "column row"),
        (lambda ls: ls[:-1], "expected 8 data rows"),
        (lambda ls: ls + [ls[-1]], "expected 8 data rows"),
        (lambda ls: ls[:8] + [ls[8] + ",0.0"] + ls[9:], "bad data row"),
        (lambda ls: ls[:8] + [r + ",0.0" for r in ls[8:]], "ragged"),
        (lambda ls: ls[:8] + ["zap," + ls[8].split(",", 1)[1]] + ls[9:], "bad data row"),
    ],
)
def test_malformed_files_rejected(tmp_path, mutate, phrase):
    lines = _valid_lines(tmp_path)
    bad = tmp_path / "bad.csv"
    _write_lines(bad, mutate(lines))
    with pytest.raises(SnapshotFormatError, match=phrase):
        read_snapshot(bad)


def test_wrong_coordinates_rejected(tmp_path):
    lines = _valid_lines(tmp_path)
    row = lines[8].split(",")
    row[0] = repr(float(row[0]) + 1e-9)
    lines[8] = ",".join(row)
    bad = tmp_path / "bad.csv"
    _write_lines(bad, lines)
    with pytest.raises(SnapshotFormatError, match="coordinate columns"):
        read_snapshot(bad)


def test_truncated_file_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# hslab-snapshot v1\n")
    with pytest.raises(SnapshotFormatError, match="truncated"):
        read_snapshot(bad)


def test_filename_and_listing(tmp_path):
    assert snapshot_filename(0) == "snap_0000.csv"
    assert snapshot_filename(123) == "snap_0123.csv"
    snap = _sample_snapshot(cells=8)
    for i in (2, 0, 1):
        write_snapshot(tmp_path / snapshot_filename(i), snap)
    (tmp_path / "other.csv").write_text("x\n")
    found = list_snapshots(tmp_path)
    assert [p.name for p in found] == ["snap_0000.csv", "snap_0001.csv", "snap_0002.csv"]
    with pytest.raises(FileNotFoundError):
        list_snapshots(tmp_path / "empty")


def test_plotdata_format(tmp_path):
    path = tmp_path / "mass.csv"
    write_plotdata(path, ["t", "mass"], [[0.0, 1.0], [0.5, np.float64(1.25)]])
    assert path.read_text() == "t,mass\n0.0,1.0\n0.5,1.25\n"
