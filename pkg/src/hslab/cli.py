"""Command-line entry points.

Subcommands: pme, hs, sweep, verify, geometry.  Exit codes: 0 success,
2 configuration or input-format problem, 3 solver failure, 4 structural
checks failed.  All run outputs except manifest.txt (which records wall
time) are deterministic byte for byte for a given config.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import (
    ConfigError,
    HsParams,
    PmeParams,
    RunSetup,
    SweepParams,
    load_config_file,
    parse_kv_text,
    render_config,
    validate_config,
)
from .diagnostics import DiagnosticsReport, PmeRunData, default_suite
from .geometry import front_position_1d, positivity_set, radial_bounds
from .grid import ScalarField, integrate
from .growth import GrowthLaw
from .heleshaw import HsRunConfig, HsSolverError, HsState, hs_run, initial_state
from .obstacle import ObstacleDivergenceError
from .pme import PmeInstabilityError, PmeState, pme_run, pressure_of, scale_initial_data
from .snapshots import (
    Snapshot,
    SnapshotFormatError,
    list_snapshots,
    read_snapshot,
    snapshot_filename,
    write_plotdata,
    write_snapshot,
)

_EXIT_CONFIG = 2
_EXIT_SOLVER = 3
_EXIT_CHECKS = 4


def _write_manifest(out: Path, mode: str, wall: float, extra: dict[str, str]) -> None:
    lines = [
        "# hslab-manifest v1",
        f"version = {__version__}",
        f"mode = {mode}",
        f"wall_seconds = {wall:.3f}",
    ]
    lines.extend(f"{k} = {v}" for k, v in sorted(extra.items()))
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _write_hs_outputs(out: Path, states: Sequence[HsState], law: GrowthLaw) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for k, state in enumerate(states):
        snap = Snapshot(
            t=state.t,
            gamma=math.inf,
            grid=state.n0.grid,
            fields={"n": state.n, "p": state.p, "w": state.w, "F": state.forcing},
        )
        write_snapshot(out / snapshot_filename(k), snap)
    m0 = integrate(states[0].n0)
    mass_rows = []
    for state in states:
        envelope = math.exp(law.g0 * state.t) * m0
        mass_rows.append([state.t, integrate(state.n), integrate(state.p), envelope])
    write_plotdata(out / "mass.csv", ["t", "mass_n", "mass_p", "envelope"], mass_rows)
    if states[0].n0.grid.dim == 1:
        front_rows = []
        for state in states:
            try:
                front_rows.append([state.t, front_position_1d(state.p)])
            except ValueError:
                continue
        if front_rows:
            write_plotdata(out / "front.csv", ["t", "front"], front_rows)


def _write_pme_outputs(out: Path, states: Sequence[PmeState]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for k, state in enumerate(states):
        snap = Snapshot(
            t=state.t,
            gamma=state.gamma,
            grid=state.n.grid,
            fields={"n": state.n, "p": pressure_of(state)},
        )
        write_snapshot(out / snapshot_filename(k), snap)
    m0 = integrate(states[0].n)
    law = states[0].law
    rows = [
        [s.t, integrate(s.n), math.exp(law.g0 * s.t) * m0]
        for s in states
    ]
    write_plotdata(out / "mass.csv", ["t", "mass_n", "envelope"], rows)


def _load_hs_states(directory: Path, law: GrowthLaw, p_threshold: float) -> list[HsState]:
    states = []
    n0: Optional[ScalarField] = None
    for path in list_snapshots(directory):
        snap = read_snapshot(path)
        if not math.isinf(snap.gamma):
            raise SnapshotFormatError(f"{path}: expected a stiff-limit snapshot")
        missing = {"n", "p", "w", "F"} - set(snap.fields)
        if missing:
            raise SnapshotFormatError(f"{path}: missing fields {sorted(missing)}")
        if n0 is None:
            n0 = snap.fields["n"]
        grid = snap.grid
        accum = snap.fields["F"].values - math.exp(-law.g0 * snap.t) + n0.values
        states.append(
            HsState(
                t=snap.t,
                law=law,
                n0=n0,
                n=snap.fields["n"],
                p=snap.fields["p"],
                w=snap.fields["w"],
                forcing=snap.fields["F"],
                saturated=positivity_set(snap.fields["p"], p_threshold),
                quad_accum=ScalarField(grid, accum),
            )
        )
    return states


def _load_pme_run(directory: Path, law: GrowthLaw) -> PmeRunData:
    times, density, pressure = [], [], []
    gamma: Optional[float] = None
    for path in list_snapshots(directory):
        snap = read_snapshot(path)
        if math.isinf(snap.gamma):
            raise SnapshotFormatError(f"{path}: expected a finite-stiffness snapshot")
        if gamma is None:
            gamma = snap.gamma
        elif snap.gamma != gamma:
            raise SnapshotFormatError(f"{path}: gamma changed mid-run")
        missing = {"n", "p"} - set(snap.fields)
        if missing:
            raise SnapshotFormatError(f"{path}: missing fields {sorted(missing)}")
        times.append(snap.t)
        density.append(snap.fields["n"])
        pressure.append(snap.fields["p"])
    assert gamma is not None
    return PmeRunData(
        gamma=gamma,
        law=law,
        times=tuple(times),
        density=tuple(density),
        pressure=tuple(pressure),
    )


def _run_pme(setup: RunSetup, out: Path) -> int:
    assert isinstance(setup.params, PmeParams)
    par = setup.params
    t0 = time.monotonic()
    initial = PmeState(
        gamma=par.gamma,
        t=0.0,
        n=scale_initial_data(setup.profile, par.gamma, setup.law),
        law=setup.law,
    )
    states = pme_run(initial, par.t_final, par.snapshot_every, cfl_safety=par.cfl_safety)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(render_config(setup.mapping))
    _write_pme_outputs(out, states)
    _write_manifest(
        out, "pme", time.monotonic() - t0, {"snapshots": str(len(states))}
    )
    return 0


def _run_hs(setup: RunSetup, out: Path) -> int:
    assert isinstance(setup.params, HsParams)
    cfg = setup.params.to_run_config()
    t0 = time.monotonic()
    states = hs_run(setup.profile, setup.law, cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(render_config(setup.mapping))
    _write_hs_outputs(out, states, setup.law)
    _write_manifest(out, "hs", time.monotonic() - t0, {"snapshots": str(len(states))})
    return 0


def _run_sweep(setup: RunSetup, out: Path) -> int:
    assert isinstance(setup.params, SweepParams)
    par = setup.params
    cfg = par.hs.to_run_config()
    t0 = time.monotonic()
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(render_config(setup.mapping))

    hs_states = hs_run(setup.profile, setup.law, cfg)
    _write_hs_outputs(out / "hs", hs_states, setup.law)

    runs = []
    for gamma in par.gamma_ladder:
        initial = PmeState(
            gamma=gamma,
            t=0.0,
            n=scale_initial_data(setup.profile, gamma, setup.law),
            law=setup.law,
        )
        states = pme_run(
            initial, par.hs.t_final, par.hs.snapshot_every, cfl_safety=par.cfl_safety
        )
        _write_pme_outputs(out / f"pme_gamma_{gamma:g}", states)
        runs.append(PmeRunData.from_states(states))

    report = default_suite(
        hs_states,
        runs,
        psor_tol=par.hs.psor_tol,
        dt=par.hs.dt,
        manifest={"mode": "sweep", "gammas": ",".join(f"{g:g}" for g in par.gamma_ladder)},
    )
    (out / "report.txt").write_text(report.render())
    _write_ladder_plotdata(out, report)
    _write_manifest(
        out,
        "sweep",
        time.monotonic() - t0,
        {"snapshots": str(len(hs_states)), "gammas": str(len(par.gamma_ladder))},
    )
    print(report.render(), end="")
    return 0 if report.all_passed else _EXIT_CHECKS


def _write_ladder_plotdata(out: Path, report: DiagnosticsReport) -> None:
    for check in report.checks:
        if check.name == "gamma_convergence":
            gammas = [float(g) for g in check.context["gammas"].split(",")]
            l1_n = [float(d) for d in check.context["l1_ladder"].split(",")]
            l1_p = [float(d) for d in check.context["l1_pressure_ladder"].split(",")]
            haus = [float(d) for d in check.context["hausdorff_ladder"].split(",")]
            rows = [list(row) for row in zip(gammas, l1_n, l1_p, haus)]
            write_plotdata(
                out / "l1_ladder.csv",
                ["gamma", "l1_density", "l1_pressure", "hausdorff"],
                rows,
            )
            return


def _run_verify(run_dir: Path, out: Optional[Path]) -> int:
    config_path = run_dir / "config.txt"
    if not config_path.is_file():
        print(f"error: {config_path} not found", file=sys.stderr)
        return _EXIT_CONFIG
    mapping = parse_kv_text(config_path.read_text())
    mode = mapping.get("mode")
    if mode not in ("pme", "hs", "sweep"):
        print(f"error: config.txt has unusable mode {mode!r}", file=sys.stderr)
        return _EXIT_CONFIG
    setup = validate_config(mapping, mode, base_dir=run_dir)

    hs_states: list[HsState] = []
    runs: list[PmeRunData] = []
    if mode == "hs":
        assert isinstance(setup.params, HsParams)
        hs_states = _load_hs_states(run_dir, setup.law, setup.params.p_threshold)
        report = default_suite(
            hs_states,
            [],
            psor_tol=setup.params.psor_tol,
            dt=setup.params.dt,
            manifest={"mode": "hs"},
        )
    elif mode == "pme":
        run = _load_pme_run(run_dir, setup.law)
        report = _pme_only_report(run)
    else:
        assert isinstance(setup.params, SweepParams)
        hs_states = _load_hs_states(run_dir / "hs", setup.law, setup.params.hs.p_threshold)
        for gamma in setup.params.gamma_ladder:
            runs.append(_load_pme_run(run_dir / f"pme_gamma_{gamma:g}", setup.law))
        report = default_suite(
            hs_states,
            runs,
            psor_tol=setup.params.hs.psor_tol,
            dt=setup.params.hs.dt,
            manifest={
                "mode": "sweep",
                "gammas": ",".join(f"{g:g}" for g in setup.params.gamma_ladder),
            },
        )
    text = report.render()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text)
    print(text, end="")
    return 0 if report.all_passed else _EXIT_CHECKS


def _pme_only_report(run: PmeRunData) -> DiagnosticsReport:
    from .diagnostics import (
        check_aronson_benilan,
        check_mass_bounds_pme,
        check_pressure_rate,
    )

    checks = [check_mass_bounds_pme(run)]
    c = run.law.semiconvexity_constant()
    if 5.0 / (run.gamma * c) < run.times[-1]:
        checks.append(check_aronson_benilan(run))
        checks.append(check_pressure_rate(run))
    return DiagnosticsReport(
        checks=tuple(checks), manifest={"mode": "pme", "gamma": f"{run.gamma:g}"}
    )


def _run_geometry(snapshot_path: Path, field: str, threshold: float, out: Optional[Path]) -> int:
    snap = read_snapshot(snapshot_path)
    if field not in snap.fields:
        print(
            f"error: field {field!r} not in snapshot (has {sorted(snap.fields)})",
            file=sys.stderr,
        )
        return _EXIT_CONFIG
    values = snap.fields[field]
    mask = positivity_set(values, threshold)
    r_minus, r_plus = radial_bounds(mask)
    lines = [
        f"t = {snap.t!r}",
        f"cells_positive = {mask.count()}",
        f"volume = {mask.count() * snap.grid.h ** snap.grid.dim!r}",
        f"r_minus = {r_minus!r}",
        f"r_plus = {r_plus!r}",
    ]
    if snap.grid.dim == 1:
        try:
            lines.append(f"front = {front_position_1d(values, threshold)!r}")
        except ValueError:
            lines.append("front = none")
    text = "\n".join(lines) + "\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.txt").write_text(text)
        member = mask.member.ravel()
        points = snap.grid.center_points()
        rows = [
            [*(float(points[i, ax]) for ax in range(snap.grid.dim)), float(member[i])]
            for i in range(points.shape[0])
        ]
        axes = ["x", "y"][: snap.grid.dim]
        write_plotdata(out / "mask.csv", axes + ["member"], rows)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hslab",
        description="Numerical laboratory for saturated tumor growth and its stiff limit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for mode, helptext in (
        ("pme", "run the finite-stiffness solver"),
        ("hs", "run the stiff-limit solver"),
        ("sweep", "run a stiffness ladder plus the stiff limit, then check"),
    ):
        p = sub.add_parser(mode, help=helptext)
        p.add_argument("--config", required=True, type=Path, help="key=value config file")
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )

    v = sub.add_parser("verify", help="re-run structural checks on an existing run directory")
    v.add_argument("--run-dir", required=True, type=Path)
    v.add_argument("--out", type=Path, default=None, help="directory for report.txt")

    g = sub.add_parser("geometry", help="measure one snapshot file")
    g.add_argument("--snapshot", required=True, type=Path)
    g.add_argument("--field", default="p")
    g.add_argument("--threshold", type=float, default=1e-7)
    g.add_argument("--out", type=Path, default=None)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("pme", "hs", "sweep"):
            setup = load_config_file(args.config, args.command, args.override)
            runner = {"pme": _run_pme, "hs": _run_hs, "sweep": _run_sweep}[args.command]
            return runner(setup, args.out)
        if args.command == "verify":
            return _run_verify(args.run_dir, args.out)
        if args.command == "geometry":
            return _run_geometry(args.snapshot, args.field, args.threshold, args.out)
        raise AssertionError(args.command)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return _EXIT_CONFIG
    except (SnapshotFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (PmeInstabilityError, ObstacleDivergenceError, HsSolverError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return _EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
