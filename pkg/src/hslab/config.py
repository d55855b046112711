"""Run configuration: flat dotted key=value text, strictly validated.

Every violation is reported by key name, and all violations are collected
before raising, so a bad file is fixed in one round trip.  Unknown keys are
errors: a typo must never silently fall back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .grid import Grid, ScalarField
from .growth import GrowthLaw
from .heleshaw import HsRunConfig
from .snapshots import read_snapshot

MODES = ("pme", "hs", "sweep")
INIT_KINDS = ("ball", "annulus", "two_balls", "plateau", "file")


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class PmeParams:
    gamma: float
    t_final: float
    snapshot_every: float
    cfl_safety: float


@dataclass(frozen=True)
class HsParams:
    dt: float
    t_final: float
    snapshot_every: float
    picard_iters: int
    p_threshold: float
    psor_tol: float
    psor_omega: float
    psor_max_iters: int

    def to_run_config(self) -> HsRunConfig:
        return HsRunConfig(
            dt=self.dt,
            t_final=self.t_final,
            snapshot_every=self.snapshot_every,
            picard_iters=self.picard_iters,
            p_threshold=self.p_threshold,
            psor_tol=self.psor_tol,
            psor_omega=self.psor_omega,
            psor_max_iters=self.psor_max_iters,
        )


@dataclass(frozen=True)
class SweepParams:
    gamma_ladder: tuple[float, ...]
    cfl_safety: float
    hs: HsParams


@dataclass(frozen=True, eq=False)
class RunSetup:
    mode: str
    grid: Grid
    law: GrowthLaw
    profile: ScalarField  # initial density pattern, values in [0, 1]
    params: Union[PmeParams, HsParams, SweepParams]
    mapping: dict[str, str]  # normalized key=value pairs, echoed to config.txt


def parse_kv_text(text: str) -> dict[str, str]:
    """Flat key=value lines; '#' comments and blank lines ignored."""
    errors: list[str] = []
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value, got {raw!r}")
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        if key in mapping:
            errors.append(f"line {lineno}: duplicate key {key}")
            continue
        mapping[key] = value
    if errors:
        raise ConfigError(errors)
    return mapping


def apply_overrides(mapping: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(mapping)
    errors = []
    for item in overrides:
        if "=" not in item:
            errors.append(f"override {item!r}: expected KEY=VALUE")
            continue
        key, value = item.split("=", 1)
        key = key.strip()
        if not key:
            errors.append(f"override {item!r}: empty key")
            continue
        out[key] = value.strip()
    if errors:
        raise ConfigError(errors)
    return out


# -- typed value parsers, each returns (value, error-or-None) ---------------

_Parser = Callable[[str], tuple[object, Optional[str]]]


def _float(s: str) -> tuple[object, Optional[str]]:
    try:
        v = float(s)
    except ValueError:
        return None, "not a number"
    if math.isnan(v):
        return None, "nan is not allowed"
    return v, None


def _finite_float(s: str) -> tuple[object, Optional[str]]:
    v, err = _float(s)
    if err is None and math.isinf(v):  # type: ignore[arg-type]
        return None, "must be finite"
    return v, err


def _pos_float(s: str) -> tuple[object, Optional[str]]:
    v, err = _finite_float(s)
    if err:
        return None, err
    if v <= 0.0:  # type: ignore[operator]
        return None, "must be > 0"
    return v, None


def _cfl_float(s: str) -> tuple[object, Optional[str]]:
    v, err = _pos_float(s)
    if err:
        return None, err
    if v > 1.0:  # type: ignore[operator]
        return None, "must be in (0, 1]"
    return v, None


def _nonneg_float(s: str) -> tuple[object, Optional[str]]:
    v, err = _finite_float(s)
    if err:
        return None, err
    if v < 0.0:  # type: ignore[operator]
        return None, "must be >= 0"
    return v, None


def _unit_float(s: str) -> tuple[object, Optional[str]]:
    v, err = _finite_float(s)
    if err:
        return None, err
    if not 0.0 <= v <= 1.0:  # type: ignore[operator]
        return None, "must be in [0, 1]"
    return v, None


def _pos_int(s: str) -> tuple[object, Optional[str]]:
    try:
        v = int(s)
    except ValueError:
        return None, "not an integer"
    if v <= 0:
        return None, "must be > 0"
    return v, None


def _float_list(s: str) -> tuple[object, Optional[str]]:
    parts = [p.strip() for p in s.split(",")]
    out = []
    for p in parts:
        v, err = _finite_float(p)
        if err:
            return None, f"entry {p!r}: {err}"
        out.append(v)
    return tuple(out), None


def _string(s: str) -> tuple[object, Optional[str]]:
    if not s:
        return None, "empty value"
    return s, None


@dataclass(frozen=True)
class _KeySpec:
    parser: _Parser
    required: bool = False
    default: object = None


_GRID_KEYS = {
    "grid.dim": _KeySpec(_pos_int, required=True),
    "grid.cells": _KeySpec(_pos_int, required=True),
    "grid.half_width": _KeySpec(_pos_float, required=True),
}

_LAW_KEYS = {
    "law.kind": _KeySpec(_string, default="linear"),
    "law.g0": _KeySpec(_pos_float),
    "law.p_max": _KeySpec(_pos_float),
    "law.table": _KeySpec(_string),
}

_INIT_COMMON = {"init.kind": _KeySpec(_string, required=True)}

_INIT_KIND_KEYS: dict[str, dict[str, _KeySpec]] = {
    "ball": {
        "init.center": _KeySpec(_float_list, required=True),
        "init.radius": _KeySpec(_pos_float, required=True),
        "init.amplitude": _KeySpec(_unit_float, required=True),
    },
    "annulus": {
        "init.center": _KeySpec(_float_list, required=True),
        "init.r_inner": _KeySpec(_nonneg_float, required=True),
        "init.r_outer": _KeySpec(_pos_float, required=True),
        "init.amplitude": _KeySpec(_unit_float, required=True),
    },
    "two_balls": {
        "init.center_a": _KeySpec(_float_list, required=True),
        "init.radius_a": _KeySpec(_pos_float, required=True),
        "init.amplitude_a": _KeySpec(_unit_float, required=True),
        "init.center_b": _KeySpec(_float_list, required=True),
        "init.radius_b": _KeySpec(_pos_float, required=True),
        "init.amplitude_b": _KeySpec(_unit_float, required=True),
    },
    "plateau": {
        "init.center": _KeySpec(_float_list, required=True),
        "init.half_extent": _KeySpec(_pos_float, required=True),
        "init.amplitude": _KeySpec(_unit_float, required=True),
        "init.core_half_extent": _KeySpec(_pos_float),
        "init.core_amplitude": _KeySpec(_unit_float),
    },
    "file": {
        "init.path": _KeySpec(_string, required=True),
        "init.field": _KeySpec(_string, default="n"),
    },
}

_PME_KEYS = {
    "solver.gamma": _KeySpec(_pos_float, required=True),
    "solver.t_final": _KeySpec(_pos_float, required=True),
    "solver.snapshot_every": _KeySpec(_pos_float, required=True),
    "solver.cfl_safety": _KeySpec(_cfl_float, default=0.45),
}

_HS_KEYS = {
    "solver.dt": _KeySpec(_pos_float, required=True),
    "solver.t_final": _KeySpec(_pos_float, required=True),
    "solver.snapshot_every": _KeySpec(_pos_float, required=True),
    "solver.picard_iters": _KeySpec(_pos_int, default=3),
    "solver.p_threshold": _KeySpec(_pos_float, default=1e-7),
    "solver.psor_tol": _KeySpec(_pos_float, default=1e-9),
    "solver.psor_omega": _KeySpec(_pos_float, default=1.7),
    "solver.psor_max_iters": _KeySpec(_pos_int, default=200_000),
}

_SWEEP_KEYS = dict(_HS_KEYS)
_SWEEP_KEYS.update(
    {
        "solver.gamma_ladder": _KeySpec(_float_list, required=True),
        "solver.cfl_safety": _KeySpec(_cfl_float, default=0.45),
    }
)

_MODE_KEYS = {"pme": _PME_KEYS, "hs": _HS_KEYS, "sweep": _SWEEP_KEYS}


def _collect_values(
    mapping: dict[str, str],
    schema: dict[str, _KeySpec],
    errors: list[str],
) -> dict[str, object]:
    values: dict[str, object] = {}
    for key, spec in schema.items():
        if key in mapping:
            value, err = spec.parser(mapping[key])
            if err:
                errors.append(f"bad value for {key}: {mapping[key]!r} ({err})")
            else:
                values[key] = value
        elif spec.required:
            errors.append(f"missing required key: {key}")
        else:
            values[key] = spec.default
    return values


def _build_law(values: dict[str, object], base: Path, errors: list[str]) -> Optional[GrowthLaw]:
    kind = values.get("law.kind")
    if kind == "linear":
        g0 = values.get("law.g0")
        p_max = values.get("law.p_max")
        if g0 is None:
            errors.append("missing required key: law.g0 (required for law.kind = linear)")
        if p_max is None:
            errors.append("missing required key: law.p_max (required for law.kind = linear)")
        if values.get("law.table") is not None:
            errors.append("law.table is not allowed with law.kind = linear")
        if g0 is None or p_max is None:
            return None
        return GrowthLaw.linear(g0=g0, p_max=p_max)  # type: ignore[arg-type]
    if kind == "table":
        table = values.get("law.table")
        if table is None:
            errors.append("missing required key: law.table (required for law.kind = table)")
            return None
        for extra in ("law.g0", "law.p_max"):
            if values.get(extra) is not None:
                errors.append(f"{extra} is not allowed with law.kind = table")
        path = (base / str(table)).resolve() if not Path(str(table)).is_absolute() else Path(str(table))
        try:
            return GrowthLaw.from_csv(path)
        except (OSError, ValueError) as exc:
            errors.append(f"bad value for law.table: {table!r} ({exc})")
            return None
    errors.append(f"bad value for law.kind: {kind!r} (must be one of linear, table)")
    return None


def _center(values: dict[str, object], key: str, dim: int, errors: list[str]) -> Optional[np.ndarray]:
    raw = values.get(key)
    if raw is None:
        return None
    arr = np.asarray(raw, dtype=np.float64)
    if arr.shape != (dim,):
        errors.append(f"bad value for {key}: needs {dim} comma-separated numbers")
        return None
    return arr


def _radial_distance(grid: Grid, center: np.ndarray) -> np.ndarray:
    coords = grid.coordinate_fields()
    total = np.zeros(grid.shape)
    for ax, c in enumerate(coords):
        total += (c - center[ax]) ** 2
    return np.sqrt(total)


def _build_profile(
    kind: str,
    values: dict[str, object],
    grid: Grid,
    base: Path,
    errors: list[str],
) -> Optional[ScalarField]:
    if kind == "ball":
        center = _center(values, "init.center", grid.dim, errors)
        if center is None or "init.radius" not in values or "init.amplitude" not in values:
            return None
        radius = values["init.radius"]
        if float(np.max(np.abs(center))) + radius >= grid.half_width:  # type: ignore[operator]
            errors.append("init.radius: ball leaves the domain box")
            return None
        dist = _radial_distance(grid, center)
        vals = np.where(dist <= radius, float(values["init.amplitude"]), 0.0)  # type: ignore[arg-type]
        return ScalarField(grid, vals)
    if kind == "annulus":
        center = _center(values, "init.center", grid.dim, errors)
        needed = ("init.r_inner", "init.r_outer", "init.amplitude")
        if center is None or any(k not in values for k in needed):
            return None
        r_in, r_out = float(values["init.r_inner"]), float(values["init.r_outer"])  # type: ignore[arg-type]
        if r_in >= r_out:
            errors.append("init.r_inner: must be < init.r_outer")
            return None
        if float(np.max(np.abs(center))) + r_out >= grid.half_width:
            errors.append("init.r_outer: annulus leaves the domain box")
            return None
        dist = _radial_distance(grid, center)
        vals = np.where((dist >= r_in) & (dist <= r_out), float(values["init.amplitude"]), 0.0)  # type: ignore[arg-type]
        return ScalarField(grid, vals)
    if kind == "two_balls":
        out = np.zeros(grid.shape)
        ok = True
        for tag in ("a", "b"):
            center = _center(values, f"init.center_{tag}", grid.dim, errors)
            rkey, akey = f"init.radius_{tag}", f"init.amplitude_{tag}"
            if center is None or rkey not in values or akey not in values:
                ok = False
                continue
            radius = float(values[rkey])  # type: ignore[arg-type]
            if float(np.max(np.abs(center))) + radius >= grid.half_width:
                errors.append(f"{rkey}: ball leaves the domain box")
                ok = False
                continue
            dist = _radial_distance(grid, center)
            out = np.maximum(out, np.where(dist <= radius, float(values[akey]), 0.0))  # type: ignore[arg-type]
        return ScalarField(grid, out) if ok else None
    if kind == "plateau":
        center = _center(values, "init.center", grid.dim, errors)
        if center is None or "init.half_extent" not in values or "init.amplitude" not in values:
            return None
        extent = float(values["init.half_extent"])  # type: ignore[arg-type]
        if float(np.max(np.abs(center))) + extent >= grid.half_width:
            errors.append("init.half_extent: box leaves the domain")
            return None
        coords = grid.coordinate_fields()
        inside = np.ones(grid.shape, dtype=bool)
        for ax, c in enumerate(coords):
            inside &= np.abs(c - center[ax]) <= extent
        vals = np.where(inside, float(values["init.amplitude"]), 0.0)  # type: ignore[arg-type]
        core_extent = values.get("init.core_half_extent")
        core_amp = values.get("init.core_amplitude")
        if (core_extent is None) != (core_amp is None):
            errors.append(
                "init.core_half_extent and init.core_amplitude must be given together"
            )
            return None
        if core_extent is not None:
            if float(core_extent) >= extent:  # type: ignore[arg-type]
                errors.append("init.core_half_extent: must be < init.half_extent")
                return None
            core = np.ones(grid.shape, dtype=bool)
            for ax, c in enumerate(coords):
                core &= np.abs(c - center[ax]) <= float(core_extent)  # type: ignore[arg-type]
            vals = np.where(core, float(core_amp), vals)  # type: ignore[arg-type]
        return ScalarField(grid, vals)
    if kind == "file":
        raw = values.get("init.path")
        if raw is None:
            return None
        path = (base / str(raw)).resolve() if not Path(str(raw)).is_absolute() else Path(str(raw))
        try:
            snap = read_snapshot(path)
        except (OSError, ValueError) as exc:
            errors.append(f"bad value for init.path: {raw!r} ({exc})")
            return None
        field_name = str(values.get("init.field"))
        if field_name not in snap.fields:
            errors.append(f"bad value for init.field: {field_name!r} (not in {sorted(snap.fields)})")
            return None
        if snap.grid != grid:
            errors.append("init.path: snapshot grid does not match grid.* keys")
            return None
        profile = snap.fields[field_name]
        if float(np.min(profile.values)) < 0.0 or float(np.max(profile.values)) > 1.0:
            errors.append("init.path: field values must lie in [0, 1]")
            return None
        return profile
    raise AssertionError(kind)


def _near_multiple(value: float, base: float) -> bool:
    ratio = value / base
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio)) and round(ratio) >= 1


def validate_config(
    mapping: dict[str, str], mode: str, base_dir: Path | str = "."
) -> RunSetup:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    base = Path(base_dir)
    errors: list[str] = []

    declared = mapping.get("mode")
    if declared is not None and declared != mode:
        errors.append(f"bad value for mode: {declared!r} (command runs mode {mode!r})")

    init_kind = mapping.get("init.kind")
    kind_valid = init_kind in INIT_KINDS
    if init_kind is not None and not kind_valid:
        errors.append(
            f"bad value for init.kind: {init_kind!r} (must be one of {', '.join(INIT_KINDS)})"
        )

    allowed: set[str] = {"mode"}
    for schema in (_GRID_KEYS, _LAW_KEYS, _INIT_COMMON, _MODE_KEYS[mode]):
        allowed.update(schema)
    if kind_valid:
        allowed.update(_INIT_KIND_KEYS[init_kind])  # type: ignore[index]
    else:
        for keys in _INIT_KIND_KEYS.values():
            allowed.update(keys)
    for key in mapping:
        if key not in allowed:
            errors.append(f"unknown key for mode {mode}: {key}")

    grid_values = _collect_values(mapping, _GRID_KEYS, errors)
    law_values = _collect_values(mapping, _LAW_KEYS, errors)
    init_values = _collect_values(mapping, _INIT_COMMON, errors)
    solver_values = _collect_values(mapping, _MODE_KEYS[mode], errors)
    kind_values: dict[str, object] = {}
    if kind_valid:
        kind_values = _collect_values(mapping, _INIT_KIND_KEYS[init_kind], errors)  # type: ignore[index]

    grid: Optional[Grid] = None
    if all(k in grid_values and grid_values[k] is not None for k in _GRID_KEYS):
        try:
            grid = Grid(
                dim=grid_values["grid.dim"],  # type: ignore[arg-type]
                cells=grid_values["grid.cells"],  # type: ignore[arg-type]
                half_width=grid_values["grid.half_width"],  # type: ignore[arg-type]
            )
        except ValueError as exc:
            errors.append(f"bad grid.* values: {exc}")

    law = _build_law(law_values, base, errors)

    profile: Optional[ScalarField] = None
    if grid is not None and kind_valid:
        profile = _build_profile(str(init_kind), kind_values, grid, base, errors)

    params: Optional[Union[PmeParams, HsParams, SweepParams]] = None
    if mode == "pme" and not any(e.startswith(("missing required key: solver", "bad value for solver")) for e in errors):
        gamma = solver_values.get("solver.gamma")
        if gamma is not None and float(gamma) <= 1.0:  # type: ignore[arg-type]
            errors.append(f"bad value for solver.gamma: {gamma!r} (must be > 1)")
        elif None not in (gamma, solver_values.get("solver.t_final")):
            params = PmeParams(
                gamma=float(gamma),  # type: ignore[arg-type]
                t_final=float(solver_values["solver.t_final"]),  # type: ignore[arg-type]
                snapshot_every=float(solver_values["solver.snapshot_every"]),  # type: ignore[arg-type]
                cfl_safety=float(solver_values["solver.cfl_safety"]),  # type: ignore[arg-type]
            )
    elif mode in ("hs", "sweep"):
        hs_ready = all(
            solver_values.get(k) is not None
            for k in ("solver.dt", "solver.t_final", "solver.snapshot_every")
        )
        hs_params: Optional[HsParams] = None
        if hs_ready:
            dt = float(solver_values["solver.dt"])  # type: ignore[arg-type]
            snap_every = float(solver_values["solver.snapshot_every"])  # type: ignore[arg-type]
            t_final = float(solver_values["solver.t_final"])  # type: ignore[arg-type]
            if not _near_multiple(snap_every, dt):
                errors.append("solver.snapshot_every: must be a whole multiple of solver.dt")
            if not _near_multiple(t_final, snap_every):
                errors.append("solver.t_final: must be a whole multiple of solver.snapshot_every")
            omega = float(solver_values["solver.psor_omega"])  # type: ignore[arg-type]
            if not 0.0 < omega < 2.0:
                errors.append(f"bad value for solver.psor_omega: {omega!r} (must be in (0, 2))")
            else:
                hs_params = HsParams(
                    dt=dt,
                    t_final=t_final,
                    snapshot_every=snap_every,
                    picard_iters=int(solver_values["solver.picard_iters"]),  # type: ignore[arg-type]
                    p_threshold=float(solver_values["solver.p_threshold"]),  # type: ignore[arg-type]
                    psor_tol=float(solver_values["solver.psor_tol"]),  # type: ignore[arg-type]
                    psor_omega=omega,
                    psor_max_iters=int(solver_values["solver.psor_max_iters"]),  # type: ignore[arg-type]
                )
        if mode == "hs":
            params = hs_params
        else:
            ladder = solver_values.get("solver.gamma_ladder")
            if ladder is not None:
                ladder = tuple(float(g) for g in ladder)  # type: ignore[union-attr]
                if len(ladder) < 2:
                    errors.append("bad value for solver.gamma_ladder: need at least 2 entries")
                elif any(b <= a for a, b in zip(ladder[:-1], ladder[1:])):
                    errors.append("bad value for solver.gamma_ladder: must be strictly increasing")
                elif ladder[0] <= 1.0:
                    errors.append("bad value for solver.gamma_ladder: entries must be > 1")
                elif hs_params is not None:
                    params = SweepParams(
                        gamma_ladder=ladder,
                        cfl_safety=float(solver_values["solver.cfl_safety"]),  # type: ignore[arg-type]
                        hs=hs_params,
                    )

    if errors:
        raise ConfigError(sorted(set(errors)))
    assert grid is not None and law is not None and profile is not None and params is not None

    normalized = dict(mapping)
    normalized["mode"] = mode
    # path-valued keys echo as absolute so a run directory verifies from anywhere
    for path_key in ("law.table", "init.path"):
        if path_key in normalized:
            normalized[path_key] = str(_resolve(base, normalized[path_key]))
    return RunSetup(mode=mode, grid=grid, law=law, profile=profile, params=params, mapping=normalized)


def _resolve(base: Path, raw: str) -> Path:
    p = Path(raw)
    return p if p.is_absolute() else (base / p).resolve()


def render_config(mapping: dict[str, str]) -> str:
    lines = [f"{key} = {mapping[key]}" for key in sorted(mapping)]
    return "\n".join(lines) + "\n"


def load_config_file(path: Path | str, mode: str, overrides: Optional[list[str]] = None) -> RunSetup:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path}: {exc}"]) from exc
    mapping = parse_kv_text(text)
    if overrides:
        mapping = apply_overrides(mapping, overrides)
    return validate_config(mapping, mode, base_dir=path.parent)
