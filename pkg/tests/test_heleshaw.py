import math

import numpy as np
import pytest

from hslab.barriers import cosh_profile
from hslab.grid import Grid, ScalarField, integrate
from hslab.growth import GrowthLaw
from hslab.heleshaw import (
    HsRunConfig,
    HsSolverError,
    hs_run,
    hs_step,
    initial_state,
    mass_of,
    pressure_mass_bound,
    solve_pressure_on_region,
)

LAW = GrowthLaw.linear(g0=1.0, p_max=1.0)


def _ball_profile(grid: Grid, radius: float, amplitude: float = 1.0) -> ScalarField:
    if grid.dim == 1:
        dist = np.abs(grid.axis_centers)
    else:
        X, Y = grid.coordinate_fields()
        dist = np.sqrt(X**2 + Y**2)
    return ScalarField(grid, np.where(dist <= radius, amplitude, 0.0))


def test_initial_pressure_matches_slab_profile():
    # saturated slab of half-length 0.3: the instantaneous pressure is the
    # cosh profile; the discrete zero sits at the first outside center, so
    # the effective half-length is 0.3 + h/2
    g = Grid(dim=1, cells=160, half_width=1.0)
    state = initial_state(_ball_profile(g, 0.3), LAW)
    x = g.axis_centers
    inside = np.abs(x) <= 0.3
    expected = cosh_profile(LAW, 0.3 + g.h / 2.0, x[inside])
    err = np.max(np.abs(state.p.values[inside] - expected))
    assert err < 0.01 * g.h**2
    assert np.all(state.p.values[~inside] == 0.0)
    assert state.t == 0.0
    assert np.all(state.w.values == 0.0)


def test_initial_pressure_zero_without_saturation():
    g = Grid(dim=1, cells=64, half_width=1.0)
    state = initial_state(_ball_profile(g, 0.3, amplitude=0.8), LAW)
    assert np.all(state.p.values == 0.0)


def test_step_advances_time_and_w_monotone():
    g = Grid(dim=1, cells=128, half_width=1.0)
    cfg = HsRunConfig(dt=5e-3, t_final=0.02, snapshot_every=5e-3)
    state = initial_state(_ball_profile(g, 0.3), LAW)
    for _ in range(4):
        new = hs_step(state, cfg)
        assert new.t == pytest.approx(state.t + cfg.dt)
        assert np.min(new.w.values - state.w.values) >= -10.0 * cfg.psor_tol
        state = new


def test_density_dichotomy_is_exact():
    g = Grid(dim=1, cells=128, half_width=1.0)
    cfg = HsRunConfig(dt=5e-3, t_final=0.05, snapshot_every=0.05)
    states = hs_run(_ball_profile(g, 0.25, amplitude=0.7), LAW, cfg)
    final = states[-1]
    saturated = final.saturated.member
    np.testing.assert_array_equal(saturated, final.p.values > cfg.p_threshold)
    free = np.minimum(1.0, np.exp(LAW.g0 * final.t) * final.n0.values)
    assert np.all(final.n.values[saturated] == 1.0)
    np.testing.assert_array_equal(final.n.values[~saturated], free[~saturated])


def test_step_identity_links_w_increment_to_pressure():
    # by construction dw = dt e^{-g0 t} p wherever the clip is inactive
    g = Grid(dim=1, cells=128, half_width=1.0)
    cfg = HsRunConfig(dt=2e-3, t_final=0.02, snapshot_every=2e-3)
    state = initial_state(_ball_profile(g, 0.3), LAW)
    for _ in range(5):
        new = hs_step(state, cfg)
        lhs = new.w.values - state.w.values
        rhs = cfg.dt * math.exp(-LAW.g0 * new.t) * new.p.values
        assert np.max(np.abs(lhs - rhs)) <= 11.0 * cfg.psor_tol
        state = new


def test_island_activation_time():
    # uniform half-density plateau saturates at t = ln 2 and only then
    # acquires pressure
    g = Grid(dim=1, cells=64, half_width=1.0)
    dt = 0.01
    cfg = HsRunConfig(dt=dt, t_final=0.75, snapshot_every=dt)
    states = hs_run(_ball_profile(g, 0.4, amplitude=0.5), LAW, cfg)
    activated = [s.t for s in states if s.w.values.max() > 0.0]
    assert activated, "plateau never activated"
    t_star = math.log(2.0)
    assert t_star - 1e-12 <= activated[0] <= t_star + 2.0 * dt + 1e-12
    # before activation the density just grows freely
    before = [s for s in states if s.t < t_star - dt]
    for s in before:
        assert np.all(s.p.values == 0.0)


def test_mass_and_pressure_bounds():
    g = Grid(dim=1, cells=128, half_width=1.0)
    cfg = HsRunConfig(dt=5e-3, t_final=0.1, snapshot_every=0.02)
    states = hs_run(_ball_profile(g, 0.3), LAW, cfg)
    m0 = integrate(states[0].n0)
    for s in states:
        assert mass_of(s) <= math.exp(LAW.g0 * s.t) * m0 * (1.0 + 1e-8)
        pmass, bound = pressure_mass_bound(s)
        assert pmass <= bound


def test_run_cadence_validation():
    g = Grid(dim=1, cells=64, half_width=1.0)
    prof = _ball_profile(g, 0.3)
    with pytest.raises(ValueError, match="snapshot_every"):
        hs_run(prof, LAW, HsRunConfig(dt=3e-3, t_final=0.1, snapshot_every=0.01))
    with pytest.raises(ValueError, match="t_final"):
        hs_run(prof, LAW, HsRunConfig(dt=5e-3, t_final=0.08, snapshot_every=0.03))


def test_sweep_budget_exhaustion_raises():
    g = Grid(dim=1, cells=128, half_width=1.0)
    cfg = HsRunConfig(dt=5e-3, t_final=0.01, snapshot_every=5e-3, psor_max_iters=2)
    with pytest.raises(HsSolverError, match="obstacle solve failed"):
        hs_run(_ball_profile(g, 0.3), LAW, cfg)


def test_region_solve_matches_dense_oracle():
    # small 1D problem solved densely: (-lap + g0/p_max) p = g0 on the region,
    # zero outside
    g = Grid(dim=1, cells=32, half_width=1.0)
    member = np.zeros(32, dtype=bool)
    member[10:22] = True
    from hslab.grid import RegionMask

    region = RegionMask(g, member)
    p = solve_pressure_on_region(g, region, LAW, tol=1e-12)
    idx = np.flatnonzero(member)
    k = idx.size
    h2 = g.h * g.h
    A = np.zeros((k, k))
    for row, i in enumerate(idx):
        A[row, row] = 2.0 / h2 + LAW.g0 / LAW.p_max
        for j in (i - 1, i + 1):
            col = np.flatnonzero(idx == j)
            if col.size:
                A[row, col[0]] = -1.0 / h2
    dense = np.linalg.solve(A, np.full(k, LAW.g0))
    np.testing.assert_allclose(p.values[member], dense, atol=1e-10)
    assert np.all(p.values[~member] == 0.0)


def test_region_solve_2d_symmetry():
    g = Grid(dim=2, cells=48, half_width=1.0)
    X, Y = g.coordinate_fields()
    from hslab.grid import RegionMask

    region = RegionMask(g, np.sqrt(X**2 + Y**2) <= 0.4)
    p = solve_pressure_on_region(g, region, LAW, tol=1e-12)
    np.testing.assert_allclose(p.values, p.values[::-1, :], atol=1e-9)
    np.testing.assert_allclose(p.values, p.values.T, atol=1e-9)
    assert p.values.max() > 0.0
    assert p.values.max() < LAW.p_max


def test_tabulated_law_pressure_solve_close_to_linear():
    nodes = np.linspace(0.0, 1.0, 401)
    tab = GrowthLaw.from_table(nodes, 1.0 - nodes)
    g = Grid(dim=1, cells=160, half_width=1.0)
    from hslab.grid import RegionMask

    region = RegionMask(g, np.abs(g.axis_centers) <= 0.3)
    p_lin = solve_pressure_on_region(g, region, LAW, tol=1e-12)
    p_tab = solve_pressure_on_region(g, region, tab, tol=1e-12)
    np.testing.assert_allclose(p_tab.values, p_lin.values, atol=5e-7)


def test_growing_front_marches_outward():
    g = Grid(dim=1, cells=256, half_width=1.0)
    cfg = HsRunConfig(dt=2e-3, t_final=0.2, snapshot_every=0.05)
    states = hs_run(_ball_profile(g, 0.3), LAW, cfg)
    widths = [int(np.count_nonzero(s.n.values == 1.0)) for s in states]
    assert widths == sorted(widths)
    assert widths[-1] > widths[0]
