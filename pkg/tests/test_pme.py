import numpy as np
import pytest

from hslab.grid import Grid, ScalarField, flux_divergence, integrate
from hslab.growth import GrowthLaw
from hslab.pme import (
    PmeInstabilityError,
    PmeState,
    pme_run,
    pme_step,
    pressure_of,
    scale_initial_data,
    snapshot_times,
    stable_dt,
    total_mass,
)

LAW = GrowthLaw.linear(g0=1.0, p_max=1.0)


def _ball_state(gamma: float, cells: int = 128, radius: float = 0.3) -> PmeState:
    g = Grid(dim=1, cells=cells, half_width=1.0)
    prof = ScalarField(g, np.where(np.abs(g.axis_centers) <= radius, 1.0, 0.0))
    return PmeState(gamma=gamma, t=0.0, n=scale_initial_data(prof, gamma, LAW), law=LAW)


def test_initial_scaling_saturates_pressure():
    state = _ball_state(7.0)
    p = pressure_of(state)
    assert p.values.max() == pytest.approx(1.0)
    assert state.n.values.max() == pytest.approx(1.0 ** (1.0 / 7.0))


def test_scale_rejects_profile_outside_unit_interval():
    g = Grid(dim=1, cells=32, half_width=1.0)
    with pytest.raises(ValueError):
        scale_initial_data(ScalarField.full(g, 1.5), 5.0, LAW)


def test_state_validation():
    g = Grid(dim=1, cells=32, half_width=1.0)
    with pytest.raises(ValueError):
        PmeState(gamma=1.0, t=0.0, n=ScalarField.zeros(g), law=LAW)
    with pytest.raises(ValueError):
        PmeState(gamma=5.0, t=0.0, n=ScalarField.full(g, 1.5), law=LAW)


def test_mass_envelope_and_growth():
    state = _ball_state(10.0)
    out = pme_run(state, 0.1, 0.05)
    m0 = total_mass(state)
    for s in out:
        m = total_mass(s)
        assert m <= np.exp(LAW.g0 * s.t) * m0 * (1.0 + 1e-8)
    assert total_mass(out[-1]) > m0  # growth really happens


def test_density_stays_in_range():
    state = _ball_state(10.0)
    out = pme_run(state, 0.05, 0.05)
    cap = LAW.p_max ** (1.0 / 10.0)
    for s in out:
        assert s.n.values.min() >= 0.0
        assert s.n.values.max() <= cap + 1e-10


def test_support_expands_but_boundedly():
    state = _ball_state(20.0)
    out = pme_run(state, 0.1, 0.1)
    supp0 = np.flatnonzero(state.n.values > 0)
    supp1 = np.flatnonzero(out[-1].n.values > 0)
    assert supp1.min() <= supp0.min() and supp1.max() >= supp0.max()
    # finite propagation: the support cannot have crossed the whole box
    assert supp1.max() < state.n.grid.cells - 10


def test_symmetry_preserved():
    state = _ball_state(8.0)
    out = pme_run(state, 0.05, 0.05)
    v = out[-1].n.values
    np.testing.assert_allclose(v, v[::-1], atol=1e-13)


def test_kernel_step_matches_numpy_composition():
    # one explicit step, checked against the plain numpy flux form
    rng = np.random.default_rng(3)
    g = Grid(dim=1, cells=64, half_width=1.0)
    vals = np.zeros(64)
    vals[20:44] = rng.uniform(0.2, 1.0, 24)
    state = PmeState(gamma=4.0, t=0.0, n=ScalarField(g, vals), law=LAW)
    dt = 0.2 * stable_dt(state)
    stepped = pme_step(state, dt)
    p = pressure_of(state)
    div = flux_divergence(state.n, p).values
    expected = vals + dt * (div + vals * LAW.eval(p.values))
    np.testing.assert_allclose(stepped.n.values, expected, atol=1e-14)


def test_kernel_step_matches_numpy_composition_2d():
    rng = np.random.default_rng(4)
    g = Grid(dim=2, cells=24, half_width=1.0)
    vals = np.zeros(g.shape)
    vals[8:16, 6:18] = rng.uniform(0.1, 0.9, (8, 12))
    state = PmeState(gamma=3.0, t=0.0, n=ScalarField(g, vals), law=LAW)
    dt = 0.2 * stable_dt(state)
    stepped = pme_step(state, dt)
    p = pressure_of(state)
    div = flux_divergence(state.n, p).values
    expected = vals + dt * (div + vals * LAW.eval(p.values))
    np.testing.assert_allclose(stepped.n.values, expected, atol=1e-14)


def test_integer_and_float_gamma_paths_agree():
    # gamma = 5 exercises the integer fast-pow path; 5.0 + tiny goes float
    g = Grid(dim=1, cells=64, half_width=1.0)
    vals = np.zeros(64)
    vals[24:40] = 0.7
    a = PmeState(gamma=5.0, t=0.0, n=ScalarField(g, vals), law=LAW)
    b = PmeState(gamma=5.0 + 1e-13, t=0.0, n=ScalarField(g, vals), law=LAW)
    sa = pme_run(a, 0.02, 0.02)[-1]
    sb = pme_run(b, 0.02, 0.02)[-1]
    np.testing.assert_allclose(sa.n.values, sb.n.values, atol=1e-9)


def test_instability_raises():
    # stepping far beyond the stable step must trip the runaway guard,
    # not return garbage
    state = _ball_state(10.0)
    dt = 200.0 * stable_dt(state)
    with pytest.raises(PmeInstabilityError):
        for _ in range(400):
            state = pme_step(state, dt)


def test_run_rejects_bad_cfl():
    state = _ball_state(10.0)
    with pytest.raises(ValueError):
        pme_run(state, 0.05, 0.05, cfl_safety=60.0)


def test_stable_dt_scales_with_gamma():
    a = stable_dt(_ball_state(10.0))
    b = stable_dt(_ball_state(40.0))
    assert b < a
    assert a / b == pytest.approx(4.0, rel=0.35)


def test_snapshot_times_include_endpoints():
    ts = snapshot_times(1.0, 0.3)
    assert ts[0] == 0.0
    assert ts[-1] == 1.0
    assert ts == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])


def test_run_lands_exactly_on_snapshot_times():
    state = _ball_state(6.0)
    out = pme_run(state, 0.1, 0.03)
    times = [s.t for s in out]
    assert times == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1], abs=1e-12)


def test_tabulated_law_run_matches_linear():
    # same dynamics through the numpy path as through the kernels
    p_nodes = np.linspace(0.0, 1.0, 401)
    tab = GrowthLaw.from_table(p_nodes, 1.0 - p_nodes)
    g = Grid(dim=1, cells=64, half_width=1.0)
    vals = np.where(np.abs(g.axis_centers) <= 0.3, 0.9, 0.0)
    lin_state = PmeState(gamma=6.0, t=0.0, n=ScalarField(g, vals), law=LAW)
    tab_state = PmeState(gamma=6.0, t=0.0, n=ScalarField(g, vals), law=tab)
    lin_out = pme_run(lin_state, 0.02, 0.02)[-1]
    tab_out = pme_run(tab_state, 0.02, 0.02)[-1]
    np.testing.assert_allclose(tab_out.n.values, lin_out.n.values, atol=5e-7)
