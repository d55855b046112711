import numpy as np
import pytest

from hslab.grid import Grid, ScalarField, laplacian
from hslab.obstacle import (
    ObstacleDivergenceError,
    ObstacleSpec,
    complementarity_residual,
    discrete_energy,
    equation_residual,
    omega_near_optimal,
    psor_solve,
)

# Matched analytic solution used throughout: forcing -1 on |x| < A, +3 outside.
# On the contact plateau w = 2A^2/3 - x^2/2; outside, w = 1.5 (x - B)^2 down to
# zero at B = 4A/3, glued C^1 at A.
A = 0.3
B = 0.4
W_CENTER = 2.0 * A * A / 3.0


def _matched_forcing(grid: Grid) -> ScalarField:
    x = grid.axis_centers
    return ScalarField(grid, np.where(np.abs(x) < A, -1.0, 3.0))


def _exact_w(x: np.ndarray) -> np.ndarray:
    inner = W_CENTER - x**2 / 2.0
    outer = 1.5 * (np.abs(x) - B) ** 2
    out = np.where(np.abs(x) < A, inner, np.where(np.abs(x) < B, outer, 0.0))
    return out


def test_matched_solution_1d():
    # sup error is first order: the forcing jump quantizes to the cell grid
    g = Grid(dim=1, cells=256, half_width=1.0)
    sol = psor_solve(ObstacleSpec(forcing=_matched_forcing(g), tol=1e-10))
    assert sol.converged
    err = np.max(np.abs(sol.w.values - _exact_w(g.axis_centers)))
    assert err < g.h
    assert sol.w.values[128] == pytest.approx(W_CENTER, abs=0.5 * g.h)


def test_free_boundary_location_refines():
    # the numerical support edge approaches B at first order or better
    edges = {}
    for cells in (128, 256, 512):
        g = Grid(dim=1, cells=cells, half_width=1.0)
        sol = psor_solve(ObstacleSpec(forcing=_matched_forcing(g), tol=1e-11))
        x = g.axis_centers
        edges[cells] = float(np.max(x[sol.w.values > 0.0]))
        assert abs(edges[cells] - B) <= 2.0 * g.h
    assert abs(edges[512] - B) <= abs(edges[128] - B) + 1e-12


def test_complementarity_residual_at_solution():
    g = Grid(dim=1, cells=128, half_width=1.0)
    spec = ObstacleSpec(forcing=_matched_forcing(g), tol=1e-10)
    sol = psor_solve(spec)
    assert complementarity_residual(sol.w, spec.forcing) <= 1.1e-10
    # corrupting the solution is detected
    bad = sol.w.values.copy()
    bad[64] += 1e-3
    assert complementarity_residual(ScalarField(g, bad), spec.forcing) > 1e-4


@pytest.mark.filterwarnings("ignore:obstacle active set:RuntimeWarning")
def test_negative_forcing_everywhere_gives_unconstrained_solve():
    # w > 0 everywhere inside, so the equation holds without projection
    g = Grid(dim=1, cells=64, half_width=1.0)
    spec = ObstacleSpec(forcing=ScalarField.full(g, -1.0), tol=1e-11)
    sol = psor_solve(spec)
    res = equation_residual(sol.w, spec.forcing)
    assert np.max(np.abs(res.values)) < 1e-8
    assert np.all(sol.w.values > 0.0)


def test_nonnegative_forcing_gives_zero():
    g = Grid(dim=1, cells=64, half_width=1.0)
    spec = ObstacleSpec(forcing=ScalarField.full(g, 0.5), tol=1e-11)
    sol = psor_solve(spec)
    assert np.all(sol.w.values == 0.0)
    assert sol.iterations <= 2


def test_energy_descends_sweep_by_sweep():
    # projected SOR with omega in (0, 2) is exact coordinate descent on the
    # quadratic objective; run the kernel one sweep at a time and watch it
    from hslab import _kernels

    g = Grid(dim=1, cells=96, half_width=1.0)
    forcing = _matched_forcing(g)
    w = np.zeros(g.shape)
    energies = [discrete_energy(ScalarField(g, w.copy()), forcing)]
    for _ in range(40):
        _kernels.psor_1d(w, -forcing.values, g.h * g.h, 1.7, 0.0, 1)
        energies.append(discrete_energy(ScalarField(g, w.copy()), forcing))
    diffs = np.diff(energies)
    assert np.all(diffs <= 1e-12)
    assert energies[-1] < energies[0]


def test_warm_start_cuts_iterations():
    g = Grid(dim=1, cells=256, half_width=1.0)
    spec = ObstacleSpec(forcing=_matched_forcing(g), tol=1e-10)
    cold = psor_solve(spec)
    warm = psor_solve(
        ObstacleSpec(forcing=spec.forcing, tol=1e-10, warm_start=cold.w)
    )
    assert warm.iterations <= max(2, cold.iterations // 10)
    np.testing.assert_allclose(warm.w.values, cold.w.values, atol=1e-8)


def test_omega_near_optimal_scaling_guard():
    # with the tuned relaxation factor, sweep counts stay well under
    # 2 * cells^1.5 across a refinement family
    for cells in (64, 128, 256):
        g = Grid(dim=1, cells=cells, half_width=1.0)
        spec = ObstacleSpec(
            forcing=_matched_forcing(g), tol=1e-10, omega=omega_near_optimal(g)
        )
        sol = psor_solve(spec)
        assert sol.converged
        assert sol.iterations <= 2.0 * cells**1.5


def test_divergence_detection_kernel():
    # over-relaxation beyond 2 destroys the descent property; the kernel's
    # residual-trend watchdog must flag it (the public API rejects such
    # omega outright, so this exercises the kernel directly)
    from hslab import _kernels

    g = Grid(dim=1, cells=64, half_width=1.0)
    w = np.zeros(g.shape)
    neg_f = -_matched_forcing(g).values
    sweeps, residual, status = _kernels.psor_1d(
        w, neg_f, g.h * g.h, 2.5, 1e-14, 1_000_000
    )
    assert status == 2
    assert sweeps < 1_000_000


def test_max_iters_raises():
    g = Grid(dim=1, cells=256, half_width=1.0)
    spec = ObstacleSpec(forcing=_matched_forcing(g), tol=1e-12, max_iters=3)
    with pytest.raises(ObstacleDivergenceError, match="did not converge"):
        psor_solve(spec)


def test_radial_obstacle_2d():
    # forcing -1 inside a small disc, +4 outside: solution is radial,
    # positive set is a larger disc; check symmetry and complementarity
    g = Grid(dim=2, cells=96, half_width=1.0)
    X, Y = g.coordinate_fields()
    rho = np.sqrt(X**2 + Y**2)
    spec = ObstacleSpec(
        forcing=ScalarField(g, np.where(rho < 0.25, -1.0, 4.0)), tol=1e-10
    )
    sol = psor_solve(spec)
    assert sol.converged
    assert complementarity_residual(sol.w, spec.forcing) <= 1.1e-10
    w = sol.w.values
    np.testing.assert_allclose(w, w[::-1, :], atol=1e-8)
    np.testing.assert_allclose(w, w[:, ::-1], atol=1e-8)
    np.testing.assert_allclose(w, w.T, atol=1e-8)
    assert w.max() > 0.0
    # support is strictly larger than the negative-forcing disc
    pos_radius = float(np.max(rho[w > 0.0]))
    assert 0.25 < pos_radius < 0.6


def test_spec_validation():
    g = Grid(dim=1, cells=64, half_width=1.0)
    f = _matched_forcing(g)
    with pytest.raises(ValueError):
        ObstacleSpec(forcing=f, omega=2.0)
    with pytest.raises(ValueError):
        ObstacleSpec(forcing=f, tol=0.0)
    other = Grid(dim=1, cells=128, half_width=1.0)
    with pytest.raises(ValueError):
        ObstacleSpec(forcing=f, warm_start=ScalarField.zeros(other))
