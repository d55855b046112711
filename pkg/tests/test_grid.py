import numpy as np
import pytest

from hslab.grid import (
    Grid,
    RegionMask,
    ScalarField,
    flux_divergence,
    grad_sq,
    integrate,
    laplacian,
    support_margin_cells,
    warn_if_support_near_edge,
)


def test_grid_basic_properties():
    g = Grid(dim=1, cells=64, half_width=2.0)
    assert g.h == pytest.approx(4.0 / 64)
    assert g.shape == (64,)
    assert g.n_cells == 64
    # centers are offset half a cell from the wall and symmetric
    assert g.axis_centers[0] == pytest.approx(-2.0 + g.h / 2)
    assert g.axis_centers[-1] == pytest.approx(2.0 - g.h / 2)
    np.testing.assert_allclose(g.axis_centers, -g.axis_centers[::-1])


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(dim=3, cells=16, half_width=1.0)
    with pytest.raises(ValueError):
        Grid(dim=1, cells=4, half_width=1.0)
    with pytest.raises(ValueError):
        Grid(dim=2, cells=16, half_width=0.0)
    with pytest.raises(ValueError):
        Grid(dim=1, cells=16.5, half_width=1.0)


def test_center_points_row_major_2d():
    g = Grid(dim=2, cells=8, half_width=1.0)
    pts = g.center_points()
    assert pts.shape == (64, 2)
    # row-major: y varies fastest
    assert pts[1, 0] == pts[0, 0]
    assert pts[1, 1] == pytest.approx(pts[0, 1] + g.h)
    assert pts[8, 0] == pytest.approx(pts[0, 0] + g.h)


def test_scalar_field_validation():
    g = Grid(dim=1, cells=16, half_width=1.0)
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros(15))
    with pytest.raises(ValueError):
        ScalarField(g, np.full(16, np.nan))
    f = ScalarField.full(g, 2.5)
    assert f.values.dtype == np.float64
    assert float(f.values.sum()) == pytest.approx(40.0)


def test_laplacian_quadratic_interior_1d():
    # f = x^2 has exact discrete laplacian 2 away from the walls
    g = Grid(dim=1, cells=64, half_width=1.0)
    f = ScalarField(g, g.axis_centers**2)
    lap = laplacian(f).values
    np.testing.assert_allclose(lap[2:-2], 2.0, atol=1e-9)


def test_laplacian_quadratic_interior_2d():
    g = Grid(dim=2, cells=32, half_width=1.0)
    X, Y = g.coordinate_fields()
    f = ScalarField(g, X**2 + 3.0 * Y**2)
    lap = laplacian(f).values
    np.testing.assert_allclose(lap[2:-2, 2:-2], 8.0, atol=1e-9)


def test_laplacian_dirichlet_wall():
    # zero ghost outside: constant field sees the wall
    g = Grid(dim=1, cells=16, half_width=1.0)
    f = ScalarField.full(g, 1.0)
    lap = laplacian(f).values
    assert lap[0] == pytest.approx(-1.0 / g.h**2)
    np.testing.assert_allclose(lap[1:-1], 0.0, atol=1e-12)


def test_grad_sq_linear_field():
    g = Grid(dim=1, cells=64, half_width=1.0)
    f = ScalarField(g, 3.0 * g.axis_centers)
    gs = grad_sq(f).values
    np.testing.assert_allclose(gs, 9.0, atol=1e-9)


def test_grad_sq_2d_plane():
    g = Grid(dim=2, cells=16, half_width=1.0)
    X, Y = g.coordinate_fields()
    f = ScalarField(g, 2.0 * X - Y)
    np.testing.assert_allclose(grad_sq(f).values, 5.0, atol=1e-9)


def test_flux_divergence_conserves_mass():
    rng = np.random.default_rng(7)
    g = Grid(dim=2, cells=24, half_width=1.0)
    coeff = ScalarField(g, rng.uniform(0.0, 1.0, g.shape))
    pot = ScalarField(g, rng.normal(size=g.shape))
    div = flux_divergence(coeff, pot)
    # no-flux exterior faces: total divergence telescopes to zero
    assert abs(integrate(div)) < 1e-12


def test_flux_divergence_matches_laplacian_for_unit_coeff():
    # with coefficient 1 and zero boundary values the interior stencils agree
    g = Grid(dim=1, cells=64, half_width=1.0)
    vals = np.sin(np.pi * g.axis_centers)
    vals[0] = vals[-1] = 0.0
    f = ScalarField(g, vals)
    div = flux_divergence(ScalarField.full(g, 1.0), f).values
    lap = laplacian(f).values
    np.testing.assert_allclose(div[1:-1], lap[1:-1], atol=1e-10)


def test_integrate_cell_measure():
    g = Grid(dim=2, cells=16, half_width=1.0)
    assert integrate(ScalarField.full(g, 1.0)) == pytest.approx(4.0)


def test_region_mask_and_margin():
    g = Grid(dim=1, cells=32, half_width=1.0)
    member = np.zeros(32, dtype=bool)
    member[10:20] = True
    mask = RegionMask(g, member)
    assert mask.count() == 10
    assert support_margin_cells(mask) == 10
    assert RegionMask.empty(g).is_empty()


def test_edge_warning_fires_and_stays_quiet():
    g = Grid(dim=1, cells=32, half_width=1.0)
    near = np.zeros(32, dtype=bool)
    near[1] = True
    with pytest.warns(RuntimeWarning):
        warn_if_support_near_edge(RegionMask(g, near), "test-region")
    import warnings

    far = np.zeros(32, dtype=bool)
    far[16] = True
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        warn_if_support_near_edge(RegionMask(g, far), "test-region")
