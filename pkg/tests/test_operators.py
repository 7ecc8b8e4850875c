import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmnonlocal.core import Field, GridMismatchError, make_grid
from gmnonlocal.kernels import (discretize_kernel, gaussian_kernel,
                                rescaled_bump_kernel)
from gmnonlocal.operators import (apply_laplacian_neumann, apply_nonlocal,
                                  apply_nonlocal_fast,
                                  bilinear_identity_residual)
from oracles import (bilinear_sums_oracle, dissipativity_oracle,
                     laplacian_oracle, nonlocal_oracle)


def _random_field(grid, rng, lo=-1.0, hi=1.0):
    return Field(grid=grid, values=rng.uniform(lo, hi, grid.n_cells))


def test_nonlocal_annihilates_constants():
    g = make_grid(16, 16, 16.0, 16.0)
    dk = discretize_kernel(gaussian_kernel(0.9), g)
    z = Field.constant(g, 3.7)
    for op in (apply_nonlocal, apply_nonlocal_fast):
        out = op(dk, z)
        assert np.max(np.abs(out.values)) <= 1e-12 * 3.7


def test_indicator_against_double_loop():
    """A single hot cell exercises every offset of the stencil."""
    g = make_grid(8, 8, 8.0, 8.0)
    dk = discretize_kernel(gaussian_kernel(0.7), g)
    z2 = np.zeros((8, 8))
    z2[3, 4] = 1.0
    z = Field.from_2d(g, z2)
    expect = np.array(nonlocal_oracle(dk.offsets, dk.weights, z2.tolist()))
    got = apply_nonlocal(dk, z).as_2d()
    assert np.max(np.abs(got - expect)) <= 1e-13


def test_random_fields_against_double_loop():
    rng = np.random.default_rng(5)
    g = make_grid(8, 8, 8.0, 8.0)
    dk = discretize_kernel(gaussian_kernel(0.7), g)
    for _ in range(5):
        z = _random_field(g, rng)
        expect = np.array(nonlocal_oracle(dk.offsets, dk.weights,
                                          z.as_2d().tolist()))
        got = apply_nonlocal(dk, z).as_2d()
        assert np.max(np.abs(got - expect)) <= 1e-12


def test_nonlocal_linearity():
    rng = np.random.default_rng(6)
    g = make_grid(12, 12, 12.0, 12.0)
    dk = discretize_kernel(gaussian_kernel(0.8), g)
    z1, z2 = _random_field(g, rng), _random_field(g, rng)
    combo = Field(grid=g, values=2.5 * z1.values + z2.values)
    lhs = apply_nonlocal(dk, combo).values
    rhs = 2.5 * apply_nonlocal(dk, z1).values + apply_nonlocal(dk, z2).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@pytest.mark.parametrize("sigma", [0.5, 0.6, 10.0])
def test_fast_matches_direct(sigma):
    rng = np.random.default_rng(11)
    g = make_grid(32, 32, 32.0, 32.0)
    dk = discretize_kernel(gaussian_kernel(sigma), g)
    for _ in range(3):
        z = _random_field(g, rng)
        direct = apply_nonlocal(dk, z).values
        fast = apply_nonlocal_fast(dk, z).values
        assert np.max(np.abs(fast - direct)) <= 1e-10


def test_fast_matches_direct_1d_and_bump():
    rng = np.random.default_rng(12)
    g = make_grid(64, 1, 1.0, 1.0)
    dk = discretize_kernel(rescaled_bump_kernel(8), g)
    z = _random_field(g, rng)
    direct = apply_nonlocal(dk, z).values
    fast = apply_nonlocal_fast(dk, z).values
    assert np.max(np.abs(fast - direct)) <= 1e-12


def test_three_point_kernel_tridiagonal_formula():
    """On a 1D grid whose stencil is just the two neighbors, the operator
    is the classic w*(z[i-1] - 2 z[i] + z[i+1]) away from the walls."""
    g = make_grid(16, 1, 4.0, 1.0)  # h = 0.25
    dk = discretize_kernel(rescaled_bump_kernel(2), g)
    assert sorted((int(ox), int(oy)) for ox, oy in dk.offsets) == \
        [(-1, 0), (1, 0)]
    w = dk.weight_at(1, 0)
    rng = np.random.default_rng(3)
    z = rng.uniform(0.0, 1.0, 16)
    expect = np.empty(16)
    expect[0] = w * (z[1] - z[0])
    expect[-1] = w * (z[-2] - z[-1])
    expect[1:-1] = w * (z[:-2] - 2.0 * z[1:-1] + z[2:])
    got = apply_nonlocal_fast(dk, Field(grid=g, values=z.copy())).values
    assert np.max(np.abs(got - expect)) <= 1e-14


def test_kernel_grid_mismatch_rejected():
    g1 = make_grid(8, 8, 8.0, 8.0)
    g2 = make_grid(10, 10, 10.0, 10.0)
    dk = discretize_kernel(gaussian_kernel(0.7), g1)
    z = Field.constant(g2, 1.0)
    with pytest.raises(GridMismatchError):
        apply_nonlocal(dk, z)
    with pytest.raises(GridMismatchError):
        apply_nonlocal_fast(dk, z)


def test_laplacian_constant_zero():
    for g in (make_grid(9, 7, 9.0, 7.0), make_grid(20, 1, 1.0, 1.0)):
        z = Field.constant(g, 4.2)
        out = apply_laplacian_neumann(z)
        assert np.max(np.abs(out.values)) == 0.0


def test_laplacian_linear_field_boundary_correction():
    g = make_grid(10, 10, 10.0, 10.0)
    x = np.tile(g.x_centers(), (10, 1))
    out = apply_laplacian_neumann(Field.from_2d(g, x)).as_2d()
    assert np.max(np.abs(out[:, 1:-1])) <= 1e-13  # interior second diff of linear
    assert np.allclose(out[:, 0], 1.0 / g.hx)  # mirror ghost pins the wall slope
    assert np.allclose(out[:, -1], -1.0 / g.hx)


def test_laplacian_quadratic_interior_value():
    g = make_grid(200, 1, 1.0, 1.0)
    x = g.x_centers()
    out = apply_laplacian_neumann(Field.from_2d(g, (x * x)[None, :])).as_2d()[0]
    assert np.max(np.abs(out[1:-1] - 2.0)) <= 1e-9


def test_laplacian_richardson_rate():
    """Halving h cuts the smooth-field error by about four."""
    errs = []
    for n in (64, 128):
        g = make_grid(n, 1, 1.0, 1.0)
        x = g.x_centers()
        z = np.cos(np.pi * x)  # zero-slope at both walls
        out = apply_laplacian_neumann(Field.from_2d(g, z[None, :])).as_2d()[0]
        errs.append(np.max(np.abs(out + np.pi ** 2 * z)))
    ratio = errs[0] / errs[1]
    assert 3.5 <= ratio <= 4.5


def test_laplacian_matches_loop_oracle():
    rng = np.random.default_rng(8)
    g = make_grid(7, 5, 7.0, 5.0)
    z = _random_field(g, rng)
    expect = np.array(laplacian_oracle(z.as_2d().tolist(), g.hx, g.hy, True))
    got = apply_laplacian_neumann(z).as_2d()
    assert np.max(np.abs(got - expect)) <= 1e-12


def test_laplacian_self_adjoint_cell_weighted():
    rng = np.random.default_rng(9)
    g = make_grid(12, 9, 6.0, 3.0)
    z1, z2 = _random_field(g, rng), _random_field(g, rng)
    lhs = np.sum(apply_laplacian_neumann(z1).values * z2.values) * g.cell_weight
    rhs = np.sum(z1.values * apply_laplacian_neumann(z2).values) * g.cell_weight
    assert abs(lhs - rhs) <= 1e-10


def test_bilinear_identity_on_random_pairs():
    rng = np.random.default_rng(21)
    g = make_grid(8, 8, 8.0, 8.0)
    dk = discretize_kernel(gaussian_kernel(0.8), g)
    for _ in range(10):
        v, w = _random_field(g, rng), _random_field(g, rng)
        res = bilinear_identity_residual(dk, v, w)
        a_sum, b_sum = bilinear_sums_oracle(dk.offsets, dk.weights,
                                            v.as_2d().tolist(),
                                            w.as_2d().tolist(), g.cell_weight)
        assert abs(a_sum + 0.5 * b_sum) <= 1e-12 * (abs(a_sum) + abs(b_sum) + 1)
        assert res <= 1e-10 * (abs(a_sum) + abs(b_sum) + 1)


def test_bilinear_identity_constant_inputs():
    rng = np.random.default_rng(22)
    g = make_grid(8, 8, 8.0, 8.0)
    dk = discretize_kernel(gaussian_kernel(0.8), g)
    w = _random_field(g, rng)
    assert bilinear_identity_residual(dk, Field.constant(g, 2.0), w) <= 1e-12
    assert bilinear_identity_residual(dk, w, Field.constant(g, 2.0)) <= 1e-12


def test_dissipativity_mixed_sign_fields():
    rng = np.random.default_rng(23)
    g = make_grid(10, 10, 10.0, 10.0)
    dk = discretize_kernel(gaussian_kernel(0.9), g)
    for _ in range(20):
        v = rng.uniform(-1.0, 1.0, (10, 10))
        total = dissipativity_oracle(dk.offsets, dk.weights, v.tolist(),
                                     g.cell_weight)
        assert total >= -1e-12


@settings(deadline=None, max_examples=40)
@given(value=st.floats(-1e3, 1e3), sigma=st.floats(0.3, 3.0),
       nx=st.integers(4, 12), ny=st.integers(4, 12))
def test_constant_annihilation_property(value, sigma, nx, ny):
    g = make_grid(nx, ny, float(nx), float(ny))
    dk = discretize_kernel(gaussian_kernel(sigma), g)
    out = apply_nonlocal_fast(dk, Field.constant(g, value))
    assert np.max(np.abs(out.values)) <= 1e-12 * max(abs(value), 1.0)


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 2 ** 32 - 1), sigma=st.floats(0.4, 2.0))
def test_dissipativity_property(seed, sigma):
    """The negative-part pairing with the coupling operator never goes
    measurably below zero, whatever the sign pattern of the field."""
    g = make_grid(6, 6, 6.0, 6.0)
    dk = discretize_kernel(gaussian_kernel(sigma), g)
    rng = np.random.default_rng(seed)
    v = rng.uniform(-2.0, 2.0, (6, 6))
    total = dissipativity_oracle(dk.offsets, dk.weights, v.tolist(),
                                 g.cell_weight)
    assert total >= -1e-12
