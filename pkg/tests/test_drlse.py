import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrpi.drlse import (DrlseParams, area_energy, descend_step, dirac, distance_reg_energy,
                        edge_indicator, energy_gradient, evolve, evolve_step, forward_diff,
                        forward_diff_adjoint, heaviside, init_step_function, length_energy,
                        total_energy)
from mrpi.errors import NumericalDivergenceError, ParameterError
from mrpi.synthetic import ring_field


# -- straight-loop oracles ---------------------------------------------------------

def _loop_grad(phi, r, c):
    h, w = phi.shape
    fx = phi[r][c + 1] - phi[r][c] if c + 1 < w else 0.0
    fy = phi[r + 1][c] - phi[r][c] if r + 1 < h else 0.0
    return fx, fy


def _loop_dirac(x, eps):
    return (1 + math.cos(math.pi * x / eps)) / (2 * eps) if abs(x) <= eps else 0.0


def _loop_heaviside(x, eps):
    if x > eps:
        return 1.0
    if x < -eps:
        return 0.0
    return 0.5 * (1 + x / eps + math.sin(math.pi * x / eps) / math.pi)


def _loop_energy(phi, g, p):
    h, w = phi.shape
    hv = [[_loop_heaviside(phi[r][c], p.epsilon) for c in range(w)] for r in range(h)]
    hv = np.array(hv)
    reg = length = area = 0.0
    for r in range(h):
        for c in range(w):
            fx, fy = _loop_grad(phi, r, c)
            reg += 0.5 * (math.sqrt(fx * fx + fy * fy) - 1.0) ** 2
            hx, hy = _loop_grad(hv, r, c)
            length += g[r][c] * math.sqrt(hx * hx + hy * hy)
            area += g[r][c] * _loop_heaviside(-phi[r][c], p.epsilon)
    return reg, p.mu * reg + p.lam * length + p.alpha_area * area


# -- parameters ------------------------------------------------------------------------

@pytest.mark.parametrize("kw", [
    {"mu": 0.0}, {"mu": 0.3}, {"lam": -1.0}, {"epsilon": 0.5}, {"dt": 0.0},
    {"alpha_area": float("nan")},
])
def test_invalid_params(kw):
    with pytest.raises(ParameterError):
        DrlseParams(**kw)


def test_lambda_zero_allowed():
    assert DrlseParams(lam=0.0).lam == 0.0


# -- Dirac / Heaviside -------------------------------------------------------------------

def test_dirac_values():
    eps = 1.5
    assert dirac(0.0, eps) == pytest.approx(1 / eps)
    assert dirac(eps, eps) == pytest.approx(0.0, abs=1e-16)
    assert dirac(eps + 1e-9, eps) == 0.0
    assert dirac(-2.0, eps) == 0.0


def test_heaviside_integrates_dirac():
    eps = 1.5
    x = np.linspace(-2, 2, 4001)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dirac(x[1:], eps) + dirac(x[:-1], eps))
                                          * np.diff(x))])
    np.testing.assert_allclose(heaviside(x, eps), cum, atol=1e-6)
    assert heaviside(0.0, eps) == 0.5


# -- difference operators -------------------------------------------------------------

@given(st.integers(0, 2**32 - 1), st.integers(2, 9), st.integers(2, 9))
def test_adjoint_identity(seed, h, w):
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=(h, w))
    vx, vy = rng.normal(size=(h, w)), rng.normal(size=(h, w))
    fx, fy = forward_diff(phi)
    lhs = np.sum(fx * vx + fy * vy)
    rhs = np.sum(phi * forward_diff_adjoint(vx, vy))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# -- edge indicator --------------------------------------------------------------------

def test_edge_indicator_constant_is_one():
    assert np.all(edge_indicator(np.full((10, 12), 77.0), 1.5) == 1.0)


def test_edge_indicator_ramp_slope_three():
    img = 3.0 * np.tile(np.arange(30.0), (20, 1))
    g = edge_indicator(img, 1.5)
    np.testing.assert_allclose(g[:, 8:-8], 0.1, rtol=1e-12)


def test_edge_indicator_step_minimum_beside_step():
    img = np.zeros((9, 20))
    img[:, 10:] = 255.0
    g = edge_indicator(img, 1.5)
    row = g[4]
    assert set(np.argsort(row)[:2]) == {9, 10}
    assert np.all((g > 0) & (g <= 1))


# -- step initialization ---------------------------------------------------------------

def test_step_whole_image():
    assert np.all(init_step_function(5, 4, (0, 0, 4, 5), c0=3.0) == -3.0)


def test_step_central_square():
    phi = init_step_function(4, 4, (1, 1, 3, 3), c0=2.0)
    assert set(np.unique(phi)) == {-2.0, 2.0}
    assert np.sum(phi < 0) == 4


@pytest.mark.parametrize("region", [(0, 0, 4, 6), (-1, 0, 2, 2), (2, 2, 2, 3)])
def test_step_bad_region(region):
    with pytest.raises(ParameterError):
        init_step_function(5, 4, region)


# -- energies ---------------------------------------------------------------------------

def test_distance_energy_ramp_interior_zero():
    phi = np.tile(np.arange(10.0), (8, 1))
    fx, fy = forward_diff(phi)
    per_pixel = 0.5 * (np.hypot(fx, fy) - 1.0) ** 2
    assert np.all(per_pixel[:, :-1] == 0.0)


def test_distance_energy_constant():
    assert distance_reg_energy(np.full((6, 7), 4.2)) == 6 * 7 / 2


def test_distance_energy_matches_loop(rng):
    phi = rng.normal(size=(8, 8))
    reg, _ = _loop_energy(phi, np.ones((8, 8)), DrlseParams())
    assert distance_reg_energy(phi) == pytest.approx(reg, rel=1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_total_energy_matches_loop(seed):
    rng = np.random.default_rng(seed)
    phi = rng.normal(0, 1.5, size=(7, 9))
    g = rng.uniform(0.01, 1, size=(7, 9))
    p = DrlseParams(lam=rng.uniform(0, 6), alpha_area=rng.uniform(-3, 3))
    _, e = _loop_energy(phi, g, p)
    assert total_energy(phi, g, p) == pytest.approx(e, rel=1e-12, abs=1e-12)


def test_energy_outside_band_is_regularization_only(rng):
    phi = 1.6 + rng.random((10, 10)) * 3
    g = rng.random((10, 10))
    p = DrlseParams(alpha_area=0.0)
    assert total_energy(phi, g, p) == p.mu * distance_reg_energy(phi)


def test_length_term_approximates_perimeter():
    for r in (20.0, 40.0):
        phi = ring_field(128, r)
        length = length_energy(phi, np.ones_like(phi), 1.5)
        assert abs(length / (2 * math.pi * r) - 1) < 0.05


def test_area_term_counts_inside():
    phi = init_step_function(10, 10, (2, 2, 6, 7), c0=2.0)
    assert area_energy(phi, np.ones_like(phi), 1.5) == 4 * 5


def test_shape_mismatch():
    with pytest.raises(ParameterError):
        total_energy(np.zeros((4, 4)), np.ones((4, 5)), DrlseParams())
    with pytest.raises(ParameterError):
        evolve_step(np.zeros((4, 4)), np.ones((5, 4)), DrlseParams())


# -- evolution --------------------------------------------------------------------------

def test_planar_ramp_fixed_point():
    phi = np.tile(np.arange(12.0), (10, 1))
    out = evolve_step(phi, np.ones_like(phi), DrlseParams(lam=0.0, alpha_area=0.0))
    np.testing.assert_allclose(out[1:-1, 1:-1], phi[1:-1, 1:-1], atol=1e-12)


def test_outside_band_update_is_pure_regularization(rng):
    # mixed signs but every value beyond epsilon: the Dirac factor kills the external terms
    phi = np.sign(rng.normal(size=(12, 12))) * (1.6 + rng.random((12, 12)))
    g = rng.random((12, 12))
    a = evolve_step(phi, g, DrlseParams(lam=7.0, alpha_area=-2.0))
    b = evolve_step(phi, g, DrlseParams(lam=0.0, alpha_area=0.0))
    assert np.array_equal(a, b)


def test_update_is_descent_direction(rng):
    for _ in range(5):
        phi = rng.normal(size=(16, 16))
        g = rng.uniform(0.1, 1, size=(16, 16))
        p = DrlseParams()
        grad = energy_gradient(phi, g, p)
        direction = evolve_step(phi, g, p) - phi
        assert np.sum(grad * direction) <= 0


def test_evolve_step_returns_new_array(rng):
    phi = rng.normal(size=(6, 6))
    before = phi.copy()
    out = evolve_step(phi, np.ones_like(phi), DrlseParams())
    assert out is not phi and np.array_equal(phi, before)


def test_divergence_names_step():
    phi = np.zeros((5, 5))
    phi[2, 2] = np.inf
    with pytest.raises(NumericalDivergenceError) as info:
        evolve_step(phi, np.ones_like(phi), DrlseParams(), step=4)
    assert info.value.step == 4
    assert "step 4" in str(info.value)


def test_evolve_applies_n_steps(rng):
    phi = rng.normal(size=(8, 8))
    g = np.ones_like(phi)
    p = DrlseParams()
    expect = evolve_step(evolve_step(phi, g, p), g, p)
    assert np.array_equal(evolve(phi, g, p, 2), expect)


def test_descend_step_never_increases_when_it_accepts(rng):
    phi = rng.normal(0, 0.5, size=(20, 20))
    g = rng.uniform(0.1, 1, size=(20, 20))
    p = DrlseParams()
    for i in range(20):
        phi, dt, e0, e1 = descend_step(phi, g, p, step=i)
        assert dt in (1.0, 0.5, 0.25, 0.125)
        if dt > 0.125:
            assert e1 <= e0
