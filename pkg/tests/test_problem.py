"""Composite problem assembly: f = loss + quad/2 ||x||^2 - smooth_h."""

import numpy as np
import pytest

from ncdopt.blocks import uniform_partition
from ncdopt.errors import InvalidParameterError
from ncdopt.oracles import DataMatrix, SmoothOracle, least_squares
from ncdopt.penalties import (
    h_largest_k,
    h_quadratic,
    h_scad,
    h_subgrad,
    h_value,
    phi_l1,
)
from ncdopt.presets import make_problem
from ncdopt.problem import CompositeProblem


def _instance(rng, n=20, d=10, m=4):
    A = DataMatrix(rng.standard_normal((n, d)))
    b = rng.standard_normal(n)
    return A, b


def test_build_fills_constants():
    rng = np.random.default_rng(0)
    A, b = _instance(rng)
    prob = make_problem(least_squares(), A, b, 4, phi=phi_l1(0.1),
                        h=h_scad(0.1, 3.7))
    base = SmoothOracle(least_squares(), A, b, uniform_partition(10, 4)).block_lipschitz()
    assert np.allclose(prob.part.L, base, rtol=1e-12)
    assert prob.weak_convexity_mu == 0.0
    # a quadratic term raises every block constant by its strength
    prob2 = make_problem(least_squares(), A, b, 4, quad=0.3)
    assert np.allclose(prob2.part.L, base + 0.3, rtol=1e-12)
    # a smooth concave part subtracts curvature: constants grow, and the
    # default weak convexity is its gradient Lipschitz modulus
    prob3 = make_problem(least_squares(), A, b, 4, smooth_h=h_quadratic(0.2))
    assert np.allclose(prob3.part.L, base + 0.2, rtol=1e-12)
    assert np.isclose(prob3.weak_convexity_mu, 0.2, rtol=1e-12)
    # quad offsets the weak convexity
    prob4 = make_problem(least_squares(), A, b, 4, quad=0.5,
                         smooth_h=h_quadratic(0.2))
    assert prob4.weak_convexity_mu == 0.0


def test_objective_is_f_plus_phi_minus_h():
    rng = np.random.default_rng(1)
    A, b = _instance(rng)
    phi = phi_l1(0.3)
    h = h_scad(0.3, 3.7)
    prob = make_problem(least_squares(), A, b, 4, phi=phi, h=h, quad=0.1)
    for _ in range(20):
        x = rng.standard_normal(10)
        f = prob.oracle.value_at(x) + 0.05 * float(np.dot(x, x))
        want = f + phi.value(x) - h_value(h, x)
        assert np.isclose(prob.objective(x), want, rtol=1e-12)
        assert np.isclose(prob.f_value(x), f, rtol=1e-12)


def test_f_grad_includes_quad_and_smooth_h():
    rng = np.random.default_rng(2)
    A, b = _instance(rng)
    prob = make_problem(least_squares(), A, b, 4, quad=0.4,
                        smooth_h=h_quadratic(0.15))
    for _ in range(10):
        x = rng.standard_normal(10)
        want = prob.oracle.full_gradient_at(x) + 0.4 * x - 0.15 * x
        assert np.allclose(prob.f_grad(x), want, rtol=1e-12)
        # block gradient equals the matching slice
        g = prob.f_grad(x)
        state = prob.oracle.bind(x)
        for i in range(4):
            sl = prob.part.block(i)
            assert np.allclose(prob.f_block_grad(state, i), g[sl], rtol=1e-12)


def test_objective_accepts_precomputed_product():
    rng = np.random.default_rng(3)
    A, b = _instance(rng)
    prob = make_problem(least_squares(), A, b, 2, phi=phi_l1(0.2))
    x = rng.standard_normal(10)
    assert prob.objective(x, Ax=A.matvec(x)) == prob.objective(x)


def test_h_subgradient_dispatch():
    rng = np.random.default_rng(4)
    A, b = _instance(rng)
    h = h_largest_k(0.5, 3)
    prob = make_problem(least_squares(), A, b, 4, phi=phi_l1(0.5), h=h)
    x = rng.standard_normal(10)
    assert np.array_equal(prob.h_subgradient(x), h_subgrad(h, x))
    prob0 = make_problem(least_squares(), A, b, 4)
    assert np.all(prob0.h_subgradient(x) == 0.0)


def test_dc_shift_preserves_objective():
    rng = np.random.default_rng(5)
    A, b = _instance(rng)
    # weakly convex smooth part: subtract a quadratic
    prob = make_problem(least_squares(), A, b, 4, phi=phi_l1(0.2),
                        smooth_h=h_quadratic(0.3))
    assert np.isclose(prob.weak_convexity_mu, 0.3, rtol=1e-12)
    shifted = prob.dc_shift(0.3)
    assert shifted.weak_convexity_mu == 0.0
    assert shifted.quad == prob.quad + 0.3
    for _ in range(30):
        x = rng.standard_normal(10) * 3
        assert np.isclose(shifted.objective(x), prob.objective(x), rtol=1e-12,
                          atol=1e-12)
        assert np.allclose(shifted.f_grad(x) - shifted.h_subgradient(x),
                           prob.f_grad(x) - prob.h_subgradient(x), atol=1e-12)
    with pytest.raises(InvalidParameterError):
        prob.dc_shift(-0.1)


def test_global_smooth_lipschitz_cached_and_valid():
    rng = np.random.default_rng(6)
    A, b = _instance(rng)
    prob = make_problem(least_squares(), A, b, 4, quad=0.2,
                        smooth_h=h_quadratic(0.1))
    L = prob.global_smooth_lipschitz()
    assert L == prob.global_smooth_lipschitz()
    for _ in range(30):
        x = rng.standard_normal(10)
        y = rng.standard_normal(10)
        gap = np.linalg.norm(prob.f_grad(x) - prob.f_grad(y))
        assert gap <= L * np.linalg.norm(x - y) * (1 + 1e-9)


def test_weak_convexity_override():
    rng = np.random.default_rng(7)
    A, b = _instance(rng)
    oracle = SmoothOracle(least_squares(), A, b, uniform_partition(10, 4))
    prob = CompositeProblem.build(oracle, phi_l1(0.1), h_scad(0.1, 3.7),
                                  weak_convexity_mu=0.7)
    assert prob.weak_convexity_mu == 0.7
    with pytest.raises(InvalidParameterError):
        CompositeProblem.build(oracle, phi_l1(0.1), h_scad(0.1, 3.7),
                               weak_convexity_mu=-0.5)
