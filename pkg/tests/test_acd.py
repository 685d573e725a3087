"""Non-uniform accelerated coordinate descent: schedule, rates, step options."""

import numpy as np
import pytest

from ncdopt.errors import InvalidParameterError
from ncdopt.oracles import DataMatrix, least_squares, LIPSCHITZ_FLOOR
from ncdopt.penalties import phi_zero
from ncdopt.presets import make_problem
from ncdopt.solvers.acd import acd_nonuniform, acd_schedule
from ncdopt.solvers.apcg import apcg_coefficients
from ncdopt.solvers.surrogate import SmoothSurrogate, SubProblem


def _diag_quad(curv, m, seed=0):
    # diagonal design: every constant is known in closed form
    d = curv.size
    n = d
    A = DataMatrix(np.diag(np.sqrt(n * curv)))
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(n)
    prob = make_problem(least_squares(), A, b, m, phi=phi_zero())
    q = A.toarray().T @ b / n
    x_star = q / curv
    return prob, x_star


def _smooth_sub(prob, mu_s):
    return SubProblem(SmoothSurrogate(oracle=prob.oracle), prob.phi, prob.part,
                      mu_s)


def _value(prob, x):
    return prob.objective(x)


def test_schedule_constants():
    curv = np.geomspace(0.05, 0.8, 12)
    prob, _ = _diag_quad(curv, 4)
    part = prob.part
    for s in [0.0, 0.3, 1.0]:
        mu_s = 0.04
        weights, alpha, beta, gamma = acd_schedule(part, mu_s, s)
        ref_w = part.L ** ((1.0 - s) / 2.0)
        assert np.allclose(weights, ref_w, rtol=1e-14)
        T = ref_w.sum()
        assert np.isclose(alpha, np.sqrt(mu_s) / (np.sqrt(mu_s) + T),
                          rtol=1e-14)
        assert np.isclose(beta, np.sqrt(mu_s) * T, rtol=1e-14)
        assert gamma == mu_s


def test_equal_constants_match_accelerated_prox_schedule():
    # equal block constants at s = 1: sampling is uniform and the
    # y-combination weight, gamma, and (up to the m^2 probability
    # normalization) beta coincide with the fixed-point coefficients of the
    # strongly convex accelerated prox method
    rng = np.random.default_rng(1)
    A = DataMatrix(np.sqrt(2.0) * np.eye(8))
    prob = make_problem(least_squares(), A, rng.standard_normal(8), 4)
    part = prob.part
    assert np.allclose(part.L, part.L[0])
    mu_tilde = 0.25 / float(part.L[0])
    weights, alpha, beta, gamma = acd_schedule(part, mu_tilde, 1.0)
    m = part.m
    assert np.allclose(weights, weights[0])
    a_fp, g_fp, b_fp = apcg_coefficients(m, mu_tilde, mu_tilde, 3)
    # y = (w2 x + w1 z) / (w1 + w2) with w1 = a * gamma, w2 = gamma
    z_weight = a_fp[0] * g_fp[0] / (a_fp[0] * g_fp[0] + g_fp[1])
    assert np.isclose(alpha, z_weight, rtol=1e-12)
    assert np.isclose(gamma, g_fp[0], rtol=1e-14)
    assert np.isclose(beta, m * m * b_fp[0], rtol=1e-12)


def test_single_block_rate_on_quadratic():
    curv = 2.2 ** -np.arange(6)[::-1]
    prob, x_star = _diag_quad(curv, 1)
    L = float(prob.part.L[0])
    mu0 = float(curv.min())
    sub = _smooth_sub(prob, mu0)
    F_star = _value(prob, x_star)
    rate = 1.0 - np.sqrt(mu0) / (np.sqrt(mu0) + np.sqrt(L))
    for K in [10, 25]:
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            x0 = rng.standard_normal(6) * 2
            gap0 = _value(prob, x0) - F_star
            dist0 = float(np.dot(x0 - x_star, x0 - x_star))
            xk, _ = acd_nonuniform(sub, x0, K, rng, s=0.0)
            gap = _value(prob, xk) - F_star
            bound = rate ** K * (gap0 + 0.5 * mu0 * dist0)
            worst = max(worst, gap / bound)
        assert worst <= 1.1, (K, worst)


def test_option_one_dominates_option_two():
    curv = np.geomspace(0.01, 1.0, 12)
    prob, x_star = _diag_quad(curv, 4, seed=3)
    mu_s = float(np.min(curv / prob.part.coord_L()))
    sub = _smooth_sub(prob, mu_s)
    x0 = np.full(12, 1.5)
    for k in range(1, 61):
        x1, _ = acd_nonuniform(sub, x0, k, np.random.default_rng(7),
                               s=1.0, option="I")
        x2, _ = acd_nonuniform(sub, x0, k, np.random.default_rng(7),
                               s=1.0, option="II")
        F1, F2 = _value(prob, x1), _value(prob, x2)
        assert F1 <= F2 + 1e-12 * max(1.0, abs(F2)), k


def test_floored_blocks_are_never_sampled():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((10, 6))
    M[:, 3] = 0.0
    with pytest.warns(RuntimeWarning):
        prob = make_problem(least_squares(), DataMatrix(M),
                            rng.standard_normal(10), 6)
    part = prob.part
    assert part.L[3] <= LIPSCHITZ_FLOOR
    weights, _, _, _ = acd_schedule(part, 0.01, 0.0)
    assert weights[3] == 0.0
    sub = _smooth_sub(prob, 0.01)
    x0 = rng.standard_normal(6)
    xk, _ = acd_nonuniform(sub, x0, 200, np.random.default_rng(0), s=0.0)
    # never sampled: the coordinate only rides the convex combinations, so
    # it stays at its start up to float mixing drift while others move
    assert abs(xk[3] - x0[3]) <= 1e-12
    moved = np.abs(xk - x0)
    assert np.max(moved) > 1e-3


def test_all_floored_schedule_raises():
    with pytest.warns(RuntimeWarning):
        prob = make_problem(least_squares(), DataMatrix(np.zeros((5, 4))),
                            np.ones(5), 2)
    with pytest.raises(InvalidParameterError):
        acd_schedule(prob.part, 0.01, 0.0)


def test_acd_validation():
    curv = np.geomspace(0.1, 1.0, 6)
    prob, _ = _diag_quad(curv, 2)
    sub = _smooth_sub(prob, 0.05)
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidParameterError):
        acd_nonuniform(sub, np.zeros(6), 5, rng, option="III")
    with pytest.raises(InvalidParameterError):
        acd_nonuniform(sub, np.zeros(6), 5, rng, s=1.5)
    with pytest.raises(InvalidParameterError):
        acd_nonuniform(sub, np.zeros(6), 5, rng, s=-0.2)


def test_acd_descends_and_is_deterministic():
    curv = np.geomspace(0.02, 1.0, 10)
    prob, x_star = _diag_quad(curv, 5, seed=6)
    mu_s = float(np.min(curv / prob.part.coord_L()))
    sub = _smooth_sub(prob, mu_s)
    x0 = np.full(10, 2.0)
    xa, Aa = acd_nonuniform(sub, x0, 300, np.random.default_rng(12), s=1.0)
    xb, Ab = acd_nonuniform(sub, x0, 300, np.random.default_rng(12), s=1.0)
    assert np.array_equal(xa, xb)
    assert np.array_equal(Aa, Ab)
    assert _value(prob, xa) < _value(prob, x0)
    assert _value(prob, xa) >= _value(prob, x_star) - 1e-12
