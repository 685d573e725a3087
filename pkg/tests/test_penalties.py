"""Penalty values, proximal maps, and the concave parts.

The proximal map is checked against a dense grid search on the scalar
objective <y,x> + phi(x) + (gamma/2)(xbar - x)^2, which only needs the
penalty's value formula; the value formula itself is pinned to the
declared weights separately.
"""

import numpy as np
import pytest

from ncdopt.errors import InvalidParameterError, InvalidStepError
from ncdopt.penalties import (
    ConcaveH,
    SeparablePhi,
    h_largest_k,
    h_quadratic,
    h_scad,
    h_subgrad,
    h_value,
    h_zero,
    largest_k_subgrad,
    largest_k_value,
    phi_elastic_net,
    phi_l1,
    phi_zero,
    prox_block,
    scad_h_subgrad,
    scad_h_value,
    soft_threshold,
)

GRID = np.arange(-3.0, 3.0 + 1e-4, 1e-4)


def _phi_on_grid(phi, grid):
    # elementwise penalty value; the vector `value` sums these terms
    return phi.l1_weight * np.abs(grid) + 0.5 * phi.quad_weight * grid ** 2


def grid_prox(phi, xbar, y, gamma):
    """Scalar prox by brute-force search over GRID."""
    vals = y * GRID + _phi_on_grid(phi, GRID) + 0.5 * gamma * (xbar - GRID) ** 2
    return GRID[np.argmin(vals)]


def test_phi_value_matches_declared_weights():
    rng = np.random.default_rng(0)
    for _ in range(50):
        lam, lam2, sc = rng.uniform(0.0, 2.0, 3)
        x = rng.standard_normal(9)
        p1 = phi_l1(lam, scale=sc)
        assert np.isclose(p1.value(x), sc * lam * np.abs(x).sum(), rtol=1e-12)
        p2 = phi_elastic_net(lam, lam2, scale=sc)
        assert np.isclose(p2.value(x), _phi_on_grid(p2, x).sum(), rtol=1e-12)
    assert phi_zero().value(np.ones(4)) == 0.0


def test_prox_matches_grid_oracle():
    rng = np.random.default_rng(1)
    for trial in range(300):
        xbar = float(rng.uniform(-1.5, 1.5))
        y = float(rng.uniform(-1.0, 1.0))
        gamma = float(rng.uniform(1.0, 3.0))
        lam = float(rng.uniform(0.0, 1.5))
        lam2 = float(rng.uniform(0.0, 1.5))
        phi = (phi_l1(lam) if trial % 2 else phi_elastic_net(lam, lam2))
        z = prox_block(phi, np.array([xbar]), np.array([y]), gamma)
        assert abs(float(z[0]) - grid_prox(phi, xbar, y, gamma)) <= 2e-4


def test_prox_pinned_cases():
    # zero penalty: plain gradient step
    z = prox_block(phi_zero(), np.array([1.0]), np.array([2.0]), 2.0)
    assert z[0] == 0.0
    # soft threshold with lam/gamma = 0.5
    z = prox_block(phi_l1(1.0), np.array([1.0]), np.array([0.0]), 2.0)
    assert np.isclose(z[0], 0.5, atol=2e-4)
    assert abs(grid_prox(phi_l1(1.0), 1.0, 0.0, 2.0) - 0.5) <= 2e-4
    # dead zone
    z = prox_block(phi_l1(1.0), np.array([0.3]), np.array([0.0]), 2.0)
    assert z[0] == 0.0
    assert abs(grid_prox(phi_l1(1.0), 0.3, 0.0, 2.0)) <= 2e-4


def test_prox_elastic_net_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(100):
        xbar = rng.standard_normal(5)
        y = rng.standard_normal(5)
        gamma = float(rng.uniform(0.5, 4.0))
        phi = phi_elastic_net(rng.uniform(0, 2), rng.uniform(0, 2))
        z = prox_block(phi, xbar, y, gamma)
        # stationarity: gamma (z - xbar) + y + quad z + l1 subgradient = 0
        r = gamma * (z - xbar) + y + phi.quad_weight * z
        on = z != 0
        assert np.allclose(r[on], -phi.l1_weight * np.sign(z[on]), atol=1e-10)
        assert np.all(np.abs(r[~on]) <= phi.l1_weight + 1e-10)


def test_prox_per_coordinate_gamma():
    rng = np.random.default_rng(3)
    xbar = rng.standard_normal(6)
    y = rng.standard_normal(6)
    gammas = rng.uniform(0.5, 3.0, 6)
    phi = phi_l1(0.7)
    z = prox_block(phi, xbar, y, gammas)
    for j in range(6):
        zj = prox_block(phi, xbar[j:j + 1], y[j:j + 1], float(gammas[j]))
        assert z[j] == zj[0]


def test_prox_rejects_bad_gamma():
    phi = phi_l1(1.0)
    for g in [0.0, -1.0, np.inf, np.nan]:
        with pytest.raises(InvalidStepError):
            prox_block(phi, np.ones(2), np.ones(2), g)


def test_soft_threshold():
    u = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    assert np.allclose(soft_threshold(u, 1.0), [-1.0, 0.0, 0.0, 0.0, 1.0])
    assert np.allclose(soft_threshold(u, 0.0), u)


def test_three_point_inequality_every_phi():
    # for z = prox output and any y: <g, z-y> + phi(z) - phi(y)
    #   <= (gamma/2) (||x-y||^2 - ||z-y||^2 - ||x-z||^2)
    rng = np.random.default_rng(4)
    variants = [phi_zero(), phi_l1(0.8), phi_elastic_net(0.6, 0.9)]
    for phi in variants:
        for _ in range(400):
            d = 6
            x = rng.standard_normal(d)
            y = rng.standard_normal(d)
            g = rng.standard_normal(d)
            gamma = float(rng.uniform(0.2, 4.0))
            z = prox_block(phi, x, g, gamma)
            lhs = float(np.dot(g, z - y)) + phi.value(z) - phi.value(y)
            rhs = 0.5 * gamma * (
                np.dot(x - y, x - y) - np.dot(z - y, z - y) - np.dot(x - z, x - z)
            )
            assert lhs <= rhs + 1e-10


def test_phi_validation():
    with pytest.raises(InvalidParameterError):
        SeparablePhi("huber")
    with pytest.raises(InvalidParameterError):
        phi_l1(-0.1)
    with pytest.raises(InvalidParameterError):
        phi_elastic_net(0.5, -1.0)
    assert phi_l1(0.0).is_zero()
    assert phi_l1(1.0, scale=0.0).is_zero()
    assert not phi_elastic_net(0.0, 1.0).is_zero()


# ---------------------------------------------------------------------------
# SCAD concave part
# ---------------------------------------------------------------------------

def _scad_branches(lam, theta, a):
    """The three closed-form branches, written out independently."""
    if a <= lam:
        return 0.0
    if a <= theta * lam:
        return (a * a - 2 * lam * a + lam * lam) / (2 * (theta - 1))
    return lam * a - 0.5 * (theta + 1) * lam * lam


def test_scad_value_pinned_and_branches():
    assert scad_h_value(1.0, 3.0, np.array([0.5])) == 0.0
    assert np.isclose(scad_h_value(1.0, 3.0, np.array([2.0])), 0.25, rtol=1e-12)
    assert np.isclose(scad_h_value(1.0, 3.0, np.array([5.0])), 3.0, rtol=1e-12)
    rng = np.random.default_rng(5)
    for _ in range(200):
        lam = float(rng.uniform(0.2, 2.0))
        theta = float(rng.uniform(1.5, 6.0))
        x = float(rng.uniform(-3, 3) * theta * lam)
        want = _scad_branches(lam, theta, abs(x))
        assert np.isclose(scad_h_value(lam, theta, np.array([x])), want,
                          rtol=1e-12, atol=1e-14)


def test_scad_value_is_integral_of_derivative():
    # quadrature oracle: h(x) = integral of the derivative from 0 to x
    rng = np.random.default_rng(6)
    for _ in range(20):
        lam = float(rng.uniform(0.3, 1.5))
        theta = float(rng.uniform(2.0, 5.0))
        x = float(rng.uniform(-4, 4))
        ts = np.linspace(0.0, x, 20001)
        dv = scad_h_subgrad(lam, theta, ts)
        quad = np.trapezoid(dv, ts)
        assert np.isclose(scad_h_value(lam, theta, np.array([x])), quad, atol=1e-6)


def test_scad_subgrad_matches_finite_differences():
    rng = np.random.default_rng(7)
    lam, theta = 0.8, 3.7
    for _ in range(300):
        x = float(rng.uniform(-4, 4))
        # stay away from the two kinks where the derivative is only one-sided
        if min(abs(abs(x) - lam), abs(abs(x) - theta * lam)) < 1e-4:
            continue
        h = 1e-6
        fd = (scad_h_value(lam, theta, np.array([x + h]))
              - scad_h_value(lam, theta, np.array([x - h]))) / (2 * h)
        assert np.isclose(scad_h_subgrad(lam, theta, np.array([x]))[0], fd,
                          atol=1e-7)


def test_scad_subgrad_pinned():
    assert scad_h_subgrad(1.0, 3.0, np.array([0.0]))[0] == 0.0
    assert np.isclose(scad_h_subgrad(1.0, 3.0, np.array([2.0]))[0], 0.5, rtol=1e-12)
    assert np.isclose(scad_h_subgrad(1.0, 3.0, np.array([-5.0]))[0], -1.0, rtol=1e-12)
    x = np.linspace(-6, 6, 101)
    lam, theta = 0.7, 2.5
    assert np.allclose(scad_h_subgrad(lam, theta, x),
                       -scad_h_subgrad(lam, theta, -x), atol=1e-15)


def test_scad_continuity_at_breakpoints():
    rng = np.random.default_rng(8)
    for _ in range(100):
        lam = float(rng.uniform(0.2, 2.5))
        theta = float(rng.uniform(1.3, 8.0))
        for b in [lam, theta * lam, -lam, -theta * lam]:
            lo = np.nextafter(b, -np.inf)
            hi = np.nextafter(b, np.inf)
            vals = scad_h_value(lam, theta, np.array([lo]))
            valb = scad_h_value(lam, theta, np.array([b]))
            valh = scad_h_value(lam, theta, np.array([hi]))
            assert abs(vals - valb) <= 1e-12
            assert abs(valh - valb) <= 1e-12


def test_scad_derivative_lipschitz():
    rng = np.random.default_rng(9)
    for _ in range(20):
        lam = float(rng.uniform(0.2, 2.0))
        theta = float(rng.uniform(1.2, 6.0))
        a = rng.uniform(-5 * theta * lam, 5 * theta * lam, 500)
        b = rng.uniform(-5 * theta * lam, 5 * theta * lam, 500)
        da = scad_h_subgrad(lam, theta, a)
        db = scad_h_subgrad(lam, theta, b)
        bound = (1.0 / (theta - 1.0)) * (1 + 1e-9)
        assert np.all(np.abs(da - db) <= bound * np.abs(a - b) + 1e-15)


def test_scad_convexity():
    rng = np.random.default_rng(10)
    lam, theta = 1.1, 3.7
    for _ in range(300):
        x = rng.uniform(-8, 8, 4)
        y = rng.uniform(-8, 8, 4)
        al = float(rng.uniform(0, 1))
        hx = scad_h_value(lam, theta, x)
        hy = scad_h_value(lam, theta, y)
        hm = scad_h_value(lam, theta, al * x + (1 - al) * y)
        assert hm <= al * hx + (1 - al) * hy + 1e-12


# ---------------------------------------------------------------------------
# largest-k concave part
# ---------------------------------------------------------------------------

def _topk_sum(x, k):
    return float(np.sort(np.abs(x))[::-1][:k].sum())


def test_largest_k_value_against_sort():
    rng = np.random.default_rng(11)
    assert largest_k_value(1.0, 2, np.array([3.0, -1.0, 2.0])) == 5.0
    for _ in range(200):
        d = int(rng.integers(1, 30))
        k = int(rng.integers(1, d + 1))
        lam = float(rng.uniform(0.1, 2.0))
        x = rng.standard_normal(d)
        assert np.isclose(largest_k_value(lam, k, x), lam * _topk_sum(x, k),
                          rtol=1e-12)
        assert np.isclose(largest_k_value(lam, d, x), lam * np.abs(x).sum(),
                          rtol=1e-12)
        assert np.isclose(largest_k_value(lam, 1, x), lam * np.abs(x).max(),
                          rtol=1e-12)


def test_largest_k_subgrad_structure():
    v = largest_k_subgrad(1.0, 2, np.array([3.0, -1.0, 2.0]))
    assert np.allclose(v, [1.0, 0.0, 1.0])
    # at zero the tie rule assigns +lam to the k lowest indices
    v0 = largest_k_subgrad(0.5, 3, np.zeros(6))
    assert np.allclose(v0, [0.5, 0.5, 0.5, 0.0, 0.0, 0.0])
    # k = d reduces to the l1 subgradient with sign(0) = +1
    x = np.array([2.0, 0.0, -3.0])
    assert np.allclose(largest_k_subgrad(1.0, 3, x), [1.0, 1.0, -1.0])


def test_largest_k_subgradient_inequality():
    # v reported at x must satisfy h(y) >= h(x) + <v, y - x> for all y
    rng = np.random.default_rng(12)
    lam = 0.9
    for _ in range(2000):
        d = int(rng.integers(2, 12))
        k = int(rng.integers(1, d + 1))
        # mix smooth points and tie-heavy points
        if rng.uniform() < 0.5:
            x = rng.standard_normal(d)
        else:
            x = rng.integers(-2, 3, d).astype(float) * 0.5
        y = rng.standard_normal(d) * float(rng.uniform(0.1, 4.0))
        v = largest_k_subgrad(lam, k, x)
        hx = largest_k_value(lam, k, x)
        hy = largest_k_value(lam, k, y)
        assert hy >= hx + float(np.dot(v, y - x)) - 1e-12


def test_largest_k_validation():
    with pytest.raises(InvalidParameterError):
        largest_k_value(1.0, 0, np.ones(3))
    with pytest.raises(InvalidParameterError):
        largest_k_value(1.0, 4, np.ones(3))
    with pytest.raises(InvalidParameterError):
        h_largest_k(1.0, 0)


# ---------------------------------------------------------------------------
# ConcaveH dispatch
# ---------------------------------------------------------------------------

def test_h_dispatch_consistency():
    rng = np.random.default_rng(13)
    x = rng.standard_normal(8)
    hs = h_scad(0.9, 3.7, scale=0.25)
    assert h_value(hs, x) == 0.25 * scad_h_value(0.9, 3.7, x)
    assert np.array_equal(h_subgrad(hs, x), 0.25 * scad_h_subgrad(0.9, 3.7, x))
    hk = h_largest_k(0.9, 3, scale=0.5)
    assert h_value(hk, x) == 0.5 * largest_k_value(0.9, 3, x)
    assert np.array_equal(h_subgrad(hk, x), 0.5 * largest_k_subgrad(0.9, 3, x))
    hz = h_zero()
    assert h_value(hz, x) == 0.0
    assert np.all(h_subgrad(hz, x) == 0.0)
    assert hz.is_zero() and hz.is_smooth()


def test_h_quadratic_shift():
    x = np.array([1.0, 1.0])
    hq = h_quadratic(2.0)
    assert h_value(hq, x) == 2.0
    assert np.allclose(h_subgrad(hq, x), [2.0, 2.0])
    assert hq.is_smooth()
    assert hq.gradient_lipschitz() == 2.0


def test_h_smoothness_flags_and_lipschitz():
    hs = h_scad(1.0, 3.0, scale=0.5)
    assert hs.is_smooth()
    assert np.isclose(hs.gradient_lipschitz(), 0.5 / 2.0, rtol=1e-12)
    hk = h_largest_k(1.0, 2)
    assert not hk.is_smooth()
    assert not h_scad(1.0, 3.0).is_zero()
    assert h_scad(1.0, 3.0, scale=0.0).is_zero()


def test_h_validation():
    with pytest.raises(InvalidParameterError):
        h_scad(1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        h_scad(-0.5, 3.0)
    with pytest.raises(InvalidParameterError):
        ConcaveH("cauchy")
    with pytest.raises(InvalidParameterError):
        h_quadratic(-1.0)


def test_h_convexity_random_triples():
    rng = np.random.default_rng(14)
    variants = [h_scad(0.8, 3.7), h_largest_k(0.8, 3), h_quadratic(0.4)]
    for h in variants:
        for _ in range(200):
            x = rng.standard_normal(6) * 3
            y = rng.standard_normal(6) * 3
            al = float(rng.uniform(0, 1))
            lhs = h_value(h, al * x + (1 - al) * y)
            assert lhs <= al * h_value(h, x) + (1 - al) * h_value(h, y) + 1e-12
