"""Ready-made benchmark instances at desk scale.

Two regularized learning problems mirror the benchmark protocol:

* logistic loss with the sparsity-gap penalty (rho/d) (||x||_1 - |||x|||_k),
* huber regression with the folded-concave penalty (rho/d) psi_{lam,theta},

plus a plain least-squares instance for the smooth baselines and an
ill-conditioned weakly convex quadratic toy with a closed-form stationary
point.  All builders return the assembled problem together with the planted
or exact solution when one exists.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .blocks import uniform_partition
from .data import SyntheticSpec, gen_synthetic, normalize_binary_labels
from .errors import InvalidParameterError
from .oracles import DataMatrix, SmoothOracle, huber, least_squares, logistic
from .penalties import (
    h_largest_k,
    h_quadratic,
    h_scad,
    h_zero,
    phi_l1,
    phi_zero,
)
from .problem import CompositeProblem

PRESETS = ("logistic_topk", "huber_scad", "least_squares")


def make_problem(loss, A, b, m, *, phi=None, h=None, quad=0.0, smooth_h=None):
    """Assemble a problem over ``m`` near-equal contiguous blocks."""
    A = A if isinstance(A, DataMatrix) else DataMatrix(A)
    part = uniform_partition(A.d, m)
    oracle = SmoothOracle(loss, A, np.asarray(b, dtype=np.float64), part)
    return CompositeProblem.build(
        oracle,
        phi if phi is not None else phi_zero(),
        h if h is not None else h_zero(),
        quad=quad,
        smooth_h=smooth_h,
    )


def default_k(d: int) -> int:
    """Sparsity target of the largest-k penalty: 1% of the dimension."""
    return max(1, round(0.01 * d))


def logistic_topk_problem(A, labels, m, *, rho_weight: float = 1.0,
                          k: int | None = None) -> CompositeProblem:
    """Logistic loss + (rho/d) (||x||_1 - |||x|||_k)."""
    A = A if isinstance(A, DataMatrix) else DataMatrix(A)
    w = rho_weight / A.d
    kk = default_k(A.d) if k is None else int(k)
    return make_problem(
        logistic(), A, normalize_binary_labels(labels), m,
        phi=phi_l1(w), h=h_largest_k(w, kk),
    )


def huber_scad_problem(A, b, m, *, delta: float = 1e-2, rho_weight: float = 1.0,
                       lam: float = 1.0, theta: float = 3.7) -> CompositeProblem:
    """Huber regression + (rho/d) * folded-concave penalty.

    The penalty splits as lam ||x||_1 minus its smooth concave complement,
    both carrying the rho/d factor; the complement is subtracted through the
    concave slot, which keeps the smooth part convex.
    """
    A = A if isinstance(A, DataMatrix) else DataMatrix(A)
    scale = rho_weight / A.d
    return make_problem(
        huber(delta), A, b, m,
        phi=phi_l1(lam, scale=scale), h=h_scad(lam, theta, scale=scale),
    )


def synthetic_logistic_topk(n: int = 200, d: int = 1000, m: int = 200, *,
                            k: int | None = None, rho_weight: float = 1.0,
                            s_true: int | None = None, noise_sigma: float = 0.1,
                            seed: int = 0):
    """Equicorrelated classification instance; returns ``(problem, x_true)``.

    Labels are sign(a_i' x_true + noise); the sign of an exact zero is +1.
    """
    st = default_k(d) if s_true is None else s_true
    A, b, x_true = gen_synthetic(
        SyntheticSpec(n=n, d=d, s_true=st, noise_sigma=noise_sigma, seed=seed)
    )
    labels = np.where(b >= 0, 1.0, -1.0)
    return logistic_topk_problem(A, labels, m, rho_weight=rho_weight, k=k), x_true


def synthetic_huber_scad(n: int = 200, d: int = 1000, m: int = 200, *,
                         delta: float = 1e-2, rho_weight: float = 1.0,
                         lam: float = 1.0, theta: float = 3.7,
                         s_true: int | None = None, noise_sigma: float = 0.1,
                         seed: int = 0):
    """Equicorrelated huber regression instance; returns ``(problem, x_true)``."""
    st = default_k(d) if s_true is None else s_true
    A, b, x_true = gen_synthetic(
        SyntheticSpec(n=n, d=d, s_true=st, noise_sigma=noise_sigma, seed=seed)
    )
    problem = huber_scad_problem(A, b, m, delta=delta, rho_weight=rho_weight,
                                 lam=lam, theta=theta)
    return problem, x_true


def synthetic_least_squares(n: int = 200, d: int = 1000, m: int = 200, *,
                            s_true: int | None = None, noise_sigma: float = 0.1,
                            seed: int = 0):
    """Unregularized least squares on the same design; returns ``(problem, x_true)``."""
    st = default_k(d) if s_true is None else s_true
    A, b, x_true = gen_synthetic(
        SyntheticSpec(n=n, d=d, s_true=st, noise_sigma=noise_sigma, seed=seed)
    )
    return make_problem(least_squares(), A, b, m), x_true


def weakly_convex_quadratic(d: int = 200, m: int = 20, *, cond: float = 1e3,
                            seed: int = 0):
    """Ill-conditioned quadratic minus a small quadratic; returns ``(problem, x_star)``.

    The loss is a diagonal least-squares term whose per-coordinate curvatures
    are log-spaced in [2/cond, 1], and a quadratic of strength 1/cond is
    folded in with a minus sign, so the smooth part is (1/cond)-weakly
    convex while staying bounded below.  The unique stationary point solves
    a diagonal system and is returned for reference.
    """
    if cond <= 2:
        raise InvalidParameterError("cond must exceed 2")
    mu_w = 1.0 / cond
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    curv = np.geomspace(2.0 * mu_w, 1.0, d)
    n = d
    A = DataMatrix(sp.diags(np.sqrt(n * curv), format="csc"))
    b = rng.standard_normal(n)
    problem = make_problem(least_squares(), A, b, m, smooth_h=h_quadratic(mu_w))
    # grad F = (diag(curv) - mu_w I) x - (1/n) A' b
    x_star = (A.csc.T @ b) / n / (curv - mu_w)
    return problem, x_star
