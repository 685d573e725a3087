"""Stationarity measures for the three-term composite objective.

Two computable quantities certify approximate criticality of a point x with
a chosen subgradient v of the concave part:

* the composite subgradient g, built from one block proximal step per block
  with weights gamma_i: g_i = gamma_i (x_i - P_i(x_i, grad_i f(x) - v_i,
  gamma_i)); x is critical iff g vanishes for some admissible v;
* the proximal-point residual p = mu * sum_i L_i U_i (x_i - xbar_i), where
  xbar minimizes the strongly convex model
  F_mu(y) = f(y) + phi(y) - h(x) - <v, y - x> + (mu/2) ||y - x||_[1]^2.
  Its dual norm obeys ||p||_[1],* = mu ||x - xbar||_[1] identically, and
  (1/(2 mu)) ||p||^2_[1],* lower-bounds how far x is from solving the model.

The model minimizer has no closed form, so it is computed by the certified
accelerated coordinate solver to a caller-chosen gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockPartition, dual_weighted_norm, weighted_norm
from .errors import InvalidParameterError
from .penalties import SeparablePhi, prox_block
from .problem import CompositeProblem


@dataclass
class OptimalityReport:
    """One-shot stationarity summary at a point.

    ``g`` / ``g_norm_dual`` come from the composite subgradient at the
    report's ``gamma_scale`` and ``s``; ``p`` / ``p_norm_dual`` from the
    proximal model (present only when the model was solved). ``inner_gap``
    is the certified gap of that solve and ``v`` the concave-part
    subgradient both measures shared.
    """

    g: np.ndarray
    g_norm_dual: float
    gamma_scale: float
    s: float
    v: np.ndarray
    p: np.ndarray | None = None
    p_norm_dual: float | None = None
    mu: float | None = None
    inner_gap: float | None = None
    xbar: np.ndarray | None = None


def composite_subgradient(
    phi: SeparablePhi,
    part: BlockPartition,
    x: np.ndarray,
    grad_f: np.ndarray,
    v: np.ndarray,
    gammas: np.ndarray,
) -> np.ndarray:
    """g with g_i = gamma_i (x_i - P_i(x_i, grad_f_i - v_i, gamma_i)).

    ``gammas`` holds one positive weight per block.
    """
    gammas = np.asarray(gammas, dtype=np.float64)
    if gammas.shape != (part.m,):
        raise InvalidParameterError("need one prox weight per block")
    coord_gamma = np.repeat(gammas, part.sizes())
    x = np.asarray(x, dtype=np.float64)
    target = prox_block(phi, x, np.asarray(grad_f) - np.asarray(v), coord_gamma)
    return coord_gamma * (x - target)


def criticality_gap(problem: CompositeProblem, x, *, gamma_scale: float = 1.0,
                    s: float = 1.0) -> float:
    """Dual norm of the composite subgradient with the canonical v."""
    if gamma_scale <= 0:
        raise InvalidParameterError("gamma_scale must be positive")
    x = np.asarray(x, dtype=np.float64)
    v = problem.h_subgradient(x)
    g = composite_subgradient(
        problem.phi, problem.part, x, problem.f_grad(x), v,
        gamma_scale * problem.part.L,
    )
    return dual_weighted_norm(g, problem.part, s)


def subgradient_measure_sq(problem: CompositeProblem, x, *, Ax=None,
                           gamma_scale: float = 1.0, s: float = 1.0,
                           tracker=None) -> float:
    """Squared dual norm of the composite subgradient; reuses a product cache.

    Same quantity as :func:`criticality_gap` squared, but accepts a
    precomputed A x and an incremental top-k tracker so solver traces can
    evaluate it without redundant work.
    """
    if gamma_scale <= 0:
        raise InvalidParameterError("gamma_scale must be positive")
    v = problem.h_subgradient(x, tracker=tracker)
    g = composite_subgradient(
        problem.phi, problem.part, x, problem.f_grad(x, Ax=Ax), v,
        gamma_scale * problem.part.L,
    )
    return dual_weighted_norm(g, problem.part, s) ** 2


def prox_point_measure(
    problem: CompositeProblem,
    x,
    mu: float,
    *,
    v: np.ndarray | None = None,
    inner_tol: float = 1e-10,
    budget: int | None = None,
    gamma_scale: float | None = None,
    s: float = 1.0,
    x_warm: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> OptimalityReport:
    """Solve the proximal model at ``x`` and report both measures.

    The model is minimized by the certified accelerated coordinate solver
    until its optimality gap is at most ``inner_tol``; the default budget is
    50 * m * ceil(1/sqrt(mu_tilde)) iterations, past which a
    BudgetExceededError carrying the best gap is raised.  ``x_warm``
    optionally seeds the solve (e.g. with an outer solver's own inner
    output).  Randomness is internal and fixed, so reports are reproducible.
    """
    # deferred to keep this module importable from the solver package
    from .solvers.apcg import apcg_certified
    from .solvers.surrogate import dc_subproblem

    if problem.weak_convexity_mu > 0:
        raise InvalidParameterError(
            "the proximal model needs a convex smooth part; apply dc_shift first"
        )
    if mu <= 0:
        raise InvalidParameterError("mu must be positive")
    x = np.asarray(x, dtype=np.float64)
    if v is None:
        v = problem.h_subgradient(x)
    grad_f = problem.f_grad(x)
    gscale = mu if gamma_scale is None else gamma_scale
    g = composite_subgradient(
        problem.phi, problem.part, x, grad_f, v, gscale * problem.part.L
    )
    sub = dc_subproblem(problem, v, mu, x)
    if budget is None:
        budget = int(50 * problem.part.m * math.ceil(1.0 / math.sqrt(sub.mu_tilde)))
    if rng is None:
        rng = np.random.default_rng(0)
    xbar, _, gap, _ = apcg_certified(
        sub,
        x if x_warm is None else np.asarray(x_warm, dtype=np.float64),
        inner_tol,
        budget,
        rng,
    )
    p = mu * problem.part.coord_L() * (x - xbar)
    return OptimalityReport(
        g=g,
        g_norm_dual=dual_weighted_norm(g, problem.part, s),
        gamma_scale=gscale,
        s=s,
        v=v,
        p=p,
        p_norm_dual=dual_weighted_norm(p, problem.part, 1.0),
        mu=mu,
        inner_gap=gap,
        xbar=xbar,
    )


def prox_residual_norm(problem: CompositeProblem, x, xbar, mu: float) -> float:
    """``mu * ||x - xbar||_[1]``, the dual norm of p without forming it."""
    return mu * weighted_norm(np.asarray(x) - np.asarray(xbar), problem.part, 1.0)


def concave_norm_bound(problem_h, d: int) -> float:
    """Documented bound M on sup ||v|| over subgradients of the concave part.

    lam * sqrt(k) for largest-k, lam * sqrt(d) for the scad part (each times
    the scale), infinite when a quadratic shift makes the supremum unbounded.
    """
    if problem_h.shift_mu > 0:
        return math.inf
    if problem_h.kind == "largest_k":
        return problem_h.scale * problem_h.lam * math.sqrt(problem_h.k)
    if problem_h.kind == "scad":
        return problem_h.scale * problem_h.lam * math.sqrt(d)
    return 0.0
