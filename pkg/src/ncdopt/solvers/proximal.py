"""Inexact proximal-point outer loops driven by accelerated coordinate solvers.

Each outer iteration freezes a strongly convex model around the current
point and runs a fixed number ``t`` of randomized accelerated steps on it,
warm-started from that point:

* ``acpdc``  model  f + phi - <v, .> + (mu/2) ||. - x^k||_[1]^2  (three-term
  objective, concave part linearized, blockwise-weighted prox term);
* ``acpp``   model  F + mu ||. - x^k||^2 (plain Euclidean, void concave
  part, separable penalty allowed);
* ``acpp_smooth``  same model with phi = 0, solved by the non-uniformly
  sampled accelerated coordinate method at exponent ``s``.

The helpers ``*_default_t`` give the inner budgets that make the outer
rates kick in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..blocks import weighted_norm
from ..errors import InvalidParameterError
from ..measures import subgradient_measure_sq
from ..problem import CompositeProblem
from .acd import acd_nonuniform
from .apcg import apcg, apcg_certified
from .config import PassCounter, SolverConfig, Trace
from .surrogate import dc_subproblem, proximal_subproblem, smooth_only


@dataclass
class StationarityReport:
    """Certificate attached to a proximal-point run.

    ``k_hat`` is the sampled outer index (1-based iterate index), ``dist_sq``
    the squared distance from the returned iterate to a high-accuracy
    minimizer of the model it came from, ``stationarity_sq`` the squared
    norm of the resulting stationarity vector, ``inner_gap`` the certified
    model gap at that minimizer, and ``descent_fraction`` the fraction of
    outer steps whose model value did not increase.
    """

    k_hat: int
    dist_sq: float
    stationarity_sq: float
    inner_gap: float
    descent_fraction: float


def acpdc_default_t(mu: float, m: int) -> int:
    """Inner budget ceil(ln 4 * m / sqrt(mu / (1 + mu))) for the dc loop."""
    if mu <= 0 or m < 1:
        raise InvalidParameterError("need mu > 0 and m >= 1")
    mu_tilde = mu / (1.0 + mu)
    return math.ceil(math.log(4.0) * m / math.sqrt(mu_tilde))


def acpp_default_t(mu: float, L: float, m: int, L_tilde_max: float) -> int:
    """Inner budget for the Euclidean proximal loop with the uniform solver.

    t = ceil(-ln(lam) / eta) with lam = min(1/4, mu^2/L^2, mu/(2L)) and
    eta = sqrt(mu / L_tilde_max) / m.
    """
    if mu <= 0 or L <= 0 or m < 1 or L_tilde_max <= 0:
        raise InvalidParameterError("need positive mu, L, L_tilde_max and m >= 1")
    lam = min(0.25, (mu / L) ** 2, mu / (2.0 * L))
    eta = math.sqrt(mu / L_tilde_max) / m
    return math.ceil(-math.log(lam) / eta)


def acpp_smooth_default_t(mu: float, L: float, L_tilde: np.ndarray, s: float) -> int:
    """Inner budget for the smooth proximal loop with non-uniform sampling.

    t = ceil(-ln(lam) / eta) with lam = min(1/8, mu/(4L), mu^2/L^2) and
    eta = sqrt(mu_s) / (sqrt(mu_s) + sum_i L_tilde_i^((1-s)/2)) where
    mu_s = mu / max_i L_tilde_i^s.
    """
    if mu <= 0 or L <= 0:
        raise InvalidParameterError("need positive mu and L")
    L_tilde = np.asarray(L_tilde, dtype=np.float64)
    mu_s = mu / float(np.max(L_tilde) ** s) if s > 0 else mu
    if not 0.0 < mu_s <= 1.0:
        raise InvalidParameterError("relative strong convexity left (0, 1]")
    T = float(np.sum(L_tilde ** ((1.0 - s) / 2.0)))
    eta = math.sqrt(mu_s) / (math.sqrt(mu_s) + T)
    lam = min(0.125, mu / (4.0 * L), (mu / L) ** 2)
    return math.ceil(-math.log(lam) / eta)


def acpdc(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    x0=None,
    callback=None,
    replication: int = 0,
):
    """Proximal dc loop on the three-term objective; returns ``(x, Trace)``.

    The traced measure is the model-step surrogate mu^2 ||x^{k+1} - x^k||_[1]^2
    (minimum so far); pair with :func:`ncdopt.measures.prox_point_measure`
    for the certified quantity at a chosen iterate.  ``callback(k, x_prev,
    v, x_new)`` sees each model's data.
    """
    config.validate()
    if problem.weak_convexity_mu > 0:
        raise InvalidParameterError(
            "the dc model needs a convex smooth part; apply dc_shift first"
        )
    part = problem.part
    mu = config.mu
    t = config.t if config.t is not None else acpdc_default_t(mu, part.m)
    rng = config.rng(replication)
    x = np.zeros(part.d) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    Ax = problem.oracle.A.matvec(x)
    counter = PassCounter(problem.oracle.A.nnz, problem.oracle.blocks.nnz)
    trace = Trace("acpdc", config.seed)
    F = problem.objective(x, Ax=Ax)
    trace.meta["objective_initial"] = F
    trace.meta["inner_steps"] = t
    trace.append(0, 0.0, F, np.inf, 0.0)
    next_trace = config.trace_every
    measure_min = np.inf
    step_sq_1 = 0.0
    k = 0
    while k < config.K:
        if config.max_passes is not None and counter.passes >= config.max_passes:
            break
        v = problem.h_subgradient(x)
        sub = dc_subproblem(problem, v, mu, x)
        x_new, Ax_new = apcg(sub, x, t, rng, Ax0=Ax, counter=counter)
        step_sq_1 = weighted_norm(x_new - x, part, 1.0) ** 2
        measure_min = min(measure_min, mu * mu * step_sq_1)
        if callback is not None:
            callback(k, x, v, x_new)
        x, Ax = x_new, Ax_new
        F = problem.objective(x, Ax=Ax)
        k += 1
        if counter.passes >= next_trace or k == config.K:
            trace.append(k, counter.passes, F, measure_min, step_sq_1)
            next_trace = counter.passes + config.trace_every
    if not trace.records or trace.records[-1].outer_iter != k:
        trace.append(k, counter.passes, F, measure_min, step_sq_1)
    trace.meta["objective_final"] = F
    return x, trace


def _prox_point_loop(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    smooth_inner: bool,
    x0,
    callback,
    replication: int,
    report_tol: float,
    report_budget: int | None,
):
    part = problem.part
    mu = config.mu
    if config.K < 1:
        raise InvalidParameterError("need at least one outer iteration")
    if problem.weak_convexity_mu > mu:
        # the model F + mu ||. - x||^2 is (2 mu - rho)-strongly convex; the
        # inner solvers are handed mu, which is only a valid lower bound
        # when rho <= mu
        raise InvalidParameterError(
            f"prox parameter mu={mu} must cover the weak convexity modulus "
            f"{problem.weak_convexity_mu}"
        )
    L_tilde = part.L + 2.0 * mu
    if smooth_inner:
        if not (problem.phi.is_zero() and problem.h.is_zero()):
            raise InvalidParameterError(
                "the smooth variant needs void penalty and concave parts"
            )
        L = problem.global_smooth_lipschitz()
        t = config.t if config.t is not None else acpp_smooth_default_t(
            mu, L, L_tilde, config.s
        )
        algorithm = "acpp_smooth"
    else:
        if not problem.h.is_zero():
            raise InvalidParameterError(
                "the Euclidean proximal model needs a void concave part"
            )
        L = problem.global_smooth_lipschitz()
        t = config.t if config.t is not None else acpp_default_t(
            mu, L, part.m, float(np.max(L_tilde))
        )
        algorithm = "acpp"
    rng = config.rng(replication)
    x = np.zeros(part.d) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    Ax = problem.oracle.A.matvec(x)
    counter = PassCounter(problem.oracle.A.nnz, problem.oracle.blocks.nnz)
    trace = Trace(algorithm, config.seed)
    F = problem.objective(x, Ax=Ax)
    trace.meta["objective_initial"] = F
    trace.meta["inner_steps"] = t
    trace.append(0, 0.0, F, np.inf, 0.0)
    next_trace = config.trace_every
    measure_min = np.inf
    step_sq = 0.0
    iterates = [x.copy()]
    model_descents = 0
    k = 0
    while k < config.K:
        if config.max_passes is not None and counter.passes >= config.max_passes:
            break
        sub = proximal_subproblem(problem, mu, x, s=config.s if smooth_inner else 1.0)
        if smooth_inner:
            x_new, Ax_new = acd_nonuniform(
                smooth_only(sub), x, t, rng, s=config.s,
                option=config.acd_option, Ax0=Ax, counter=counter,
            )
        else:
            x_new, Ax_new = apcg(sub, x, t, rng, Ax0=Ax, counter=counter)
        d = x_new - x
        step_sq = float(np.dot(d, d))
        measure_min = min(measure_min, 4.0 * mu * mu * step_sq)
        F_new = problem.objective(x_new, Ax=Ax_new)
        if F_new + mu * step_sq <= F + 1e-12 * max(1.0, abs(F)):
            model_descents += 1
        if callback is not None:
            callback(k, x, x_new)
        x, Ax = x_new, Ax_new
        F = F_new
        iterates.append(x.copy())
        k += 1
        if counter.passes >= next_trace or k == config.K:
            trace.append(k, counter.passes, F, measure_min, step_sq)
            next_trace = counter.passes + config.trace_every
    if not trace.records or trace.records[-1].outer_iter != k:
        trace.append(k, counter.passes, F, measure_min, step_sq)
    trace.meta["objective_final"] = F
    # sample one of the models solved (the one producing iterate k_hat) and
    # certify how close its warm-started output came to the true model optimum
    hi = len(iterates) - 1
    k_hat = int(rng.integers(2, hi + 1)) if hi >= 2 else hi
    x_hat = iterates[k_hat]
    center = iterates[k_hat - 1]
    sub_hat = proximal_subproblem(problem, mu, center, s=1.0)
    if report_budget is None:
        report_budget = 50 * part.m * math.ceil(1.0 / math.sqrt(sub_hat.mu_tilde))
    x_star, _, gap, _ = apcg_certified(
        sub_hat, x_hat, report_tol, report_budget, rng
    )
    dd = x_hat - x_star
    ds = x_star - center
    report = StationarityReport(
        k_hat=k_hat,
        dist_sq=float(np.dot(dd, dd)),
        stationarity_sq=4.0 * mu * mu * float(np.dot(ds, ds)),
        inner_gap=gap,
        descent_fraction=model_descents / max(1, k),
    )
    return x_hat, trace, report


def acpp(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    x0=None,
    callback=None,
    replication: int = 0,
    report_tol: float = 1e-10,
    report_budget: int | None = None,
):
    """Accelerated proximal-point loop; returns ``(x_hat, Trace, report)``.

    ``x_hat`` is the iterate at an index sampled uniformly from {2, ..., K+1}
    (the random-output rule behind the stationarity guarantee); the trace
    still follows the last iterate.  ``callback(k, x, x_new)`` fires per
    outer step.
    """
    config.validate()
    return _prox_point_loop(
        problem, config, smooth_inner=False, x0=x0, callback=callback,
        replication=replication, report_tol=report_tol,
        report_budget=report_budget,
    )


def acpp_smooth(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    x0=None,
    callback=None,
    replication: int = 0,
    report_tol: float = 1e-10,
    report_budget: int | None = None,
):
    """Smooth proximal-point loop with non-uniform inner sampling.

    Same output rule as :func:`acpp`; the model is solved by the
    non-uniformly sampled accelerated coordinate method at exponent
    ``config.s`` with step option ``config.acd_option``.
    """
    config.validate()
    x_hat, trace, report = _prox_point_loop(
        problem, config, smooth_inner=True, x0=x0, callback=callback,
        replication=replication, report_tol=report_tol,
        report_budget=report_budget,
    )
    g = problem.f_grad(x_hat)
    trace.meta["grad_sq_at_output"] = float(np.dot(g, g))
    return x_hat, trace, report
