"""Full-gradient baselines that linearize the concave part once per iteration.

``dca`` solves each linearized subproblem to a certified gap with the
accelerated coordinate inner solver; ``pdca`` takes a single proximal
gradient step with the global smoothness constant; ``pdca_e`` adds
extrapolation with the classic t-sequence and a periodic momentum restart.
"""

from __future__ import annotations

import math

import numpy as np

from ..blocks import weighted_norm
from ..errors import InvalidParameterError
from ..measures import subgradient_measure_sq
from ..penalties import prox_block
from ..problem import CompositeProblem
from .apcg import apcg_certified
from .config import PassCounter, SolverConfig, Trace
from .surrogate import linearized_subproblem

_EPS_CVX = 1e-6
_RESTART_EVERY = 200


def _init_state(problem, config, x0, algorithm):
    part = problem.part
    x_init = np.zeros(part.d) if x0 is None else np.asarray(x0, dtype=np.float64)
    state = problem.oracle.bind(x_init)
    counter = PassCounter(problem.oracle.A.nnz, problem.oracle.blocks.nnz)
    trace = Trace(algorithm, config.seed)
    F = problem.objective(state.x, Ax=state.Ax)
    trace.meta["objective_initial"] = F
    return state, counter, trace, F


def dca(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    x0=None,
    callback=None,
    replication: int = 0,
    inner_tol: float = 1e-10,
    inner_budget: int | None = None,
    eps_cvx: float = _EPS_CVX,
):
    """Difference-of-convex iterations with certified inner solves.

    Each outer step minimizes f + phi - <v, .> (plus an ``eps_cvx`` proximal
    floor that guarantees strong convexity) to a certified gap of
    ``inner_tol``.  Requires a convex smooth part; shift the decomposition
    first if it is only weakly convex.
    """
    config.validate()
    if problem.weak_convexity_mu > 0:
        raise InvalidParameterError(
            "dca needs a convex smooth part; apply dc_shift first"
        )
    part = problem.part
    rng = config.rng(replication)
    state, counter, trace, F = _init_state(problem, config, x0, "dca")
    measure_min = subgradient_measure_sq(problem, state.x, Ax=state.Ax,
                                         gamma_scale=config.gamma_scale, s=config.s)
    trace.append(0, 0.0, F, measure_min, 0.0)
    next_trace = config.trace_every
    mu_tilde = eps_cvx / float(np.max(part.L) + eps_cvx)
    if inner_budget is None:
        inner_budget = 50 * part.m * math.ceil(1.0 / math.sqrt(mu_tilde))
    x, Ax = state.x, state.Ax
    step_sq_1 = 0.0
    k = 0
    while k < config.K:
        if config.max_passes is not None and counter.passes >= config.max_passes:
            break
        v = problem.h_subgradient(x)
        sub = linearized_subproblem(problem, v, x, eps_cvx)
        x_new, Ax_new, gap, _ = apcg_certified(
            sub, x, inner_tol, inner_budget, rng, Ax0=Ax, counter=counter
        )
        step_sq_1 = weighted_norm(x_new - x, part, 1.0) ** 2
        x, Ax = x_new, Ax_new
        F = problem.objective(x, Ax=Ax)
        k += 1
        if callback is not None:
            callback(k, x)
        if counter.passes >= next_trace or k == config.K:
            measure_min = min(
                measure_min,
                subgradient_measure_sq(problem, x, Ax=Ax,
                                       gamma_scale=config.gamma_scale, s=config.s),
            )
            trace.append(k, counter.passes, F, measure_min, step_sq_1)
            next_trace = counter.passes + config.trace_every
    if not trace.records or trace.records[-1].outer_iter != k:
        trace.append(k, counter.passes, F, measure_min, step_sq_1)
    trace.meta["objective_final"] = F
    return x, trace


def _pdca_common(problem, config, x0, algorithm, extrapolate, callback, replication,
                 restart_every):
    part = problem.part
    L = problem.global_smooth_lipschitz()
    state, counter, trace, F = _init_state(problem, config, x0, algorithm)
    measure_min = subgradient_measure_sq(problem, state.x, Ax=state.Ax,
                                         gamma_scale=config.gamma_scale, s=config.s)
    trace.append(0, 0.0, F, measure_min, 0.0)
    next_trace = config.trace_every
    A = problem.oracle.A
    x, Ax = state.x.copy(), state.Ax.copy()
    x_prev, Ax_prev = x.copy(), Ax.copy()
    t_prev = 1.0
    step_sq_1 = 0.0
    k = 0
    while k < config.K:
        if config.max_passes is not None and counter.passes >= config.max_passes:
            break
        if extrapolate:
            t = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_prev * t_prev))
            theta = (t_prev - 1.0) / t
            y = x + theta * (x - x_prev)
            Ay = Ax + theta * (Ax - Ax_prev)
        else:
            t = 1.0
            y, Ay = x, Ax
        v = problem.h_subgradient(x)
        grad = problem.f_grad(y, Ax=Ay)
        counter.add_full()
        x_new = prox_block(problem.phi, y, grad - v, np.full(part.d, L))
        Ax_new = A.matvec(x_new)
        step_sq_1 = weighted_norm(x_new - x, part, 1.0) ** 2
        x_prev, Ax_prev = x, Ax
        x, Ax = x_new, Ax_new
        F = problem.objective(x, Ax=Ax)
        k += 1
        if extrapolate and k % restart_every == 0:
            t_prev = 1.0
            x_prev, Ax_prev = x, Ax
        else:
            t_prev = t
        if callback is not None:
            callback(k, x)
        if counter.passes >= next_trace:
            measure_min = min(
                measure_min,
                subgradient_measure_sq(problem, x, Ax=Ax,
                                       gamma_scale=config.gamma_scale, s=config.s),
            )
            trace.append(k, counter.passes, F, measure_min, step_sq_1)
            next_trace += config.trace_every
    measure_min = min(
        measure_min, subgradient_measure_sq(problem, x, Ax=Ax,
                                       gamma_scale=config.gamma_scale, s=config.s)
    )
    if not trace.records or trace.records[-1].outer_iter != k:
        trace.append(k, counter.passes, F, measure_min, step_sq_1)
    trace.meta["objective_final"] = F
    trace.meta["global_lipschitz"] = L
    return x, trace


def pdca(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    x0=None,
    callback=None,
    replication: int = 0,
):
    """Proximal gradient steps on the linearized objective, step 1/L.

    Monotone by the global majorization; one full gradient per iteration.
    """
    config.validate()
    return _pdca_common(problem, config, x0, "pdca", False, callback, replication,
                        _RESTART_EVERY)


def pdca_e(
    problem: CompositeProblem,
    config: SolverConfig,
    *,
    x0=None,
    callback=None,
    replication: int = 0,
    restart_every: int = _RESTART_EVERY,
):
    """Extrapolated variant: momentum on x, subgradient taken at x itself.

    Momentum restarts every ``restart_every`` iterations; not monotone.
    """
    config.validate()
    if restart_every < 1:
        raise InvalidParameterError("restart_every must be a positive integer")
    return _pdca_common(problem, config, x0, "pdca_e", True, callback, replication,
                        restart_every)
