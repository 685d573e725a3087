"""Solver family: block descent, dc baselines, inexact proximal loops."""

from .acd import acd_nonuniform, acd_schedule
from .apcg import apcg, apcg_certified, apcg_coefficients, composite_step_gap
from .block_descent import rcsd, rpcd
from .config import (
    ALGORITHMS,
    AliasSampler,
    PassCounter,
    SolverConfig,
    Trace,
    TraceRecord,
)
from .dc import dca, pdca, pdca_e
from .proximal import (
    StationarityReport,
    acpdc,
    acpdc_default_t,
    acpp,
    acpp_default_t,
    acpp_smooth,
    acpp_smooth_default_t,
)
from .surrogate import (
    SmoothSurrogate,
    SubProblem,
    dc_subproblem,
    linearized_subproblem,
    proximal_subproblem,
    smooth_only,
)

_SOLVER_TABLE = {
    "rcsd": rcsd,
    "rpcd": rpcd,
    "dca": dca,
    "pdca": pdca,
    "pdca_e": pdca_e,
    "acpdc": acpdc,
    "acpp": acpp,
    "acpp_smooth": acpp_smooth,
}


def solve(problem, config, *, x0=None, callback=None, replication=0):
    """Dispatch on ``config.algorithm``; always returns ``(x, Trace)``.

    The proximal-point solvers attach their stationarity certificate to
    ``trace.meta['stationarity_report']``.
    """
    from ..errors import InvalidParameterError

    fn = _SOLVER_TABLE.get(config.algorithm)
    if fn is None:
        raise InvalidParameterError(f"unknown algorithm {config.algorithm!r}")
    out = fn(problem, config, x0=x0, callback=callback, replication=replication)
    if config.algorithm in ("acpp", "acpp_smooth"):
        x, trace, report = out
        trace.meta["stationarity_report"] = report
        return x, trace
    return out


__all__ = [
    "ALGORITHMS",
    "AliasSampler",
    "PassCounter",
    "SmoothSurrogate",
    "SolverConfig",
    "StationarityReport",
    "SubProblem",
    "Trace",
    "TraceRecord",
    "acd_nonuniform",
    "acd_schedule",
    "acpdc",
    "acpdc_default_t",
    "acpp",
    "acpp_default_t",
    "acpp_smooth",
    "acpp_smooth_default_t",
    "apcg",
    "apcg_certified",
    "apcg_coefficients",
    "composite_step_gap",
    "dc_subproblem",
    "dca",
    "linearized_subproblem",
    "pdca",
    "pdca_e",
    "proximal_subproblem",
    "rcsd",
    "rpcd",
    "smooth_only",
    "solve",
]
