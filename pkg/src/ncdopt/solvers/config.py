"""Shared solver plumbing: run configuration, traces, pass accounting, sampling."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameterError, NumericOverflowError

ALGORITHMS = (
    "rcsd",
    "rpcd",
    "dca",
    "pdca",
    "pdca_e",
    "acpdc",
    "acpp",
    "acpp_smooth",
)


@dataclass
class SolverConfig:
    """Knobs shared by every solver; each solver reads the subset it needs.

    K
        Outer iteration budget (block updates for rcsd, sweeps for rpcd,
        proximal steps for the rest).
    t
        Inner iterations per outer step for the inexact proximal solvers;
        ``None`` means one value per block (t = m).
    s
        Exponent of the weighted-norm family used for sampling and measures.
    gamma_scale
        Step rule gamma_i = gamma_scale * L_i; coordinate descent needs
        gamma_scale > 1/2, the sweep variant needs >= 1.
    mu
        Proximal / difference-of-convex regularization strength.
    max_passes
        Optional stop once the counted data passes reach this value.
    trace_every
        Pass interval between trace records.
    """

    algorithm: str = ""
    K: int = 1000
    t: int | None = None
    s: float = 1.0
    gamma_scale: float = 1.0
    mu: float = 0.01
    seed: int = 0
    permutation_mode: str = "random_shuffle"
    acd_option: str = "II"
    trace_every: float = 1.0
    max_passes: float | None = None

    def validate(self) -> None:
        if self.algorithm and self.algorithm not in ALGORITHMS:
            raise InvalidParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.K < 1:
            raise InvalidParameterError("K must be at least 1")
        if self.t is not None and self.t < 1:
            raise InvalidParameterError("t must be at least 1")
        if not 0.0 <= self.s <= 1.0:
            raise InvalidParameterError("s must lie in [0, 1]")
        if self.gamma_scale <= 0.5:
            raise InvalidParameterError("gamma_scale must exceed 1/2")
        if self.mu <= 0:
            raise InvalidParameterError("mu must be positive")
        if self.permutation_mode not in ("random_shuffle", "fixed_cycle"):
            raise InvalidParameterError(
                f"unknown permutation mode {self.permutation_mode!r}"
            )
        if self.acd_option not in ("I", "II"):
            raise InvalidParameterError("acd_option must be 'I' or 'II'")
        if self.trace_every <= 0:
            raise InvalidParameterError("trace_every must be positive")
        if self.max_passes is not None and self.max_passes <= 0:
            raise InvalidParameterError("max_passes must be positive")

    def rng(self, replication: int = 0) -> np.random.Generator:
        """Stream for one replication, split off the config seed."""
        return np.random.default_rng(np.random.SeedSequence([int(self.seed), int(replication)]))


@dataclass(frozen=True)
class TraceRecord:
    outer_iter: int
    passes: float
    objective: float
    measure: float
    step_sq: float
    wall_ns: int

    def key_fields(self):
        """Everything except wall time, for reproducibility comparisons."""
        return (self.outer_iter, self.passes, self.objective, self.measure, self.step_sq)


class Trace:
    """Progress log of one solver run.

    ``data_passes`` counts gradient work only: a block gradient costs
    nnz(block)/nnz(A) and a full gradient costs 1.  Cache maintenance and
    diagnostic evaluations are free, so equal-pass comparisons across
    solvers weigh the same work.  Records are appended with nondecreasing
    passes and finite objectives; wall time is real but excluded from the
    reproducibility contract, which covers every other field bitwise.
    """

    def __init__(self, algorithm: str, seed: int):
        self.algorithm = algorithm
        self.seed = seed
        self.records: list[TraceRecord] = []
        self.meta: dict = {}
        self._t0 = time.perf_counter_ns()

    def append(self, outer_iter: int, passes: float, objective: float,
               measure: float, step_sq: float) -> None:
        if not np.isfinite(objective):
            raise NumericOverflowError("objective became non-finite during the run")
        if self.records and passes < self.records[-1].passes:
            raise InvalidParameterError("trace passes must be nondecreasing")
        self.records.append(
            TraceRecord(
                outer_iter=int(outer_iter),
                passes=float(passes),
                objective=float(objective),
                measure=float(measure),
                step_sq=float(step_sq),
                wall_ns=time.perf_counter_ns() - self._t0,
            )
        )

    def final_objective(self) -> float:
        return self.records[-1].objective

    def min_measure(self) -> float:
        return min(r.measure for r in self.records)

    def same_path(self, other: "Trace") -> bool:
        """Bitwise equality of everything except wall time."""
        if self.algorithm != other.algorithm or self.seed != other.seed:
            return False
        if len(self.records) != len(other.records):
            return False
        return all(
            a.key_fields() == b.key_fields()
            for a, b in zip(self.records, other.records)
        )


class PassCounter:
    """Accumulates gradient work in units of full data passes."""

    def __init__(self, nnz_total: int, block_nnz: np.ndarray):
        self.nnz_total = max(int(nnz_total), 1)
        self.block_frac = np.asarray(block_nnz, dtype=np.float64) / self.nnz_total
        self.passes = 0.0
        self.block_grads = 0

    def add_block(self, i: int) -> None:
        self.passes += self.block_frac[i]
        self.block_grads += 1

    def add_full(self) -> None:
        self.passes += 1.0
        self.block_grads += 1


class AliasSampler:
    """O(1) sampling from a fixed discrete distribution (alias method).

    Built once per weight vector; draws consume exactly two uniforms from
    the supplied generator, so runs are reproducible given the seed.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidParameterError("weights must be nonnegative and finite")
        total = w.sum()
        if total <= 0:
            raise InvalidParameterError("at least one weight must be positive")
        self.n = w.size
        p = w * (self.n / total)
        self.prob = np.ones(self.n)
        self.alias = np.arange(self.n, dtype=np.int64)
        small = [i for i in range(self.n) if p[i] < 1.0]
        large = [i for i in range(self.n) if p[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            self.prob[s] = p[s]
            self.alias[s] = l
            p[l] = (p[l] + p[s]) - 1.0
            (small if p[l] < 1.0 else large).append(l)
        for i in large + small:
            self.prob[i] = 1.0

    def draw(self, rng: np.random.Generator) -> int:
        i = int(rng.integers(self.n))
        if rng.random() < self.prob[i]:
            return i
        return int(self.alias[i])
