"""Benchmark experiment runner.

Subcommands
-----------
run       execute the configured algorithms over seeded replications and
          write one trace CSV per (algorithm, replication), an aggregated
          CSV over the union pass grid, a text summary, and the final
          iterate of each run as ``<run_id>_x.npy``.
validate  check the configuration and print derived quantities (block
          constants, norm aggregates, default inner budgets) without
          running anything.
gen-data  write a synthetic dataset in the sparse text format together
          with the planted signal.
measure   one-shot optimality report for a saved iterate.

Configuration is a flat ``key = value`` text file ('#' starts a comment);
``--set key=value`` overrides single keys and can be repeated.  Keys of the
form ``<algorithm>.<solver key>`` override one algorithm's solver settings.
Exit codes: 0 ok, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blocks import t_s
from .data import (
    SyntheticSpec,
    gen_synthetic,
    normalize_binary_labels,
    read_sparse_dataset,
    rescale_targets,
    write_sparse_dataset,
)
from .errors import ConfigError, NcdError
from .measures import prox_point_measure, subgradient_measure_sq
from .oracles import least_squares
from .presets import huber_scad_problem, logistic_topk_problem, make_problem
from .solvers import ALGORITHMS, SolverConfig, solve
from .solvers.proximal import acpdc_default_t, acpp_default_t, acpp_smooth_default_t

_PRESET_NAMES = ("logistic_topk", "huber_scad", "least_squares")

_SOLVER_KEYS = {
    "K": int,
    "t": int,
    "s": float,
    "gamma_scale": float,
    "mu": float,
    "permutation_mode": str,
    "acd_option": str,
    "trace_every": float,
    "max_passes": float,
}

_PROBLEM_KEYS = {
    "preset": str,
    "dataset": str,
    "n": int,
    "d": int,
    "s_true": int,
    "rho_corr": float,
    "noise_sigma": float,
    "data_seed": int,
    "rho_weight": float,
    "lam": float,
    "theta": float,
    "k": int,
    "delta": float,
    "m": int,
    "rescale_targets": bool,
}

_RUN_KEYS = {
    "algorithms": str,
    "replications": int,
    "seed": int,
    "emit_wall_ns": bool,
}

_MEASURE_KEYS = {
    "measure_kind": str,   # "subgrad" or "prox"
    "measure_mu": float,
    "measure_gamma_scale": float,
}


def _coerce(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", ""):
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_text(text: str) -> dict:
    """Flat key = value lines; '#' comments; later keys win."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = _coerce(raw)
    return out


def load_config(path: str | None, overrides: list[str]) -> dict:
    cfg = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg.update(parse_config_text(p.read_text(encoding="utf-8")))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        cfg[key.strip()] = _coerce(raw)
    return cfg


def _check_keys(cfg: dict) -> None:
    known = set(_PROBLEM_KEYS) | set(_RUN_KEYS) | set(_SOLVER_KEYS) | set(_MEASURE_KEYS)
    for key in cfg:
        if "." in key:
            alg, _, sub = key.partition(".")
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm prefix in key {key!r}")
            if sub not in _SOLVER_KEYS:
                raise ConfigError(f"unknown solver key in {key!r}")
        elif key not in known:
            raise ConfigError(f"unknown config key {key!r}")


def _typed(cfg: dict, key: str, default, table: dict):
    if key not in cfg or cfg[key] is None:
        return default
    want = table[key]
    val = cfg[key]
    if want is bool:
        if not isinstance(val, bool):
            raise ConfigError(f"{key} must be true/false, got {val!r}")
        return val
    if want is int:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{key} must be a number, got {val!r}")
        if isinstance(val, float) and not val.is_integer():
            raise ConfigError(f"{key} must be an integer, got {val!r}")
        return int(val)
    if want is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{key} must be a number, got {val!r}")
        return float(val)
    return str(val)


@dataclass
class ExperimentConfig:
    """Everything the runner needs, resolved from the flat key-value map."""

    preset: str = "huber_scad"
    dataset: str = "synthetic"
    n: int = 200
    d: int = 1000
    s_true: int = 10
    rho_corr: float = 0.7
    noise_sigma: float = 0.1
    data_seed: int = 0
    rho_weight: float = 1.0
    lam: float = 1.0
    theta: float = 3.7
    k: int | None = None
    delta: float = 1e-2
    m: int | None = None
    rescale: bool = False
    algorithms: tuple = ("rcsd",)
    replications: int = 1
    seed: int = 0
    emit_wall_ns: bool = False
    solver_defaults: dict = field(default_factory=dict)
    solver_overrides: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, cfg: dict) -> "ExperimentConfig":
        _check_keys(cfg)
        algorithms = cfg.get("algorithms", "rcsd")
        if isinstance(algorithms, str):
            algorithms = tuple(a.strip() for a in algorithms.split(",") if a.strip())
        if not algorithms:
            raise ConfigError("algorithms list is empty")
        for alg in algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}")
        preset = _typed(cfg, "preset", "huber_scad", _PROBLEM_KEYS)
        if preset not in _PRESET_NAMES:
            raise ConfigError(f"unknown preset {preset!r}")
        replications = _typed(cfg, "replications", 1, _RUN_KEYS)
        if replications < 1:
            raise ConfigError("replications must be at least 1")
        defaults = {
            key: _typed(cfg, key, None, _SOLVER_KEYS)
            for key in _SOLVER_KEYS if key in cfg
        }
        overrides: dict = {}
        for key, val in cfg.items():
            if "." in key:
                alg, _, sub = key.partition(".")
                want = _SOLVER_KEYS[sub]
                overrides.setdefault(alg, {})[sub] = (
                    None if val is None else want(val)
                )
        return cls(
            preset=preset,
            dataset=str(cfg.get("dataset", "synthetic")),
            n=_typed(cfg, "n", 200, _PROBLEM_KEYS),
            d=_typed(cfg, "d", 1000, _PROBLEM_KEYS),
            s_true=_typed(cfg, "s_true", 10, _PROBLEM_KEYS),
            rho_corr=_typed(cfg, "rho_corr", 0.7, _PROBLEM_KEYS),
            noise_sigma=_typed(cfg, "noise_sigma", 0.1, _PROBLEM_KEYS),
            data_seed=_typed(cfg, "data_seed", 0, _PROBLEM_KEYS),
            rho_weight=_typed(cfg, "rho_weight", 1.0, _PROBLEM_KEYS),
            lam=_typed(cfg, "lam", 1.0, _PROBLEM_KEYS),
            theta=_typed(cfg, "theta", 3.7, _PROBLEM_KEYS),
            k=_typed(cfg, "k", None, _PROBLEM_KEYS),
            delta=_typed(cfg, "delta", 1e-2, _PROBLEM_KEYS),
            m=_typed(cfg, "m", None, _PROBLEM_KEYS),
            rescale=_typed(cfg, "rescale_targets", False, _PROBLEM_KEYS),
            algorithms=tuple(algorithms),
            replications=replications,
            seed=_typed(cfg, "seed", 0, _RUN_KEYS),
            emit_wall_ns=_typed(cfg, "emit_wall_ns", False, _RUN_KEYS),
            solver_defaults=defaults,
            solver_overrides=overrides,
        )

    def solver_config(self, algorithm: str) -> SolverConfig:
        kwargs = dict(self.solver_defaults)
        kwargs.update(self.solver_overrides.get(algorithm, {}))
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return SolverConfig(algorithm=algorithm, seed=self.seed, **kwargs)


def resolve_dataset(ecfg: ExperimentConfig):
    """Load or generate the design matrix and targets; never runs a solver."""
    if ecfg.dataset == "synthetic":
        spec = SyntheticSpec(
            n=ecfg.n, d=ecfg.d, s_true=ecfg.s_true, rho_corr=ecfg.rho_corr,
            noise_sigma=ecfg.noise_sigma, seed=ecfg.data_seed,
        )
        A, b, _ = gen_synthetic(spec)
    else:
        path = Path(ecfg.dataset)
        if not path.is_file():
            raise ConfigError(f"dataset not found: {ecfg.dataset}")
        A, b = read_sparse_dataset(path)
    if ecfg.preset == "logistic_topk":
        if ecfg.dataset == "synthetic":
            b = np.where(b >= 0, 1.0, -1.0)
        else:
            b = normalize_binary_labels(b)
    elif ecfg.rescale:
        b = rescale_targets(b)
    return A, b


def build_problem(ecfg: ExperimentConfig):
    A, b = resolve_dataset(ecfg)
    m = min(1000, A.d) if ecfg.m is None else ecfg.m
    try:
        if ecfg.preset == "logistic_topk":
            problem = logistic_topk_problem(
                A, b, m, rho_weight=ecfg.rho_weight, k=ecfg.k,
            )
        elif ecfg.preset == "huber_scad":
            problem = huber_scad_problem(
                A, b, m, delta=ecfg.delta, rho_weight=ecfg.rho_weight,
                lam=ecfg.lam, theta=ecfg.theta,
            )
        else:
            problem = make_problem(least_squares(), A, b, m)
    except NcdError as exc:
        raise ConfigError(str(exc)) from exc
    return problem, b


def _fmt(v) -> str:
    """Deterministic CSV cell: ints verbatim, small floats scientific."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    if f == 0.0:
        return "0"
    if abs(f) < 1e-4:
        return format(f, ".12e")
    return repr(f)


CSV_HEADER = "run_id,algorithm,seed,outer_iter,passes,objective,measure,step_sq,wall_ns"


def write_trace_csv(path: Path, run_id: str, trace, *, emit_wall_ns: bool) -> None:
    lines = [CSV_HEADER]
    for rec in trace.records:
        wall = rec.wall_ns if emit_wall_ns else 0
        lines.append(",".join([
            run_id,
            trace.algorithm,
            str(trace.seed),
            _fmt(rec.outer_iter),
            _fmt(rec.passes),
            _fmt(rec.objective),
            _fmt(rec.measure),
            _fmt(rec.step_sq),
            str(int(wall)),
        ]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _lvcf(grid, passes, values):
    """Last value carried forward onto ``grid`` (grid >= passes[0])."""
    idx = np.searchsorted(passes, grid, side="right") - 1
    idx = np.clip(idx, 0, len(values) - 1)
    return np.asarray(values)[idx]


def write_aggregate_csv(path: Path, results: dict) -> None:
    """``results`` maps algorithm -> list of traces (successful runs only)."""
    lines = ["algorithm,passes,objective_mean,objective_min,objective_max"]
    for alg in results:
        traces = results[alg]
        if not traces:
            continue
        grid = sorted({rec.passes for tr in traces for rec in tr.records})
        series = []
        for tr in traces:
            passes = np.array([rec.passes for rec in tr.records])
            values = np.array([rec.objective for rec in tr.records])
            series.append(_lvcf(np.asarray(grid), passes, values))
        stacked = np.vstack(series)
        means = stacked.mean(axis=0)
        mins = stacked.min(axis=0)
        maxs = stacked.max(axis=0)
        for g, mean, lo, hi in zip(grid, means, mins, maxs):
            lines.append(",".join([alg, _fmt(g), _fmt(mean), _fmt(lo), _fmt(hi)]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary(path: Path, ecfg: ExperimentConfig, problem, rows) -> None:
    """rows: list of (algorithm, rep, trace_or_None, error_or_None)."""
    part = problem.part
    lines = [
        f"preset {ecfg.preset}",
        f"dataset {ecfg.dataset}",
        f"n {problem.oracle.A.n}  d {part.d}  m {part.m}",
        f"replications {ecfg.replications}  seed {ecfg.seed}",
        "",
    ]
    for alg in ecfg.algorithms:
        lines.append(f"algorithm {alg}")
        finals = []
        for algorithm, rep, trace, err in rows:
            if algorithm != alg:
                continue
            if err is not None:
                lines.append(f"  rep {rep}: failed: {err}")
                continue
            rec = trace.records[-1]
            lines.append(
                f"  rep {rep}: final_objective {_fmt(rec.objective)}"
                f"  min_measure {_fmt(trace.min_measure())}"
                f"  passes {_fmt(rec.passes)}"
            )
            finals.append(rec.objective)
        if finals:
            lines.append(f"  mean final objective {_fmt(float(np.mean(finals)))}")
        lines.append("")
    failures = [(a, r, e) for a, r, _, e in rows if e is not None]
    if failures:
        lines.append(f"failures {len(failures)}")
    else:
        lines.append("failures none")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_experiment(ecfg: ExperimentConfig, out_dir: Path, threads: int) -> int:
    """Run all (algorithm, replication) jobs; returns the exit code."""
    problem, _ = build_problem(ecfg)
    configs = {}
    for alg in ecfg.algorithms:
        cfg = ecfg.solver_config(alg)
        try:
            cfg.validate()
        except NcdError as exc:
            raise ConfigError(f"{alg}: {exc}") from exc
        configs[alg] = cfg
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        (ai, alg, rep)
        for ai, alg in enumerate(ecfg.algorithms)
        for rep in range(ecfg.replications)
    ]

    def work(job):
        _, alg, rep = job
        try:
            x, trace = solve(problem, configs[alg], replication=rep)
            return job, x, trace, None
        except NcdError as exc:
            return job, None, None, f"{type(exc).__name__}: {exc}"

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, jobs))
    else:
        outcomes = [work(job) for job in jobs]
    outcomes.sort(key=lambda item: (item[0][0], item[0][2]))

    rows = []
    by_alg = {alg: [] for alg in ecfg.algorithms}
    for (ai, alg, rep), x, trace, err in outcomes:
        run_id = f"{alg}_r{rep}"
        rows.append((alg, rep, trace, err))
        if err is None:
            write_trace_csv(
                out_dir / f"{run_id}.csv", run_id, trace,
                emit_wall_ns=ecfg.emit_wall_ns,
            )
            np.save(out_dir / f"{run_id}_x.npy", x)
            by_alg[alg].append(trace)
    write_aggregate_csv(out_dir / "aggregate.csv", by_alg)
    write_summary(out_dir / "summary.txt", ecfg, problem, rows)
    n_failed = sum(1 for _, _, _, err in rows if err is not None)
    if n_failed:
        print(f"{len(rows) - n_failed}/{len(rows)} runs ok, {n_failed} failed; "
              f"see {out_dir / 'summary.txt'}", file=sys.stderr)
        return 2
    print(f"{len(rows)} runs ok; wrote {out_dir}")
    return 0


def validate_config(ecfg: ExperimentConfig) -> int:
    violations = []
    problem = None
    try:
        problem, _ = build_problem(ecfg)
    except ConfigError as exc:
        violations.append(str(exc))
    if problem is not None:
        part = problem.part
        print(f"preset {ecfg.preset}")
        print(f"n {problem.oracle.A.n}  d {part.d}  m {part.m}  "
              f"nnz {problem.oracle.A.nnz}")
        print(f"L min {_fmt(part.L_min)}  mean {_fmt(float(part.L.mean()))}  "
              f"max {_fmt(part.L_max)}")
        for s in (0.0, 0.5, 1.0):
            print(f"T_{s:g} {_fmt(t_s(part, s))}")
        print(f"weak_convexity_mu {_fmt(problem.weak_convexity_mu)}")
        for alg in ecfg.algorithms:
            cfg = ecfg.solver_config(alg)
            try:
                cfg.validate()
            except NcdError as exc:
                violations.append(f"{alg}: {exc}")
                continue
            notes = [f"K {cfg.K}"]
            if alg == "rpcd" and cfg.gamma_scale < 1.0:
                violations.append(
                    f"rpcd: gamma_scale must be at least 1, got {cfg.gamma_scale}"
                )
            if alg in ("dca", "acpdc") and problem.weak_convexity_mu > 0:
                violations.append(
                    f"{alg}: needs a convex smooth part "
                    f"(weak_convexity_mu {_fmt(problem.weak_convexity_mu)})"
                )
            if alg in ("acpp", "acpp_smooth") and not problem.h.is_zero():
                violations.append(f"{alg}: needs a void concave part")
            if alg == "acpp_smooth" and not problem.phi.is_zero():
                violations.append(f"{alg}: needs a void separable penalty")
            if alg == "acpdc":
                mt = cfg.mu / (1.0 + cfg.mu)
                t0 = acpdc_default_t(cfg.mu, part.m)
                notes.append(f"mu_tilde {_fmt(mt)}")
                notes.append(f"t_0 {t0}")
                notes.append(f"t {cfg.t if cfg.t is not None else t0}")
            if alg == "acpp" and problem.h.is_zero():
                L = problem.global_smooth_lipschitz()
                t0 = acpp_default_t(
                    cfg.mu, L, part.m, float(np.max(part.L + 2.0 * cfg.mu))
                )
                notes.append(f"t_0 {t0}")
            if alg == "acpp_smooth" and problem.h.is_zero() and problem.phi.is_zero():
                L = problem.global_smooth_lipschitz()
                t0 = acpp_smooth_default_t(
                    cfg.mu, L, part.L + 2.0 * cfg.mu, cfg.s
                )
                notes.append(f"t_0 {t0}")
            print(f"{alg}: " + "  ".join(notes))
    if violations:
        print(f"violations {len(violations)}", file=sys.stderr)
        for v in violations:
            print(f"  - {v}", file=sys.stderr)
        return 1
    print("config ok")
    return 0


def gen_data(ecfg: ExperimentConfig, out_dir: Path) -> int:
    spec = SyntheticSpec(
        n=ecfg.n, d=ecfg.d, s_true=ecfg.s_true, rho_corr=ecfg.rho_corr,
        noise_sigma=ecfg.noise_sigma, seed=ecfg.data_seed,
    )
    A, b, x_true = gen_synthetic(spec)
    if ecfg.preset == "logistic_topk":
        b = np.where(b >= 0, 1.0, -1.0)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "synthetic.txt"
    write_sparse_dataset(data_path, A, b)
    np.save(out_dir / "x_true.npy", x_true)
    print(f"wrote {data_path} (n {A.n}, d {A.d}) and x_true.npy")
    return 0


def measure_iterate(ecfg: ExperimentConfig, cfg: dict, iterate_path: str) -> int:
    path = Path(iterate_path)
    if not path.is_file():
        raise ConfigError(f"iterate file not found: {iterate_path}")
    problem, _ = build_problem(ecfg)
    x = np.load(path)
    if x.shape != (problem.part.d,):
        raise ConfigError(
            f"iterate shape {x.shape} does not match d={problem.part.d}"
        )
    kind = _typed(cfg, "measure_kind", "subgrad", _MEASURE_KEYS)
    gscale = _typed(cfg, "measure_gamma_scale", 1.0, _MEASURE_KEYS)
    print(f"objective {_fmt(problem.objective(x))}")
    if kind == "subgrad":
        g_sq = subgradient_measure_sq(problem, x, gamma_scale=gscale)
        print(f"subgrad_measure_sq {_fmt(g_sq)}")
    elif kind == "prox":
        mu = _typed(cfg, "measure_mu", 0.01, _MEASURE_KEYS)
        report = prox_point_measure(problem, x, mu)
        print(f"prox_measure_sq {_fmt(report.p_norm_dual ** 2)}")
        print(f"subgrad_measure_sq {_fmt(report.g_norm_dual ** 2)}")
        print(f"inner_gap {_fmt(report.inner_gap)}")
    else:
        raise ConfigError(f"measure_kind must be subgrad or prox, got {kind!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncdopt",
        description="block coordinate solver benchmark runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run the configured experiment"),
        ("validate", "check the config and print derived quantities"),
        ("gen-data", "write a synthetic dataset"),
        ("measure", "optimality report for a saved iterate"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", default=None)
        p.add_argument("--set", metavar="K=V", action="append", default=[])
        p.add_argument("--out", metavar="DIR", default="runs")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        if name == "measure":
            p.add_argument("iterate", metavar="ITERATE.npy")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        if args.seed is not None:
            cfg["seed"] = args.seed
        ecfg = ExperimentConfig.from_mapping(cfg)
        threads = args.threads
        if threads is None:
            env = os.environ.get("NCD_OPT_THREADS", "").strip()
            if env:
                try:
                    threads = int(env)
                except ValueError:
                    raise ConfigError(
                        f"NCD_OPT_THREADS must be an integer, got {env!r}"
                    ) from None
            else:
                threads = os.cpu_count() or 1
        if threads < 1:
            raise ConfigError("threads must be at least 1")
        if args.command == "run":
            return run_experiment(ecfg, Path(args.out), threads)
        if args.command == "validate":
            return validate_config(ecfg)
        if args.command == "gen-data":
            return gen_data(ecfg, Path(args.out))
        return measure_iterate(ecfg, cfg, args.iterate)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NcdError as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
