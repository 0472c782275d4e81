"""Algorithm registry and oracle-backed ratio sweeps."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .clusters import solve_mcpc_alg2
from .generate import GeneratorParams, generate
from .io import rational_str
from .mkpc import NoIsolatedCluster, solve_mkpc_iterative, solve_mkpc_third
from .model import Instance, Kind, SolveResult, check_feasible
from .oracle import OracleLimitExceeded, OracleLimits, brute_force_opt
from .pipage import solve_mcpk_alg1

CSV_HEADER = (
    "seed", "kind", "algorithm", "alg_value", "lp_value",
    "opt_value", "ratio_vs_opt", "ratio_vs_lp", "runtime_ms",
)


def solve_exact(inst: Instance) -> SolveResult:
    res = brute_force_opt(inst)
    return SolveResult(res.opt_assignment, res.opt_value, {"nodes": res.nodes_explored}, res)


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    solve: Callable[[Instance], SolveResult]
    guarantee: Fraction  # proven ratio, rounded down to a rational where irrational


ALGORITHMS = {
    a.name: a
    for a in (
        AlgorithmSpec("mcpk-pipage", solve_mcpk_alg1, Fraction(3160, 10000)),
        AlgorithmSpec("mcpc", solve_mcpc_alg2, Fraction(2107, 10000)),
        AlgorithmSpec("mkpc-third", solve_mkpc_third, Fraction(1, 3)),
        AlgorithmSpec("mkpc-iterative", solve_mkpc_iterative, Fraction(1, 2)),
        AlgorithmSpec("exact", solve_exact, Fraction(1)),
    )
}


@dataclass(frozen=True)
class TrialRow:
    seed: int
    kind: str
    algorithm: str
    alg_value: Fraction
    lp_value: Optional[Fraction]
    opt_value: Fraction
    runtime_ms: float

    @property
    def ratio_vs_opt(self) -> Optional[Fraction]:
        return self.alg_value / self.opt_value if self.opt_value else None

    @property
    def ratio_vs_lp(self) -> Optional[Fraction]:
        return self.alg_value / self.lp_value if self.lp_value else None

    def cells(self, runtime: bool = True) -> list:
        def fmt(v):
            return "" if v is None else rational_str(v)
        return [
            str(self.seed), self.kind, self.algorithm, fmt(self.alg_value), fmt(self.lp_value),
            fmt(self.opt_value), fmt(self.ratio_vs_opt), fmt(self.ratio_vs_lp),
            f"{self.runtime_ms:.3f}" if runtime else "",
        ]


@dataclass
class ExperimentReport:
    algorithm: str
    guarantee: Fraction
    rows: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)  # reason -> count

    @property
    def ratios(self) -> list:
        return [r.ratio_vs_opt for r in self.rows if r.ratio_vs_opt is not None]

    @property
    def violations(self) -> int:
        return sum(1 for r in self.ratios if r < self.guarantee)

    def summary(self) -> dict:
        ratios = self.ratios
        return {
            "algorithm": self.algorithm,
            "trials": len(self.rows) + sum(self.skipped.values()),
            "completed": len(self.rows),
            "skipped": dict(self.skipped),
            "guarantee": self.guarantee,
            "min_ratio": min(ratios) if ratios else None,
            "min_ratio_decimal": float(min(ratios)) if ratios else None,
            "mean_ratio_decimal": float(sum(ratios) / len(ratios)) if ratios else None,
            "violations": self.violations,
        }

    def to_csv(self, runtime: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.cells(runtime))
        return buf.getvalue()


def _trial(args):
    params, alg_name, limits = args
    spec = ALGORITHMS[alg_name]
    inst = generate(params)
    start = time.perf_counter()
    try:
        res = spec.solve(inst)
    except NoIsolatedCluster:
        return "no_isolated_cluster"
    elapsed = (time.perf_counter() - start) * 1000
    if not check_feasible(inst, res.assignment).feasible:
        raise RuntimeError(f"seed {params.seed}: {alg_name} returned an infeasible assignment")
    try:
        opt = brute_force_opt(inst, limits).opt_value
    except OracleLimitExceeded:
        return "oracle_limit"
    lp = res.certificate.get("lp_value") if isinstance(res.certificate, dict) else None
    return TrialRow(params.seed, Kind(params.kind).value, alg_name, res.value, lp, opt, elapsed)


def run_experiment(
    algorithm: str,
    base: GeneratorParams,
    trials: int,
    limits: OracleLimits = OracleLimits(),
    workers: int = 1,
) -> ExperimentReport:
    """One trial per seed ``base.seed, base.seed + 1, ...``; rows come back in seed order."""
    spec = ALGORITHMS[algorithm]
    jobs = [
        (GeneratorParams(**{**base.__dict__, "seed": base.seed + t}), algorithm, limits)
        for t in range(trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_trial, jobs))
    else:
        outcomes = [_trial(j) for j in jobs]
    report = ExperimentReport(algorithm, spec.guarantee)
    for out in outcomes:
        if isinstance(out, str):
            report.skipped[out] = report.skipped.get(out, 0) + 1
        else:
            report.rows.append(out)
    return report
