"""Monte-Carlo sweep engine with common random numbers.

A sweep varies one parameter (port count N, SINR threshold in dB, antenna
size W, CSI accuracy rho, or CSI-estimation stride L) over a value list and
runs `trials` independent channel realizations per value.  Trial t uses the
same derived random stream for every swept value, so compared values see
identical channel randomness (common random numbers); port-count sweeps
additionally consume Gaussian draws port-major, making a smaller-N scenario
an exact prefix of a larger-N one within the same trial.

Results are recorded per (value, trial) and aggregated per value (mean,
standard error, infeasible rate, feasible trials only in the means).  The
CSV layout is:

    sweep_param, param_value, trial, seed, status, iterations,
    eh_estimated_w, eh_realized_w, baseline_eh_w, wall_ms

one row per trial followed by an aggregate section whose rows carry
trial = -1 and status in {mean, stderr, infeasible_rate}.  Empty cells mark
values that were not produced (no baseline run, timing disabled).  Output
bytes depend only on the results, and the results only on the spec, except
for wall_ms, which is only populated when timing is explicitly requested.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass

import numpy as np

from . import ao, baseline
from .channel import STREAM_BASELINE, STREAM_TRIAL, derive_rng, generate_scenario
from .sysmodel import SystemConfig, realized_weighted_eh

SWEEP_PARAMETERS = ("N", "gamma_db", "W", "rho", "L")

STATUS_ERROR = "error"

CSV_COLUMNS = (
    "sweep_param",
    "param_value",
    "trial",
    "seed",
    "status",
    "iterations",
    "eh_estimated_w",
    "eh_realized_w",
    "baseline_eh_w",
    "wall_ms",
)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass
class SweepSpec:
    base: SystemConfig
    parameter: str
    values: tuple
    trials: int = 200
    master_seed: int = 0
    run_baseline: bool = False
    workers: int = 1

    def validate(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"unknown sweep parameter {self.parameter!r}; expected one of {SWEEP_PARAMETERS}"
            )
        if not self.values:
            raise ValueError("sweep needs a non-empty value list")
        if len({repr(v) for v in self.values}) != len(self.values):
            raise ValueError("sweep values must be distinct")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for value in self.values:
            configure(self.base, self.parameter, value).validate()


def configure(base: SystemConfig, parameter: str, value) -> SystemConfig:
    """Base config with the swept parameter applied (dB converted here)."""
    if parameter == "N":
        return dataclasses.replace(base, ports=int(value))
    if parameter == "gamma_db":
        return dataclasses.replace(base, sinr_threshold=db_to_linear(float(value)))
    if parameter == "W":
        return dataclasses.replace(base, antenna_size=float(value))
    if parameter == "rho":
        return dataclasses.replace(base, rho=float(value))
    if parameter == "L":
        return dataclasses.replace(base, port_stride=int(value))
    raise ValueError(f"unknown sweep parameter {parameter!r}")


def trial_seed(master_seed: int, trial: int) -> int:
    """Identifying integer for the trial's derived stream (reported in the CSV)."""
    seq = np.random.SeedSequence([int(master_seed), STREAM_TRIAL, int(trial)])
    return int(seq.generate_state(1)[0])


@dataclass
class TrialRecord:
    parameter: str
    value: float
    trial: int
    seed: int
    status: str
    iterations: int
    eh_estimated: float | None
    eh_realized: float | None
    baseline_eh: float | None
    wall_ms: float | None


@dataclass
class ValueAggregate:
    value: float
    feasible: int
    infeasible_rate: float
    mean_estimated: float | None
    stderr_estimated: float | None
    mean_realized: float | None
    stderr_realized: float | None
    mean_baseline: float | None
    stderr_baseline: float | None
    mean_iterations: float | None


@dataclass
class SweepResult:
    parameter: str
    values: tuple
    trials: int
    master_seed: int
    records: list[TrialRecord]
    aggregates: list[ValueAggregate]


def run_trial(
    base: SystemConfig,
    parameter: str,
    value,
    master_seed: int,
    trial: int,
    run_baseline: bool = False,
    timing: bool = False,
) -> TrialRecord:
    """One (value, trial) cell; failures are recorded, never raised."""
    seed = trial_seed(master_seed, trial)
    start = time.perf_counter() if timing else None
    status = STATUS_ERROR
    iterations = 0
    eh_est = eh_real = base_eh = None
    try:
        config = configure(base, parameter, value)
        rng = derive_rng(master_seed, STREAM_TRIAL, trial)
        channels = generate_scenario(rng, config)
        result = ao.optimize(channels, config)
        status = result.status
        iterations = result.iterations
        if result.solution is not None:
            eh_est = result.objective_trace[-1]
            eh_real = realized_weighted_eh(result.solution, result.ports, channels, config)
        if run_baseline:
            rng_b = derive_rng(master_seed, STREAM_BASELINE, trial)
            bench = baseline.mimo_benchmark(rng_b, config)
            if bench.solution is not None:
                base_eh = bench.objective_trace[-1]
    except Exception:
        status = STATUS_ERROR
    wall = (time.perf_counter() - start) * 1e3 if timing else None
    return TrialRecord(
        parameter=parameter,
        value=value,
        trial=trial,
        seed=seed,
        status=status,
        iterations=iterations,
        eh_estimated=eh_est,
        eh_realized=eh_real,
        baseline_eh=base_eh,
        wall_ms=wall,
    )


def _run_task(args) -> TrialRecord:
    return run_trial(*args)


def run_sweep(spec: SweepSpec, timing: bool = False) -> SweepResult:
    """Execute the sweep; deterministic given the spec, whatever the workers."""
    spec.validate()
    tasks = [
        (spec.base, spec.parameter, value, spec.master_seed, trial, spec.run_baseline, timing)
        for value in spec.values
        for trial in range(spec.trials)
    ]
    if spec.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            unordered = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        unordered = [_run_task(t) for t in tasks]

    order = {(repr(v), t): i for i, (_, _, v, _, t, _, _) in enumerate(tasks)}
    records = sorted(unordered, key=lambda r: order[(repr(r.value), r.trial)])
    aggregates = [aggregate(records, value, spec.trials) for value in spec.values]
    return SweepResult(
        parameter=spec.parameter,
        values=spec.values,
        trials=spec.trials,
        master_seed=spec.master_seed,
        records=records,
        aggregates=aggregates,
    )


def _mean_stderr(samples: list[float]) -> tuple[float | None, float | None]:
    if not samples:
        return None, None
    mean = float(np.mean(samples))
    if len(samples) < 2:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / math.sqrt(len(samples)))


def aggregate(records: list[TrialRecord], value, trials: int) -> ValueAggregate:
    """Per-value statistics over feasible trials; recomputable from the rows."""
    rows = [r for r in records if repr(r.value) == repr(value)]
    feasible = [r for r in rows if r.eh_estimated is not None]
    infeasible = sum(1 for r in rows if r.status == ao.STATUS_INFEASIBLE)
    mean_est, se_est = _mean_stderr([r.eh_estimated for r in feasible])
    mean_real, se_real = _mean_stderr(
        [r.eh_realized for r in feasible if r.eh_realized is not None]
    )
    mean_base, se_base = _mean_stderr(
        [r.baseline_eh for r in rows if r.baseline_eh is not None]
    )
    mean_iter, _ = _mean_stderr([float(r.iterations) for r in feasible])
    return ValueAggregate(
        value=value,
        feasible=len(feasible),
        infeasible_rate=infeasible / trials,
        mean_estimated=mean_est,
        stderr_estimated=se_est,
        mean_realized=mean_real,
        stderr_realized=se_real,
        mean_baseline=mean_base,
        stderr_baseline=se_base,
        mean_iterations=mean_iter,
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(result: SweepResult, path: str) -> None:
    """Write the documented CSV; byte-identical for identical results."""
    lines = [",".join(CSV_COLUMNS)]
    for r in result.records:
        lines.append(
            ",".join(
                [
                    result.parameter,
                    _cell(r.value),
                    str(r.trial),
                    str(r.seed),
                    r.status,
                    str(r.iterations),
                    _cell(r.eh_estimated),
                    _cell(r.eh_realized),
                    _cell(r.baseline_eh),
                    _cell(r.wall_ms),
                ]
            )
        )
    for agg in result.aggregates:
        prefix = [result.parameter, _cell(agg.value), "-1", ""]
        lines.append(
            ",".join(
                prefix
                + ["mean", _cell(agg.mean_iterations), _cell(agg.mean_estimated),
                   _cell(agg.mean_realized), _cell(agg.mean_baseline), ""]
            )
        )
        lines.append(
            ",".join(
                prefix
                + ["stderr", "", _cell(agg.stderr_estimated), _cell(agg.stderr_realized),
                   _cell(agg.stderr_baseline), ""]
            )
        )
        lines.append(
            ",".join(prefix + ["infeasible_rate", "", _cell(agg.infeasible_rate), "", "", ""])
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
