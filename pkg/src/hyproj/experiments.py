"""Seeded Monte Carlo trials and parameter-grid sweeps.

Every trial derives its own seed streams from the master seed via
util.derive_seed(master_seed, cell_index, trial_index, stream_tag), so sweep
results are identical for any worker count and any execution order.  Detection
error is reported as the sum of the miss rate under the planted model and the
false-alarm rate under the null: the sum near zero is strong separation, near
one is chance level.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product

from .errors import BudgetExceeded, CliqueBudgetExceeded, InvalidParams
from .model import ModelParams, apply_noise, project, sample_hypergraph, sample_null
from .reconstruct import DEFAULT_CLIQUE_CAP, ReconMetrics, clique_estimator, recon_metrics
from .stats import (
    Decision,
    StatisticName,
    TestOutcome,
    clique_count,
    clique_count_threshold_matched,
    edge_count,
    edge_count_threshold,
    matched_null_density,
)
from .util import derive_seed

WILSON_Z_95 = 1.959963984540054

DEFAULT_TRIAL_BUDGET = 1_000_000


class TrialStatistic(str, Enum):
    EDGE_COUNT = "edge-count"
    CLIQUE_COUNT_MATCHED_NULL = "clique-count-matched"
    RECONSTRUCTION = "reconstruction"


@dataclass(frozen=True)
class TrialRecord:
    """One paired trial.  Identical (params, seed) reproduce the statistical
    payload exactly; wall_time_ms is excluded from equality."""

    params: ModelParams
    seed: int
    planted_stat: float | None
    null_stat: float | None
    threshold: float | None
    planted_decision: Decision | None
    null_decision: Decision | None
    recon: ReconMetrics | None = None
    error: str | None = None
    wall_time_ms: int = field(default=0, compare=False)


def wilson_interval(k: int, m: int, z: float = WILSON_Z_95) -> tuple[float, float]:
    """Wilson score interval for k successes out of m; always a sub-unit
    interval containing k/m, including the degenerate k in {0, m} cases."""
    if m < 1:
        raise InvalidParams(f"need m >= 1, got {m}")
    if not 0 <= k <= m:
        raise InvalidParams(f"need 0 <= k <= m, got k={k}, m={m}")
    phat = k / m
    z2 = z * z
    denom = 1.0 + z2 / m
    center = (phat + z2 / (2 * m)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / m + z2 / (4 * m * m)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def run_detection_trial(
    params: ModelParams, statistic: TrialStatistic | str, seed: int
) -> TrialRecord:
    """One paired planted/null draw, both thresholded.

    The planted sample follows the model; the null is Erdos-Renyi with
    density q (edge counting) or the matched density (clique counting).
    """
    statistic = TrialStatistic(statistic)
    t0 = time.perf_counter_ns()
    H = sample_hypergraph(params, derive_seed(seed, "hypergraph"))
    A = apply_noise(project(H), params.p, params.q, derive_seed(seed, "noise"))
    if statistic is TrialStatistic.EDGE_COUNT:
        null = sample_null(params.n, params.q, derive_seed(seed, "null"))
        threshold = edge_count_threshold(params)
        name = StatisticName.EDGE_COUNT
        planted_val = float(edge_count(A))
        null_val = float(edge_count(null))
    elif statistic is TrialStatistic.CLIQUE_COUNT_MATCHED_NULL:
        qt = matched_null_density(params)
        null = sample_null(params.n, qt, derive_seed(seed, "null"))
        threshold = clique_count_threshold_matched(params)
        name = StatisticName.CLIQUE_COUNT
        planted_val = float(clique_count(A, params.d))
        null_val = float(clique_count(null, params.d))
    else:
        raise InvalidParams(f"{statistic} is not a detection statistic")
    planted = TestOutcome.decide(name, planted_val, threshold)
    null_outcome = TestOutcome.decide(name, null_val, threshold)
    dt_ms = (time.perf_counter_ns() - t0) // 1_000_000
    return TrialRecord(
        params=params,
        seed=seed,
        planted_stat=planted_val,
        null_stat=null_val,
        threshold=threshold,
        planted_decision=planted.decision,
        null_decision=null_outcome.decision,
        wall_time_ms=int(dt_ms),
    )


def run_reconstruction_trial(
    params: ModelParams, seed: int, clique_cap: int = DEFAULT_CLIQUE_CAP
) -> TrialRecord:
    """Sample (H, A), run the clique estimator, fill ReconMetrics.  A clique
    budget overrun is recorded on the trial, not raised."""
    t0 = time.perf_counter_ns()
    H = sample_hypergraph(params, derive_seed(seed, "hypergraph"))
    A = apply_noise(project(H), params.p, params.q, derive_seed(seed, "noise"))
    recon = None
    error = None
    stat = None
    try:
        Hhat = clique_estimator(A, params.d, cap=clique_cap)
        recon = recon_metrics(H, Hhat, params.s)
        stat = recon.normalized_error
    except CliqueBudgetExceeded as exc:
        error = str(exc)
    dt_ms = (time.perf_counter_ns() - t0) // 1_000_000
    return TrialRecord(
        params=params,
        seed=seed,
        planted_stat=stat,
        null_stat=None,
        threshold=None,
        planted_decision=None,
        null_decision=None,
        recon=recon,
        error=error,
        wall_time_ms=int(dt_ms),
    )


@dataclass(frozen=True)
class SweepGrid:
    """Axes of a sweep.  Values are deduplicated and sorted ascending so the
    cell order (and hence the per-cell seed streams) depends only on the sets
    of values.  Direct-rate overrides apply to every cell and win over the
    corresponding exponent axis."""

    d: int
    n: tuple[int, ...]
    delta: tuple[float, ...]
    alpha: tuple[float, ...] = (1.0,)
    beta: tuple[float, ...] = (0.0,)
    c_s: float = 1.0
    c_p: float = 1.0
    c_q: float = 1.0
    s_override: float | None = None
    p_override: float | None = None
    q_override: float | None = None
    allow_inverted: bool = False

    def __post_init__(self):
        for name in ("n", "delta", "alpha", "beta"):
            values = tuple(sorted(set(getattr(self, name))))
            if not values:
                raise InvalidParams(f"axis {name} must be nonempty")
            object.__setattr__(self, name, values)

    @property
    def num_cells(self) -> int:
        return len(self.n) * len(self.delta) * len(self.alpha) * len(self.beta)

    def cells(self):
        """(cell_index, axis-values dict) in canonical order."""
        for idx, (n, delta, alpha, beta) in enumerate(
            product(self.n, self.delta, self.alpha, self.beta)
        ):
            yield idx, {"n": n, "delta": delta, "alpha": alpha, "beta": beta}

    def cell_params(self, axes: dict) -> ModelParams:
        return ModelParams.resolve(
            axes["n"],
            self.d,
            delta=None if self.s_override is not None else axes["delta"],
            alpha=None if self.p_override is not None else axes["alpha"],
            beta=None if self.q_override is not None else axes["beta"],
            s=self.s_override,
            p=self.p_override,
            q=self.q_override,
            c_s=self.c_s,
            c_p=self.c_p,
            c_q=self.c_q,
            allow_inverted=self.allow_inverted,
        )


@dataclass(frozen=True)
class SweepCell:
    n: int
    d: int
    delta: float
    alpha: float
    beta: float
    s: float
    p: float
    q: float
    trials: int
    failures: int
    miss_count: int | None
    false_alarm_count: int | None
    error_rate: float | None
    ci_lo: float | None
    ci_hi: float | None
    mean_norm_error: float | None


@dataclass(frozen=True)
class SweepResult:
    grid: SweepGrid
    statistic: TrialStatistic
    trials: int
    master_seed: int
    cells: tuple[SweepCell, ...]
    records: tuple[tuple[TrialRecord, ...], ...]

    def config_dict(self) -> dict:
        from . import __version__

        return {
            "version": __version__,
            "statistic": self.statistic.value,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "d": self.grid.d,
            "axes": {
                "n": list(self.grid.n),
                "delta": list(self.grid.delta),
                "alpha": list(self.grid.alpha),
                "beta": list(self.grid.beta),
            },
            "overrides": {
                "s": self.grid.s_override,
                "p": self.grid.p_override,
                "q": self.grid.q_override,
            },
            "prefactors": {"c_s": self.grid.c_s, "c_p": self.grid.c_p, "c_q": self.grid.c_q},
        }

    def to_csv(self) -> str:
        """Deterministic CSV: one row per cell, config echoed in # comments."""

        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return repr(x)
            return str(x)

        lines = [
            "# hyproj sweep",
            "# config=" + json.dumps(self.config_dict(), sort_keys=True),
            "n,d,delta,alpha,beta,s,p,q,trials,failures,miss_rate,false_alarm_rate,"
            "error_rate,ci_lo,ci_hi,mean_norm_error",
        ]
        for cell in self.cells:
            used = cell.trials - cell.failures
            miss_rate = (
                None if cell.miss_count is None or used == 0 else cell.miss_count / used
            )
            fa_rate = (
                None
                if cell.false_alarm_count is None or used == 0
                else cell.false_alarm_count / used
            )
            lines.append(
                ",".join(
                    fmt(x)
                    for x in (
                        cell.n, cell.d, cell.delta, cell.alpha, cell.beta,
                        cell.s, cell.p, cell.q, cell.trials, cell.failures,
                        miss_rate, fa_rate, cell.error_rate, cell.ci_lo,
                        cell.ci_hi, cell.mean_norm_error,
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self, verbose: bool = False) -> dict:
        out = {"config": self.config_dict(), "cells": []}
        for cell in self.cells:
            out["cells"].append(
                {
                    "n": cell.n, "d": cell.d, "delta": cell.delta,
                    "alpha": cell.alpha, "beta": cell.beta,
                    "s": cell.s, "p": cell.p, "q": cell.q,
                    "trials": cell.trials, "failures": cell.failures,
                    "miss_count": cell.miss_count,
                    "false_alarm_count": cell.false_alarm_count,
                    "error_rate": cell.error_rate,
                    "ci_lo": cell.ci_lo, "ci_hi": cell.ci_hi,
                    "mean_norm_error": cell.mean_norm_error,
                }
            )
        if verbose:
            out["trials"] = [
                [_record_json(r) for r in cell_records]
                for cell_records in self.records
            ]
        return out


def _record_json(rec: TrialRecord) -> dict:
    out = {
        "seed": rec.seed,
        "planted_stat": rec.planted_stat,
        "null_stat": rec.null_stat,
        "threshold": rec.threshold,
        "planted_decision": None if rec.planted_decision is None else rec.planted_decision.value,
        "null_decision": None if rec.null_decision is None else rec.null_decision.value,
        "error": rec.error,
        "wall_time_ms": rec.wall_time_ms,
    }
    if rec.recon is not None:
        out["recon"] = {
            "sym_diff": rec.recon.sym_diff,
            "missed": rec.recon.missed,
            "false_pos": rec.recon.false_pos,
            "normalizer": rec.recon.normalizer,
            "normalized_error": rec.recon.normalized_error,
        }
    return out


def _run_cell(args) -> tuple[int, list]:
    grid, statistic, trials, master_seed, cell_index, axes, clique_cap = args
    params = grid.cell_params(axes)
    records = []
    for t in range(trials):
        seed = derive_seed(master_seed, cell_index, t, statistic.value)
        if statistic is TrialStatistic.RECONSTRUCTION:
            records.append(run_reconstruction_trial(params, seed, clique_cap=clique_cap))
        else:
            records.append(run_detection_trial(params, statistic, seed))
    return cell_index, records


def _aggregate_cell(
    params: ModelParams,
    statistic: TrialStatistic,
    records: list,
) -> SweepCell:
    trials = len(records)
    failures = sum(1 for r in records if r.error is not None)
    good = [r for r in records if r.error is None]
    if statistic is TrialStatistic.RECONSTRUCTION:
        miss_count = false_alarm_count = None
        error_rate = ci_lo = ci_hi = None
        if good:
            mean_norm_error = sum(r.recon.normalized_error for r in good) / len(good)
        else:
            mean_norm_error = None
    else:
        miss_count = sum(1 for r in good if r.planted_decision is Decision.NULL)
        false_alarm_count = sum(1 for r in good if r.null_decision is Decision.PLANTED)
        mean_norm_error = None
        if good:
            error_rate = miss_count / len(good) + false_alarm_count / len(good)
            # Wilson interval on the pooled error proportion, rescaled to the
            # two-term error sum (range [0, 2]).
            lo, hi = wilson_interval(miss_count + false_alarm_count, 2 * len(good))
            ci_lo, ci_hi = 2 * lo, 2 * hi
        else:
            error_rate = ci_lo = ci_hi = None
    return SweepCell(
        n=params.n, d=params.d, delta=params.delta, alpha=params.alpha,
        beta=params.beta, s=params.s, p=params.p, q=params.q,
        trials=trials, failures=failures,
        miss_count=miss_count, false_alarm_count=false_alarm_count,
        error_rate=error_rate, ci_lo=ci_lo, ci_hi=ci_hi,
        mean_norm_error=mean_norm_error,
    )


def sweep(
    grid: SweepGrid,
    trials: int,
    statistic: TrialStatistic | str,
    master_seed: int,
    workers: int = 1,
    max_total_trials: int = DEFAULT_TRIAL_BUDGET,
    clique_cap: int = DEFAULT_CLIQUE_CAP,
) -> SweepResult:
    """Run trials over every grid cell.

    Per-trial seeds depend only on (master_seed, cell_index, trial_index,
    statistic), and cells are aggregated in canonical order, so the result is
    identical for any worker count.  The total trial budget is enforced up
    front; it is the only global limit shared across workers.
    """
    statistic = TrialStatistic(statistic)
    if trials < 1:
        raise InvalidParams(f"trials must be >= 1, got {trials}")
    total = grid.num_cells * trials
    if total > max_total_trials:
        raise BudgetExceeded(
            f"{grid.num_cells} cells x {trials} trials = {total} exceeds the "
            f"budget of {max_total_trials}"
        )
    tasks = [
        (grid, statistic, trials, master_seed, idx, axes, clique_cap)
        for idx, axes in grid.cells()
    ]
    results: list = [None] * len(tasks)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, records in pool.map(_run_cell, tasks):
                results[idx] = records
    else:
        for task in tasks:
            idx, records = _run_cell(task)
            results[idx] = records
    cells = []
    for (idx, axes), records in zip(grid.cells(), results):
        cells.append(_aggregate_cell(grid.cell_params(axes), statistic, records))
    return SweepResult(
        grid=grid,
        statistic=statistic,
        trials=trials,
        master_seed=master_seed,
        cells=tuple(cells),
        records=tuple(tuple(r) for r in results),
    )
