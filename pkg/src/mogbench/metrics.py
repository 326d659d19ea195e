"""Evaluation metrics computed from trial and round logs.

PA is the root-mean-square error between grasped and target counts, OSR
the fraction of trials that hit the target exactly, AR the fraction of
scenes offering a graspable k-cluster, and the CGPU family normalizes
multi-object picking cost by the single-object baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

from .errors import CalibrationError, EmptyInputError, IngestError
from .hands import HandModel
from .planners import PlannerConfig, feasible_clusters
from .protocols import RunLog
from .scene import Scene


@dataclass(frozen=True)
class TrialSet:
    outcomes: tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))

    @property
    def N_total(self) -> int:
        return len(self.outcomes)

    @property
    def N_success(self) -> int:
        return sum(1 for o in self.outcomes if o == self.target)


def picking_accuracy(trials: TrialSet) -> float:
    if not trials.N_total:
        raise EmptyInputError("picking accuracy needs at least one trial")
    sq = sum((o - trials.target) ** 2 for o in trials.outcomes)
    return math.sqrt(sq / trials.N_total)


def overall_success_rate(trials: TrialSet) -> float:
    if not trials.N_total:
        raise EmptyInputError("success rate needs at least one trial")
    return trials.N_success / trials.N_total


def cgpu_simplified(N_OPO: int, k: int) -> float:
    if k <= 0:
        raise ZeroDivisionError("k must be >= 1")
    return N_OPO / k


def cgpu(t_total: float, k: int, t_sopt: float) -> float:
    if not t_sopt > 0:
        raise CalibrationError(f"t_sopt must be positive, got {t_sopt}")
    if k <= 0:
        raise ZeroDivisionError("k must be >= 1")
    return t_total / (k * t_sopt)


def cgpu_with_overhead(cgpu_s: float, lambda_o: float) -> float:
    return cgpu_s + lambda_o * cgpu_s


def overhead_ratio(t: float, t_ref: float) -> float:
    """(t - t_ref) / t_ref, the relative extra cost over a reference time."""
    if not t_ref > 0:
        raise CalibrationError(f"reference time must be positive, got {t_ref}")
    return (t - t_ref) / t_ref


def cgpu_adjusted(cgpu_s: float, t_OPO_avg: float, t_SOG: float) -> float:
    return (1.0 + overhead_ratio(t_OPO_avg, t_SOG)) * cgpu_s


def availability_rate(
    scenes: Sequence[Scene], hand: HandModel, k: int, config: PlannerConfig | None = None, seed: int = 0
) -> float:
    """Fraction of scenes holding at least one full k-cluster the hand can
    cover as-is (no grouping moves)."""
    if not scenes:
        raise EmptyInputError("availability rate needs at least one scene")
    if k < 1:
        raise ValueError("k must be >= 1")
    config = config or PlannerConfig()
    hits = 0
    for scene in scenes:
        if len(scene) >= k and feasible_clusters(
            scene,
            hand,
            k,
            seed,
            n_yaw=config.feasibility_yaws,
            restarts=config.kmeans_restarts,
            refine_yaws=config.refine_yaws,
        ):
            hits += 1
    return hits / len(scenes)


@dataclass(frozen=True)
class MetricsReport:
    """Absent metrics are None, never zero."""

    protocol: str
    target: int | None = None
    N_total: int | None = None
    N_success: int | None = None
    PA: float | None = None
    rmse_over_target: float | None = None
    OSR: float | None = None
    AR: float | None = None
    runs: int | None = None
    incomplete_runs: int | None = None
    k: int | None = None
    N_OPO: int | None = None
    delivered: int | None = None
    excess_returns: int | None = None
    t_OPO_avg: float | None = None
    t_total_avg: float | None = None
    t_product_avg: float | None = None
    t_sopt: float | None = None
    t_SOG: float | None = None
    lambda_o: float | None = None
    lambda_ao: float | None = None
    CGPU: float | None = None
    CGPU_s: float | None = None
    CGPU_o: float | None = None
    CGPU_a: float | None = None
    settle_wait: float | None = None

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.field_names()}


def _opo_report(log: RunLog) -> MetricsReport:
    trials = log.trials
    if not trials:
        raise EmptyInputError("log holds no trials")
    targets = {t.target_p for t in trials}
    if len(targets) != 1:
        raise IngestError(f"OPO log mixes targets {sorted(targets)}; split it per target", field="target")
    target = targets.pop()
    ts = TrialSet(tuple(t.q for t in trials), target)
    pa = picking_accuracy(ts)
    t_opo = None
    if all(t.phase is not None for t in trials):
        t_opo = sum(t.phase.t_OPO for t in trials) / len(trials)
    settle = trials[0].settle_wait if log.source == "native" else None
    return MetricsReport(
        "opo",
        target=target,
        N_total=ts.N_total,
        N_success=ts.N_success,
        PA=pa,
        rmse_over_target=pa / target,
        OSR=overall_success_rate(ts),
        t_OPO_avg=t_opo,
        settle_wait=settle,
    )


def _run_report(log: RunLog) -> MetricsReport:
    runs = log.runs
    if not runs:
        raise EmptyInputError("log holds no protocol runs")
    done = [r for r in runs if r.completed]
    base = dict(target=log.target, runs=len(runs), incomplete_runs=len(runs) - len(done))
    if log.source == "native":
        base["settle_wait"] = next((e.record.settle_wait for r in runs for e in r.rounds), None)
    if not done:
        return MetricsReport(log.protocol, **base)
    k = sum(r.k for r in done)
    n_opo = sum(r.m_OPO for r in done)
    cgpu_s = cgpu_simplified(n_opo, k)
    report = dict(
        base,
        k=k,
        N_OPO=n_opo,
        delivered=sum(r.delivered for r in done),
        excess_returns=sum(r.excess_returns for r in done),
        CGPU_s=cgpu_s,
    )
    totals = [r.t_total for r in done]
    if all(t is not None for t in totals) and n_opo:
        t_sum = sum(totals)
        opo_times = [e.record.phase.t_OPO for r in done for e in r.rounds]
        t_opo_avg = sum(opo_times) / len(opo_times)
        report.update(
            t_OPO_avg=t_opo_avg,
            t_total_avg=t_sum / len(done),
            t_product_avg=sum(r.t_product for r in done) / len(done),
        )
        cal = log.calibration
        if cal is not None:
            lambda_o = overhead_ratio(t_sum / n_opo, cal.t_sopt)
            lambda_ao = overhead_ratio(t_opo_avg, cal.t_SOG)
            report.update(
                t_sopt=cal.t_sopt,
                t_SOG=cal.t_SOG,
                lambda_o=lambda_o,
                lambda_ao=lambda_ao,
                CGPU=cgpu(t_sum, k, cal.t_sopt),
                CGPU_o=cgpu_with_overhead(cgpu_s, lambda_o),
                CGPU_a=cgpu_adjusted(cgpu_s, t_opo_avg, cal.t_SOG),
            )
    return MetricsReport(log.protocol, **report)


def summarize(log: RunLog) -> MetricsReport:
    """Every metric the log supports; the rest stay None."""
    if log.protocol == "opo":
        return _opo_report(log)
    if log.protocol in ("apt", "pta"):
        return _run_report(log)
    if log.protocol == "sop-calibrate":
        if log.calibration is None:
            raise EmptyInputError("calibration log holds no calibration record")
        return MetricsReport("sop-calibrate", t_sopt=log.calibration.t_sopt, t_SOG=log.calibration.t_SOG)
    if log.protocol == "ar":
        recs = log.availability
        if not recs:
            raise EmptyInputError("availability log holds no scenes")
        return MetricsReport("ar", target=log.target, N_total=len(recs), AR=sum(r.available for r in recs) / len(recs))
    raise IngestError(f"unknown protocol {log.protocol!r}", field="protocol")
