"""Goal recognition over operator-counting LPs.

For each hypothesis G we solve the base LP (value h) and the LP augmented
with per-action observation floors Y_a >= k_a (value h_hc). Selection uses
either h_hc directly or the enforcement delta h_hc - h, optionally widened
by the uncertainty ratio

    U = 1 + (min_G h_hc - |O|) / min_G h_hc

which estimates how many observations are missing. Infeasible LPs map to
an infinite value and such hypotheses are never selected.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .constraints import (ALL_FAMILIES, SRC_OBSERVATION, ConstraintSet,
                          LinearConstraint, base_constraints)
from .errors import GoalUnreachable, SolverFailure
from .grounding import PlanningTask
from .inputs import GoalHypotheses, ObservationSequence
from .lp import INFEASIBLE, OPTIMAL, LinearProgram, solve_with
from .oracle import Plan, validate_plan

INF = float("inf")

METHOD_HC = "hc"
METHOD_HC_U = "hc-u"
METHOD_DELTA = "delta"
METHOD_DELTA_U = "delta-u"
METHODS = (METHOD_HC, METHOD_HC_U, METHOD_DELTA, METHOD_DELTA_U)


@dataclass(frozen=True)
class RecognizerConfig:
    families: tuple[str, ...] = ALL_FAMILIES
    backend: str = "simplex"
    uncertainty_basis: str = "h_hc"  # or "h": basis of the ratio's minimum
    workers: int = 1
    selection_slack: float = 1e-9  # absorbs LP float noise in thresholds
    keep_counts: bool = True


@dataclass(frozen=True)
class HypothesisScore:
    goal_index: int
    h: float
    h_hc: float
    delta: float
    counts_base: tuple[float, ...] | None = None
    counts_hc: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RecognitionReport:
    scores: tuple[HypothesisScore, ...]
    uncertainty: float | None
    selected: tuple[int, ...]
    method: str
    obs_len: int
    timings: dict[str, float] = field(default_factory=dict)
    fallback_ranking: tuple[int, ...] | None = None  # only when all infeasible

    @property
    def all_infeasible(self) -> bool:
        return all(s.h_hc == INF for s in self.scores)


def observation_constraints(obs: ObservationSequence, num_actions: int) -> ConstraintSet:
    """One floor Y_a >= k_a per observed action."""
    rows = tuple(
        LinearConstraint(terms=((a, 1),), rhs=k, source=SRC_OBSERVATION)
        for a, k in sorted(obs.counts.items()) if k > 0)
    return ConstraintSet(rows, num_actions)


def _score_one(task: PlanningTask, goal_index: int, goal: frozenset[int],
               obs: ObservationSequence, config: RecognizerConfig
               ) -> tuple[HypothesisScore, float, float]:
    t0 = time.perf_counter()
    try:
        base = base_constraints(task, goal, config.families)
    except GoalUnreachable:
        t1 = time.perf_counter()
        return HypothesisScore(goal_index, INF, INF, INF), t1 - t0, 0.0
    t1 = time.perf_counter()

    out = solve_with(LinearProgram.from_constraints(base, task.costs), config.backend)
    if out.status not in (OPTIMAL, INFEASIBLE):
        raise SolverFailure(f"base LP for hypothesis {goal_index} came back {out.status}")
    if out.status == INFEASIBLE:
        t2 = time.perf_counter()
        return HypothesisScore(goal_index, INF, INF, INF), t1 - t0, t2 - t1

    h = out.value
    counts_base = out.counts if config.keep_counts else None
    hc_set = base.merge(observation_constraints(obs, task.num_actions))
    out_hc = solve_with(LinearProgram.from_constraints(hc_set, task.costs), config.backend)
    if out_hc.status not in (OPTIMAL, INFEASIBLE):
        raise SolverFailure(f"observation LP for hypothesis {goal_index} came back {out_hc.status}")
    t2 = time.perf_counter()
    if out_hc.status == INFEASIBLE:
        return (HypothesisScore(goal_index, h, INF, INF, counts_base, None),
                t1 - t0, t2 - t1)
    score = HypothesisScore(goal_index, h, out_hc.value, out_hc.value - h,
                            counts_base, out_hc.counts if config.keep_counts else None)
    return score, t1 - t0, t2 - t1


def score_hypothesis(task: PlanningTask, goal: Iterable[int], obs: ObservationSequence,
                     config: RecognizerConfig = RecognizerConfig(),
                     goal_index: int = 0) -> HypothesisScore:
    score, _, _ = _score_one(task, goal_index, frozenset(goal), obs, config)
    return score


def score_all(task: PlanningTask, hyps: GoalHypotheses, obs: ObservationSequence,
              config: RecognizerConfig = RecognizerConfig()
              ) -> tuple[tuple[HypothesisScore, ...], dict[str, float]]:
    """Score every hypothesis; results are index-ordered regardless of scheduling."""
    jobs = list(enumerate(hyps.goals))
    if config.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(
                lambda job: _score_one(task, job[0], job[1], obs, config), jobs))
    else:
        results = [_score_one(task, i, g, obs, config) for i, g in jobs]
    scores = tuple(r[0] for r in results)
    timings = {"constraints": sum(r[1] for r in results),
               "lp": sum(r[2] for r in results)}
    return scores, timings


def uncertainty(scores: Iterable[HypothesisScore], obs_len: int,
                basis: str = "h_hc") -> float | None:
    """Ratio widening the acceptance threshold when observations are scarce.

    None when every hypothesis is infeasible; 1.0 when the minimum is zero
    (nothing can be missing).
    """
    values = [s.h_hc if basis == "h_hc" else s.h for s in scores]
    finite = [v for v in values if v != INF]
    if not finite:
        return None
    m = min(finite)
    if m <= 0:
        return 1.0
    return 1.0 + (m - obs_len) / m


def _select(scores: tuple[HypothesisScore, ...], key: str, use_uncertainty: bool,
            obs_len: int, config: RecognizerConfig
            ) -> tuple[tuple[int, ...], float | None, tuple[int, ...] | None]:
    values = {s.goal_index: getattr(s, key) for s in scores}
    finite = {i: v for i, v in values.items() if v != INF}
    if not finite:
        # non-normative fallback: rank by the unconstrained heuristic
        ranking = tuple(sorted(values, key=lambda i: (scores[i].h, i)))
        return (), None, ranking
    if use_uncertainty:
        u = uncertainty(scores, obs_len, config.uncertainty_basis)
    else:
        u = 1.0
    threshold = min(finite.values()) * u + config.selection_slack
    selected = tuple(i for i in sorted(finite) if finite[i] <= threshold)
    return selected, u, None


def recognize(task: PlanningTask, hyps: GoalHypotheses, obs: ObservationSequence,
              method: str = METHOD_DELTA_U,
              config: RecognizerConfig = RecognizerConfig()) -> RecognitionReport:
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}' (expected one of {METHODS})")
    if len(hyps) == 0:
        raise ValueError("at least one goal hypothesis is required")
    scores, timings = score_all(task, hyps, obs, config)
    t0 = time.perf_counter()
    key = "h_hc" if method in (METHOD_HC, METHOD_HC_U) else "delta"
    use_u = method in (METHOD_HC_U, METHOD_DELTA_U)
    selected, u, fallback = _select(scores, key, use_u, len(obs), config)
    timings = dict(timings)
    timings["selection"] = time.perf_counter() - t0
    return RecognitionReport(scores=scores, uncertainty=u, selected=selected,
                             method=method, obs_len=len(obs), timings=timings,
                             fallback_ranking=fallback)


def recognize_hc(task: PlanningTask, hyps: GoalHypotheses, obs: ObservationSequence,
                 use_uncertainty: bool = False,
                 config: RecognizerConfig = RecognizerConfig()) -> RecognitionReport:
    return recognize(task, hyps, obs, METHOD_HC_U if use_uncertainty else METHOD_HC, config)


def recognize_delta(task: PlanningTask, hyps: GoalHypotheses, obs: ObservationSequence,
                    use_uncertainty: bool = False,
                    config: RecognizerConfig = RecognizerConfig()) -> RecognitionReport:
    return recognize(task, hyps, obs, METHOD_DELTA_U if use_uncertainty else METHOD_DELTA, config)


def full_observation_guarantee_check(task: PlanningTask, hyps: GoalHypotheses,
                                     plan: Plan, hidden: int,
                                     config: RecognizerConfig = RecognizerConfig()) -> bool:
    """With the complete plan observed, hc selection must contain the hidden goal."""
    check = validate_plan(task, plan.steps, hyps.goals[hidden])
    if not check.ok:
        raise ValueError(f"plan is not valid for hypothesis {hidden}: {check.reason}")
    obs = ObservationSequence(obs=plan.steps)
    report = recognize_hc(task, hyps, obs, use_uncertainty=False, config=config)
    return hidden in report.selected


def report_to_dict(report: RecognitionReport) -> dict:
    return {
        "method": report.method,
        "obs_len": report.obs_len,
        "uncertainty": report.uncertainty,
        "selected": list(report.selected),
        "fallback_ranking": (list(report.fallback_ranking)
                             if report.fallback_ranking is not None else None),
        "timings": dict(report.timings),
        "scores": [
            {
                "goal_index": s.goal_index,
                "h": s.h,
                "h_hc": s.h_hc,
                "delta": s.delta,
                "counts_base": list(s.counts_base) if s.counts_base is not None else None,
                "counts_hc": list(s.counts_hc) if s.counts_hc is not None else None,
            }
            for s in report.scores
        ],
    }


def report_from_dict(data: Mapping) -> RecognitionReport:
    scores = tuple(
        HypothesisScore(
            goal_index=int(s["goal_index"]), h=float(s["h"]), h_hc=float(s["h_hc"]),
            delta=float(s["delta"]),
            counts_base=tuple(s["counts_base"]) if s.get("counts_base") is not None else None,
            counts_hc=tuple(s["counts_hc"]) if s.get("counts_hc") is not None else None)
        for s in data["scores"])
    fallback = data.get("fallback_ranking")
    return RecognitionReport(
        scores=scores,
        uncertainty=data.get("uncertainty"),
        selected=tuple(int(i) for i in data["selected"]),
        method=str(data["method"]),
        obs_len=int(data["obs_len"]),
        timings={str(k): float(v) for k, v in dict(data.get("timings", {})).items()},
        fallback_ranking=tuple(int(i) for i in fallback) if fallback is not None else None)


def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    if abs(v - round(v)) < 1e-9:
        return str(int(round(v)))
    return f"{v:.4f}"


def format_report(report: RecognitionReport, hyps: GoalHypotheses,
                  timings: Mapping[str, float] | None = None) -> str:
    """Human-readable report: header plus one record per hypothesis."""
    lines = [
        f"method: {report.method}",
        f"observations: {report.obs_len}",
        f"uncertainty: {report.uncertainty:.6f}" if report.uncertainty is not None
        else "uncertainty: undefined (all hypotheses infeasible)",
    ]
    shown = dict(report.timings)
    if timings:
        shown.update(timings)
    if shown:
        lines.append("timings: " + "  ".join(f"{k}={v:.4f}s" for k, v in sorted(shown.items())))
    lines.append("")
    for s in report.scores:
        mark = "*" if s.goal_index in report.selected else " "
        lines.append(f" {mark} G{s.goal_index}: h={_fmt(s.h)} h_hc={_fmt(s.h_hc)} "
                     f"delta={_fmt(s.delta)}  {hyps.lines[s.goal_index]}")
    lines.append("")
    if report.selected:
        lines.append("selected: " + ", ".join(f"G{i}" for i in report.selected))
    else:
        lines.append("selected: none (all hypotheses infeasible)")
        if report.fallback_ranking is not None:
            lines.append("fallback ranking by h (non-normative): "
                         + ", ".join(f"G{i}" for i in report.fallback_ranking))
    return "\n".join(lines)
