"""Suite generation and evaluation: observability sampling, noise
injection, and the accuracy / spread / time metrics.

Rows are fully determined by the manifest and seed; wall-clock timings go
to the aggregate outputs and are written into rows.csv only when the
manifest enables ``timings`` (so default row files are byte-reproducible).
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .constraints import ALL_FAMILIES
from .errors import CapExceeded, OcgrError
from .generators import GENERATORS, write_bundle
from .grounding import PlanningTask, relaxed_reachable
from .inputs import (GoalHypotheses, ObservationSequence, bundle_from_texts,
                     load_bundle)
from .oracle import OPTIMAL, Plan, optimal_cost, validate_plan
from .recognition import (METHOD_DELTA_U, METHODS, RecognizerConfig, _select,
                          score_all)

CLEAN_LEVELS = (10, 30, 50, 70, 100)
NOISY_LEVELS = (25, 50, 75, 100)


def stable_seed(*parts) -> int:
    """Order-stable child seed; independent of PYTHONHASHSEED."""
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SuiteSpec:
    bundles: tuple[str, ...] = ()
    families: tuple[str, ...] = ()
    per_family: int = 5
    observability: tuple[int, ...] | None = None
    noise_count: int = 0
    suboptimal_fraction: float = 0.5
    methods: tuple[str, ...] = (METHOD_DELTA_U,)
    seed: int = 0
    workers: int = 1
    timings: bool = False
    constraint_families: tuple[str, ...] = ALL_FAMILIES
    backend: str = "simplex"

    def levels(self) -> tuple[int, ...]:
        if self.observability is not None:
            return self.observability
        return NOISY_LEVELS if self.noise_count > 0 else CLEAN_LEVELS

    def validate(self) -> None:
        for pct in self.levels():
            if not 0 < pct <= 100:
                raise ValueError(f"observability level {pct} outside (0, 100]")
        if self.noise_count < 0:
            raise ValueError("noise_count must be >= 0")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method '{m}'")
        for f in self.families:
            if f not in GENERATORS:
                raise ValueError(f"unknown generator family '{f}'")
        if not self.bundles and not self.families:
            raise ValueError("suite lists neither bundles nor generator families")


_SPEC_KEYS = set(SuiteSpec.__dataclass_fields__)


def load_manifest(path: str | Path) -> SuiteSpec:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
    for key in ("bundles", "families", "methods", "constraint_families"):
        if key in data:
            data[key] = tuple(data[key])
    if data.get("observability") is not None:
        data["observability"] = tuple(data["observability"])
    return SuiteSpec(**data)


def save_manifest(spec: SuiteSpec, path: str | Path) -> None:
    data = {
        "bundles": list(spec.bundles),
        "families": list(spec.families),
        "per_family": spec.per_family,
        "observability": list(spec.observability) if spec.observability is not None else None,
        "noise_count": spec.noise_count,
        "suboptimal_fraction": spec.suboptimal_fraction,
        "methods": list(spec.methods),
        "seed": spec.seed,
        "workers": spec.workers,
        "timings": spec.timings,
        "constraint_families": list(spec.constraint_families),
        "backend": spec.backend,
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class RecognitionProblem:
    domain_name: str
    problem_id: str
    task: PlanningTask
    hyps: GoalHypotheses
    hidden: int | None
    plan: Plan | None
    obs: ObservationSequence
    pct: int | None  # None: observations taken as shipped in the bundle
    noise: int
    seed: int


def sample_observations(plan: Plan, pct: int, rng: random.Random) -> ObservationSequence:
    """Order-preserving uniform sub-sequence of round(pct% of the plan), min 1."""
    if not plan.steps:
        return ObservationSequence(())
    size = max(1, int(pct * len(plan.steps) / 100 + 0.5))
    size = min(size, len(plan.steps))
    picked = sorted(rng.sample(range(len(plan.steps)), size))
    return ObservationSequence(tuple(plan.steps[i] for i in picked))


def inject_noise(obs: ObservationSequence, task: PlanningTask,
                 goal_region: GoalHypotheses | tuple[frozenset[int], ...],
                 n: int, rng: random.Random, *,
                 exclude: tuple[int, ...] = ()) -> ObservationSequence:
    """Insert n distinct spurious actions at random positions.

    Candidates are applicable somewhere in the delete relaxation of the
    initial state, not in the excluded (executed) plan, and do not directly
    achieve any hypothesis fact.
    """
    if n <= 0:
        return obs
    goals = goal_region.goals if isinstance(goal_region, GoalHypotheses) else tuple(goal_region)
    goal_facts = frozenset().union(*goals) if goals else frozenset()
    _, applicable = relaxed_reachable(task)
    banned = set(exclude) | set(obs.obs)
    candidates = sorted(
        a for a in applicable
        if a not in banned and not (task.actions[a].adds & goal_facts))
    if len(candidates) < n:
        raise OcgrError(
            f"task too small to supply {n} distinct spurious actions "
            f"({len(candidates)} candidates)")
    spurious = rng.sample(candidates, n)
    out = list(obs.obs)
    for a in spurious:
        out.insert(rng.randint(0, len(out)), a)
    return ObservationSequence(tuple(out))


def _splice_detour(task: PlanningTask, goal: frozenset[int], plan: Plan,
                   rng: random.Random, cap: int | None) -> Plan:
    """Degrade an optimal plan by one random applicable action plus replanning."""
    for _ in range(8):
        cut = rng.randint(0, len(plan.steps))
        state = set(task.init)
        for aid in plan.steps[:cut]:
            a = task.actions[aid]
            state = (state - a.dels) | a.adds
        applicable = sorted(a.id for a in task.actions if a.pre <= state)
        if not applicable:
            continue
        detour = rng.choice(applicable)
        a = task.actions[detour]
        nstate = (state - a.dels) | a.adds
        sub = PlanningTask(facts=task.facts, actions=task.actions,
                           init=frozenset(nstate), goal=goal)
        rest = optimal_cost(sub, goal, cap=cap)
        if rest.status != OPTIMAL:
            continue
        steps = plan.steps[:cut] + (detour,) + rest.plan.steps
        candidate = Plan(steps=steps, cost=sum(task.actions[s].cost for s in steps))
        if validate_plan(task, candidate.steps, goal).ok:
            return candidate
    return plan


def generate_problem(task: PlanningTask, hyps: GoalHypotheses, hidden: int,
                     pct: int, noise: int, seed: int, *, suboptimal: bool = False,
                     plan: Plan | None = None, domain_name: str = "task",
                     problem_id: str = "p0", search_cap: int | None = None
                     ) -> RecognitionProblem:
    """Compose a recognition problem from a witness plan for the hidden goal."""
    rng = random.Random(seed)
    goal = hyps.goals[hidden]
    if plan is None:
        result = optimal_cost(task, goal, cap=search_cap)
        if result.status != OPTIMAL:
            raise CapExceeded(f"no witness plan for the hidden goal ({result.status})")
        plan = result.plan
        if suboptimal:
            plan = _splice_detour(task, goal, plan, rng, search_cap)
    obs = sample_observations(plan, pct, rng)
    if noise > 0:
        obs = inject_noise(obs, task, hyps, noise, rng, exclude=plan.steps)
    return RecognitionProblem(domain_name=domain_name, problem_id=problem_id,
                              task=task, hyps=hyps.with_hidden(hidden), hidden=hidden,
                              plan=plan, obs=obs, pct=pct, noise=noise, seed=seed)


@dataclass(frozen=True)
class Row:
    domain: str
    problem_id: str
    pct: int | None
    noise: int
    method: str
    time_s: float | None
    correct: bool | None
    spread: int
    u: float | None
    selected: tuple[int, ...]
    status: str = "ok"


@dataclass(frozen=True)
class AggregateRow:
    domain: str
    pct: int | None
    noise: int
    method: str
    n: int
    time_mean_s: float
    accuracy: float | None
    spread_mean: float


@dataclass(frozen=True)
class SuiteResult:
    rows: tuple[Row, ...]
    aggregates: tuple[AggregateRow, ...]


def generated_problems(spec: SuiteSpec) -> list[RecognitionProblem]:
    """Materialize every (bundle|generated problem) x observability level.

    For shipped bundles the obs.dat sequence plays the role of the source
    plan: levels subsample it and noise is drawn from outside it.
    """
    spec.validate()
    problems: list[RecognitionProblem] = []
    for path in spec.bundles:
        b = load_bundle(path)
        source = Plan(steps=b.obs.obs,
                      cost=sum(b.task.actions[a].cost for a in b.obs.obs))
        for pct in spec.levels():
            rng = random.Random(stable_seed(spec.seed, Path(path).name, pct))
            obs = sample_observations(source, pct, rng)
            if spec.noise_count > 0:
                obs = inject_noise(obs, b.task, b.hyps, spec.noise_count, rng,
                                   exclude=source.steps)
            problems.append(RecognitionProblem(
                domain_name=b.domain.name, problem_id=Path(path).name, task=b.task,
                hyps=b.hyps, hidden=b.hyps.hidden, plan=source, obs=obs,
                pct=pct, noise=spec.noise_count, seed=spec.seed))
    for family in spec.families:
        for j in range(spec.per_family):
            base_seed = stable_seed(spec.seed, family, j)
            bundle = GENERATORS[family](random.Random(base_seed))
            parsed = bundle_from_texts(dict(bundle.files), require_obs=False,
                                       path=f"<{family}-{j}>")
            suboptimal = int((j + 1) * spec.suboptimal_fraction) > int(j * spec.suboptimal_fraction)
            goal = parsed.hyps.goals[parsed.hyps.hidden]
            result = optimal_cost(parsed.task, goal)
            if result.status != OPTIMAL:
                raise CapExceeded(f"{family}-{j}: witness search {result.status}")
            plan = result.plan
            if suboptimal:
                plan = _splice_detour(parsed.task, goal, plan,
                                      random.Random(stable_seed(base_seed, "detour")), None)
            for pct in spec.levels():
                problems.append(generate_problem(
                    parsed.task, parsed.hyps, parsed.hyps.hidden, pct, spec.noise_count,
                    seed=stable_seed(base_seed, pct), plan=plan,
                    domain_name=bundle.name, problem_id=f"{family}-{j:03d}"))
    return problems


def _evaluate(problem: RecognitionProblem, spec: SuiteSpec) -> list[Row]:
    config = RecognizerConfig(families=spec.constraint_families, backend=spec.backend,
                              keep_counts=False)
    common = dict(domain=problem.domain_name, problem_id=problem.problem_id,
                  pct=problem.pct, noise=problem.noise)
    try:
        t0 = time.perf_counter()
        scores, _ = score_all(problem.task, problem.hyps, problem.obs, config)
        elapsed = time.perf_counter() - t0
    except OcgrError as exc:
        return [Row(**common, method=m, time_s=None, correct=None, spread=0,
                    u=None, selected=(), status=f"error:{type(exc).__name__}")
                for m in spec.methods]
    rows = []
    for method in spec.methods:
        t1 = time.perf_counter()
        key = "h_hc" if method in ("hc", "hc-u") else "delta"
        use_u = method.endswith("-u")
        selected, u, _ = _select(scores, key, use_u, len(problem.obs), config)
        row_time = elapsed + (time.perf_counter() - t1)
        correct = (problem.hidden in selected) if problem.hidden is not None else None
        rows.append(Row(**common, method=method, time_s=row_time, correct=correct,
                        spread=len(selected), u=u, selected=selected))
    return rows


def run_suite(spec: SuiteSpec) -> SuiteResult:
    problems = generated_problems(spec)
    if spec.workers > 1 and len(problems) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            nested = list(pool.map(lambda p: _evaluate(p, spec), problems))
    else:
        nested = [_evaluate(p, spec) for p in problems]
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r.domain, r.problem_id, r.pct if r.pct is not None else -1,
                             r.noise, r.method))

    groups: dict[tuple, list[Row]] = {}
    for r in rows:
        groups.setdefault((r.domain, r.pct, r.noise, r.method), []).append(r)
    aggregates = []
    for (domain, pct, noise, method), members in sorted(
            groups.items(), key=lambda kv: (kv[0][0], kv[0][1] if kv[0][1] is not None else -1,
                                            kv[0][2], kv[0][3])):
        judged = [r for r in members if r.correct is not None]
        acc = sum(r.correct for r in judged) / len(judged) if judged else None
        times = [r.time_s for r in members if r.time_s is not None]
        aggregates.append(AggregateRow(
            domain=domain, pct=pct, noise=noise, method=method, n=len(members),
            time_mean_s=sum(times) / len(times) if times else 0.0,
            accuracy=acc,
            spread_mean=sum(r.spread for r in members) / len(members)))
    return SuiteResult(rows=tuple(rows), aggregates=tuple(aggregates))


ROWS_HEADER = "domain,problem_id,pct,noise,method,time_s,correct,spread,U,selected_goals,status"


def format_rows(rows: tuple[Row, ...], include_timings: bool) -> str:
    out = [ROWS_HEADER]
    for r in rows:
        out.append(",".join([
            r.domain,
            r.problem_id,
            "" if r.pct is None else str(r.pct),
            str(r.noise),
            r.method,
            f"{r.time_s:.4f}" if include_timings and r.time_s is not None else "",
            "" if r.correct is None else str(int(r.correct)),
            str(r.spread),
            "" if r.u is None else f"{r.u:.6f}",
            ";".join(str(i) for i in r.selected),
            r.status,
        ]))
    return "\n".join(out) + "\n"


def format_aggregates(aggs: tuple[AggregateRow, ...]) -> str:
    out = ["domain,pct,noise,method,n,time_mean_s,acc_pct,spread_mean"]
    for a in aggs:
        out.append(",".join([
            a.domain,
            "" if a.pct is None else str(a.pct),
            str(a.noise),
            a.method,
            str(a.n),
            f"{a.time_mean_s:.4f}",
            "" if a.accuracy is None else f"{100 * a.accuracy:.2f}",
            f"{a.spread_mean:.2f}",
        ]))
    return "\n".join(out) + "\n"


def format_aggregate_table(aggs: tuple[AggregateRow, ...]) -> str:
    header = f"{'domain':<12} {'% obs':>5} {'noise':>5} {'method':<8} {'n':>4} " \
             f"{'Time':>8} {'Acc %':>7} {'S in G':>7}"
    lines = [header, "-" * len(header)]
    for a in aggs:
        acc = "" if a.accuracy is None else f"{100 * a.accuracy:.1f}"
        pct = "" if a.pct is None else str(a.pct)
        lines.append(f"{a.domain:<12} {pct:>5} {a.noise:>5} {a.method:<8} {a.n:>4} "
                     f"{a.time_mean_s:>8.3f} {acc:>7} {a.spread_mean:>7.2f}")
    return "\n".join(lines)


def write_suite_outputs(result: SuiteResult, out_dir: str | Path, spec: SuiteSpec) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows_path = out / "rows.csv"
    agg_path = out / "aggregate.csv"
    rows_path.write_text(format_rows(result.rows, spec.timings), encoding="utf-8")
    agg_path.write_text(format_aggregates(result.aggregates), encoding="utf-8")
    return rows_path, agg_path


def materialize_suite(spec: SuiteSpec, out_dir: str | Path, *, pct: int = 100,
                      noise: int = 0) -> list[Path]:
    """Write generated bundles (with sampled obs.dat) as bundle directories."""
    spec.validate()
    out = Path(out_dir)
    written: list[Path] = []
    for family in spec.families:
        for j in range(spec.per_family):
            base_seed = stable_seed(spec.seed, family, j)
            bundle = GENERATORS[family](random.Random(base_seed))
            parsed = bundle_from_texts(dict(bundle.files), require_obs=False)
            problem = generate_problem(parsed.task, parsed.hyps, parsed.hyps.hidden,
                                       pct, noise, seed=stable_seed(base_seed, pct))
            obs_text = "".join(parsed.task.actions[a].text() + "\n" for a in problem.obs.obs)
            files = dict(bundle.files)
            files["obs.dat"] = obs_text
            target = out / f"{family}-{j:03d}"
            write_bundle(target, files)
            written.append(target)
    return written
