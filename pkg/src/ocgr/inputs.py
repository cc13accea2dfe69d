"""Observation sequences, goal hypotheses, and problem bundle loading.

Bundle directory layout:
  domain.pddl    lifted domain
  template.pddl  problem; any :goal section is ignored
  hyps.dat       one hypothesis per line, fluents comma-separated
  obs.dat        one ground action per line, parenthesized
  real_hyp.dat   single line, verbatim copy of one hyps.dat line (optional)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import PddlParseError
from .grounding import PlanningTask, ground
from .pddl import DomainDef, ProblemDef, parse_domain, parse_problem

_GROUP = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class ObservationSequence:
    """Ordered observed action indices; multiplicity is what constraints use."""

    obs: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.obs)

    @cached_property
    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a in self.obs:
            out[a] = out.get(a, 0) + 1
        return out


@dataclass(frozen=True)
class GoalHypotheses:
    """Candidate goal fact sets, in file order; ``hidden`` indexes the actual one."""

    goals: tuple[frozenset[int], ...]
    lines: tuple[str, ...]
    hidden: int | None = None

    def __len__(self) -> int:
        return len(self.goals)

    def with_hidden(self, hidden: int) -> "GoalHypotheses":
        if not 0 <= hidden < len(self.goals):
            raise ValueError(f"hidden index {hidden} out of range")
        return GoalHypotheses(goals=self.goals, lines=self.lines, hidden=hidden)


def _normalize_group(body: str) -> str:
    return "(" + " ".join(body.lower().split()) + ")"


def parse_observations(text: str, task: PlanningTask) -> ObservationSequence:
    """Resolve one parenthesized ground action per nonempty line."""
    indices: list[int] = []
    by_name = task.action_index
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(";"):
            continue
        groups = _GROUP.findall(stripped)
        if not groups:
            raise PddlParseError(f"expected a parenthesized action, got '{stripped}'", lineno)
        for body in groups:
            name = " ".join(body.lower().split())
            idx = by_name.get(name)
            if idx is None:
                raise PddlParseError(
                    f"observation '({name})' names no ground action of the task "
                    "(domain/observation mismatch?)", lineno)
            indices.append(idx)
    return ObservationSequence(obs=tuple(indices))


def parse_hypotheses(text: str, task: PlanningTask) -> GoalHypotheses:
    """One hypothesis per line; each line a comma-separated conjunction of fluents."""
    goals: list[frozenset[int]] = []
    lines: list[str] = []
    fact_of = task.fact_index
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith(";"):
            continue
        groups = _GROUP.findall(stripped)
        if not groups:
            raise PddlParseError(f"expected parenthesized fluents, got '{stripped}'", lineno)
        goal: set[int] = set()
        for body in groups:
            atom = _normalize_group(body)
            idx = fact_of.get(atom)
            if idx is None:
                raise PddlParseError(
                    f"unknown fluent '{atom}': not a ground fact of this task", lineno)
            goal.add(idx)
        if not goal:
            raise PddlParseError("empty hypothesis", lineno)
        goals.append(frozenset(goal))
        lines.append(stripped)
    return GoalHypotheses(goals=tuple(goals), lines=tuple(lines))


def parse_real_hyp(text: str, hyps: GoalHypotheses) -> int:
    """Match the single real_hyp.dat line verbatim against hyps.dat lines."""
    stripped = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(stripped) != 1:
        raise PddlParseError("real_hyp.dat must contain exactly one line")
    try:
        return hyps.lines.index(stripped[0])
    except ValueError:
        raise PddlParseError(
            f"real hypothesis '{stripped[0]}' does not match any hyps.dat line") from None


@dataclass(frozen=True)
class Bundle:
    """A fully parsed problem bundle."""

    path: str
    domain: DomainDef
    problem: ProblemDef
    task: PlanningTask
    hyps: GoalHypotheses
    obs: ObservationSequence


def bundle_from_texts(texts: dict[str, str | None], *, path: str = "<memory>",
                      require_obs: bool = True, prune_unreachable: bool = True) -> Bundle:
    """Assemble a bundle from file contents keyed by bundle file name."""

    def read(name: str, required: bool = True) -> str | None:
        text = texts.get(name)
        if text is None and required:
            raise PddlParseError(f"missing bundle file: {path}/{name}")
        return text

    dom = parse_domain(read("domain.pddl"))
    prob = parse_problem(read("template.pddl"), dom)
    # hypotheses drive the recognition goals; template goals are ignored
    prob = ProblemDef(name=prob.name, domain_name=prob.domain_name,
                      objects=prob.objects, init=prob.init, goal=())
    task = ground(dom, prob, prune_unreachable=prune_unreachable)
    hyps = parse_hypotheses(read("hyps.dat"), task)
    real = read("real_hyp.dat", required=False)
    if real is not None:
        hyps = hyps.with_hidden(parse_real_hyp(real, hyps))
    obs_text = read("obs.dat", required=require_obs)
    obs = parse_observations(obs_text, task) if obs_text is not None else ObservationSequence(())
    return Bundle(path=path, domain=dom, problem=prob, task=task, hyps=hyps, obs=obs)


def load_bundle(directory: str | Path, *, require_obs: bool = True,
                prune_unreachable: bool = True) -> Bundle:
    d = Path(directory)
    texts: dict[str, str | None] = {}
    for name in ("domain.pddl", "template.pddl", "hyps.dat", "obs.dat", "real_hyp.dat"):
        p = d / name
        texts[name] = p.read_text(encoding="utf-8") if p.is_file() else None
    return bundle_from_texts(texts, path=str(d), require_obs=require_obs,
                             prune_unreachable=prune_unreachable)
