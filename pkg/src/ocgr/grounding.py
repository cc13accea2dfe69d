"""Grounding of lifted domains into propositional planning tasks."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import cached_property
from itertools import product

from .errors import GroundingError
from .pddl import DomainDef, ProblemDef, atom_text

log = logging.getLogger(__name__)

DEFAULT_GROUND_CAP = 100_000


def _env_cap(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


@dataclass(frozen=True)
class GroundAction:
    """Fully instantiated action over fact indices."""

    id: int
    name: str
    pre: frozenset[int]
    adds: frozenset[int]
    dels: frozenset[int]
    cost: int = 1

    def text(self) -> str:
        return f"({self.name})"


@dataclass(frozen=True)
class PlanningTask:
    """Immutable grounded STRIPS task.

    ``facts`` is the dense atom table; ``init`` and ``goal`` are fact-index
    sets. ``goal`` may be empty (hypothesis-template problems).
    """

    facts: tuple[str, ...]
    actions: tuple[GroundAction, ...]
    init: frozenset[int]
    goal: frozenset[int]

    @property
    def num_facts(self) -> int:
        return len(self.facts)

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    @cached_property
    def fact_index(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.facts)}

    @cached_property
    def action_index(self) -> dict[str, int]:
        return {a.name: a.id for a in self.actions}

    @cached_property
    def adders(self) -> tuple[tuple[int, ...], ...]:
        """For each fact, the ids of actions adding it."""
        by_fact: list[list[int]] = [[] for _ in range(len(self.facts))]
        for a in self.actions:
            for f in sorted(a.adds):
                by_fact[f].append(a.id)
        return tuple(tuple(v) for v in by_fact)

    @cached_property
    def consumers(self) -> tuple[tuple[int, ...], ...]:
        """For each fact, the ids of actions with it in both pre and del."""
        by_fact: list[list[int]] = [[] for _ in range(len(self.facts))]
        for a in self.actions:
            for f in sorted(a.dels & a.pre):
                by_fact[f].append(a.id)
        return tuple(tuple(v) for v in by_fact)

    @cached_property
    def costs(self) -> tuple[int, ...]:
        return tuple(a.cost for a in self.actions)


def relaxed_reachable(task: PlanningTask, from_facts: frozenset[int] | None = None
                      ) -> tuple[frozenset[int], frozenset[int]]:
    """Delete-relaxation fixpoint; returns (reachable facts, applicable action ids)."""
    reached = set(task.init if from_facts is None else from_facts)
    applicable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for a in task.actions:
            if a.id in applicable:
                continue
            if a.pre <= reached:
                applicable.add(a.id)
                new = a.adds - reached
                if new:
                    reached |= new
                    changed = True
    return frozenset(reached), frozenset(applicable)


def ground(dom: DomainDef, prob: ProblemDef, *, prune_unreachable: bool = True,
           max_actions: int | None = None) -> PlanningTask:
    """Instantiate every type-consistent schema application.

    Instantiations whose static preconditions (predicates never added or
    deleted) do not hold in the initial state are skipped. With
    ``prune_unreachable`` the action set is further restricted to actions
    applicable somewhere in the delete relaxation of the initial state; the
    fact table always covers all grounded atoms.
    """
    cap = max_actions if max_actions is not None else _env_cap("OCGR_GROUND_CAP", DEFAULT_GROUND_CAP)

    objects = list(dom.constants) + list(prob.objects)
    seen_objs = {o for o, _ in objects}
    if len(seen_objs) != len(objects):
        raise GroundingError("duplicate object name across :constants/:objects")

    def candidates(want: str) -> list[str]:
        return sorted(o for o, t in objects if dom.is_subtype(t, want))

    dynamic = {lit[0] for sch in dom.operators for lit in sch.add + sch.delete}
    init_atoms = [atom_text(lit) for lit in prob.init]
    init_set = set(init_atoms)

    fact_of: dict[str, int] = {}
    facts: list[str] = []

    def intern(atom: str) -> int:
        idx = fact_of.get(atom)
        if idx is None:
            idx = len(facts)
            fact_of[atom] = idx
            facts.append(atom)
        return idx

    for atom in init_atoms:
        intern(atom)
    for lit in prob.goal:
        intern(atom_text(lit))

    actions: list[GroundAction] = []
    overlap_dropped = 0
    for schema in dom.operators:
        pools = [candidates(t) for _, t in schema.params]
        var_pos = {v: i for i, (v, _) in enumerate(schema.params)}

        def instantiate(lit: tuple[str, ...], binding: tuple[str, ...]) -> str:
            args = [binding[var_pos[a]] if a.startswith("?") else a for a in lit[1:]]
            return atom_text((lit[0], *args))

        static_pre = [lit for lit in schema.pre if lit[0] not in dynamic]
        dynamic_pre = [lit for lit in schema.pre if lit[0] in dynamic]
        for binding in product(*pools):
            if any(instantiate(lit, binding) not in init_set for lit in static_pre):
                continue
            if len(actions) >= cap:
                raise GroundingError(
                    f"ground action cap exceeded ({cap}); raise OCGR_GROUND_CAP or simplify the task")
            pre = frozenset(intern(instantiate(lit, binding)) for lit in schema.pre)
            adds = frozenset(intern(instantiate(lit, binding)) for lit in schema.add)
            dels = frozenset(intern(instantiate(lit, binding)) for lit in schema.delete)
            if adds & dels:
                overlap_dropped += len(adds & dels)
                dels = dels - adds  # add wins, STRIPS semantics
            name = " ".join((schema.name,) + binding)
            actions.append(GroundAction(id=len(actions), name=name, pre=pre,
                                        adds=adds, dels=dels))
    if overlap_dropped:
        log.warning("dropped %d delete effects overlapping add effects", overlap_dropped)

    init_idx = frozenset(fact_of[a] for a in init_atoms)
    goal_idx = frozenset(fact_of[atom_text(lit)] for lit in prob.goal)
    task = PlanningTask(facts=tuple(facts), actions=tuple(actions),
                        init=init_idx, goal=goal_idx)
    if prune_unreachable:
        _, applicable = relaxed_reachable(task)
        if len(applicable) != len(actions):
            kept = [a for a in actions if a.id in applicable]
            renumbered = tuple(
                GroundAction(id=i, name=a.name, pre=a.pre, adds=a.adds, dels=a.dels, cost=a.cost)
                for i, a in enumerate(kept))
            task = PlanningTask(facts=tuple(facts), actions=renumbered,
                                init=init_idx, goal=goal_idx)
    return task
