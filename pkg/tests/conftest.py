"""Shared fixtures and small task builders for the test suite."""

from __future__ import annotations

import random

import pytest

from ocgr.generators import demo_grid_bundle
from ocgr.grounding import GroundAction, PlanningTask
from ocgr.inputs import Bundle, bundle_from_texts
from ocgr.pddl import parse_domain, parse_problem

CHAIN_DOMAIN = """\
(define (domain chain)
  (:requirements :strips)
  (:predicates (p) (q))
  (:action a
    :parameters ()
    :precondition (p)
    :effect (and (q) (not (p)))))
"""

CHAIN_PROBLEM = """\
(define (problem chain-1)
  (:domain chain)
  (:objects)
  (:init (p))
  (:goal (q)))
"""

MOVE_DOMAIN = """\
(define (domain mover)
  (:requirements :strips)
  (:predicates (at ?x) (visited ?x))
  (:action move
    :parameters (?a ?b)
    :precondition (at ?a)
    :effect (and (at ?b) (visited ?b) (not (at ?a)))))
"""


def chain_task() -> PlanningTask:
    dom = parse_domain(CHAIN_DOMAIN)
    prob = parse_problem(CHAIN_PROBLEM, dom)
    from ocgr.grounding import ground
    return ground(dom, prob)


@pytest.fixture(scope="session")
def chain() -> PlanningTask:
    return chain_task()


@pytest.fixture(scope="session")
def demo_bundle() -> Bundle:
    return bundle_from_texts(dict(demo_grid_bundle().files))


def make_micro_task(rng: random.Random, num_facts: int = 6, num_actions: int = 7,
                    walk: int = 5) -> PlanningTask:
    """Random tiny task whose goal lies on a random walk from init."""
    facts = tuple(f"(f{i})" for i in range(num_facts))
    actions = []
    for i in range(num_actions):
        pre = frozenset(rng.sample(range(num_facts), rng.randint(0, 2)))
        add = frozenset(rng.sample(range(num_facts), rng.randint(1, 2)))
        dels = frozenset(f for f in rng.sample(range(num_facts), rng.randint(0, 2))
                         if f not in add)
        actions.append(GroundAction(id=i, name=f"a{i}", pre=pre, adds=add, dels=dels))
    init = frozenset(rng.sample(range(num_facts), rng.randint(1, 3)))
    state = set(init)
    for _ in range(rng.randint(1, walk)):
        applicable = [a for a in actions if a.pre <= state]
        if not applicable:
            break
        a = rng.choice(applicable)
        state = (state - a.dels) | a.adds
    goal = frozenset(rng.sample(sorted(state), min(len(state), rng.randint(1, 2))))
    return PlanningTask(facts=facts, actions=tuple(actions), init=init, goal=goal)


def plan_counts(task: PlanningTask, steps) -> list[int]:
    counts = [0] * task.num_actions
    for a in steps:
        counts[a] += 1
    return counts
