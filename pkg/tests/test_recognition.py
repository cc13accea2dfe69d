import json
import random

import pytest

from conftest import make_micro_task
from ocgr.generators import CORRIDOR_DOMAIN
from ocgr.inputs import ObservationSequence, bundle_from_texts
from ocgr.oracle import Plan, optimal_cost
from ocgr.recognition import (INF, RecognizerConfig,
                              full_observation_guarantee_check,
                              observation_constraints, recognize,
                              recognize_delta, recognize_hc, report_from_dict,
                              report_to_dict, score_all, score_hypothesis,
                              uncertainty)


def _obs(*actions):
    return ObservationSequence(tuple(actions))


def test_observation_constraints_counts():
    cset = observation_constraints(_obs(0, 1, 0), num_actions=3)
    rows = {c.terms[0][0]: c.rhs for c in cset}
    assert rows == {0: 2, 1: 1}
    assert all(c.source == "observation" for c in cset)


def test_observation_constraints_empty():
    assert len(observation_constraints(_obs(), num_actions=3)) == 0


def test_observation_constraints_demo_full(demo_bundle):
    cset = observation_constraints(demo_bundle.obs, demo_bundle.task.num_actions)
    assert len(cset) == 7  # seven distinct observed moves, counts merged


def test_demo_grid_scores_full_obs(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    s0 = score_hypothesis(task, hyps.goals[0], obs)
    s1 = score_hypothesis(task, hyps.goals[1], obs)
    assert abs(s0.h - 3) <= 1e-6 and abs(s0.h_hc - 7) <= 1e-6 and abs(s0.delta - 4) <= 1e-6
    assert abs(s1.h - 3) <= 1e-6 and abs(s1.h_hc - 9) <= 1e-6 and abs(s1.delta - 6) <= 1e-6


def test_empty_obs_neutrality(demo_bundle):
    task, hyps = demo_bundle.task, demo_bundle.hyps
    for goal in hyps.goals:
        s = score_hypothesis(task, goal, _obs())
        assert s.h_hc == s.h and s.delta == 0
    report = recognize_delta(task, hyps, _obs(), use_uncertainty=True)
    assert report.selected == (0, 1)


def test_uncertainty_examples():
    from ocgr.recognition import HypothesisScore

    scores = (HypothesisScore(0, 3, 7, 4), HypothesisScore(1, 3, 9, 6))
    assert abs(uncertainty(scores, 1) - (1 + 6 / 7)) <= 1e-12
    assert abs(uncertainty(scores, 4) - (1 + 3 / 7)) <= 1e-12
    assert uncertainty(scores, 7) == 1.0


def test_uncertainty_all_infeasible():
    from ocgr.recognition import HypothesisScore

    scores = (HypothesisScore(0, INF, INF, INF),)
    assert uncertainty(scores, 3) is None


def test_uncertainty_zero_minimum():
    from ocgr.recognition import HypothesisScore

    scores = (HypothesisScore(0, 0, 0, 0),)
    assert uncertainty(scores, 0) == 1.0


def test_recognize_hc_demo_single_obs(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    report = recognize_hc(task, hyps, ObservationSequence(obs.obs[2:3]), use_uncertainty=True)
    assert report.selected == (0, 1)
    assert abs(report.uncertainty - (1 + 6 / 7)) <= 1e-9


def test_recognize_hc_threshold_follows_formula(demo_bundle):
    # with |O|=4: threshold = 7 * (1 + 3/7) = 10, so G1 at h_hc=9 stays in
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    report = recognize_hc(task, hyps, ObservationSequence(obs.obs[:4]), use_uncertainty=True)
    assert report.selected == (0, 1)
    report_flat = recognize_hc(task, hyps, ObservationSequence(obs.obs[:4]))
    assert report_flat.selected == (0,)


def test_recognize_hc_tie_kept():
    from ocgr.recognition import HypothesisScore, _select

    scores = (HypothesisScore(0, 2, 5, 3), HypothesisScore(1, 2, 5, 3))
    selected, u, fallback = _select(scores, "h_hc", False, 3, RecognizerConfig())
    assert selected == (0, 1) and u == 1.0 and fallback is None


def test_recognize_delta_demo_cases(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    full = recognize_delta(task, hyps, obs, use_uncertainty=True)
    assert full.selected == (0,) and full.uncertainty == 1.0
    one = recognize_delta(task, hyps, ObservationSequence(obs.obs[2:3]), use_uncertainty=True)
    assert one.selected == (0, 1)
    four = recognize_delta(task, hyps, ObservationSequence(obs.obs[:4]), use_uncertainty=True)
    assert four.selected == (0,)
    assert abs(four.uncertainty - (1 + 3 / 7)) <= 1e-9


def test_delta_zero_minimum_selects_only_zeros(demo_bundle):
    # empty observations: every delta is 0, threshold collapses to 0, all kept
    task, hyps = demo_bundle.task, demo_bundle.hyps
    report = recognize_delta(task, hyps, _obs(), use_uncertainty=True)
    assert report.selected == (0, 1)
    assert all(s.delta == 0 for s in report.scores)


def test_uncertainty_selection_is_superset(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    for k in (1, 2, 4, 7):
        o = ObservationSequence(obs.obs[:k])
        for plain, widened in ((recognize_hc(task, hyps, o),
                                recognize_hc(task, hyps, o, use_uncertainty=True)),
                               (recognize_delta(task, hyps, o),
                                recognize_delta(task, hyps, o, use_uncertainty=True))):
            assert set(widened.selected) >= set(plain.selected)
            assert widened.uncertainty >= 1.0


def test_dominance_on_random_tasks():
    rng = random.Random(13)
    for _ in range(30):
        task = make_micro_task(rng)
        opt = optimal_cost(task, task.goal, cap=100_000)
        if opt.status != "optimal":
            continue
        obs = ObservationSequence(opt.plan.steps[: rng.randint(0, len(opt.plan.steps))])
        s = score_hypothesis(task, task.goal, obs)
        if s.h != INF and s.h_hc != INF:
            assert s.h_hc >= s.h - 1e-6
            assert s.delta >= -1e-6


ONE_WAY_BUNDLE = {
    "domain.pddl": CORRIDOR_DOMAIN,
    "template.pddl": ("(define (problem fork) (:domain corridor)"
                      " (:objects s0 l1 l2 r1 r2 - node)"
                      " (:init (at s0) (linked s0 l1) (linked l1 l2)"
                      " (linked s0 r1) (linked r1 r2)))"),
    "hyps.dat": "(at l2)\n(at r2)\n",
    "real_hyp.dat": "(at l2)\n",
}


def test_one_way_fork_infeasible_noise():
    """A noisy action on the other one-way branch makes both goals infeasible."""
    b = bundle_from_texts(dict(ONE_WAY_BUNDLE), require_obs=False)
    walk_l = b.task.action_index["walk s0 l1"]
    walk_r = b.task.action_index["walk s0 r1"]
    obs = _obs(walk_l, walk_r)
    scores, _ = score_all(b.task, b.hyps, obs, RecognizerConfig())
    assert all(s.h_hc == INF for s in scores)
    assert all(s.h != INF for s in scores)
    report = recognize_delta(b.task, b.hyps, obs, use_uncertainty=True)
    assert report.selected == ()
    assert report.uncertainty is None
    assert report.all_infeasible
    assert report.fallback_ranking is not None


def test_unreachable_hypothesis_scores_infinite():
    b = bundle_from_texts(dict(ONE_WAY_BUNDLE), require_obs=False)
    hyps2 = type(b.hyps)(goals=(b.hyps.goals[0], frozenset({b.task.fact_index["(at s0)"]})),
                         lines=("(at l2)", "(at s0)"), hidden=0)
    # goal (at s0) is satisfiable; make an impossible one by demanding both tips
    impossible = frozenset(b.hyps.goals[0] | b.hyps.goals[1])
    s = score_hypothesis(b.task, impossible, _obs())
    assert s.h == INF and s.h_hc == INF and s.delta == INF
    del hyps2


def test_full_observation_guarantee_chain(chain):
    from ocgr.inputs import GoalHypotheses

    hyps = GoalHypotheses(goals=(chain.goal,), lines=("(q)",), hidden=0)
    assert full_observation_guarantee_check(chain, hyps, Plan((0,), 1), 0)


def test_full_observation_guarantee_demo_suboptimal(demo_bundle):
    plan = Plan(demo_bundle.obs.obs, 7)  # valid but non-optimal for G0
    assert full_observation_guarantee_check(demo_bundle.task, demo_bundle.hyps, plan, 0)


def test_full_observation_guarantee_random_tasks():
    rng = random.Random(37)
    from ocgr.inputs import GoalHypotheses

    passed = 0
    while passed < 25:
        task = make_micro_task(rng)
        opt = optimal_cost(task, task.goal, cap=100_000)
        if opt.status != "optimal":
            continue
        decoy = frozenset(rng.sample(range(task.num_facts), 1))
        hyps = GoalHypotheses(goals=(task.goal, decoy), lines=("(g)", "(d)"), hidden=0)
        assert full_observation_guarantee_check(task, hyps, opt.plan, 0)
        passed += 1


def test_full_observation_rejects_invalid_plan(chain):
    from ocgr.inputs import GoalHypotheses

    hyps = GoalHypotheses(goals=(chain.goal,), lines=("(q)",), hidden=0)
    with pytest.raises(ValueError, match="not valid"):
        full_observation_guarantee_check(chain, hyps, Plan((0, 0), 2), 0)


def test_report_json_round_trip(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    report = recognize(task, hyps, obs, "delta-u")
    data = json.loads(json.dumps(report_to_dict(report)))
    back = report_from_dict(data)
    assert back.selected == report.selected
    assert back.method == report.method
    assert back.obs_len == report.obs_len
    assert back.uncertainty == report.uncertainty
    assert back.scores == report.scores
    assert back.timings == report.timings


def test_report_json_round_trip_with_infinities():
    b = bundle_from_texts(dict(ONE_WAY_BUNDLE), require_obs=False)
    walk_l = b.task.action_index["walk s0 l1"]
    walk_r = b.task.action_index["walk s0 r1"]
    report = recognize(b.task, b.hyps, _obs(walk_l, walk_r), "delta-u")
    back = report_from_dict(json.loads(json.dumps(report_to_dict(report))))
    assert back.scores == report.scores
    assert back.fallback_ranking == report.fallback_ranking


def test_concurrent_scoring_matches_sequential(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    seq, _ = score_all(task, hyps, obs, RecognizerConfig(workers=1))
    par, _ = score_all(task, hyps, obs, RecognizerConfig(workers=4))
    assert seq == par


def test_uncertainty_basis_h_variant(demo_bundle):
    task, hyps, obs = demo_bundle.task, demo_bundle.hyps, demo_bundle.obs
    one = ObservationSequence(obs.obs[2:3])
    cfg = RecognizerConfig(uncertainty_basis="h")
    report = recognize(task, hyps, one, "delta-u", cfg)
    # min h = 3, |O| = 1 -> U = 1 + 2/3
    assert abs(report.uncertainty - (1 + 2 / 3)) <= 1e-9
