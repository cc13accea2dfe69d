import pytest

from ocgr.errors import PddlParseError
from ocgr.generators import demo_grid_bundle, write_bundle
from ocgr.inputs import (bundle_from_texts, load_bundle, parse_hypotheses,
                         parse_observations, parse_real_hyp)


def test_observation_counts(demo_bundle):
    task = demo_bundle.task
    a = task.actions[0].name
    b = task.actions[1].name
    obs = parse_observations(f"({a})\n({b})\n({a})\n", task)
    assert len(obs) == 3
    assert obs.counts == {0: 2, 1: 1}
    assert sum(obs.counts.values()) == len(obs)


def test_observation_empty_file(demo_bundle):
    obs = parse_observations("\n   \n; comment\n", demo_bundle.task)
    assert len(obs) == 0 and obs.counts == {}


def test_observation_unknown_action(demo_bundle):
    with pytest.raises(PddlParseError, match="line 2"):
        parse_observations("(move-up c_0_0 c_0_1)\n(teleport x)\n", demo_bundle.task)


def test_observation_multiset_invariant(demo_bundle):
    obs = demo_bundle.obs
    assert sum(obs.counts.values()) == len(obs) == 7


def test_hypotheses_two_lines(demo_bundle):
    hyps = parse_hypotheses("(at c_1_2)\n(at c_0_3)\n", demo_bundle.task)
    assert len(hyps) == 2
    assert hyps.hidden is None


def test_hypotheses_duplicates_collapse(demo_bundle):
    hyps = parse_hypotheses("(at c_1_2),(at c_1_2)\n", demo_bundle.task)
    assert len(hyps.goals[0]) == 1


def test_hypotheses_unknown_fluent(demo_bundle):
    with pytest.raises(PddlParseError, match="line 1"):
        parse_hypotheses("(at nowhere)\n", demo_bundle.task)


def test_real_hyp_matches_second_line(demo_bundle):
    hyps = parse_hypotheses("(at c_1_2)\n(at c_0_3)\n", demo_bundle.task)
    assert parse_real_hyp("(at c_0_3)\n", hyps) == 1


def test_real_hyp_must_match_verbatim(demo_bundle):
    hyps = parse_hypotheses("(at c_1_2)\n", demo_bundle.task)
    with pytest.raises(PddlParseError, match="does not match"):
        parse_real_hyp("(at c_9_9)\n", hyps)


def test_demo_bundle_contents(demo_bundle):
    assert demo_bundle.hyps.hidden == 0
    assert len(demo_bundle.hyps) == 2
    assert len(demo_bundle.obs) == 7
    assert demo_bundle.task.num_actions == 45


def test_load_bundle_from_directory(tmp_path):
    write_bundle(tmp_path / "demo", demo_grid_bundle().files)
    b = load_bundle(tmp_path / "demo")
    mem = bundle_from_texts(dict(demo_grid_bundle().files))
    assert b.task.facts == mem.task.facts
    assert b.obs.obs == mem.obs.obs
    assert b.hyps.hidden == 0


def test_load_bundle_missing_file(tmp_path):
    files = dict(demo_grid_bundle().files)
    del files["obs.dat"]
    write_bundle(tmp_path / "partial", files)
    with pytest.raises(PddlParseError, match="obs.dat"):
        load_bundle(tmp_path / "partial")
    # but fine when observations are not required
    b = load_bundle(tmp_path / "partial", require_obs=False)
    assert len(b.obs) == 0


def test_observations_multiple_groups_per_line(demo_bundle):
    task = demo_bundle.task
    a, b = task.actions[0].name, task.actions[1].name
    obs = parse_observations(f"({a})({b})({a})\n", task)
    assert len(obs) == 3 and obs.counts == {0: 2, 1: 1}
