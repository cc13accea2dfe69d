import pytest

from conftest import CHAIN_DOMAIN, CHAIN_PROBLEM, MOVE_DOMAIN
from ocgr.errors import PddlParseError, UnsupportedFeatureError
from ocgr.generators import BLOCKS_DOMAIN, LOGISTICS_DOMAIN
from ocgr.pddl import parse_domain, parse_problem


def test_minimal_move_domain():
    dom = parse_domain(MOVE_DOMAIN)
    assert dom.name == "mover"
    assert len(dom.operators) == 1
    schema = dom.operators[0]
    assert schema.name == "move"
    assert [v for v, _ in schema.params] == ["?a", "?b"]
    assert dom.predicates["at"] == ("object",)


def test_blocks_domain_has_four_schemas():
    dom = parse_domain(BLOCKS_DOMAIN)
    assert [s.name for s in dom.operators] == ["pick-up", "put-down", "stack", "unstack"]
    assert set(dom.predicates) == {"on", "ontable", "clear", "handempty", "holding"}


def test_typed_logistics_domain():
    dom = parse_domain(LOGISTICS_DOMAIN)
    assert {t for t in dom.types} == {"package", "truck", "airplane", "location", "city"}
    drive = next(s for s in dom.operators if s.name == "drive")
    assert drive.params == (("?t", "truck"), ("?from", "location"),
                            ("?to", "location"), ("?c", "city"))


def test_conditional_effects_rejected():
    text = """(define (domain bad) (:predicates (p) (q))
      (:action a :parameters () :precondition (p)
        :effect (when (p) (q))))"""
    with pytest.raises(UnsupportedFeatureError, match="conditional"):
        parse_domain(text)


def test_negative_preconditions_rejected():
    text = """(define (domain bad) (:predicates (p) (q))
      (:action a :parameters () :precondition (not (q)) :effect (p)))"""
    with pytest.raises(UnsupportedFeatureError, match="negative-preconditions"):
        parse_domain(text)


def test_unsupported_requirement_named():
    text = "(define (domain bad) (:requirements :strips :adl))"
    with pytest.raises(UnsupportedFeatureError, match=":adl"):
        parse_domain(text)


def test_quantified_precondition_rejected():
    text = """(define (domain bad) (:predicates (p ?x))
      (:action a :parameters (?x) :precondition (forall (?y) (p ?y)) :effect (p ?x)))"""
    with pytest.raises(UnsupportedFeatureError):
        parse_domain(text)


def test_syntax_error_carries_position():
    with pytest.raises(PddlParseError) as err:
        parse_domain("(define (domain x) (:predicates (p)")
    assert "line" in str(err.value)


def test_undeclared_predicate_in_action():
    text = """(define (domain bad) (:predicates (p))
      (:action a :parameters () :precondition (p) :effect (q)))"""
    with pytest.raises(PddlParseError, match="undeclared predicate 'q'"):
        parse_domain(text)


def test_arity_mismatch_in_action():
    text = """(define (domain bad) (:predicates (p ?x))
      (:action a :parameters (?x) :precondition (p ?x ?x) :effect (p ?x)))"""
    with pytest.raises(PddlParseError, match="arity"):
        parse_domain(text)


def test_duplicate_predicate_rejected():
    with pytest.raises(PddlParseError, match="duplicate predicate"):
        parse_domain("(define (domain bad) (:predicates (p) (p ?x)))")


def test_problem_with_goal():
    dom = parse_domain(CHAIN_DOMAIN)
    prob = parse_problem(CHAIN_PROBLEM, dom)
    assert prob.goal == (("q",),)
    assert prob.init == (("p",),)


def test_template_problem_without_goal():
    dom = parse_domain(CHAIN_DOMAIN)
    prob = parse_problem("(define (problem t) (:domain chain) (:init (p)))", dom)
    assert prob.goal == ()


def test_init_with_undeclared_predicate():
    dom = parse_domain(CHAIN_DOMAIN)
    with pytest.raises(PddlParseError, match="undeclared predicate"):
        parse_problem("(define (problem t) (:domain chain) (:init (zzz)))", dom)


def test_undeclared_object_type():
    dom = parse_domain(LOGISTICS_DOMAIN)
    with pytest.raises(PddlParseError, match="undeclared type"):
        parse_problem("(define (problem t) (:domain logi) (:objects x - widget))", dom)


def test_unknown_object_in_atom():
    dom = parse_domain(MOVE_DOMAIN)
    with pytest.raises(PddlParseError, match="unknown term"):
        parse_problem("(define (problem t) (:domain mover) (:objects x) (:init (at y)))", dom)


def test_negated_init_atom_rejected():
    dom = parse_domain(CHAIN_DOMAIN)
    with pytest.raises(PddlParseError, match="negated"):
        parse_problem("(define (problem t) (:domain chain) (:init (not (p))))", dom)


def test_case_insensitive_parsing():
    dom = parse_domain(CHAIN_DOMAIN.replace("(p)", "(P)").replace("chain", "Chain"))
    assert dom.name == "chain"
    assert "p" in dom.predicates
