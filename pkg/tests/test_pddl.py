from __future__ import annotations

import pytest

from explan import fixture_path
from explan.errors import (
    ArityMismatch,
    GroundingError,
    PddlSyntaxError,
    TypeMismatch,
    UndeclaredSymbol,
    UnsupportedFeature,
)
from explan.grounding import ground
from explan.pddl import (
    domain_to_pddl,
    parse_domain,
    parse_problem,
    problem_to_pddl,
)

MINIMAL_DOMAIN = """
(define (domain mini)
  (:predicates (done))
  (:action finish
    :parameters ()
    :precondition (and)
    :effect (done)))
"""

TYPED_DOMAIN = """
(define (domain typed)
  (:requirements :strips :typing)
  (:types truck)
  (:predicates (moved ?t - truck))
  (:action move
    :parameters (?t - truck)
    :precondition (and)
    :effect (moved ?t)))
"""


def test_minimal_domain_defaults_unit_cost():
    ast = parse_domain(MINIMAL_DOMAIN)
    assert len(ast.schemas) == 1
    assert ast.schemas[0].cost == 1
    assert ast.schemas[0].params == ()


def test_adl_requirement_rejected():
    text = MINIMAL_DOMAIN.replace("(:predicates", "(:requirements :adl)\n  (:predicates")
    with pytest.raises(UnsupportedFeature) as err:
        parse_domain(text)
    assert ":adl" in str(err.value)


def test_rover_domain_has_nine_schemas():
    ast = parse_domain(fixture_path("rover-domain.pddl").read_text())
    assert len(ast.schemas) == 9
    assert {s.name for s in ast.schemas} == {
        "navigate", "sample_soil", "sample_rock", "drop", "calibrate",
        "take_image", "communicate_soil_data", "communicate_rock_data",
        "communicate_image_data",
    }


def test_barman_domain_has_twelve_schemas():
    ast = parse_domain(fixture_path("barman-domain.pddl").read_text())
    assert len(ast.schemas) == 12


@pytest.mark.parametrize("construct", [
    ":precondition (or (done) (done))",
    ":precondition (not (done))",
    ":precondition (forall (?x) (done))",
    ":effect (when (done) (done))",
])
def test_disjunctive_and_quantified_constructs_rejected(construct):
    text = MINIMAL_DOMAIN.replace(":precondition (and)", construct) \
        if construct.startswith(":precondition") \
        else MINIMAL_DOMAIN.replace(":effect (done)", construct)
    with pytest.raises(UnsupportedFeature):
        parse_domain(text)


def test_undeclared_predicate_rejected():
    text = MINIMAL_DOMAIN.replace(":effect (done)", ":effect (finished)")
    with pytest.raises(UndeclaredSymbol):
        parse_domain(text)


def test_wrong_arity_rejected():
    text = MINIMAL_DOMAIN.replace(":precondition (and)", ":precondition (done ?x)")
    with pytest.raises((ArityMismatch, UndeclaredSymbol)):
        parse_domain(text)


def test_empty_init_single_goal_problem():
    ast = parse_problem("(define (problem p) (:domain mini) (:init) (:goal (done)))")
    assert ast.objects == ()
    assert ast.init == ()
    assert ast.goal == (("done",),)


def test_negated_goal_rejected():
    with pytest.raises(UnsupportedFeature):
        parse_problem(
            "(define (problem p) (:domain mini) (:init) (:goal (not (done))))")


def test_minirover_problem_counts():
    ast = parse_problem(fixture_path("minirover-problem.pddl").read_text())
    assert len(ast.objects) == 0
    assert len(ast.init) == 0
    assert len(ast.goal) == 1


def test_problem_requires_domain_declaration():
    with pytest.raises(PddlSyntaxError):
        parse_problem("(define (problem p) (:init) (:goal (done)))")


def test_syntax_error_carries_position():
    with pytest.raises(PddlSyntaxError) as err:
        parse_domain("(define (domain bad)\n  (:action)")
    assert "line" in str(err.value)


# -- grounding -------------------------------------------------------------------


def test_parameterless_schema_grounds_to_one_action():
    dom = parse_domain(MINIMAL_DOMAIN)
    prob = parse_problem("(define (problem p) (:domain mini) (:init) (:goal (done)))")
    task = ground(dom, prob)
    assert task.action_names == ("finish",)


def test_schema_with_three_objects_grounds_to_three_actions():
    dom = parse_domain(TYPED_DOMAIN)
    prob = parse_problem(
        "(define (problem p) (:domain typed) (:objects t1 t2 t3 - truck)"
        " (:init) (:goal (moved t1)))")
    task = ground(dom, prob)
    assert task.action_names == ("move t1", "move t2", "move t3")


def test_minirover2_grounds_to_six_actions_six_facts():
    dom = parse_domain(fixture_path("minirover2-domain.pddl").read_text())
    prob = parse_problem(fixture_path("minirover2-problem.pddl").read_text())
    task = ground(dom, prob)
    assert len(task.action_names) == 6
    assert len(task.fact_names) == 6


def test_grounding_is_deterministic():
    dom = parse_domain(fixture_path("rover-domain.pddl").read_text())
    prob = parse_problem(fixture_path("rover-p1-problem.pddl").read_text())
    a, b = ground(dom, prob), ground(dom, prob)
    assert a.fact_names == b.fact_names
    assert a.action_names == b.action_names
    assert a.model == b.model


def test_grounding_substitution_soundness():
    dom = parse_domain(fixture_path("rover-domain.pddl").read_text())
    prob = parse_problem(fixture_path("rover-p1-problem.pddl").read_text())
    task = ground(dom, prob)
    schemas = {s.name: s for s in dom.schemas}
    for action in task.model.actions:
        head, *args = action.name.split(" ")
        schema = schemas[head]
        binding = dict(zip((v for v, _ in schema.params), args))

        def atoms(group):
            return {" ".join((a[0], *(binding[x] for x in a[1:]))) for a in group}

        assert {task.fact_names[i] for i in action.pre} == atoms(schema.pre)
        assert {task.fact_names[i] for i in action.add} == atoms(schema.add)
        # deletes may lose overlap with adds (delete-then-add semantics)
        assert {task.fact_names[i] for i in action.delete} == \
            atoms(schema.delete) - atoms(schema.add)


def test_type_mismatch_in_init_rejected():
    dom = parse_domain(TYPED_DOMAIN)
    prob = parse_problem(
        "(define (problem p) (:domain typed) (:objects t1 - truck b1 - object)"
        " (:init (moved b1)) (:goal (moved t1)))")
    with pytest.raises(TypeMismatch):
        ground(dom, prob)


def test_zero_cost_action_rejected_at_grounding():
    text = """
(define (domain zc)
  (:requirements :action-costs)
  (:predicates (done))
  (:functions (total-cost))
  (:action freebie
    :parameters ()
    :precondition (and)
    :effect (and (done) (increase (total-cost) 0))))
"""
    dom = parse_domain(text)
    prob = parse_problem("(define (problem p) (:domain zc) (:init) (:goal (done)))")
    with pytest.raises(GroundingError):
        ground(dom, prob)


# -- round trips -----------------------------------------------------------------


@pytest.mark.parametrize("name", [
    "minirover-domain.pddl", "minirover2-domain.pddl", "tieworld-domain.pddl",
    "reshuffle-domain.pddl", "rover-domain.pddl", "barman-domain.pddl",
])
def test_domain_print_parse_round_trip(name):
    ast = parse_domain(fixture_path(name).read_text())
    assert parse_domain(domain_to_pddl(ast)) == ast


@pytest.mark.parametrize("name", [
    "minirover-problem.pddl", "rover-p1-problem.pddl", "barman-p1-problem.pddl",
])
def test_problem_print_parse_round_trip(name):
    ast = parse_problem(fixture_path(name).read_text())
    assert parse_problem(problem_to_pddl(ast)) == ast
