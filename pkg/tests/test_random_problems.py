"""Randomized end-to-end checks over generated reconciliation problems.

Random models with random feature removals shake out interactions the
hand-built fixtures cannot: cost ties, delete effects, unsolvable human
models, multi-feature fixes, and degenerate empty plans.
"""

from __future__ import annotations

import random
from itertools import combinations

import pytest

from explan.model import COST, FeatureSet, apply_features, gamma, remove_features
from explan.oracle import min_complete_subsets
from explan.planner import matches_through, plan_optimal
from explan.reconcile import (
    ReconciliationProblem,
    mce,
    mce_random,
    oeg_ap,
    oeg_na,
    oeg_pp,
    verify_online,
)

from test_planner import random_model

SEEDS = range(24)


def _random_problem(seed: int) -> ReconciliationProblem | None:
    rng = random.Random(9000 + seed)
    model, init, goal = random_model(rng)
    if plan_optimal(model, init, goal) is None:
        return None
    removable = [f for f in gamma(model) if f.kind != COST]
    if not removable:
        return None
    rng.shuffle(removable)
    removed = FeatureSet(removable[: rng.randint(1, min(5, len(removable)))])
    human = remove_features(model, removed)
    return ReconciliationProblem.build(
        robot_model=model, human_model=human, init=init, goal=goal)


@pytest.fixture(scope="module")
def random_problems():
    problems = [p for p in map(_random_problem, SEEDS) if p is not None]
    assert len(problems) >= 10  # enough solvable instances to mean something
    return problems


def test_prefix_mode_verifies_everywhere(random_problems):
    for problem in random_problems:
        explanation = oeg_pp(problem)
        assert not explanation.fallback
        assert explanation == oeg_pp(problem)  # deterministic
        report = verify_online(problem, explanation)
        assert report.verified
        assert report.distance == 0.0


def test_exact_mode_verifies_and_survives_holdouts(random_problems):
    for problem in random_problems:
        if len(problem.missing) > 6:
            continue
        explanation = oeg_pp(problem, mode="exact")
        assert verify_online(problem, explanation).verified
        remaining = problem.missing
        for part in explanation.parts:
            holdout = remaining - part.features
            for k in range(len(holdout) + 1):
                for subset in combinations(tuple(holdout), k):
                    between = apply_features(
                        problem.human_model, problem.missing - FeatureSet(subset))
                    plan = plan_optimal(between, problem.init, problem.goal)
                    assert matches_through(problem.robot_plan, plan, part.step)
            remaining = remaining - part.features


def test_next_action_verifies_everywhere(random_problems):
    for problem in random_problems:
        explanation = oeg_na(problem)
        assert not explanation.unfixable_steps
        assert verify_online(problem, explanation).verified


def test_any_prefix_verifies_everywhere(random_problems):
    for problem in random_problems:
        explanation = oeg_ap(problem)
        report = verify_online(problem, explanation)
        assert report.verified


def test_mce_agrees_with_enumeration(random_problems):
    for problem in random_problems:
        assert mce(problem) in min_complete_subsets(problem)


def test_random_split_covers_mce_and_verifies(random_problems):
    for problem in random_problems:
        explanation = mce_random(problem, seed=5)
        assert explanation.features == mce(problem)
        assert explanation == mce_random(problem, seed=5)
        assert verify_online(problem, explanation).final_check


def test_parts_are_disjoint_subsets_of_the_diff(random_problems):
    for problem in random_problems:
        horizon = max(len(problem.robot_plan), 1)
        for generate in (oeg_pp, oeg_na, oeg_ap):
            explanation = generate(problem)
            assert explanation.features.issubset(problem.missing)
            seen = FeatureSet()
            last_step = 0
            for part in explanation.parts:
                assert not (part.features & seen)
                seen = seen | part.features
                assert last_step < part.step <= horizon
                last_step = part.step
