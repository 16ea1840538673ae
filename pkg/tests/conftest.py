from __future__ import annotations

import pytest

from explan import fixture_path
from explan.bench import load_problem, load_task


def _fx(name: str) -> str:
    return str(fixture_path(name))


@pytest.fixture(scope="session")
def minirover():
    return load_problem(_fx("minirover-domain.pddl"), _fx("minirover-problem.pddl"),
                        human_domain_path=_fx("minirover-human.pddl"))


@pytest.fixture(scope="session")
def minirover2():
    return load_problem(_fx("minirover2-domain.pddl"), _fx("minirover2-problem.pddl"),
                        removal_list_path=_fx("minirover2-removals.txt"))


@pytest.fixture(scope="session")
def tieworld():
    return load_problem(_fx("tieworld-domain.pddl"), _fx("tieworld-problem.pddl"),
                        human_domain_path=_fx("tieworld-human.pddl"))


@pytest.fixture(scope="session")
def reshuffle():
    return load_problem(_fx("reshuffle-domain.pddl"), _fx("reshuffle-problem.pddl"),
                        removal_list_path=_fx("reshuffle-removals.txt"))


@pytest.fixture(scope="session")
def depot():
    return load_problem(_fx("depot-domain.pddl"), _fx("depot-problem.pddl"),
                        removal_list_path=_fx("depot-removals.txt"))


@pytest.fixture(scope="session")
def rover():
    return load_problem(_fx("rover-domain.pddl"), _fx("rover-p1-problem.pddl"),
                        removal_list_path=_fx("rover-p1-removals.txt"))


@pytest.fixture(scope="session")
def barman():
    return load_problem(_fx("barman-domain.pddl"), _fx("barman-p1-problem.pddl"),
                        removal_list_path=_fx("barman-p1-removals.txt"))


@pytest.fixture(scope="session")
def minirover_task():
    return load_task(_fx("minirover-domain.pddl"), _fx("minirover-problem.pddl"))


@pytest.fixture(scope="session")
def all_problems(minirover, minirover2, tieworld, reshuffle, depot, rover, barman):
    return {
        "minirover": minirover,
        "minirover2": minirover2,
        "tieworld": tieworld,
        "reshuffle": reshuffle,
        "depot": depot,
        "rover-p1": rover,
        "barman-p1": barman,
    }
