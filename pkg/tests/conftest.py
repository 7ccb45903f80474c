import os

import pytest

from kgalloc.ontology import load_ontology
from kgalloc.scenario import open_session, resolve_scenario


@pytest.fixture(scope="session")
def demo_dir():
    return os.path.dirname(resolve_scenario("demo"))


@pytest.fixture()
def demo_session():
    """Fresh demo session: graph loaded, nothing simulated yet."""
    return open_session("demo")


@pytest.fixture()
def demo_ontology(demo_dir):
    return load_ontology(os.path.join(demo_dir, "ontology.onto"))


@pytest.fixture()
def decision_session():
    """Demo session stepped to the point where task-7 waits for a decision."""
    session = open_session("demo", cases=0, mode="human")
    session.sim.step()
    assert session.sim.pending, "bootstrap task should be parked"
    return session
