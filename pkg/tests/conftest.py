from pathlib import Path

import pytest

from maxitive import PossibilityDistribution, SampleSpace, Variable
from maxitive.scenario import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def abc():
    return SampleSpace(("a", "b", "c"))


@pytest.fixture
def s1_dist(abc):
    return PossibilityDistribution(abc, (1.0, 0.5, 0.25))


@pytest.fixture
def s1_vars(abc):
    return [Variable(abc, (2, 4, 8)), Variable(abc, (5, 1, 0))]


@pytest.fixture
def s1():
    return load_scenario(SCENARIOS / "s1.yaml")


@pytest.fixture
def s2():
    return load_scenario(SCENARIOS / "s2.yaml")


@pytest.fixture
def s3():
    return load_scenario(SCENARIOS / "s3.yaml")


@pytest.fixture
def constant():
    return load_scenario(SCENARIOS / "constant.yaml")
