import pytest

from ionaddress.clifford import build_clifford_table
from ionaddress.synth import IonSet, synthesize_library


@pytest.fixture(scope="session")
def table():
    return build_clifford_table()


@pytest.fixture
def ions():
    return IonSet.from_ratios(1.0, 0.80)


@pytest.fixture(scope="session")
def library():
    return synthesize_library(IonSet.from_ratios(1.0, 0.80), seed=0)
