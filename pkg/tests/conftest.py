import pytest

from nilprob.algebra import AlgebraParams
from nilprob.groups import AlgebraGroup
from nilprob.tables import corpus


@pytest.fixture(scope="session")
def params21() -> AlgebraParams:
    return AlgebraParams.hyperbolic(2, 1)


@pytest.fixture(scope="session")
def params22() -> AlgebraParams:
    return AlgebraParams.hyperbolic(2, 2)


@pytest.fixture(scope="session")
def params31() -> AlgebraParams:
    return AlgebraParams.hyperbolic(3, 1)


@pytest.fixture(scope="session")
def family21(params21) -> AlgebraGroup:
    return AlgebraGroup(params21)


@pytest.fixture(scope="session")
def family22(params22) -> AlgebraGroup:
    return AlgebraGroup(params22)


@pytest.fixture(scope="session")
def corpus_groups() -> dict:
    return corpus()
