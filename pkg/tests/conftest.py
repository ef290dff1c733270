import pytest

from hellmann.analysis import load_reference
from hellmann.model import ScaledParams


@pytest.fixture(scope="session")
def table1_params():
    return ScaledParams(b=1.0, lam=0.01)


@pytest.fixture(scope="session")
def reference():
    return load_reference()


@pytest.fixture(scope="session")
def table1_report():
    from hellmann.analysis import reproduce_table1

    return reproduce_table1()
