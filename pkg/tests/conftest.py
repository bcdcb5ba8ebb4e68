import numpy as np
import pytest

from curvcert.catalog import hopf_s3_s2, hopf_s7_s4


@pytest.fixture(scope="session")
def hopf_s3():
    """(NumericSubmersion, ClosedFormSubmersionData) for S^3 -> S^2(1/2)."""
    return hopf_s3_s2()


@pytest.fixture(scope="session")
def hopf_s7():
    """(NumericSubmersion, ClosedFormSubmersionData) for S^7 -> S^4(1/2)."""
    return hopf_s7_s4()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
