import numpy as np
import pytest

from tsirelson_lab.config import Settings
from tsirelson_lab.vectors import FinVec


@pytest.fixture
def vec():
    """vec(3, 4, 5) -> e_3 + e_4 + e_5; vec({2: '1/2'}) -> 1/2 e_2."""

    def build(*args):
        if len(args) == 1 and isinstance(args[0], dict):
            return FinVec(args[0])
        return FinVec.ones(args)

    return build


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
