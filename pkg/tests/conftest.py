import numpy as np
import pytest

from bosonbin import rng as rng_policy
from bosonbin.fock import enumerate_configurations


@pytest.fixture(scope="session")
def space_4_2():
    return enumerate_configurations(4, 2)


@pytest.fixture(scope="session")
def space_11_3():
    return enumerate_configurations(11, 3)


@pytest.fixture()
def rng():
    return rng_policy.generator(12345)


@pytest.fixture()
def random_complex():
    gen = rng_policy.generator(999)

    def make(n):
        return gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))

    return make


def assert_close(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"
