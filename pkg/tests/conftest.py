import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from noins.adversary import World  # noqa: E402
from noins.group import SECP256K1, TOY  # noqa: E402


class ZeroRng:
    """rng whose every draw is zero: drives the "degenerate randomness" hooks."""

    def randrange(self, a, b=None):
        return a if b is not None else 0

    def randbytes(self, n):
        return bytes(n)

    def random(self):
        return 0.0


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(params=["toy", "production"])
def group(request):
    return TOY if request.param == "toy" else SECP256K1


@pytest.fixture(scope="session")
def prod_world():
    return World.create(SECP256K1, random.Random(99))


@pytest.fixture(scope="session")
def toy_world():
    return World.create(TOY, random.Random(98))


@pytest.fixture
def world(group):
    return World.create(group, random.Random(97))


@pytest.fixture(scope="session")
def prod_cred(prod_world):
    return prod_world.enroll(random.Random(5))
