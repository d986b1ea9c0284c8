from functools import lru_cache

import pytest

from knowledge_economy.autonomous import solve_autonomous
from knowledge_economy.distributions import from_density_knots, make_uniform
from knowledge_economy.model import EconomyParams
from knowledge_economy.non_autonomous import solve_non_autonomous
from knowledge_economy.pre_ai import solve_pre_ai

UNIFORM = make_uniform()
TENT = from_density_knots([(0.0, 0.5), (0.5, 1.5), (1.0, 0.5)])
MU = 10.0


def params(h=0.5, z_ai=0.0, mu=MU, dist=UNIFORM):
    return EconomyParams(dist, h, z_ai, mu)


@lru_cache(maxsize=None)
def pre(h=0.5, dist=UNIFORM):
    return solve_pre_ai(params(h, dist=dist))


@lru_cache(maxsize=None)
def auto(z_ai, h=0.5, dist=UNIFORM):
    return solve_autonomous(params(h, z_ai, dist=dist))


@lru_cache(maxsize=None)
def nonauto(z_ai, h=0.5, dist=UNIFORM):
    return solve_non_autonomous(params(h, z_ai, dist=dist), pre=pre(h, dist))


@pytest.fixture
def uniform():
    return UNIFORM


@pytest.fixture
def tent():
    return TENT
