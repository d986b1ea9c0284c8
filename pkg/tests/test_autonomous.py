import math

import numpy as np
import pytest

from conftest import TENT, auto, params
from knowledge_economy.autonomous import check_abundance, solve_autonomous, solve_configs
from knowledge_economy.errors import AbundanceViolated
from knowledge_economy.model import Occupation, accounting, resource_constraint_error, span


def phi(z):
    return z - z * z / 2


def config_a_uniform(h, z_ai):
    """Uniform G: m = s0 + h·phi(z) on [0, z_ai] and J = z, so w(z_ai) = z_ai is linear in s0."""
    a = h * (1 - z_ai)
    s0 = (z_ai + a * z_ai - h * phi(z_ai)) / (1 - a)
    return s0, s0 + h * phi(z_ai)


def config_b_uniform(h, z_ai):
    """Uniform G: the Sa continuity condition reduces to a quadratic in z_a."""
    n = span(h, z_ai)
    # z_ai + (z_ai - z_a) = n h (phi(z_ai) - phi(z_a))
    b = -2.0 * (1.0 - 1.0 / (n * h))
    c = 2.0 * (phi(z_ai) - (2 * z_ai) / (n * h))
    # z_a² + b z_a + c = 0 after multiplying through by -2/(n h)
    disc = b * b - 4 * c
    z_a = (-b - math.sqrt(disc)) / 2
    return z_a, z_ai + h * (phi(z_ai) - phi(z_a))


class TestConfigA:
    def test_boundaries(self):
        s0, s1 = config_a_uniform(0.5, 0.425)
        eq = auto(0.425)
        assert eq.config == "A"
        assert eq.partition.get(Occupation.I).hi == pytest.approx(s0, abs=1e-9)
        assert eq.partition.get(Occupation.SA).lo == pytest.approx(s1, abs=1e-9)
        assert s0 == pytest.approx(0.53311, abs=5e-4)
        assert s1 == pytest.approx(0.70046, abs=5e-4)

    def test_prices(self):
        s0, _ = config_a_uniform(0.5, 0.425)
        eq = auto(0.425)
        assert eq.r == 0.425
        assert eq.wages(0.0) == pytest.approx(s0 * 0.5, abs=1e-9)
        assert eq.wages(0.0) == pytest.approx(0.267, abs=5e-4)
        assert eq.wages(1.0) == pytest.approx(2.0, abs=1e-9)

    def test_compute(self):
        eq = auto(0.425)
        assert eq.compute.mu_s == 0.0
        assert eq.compute.mu_w == pytest.approx(1.0419, abs=1e-3)
        assert eq.compute.mu_i == pytest.approx(8.958, abs=1e-3)
        assert eq.compute.total == pytest.approx(10.0, abs=1e-12)


class TestConfigB:
    def test_quadratic(self):
        z_a, _ = config_b_uniform(0.5, 0.85)
        assert z_a == pytest.approx((1.7 - math.sqrt(1.7**2 - 4 * 0.4675)) / 2, abs=1e-12)

    def test_boundaries(self):
        z_a, s1 = config_b_uniform(0.5, 0.85)
        eq = auto(0.85)
        assert eq.config == "B"
        assert eq.partition.get(Occupation.WA).hi == pytest.approx(z_a, abs=1e-9)
        assert eq.partition.get(Occupation.SA).lo == pytest.approx(s1, abs=1e-9)
        assert z_a == pytest.approx(0.345025, abs=5e-4)
        assert s1 == pytest.approx(0.951623, abs=5e-4)

    def test_prices_and_compute(self):
        z_a, _ = config_b_uniform(0.5, 0.85)
        eq = auto(0.85)
        assert eq.wages(0.0) == pytest.approx(0.425, abs=1e-12)
        assert eq.compute.mu_s == pytest.approx(0.5 * phi(z_a), abs=1e-10)
        assert eq.compute.mu_s == pytest.approx(0.14276, abs=1e-4)

    def test_co_worker_wage_line(self):
        eq = auto(0.85)
        zs = np.linspace(0, eq.partition.get(Occupation.WA).hi, 9)
        assert np.allclose(eq.wages(zs), 0.85 * (1 - 0.5 * (1 - zs)), atol=1e-12)


class TestAbundance:
    def test_condition(self):
        assert check_abundance(params(0.5, 0.425, 10.0))
        assert not check_abundance(params(0.5, 0.425, 1.0))
        assert check_abundance(params(0.5, 0.0, 2.5))

    def test_solver_rejects_scarce_compute(self):
        with pytest.raises(AbundanceViolated):
            solve_autonomous(params(0.5, 0.425, 1.0))


class TestSelection:
    def test_single_certified_config(self):
        for z in (0.425, 0.85):
            certified = [k for k, eq in solve_configs(params(0.5, z)).items() if eq is not None and eq.certified]
            assert certified == [auto(z).config]

    def test_no_ai_knowledge(self):
        eq = auto(0.0)
        assert eq.partition.labels() == [Occupation.SA]
        assert eq.wages(1.0) == pytest.approx(2.0)


SWEEP = [round(0.05 * k, 2) for k in range(1, 20)]


@pytest.mark.parametrize("z_ai", SWEEP)
def test_sweep_invariants(z_ai):
    eq = auto(z_ai)
    assert eq.certified
    assert eq.r == z_ai
    assert eq.partition.check_ai_ordering(z_ai)
    acc = accounting(eq)
    assert acc.capital_income == pytest.approx(10.0 * z_ai)
    assert resource_constraint_error(eq) <= 1e-6
    if iv := eq.partition.get(Occupation.I):
        zs = np.linspace(iv.lo, iv.hi, 5)
        assert np.allclose(eq.wages(zs), zs)


@pytest.mark.parametrize("z_ai", [0.3, 0.6, 0.85])
def test_tent_certifies(z_ai):
    eq = auto(z_ai, dist=TENT)
    assert eq.certified
    accounting(eq)
    assert eq.partition.check_ai_ordering(z_ai)
