import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import UNIFORM, auto, params, pre
from knowledge_economy.errors import DivergentSpan, InvalidParams, PreconditionViolated
from knowledge_economy.model import (
    EconomyParams,
    Firm,
    Linear,
    Occupation,
    OccupationPartition,
    Settings,
    WageSchedule,
    accounting,
    audit_no_arbitrage,
    firm_profit,
    resource_constraint_error,
    span,
    wage_at,
)


class TestSpan:
    def test_values(self):
        assert span(0.5, 0.5) == 4.0
        assert span(0.5, 0.0) == 2.0
        assert span(0.5, 0.85) == pytest.approx(40 / 3)

    def test_diverges(self):
        with pytest.raises(DivergentSpan):
            span(0.5, 1.0)


class TestParams:
    @pytest.mark.parametrize("h", [0.0, 1.0, -0.2])
    def test_bad_h(self, h):
        with pytest.raises(InvalidParams):
            EconomyParams(UNIFORM, h)

    def test_bad_z_ai_and_mu(self):
        with pytest.raises(InvalidParams):
            EconomyParams(UNIFORM, 0.5, z_ai=1.0)
        with pytest.raises(InvalidParams):
            EconomyParams(UNIFORM, 0.5, mu=-1.0)

    def test_bad_settings(self):
        with pytest.raises(InvalidParams):
            Settings(ode_steps=7)
        with pytest.raises(InvalidParams):
            Settings(root_tol=0.0)


class TestPartition:
    def test_queries(self):
        part = OccupationPartition.from_breaks(
            [(0, 0.3, Occupation.WA), (0.3, 0.5, Occupation.WP), (0.5, 0.7, Occupation.SP), (0.7, 1, Occupation.SA)]
        )
        assert part.workers == (0, 0.5)
        assert part.solvers == (0.5, 1)
        assert part.label_at(0.4) == Occupation.WP
        assert part.measure(UNIFORM, Occupation.SP, Occupation.SA) == pytest.approx(0.5)
        assert part.check_ai_ordering(0.5)
        assert not part.check_ai_ordering(0.4)

    def test_rejects_gap(self):
        with pytest.raises(PreconditionViolated):
            OccupationPartition.from_breaks([(0, 0.4, Occupation.WP), (0.5, 1, Occupation.SP)])

    def test_rejects_disorder(self):
        with pytest.raises(PreconditionViolated):
            OccupationPartition.from_breaks([(0, 0.4, Occupation.SP), (0.4, 1, Occupation.WP)])


class TestWageSchedule:
    def test_piecewise(self):
        ws = WageSchedule((Linear(0, 0.5, 0.0, 1.0), Linear(0.5, 1, 0.5, 0.0)))
        assert ws(0.25) == 0.25
        assert np.allclose(ws(np.array([0.25, 0.75])), [0.25, 0.5])
        assert ws.jumps() == [(0.5, 0.0)]

    def test_contiguity(self):
        with pytest.raises(PreconditionViolated):
            WageSchedule((Linear(0, 0.4, 0, 1), Linear(0.5, 1, 0, 1)))


class TestFirmProfit:
    def test_single_ai_zero(self):
        eq = auto(0.425)
        assert firm_profit(eq.params, eq.wages, eq.r, Firm("single_ai")) == 0.0

    def test_pre_ai_hierarchy_breaks_even(self):
        eq = pre()
        z1 = 3 - math.sqrt(5)
        assert firm_profit(eq.params, eq.wages, 0.0, Firm("nA", 0.0, z1)) == pytest.approx(0.0, abs=1e-6)

    def test_ai_solver_breaks_even_where_used(self):
        eq = auto(0.85)
        assert firm_profit(eq.params, eq.wages, eq.r, Firm("tA", 0.0)) == pytest.approx(0.0, abs=1e-6)

    def test_ai_solver_loses_where_unused(self):
        eq = auto(0.425)
        w0 = eq.wages(0.0)
        profit = firm_profit(eq.params, eq.wages, eq.r, Firm("tA", 0.0))
        assert profit == pytest.approx(2 * (0.425 - w0) - 0.425, abs=1e-12)
        assert profit < -0.1

    def test_preconditions(self):
        eq = auto(0.425)
        with pytest.raises(PreconditionViolated):
            firm_profit(eq.params, eq.wages, eq.r, Firm("nA", 0.6, 0.5))
        with pytest.raises(PreconditionViolated):
            firm_profit(eq.params, eq.wages, eq.r, Firm("tA", 0.6))
        with pytest.raises(PreconditionViolated):
            firm_profit(eq.params, eq.wages, eq.r, Firm("single", 1.3))


class TestAudit:
    def test_equilibria_certified(self):
        assert audit_no_arbitrage(pre()).max_profit <= 1e-6
        assert audit_no_arbitrage(auto(0.425)).max_profit <= 1e-6

    def test_detects_cheap_solvers(self):
        eq = pre()
        segs = list(eq.wages.segments)
        sp = segs[-1]
        segs[-1] = _Shifted(sp, -0.01)
        report = audit_no_arbitrage(replace(eq, wages=WageSchedule(tuple(segs))))
        assert report.max_profit >= 0.005
        assert report.argmax.kind == "nA"


class _Shifted:
    def __init__(self, seg, delta):
        self.seg, self.delta, self.lo, self.hi = seg, delta, seg.lo, seg.hi

    def __call__(self, z):
        return self.seg(z) + self.delta


class TestAccounting:
    def test_pre_ai_no_capital(self):
        acc = accounting(pre())
        assert acc.capital_income == 0.0
        assert acc.output == pytest.approx(acc.labor_income, rel=1e-8)

    def test_autonomous_capital(self):
        acc = accounting(auto(0.425))
        assert acc.capital_income == pytest.approx(4.25, abs=1e-12)

    def test_labor_income_rises(self):
        assert accounting(auto(0.425)).labor_income > accounting(pre()).labor_income

    def test_pre_ai_output_closed_form(self):
        # uniform P1: output = ∫ m dz over workers, m(z) = z1 + h(z - z²/2)
        z1, h = 3 - math.sqrt(5), 0.5
        expected = z1 * z1 + h * (z1**2 / 2 - z1**3 / 6)
        assert accounting(pre()).output == pytest.approx(expected, rel=1e-10)

    def test_resource_constraint(self):
        assert resource_constraint_error(pre()) <= 1e-6
        assert resource_constraint_error(auto(0.85)) <= 1e-6


class TestWageAt:
    def test_values(self):
        assert wage_at(pre(), 1.0) == pytest.approx(1.5777, abs=5e-4)
        assert wage_at(auto(0.425), 0.5) == pytest.approx(0.5, abs=1e-12)
        assert wage_at(auto(0.85), 0.0) == pytest.approx(0.425, abs=1e-12)

    def test_range(self):
        with pytest.raises(PreconditionViolated):
            wage_at(pre(), 1.2)


def test_params_helper():
    assert params(0.5, 0.3).z_ai == 0.3
