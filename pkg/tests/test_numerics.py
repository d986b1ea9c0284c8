import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from knowledge_economy.distributions import from_density_knots, make_uniform
from knowledge_economy.errors import DegenerateInterval, NoSignChange, OutOfRange, RangeExceeded
from knowledge_economy.model import span
from knowledge_economy.numerics import (
    GridFunction,
    find_root_bracketed,
    integrate_adaptive,
    integrate_matching,
    solve_matching_ode,
)


def uniform_m(m_lo, h, z_lo, z):
    return m_lo + h * ((z - z * z / 2) - (z_lo - z_lo * z_lo / 2))


class TestRoot:
    def test_sqrt2(self):
        assert find_root_bracketed(lambda x: x * x - 2, 1, 2, 1e-12) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_zero(self):
        assert find_root_bracketed(lambda x: x, -1, 1) == pytest.approx(0.0, abs=1e-12)

    def test_boundary_quadratic(self):
        root = find_root_bracketed(lambda z: z * z - 6 * z + 4, 0, 1, 1e-12)
        assert root == pytest.approx(3 - math.sqrt(5), abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            find_root_bracketed(lambda x: x * x + 1, -1, 1)

    def test_reversed_bracket(self):
        assert find_root_bracketed(lambda x: x - 0.3, 1, 0) == pytest.approx(0.3)


class TestQuadrature:
    def test_simple(self):
        assert integrate_adaptive(lambda x: x, 0, 1) == pytest.approx(0.5, abs=1e-12)
        assert integrate_adaptive(lambda x: 1.0, 0, 1) == pytest.approx(1.0, abs=1e-12)

    def test_against_scipy(self):
        f = lambda x: math.exp(-3 * x) * math.sin(7 * x)  # noqa: E731
        ref, _ = integrate.quad(f, 0, 2, epsabs=1e-13)
        assert integrate_adaptive(f, 0, 2, 1e-11) == pytest.approx(ref, abs=1e-10)

    def test_solver_wage_integral(self):
        # substituting u = m(z) turns the integrand into dz, so the value is e(s)
        h, s0, z_ai = 0.5, 0.53311, 0.425
        g = GridFunction(*np.array([(z, uniform_m(s0, h, 0, z)) for z in np.linspace(0, z_ai, 2049)]).T)
        val = integrate_adaptive(lambda u: span(h, g.inverse(u)), s0, g(z_ai), 1e-10)
        assert val == pytest.approx(z_ai, abs=1e-6)


class TestGrid:
    def test_eval_and_inverse(self):
        g = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        assert g(0.5) == 1.0
        assert g.inverse(1.0) == 0.5

    def test_out_of_range(self):
        g = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        with pytest.raises(OutOfRange):
            g(1.1)
        with pytest.raises(OutOfRange):
            g.inverse(-0.5)

    def test_rejects_nonmonotone(self):
        with pytest.raises(ValueError):
            GridFunction(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.6, 0.4]))

    def test_arrays_read_only(self):
        g = GridFunction(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        with pytest.raises(ValueError):
            g.xs[0] = 3.0


class TestMatchingODE:
    def test_pre_ai_endpoint(self):
        z1 = 3 - math.sqrt(5)
        m = solve_matching_ode(make_uniform(), 0.5, 0.0, z1, z1)
        assert m(z1) == pytest.approx(1.0, abs=1e-7)

    def test_degenerate(self):
        with pytest.raises(DegenerateInterval):
            solve_matching_ode(make_uniform(), 0.5, 0.3, 0.3, 0.5)
        m = solve_matching_ode(make_uniform(), 0.5, 0.3, 0.3 + 1e-9, 0.5)
        assert m(0.3 + 1e-9) == pytest.approx(0.5, abs=1e-9)

    def test_co_pilot_endpoint_and_inverse(self):
        m = solve_matching_ode(make_uniform(), 0.5, 0.0, 0.425, 0.53311)
        assert m(0.425) == pytest.approx(0.70046, abs=1e-5)
        assert m.inverse(uniform_m(0.53311, 0.5, 0, 0.425)) == pytest.approx(0.425, abs=1e-5)

    def test_range_exceeded(self):
        with pytest.raises(RangeExceeded):
            solve_matching_ode(make_uniform(), 0.5, 0.0, 0.9, 0.9)

    def test_uniform_exact(self):
        end = integrate_matching(make_uniform(), 0.5, 0.0, 0.7, 0.2, 4096).end
        assert abs(end - uniform_m(0.2, 0.5, 0, 0.7)) <= 1e-10

    def test_fourth_order_on_linear_density(self):
        d = from_density_knots([(0, 0.5), (1, 1.5)])
        h = 0.5
        add, _ = integrate.quad(lambda u: h * (1 - u) * d.pdf(u), 0, 0.7, epsabs=1e-15)
        exact = d.ppf(d.cdf(0.2) + add)
        err = {n: abs(integrate_matching(d, h, 0, 0.7, 0.2, n).end - exact) for n in (32, 64)}
        assert 14 <= err[32] / err[64] <= 18

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(0.0, 0.5), st.floats(0.0, 0.3))
    def test_monotone_and_conserves_mass(self, h, z_lo, m_lo):
        d = from_density_knots([(0, 1), (0.5, 3), (1, 1)])
        z_hi = z_lo + 0.3
        path = integrate_matching(d, h, z_lo, z_hi, m_lo, 4096)
        assert np.all(np.diff(path.ms) > 0)
        if path.end <= 1.0:
            add, _ = integrate.quad(lambda u: h * (1 - u) * d.pdf(u), z_lo, z_hi, points=[0.5])
            assert d.cdf(path.end) - d.cdf(m_lo) == pytest.approx(add, abs=1e-9)
