"""Equilibrium without AI, with and without independent producers."""

from __future__ import annotations

import functools

from .distributions import KnowledgeDistribution
from .errors import AuditFailed, NoConvergence, NoSignChange
from .model import (
    ComputeAllocation,
    EconomyParams,
    Equilibrium,
    IndependentProducer,
    Occupation,
    OccupationPartition,
    Regime,
    Settings,
    SolverIntegral,
    WageSchedule,
    WorkerComposite,
    certify,
    continuity_residuals,
)
from .numerics import GridFunction, find_root_bracketed, integrate_matching

_EDGE = 1e-9
H0_SNAP = 1e-6


def shoot_top_worker(dist, h, z_start, steps, tol):
    """Find x with m(z_start) = x and m(x) = 1: the last worker when the
    first solver is also the worker/solver boundary."""

    def miss(x):
        return integrate_matching(dist, h, z_start, x, x, steps).end - 1.0

    return find_root_bracketed(miss, z_start, 1.0 - 1e-7, tol)


def shoot_first_solver(dist, h, z_lo, z_hi, steps, tol):
    """Find the initial value m(z_lo) for which m(z_hi) = 1."""

    def miss(s0):
        return integrate_matching(dist, h, z_lo, z_hi, s0, steps).end - 1.0

    return find_root_bracketed(miss, 0.0, 1.0, tol)


def solver_constant(h, z_top, payroll):
    """Wage of the least knowledgeable solver when it equals the top worker's wage.

    Solves C = 1 - h(1-z_top) w(1) with w(1) = C + payroll.
    """
    a = h * (1.0 - z_top)
    return (1.0 - a * payroll) / (1.0 + a)


def _p1_boundary(dist, h, settings):
    z1 = shoot_top_worker(dist, h, 0.0, settings.ode_steps, settings.root_tol)
    path = integrate_matching(dist, h, 0.0, z1, z1, settings.ode_steps)
    return z1, path, solver_constant(h, z1, path.payroll)


def _h0_gap(dist, h, settings):
    z1, _, c = _p1_boundary(dist, h, settings)
    return c - z1


@functools.lru_cache(maxsize=64)
def _h0_cached(dist: KnowledgeDistribution, settings: Settings) -> float:
    try:
        return find_root_bracketed(lambda h: _h0_gap(dist, h, settings), 1e-4, 1 - 1e-4, 1e-10)
    except NoSignChange as exc:
        raise NoConvergence(f"h0 bracket failed: {exc}") from exc


def compute_h0(dist: KnowledgeDistribution, settings: Settings | None = None) -> float:
    """Helping cost above which independent producers appear pre-AI."""
    return _h0_cached(dist, settings or Settings())


def _finish(params, eq):
    eq = certify(eq)
    if not eq.certified:
        raise AuditFailed(
            f"pre-AI {eq.config} not certified: audit {eq.audit.max_profit:.3e} at {eq.audit.argmax}, "
            f"max residual {eq.max_residual:.3e}"
        )
    return eq


def _solve_p1(params: EconomyParams) -> Equilibrium:
    dist, h, st = params.dist, params.h, params.settings
    z1, path, c = _p1_boundary(dist, h, st)
    wages = WageSchedule(
        (
            WorkerComposite(0.0, z1, h, path, c),
            SolverIntegral(z1, 1.0, path, c),
        )
    )
    part = OccupationPartition.from_breaks([(0.0, z1, Occupation.WP), (z1, 1.0, Occupation.SP)])
    residuals = {"m_top": path.end - 1.0, **continuity_residuals(wages)}
    return Equilibrium(
        params, Regime.PRE_AI, part, wages, 0.0, ComputeAllocation(), "P1",
        matching=GridFunction(path.zs, path.ms), path=path, residuals=residuals,
    )


def _solve_p2(params: EconomyParams) -> Equilibrium:
    dist, h, st = params.dist, params.h, params.settings
    steps, tol = st.ode_steps, st.root_tol
    z_hi = shoot_top_worker(dist, h, 0.0, steps, tol)

    def inner(zw):
        s0 = shoot_first_solver(dist, h, 0.0, zw, steps, tol)
        return s0, integrate_matching(dist, h, 0.0, zw, s0, steps)

    def continuity(zw):
        s0, path = inner(zw)
        # top worker is indifferent to producing alone: zw = 1 - h(1-zw) w(1), with C = s0
        return zw - 1.0 + h * (1.0 - zw) * (s0 + path.payroll)

    try:
        zw = find_root_bracketed(continuity, _EDGE, z_hi, tol)
    except NoSignChange as exc:
        raise NoConvergence(f"no pre-AI solution with independent producers: {exc}") from exc
    s0, path = inner(zw)
    wages = WageSchedule(
        (
            WorkerComposite(0.0, zw, h, path, s0),
            IndependentProducer(zw, s0),
            SolverIntegral(s0, 1.0, path, s0),
        )
    )
    part = OccupationPartition.from_breaks(
        [(0.0, zw, Occupation.WP), (zw, s0, Occupation.I), (s0, 1.0, Occupation.SP)]
    )
    residuals = {"m_top": path.end - 1.0, **continuity_residuals(wages)}
    return Equilibrium(
        params, Regime.PRE_AI, part, wages, 0.0, ComputeAllocation(), "P2",
        matching=GridFunction(path.zs, path.ms), path=path, residuals=residuals,
    )


def solve_pre_ai(params: EconomyParams) -> Equilibrium:
    """Unique equilibrium without AI; ``z_ai`` and ``mu`` are ignored."""
    h0 = compute_h0(params.dist, params.settings)
    if params.h <= h0 + H0_SNAP:
        return _finish(params, _solve_p1(params))
    return _finish(params, _solve_p2(params))
