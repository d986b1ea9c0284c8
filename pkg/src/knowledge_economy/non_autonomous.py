"""Equilibrium with non-autonomous AI: agents can only answer questions.

Compute is abundant and idle at the margin, so its rental rate is zero and
a worker using an AI solver earns exactly the AI's knowledge.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import AbundanceViolated, NoConfigCertified, NoConvergence, NoSignChange
from .model import (
    ComputeAllocation,
    EconomyParams,
    Equilibrium,
    IndependentProducer,
    Linear,
    Occupation,
    OccupationPartition,
    Regime,
    SolverIntegral,
    WageSchedule,
    WorkerComposite,
    certify,
    continuity_residuals,
    _integrate_dg,
)
from .numerics import GridFunction, find_root_bracketed, integrate_matching
from .pre_ai import shoot_first_solver, shoot_top_worker, solve_pre_ai, solver_constant

_SLACK = 1e-9


def _idle_compute(params: EconomyParams, partition: OccupationPartition) -> ComputeAllocation:
    mu_s = 0.0
    if (wa := partition.get(Occupation.WA)) is not None:
        mu_s = _integrate_dg(params.dist, lambda z: params.h * (1.0 - z), wa.lo, wa.hi, params.settings.quad_tol)
    if params.mu - mu_s < -1e-9:
        raise AbundanceViolated(f"compute {params.mu} cannot cover AI solvers needing {mu_s:.6g}")
    return ComputeAllocation(mu_i=max(params.mu - mu_s, 0.0), mu_w=0.0, mu_s=mu_s)


def _build(params, config, pieces, segments, path, residuals):
    part = OccupationPartition.from_breaks(pieces)
    wages = WageSchedule(tuple(segments))
    eq = Equilibrium(
        params,
        Regime.NON_AUTONOMOUS,
        part,
        wages,
        0.0,
        _idle_compute(params, part),
        config,
        config_tag="idle",
        matching=GridFunction(path.zs, path.ms),
        path=path,
        residuals={**residuals, **continuity_residuals(wages)},
    )
    return certify(eq)


def _n1_inner(params, z_a):
    d, h, st = params.dist, params.h, params.settings
    z_w = shoot_top_worker(d, h, z_a, st.ode_steps, st.root_tol)
    path = integrate_matching(d, h, z_a, z_w, z_w, st.ode_steps)
    return z_w, path, solver_constant(h, z_w, path.payroll)


def _config_n1(params: EconomyParams) -> Equilibrium | None:
    """Wa = [0, z_a], Wp = [z_a, z_w], Sp = [z_w, 1]."""
    h, z_ai, tol = params.h, params.z_ai, params.settings.root_tol

    def wage_gap(z_a):
        z_w, _, c = _n1_inner(params, z_a)
        # human-assisted wage at z_a minus the AI-assisted wage z_ai
        return z_w - h * (1.0 - z_a) * c - z_ai

    try:
        z_a = find_root_bracketed(wage_gap, 0.0, z_ai, tol)
    except NoSignChange:
        return None
    z_w, path, c = _n1_inner(params, z_a)
    if c < z_w - _SLACK:
        return None
    segs = [
        Linear(0.0, z_a, z_ai, 0.0),
        WorkerComposite(z_a, z_w, h, path, c),
        SolverIntegral(z_w, 1.0, path, c),
    ]
    pieces = [(0.0, z_a, Occupation.WA), (z_a, z_w, Occupation.WP), (z_w, 1.0, Occupation.SP)]
    return _build(params, "N1", pieces, segs, path, {"m_top": path.end - 1.0, "wa_edge": wage_gap(z_a)})


def _n2_inner(params, z_a):
    """Boundaries (z_w, s0) of the human part when workers start at z_a."""
    d, h, st = params.dist, params.h, params.settings
    steps, tol = st.ode_steps, st.root_tol
    z_hi = shoot_top_worker(d, h, z_a, steps, tol)

    def continuity(zw):
        s0 = shoot_first_solver(d, h, z_a, zw, steps, tol)
        path = integrate_matching(d, h, z_a, zw, s0, steps)
        return zw - 1.0 + h * (1.0 - zw) * (s0 + path.payroll)

    z_w = find_root_bracketed(continuity, z_a + 1e-9, z_hi, tol)
    s0 = shoot_first_solver(d, h, z_a, z_w, steps, tol)
    return z_w, s0, integrate_matching(d, h, z_a, z_w, s0, steps)


def _config_n2(params: EconomyParams) -> Equilibrium | None:
    """Wa = [0, z_a], Wp = [z_a, z_w], I = [z_w, s0], Sp = [s0, 1]."""
    h, z_ai, tol = params.h, params.z_ai, params.settings.root_tol

    def wage_gap(z_a):
        try:
            _, s0, _ = _n2_inner(params, z_a)
        except NoSignChange:
            # no independent producers for this z_a; fall back on the N1 boundary
            z_w, _, c = _n1_inner(params, z_a)
            return z_w - h * (1.0 - z_a) * c - z_ai
        return s0 * (1.0 - h * (1.0 - z_a)) - z_ai

    try:
        z_a = find_root_bracketed(wage_gap, 0.0, z_ai, tol)
        z_w, s0, path = _n2_inner(params, z_a)
    except NoSignChange:
        return None
    if s0 < z_w + _SLACK:
        return None
    segs = [
        Linear(0.0, z_a, z_ai, 0.0),
        WorkerComposite(z_a, z_w, h, path, s0),
        IndependentProducer(z_w, s0),
        SolverIntegral(s0, 1.0, path, s0),
    ]
    pieces = [
        (0.0, z_a, Occupation.WA),
        (z_a, z_w, Occupation.WP),
        (z_w, s0, Occupation.I),
        (s0, 1.0, Occupation.SP),
    ]
    residuals = {"m_top": path.end - 1.0, "wa_edge": wage_gap(z_a)}
    return _build(params, "N2", pieces, segs, path, residuals)


def _no_adoption(params: EconomyParams, pre: Equilibrium) -> Equilibrium:
    eq = replace(
        pre,
        params=params,
        regime=Regime.NON_AUTONOMOUS,
        r=0.0,
        compute=ComputeAllocation(mu_i=params.mu),
        config="N0",
        config_tag="idle",
        audit=None,
    )
    return certify(eq)


def ai_adopted(eq: Equilibrium) -> bool:
    return eq.partition.has(Occupation.WA)


def solve_non_autonomous(params: EconomyParams, pre: Equilibrium | None = None) -> Equilibrium:
    """Unique equilibrium when AI agents can only act as solvers."""
    pre = pre or solve_pre_ai(params)
    if params.z_ai <= float(pre.wages(0.0)):
        eq = _no_adoption(params, pre)
        if not eq.certified:
            raise NoConfigCertified(f"non-adoption layout failed the audit: {eq.audit}")
        return eq
    tried = {}
    for builder in (_config_n1, _config_n2):
        try:
            eq = builder(params)
        except NoSignChange as exc:
            raise NoConvergence(str(exc)) from exc
        if eq is None:
            continue
        tried[eq.config] = eq.audit.max_profit
        if eq.certified:
            return eq
    raise NoConfigCertified(f"no non-autonomous layout certified for {params}: {tried}", tried)
