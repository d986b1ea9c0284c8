"""Equilibrium with autonomous AI agents (co-workers and co-pilots).

The rental rate of compute equals the AI's knowledge, so the only unknowns
are the occupational boundaries.  Four candidate layouts are solved as
free-boundary problems and the audit picks the one that is an equilibrium:

* ``A``: Wp, I, Sp, Sa (AI used as worker, not as solver)
* ``B``: Wa, Wp, Sp, Sa (AI used in both layers)
* ``E``: Wa, Wp, Sp (AI used as solver only)
* ``C``: Wp, Sp, Sa with every boundary pinned at z_ai (knife-edge)

A layout with both Wa and I nonempty cannot be continuous at the Wa/Wp
boundary unless inf Sp = z_ai, which rules out I, so it is never tried.
"""

from __future__ import annotations

import logging
from dataclasses import replace

from .errors import AbundanceViolated, NoConfigCertified, NoSignChange, RangeExceeded
from .model import (
    CERTIFY_TOL,
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
    span,
    _integrate_dg,
)
from .numerics import GridFunction, find_root_bracketed, integrate_matching

log = logging.getLogger(__name__)

_SLACK = 1e-9
CONFIG_ORDER = ("A", "B", "E", "C")


def check_abundance(params: EconomyParams) -> bool:
    """Sufficient condition for some AI agents to end up producing alone."""
    p = params
    z_ai, h = p.z_ai, p.h
    assisted = _integrate_dg(p.dist, lambda z: h * (1.0 - z), 0.0, z_ai, p.settings.quad_tol)
    assisting = span(h, z_ai) * (1.0 - p.dist.cdf(z_ai))
    return assisted + assisting < p.mu


def compute_allocation(params: EconomyParams, partition: OccupationPartition) -> ComputeAllocation:
    p = params
    mu_s = mu_w = 0.0
    if (wa := partition.get(Occupation.WA)) is not None:
        mu_s = _integrate_dg(p.dist, lambda z: p.h * (1.0 - z), wa.lo, wa.hi, p.settings.quad_tol)
    if (sa := partition.get(Occupation.SA)) is not None:
        mu_w = span(p.h, p.z_ai) * (p.dist.cdf(sa.hi) - p.dist.cdf(sa.lo))
    mu_i = p.mu - mu_s - mu_w
    if mu_i < -1e-9:
        raise AbundanceViolated(f"compute {p.mu} cannot cover mu_s={mu_s:.6g} and mu_w={mu_w:.6g}")
    return ComputeAllocation(max(mu_i, 0.0), mu_w, mu_s)


def _wa_segment(h, z_ai, hi):
    # z_ai (1 - h (1 - z))
    return Linear(0.0, hi, z_ai * (1.0 - h), z_ai * h)


def _sa_segment(h, z_ai, lo):
    n_ai = span(h, z_ai)
    return Linear(lo, 1.0, -n_ai * z_ai, n_ai)


def _assemble(params, config, pieces, segments, path, residuals):
    part = OccupationPartition.from_breaks(pieces)
    wages = WageSchedule(tuple(segments))
    res = {**residuals, **continuity_residuals(wages)}
    eq = Equilibrium(
        params,
        Regime.AUTONOMOUS,
        part,
        wages,
        params.z_ai,
        compute_allocation(params, part),
        config,
        matching=GridFunction(path.zs, path.ms) if path is not None else None,
        path=path,
        residuals=res,
    )
    return certify(eq)


def _config_a(params: EconomyParams, *, pinned: bool = False) -> Equilibrium | None:
    """Wp = [0, z_ai], I = [z_ai, s0], Sp = [s0, s1], Sa = [s1, 1]."""
    d, h, z_ai, st = params.dist, params.h, params.z_ai, params.settings
    steps, tol = st.ode_steps, st.root_tol
    if z_ai <= 0.0:
        if pinned:
            return None
        # nobody is a worker: every human supervises AI workers
        return _assemble(params, "A", [(0.0, 1.0, Occupation.SA)], [_sa_segment(h, z_ai, 0.0)], None, {})

    a = h * (1.0 - z_ai)

    def worker_gap(s0):
        path = integrate_matching(d, h, 0.0, z_ai, s0, steps)
        # w*(z_ai) - z_ai with C* = s0
        return path.end - a * (s0 + path.payroll) - z_ai

    if pinned:
        s0 = z_ai
    else:
        try:
            s_cap = find_root_bracketed(
                lambda s: integrate_matching(d, h, 0.0, z_ai, s, steps).end - 1.0, z_ai, 1.0, tol
            )
            s0 = find_root_bracketed(worker_gap, z_ai, s_cap, tol)
        except NoSignChange:
            return None
    path = integrate_matching(d, h, 0.0, z_ai, s0, steps)
    s1 = path.end
    if s1 > 1.0 + _SLACK:
        return None
    s1 = min(s1, 1.0)
    top = s0 + path.payroll
    residuals = {
        "worker_continuity": worker_gap(s0),
        "sa_continuity": top - span(h, z_ai) * (s1 - z_ai),
    }
    segs = [WorkerComposite(0.0, z_ai, h, path, s0)]
    pieces = [(0.0, z_ai, Occupation.WP)]
    if s0 > z_ai:
        segs.append(IndependentProducer(z_ai, s0))
        pieces.append((z_ai, s0, Occupation.I))
    segs.append(SolverIntegral(s0, s1, path, s0))
    pieces.append((s0, s1, Occupation.SP))
    if s1 < 1.0:
        segs.append(_sa_segment(h, z_ai, s1))
        pieces.append((s1, 1.0, Occupation.SA))
    return _assemble(params, "C" if pinned else "A", pieces, segs, path, residuals)


def _config_b(params: EconomyParams) -> Equilibrium | None:
    """Wa = [0, z_a], Wp = [z_a, z_ai], Sp = [z_ai, s1], Sa = [s1, 1]."""
    d, h, z_ai, st = params.dist, params.h, params.z_ai, params.settings
    steps, tol = st.ode_steps, st.root_tol
    if z_ai <= 0.0:
        return None
    n_ai = span(h, z_ai)

    def sa_gap(z_a):
        path = integrate_matching(d, h, z_a, z_ai, z_ai, steps)
        return z_ai + path.payroll - n_ai * (path.end - z_ai)

    lo = 0.0
    if integrate_matching(d, h, 0.0, z_ai, z_ai, steps).end > 1.0:
        try:
            lo = find_root_bracketed(
                lambda za: integrate_matching(d, h, za, z_ai, z_ai, steps).end - 1.0, 0.0, z_ai, tol
            )
        except NoSignChange:
            return None
    try:
        z_a = find_root_bracketed(sa_gap, lo, z_ai, tol)
    except NoSignChange:
        return None
    if z_a >= z_ai - _SLACK:
        return None
    path = integrate_matching(d, h, z_a, z_ai, z_ai, steps)
    s1 = min(path.end, 1.0)
    residuals = {"sa_continuity": sa_gap(z_a)}
    segs = [
        _wa_segment(h, z_ai, z_a),
        WorkerComposite(z_a, z_ai, h, path, z_ai),
        SolverIntegral(z_ai, s1, path, z_ai),
    ]
    pieces = [(0.0, z_a, Occupation.WA), (z_a, z_ai, Occupation.WP), (z_ai, s1, Occupation.SP)]
    if s1 < 1.0:
        segs.append(_sa_segment(h, z_ai, s1))
        pieces.append((s1, 1.0, Occupation.SA))
    if z_a <= 0.0:
        segs, pieces = segs[1:], pieces[1:]
        segs[0] = replace(segs[0], lo=0.0)
    return _assemble(params, "B", pieces, segs, path, residuals)


def _config_e(params: EconomyParams) -> Equilibrium | None:
    """Wa = [0, z_a], Wp = [z_a, z_ai], Sp = [z_ai, 1]; no AI workers."""
    d, h, z_ai, st = params.dist, params.h, params.z_ai, params.settings
    steps, tol = st.ode_steps, st.root_tol
    if z_ai <= 0.0:
        return None
    try:
        z_a = find_root_bracketed(
            lambda za: integrate_matching(d, h, za, z_ai, z_ai, steps).end - 1.0, 0.0, z_ai, tol
        )
    except NoSignChange:
        return None
    if z_a >= z_ai - _SLACK:
        return None
    path = integrate_matching(d, h, z_a, z_ai, z_ai, steps)
    segs = [
        _wa_segment(h, z_ai, z_a),
        WorkerComposite(z_a, z_ai, h, path, z_ai),
        SolverIntegral(z_ai, 1.0, path, z_ai),
    ]
    pieces = [(0.0, z_a, Occupation.WA), (z_a, z_ai, Occupation.WP), (z_ai, 1.0, Occupation.SP)]
    if z_a <= 0.0:
        segs, pieces = segs[1:], pieces[1:]
        segs[0] = replace(segs[0], lo=0.0)
    residuals = {"m_top": path.end - 1.0}
    return _assemble(params, "E", pieces, segs, path, residuals)


def _config_c(params: EconomyParams) -> Equilibrium | None:
    return _config_a(params, pinned=True)


_BUILDERS = {"A": _config_a, "B": _config_b, "E": _config_e, "C": _config_c}


def solve_configs(params: EconomyParams) -> dict[str, Equilibrium | None]:
    """Every candidate layout, audited; ``None`` where the layout has no solution."""
    out = {}
    for name in CONFIG_ORDER:
        try:
            out[name] = _BUILDERS[name](params)
        except (RangeExceeded, ValueError) as exc:
            log.debug("config %s failed: %s", name, exc)
            out[name] = None
    return out


def solve_autonomous(params: EconomyParams) -> Equilibrium:
    """Unique equilibrium with autonomous AI; requires abundant compute."""
    if not check_abundance(params):
        raise AbundanceViolated(f"mu={params.mu} does not satisfy the abundance condition")
    candidates = solve_configs(params)
    certified = [eq for eq in candidates.values() if eq is not None and eq.certified]
    if not certified:
        report = {
            name: (eq.audit.max_profit if eq is not None else float("nan"))
            for name, eq in candidates.items()
        }
        raise NoConfigCertified(f"no autonomous layout certified for {params}: {report}", report)
    best = min(certified, key=lambda eq: (CONFIG_ORDER.index(eq.config), eq.max_residual))
    distinct = {eq.config for eq in certified if eq.max_residual <= CERTIFY_TOL}
    if len(distinct) > 1:
        best = min(certified, key=lambda eq: eq.max_residual)
        best = replace(best, config_tag="knife-edge")
    return best
