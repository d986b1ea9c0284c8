"""Comparative statics between equilibria: displacement, winners, tradeoffs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .autonomous import solve_autonomous
from .errors import NoCrossing, NoSignChange, ParamsMismatch
from .model import (
    EconomyParams,
    Equilibrium,
    Occupation,
    accounting,
    span,
)
from .non_autonomous import solve_non_autonomous
from .numerics import find_root_bracketed
from .pre_ai import solve_pre_ai

TIE_TOL = 1e-9


class Summary(NamedTuple):
    regime: str
    config: str
    workers: tuple[float, float] | None
    solvers: tuple[float, float] | None
    measure_w: float
    measure_s: float
    w0: float
    w1: float
    output: float
    labor_income: float


def summarize(eq: Equilibrium) -> Summary:
    acc = accounting(eq)
    part, dist = eq.partition, eq.params.dist
    return Summary(
        eq.regime.value,
        eq.config,
        part.workers,
        part.solvers,
        part.measure(dist, Occupation.WA, Occupation.WP),
        part.measure(dist, Occupation.SP, Occupation.SA),
        float(eq.wages(0.0)),
        float(eq.wages(1.0)),
        acc.output,
        acc.labor_income,
    )


def productivity(eq: Equilibrium, z: float) -> float | None:
    """Knowledge of the solver a worker is matched with; None for non-workers."""
    label = eq.partition.label_at(z)
    if label == Occupation.WA:
        return eq.params.z_ai
    if label == Occupation.WP:
        return float(np.interp(z, eq.path.zs, eq.path.ms))
    return None


def span_of_control(eq: Equilibrium, s: float) -> float | None:
    """Number of workers (human or AI) a solver supervises; None for non-solvers."""
    label = eq.partition.label_at(s)
    if label == Occupation.SA:
        return span(eq.params.h, eq.params.z_ai)
    if label == Occupation.SP:
        return span(eq.params.h, float(np.interp(s, eq.path.ms, eq.path.zs)))
    return None


def employee(eq: Equilibrium, s: float) -> float:
    return float(np.interp(s, eq.path.ms, eq.path.zs))


@dataclass
class ComparisonReport:
    pre: Summary
    post: Summary
    z_ai: float
    displacement: dict
    z_b: float | None
    z_t: float | None
    grid: np.ndarray
    wage_delta: np.ndarray
    productivity_delta: tuple[np.ndarray, np.ndarray]
    span_delta: tuple[np.ndarray, np.ndarray]
    output_delta: float
    labor_income_delta: float
    gini_pre: float
    gini_post: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def B_empty(self) -> bool:
        return self.z_b is None

    @property
    def T_empty(self) -> bool:
        return self.z_t is None


def _crossing(delta_fn, a, b):
    """Point in [a, b] where the wage gain changes sign (gain at one end only)."""
    try:
        return find_root_bracketed(lambda z: delta_fn(z) - TIE_TOL, a, b, 1e-12)
    except NoSignChange:
        return b if delta_fn(b) > TIE_TOL else a


def _sign_changes(delta: np.ndarray) -> int:
    signs = np.sign(np.where(np.abs(delta) <= TIE_TOL, 0.0, delta))
    signs = signs[signs != 0]
    return int(np.count_nonzero(np.diff(signs)))


def _same_economy(a: EconomyParams, b: EconomyParams) -> bool:
    return a.dist == b.dist and a.h == b.h and a.settings == b.settings


def compare_pre_post(pre: Equilibrium, post: Equilibrium, grid_n: int = 2001) -> ComparisonReport:
    if not _same_economy(pre.params, post.params):
        raise ParamsMismatch("pre and post equilibria differ in distribution, h or settings")
    z_ai = post.params.z_ai
    grid = np.linspace(0.0, 1.0, grid_n)
    w_pre, w_post = pre.wages(grid), post.wages(grid)
    delta = w_post - w_pre

    def delta_fn(z):
        return float(post.wages(z) - pre.wages(z))

    # winners below z_ai form [0, z_b); above, (z_t, 1]
    z_b = None
    if delta_fn(0.0) > TIE_TOL:
        below = grid <= z_ai
        losers = np.flatnonzero(below & (delta <= TIE_TOL))
        hi = grid[losers[0]] if losers.size else z_ai
        lo = grid[max(losers[0] - 1, 0)] if losers.size else z_ai
        z_b = _crossing(delta_fn, lo, hi) if losers.size else z_ai
    z_t = None
    if delta_fn(1.0) > TIE_TOL:
        above = grid >= z_ai
        losers = np.flatnonzero(above & (delta <= TIE_TOL))
        if losers.size:
            k = losers[-1]
            z_t = _crossing(lambda z: -delta_fn(z), grid[k], grid[min(k + 1, grid_n - 1)])
        else:
            z_t = z_ai

    diagnostics = {"sign_changes": _sign_changes(delta)}
    if z_b is not None:
        inside = grid < z_b - 1e-9
        outside = (grid > z_b + 1e-9) & (grid <= z_ai)
        diagnostics["B_interval"] = bool(np.all(delta[inside] > 0) and np.all(delta[outside] <= TIE_TOL))
    if z_t is not None:
        inside = grid > z_t + 1e-9
        outside = (grid < z_t - 1e-9) & (grid >= z_ai)
        diagnostics["T_interval"] = bool(np.all(delta[inside] > 0) and np.all(delta[outside] <= TIE_TOL))
    diagnostics["extremes_shape"] = diagnostics["sign_changes"] <= 2

    s_pre, s_post = summarize(pre), summarize(post)
    displacement = {
        "W_shrunk": s_post.measure_w < s_pre.measure_w,
        "S_grew": s_post.measure_s > s_pre.measure_s,
        "W_end_pre": s_pre.workers[1] if s_pre.workers else None,
        "W_end_post": s_post.workers[1] if s_post.workers else None,
        "S_start_pre": s_pre.solvers[0] if s_pre.solvers else None,
        "S_start_post": s_post.solvers[0] if s_post.solvers else None,
        "measure_W_pre": s_pre.measure_w,
        "measure_W_post": s_post.measure_w,
        "measure_S_pre": s_pre.measure_s,
        "measure_S_post": s_post.measure_s,
    }

    prod_z, prod_d, span_z, span_d = [], [], [], []
    for z in grid:
        a, b = productivity(pre, z), productivity(post, z)
        if a is not None and b is not None:
            prod_z.append(z)
            prod_d.append(b - a)
        if z < 1.0:
            a, b = span_of_control(pre, z), span_of_control(post, z)
            if a is not None and b is not None:
                span_z.append(z)
                span_d.append(b - a)

    return ComparisonReport(
        pre=s_pre,
        post=s_post,
        z_ai=z_ai,
        displacement=displacement,
        z_b=z_b,
        z_t=z_t,
        grid=grid,
        wage_delta=delta,
        productivity_delta=(np.array(prod_z), np.array(prod_d)),
        span_delta=(np.array(span_z), np.array(span_d)),
        output_delta=s_post.output - s_pre.output,
        labor_income_delta=s_post.labor_income - s_pre.labor_income,
        gini_pre=gini_of(pre, grid_n),
        gini_post=gini_of(post, grid_n),
        diagnostics=diagnostics,
    )


def find_zbar(template: EconomyParams, tol: float = 1e-6) -> float:
    """Least AI knowledge at which the least knowledgeable human gains from autonomous AI."""
    pre = solve_pre_ai(template)
    w0_pre = float(pre.wages(0.0))
    top_worker = pre.partition.workers[1]

    def gain_at_bottom(z_ai):
        post = solve_autonomous(template.with_(z_ai=z_ai))
        return float(post.wages(0.0)) - w0_pre

    lo, hi = 1e-3, top_worker - 1e-6
    if gain_at_bottom(hi) <= 0:
        raise NoCrossing(f"least knowledgeable never gain for z_ai up to {hi}")
    try:
        zbar = find_root_bracketed(gain_at_bottom, lo, hi, tol)
    except NoSignChange as exc:
        raise NoCrossing(str(exc)) from exc
    if not 0.0 < zbar < top_worker:
        raise NoCrossing(f"threshold {zbar} outside the pre-AI worker set")
    return zbar


class TradeoffReport(NamedTuple):
    output_auto: float
    output_nonauto: float
    w0_pre: float
    w0_auto: float
    w0_nonauto: float
    w1_pre: float
    w1_auto: float
    w1_nonauto: float
    gini_auto: float
    gini_nonauto: float

    def checks(self) -> dict[str, bool]:
        return {
            "output_auto_higher": self.output_auto > self.output_nonauto,
            "bottom_prefers_nonauto": self.w0_nonauto >= max(self.w0_pre, self.w0_auto),
            "top_prefers_auto": self.w1_nonauto <= self.w1_auto,
        }


def autonomy_tradeoff(params: EconomyParams, grid_n: int = 2001) -> TradeoffReport:
    pre = solve_pre_ai(params)
    auto = solve_autonomous(params)
    nonauto = solve_non_autonomous(params, pre=pre)
    return TradeoffReport(
        output_auto=accounting(auto).output,
        output_nonauto=accounting(nonauto).output,
        w0_pre=float(pre.wages(0.0)),
        w0_auto=float(auto.wages(0.0)),
        w0_nonauto=float(nonauto.wages(0.0)),
        w1_pre=float(pre.wages(1.0)),
        w1_auto=float(auto.wages(1.0)),
        w1_nonauto=float(nonauto.wages(1.0)),
        gini_auto=gini_of(auto, grid_n),
        gini_nonauto=gini_of(nonauto, grid_n),
    )


def gini_from_wages(dist, wage_fn, grid_n: int = 2001) -> float:
    """Gini of labor income from the Lorenz curve traced along knowledge.

    Wages are nondecreasing in knowledge, so ordering by knowledge orders by
    income; both coordinates of the Lorenz curve use trapezoid sums.
    """
    z = np.linspace(0.0, 1.0, grid_n)
    w = np.asarray(wage_fn(z), dtype=float)
    p = dist.cdf(z)
    wg = w * dist.pdf(z)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (wg[1:] + wg[:-1]) * np.diff(z))))
    if cum[-1] <= 0:
        return 0.0
    lorenz = cum / cum[-1]
    area = np.sum(0.5 * (lorenz[1:] + lorenz[:-1]) * np.diff(p))
    return float(1.0 - 2.0 * area)


def gini_of(eq: Equilibrium, grid_n: int = 2001) -> float:
    return gini_from_wages(eq.params.dist, eq.wages, grid_n)
