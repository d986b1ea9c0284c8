"""Economic primitives: parameters, occupations, wage schedules, profits.

A candidate equilibrium is certified by :func:`audit_no_arbitrage`, which
searches every firm type over a knowledge grid for a profitable deviation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .distributions import KnowledgeDistribution
from .errors import (
    DivergentSpan,
    IdentityViolated,
    InvalidParams,
    PreconditionViolated,
)
from .numerics import (
    DEFAULT_QUAD_TOL,
    DEFAULT_ROOT_TOL,
    DEFAULT_STEPS,
    GridFunction,
    MatchingPath,
    integrate_adaptive,
)

CERTIFY_TOL = 1e-6
IDENTITY_RTOL = 1e-8


@dataclass(frozen=True)
class Settings:
    ode_steps: int = DEFAULT_STEPS
    root_tol: float = DEFAULT_ROOT_TOL
    quad_tol: float = DEFAULT_QUAD_TOL
    audit_grid: int = 200

    def __post_init__(self):
        if self.ode_steps < 16 or self.ode_steps % 2:
            raise InvalidParams("ode_steps must be an even count >= 16")
        if not (self.root_tol > 0 and self.quad_tol > 0):
            raise InvalidParams("tolerances must be positive")
        if self.audit_grid < 3:
            raise InvalidParams("audit_grid must be at least 3")


@dataclass(frozen=True)
class EconomyParams:
    dist: KnowledgeDistribution
    h: float
    z_ai: float = 0.0
    mu: float = 0.0
    settings: Settings = field(default_factory=Settings)

    def __post_init__(self):
        if not 1e-6 < self.h < 1 - 1e-6:
            raise InvalidParams(f"h={self.h} outside (1e-6, 1-1e-6)")
        if not 0.0 <= self.z_ai <= 1 - 1e-6:
            raise InvalidParams(f"z_ai={self.z_ai} outside [0, 1-1e-6]")
        if not self.mu >= 0.0:
            raise InvalidParams(f"mu={self.mu} must be nonnegative")

    def with_(self, **changes) -> "EconomyParams":
        return replace(self, **changes)


class Regime(str, enum.Enum):
    PRE_AI = "PreAI"
    AUTONOMOUS = "Autonomous"
    NON_AUTONOMOUS = "NonAutonomous"


class Occupation(str, enum.Enum):
    WA = "Wa"
    WP = "Wp"
    I = "I"  # noqa: E741
    SP = "Sp"
    SA = "Sa"

    @property
    def rank(self) -> int:
        return _RANK[self]

    @property
    def is_worker(self) -> bool:
        return self in (Occupation.WA, Occupation.WP)

    @property
    def is_solver(self) -> bool:
        return self in (Occupation.SP, Occupation.SA)


_RANK = {occ: i for i, occ in enumerate(Occupation)}
_EDGE_TOL = 1e-12


class Interval(NamedTuple):
    lo: float
    hi: float
    label: Occupation


@dataclass(frozen=True)
class OccupationPartition:
    intervals: tuple[Interval, ...]

    def __post_init__(self):
        ivs = self.intervals
        if not ivs:
            raise PreconditionViolated("empty partition")
        if abs(ivs[0].lo) > _EDGE_TOL or abs(ivs[-1].hi - 1.0) > _EDGE_TOL:
            raise PreconditionViolated("partition must tile [0, 1]")
        for a, b in zip(ivs, ivs[1:]):
            if abs(a.hi - b.lo) > _EDGE_TOL:
                raise PreconditionViolated(f"gap or overlap between {a} and {b}")
            if a.label.rank >= b.label.rank:
                raise PreconditionViolated(f"labels out of order: {a.label} before {b.label}")
        for iv in ivs:
            if iv.hi < iv.lo:
                raise PreconditionViolated(f"reversed interval {iv}")

    @classmethod
    def from_breaks(cls, pieces: Sequence[tuple[float, float, Occupation]], min_width: float = 0.0):
        """Drop pieces narrower than ``min_width`` and stitch the rest."""
        kept = [Interval(float(a), float(b), Occupation(lab)) for a, b, lab in pieces if b - a > min_width]
        return cls(tuple(kept))

    def get(self, label: Occupation) -> Interval | None:
        for iv in self.intervals:
            if iv.label == label:
                return iv
        return None

    def has(self, label: Occupation) -> bool:
        return self.get(label) is not None

    def labels(self) -> list[Occupation]:
        return [iv.label for iv in self.intervals]

    def label_at(self, z: float) -> Occupation:
        for iv in self.intervals:
            if z < iv.hi:
                return iv.label
        return self.intervals[-1].label

    def labels_at(self, zs: np.ndarray) -> list[Occupation]:
        uppers = np.array([iv.hi for iv in self.intervals])
        idx = np.minimum(np.searchsorted(uppers, zs, side="right"), len(uppers) - 1)
        return [self.intervals[i].label for i in idx]

    def _span(self, pred) -> tuple[float, float] | None:
        ivs = [iv for iv in self.intervals if pred(iv.label)]
        if not ivs:
            return None
        return ivs[0].lo, ivs[-1].hi

    @property
    def workers(self):
        return self._span(lambda o: o.is_worker)

    @property
    def solvers(self):
        return self._span(lambda o: o.is_solver)

    def measure(self, dist: KnowledgeDistribution, *labels: Occupation) -> float:
        return float(sum(dist.cdf(iv.hi) - dist.cdf(iv.lo) for iv in self.intervals if iv.label in labels))

    def check_ai_ordering(self, z_ai: float, tol: float = 1e-9) -> bool:
        """True when no worker knows more than AI and no solver knows less."""
        w, s = self.workers, self.solvers
        return (w is None or w[1] <= z_ai + tol) and (s is None or s[0] >= z_ai - tol)


# ---------------------------------------------------------------------------
# wage schedule segments


@dataclass(frozen=True)
class Linear:
    lo: float
    hi: float
    intercept: float
    slope: float

    def __call__(self, z):
        return self.intercept + self.slope * np.asarray(z, dtype=float)


@dataclass(frozen=True)
class IndependentProducer:
    lo: float
    hi: float

    def __call__(self, z):
        return np.asarray(z, dtype=float) * 1.0


@dataclass(frozen=True, eq=False)
class WorkerComposite:
    """w(z) = m(z) - h(1-z) w_S(m(z)), with w_S(m(z)) = const + J(z)."""

    lo: float
    hi: float
    h: float
    path: MatchingPath
    const: float

    def __call__(self, z):
        z = np.clip(np.asarray(z, dtype=float), self.path.zs[0], self.path.zs[-1])
        m = np.interp(z, self.path.zs, self.path.ms)
        j = np.interp(z, self.path.zs, self.path.js)
        return m - self.h * (1.0 - z) * (self.const + j)

    def node_values(self) -> np.ndarray:
        p = self.path
        return p.ms - self.h * (1.0 - p.zs) * (self.const + p.js)


@dataclass(frozen=True, eq=False)
class SolverIntegral:
    """w(s) = const + integral of n(e(u)) du from inf S_p to s."""

    lo: float
    hi: float
    path: MatchingPath
    const: float

    def __call__(self, s):
        s = np.clip(np.asarray(s, dtype=float), self.path.ms[0], self.path.ms[-1])
        z = np.interp(s, self.path.ms, self.path.zs)
        return self.const + np.interp(z, self.path.zs, self.path.js)


@dataclass(frozen=True, eq=False)
class Tabulated:
    lo: float
    hi: float
    grid: GridFunction

    def __call__(self, z):
        z = np.clip(np.asarray(z, dtype=float), self.grid.xs[0], self.grid.xs[-1])
        return np.interp(z, self.grid.xs, self.grid.ys)


Segment = Linear | IndependentProducer | WorkerComposite | SolverIntegral | Tabulated


@dataclass(frozen=True, eq=False)
class WageSchedule:
    segments: tuple

    def __post_init__(self):
        segs = self.segments
        if not segs:
            raise PreconditionViolated("wage schedule needs at least one segment")
        for a, b in zip(segs, segs[1:]):
            if abs(a.hi - b.lo) > _EDGE_TOL:
                raise PreconditionViolated("wage segments must be contiguous")

    def segment_index(self, z):
        uppers = np.array([s.hi for s in self.segments])
        return np.minimum(np.searchsorted(uppers, z, side="right"), len(uppers) - 1)

    def __call__(self, z):
        z_arr = np.asarray(z, dtype=float)
        flat = np.atleast_1d(z_arr)
        idx = self.segment_index(flat)
        out = np.empty_like(flat)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = seg(flat[mask])
        return float(out[0]) if z_arr.ndim == 0 else out.reshape(z_arr.shape)

    def jumps(self) -> list[tuple[float, float]]:
        """(breakpoint, |left - right|) at each internal breakpoint."""
        return [(a.hi, float(abs(a(a.hi) - b(b.lo)))) for a, b in zip(self.segments, self.segments[1:])]

    def replace_segment(self, index: int, seg) -> "WageSchedule":
        segs = list(self.segments)
        segs[index] = seg
        return WageSchedule(tuple(segs))


@dataclass(frozen=True)
class ComputeAllocation:
    mu_i: float = 0.0
    mu_w: float = 0.0
    mu_s: float = 0.0

    @property
    def total(self) -> float:
        return self.mu_i + self.mu_w + self.mu_s


class Firm(NamedTuple):
    kind: str  # "single", "single_ai", "nA", "tA", "bA"
    z: float | None = None
    s: float | None = None


class AuditReport(NamedTuple):
    max_profit: float
    argmax: Firm

    @property
    def certified(self) -> bool:
        return self.max_profit <= CERTIFY_TOL


@dataclass(frozen=True, eq=False)
class Equilibrium:
    params: EconomyParams
    regime: Regime
    partition: OccupationPartition
    wages: WageSchedule
    r: float
    compute: ComputeAllocation
    config: str
    config_tag: str = ""
    matching: GridFunction | None = None
    path: MatchingPath | None = None
    residuals: dict = field(default_factory=dict)
    audit: AuditReport | None = None

    @property
    def max_residual(self) -> float:
        return max((abs(v) for v in self.residuals.values()), default=0.0)

    @property
    def certified(self) -> bool:
        return self.audit is not None and self.audit.certified and self.max_residual <= CERTIFY_TOL

    def wage(self, z):
        return self.wages(z)


class Accounts(NamedTuple):
    output: float
    labor_income: float
    capital_income: float


# ---------------------------------------------------------------------------
# primitives


def span(h: float, z):
    """Workers per solver, n(z) = 1 / (h (1 - z))."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr >= 1 - 1e-9):
        raise DivergentSpan(f"span diverges at z={z}")
    out = 1.0 / (h * (1.0 - z_arr))
    return float(out) if out.ndim == 0 else out


def _profits(kind, h, z_ai, r, wage, z=None, s=None):
    """Vectorized profit formulas shared by firm_profit and the audit."""
    if kind == "single":
        return z - wage(z)
    if kind == "single_ai":
        return np.asarray(z_ai - r, dtype=float)
    if kind == "tA":
        return span(h, z) * (z_ai - wage(z)) - r
    if kind == "bA":
        return span(h, z_ai) * (s - r) - wage(s)
    if kind == "nA":
        return span(h, z) * (s - wage(z)) - wage(s)
    raise PreconditionViolated(f"unknown firm kind {kind!r}")


def firm_profit(params: EconomyParams, wages, r: float, firm: Firm) -> float:
    z, s = firm.z, firm.s
    for v in (z, s):
        if v is not None and not 0.0 <= v <= 1.0:
            raise PreconditionViolated(f"knowledge {v} outside [0, 1]")
    z_ai = params.z_ai
    if firm.kind in ("single", "tA", "nA") and z is None:
        raise PreconditionViolated(f"{firm.kind} firm needs a worker knowledge z")
    if firm.kind == "nA" and (s is None or z > s):
        raise PreconditionViolated("nA firm needs z <= s")
    if firm.kind == "tA" and z > z_ai:
        raise PreconditionViolated("tA firm needs z <= z_ai")
    if firm.kind == "bA" and (s is None or s < z_ai):
        raise PreconditionViolated("bA firm needs s >= z_ai")
    return float(_profits(firm.kind, params.h, z_ai, r, wages, z, s))


FIRM_KINDS = {
    Regime.PRE_AI: ("single", "nA"),
    Regime.AUTONOMOUS: ("single", "single_ai", "nA", "tA", "bA"),
    Regime.NON_AUTONOMOUS: ("single", "nA", "tA"),
}


def audit_no_arbitrage(eq: Equilibrium, grid_n: int | None = None) -> AuditReport:
    """Largest profit any firm type earns at the candidate prices."""
    p = eq.params
    n = grid_n or p.settings.audit_grid
    h, z_ai, r, wage = p.h, p.z_ai, eq.r, eq.wages
    grid = np.linspace(0.0, 1.0, n)
    best = (-np.inf, Firm("single", 0.0))

    def consider(value, firm):
        nonlocal best
        if value > best[0]:
            best = (float(value), firm)

    for kind in FIRM_KINDS[eq.regime]:
        if kind == "single":
            prof = _profits(kind, h, z_ai, r, wage, z=grid)
            k = int(np.argmax(prof))
            consider(prof[k], Firm(kind, float(grid[k])))
        elif kind == "single_ai":
            consider(z_ai - r, Firm(kind))
        elif kind == "tA":
            zs = np.linspace(0.0, z_ai, n)
            prof = _profits(kind, h, z_ai, r, wage, z=zs)
            k = int(np.argmax(prof))
            consider(prof[k], Firm(kind, float(zs[k])))
        elif kind == "bA":
            ss = np.linspace(z_ai, 1.0, n)
            prof = _profits(kind, h, z_ai, r, wage, s=ss)
            k = int(np.argmax(prof))
            consider(prof[k], Firm(kind, s=float(ss[k])))
        else:
            zs = grid[grid < 1 - 1e-9]
            wz = wage(zs)
            ws = wage(grid)
            nz = span(h, zs)
            prof = nz[:, None] * (grid[None, :] - wz[:, None]) - ws[None, :]
            prof[zs[:, None] > grid[None, :]] = -np.inf
            i, j = np.unravel_index(int(np.argmax(prof)), prof.shape)
            consider(prof[i, j], Firm(kind, float(zs[i]), float(grid[j])))
    return AuditReport(*best)


def wage_at(eq: Equilibrium, z):
    z_arr = np.asarray(z, dtype=float)
    if np.any((z_arr < 0) | (z_arr > 1)):
        raise PreconditionViolated(f"z={z} outside [0, 1]")
    return eq.wages(z)


# ---------------------------------------------------------------------------
# accounting


def _integrate_dg(dist: KnowledgeDistribution, f, a: float, b: float, tol: float) -> float:
    """Integral of f dG over [a, b], split at the density knots."""
    if b <= a:
        return 0.0
    cuts = [a] + [k for k in dist.zs if a < k < b] + [b]
    return sum(
        integrate_adaptive(lambda x: float(f(x)) * float(dist.pdf(x)), lo, hi, tol)
        for lo, hi in zip(cuts, cuts[1:])
    )


def _simpson_nodes(xs: np.ndarray, ys: np.ndarray) -> float:
    """Composite Simpson on a uniform grid with an even number of intervals."""
    if len(xs) < 3 or (len(xs) - 1) % 2:
        return float(np.trapezoid(ys, xs))
    dx = (xs[-1] - xs[0]) / (len(xs) - 1)
    return float(dx / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum()))


def _segment_income(seg, dist: KnowledgeDistribution, h: float, tol: float) -> float:
    if isinstance(seg, WorkerComposite):
        p = seg.path
        return _simpson_nodes(p.zs, seg.node_values() * dist.pdf(p.zs))
    if isinstance(seg, SolverIntegral):
        # substitute s = m(z): g(m) m' dz = h (1 - z) g(z) dz
        p = seg.path
        return _simpson_nodes(p.zs, (seg.const + p.js) * h * (1.0 - p.zs) * dist.pdf(p.zs))
    return _integrate_dg(dist, seg, seg.lo, seg.hi, tol)


def labor_income(eq: Equilibrium) -> float:
    p = eq.params
    return float(sum(_segment_income(seg, p.dist, p.h, p.settings.quad_tol) for seg in eq.wages.segments))


def total_output(eq: Equilibrium) -> float:
    p = eq.params
    dist, tol, z_ai = p.dist, p.settings.quad_tol, p.z_ai
    part = eq.partition
    out = 0.0
    if (iv := part.get(Occupation.I)) is not None:
        out += _integrate_dg(dist, lambda z: z, iv.lo, iv.hi, tol)
    if eq.regime == Regime.AUTONOMOUS:
        # idle compute produces nothing in the other regimes
        out += z_ai * eq.compute.mu_i
    if part.get(Occupation.WP) is not None and eq.path is not None:
        out += _simpson_nodes(eq.path.zs, eq.path.ms * dist.pdf(eq.path.zs))
    if (iv := part.get(Occupation.SA)) is not None:
        n_ai = span(p.h, z_ai)
        out += _integrate_dg(dist, lambda z: n_ai * z, iv.lo, iv.hi, tol)
    if (iv := part.get(Occupation.WA)) is not None:
        out += z_ai * (dist.cdf(iv.hi) - dist.cdf(iv.lo))
    return float(out)


def accounting(eq: Equilibrium, check: bool = True) -> Accounts:
    output = total_output(eq)
    labor = labor_income(eq)
    capital = eq.params.mu * eq.r if eq.regime != Regime.PRE_AI else 0.0
    gap = abs(output - labor - capital)
    if check and gap > IDENTITY_RTOL * max(abs(output), 1e-300):
        raise IdentityViolated(f"output {output} != labor {labor} + capital {capital} (gap {gap:.3e})")
    return Accounts(output, labor, capital)


# ---------------------------------------------------------------------------
# diagnostics shared by the solvers


def resource_constraint_error(eq: Equilibrium, n_intervals: int = 20, seed: int = 0) -> float:
    """Max relative violation of the worker/solver time balance on random subintervals of Wp."""
    if eq.matching is None:
        return 0.0
    p = eq.params
    dist, h = p.dist, p.h
    lo, hi = eq.matching.lo, eq.matching.hi
    rng = np.random.default_rng(seed)
    min_w = 0.05 * (hi - lo)
    worst = 0.0
    for _ in range(n_intervals):
        a = rng.uniform(lo, hi - min_w)
        b = rng.uniform(a + min_w, hi)
        demand = _integrate_dg(dist, lambda u: h * (1.0 - u), a, b, p.settings.quad_tol * 1e-2)
        supply = dist.cdf(min(eq.matching(b), 1.0)) - dist.cdf(min(eq.matching(a), 1.0))
        worst = max(worst, abs(demand - supply) / abs(demand))
    return worst


def continuity_residuals(wages: WageSchedule) -> dict:
    return {f"jump@{z:.6f}": gap for z, gap in wages.jumps()}


def certify(eq: Equilibrium) -> Equilibrium:
    """Attach the audit report to ``eq``."""
    return replace(eq, audit=audit_no_arbitrage(eq))
