"""Numerical kernel: root finding, the matching ODE, quadrature, grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np
from scipy import optimize

from .distributions import KnowledgeDistribution
from .errors import (
    DegenerateInterval,
    MaxDepth,
    MaxIterations,
    NoSignChange,
    OutOfRange,
    RangeExceeded,
)

DEFAULT_STEPS = 4096
DEFAULT_ROOT_TOL = 1e-12
DEFAULT_QUAD_TOL = 1e-10
MAX_ROOT_ITER = 200
MAX_QUAD_DEPTH = 50
_GRID_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Strictly increasing tabulated function with a linear interpolant."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=float)
        ys = np.ascontiguousarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise ValueError("GridFunction needs two equal-length 1-D arrays of length >= 2")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("GridFunction abscissae and ordinates must be strictly increasing")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def lo(self) -> float:
        return float(self.xs[0])

    @property
    def hi(self) -> float:
        return float(self.xs[-1])

    def __call__(self, x):
        return grid_eval(self, x)

    def inverse(self, y):
        return grid_inverse_eval(self, y)


def _interp(x, xp, fp):
    x = np.asarray(x, dtype=float)
    span = _GRID_SLACK * max(1.0, abs(xp[-1]))
    if np.any(x < xp[0] - span) or np.any(x > xp[-1] + span) or np.any(np.isnan(x)):
        raise OutOfRange(f"query {x} outside tabulated range [{xp[0]}, {xp[-1]}]")
    out = np.interp(x, xp, fp)
    return float(out) if out.ndim == 0 else out


def grid_eval(f: GridFunction, x):
    return _interp(x, f.xs, f.ys)


def grid_inverse_eval(f: GridFunction, y):
    return _interp(y, f.ys, f.xs)


def find_root_bracketed(
    f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_ROOT_TOL
) -> float:
    """Bracketed root of ``f`` on [lo, hi] (Brent: bisection plus secant steps)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = (lo, hi) if lo <= hi else (hi, lo)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({lo})={flo:.3e} and f({hi})={fhi:.3e} share a sign")
    try:
        root, info = optimize.brentq(
            f, lo, hi, xtol=tol, maxiter=MAX_ROOT_ITER, full_output=True, disp=False
        )
    except RuntimeError as exc:
        raise MaxIterations(str(exc)) from exc
    if not info.converged:
        raise MaxIterations(f"no convergence after {info.iterations} iterations")
    return float(root)


def integrate_adaptive(
    f: Callable[[float], float], a: float, b: float, tol: float = DEFAULT_QUAD_TOL
) -> float:
    """Adaptive Simpson quadrature with absolute tolerance ``tol``."""
    if b < a:
        raise ValueError("integrate_adaptive needs a <= b")
    if b == a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    return _simpson_step(f, a, b, fa, fm, fb, whole, tol, 0)


def _simpson_step(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth >= MAX_QUAD_DEPTH:
        raise MaxDepth(f"adaptive Simpson exceeded depth {MAX_QUAD_DEPTH} on [{a}, {b}]")
    return _simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + _simpson_step(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1
    )


@numba.njit(cache=True, inline="always")
def _density(x, knot_z, knot_d):
    n = knot_z.shape[0]
    if x <= knot_z[0]:
        return knot_d[0]
    if x >= knot_z[n - 1]:
        return knot_d[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if knot_z[mid] <= x:
            lo = mid
        else:
            hi = mid
    t = (x - knot_z[lo]) / (knot_z[hi] - knot_z[lo])
    return knot_d[lo] + t * (knot_d[hi] - knot_d[lo])


@numba.njit(cache=True)
def _rk4_matching(knot_z, knot_d, h, z_lo, z_hi, m_lo, steps):
    """Integrate m' = h(1-z)g(z)/g(m) jointly with J' = g(z)/g(m).

    J is the solver-wage increment: along the matching, dJ = n(e(u)) du.
    Densities outside [0, 1] are held constant so shooting can overshoot.
    """
    zs = np.empty(steps + 1)
    ms = np.empty(steps + 1)
    js = np.empty(steps + 1)
    dz = (z_hi - z_lo) / steps
    m = m_lo
    j = 0.0
    zs[0] = z_lo
    ms[0] = m
    js[0] = 0.0
    for k in range(steps):
        z0 = z_lo + k * dz
        zh = z0 + 0.5 * dz
        z1 = z_lo + (k + 1) * dz
        g0 = _density(z0, knot_z, knot_d)
        gh = _density(zh, knot_z, knot_d)
        g1 = _density(z1, knot_z, knot_d)
        a0 = h * (1.0 - z0) * g0
        ah = h * (1.0 - zh) * gh
        a1 = h * (1.0 - z1) * g1

        q1 = 1.0 / _density(m, knot_z, knot_d)
        k1 = a0 * q1
        q2 = 1.0 / _density(m + 0.5 * dz * k1, knot_z, knot_d)
        k2 = ah * q2
        q3 = 1.0 / _density(m + 0.5 * dz * k2, knot_z, knot_d)
        k3 = ah * q3
        q4 = 1.0 / _density(m + dz * k3, knot_z, knot_d)
        k4 = a1 * q4

        m += dz * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        j += dz * (g0 * q1 + 2.0 * gh * q2 + 2.0 * gh * q3 + g1 * q4) / 6.0
        zs[k + 1] = z1
        ms[k + 1] = m
        js[k + 1] = j
    zs[steps] = z_hi
    return zs, ms, js


@dataclass(frozen=True)
class MatchingPath:
    """Tabulated matching on worker knowledge plus the solver-wage increment."""

    zs: np.ndarray
    ms: np.ndarray
    js: np.ndarray

    @property
    def end(self) -> float:
        return float(self.ms[-1])

    @property
    def payroll(self) -> float:
        return float(self.js[-1])


def integrate_matching(
    d: KnowledgeDistribution, h: float, z_lo: float, z_hi: float, m_lo: float, steps: int
) -> MatchingPath:
    """Raw RK4 path; no range checks, used inside shooting loops."""
    zs, ms, js = _rk4_matching(d.zs, d.densities, float(h), float(z_lo), float(z_hi), float(m_lo), int(steps))
    return MatchingPath(zs, ms, js)


def matching_endpoint(d, h, z_lo, z_hi, m_lo, steps) -> float:
    return integrate_matching(d, h, z_lo, z_hi, m_lo, steps).end


def solve_matching_ode(
    d: KnowledgeDistribution,
    h: float,
    z_lo: float,
    z_hi: float,
    m_lo: float,
    steps: int = DEFAULT_STEPS,
) -> GridFunction:
    """Fixed-step RK4 solution of the matching ODE, tabulated on ``steps`` intervals."""
    if z_hi <= z_lo:
        raise DegenerateInterval(f"matching interval [{z_lo}, {z_hi}] has no length")
    if not (0.0 <= z_lo and z_hi <= 1.0 and 0.0 <= m_lo <= 1.0):
        raise RangeExceeded("matching ODE arguments must lie in [0, 1]")
    if not 0.0 < h < 1.0:
        raise ValueError("h must lie in (0, 1)")
    if steps < 16:
        raise ValueError("steps must be at least 16")
    path = integrate_matching(d, h, z_lo, z_hi, m_lo, steps)
    if np.max(path.ms) > 1.0 + 1e-9:
        raise RangeExceeded(f"matching left [0, 1]: m({z_hi}) = {path.end}")
    return GridFunction(path.zs, path.ms)
