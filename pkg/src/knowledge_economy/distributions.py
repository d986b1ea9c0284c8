"""Population knowledge distribution G on [0, 1].

Densities are piecewise linear between knots, so the CDF is piecewise
quadratic and every integral the solvers need stays in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadSupport, NonPositiveDensity, OutOfSupport, UnsortedKnots

DENSITY_FLOOR = 1e-6
_SUPPORT_SLACK = 1e-12


@dataclass(frozen=True, eq=True)
class KnowledgeDistribution:
    """Continuous, strictly positive density on [0, 1].

    ``knots`` holds ``(z, density)`` pairs after normalization; the uniform
    distribution is stored as the two-knot constant density.
    """

    kind: str
    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        zs = np.array([k[0] for k in self.knots], dtype=float)
        ds = np.array([k[1] for k in self.knots], dtype=float)
        widths = np.diff(zs)
        # cumulative mass at each knot
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (ds[:-1] + ds[1:]) * widths)))
        object.__setattr__(self, "_zs", zs)
        object.__setattr__(self, "_ds", ds)
        object.__setattr__(self, "_slopes", np.diff(ds) / widths)
        object.__setattr__(self, "_cum", cum)

    @property
    def zs(self) -> np.ndarray:
        return self._zs

    @property
    def densities(self) -> np.ndarray:
        return self._ds

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"type": "uniform"}
        return {"type": "piecewise_linear", "knots": [list(k) for k in self.knots]}

    def pdf(self, z):
        z = _check_support(z)
        return np.interp(z, self._zs, self._ds)

    def cdf(self, z):
        z = _check_support(z)
        idx = np.clip(np.searchsorted(self._zs, z, side="right") - 1, 0, len(self._zs) - 2)
        t = z - self._zs[idx]
        out = self._cum[idx] + self._ds[idx] * t + 0.5 * self._slopes[idx] * t * t
        out = np.minimum(np.maximum(out, 0.0), 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def ppf(self, p):
        """Inverse CDF, solving the per-segment quadratic."""
        p = np.asarray(p, dtype=float)
        if np.any((p < -_SUPPORT_SLACK) | (p > 1 + _SUPPORT_SLACK)):
            raise OutOfSupport(f"probability outside [0, 1]: {p}")
        p = np.clip(p, 0.0, 1.0)
        idx = np.clip(np.searchsorted(self._cum, p, side="right") - 1, 0, len(self._zs) - 2)
        d0 = self._ds[idx]
        a = 0.5 * self._slopes[idx]
        rem = p - self._cum[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            # stable root of a t^2 + d0 t - rem = 0
            t_quad = 2.0 * rem / (d0 + np.sqrt(d0 * d0 + 4.0 * a * rem))
        out = np.clip(self._zs[idx] + t_quad, 0.0, 1.0)
        return float(out) if np.ndim(out) == 0 else out


def _check_support(z):
    arr = np.asarray(z, dtype=float)
    if np.any((arr < -_SUPPORT_SLACK) | (arr > 1 + _SUPPORT_SLACK)) or np.any(np.isnan(arr)):
        raise OutOfSupport(f"knowledge outside [0, 1]: {z}")
    arr = np.clip(arr, 0.0, 1.0)
    return float(arr) if arr.ndim == 0 else arr


def make_uniform() -> KnowledgeDistribution:
    return KnowledgeDistribution("uniform", ((0.0, 1.0), (1.0, 1.0)))


def from_density_knots(knots: Iterable[Sequence[float]]) -> KnowledgeDistribution:
    """Build a distribution whose density interpolates ``knots`` linearly.

    The total mass is rescaled to one when it lies within [0.5, 2]; anything
    further from unity is almost certainly a typo and is rejected.
    """
    pts = [(float(z), float(d)) for z, d in knots]
    if len(pts) < 2:
        raise BadSupport("need at least two knots")
    zs = np.array([p[0] for p in pts])
    ds = np.array([p[1] for p in pts])
    if zs[0] != 0.0 or zs[-1] != 1.0:
        raise BadSupport(f"knots must start at 0 and end at 1, got {zs[0]} .. {zs[-1]}")
    if np.any(np.diff(zs) <= 0):
        raise UnsortedKnots("knot positions must be strictly increasing")
    if np.any(ds < DENSITY_FLOOR) or not np.all(np.isfinite(ds)):
        raise NonPositiveDensity(f"density below {DENSITY_FLOOR} at a knot")
    mass = float(np.sum(0.5 * (ds[:-1] + ds[1:]) * np.diff(zs)))
    if not 0.5 <= mass <= 2.0:
        raise NonPositiveDensity(f"total mass {mass} too far from 1 to normalize")
    ds = ds / mass
    if np.all(ds == ds[0]) and len(ds) == 2:
        return make_uniform()
    return KnowledgeDistribution("piecewise_linear", tuple(zip(zs.tolist(), ds.tolist())))


def from_dict(doc: dict) -> KnowledgeDistribution:
    kind = doc.get("type")
    if kind == "uniform":
        return make_uniform()
    if kind == "piecewise_linear":
        return from_density_knots(doc["knots"])
    raise BadSupport(f"unknown distribution type {kind!r}")


def pdf_at(d: KnowledgeDistribution, z):
    return d.pdf(z)


def cdf_at(d: KnowledgeDistribution, z):
    return d.cdf(z)


def mass_between(d: KnowledgeDistribution, a, b):
    a = _check_support(a)
    b = _check_support(b)
    if np.any(np.asarray(a) > np.asarray(b)):
        raise OutOfSupport(f"mass_between needs a <= b, got {a} > {b}")
    return d.cdf(b) - d.cdf(a)
