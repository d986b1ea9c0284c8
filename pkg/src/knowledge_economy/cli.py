"""Batch command-line interface writing CSV and JSON artifacts.

Exit codes: 0 success, 2 bad configuration, 3 equilibrium not certified,
4 file-system error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import distributions
from .analysis import autonomy_tradeoff, compare_pre_post, gini_of
from .autonomous import solve_autonomous
from .errors import (
    AbundanceViolated,
    AuditFailed,
    DistributionError,
    InvalidParams,
    ModelError,
    NoConfigCertified,
    NoConvergence,
    NumericsError,
)
from .model import (
    EconomyParams,
    Equilibrium,
    Occupation,
    Settings,
    accounting,
    resource_constraint_error,
)
from .non_autonomous import ai_adopted, solve_non_autonomous
from .numerics import DEFAULT_QUAD_TOL, DEFAULT_ROOT_TOL, DEFAULT_STEPS
from .pre_ai import compute_h0, solve_pre_ai

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_UNCERTIFIED, EXIT_IO = 0, 2, 3, 4
MODES = ("pre", "autonomous", "non_autonomous", "compare", "tradeoff")
SOLVE_MODES = ("pre", "autonomous", "non_autonomous")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.start]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class RunConfig:
    distribution: dict = field(default_factory=lambda: {"type": "uniform"})
    h: float = 0.5
    z_ai: float = 0.0
    mu: float = 0.0
    mode: str = "pre"
    post: str = "autonomous"
    grid_points: int = 2001
    ode_steps: int = DEFAULT_STEPS
    root_tol: float = DEFAULT_ROOT_TOL
    quad_tol: float = DEFAULT_QUAD_TOL
    out: str | None = None
    sweep: SweepSpec | None = None

    def params(self, **changes) -> EconomyParams:
        settings = Settings(ode_steps=self.ode_steps, root_tol=self.root_tol, quad_tol=self.quad_tol)
        values = {"h": self.h, "z_ai": self.z_ai, "mu": self.mu, **changes}
        return EconomyParams(distributions.from_dict(self.distribution), settings=settings, **values)


_KNOWN_KEYS = {
    "distribution", "h", "z_ai", "mu", "mode", "post", "grid_points",
    "ode_steps", "tolerances", "out", "sweep",
}


def parse_config(doc: dict) -> RunConfig:
    """Validate a JSON config document and build a ``RunConfig``."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "h" not in doc:
        raise ConfigError("config needs h")
    tol = doc.get("tolerances", {})
    try:
        sweep = None
        if (sw := doc.get("sweep")) is not None:
            sweep = SweepSpec(str(sw["param"]), float(sw["from"]), float(sw["to"]), int(sw["steps"]))
        cfg = RunConfig(
            distribution=doc.get("distribution", {"type": "uniform"}),
            h=float(doc["h"]),
            z_ai=float(doc.get("z_ai", 0.0)),
            mu=float(doc.get("mu", 0.0)),
            mode=str(doc.get("mode", "pre")),
            post=str(doc.get("post", "autonomous")),
            grid_points=int(doc.get("grid_points", 2001)),
            ode_steps=int(doc.get("ode_steps", DEFAULT_STEPS)),
            root_tol=float(tol.get("root", DEFAULT_ROOT_TOL)),
            quad_tol=float(tol.get("quad", DEFAULT_QUAD_TOL)),
            out=doc.get("out"),
            sweep=sweep,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    if cfg.post not in ("autonomous", "non_autonomous"):
        raise ConfigError("post must be autonomous or non_autonomous")
    if cfg.grid_points < 2:
        raise ConfigError("grid_points must be at least 2")
    if sweep is not None:
        if sweep.param not in ("z_ai", "h"):
            raise ConfigError("sweep param must be z_ai or h")
        if sweep.steps < 1:
            raise ConfigError("sweep steps must be positive")
        for v in (sweep.start, sweep.stop):
            cfg.params(**{sweep.param: v})
    cfg.params()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)


# ---------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    """CSV cell: 9 significant digits, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.9g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


class ArtifactWriter:
    """Writes into one directory, skipping files excluded by ``--format``."""

    def __init__(self, out_dir: Path, fmt_filter: str | None):
        self.out_dir = out_dir
        self.fmt_filter = fmt_filter
        self.written: list[Path] = []

    def _wanted(self, kind: str) -> bool:
        return self.fmt_filter is None or self.fmt_filter == kind

    def _write(self, name: str, text: str):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(path)

    def json(self, name: str, doc: dict):
        if self._wanted("json"):
            self._write(name, json.dumps(_jsonable(doc), indent=2) + "\n")

    def csv(self, name: str, header: list[str], rows):
        if not self._wanted("csv"):
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        self._write(name, buf.getvalue())


# ---------------------------------------------------------------------------
# runs


def solve(cfg: RunConfig, mode: str | None = None, **changes) -> Equilibrium:
    mode = mode or cfg.mode
    params = cfg.params(**changes)
    if mode == "pre":
        return solve_pre_ai(params)
    if mode == "autonomous":
        return solve_autonomous(params)
    if mode == "non_autonomous":
        return solve_non_autonomous(params)
    raise ConfigError(f"mode {mode!r} does not name a single equilibrium")


def breakpoints(eq: Equilibrium) -> dict:
    out = {}
    for iv in eq.partition.intervals:
        out[f"{iv.label.value}_start"] = iv.lo
        out[f"{iv.label.value}_end"] = iv.hi
    for name, rng in (("W", eq.partition.workers), ("S", eq.partition.solvers)):
        if rng is not None:
            out[f"{name}_start"], out[f"{name}_end"] = rng
    return out


def summary(eq: Equilibrium, grid_points: int) -> dict:
    acc = accounting(eq)
    doc = {
        "regime": eq.regime.value,
        "config": eq.config,
        "config_tag": eq.config_tag,
        "h": eq.params.h,
        "z_ai": eq.params.z_ai,
        "mu": eq.params.mu,
        "breakpoints": breakpoints(eq),
        "r": eq.r,
        "compute": {"mu_i": eq.compute.mu_i, "mu_w": eq.compute.mu_w, "mu_s": eq.compute.mu_s},
        "output": acc.output,
        "labor_income": acc.labor_income,
        "capital_income": acc.capital_income,
        "gini": gini_of(eq, grid_points),
        "w0": float(eq.wages(0.0)),
        "w1": float(eq.wages(1.0)),
        "residuals": dict(sorted(eq.residuals.items())),
        "audit": {"max_profit": eq.audit.max_profit, "argmax": eq.audit.argmax._asdict()},
        "certified": eq.certified,
    }
    if eq.regime.value == "NonAutonomous":
        doc["ai_adopted"] = ai_adopted(eq)
    return doc


def wage_rows(eq: Equilibrium, grid_points: int):
    zs = np.linspace(0.0, 1.0, grid_points)
    ws = eq.wages(zs)
    labels = eq.partition.labels_at(zs)
    for z, w, lab in zip(zs, ws, labels):
        if lab == Occupation.WP:
            match = float(np.interp(z, eq.path.zs, eq.path.ms))
        elif lab == Occupation.WA:
            match = eq.params.z_ai
        else:
            match = None
        yield z, w, lab.value, match


def run_solve(cfg: RunConfig, writer: ArtifactWriter) -> int:
    if cfg.mode not in SOLVE_MODES:
        raise ConfigError(f"solve needs mode in {SOLVE_MODES}, got {cfg.mode!r}")
    eq = solve(cfg)
    writer.csv("wages.csv", ["z", "wage", "occupation", "match"], wage_rows(eq, cfg.grid_points))
    writer.json("summary.json", summary(eq, cfg.grid_points))
    return EXIT_OK if eq.certified else EXIT_UNCERTIFIED


def run_compare(cfg: RunConfig, writer: ArtifactWriter) -> int:
    pre = solve(cfg, "pre")
    post = solve(cfg, cfg.post)
    rep = compare_pre_post(pre, post, cfg.grid_points)
    rows = zip(rep.grid, pre.wages(rep.grid), post.wages(rep.grid), rep.wage_delta)
    writer.csv("comparison.csv", ["z", "w_pre", "w_post", "delta"], rows)
    writer.json(
        "comparison.json",
        {
            "post_regime": post.regime.value,
            "post_config": post.config,
            "z_ai": rep.z_ai,
            "z_b": rep.z_b,
            "z_t": rep.z_t,
            "B_empty": rep.B_empty,
            "T_empty": rep.T_empty,
            "displacement": rep.displacement,
            "output_delta": rep.output_delta,
            "labor_income_delta": rep.labor_income_delta,
            "gini_pre": rep.gini_pre,
            "gini_post": rep.gini_post,
            "diagnostics": rep.diagnostics,
        },
    )
    return EXIT_OK


SWEEP_HEADER = [
    "param_value", "regime_config", "r", "output", "labor_income", "gini",
    "w0", "w1", "z_b", "z_t", "status",
]


def _sweep_point(cfg: RunConfig, mode: str, value: float, pre_cache: dict):
    change = {cfg.sweep.param: value}
    eq = solve(cfg, mode, **change)
    if not eq.certified:
        raise AuditFailed(f"max deviation profit {eq.audit.max_profit:.3e}")
    acc = accounting(eq)
    z_b = z_t = None
    if mode != "pre":
        key = cfg.params(**change).h
        if key not in pre_cache:
            pre_cache[key] = solve(cfg, "pre", **change)
        rep = compare_pre_post(pre_cache[key], eq, cfg.grid_points)
        z_b, z_t = rep.z_b, rep.z_t
    return [
        value, eq.config, eq.r, acc.output, acc.labor_income, gini_of(eq, cfg.grid_points),
        float(eq.wages(0.0)), float(eq.wages(1.0)), z_b, z_t, "ok",
    ]


def run_sweep(cfg: RunConfig, writer: ArtifactWriter) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a sweep block")
    mode = cfg.mode if cfg.mode in SOLVE_MODES else cfg.post
    rows, pre_cache, outputs = [], {}, []
    for value in cfg.sweep.values():
        try:
            row = _sweep_point(cfg, mode, value, pre_cache)
            outputs.append(row[3])
        except (ModelError, ValueError) as exc:
            log.warning("sweep point %s=%s failed: %s", cfg.sweep.param, value, exc)
            row = [value] + [None] * 9 + [type(exc).__name__]
        rows.append(row)
    if len(outputs) > 1 and np.any(np.diff(outputs) < -1e-9):
        log.info("output is not monotone along the sweep")
    writer.csv("sweep.csv", SWEEP_HEADER, rows)
    return EXIT_OK


def run_tradeoff(cfg: RunConfig, writer: ArtifactWriter) -> int:
    rep = autonomy_tradeoff(cfg.params(), cfg.grid_points)
    writer.json("tradeoff.json", {**rep._asdict(), "checks": rep.checks()})
    return EXIT_OK


def run_h0(cfg: RunConfig, writer: ArtifactWriter) -> int:
    params = cfg.params()
    writer.json("h0.json", {"h0": compute_h0(params.dist, params.settings)})
    return EXIT_OK


def run_audit(cfg: RunConfig, writer: ArtifactWriter) -> int:
    mode = cfg.mode if cfg.mode in SOLVE_MODES else cfg.post
    eq = solve(cfg, mode)
    acc = accounting(eq, check=False)
    doc = {
        "regime": eq.regime.value,
        "config": eq.config,
        "max_profit": eq.audit.max_profit,
        "argmax": eq.audit.argmax._asdict(),
        "residuals": dict(sorted(eq.residuals.items())),
        "identity_error": abs(acc.output - acc.labor_income - acc.capital_income),
        "resource_constraint_error": resource_constraint_error(eq) if eq.path is not None else 0.0,
        "certified": eq.certified,
    }
    writer.json("audit.json", doc)
    return EXIT_OK if eq.certified else EXIT_UNCERTIFIED


COMMANDS = {
    "solve": run_solve,
    "compare": run_compare,
    "sweep": run_sweep,
    "tradeoff": run_tradeoff,
    "h0": run_h0,
    "audit": run_audit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knowledge-economy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON run config")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--format", choices=("json", "csv"), help="write only artifacts of this kind")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out or cfg.out or ".")
        return COMMANDS[args.command](cfg, ArtifactWriter(out_dir, args.format))
    except (ConfigError, InvalidParams, DistributionError, AbundanceViolated) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoConfigCertified, AuditFailed, NoConvergence, NumericsError) as exc:
        print(f"not certified: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
