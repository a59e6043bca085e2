"""Batch front door: config loading, the five commands, structured exports.

Exit codes: 0 = pass, 1 = verification failure (or degenerate-curve
refusal), 2 = usage / config error. Reports are JSON under the schema
string "bhflow-report/1"; grids are CSV under "bhflow-grid/1". The
timestamp lives in its own top-level field so reports are otherwise
byte-identical for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .bihermitian import assemble, limit_check, positivity_scan, top_density
from .curve import continuation_samples, find_curve_point, translation_diagnostics
from .errors import BhflowError, ConfigError, CurveError
from .flow import IntegratorConfig
from .sampling import random_points
from .surfaces import (
    CP2,
    CP1XCP1,
    AnticanonicalSection,
    ChartPoint,
    KstarMetric,
    SurfaceModel,
    fermat_cubic,
    potential,
    product_unit_section,
    section_norm_sq,
)
from .verify import DEFAULT_TOLERANCES, full_report

REPORT_SCHEMA = "bhflow-report/1"
GRID_SCHEMA = "bhflow-grid/1"

_GRID_COLUMNS = [
    "re_z1", "im_z1", "re_z2", "im_z2",
    "sigma_norm_sq", "f", "p", "g_min_eig", "phi_norm_sq", "rho_sq_density",
]

_KNOWN_KEYS = {
    "surface", "section", "metric", "t", "t_values", "samples", "seed",
    "grid", "chart", "point", "tolerances",
}
_KNOWN_TOL_KEYS = set(DEFAULT_TOLERANCES) | {"integrator_rel", "integrator_abs"}

_DEFAULT_T_GRID = [0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5]


@dataclass
class RunConfig:
    model: SurfaceModel
    section: AnticanonicalSection
    metric: KstarMetric
    t: float
    t_values: list
    samples: int
    seed: int
    grid: int
    chart: int
    point: ChartPoint
    tolerances: dict
    integrator: IntegratorConfig
    raw: dict


def _build_section(model: SurfaceModel, choice) -> AnticanonicalSection:
    if choice is None:
        return fermat_cubic(model) if model.kind == CP2 else product_unit_section(model)
    if isinstance(choice, str):
        if choice == "fermat-cubic":
            return fermat_cubic(model)
        if choice == "unit":
            return product_unit_section(model)
        raise ConfigError(f"section: unknown preset {choice!r}")
    need = 10 if model.kind == CP2 else 9
    if not isinstance(choice, list) or len(choice) != need:
        raise ConfigError(f"section: expected {need} [re, im] pairs for {model.kind}")
    coeffs = []
    for i, pair in enumerate(choice):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"section[{i}]: expected a [re, im] pair")
        coeffs.append(complex(float(pair[0]), float(pair[1])))
    return AnticanonicalSection(model, coeffs)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    kind = raw.get("surface", CP1XCP1)
    if kind not in (CP2, CP1XCP1):
        raise ConfigError(f"surface: must be 'CP2' or 'CP1xCP1', got {kind!r}")
    model = SurfaceModel(kind)
    section = _build_section(model, raw.get("section"))

    metric_name = raw.get("metric", "fubini-study")
    if metric_name == "fubini-study":
        metric = KstarMetric(kind, 1)
    elif metric_name == "fubini-study-inverted":
        metric = KstarMetric(kind, -1)
    else:
        raise ConfigError(f"metric: unknown choice {metric_name!r}")

    t = float(raw.get("t", 0.1))
    t_values = [float(x) for x in raw.get("t_values", [0.2, 0.1, 0.05, 0.025])]
    samples = int(raw.get("samples", 24))
    if samples < 1:
        raise ConfigError("samples: must be positive")
    seed = int(raw.get("seed", 20260810))
    grid = int(raw.get("grid", 8))
    chart = int(raw.get("chart", 0))
    if not 0 <= chart < model.n_charts:
        raise ConfigError(f"chart: must be in [0, {model.n_charts})")
    pt = raw.get("point", [0.3, -0.2, 0.25, 0.15])
    if not (isinstance(pt, list) and len(pt) == 4):
        raise ConfigError("point: expected [re1, im1, re2, im2]")
    point = ChartPoint(chart, (complex(pt[0], pt[1]), complex(pt[2], pt[3])))

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances: must be an object")
    unknown = set(tolerances) - _KNOWN_TOL_KEYS
    if unknown:
        raise ConfigError(f"tolerances: unknown key(s): {', '.join(sorted(unknown))}")
    integrator = IntegratorConfig(
        rel_tol=float(tolerances.get("integrator_rel", 1e-10)),
        abs_tol=float(tolerances.get("integrator_abs", 1e-10)),
    )
    tolerances = {k: float(v) for k, v in tolerances.items() if k in DEFAULT_TOLERANCES}
    return RunConfig(
        model, section, metric, t, t_values, samples, seed, grid, chart, point,
        tolerances, integrator, raw,
    )


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".bhflow-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_report(payload: dict, out: str | None) -> None:
    doc = dict(payload)
    doc["schema"] = REPORT_SCHEMA
    doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def cmd_verify(cfg: RunConfig, args) -> int:
    t = args.t if args.t is not None else cfg.t
    n = args.samples if args.samples is not None else cfg.samples
    seed = args.seed if args.seed is not None else cfg.seed
    rng = np.random.default_rng(seed)
    points = random_points(cfg.section, cfg.metric, n, rng, min_sigma=0.1)
    report = full_report(
        cfg.section, cfg.metric, points, t, cfg.integrator, cfg.tolerances,
        environment={"seed": seed, "command": "verify"},
    )
    for row in report.rows:
        status = "PASS" if row.passed else "FAIL"
        print(f"{status}  {row.name:<24} max_residual={row.max_residual:.3e}  tol={row.tolerance:.1e}")
    _write_report({"command": "verify", **report.to_dict()}, args.out)
    return 0 if report.passed else 1


def cmd_scan(cfg: RunConfig, args) -> int:
    n = args.samples if args.samples is not None else cfg.samples
    seed = args.seed if args.seed is not None else cfg.seed
    rng = np.random.default_rng(seed)
    points = random_points(cfg.section, cfg.metric, n, rng, min_sigma=0.05)
    grid = cfg.raw.get("t_values", _DEFAULT_T_GRID)
    result = positivity_scan(cfg.section, cfg.metric, points, grid, cfg.integrator)
    payload = {
        "command": "scan",
        "t_max": result.t_max,
        "first_failure": result.first_failure,
        "table": [{"t": t, "positive": k, "points": m} for (t, k, m) in result.table],
        "seed": seed,
    }
    print(f"t_max = {result.t_max}")
    _write_report(payload, args.out)
    return 0


def cmd_export(cfg: RunConfig, args) -> int:
    t = args.t if args.t is not None else cfg.t
    n = args.grid if args.grid is not None else cfg.grid
    chart = args.chart if args.chart is not None else cfg.chart
    if not 0 <= chart < cfg.model.n_charts:
        raise ConfigError(f"chart: must be in [0, {cfg.model.n_charts})")
    r = cfg.model.radius
    axis = np.linspace(-r, r, n)
    z2 = cfg.point.z[1]
    lines = [f"# schema: {GRID_SCHEMA}", ",".join(_GRID_COLUMNS)]
    for u in axis:
        for v in axis:
            p = ChartPoint(chart, (complex(u, v), z2))
            data = assemble(cfg.section, cfg.metric, p, t, cfg.integrator)
            row = [
                u, v, z2.real, z2.imag,
                section_norm_sq(cfg.section, cfg.metric, p),
                potential(cfg.section, cfg.metric, p),
                data.p,
                data.g.min_eigenvalue(),
                data.norm_phi_sq,
                top_density(data.rho, data.rho),
            ]
            lines.append(",".join("%.17e" % x for x in row))
    text = "\n".join(lines) + "\n"
    out = args.out
    if out is None:
        sys.stdout.write(text)
        return 0
    try:
        _atomic_write(out, text)
    except OSError as err:
        raise ConfigError(f"cannot write grid: {err}") from err
    print(f"wrote {n * n} rows to {out}")
    return 0


def cmd_curve(cfg: RunConfig, args) -> int:
    t = args.t if args.t is not None else cfg.t
    try:
        c0 = find_curve_point(cfg.section)
        samples = continuation_samples(cfg.section, c0, n=20, step=0.05)
        rep = translation_diagnostics(cfg.section, cfg.metric, samples, t, cfg.integrator)
    except CurveError as err:
        print(f"degenerate anticanonical divisor: {err}", file=sys.stderr)
        return 1
    eta_dev = max(abs(e + 1.0) for e in rep.eta_y)
    tangency = max(rep.tangency)
    ok = (
        eta_dev <= 1e-8
        and tangency <= 1e-10
        and rep.max_deviation <= 1e-6
        and rep.spread <= 1e-6
    )
    payload = {
        "command": "curve",
        "curve": {
            "t": t,
            "n_samples": len(samples),
            "eta_y_re": [e.real for e in rep.eta_y],
            "eta_y_max_deviation": eta_dev,
            "tangency_max": tangency,
            "displacement_re": [d.real for d in rep.displacements],
            "displacement_max_deviation": rep.max_deviation,
            "spread": rep.spread,
            "max_curve_drift": rep.max_curve_drift,
        },
        "pass": ok,
    }
    print(f"eta(Y) deviation {eta_dev:.3e}, displacement spread {rep.spread:.3e}")
    _write_report(payload, args.out)
    return 0 if ok else 1


def cmd_limit(cfg: RunConfig, args) -> int:
    ts = sorted((float(x) for x in cfg.t_values), reverse=True)
    if len(ts) < 3:
        raise ConfigError("t_values: rate estimation needs at least 3 values")
    for a, b in zip(ts, ts[1:]):
        if abs(a / b - 2.0) > 0.02:
            raise ConfigError("t_values: must halve from one value to the next")
    result = limit_check(cfg.section, cfg.metric, cfg.point, ts, cfg.integrator)
    payload = {
        "command": "limit",
        "limit": {
            "rows": [
                {"t": r.t, "err_rho": r.err_rho, "err_g": r.err_g, "rho_sq_density": r.rho_sq_density}
                for r in result.rows
            ],
            "rho_ratios": result.rho_ratios,
            "g_ratios": result.g_ratios,
        },
        "pass": result.ok,
    }
    for r in result.rows:
        print(f"t={r.t:<8g} err_rho={r.err_rho:.3e} err_g={r.err_g:.3e}")
    _write_report(payload, args.out)
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bhflow",
        description="Bihermitian structures from Hamiltonian flows: verification CLI",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("verify", cmd_verify),
        ("scan", cmd_scan),
        ("export", cmd_export),
        ("curve", cmd_curve),
        ("limit", cmd_limit),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--t", type=float, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--grid", type=int, default=None)
        sp.add_argument("--chart", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except BhflowError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
