"""Suite-level verification: aggregate identity and flow checks over
seeded sample points, producing a serializable report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bihermitian import assemble, top_density, verify_identities
from .flow import IntegratorConfig, flow, pullback_holsymp, reference_form
from .surfaces import AnticanonicalSection, KstarMetric, potential

DEFAULT_TOLERANCES = {
    "twist_minus": 1e-7,
    "twist_plus": 1e-7,
    "quaternion_norm": 1e-9,
    "inverse_section_ratio": 1e-7,
    "ratio_constancy": 1e-6,
    "smooth_difference": 1e-7,
    "smooth_square": 1e-7,
    "decomposable": 1e-9,
    "orthogonal": 1e-7,
    "equal_volumes": 1e-7,
    "p_above_minus_one": 1e-6,
    "rho_square_positive": 0.0,
    "f_conservation": 1e-8,
    "omega_preservation": 1e-8,
    "group_law": 1e-8,
}


@dataclass
class CheckRow:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class SuiteReport:
    rows: list
    environment: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "environment": self.environment,
            "identities": [r.to_dict() for r in self.rows],
            "pass": self.passed,
        }


def _row(name, value, tolerances, detail=None) -> CheckRow:
    tol = tolerances[name]
    return CheckRow(name, float(value), float(tol), bool(value <= tol), detail or {})


def identity_rows(
    section: AnticanonicalSection,
    metric: KstarMetric,
    points: list,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    tolerances: dict | None = None,
) -> list:
    """Max residual of every pointwise identity over the sample points,
    plus constancy of the measured meromorphic-form ratio."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    worst: dict = {}
    ratios = []
    p_min = 1.0
    rho_sq_min = float("inf")
    for p0 in points:
        data = assemble(section, metric, p0, t, cfg)
        pv = verify_identities(data, section, metric)
        for k, v in pv.residuals.items():
            worst[k] = max(worst.get(k, 0.0), v)
        ratios.append(pv.ratio)
        p_min = min(p_min, pv.p)
        rho_sq_min = min(rho_sq_min, top_density(data.rho, data.rho))
    rows = [_row(k, v, tol) for k, v in sorted(worst.items())]
    ratios = np.array(ratios)
    mean = complex(np.mean(ratios))
    std = float(np.std(ratios))
    rows.append(
        _row(
            "ratio_constancy",
            std / max(abs(mean), 1e-300),
            tol,
            detail={"mean_re": mean.real, "mean_im": mean.imag, "std": std},
        )
    )
    rows.append(
        CheckRow(
            "p_above_minus_one",
            float(-1.0 - p_min) if p_min < -1.0 else 0.0,
            tol["p_above_minus_one"],
            bool(p_min > -1.0 + tol["p_above_minus_one"]),
            {"p_min": p_min},
        )
    )
    rows.append(
        CheckRow(
            "rho_square_positive",
            0.0 if rho_sq_min > 0 else abs(rho_sq_min),
            tol["rho_square_positive"],
            bool(rho_sq_min > 0.0),
            {"min_density": rho_sq_min},
        )
    )
    return rows


def flow_rows(
    section: AnticanonicalSection,
    metric: KstarMetric,
    points: list,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    tolerances: dict | None = None,
) -> list:
    """Conservation of the potential, symplectic-form preservation, and
    the one-parameter group law over the sample points."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    f_drift = 0.0
    omega_err = 0.0
    group_err = 0.0
    for p0 in points:
        state = flow(section, metric, p0, t, cfg)
        f_drift = max(
            f_drift,
            abs(potential(section, metric, state.point) - potential(section, metric, state.start)),
        )
        direct = pullback_holsymp(section, metric, state, cutoff=1e-6)
        omega0 = reference_form(section, state.start).real_part()
        omega_err = max(omega_err, (direct.real_part() - omega0).norm())
        half = flow(section, metric, p0, 0.5 * t, cfg, with_jacobian=False, with_rho=False)
        again = flow(section, metric, half.point, 0.5 * t, cfg, with_jacobian=False, with_rho=False)
        full = flow(section, metric, p0, t, cfg, with_jacobian=False, with_rho=False)
        end_a = section.model.transition(again.point, full.point.chart)
        group_err = max(
            group_err,
            float(np.max(np.abs(end_a.as_array() - full.point.as_array()))),
        )
    return [
        _row("f_conservation", f_drift, tol),
        _row("omega_preservation", omega_err, tol),
        _row("group_law", group_err, tol),
    ]


def full_report(
    section: AnticanonicalSection,
    metric: KstarMetric,
    points: list,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    tolerances: dict | None = None,
    environment: dict | None = None,
) -> SuiteReport:
    rows = identity_rows(section, metric, points, t, cfg, tolerances)
    rows += flow_rows(section, metric, points, t, cfg, tolerances)
    effective = dict(DEFAULT_TOLERANCES)
    if tolerances:
        effective.update(tolerances)
    env = {
        "model": section.model.kind,
        "section_sha256": section.sha256(),
        "metric": {"kind": metric.kind, "sign": metric.sign},
        "t": t,
        "n_points": len(points),
        "tolerances": effective,
        "integrator": {
            "method": cfg.method,
            "rel_tol": cfg.rel_tol,
            "abs_tol": cfg.abs_tol,
        },
    }
    if environment:
        env.update(environment)
    return SuiteReport(rows=rows, environment=env)
