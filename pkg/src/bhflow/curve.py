"""Diagnostics on the anticanonical curve {s = 0}.

The flow field is tangent to the curve and, against the residue 1-form
eta of the meromorphic 2-form, satisfies eta(Y) = -1 at every smooth
curve point: the flow restricted to the curve is a unit-speed
translation in the residue coordinate. These functions locate curve
points by Newton iteration, continue them along the curve, build eta,
and measure the translation quantitatively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CurveError, FlowError
from .flow import IntegratorConfig, flow, hamiltonian_field
from .surfaces import AnticanonicalSection, ChartPoint, KstarMetric, section_norm_sq

_DS_FLOOR = 1e-6
# Transversality floor for Newton location. A multiplicity-one zero keeps
# ||ds|| of order one as s -> 0, while a double zero has ||ds|| ~ sqrt(|s|)
# (~1e-6 at the |s| tolerance), so this threshold separates the two.
_NEWTON_DS_FLOOR = 1e-4
_S_TOL = 1e-12


@dataclass(frozen=True)
class CurvePoint:
    point: ChartPoint
    tangent: tuple  # unit (1,0) vector spanning ker(ds)
    ds: tuple  # section differential at the point


def _tangent_of(ds: np.ndarray) -> np.ndarray:
    t = np.array([-ds[1], ds[0]], dtype=complex)
    return t / np.linalg.norm(t)


def locate_curve(
    section: AnticanonicalSection,
    seed: ChartPoint,
    tol: float = _S_TOL,
    max_iter: int = 50,
) -> CurvePoint:
    """Newton iteration on s along the ds direction from a nearby seed."""
    p = section.model.normalize(seed)
    z = p.as_array()
    chart = p.chart
    for _ in range(max_iter):
        q = ChartPoint(chart, (complex(z[0]), complex(z[1])))
        s = section.value(q)
        ds = section.grad(q)
        n2 = float(np.sum(np.abs(ds) ** 2))
        if n2 < _NEWTON_DS_FLOOR**2:
            raise CurveError(
                "section differential (nearly) vanishes: curve is degenerate or singular here"
            )
        if abs(s) <= tol:
            return CurvePoint(q, tuple(_tangent_of(ds)), tuple(ds))
        z = z - s * ds.conj() / n2
    raise CurveError(f"Newton iteration did not reach |s| <= {tol} in {max_iter} steps")


def find_curve_point(section: AnticanonicalSection, n_seeds: int = 40, seed: int = 7) -> CurvePoint:
    """Search all charts for a smooth curve point; raises CurveError when
    the divisor is degenerate (no smooth point found)."""
    rng = np.random.default_rng(seed)
    last_err = None
    for _ in range(n_seeds):
        chart = int(rng.integers(0, section.model.n_charts))
        z = rng.uniform(-1.3, 1.3, 4)
        p = ChartPoint(chart, (complex(z[0], z[1]), complex(z[2], z[3])))
        try:
            return locate_curve(section, p)
        except CurveError as err:
            last_err = err
    raise CurveError(f"no smooth curve point found: {last_err}")


def continuation_samples(
    section: AnticanonicalSection, start: CurvePoint, n: int, step: float = 0.05
) -> list:
    """Predictor-corrector continuation along the curve from one point."""
    samples = [start]
    current = start
    prev_t = np.array(current.tangent)
    for _ in range(n - 1):
        z = current.point.as_array() + step * prev_t
        pred = ChartPoint(current.point.chart, (complex(z[0]), complex(z[1])))
        nxt = locate_curve(section, pred)
        t = np.array(nxt.tangent)
        if np.real(np.vdot(prev_t, t)) < 0:
            t = -t
            nxt = CurvePoint(nxt.point, tuple(t), nxt.ds)
        samples.append(nxt)
        current = nxt
        prev_t = t
    return samples


def residue_form(section: AnticanonicalSection, c: CurvePoint) -> np.ndarray:
    """Residue covector eta with eta(W) = (dz1^dz2)(V, W), ds(V) = 1.

    Using V = conj(ds)/|ds|^2 gives eta = (-V2, V1); the value on curve
    tangents does not depend on the choice of V modulo ker(ds).
    """
    ds = np.array(c.ds, dtype=complex)
    n2 = float(np.sum(np.abs(ds) ** 2))
    if n2 < _DS_FLOOR**2:
        raise CurveError("section differential (nearly) vanishes")
    v = ds.conj() / n2
    return np.array([-v[1], v[0]], dtype=complex)


@dataclass
class TranslationReport:
    eta_y: list  # eta(Y) at each sample
    tangency: list  # |ds(Y)| at each sample
    displacements: list  # residue-coordinate displacement over [0, t]
    max_deviation: float  # max |displacement + t|
    spread: float  # max - min of displacement real parts
    max_curve_drift: float  # max ||sigma|| seen along the trajectories


def translation_diagnostics(
    section: AnticanonicalSection,
    metric: KstarMetric,
    curve_samples: list,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    drift_budget: float = 1e-8,
) -> TranslationReport:
    """Quantitative form of 'the flow translates the curve'.

    Checks tangency ds(Y) = 0 and eta(Y) = -1 pointwise, then
    integrates eta(Y) along each trajectory: the displacement must be
    exactly -t for every sample. Raises FlowError (via the drift check)
    if a trajectory leaves the curve beyond the budget, since the exact
    flow preserves it.
    """
    eta_vals = []
    tang = []
    disps = []
    drift = 0.0
    for c in curve_samples:
        ds = np.array(c.ds, dtype=complex)
        y = hamiltonian_field(section, metric, c.point)
        tang.append(float(abs(ds @ y)))
        eta = residue_form(section, c)
        eta_vals.append(complex(eta @ y))
        if t == 0.0:
            disps.append(0.0 + 0j)
            continue
        dense = flow(
            section,
            metric,
            c.point,
            t,
            cfg,
            with_jacobian=False,
            with_rho=False,
            with_aj=True,
            dense=True,
        )
        for tau in np.linspace(0.0, t, 33):
            drift = max(
                drift,
                math.sqrt(section_norm_sq(section, metric, dense.state_at(tau).point)),
            )
        disps.append(dense.state_at(t).aj_displacement)
    if t != 0.0 and drift > drift_budget:
        raise FlowError(
            f"curve samples drifted to ||sigma|| = {drift:.3e} (budget {drift_budget:.1e})"
        )
    reals = [d.real for d in disps]
    max_dev = max(abs(d + t) for d in disps) if disps else 0.0
    spread = (max(reals) - min(reals)) if reals else 0.0
    return TranslationReport(
        eta_y=eta_vals,
        tangency=tang,
        displacements=disps,
        max_deviation=float(max_dev),
        spread=float(spread),
        max_curve_drift=float(drift),
    )
