"""Assembly of the pointwise bihermitian package and its identity checks.

At a point p and flow time t the package consists of the accumulated
smooth form rho(t), its (1,1) part omega_plus (the hermitian form of
the metric), the metric g built from omega_plus and the background
structure, the transported structure I- = J^-1 I J, and the commutator
2-form family (phi, phi', phi'').

Normalization: g is built from omega_plus = (1,1)-part of rho with no
extra factor, so that g(t)/t converges to the Kahler metric of the
curvature form. Under this choice the verified identities read

    phi''          = -2 omega_plus + 2 p omega_minus
    phi'           =  2 omega_minus - 2 p omega_plus
    |phi|^2        =  4 (1 - p^2)
    (phi - i phi') / (2 |phi|^2)  =  (1/4) * (meromorphic form)
    rho            = (omega_plus + omega_minus) / (1 + p)
    rho^2          =  2 omega_plus^2 / (1 + p)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NearCurveError, QuadratureError
from .flow import (
    FlowState,
    IntegratorConfig,
    flow,
    pullback_holsymp,
    reference_form,
)
from .forms import (
    IPLUS,
    ComplexStructureOp,
    PointMetric,
    TwoForm,
    conjugate_structure,
    evaluate,
    hermitian_form,
    is_positive_form,
    metric_from_form,
    p11_projection,
    quaternion_package,
    top_density,
    wedge_top,
)
from .surfaces import (
    CP2,
    AnticanonicalSection,
    ChartPoint,
    KstarMetric,
    curvature_form,
    section_norm_sq,
)

_TINY = 1e-300


@dataclass(frozen=True)
class BihermitianData:
    """Everything the identity suite needs at one point and one time."""

    start: ChartPoint
    t: float
    rho: TwoForm
    omega_plus: TwoForm
    g: PointMetric
    i_minus: ComplexStructureOp
    p: float
    phi: TwoForm
    phi_plus: TwoForm  # phi(I+ . , .)
    phi_minus: TwoForm  # phi(I- . , .)
    norm_phi_sq: float
    omega_second: Optional[TwoForm]  # omega' + rho, absent on the curve
    valid: bool  # g positive definite
    flow_state: FlowState


def assemble_from_state(
    section: AnticanonicalSection,
    metric: KstarMetric,
    state: FlowState,
    compat_tol: float = 1e-7,
) -> BihermitianData:
    rho = state.rho.real_part()
    omega_plus = p11_projection(rho)
    g = metric_from_form(omega_plus, IPLUS)
    i_minus = conjugate_structure(IPLUS, state.jacobian)
    qp = quaternion_package(IPLUS, i_minus, g, compat_tol=compat_tol)
    omega_second = None
    if section_norm_sq(section, metric, state.start) > 1e-24:
        omega_prime = reference_form(section, state.start).imag_part()
        omega_second = omega_prime + rho
    return BihermitianData(
        start=state.start,
        t=state.t,
        rho=rho,
        omega_plus=omega_plus,
        g=g,
        i_minus=i_minus,
        p=qp.p,
        phi=qp.phi,
        phi_plus=qp.phi_plus,
        phi_minus=qp.phi_minus,
        norm_phi_sq=qp.norm_phi_sq,
        omega_second=omega_second,
        valid=g.is_positive(),
        flow_state=state,
    )


def assemble(
    section: AnticanonicalSection,
    metric: KstarMetric,
    p0: ChartPoint,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    compat_tol: float = 1e-7,
) -> BihermitianData:
    state = flow(section, metric, p0, t, cfg)
    return assemble_from_state(section, metric, state, compat_tol=compat_tol)


def _rel(value: float, scale: float) -> float:
    return float(value) / max(float(scale), _TINY)


@dataclass
class PointVerification:
    residuals: dict
    ratio: complex  # measured constant in the meromorphic-form identity
    p: float


def verify_identities(
    data: BihermitianData,
    section: AnticanonicalSection,
    metric: KstarMetric,
) -> PointVerification:
    """Residuals of every pointwise identity at one (point, t) datum.

    All residuals are relative to the scale of the terms involved except
    the quaternion norm identity, which is reported as an absolute
    deviation. Requires t > 0, a point off the curve, and p != +-1.
    """
    if data.t <= 0.0:
        raise ValueError("identity verification needs t > 0 (at t = 0 the structures coincide)")
    if section_norm_sq(section, metric, data.start) < 1e-6:
        raise NearCurveError("identity verification needs a point off the anticanonical curve")
    if 1.0 - abs(data.p) < 1e-12:
        raise ValueError(f"structures are (anti-)aligned, p = {data.p}")

    g = data.g
    p = data.p
    omega_plus = data.omega_plus
    omega_minus = hermitian_form(g, data.i_minus)
    phi, phi_p, phi_m = data.phi, data.phi_plus, data.phi_minus

    res = {}

    lhs = phi_m + 2.0 * omega_plus - 2.0 * p * omega_minus
    res["twist_minus"] = _rel(
        lhs.norm(), max(phi_m.norm(), 2 * omega_plus.norm(), 2 * abs(p) * omega_minus.norm())
    )
    lhs = phi_p - 2.0 * omega_minus + 2.0 * p * omega_plus
    res["twist_plus"] = _rel(
        lhs.norm(), max(phi_p.norm(), 2 * omega_minus.norm(), 2 * abs(p) * omega_plus.norm())
    )

    res["quaternion_norm"] = abs(data.norm_phi_sq - 4.0 * (1.0 - p * p))

    omega_ref = reference_form(section, data.start)  # omega + i omega'
    candidate = (phi - 1j * phi_p) * (1.0 / (2.0 * data.norm_phi_sq))
    ratio = complex(candidate.c20 * section.value(data.start))
    res["inverse_section_ratio"] = _rel((candidate - ratio * omega_ref).norm(), candidate.norm())

    rhs = (omega_plus + omega_minus) * (1.0 / (1.0 + p))
    res["smooth_difference"] = _rel((data.rho - rhs).norm(), max(data.rho.norm(), rhs.norm()))

    rho_sq = wedge_top(data.rho, data.rho)
    plus_sq = 2.0 * wedge_top(omega_plus, omega_plus) / (1.0 + p)
    res["smooth_square"] = _rel(abs(rho_sq - plus_sq), max(abs(rho_sq), abs(plus_sq)))

    omega = omega_ref.real_part()
    zform = omega + 1j * data.omega_second
    res["decomposable"] = _rel(abs(wedge_top(zform, zform)), zform.norm() ** 2)
    res["orthogonal"] = _rel(
        abs(wedge_top(omega, data.omega_second)), omega.norm() * data.omega_second.norm()
    )
    res["equal_volumes"] = _rel(
        abs(wedge_top(omega, omega) - wedge_top(data.omega_second, data.omega_second)),
        abs(wedge_top(omega, omega)),
    )

    return PointVerification(residuals=res, ratio=ratio, p=p)


def two_path_residual(
    section: AnticanonicalSection,
    metric: KstarMetric,
    p0: ChartPoint,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    cutoff: float = 1e-2,
) -> dict:
    """Agreement of the two computations of the transported (1,1) part.

    Path one pulls the endpoint meromorphic form back through the flow
    Jacobian; path two uses the smooth accumulator. Valid only where the
    section norm exceeds the cutoff at both ends.
    """
    state = flow(section, metric, p0, t, cfg)
    direct = pullback_holsymp(section, metric, state, cutoff=cutoff)
    rho = state.rho.real_part()
    p11_direct = p11_projection(direct.imag_part())
    p11_smooth = p11_projection(rho)
    scale = max(p11_direct.norm(), p11_smooth.norm(), 1.0)
    omega_start = reference_form(section, state.start).real_part()
    return {
        "p11_residual": (p11_direct - p11_smooth).norm() / scale,
        "omega_preservation": (direct.real_part() - omega_start).norm(),
        "state": state,
    }


@dataclass
class ScanResult:
    t_max: float
    first_failure: Optional[dict]
    table: list  # (t, n_positive, n_points)


def positivity_scan(
    section: AnticanonicalSection,
    metric: KstarMetric,
    sample_points: list,
    t_grid: list,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> ScanResult:
    """Largest prefix time for which the hermitian form is positive at
    every sample; scanning stops at the first failing time."""
    ts = sorted(float(t) for t in t_grid)
    positive_ts = [t for t in ts if t > 0]
    t_hi = positive_ts[-1] if positive_ts else 0.0
    dense = []
    if t_hi > 0:
        dense = [
            flow(section, metric, p, t_hi, cfg, dense=True) for p in sample_points
        ]
    t_max = 0.0
    first_failure = None
    table = []
    for t in positive_ts:
        n_pos = 0
        fail_idx = None
        for i, d in enumerate(dense):
            rho = d.state_at(t).rho.real_part()
            if is_positive_form(p11_projection(rho)):
                n_pos += 1
            elif fail_idx is None:
                fail_idx = i
        table.append((t, n_pos, len(dense)))
        if fail_idx is None:
            t_max = t
        else:
            first_failure = {"t": t, "point_index": fail_idx}
            break
    return ScanResult(t_max=t_max, first_failure=first_failure, table=table)


@dataclass
class LimitRow:
    t: float
    err_rho: float
    err_g: float
    rho_sq_density: float


@dataclass
class LimitResult:
    rows: list
    rho_ratios: list
    g_ratios: list
    ok: bool


def limit_check(
    section: AnticanonicalSection,
    metric: KstarMetric,
    p0: ChartPoint,
    t_sequence: list,
    cfg: IntegratorConfig = IntegratorConfig(),
    ratio_window: tuple = (1.6, 2.4),
) -> LimitResult:
    """Convergence of rho(t)/t to the curvature form and of g(t)/t to the
    Kahler metric; consecutive (halving) errors must shrink linearly."""
    ts = sorted((float(t) for t in t_sequence), reverse=True)
    if len(ts) < 2 or ts[-1] <= 0:
        raise ValueError("need at least two positive times")
    f0 = curvature_form(metric, p0)
    g0 = metric_from_form(f0, IPLUS)
    dense = flow(section, metric, p0, ts[0], cfg, dense=True)
    rows = []
    for t in ts:
        rho = dense.state_at(t).rho.real_part()
        err_rho = (rho * (1.0 / t) - f0).norm()
        gt = metric_from_form(p11_projection(rho), IPLUS)
        err_g = float(np.linalg.norm(gt.gram / t - g0.gram))
        rows.append(LimitRow(t, err_rho, err_g, top_density(rho, rho)))
    rho_ratios = [rows[i].err_rho / max(rows[i + 1].err_rho, _TINY) for i in range(len(rows) - 1)]
    g_ratios = [rows[i].err_g / max(rows[i + 1].err_g, _TINY) for i in range(len(rows) - 1)]
    lo, hi = ratio_window
    ok = all(lo <= r <= hi for r in rho_ratios + g_ratios)
    return LimitResult(rows=rows, rho_ratios=rho_ratios, g_ratios=g_ratios, ok=ok)


# ---------------------------------------------------------------------------
# holomorphic curves and surface integrals


def _curve_patches(section: AnticanonicalSection, w0: complex = 0.0):
    """Two-disk cover of the rational curve used for class integrals.

    CP^2: the line {second coordinate = 0}; product: the sphere
    {second factor = w0}. Each patch is (chart, embed) with embed
    mapping the unit-disk parameter to a chart point; the embedding
    tangent is d/dzeta -> (1, 0) in both patches.
    """
    if section.model.kind == CP2:
        return [
            (0, lambda zeta: ChartPoint(0, (zeta, 0.0 + 0j))),
            (1, lambda zeta: ChartPoint(1, (zeta, 0.0 + 0j))),
        ]
    return [
        (0, lambda zeta: ChartPoint(0, (zeta, w0))),
        (2, lambda zeta: ChartPoint(2, (zeta, w0))),
    ]


def _disk_nodes(n: int):
    """Tensor nodes on the unit disk: Gauss-Legendre radius x trapezoid angle."""
    x, w = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w
    m = 2 * n
    theta = 2.0 * math.pi * np.arange(m) / m
    wt = 2.0 * math.pi / m
    nodes = []
    for ri, wri in zip(r, wr):
        for th in theta:
            nodes.append((ri * np.exp(1j * th), wri * wt * ri))
    return nodes


def _integrate_form_over_curve(section, w0, form_at):
    def run(n):
        acc = 0.0
        tangent = np.array([1.0, 0.0], dtype=complex)
        for _chart, embed in _curve_patches(section, w0):
            for zeta, weight in _disk_nodes(n):
                beta = form_at(embed(zeta))
                acc += weight * evaluate(beta, tangent, 1j * tangent).real
        return acc

    return run


@dataclass
class CohomologyResult:
    rho_integral: float
    curvature_integral: float
    expected: float
    rel_err: float
    quadrature_n: int


def cohomology_check(
    section: AnticanonicalSection,
    metric: KstarMetric,
    t: float,
    quadrature_n: int = 8,
    cfg: IntegratorConfig = IntegratorConfig(),
    w0: complex = 0.0,
    convergence_check: bool = True,
) -> CohomologyResult:
    """Integral of rho(t) over a holomorphic sphere vs t times the
    curvature integral (the degree pins the cohomology class)."""

    def rho_at(p: ChartPoint) -> TwoForm:
        return flow(section, metric, p, t, cfg).rho.real_part()

    def curv_at(p: ChartPoint) -> TwoForm:
        return curvature_form(metric, p)

    run_f = _integrate_form_over_curve(section, w0, curv_at)
    f_n = run_f(quadrature_n)
    if convergence_check:
        f_2n = run_f(2 * quadrature_n)
        if abs(f_2n - f_n) > 5e-3 * max(abs(f_2n), _TINY):
            raise QuadratureError(
                f"curvature integral not converged: {f_n} vs {f_2n} at n = {quadrature_n}"
            )
        f_n = f_2n

    if t == 0.0:
        return CohomologyResult(0.0, f_n, 0.0, 0.0, quadrature_n)

    run_rho = _integrate_form_over_curve(section, w0, rho_at)
    rho_n = run_rho(quadrature_n)
    expected = t * f_n
    rel = abs(rho_n - expected) / max(abs(expected), _TINY)
    return CohomologyResult(rho_n, f_n, expected, rel, quadrature_n)
