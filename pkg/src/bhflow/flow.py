"""Hamiltonian flow of the potential f = log ||sigma||^2 and its transport data.

The (1,0) part of the field is the globally smooth vector

    Y1 =  ds/dz2 + s * d(log h0)/dz2
    Y2 = -ds/dz1 - s * d(log h0)/dz1

which equals s times the f-gradient rotated by the holomorphic
symplectic structure away from the curve, and restricts to the
polynomial part (ds/dz2, -ds/dz1) on it.

Trajectories here integrate dz/dt = -Y_k(z) together with the
variational equation for the flow Jacobian and the accumulated 2-form

    d rho / dt = J_t^* F,   rho(0) = 0,

all under one adaptive error control. The minus orientation is the one
under which the accumulated (1,1) block is a *positive* form for small
t > 0 (see CONVENTIONS.md); the field itself is exposed unflipped so
that curve diagnostics see eta(Y) = -1.

Chart switching: when a coordinate modulus crosses the chart radius the
integration stops on the event, the point moves to the best chart, the
Jacobian is composed with the transition derivative, and integration
continues. rho always lives at the start point in the start chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import FlowError, NearCurveError
from .forms import RealLinearMap, TwoForm, pullback
from .surfaces import AnticanonicalSection, ChartPoint, KstarMetric, section_norm_sq


def hamiltonian_field(
    section: AnticanonicalSection, metric: KstarMetric, p: ChartPoint
) -> np.ndarray:
    """The (1,0) field Y; smooth on all of the surface, tangent to the curve."""
    s = section.value(p)
    ds = section.grad(p)
    l = metric.grad_log_weight(p)
    return np.array([ds[1] + s * l[1], -ds[0] - s * l[0]], dtype=complex)


def field_jacobian(
    section: AnticanonicalSection, metric: KstarMetric, p: ChartPoint
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic Wirtinger blocks (dY_k/dz_j, dY_k/dzbar_j), row k, column j."""
    s = section.value(p)
    ds = section.grad(p)
    hs = section.hessian(p)
    l = metric.grad_log_weight(p)
    dl = metric.dz_grad_log_weight(p)  # dl[j, k] = d l_k / d z_j
    dbl = metric.dzbar_grad_log_weight(p)  # dbl[j, k] = d l_k / d zbar_j
    da = np.zeros((2, 2), dtype=complex)
    db = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        da[0, j] = hs[1, j] + ds[j] * l[1] + s * dl[j, 1]
        da[1, j] = -hs[0, j] - ds[j] * l[0] - s * dl[j, 0]
        db[0, j] = s * dbl[j, 1]
        db[1, j] = -s * dbl[j, 0]
    return da, db


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_step: float = math.inf
    max_steps: int = 200_000
    max_time: float = 5.0
    method: str = "RK45"
    max_switches: int = 64
    cond_limit: float = 1e10


@dataclass(frozen=True)
class FlowState:
    """Endpoint data of one trajectory.

    jacobian maps tangent vectors at the start (in the start chart) to
    tangent vectors at the endpoint (in its chart); rho is the
    accumulated integral of the pulled-back curvature, at the start.
    """

    start: ChartPoint
    point: ChartPoint
    t: float
    jacobian: Optional[RealLinearMap]
    rho: Optional[TwoForm]
    aj_displacement: Optional[complex]
    chart_switches: int


class _StateCodec:
    """Packs (z, jacobian, rho, aj) into a flat real vector."""

    def __init__(self, with_jacobian: bool, with_rho: bool, with_aj: bool):
        self.with_jacobian = with_jacobian
        self.with_rho = with_rho and with_jacobian
        self.with_aj = with_aj
        n = 4
        self.j_off = n
        if with_jacobian:
            n += 16
        self.r_off = n
        if self.with_rho:
            n += 12
        self.a_off = n
        if with_aj:
            n += 2
        self.size = n

    def pack(self, z, a=None, b=None, rho: Optional[TwoForm] = None, aj=0.0) -> np.ndarray:
        y = np.zeros(self.size)
        y[0:4:2] = np.real(z)
        y[1:4:2] = np.imag(z)
        if self.with_jacobian:
            ab = np.concatenate([np.asarray(a).ravel(), np.asarray(b).ravel()])
            y[self.j_off : self.j_off + 16 : 2] = ab.real
            y[self.j_off + 1 : self.j_off + 16 : 2] = ab.imag
        if self.with_rho:
            r = np.concatenate([[rho.c20], rho.c11.ravel(), [rho.c02]])
            y[self.r_off : self.r_off + 12 : 2] = r.real
            y[self.r_off + 1 : self.r_off + 12 : 2] = r.imag
        if self.with_aj:
            y[self.a_off] = np.real(aj)
            y[self.a_off + 1] = np.imag(aj)
        return y

    def z(self, y) -> np.ndarray:
        return y[0:4:2] + 1j * y[1:4:2]

    def jac(self, y) -> tuple[np.ndarray, np.ndarray]:
        ab = y[self.j_off : self.j_off + 16 : 2] + 1j * y[self.j_off + 1 : self.j_off + 16 : 2]
        return ab[:4].reshape(2, 2), ab[4:].reshape(2, 2)

    def rho(self, y) -> TwoForm:
        r = y[self.r_off : self.r_off + 12 : 2] + 1j * y[self.r_off + 1 : self.r_off + 12 : 2]
        return TwoForm(r[0], r[1:5].reshape(2, 2), r[5])

    def aj(self, y) -> complex:
        return complex(y[self.a_off], y[self.a_off + 1])


def _make_rhs(
    section: AnticanonicalSection,
    metric: KstarMetric,
    chart: int,
    codec: _StateCodec,
    ds_floor: float = 1e-8,
) -> Callable:
    table = section._tables[chart]
    d1, d2 = section._d1[chart], section._d2[chart]

    def rhs(t, y):
        z = codec.z(y)
        p = ChartPoint(chart, (complex(z[0]), complex(z[1])))
        s = table.value(*p.z)
        ds = np.array([d1.value(*p.z), d2.value(*p.z)], dtype=complex)
        l = metric.grad_log_weight(p)
        yfield = np.array([ds[1] + s * l[1], -ds[0] - s * l[0]])
        out = np.zeros(codec.size)
        zdot = -yfield
        out[0:4:2] = zdot.real
        out[1:4:2] = zdot.imag
        if codec.with_jacobian:
            da, db = field_jacobian(section, metric, p)
            da, db = -da, -db
            a, b = codec.jac(y)
            adot = da @ a + db @ b.conj()
            bdot = da @ b + db @ a.conj()
            ab = np.concatenate([adot.ravel(), bdot.ravel()])
            out[codec.j_off : codec.j_off + 16 : 2] = ab.real
            out[codec.j_off + 1 : codec.j_off + 16 : 2] = ab.imag
            if codec.with_rho:
                bf = -1j * metric.log_weight_hessian(p)
                bfca = bf @ a.conj()
                bfcb = bf @ b.conj()
                t11 = a.T @ bfcb - b.conj().T @ bf.T @ a
                t12 = a.T @ bfca - b.conj().T @ bf.T @ b
                t22 = b.T @ bfca - a.conj().T @ bf.T @ b
                r = np.concatenate([[t11[0, 1]], t12.ravel(), [t22[0, 1]]])
                out[codec.r_off : codec.r_off + 12 : 2] = r.real
                out[codec.r_off + 1 : codec.r_off + 12 : 2] = r.imag
        if codec.with_aj:
            n2 = float(np.sum(np.abs(ds) ** 2))
            if n2 < ds_floor**2:
                raise FlowError("section differential too small for residue tracking")
            v = ds.conj() / n2
            eta_y = v[0] * yfield[1] - v[1] * yfield[0]
            out[codec.a_off] = eta_y.real
            out[codec.a_off + 1] = eta_y.imag
        return out

    return rhs


@dataclass
class _Segment:
    chart: int
    t0: float
    t1: float
    sol: object  # OdeSolution


class DenseFlow:
    """Piecewise dense output of one trajectory; evaluable at any time."""

    def __init__(self, segments, codec, start, total_t, switches):
        self._segments = segments
        self._codec = codec
        self.start = start
        self.t = total_t
        self.chart_switches = switches

    def state_at(self, tau: float) -> FlowState:
        seg = None
        for s in self._segments:
            lo, hi = sorted((s.t0, s.t1))
            if lo - 1e-12 <= tau <= hi + 1e-12:
                seg = s
                break
        if seg is None:
            raise FlowError(f"time {tau} outside integrated range")
        y = seg.sol(tau)
        c = self._codec
        z = c.z(y)
        point = ChartPoint(seg.chart, (complex(z[0]), complex(z[1])))
        jac = RealLinearMap(*c.jac(y)) if c.with_jacobian else None
        rho = c.rho(y) if c.with_rho else None
        aj = c.aj(y) if c.with_aj else None
        return FlowState(self.start, point, tau, jac, rho, aj, self.chart_switches)


def flow(
    section: AnticanonicalSection,
    metric: KstarMetric,
    p: ChartPoint,
    t: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    with_jacobian: bool = True,
    with_rho: bool = True,
    with_aj: bool = False,
    dense: bool = False,
):
    """Integrate the transport flow for time t from p.

    Returns a FlowState, or a DenseFlow when dense=True. The coupled
    system is (z, dflow, rho[, aj]) under a single adaptive error
    control; charts switch automatically at the model radius.
    """
    if abs(t) > cfg.max_time:
        raise ValueError(f"|t| = {abs(t)} exceeds the configured bound {cfg.max_time}")
    model = section.model
    p = model.normalize(p)
    codec = _StateCodec(with_jacobian, with_rho, with_aj)
    y = codec.pack(
        p.as_array(),
        np.eye(2, dtype=complex),
        np.zeros((2, 2), dtype=complex),
        TwoForm.zero(),
        0.0,
    )
    chart = p.chart
    switches = 0
    nfev = 0
    segments = []
    t0 = 0.0
    r2 = (model.radius * (1.0 + 1e-6)) ** 2

    if t == 0.0:
        state = FlowState(
            p, p, 0.0,
            RealLinearMap.identity() if with_jacobian else None,
            TwoForm.zero() if codec.with_rho else None,
            0.0 if with_aj else None,
            0,
        )
        if dense:
            # degenerate dense object: single constant segment
            class _Const:
                def __init__(self, yv):
                    self._y = yv

                def __call__(self, tau):
                    return self._y

            return DenseFlow([_Segment(chart, 0.0, 0.0, _Const(y))], codec, p, 0.0, 0)
        return state

    def ev1(tt, yy):
        return r2 - (yy[0] ** 2 + yy[1] ** 2)

    def ev2(tt, yy):
        return r2 - (yy[2] ** 2 + yy[3] ** 2)

    ev1.terminal = True
    ev2.terminal = True
    ev1.direction = -1.0
    ev2.direction = -1.0

    while True:
        rhs = _make_rhs(section, metric, chart, codec)
        sol = solve_ivp(
            rhs,
            (t0, t),
            y,
            method=cfg.method,
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
            max_step=cfg.max_step,
            events=(ev1, ev2),
            dense_output=True,
        )
        nfev += sol.nfev
        if nfev > cfg.max_steps:
            raise FlowError(f"integration exceeded {cfg.max_steps} field evaluations")
        if sol.status == -1:
            raise FlowError(f"integration failed: {sol.message}")
        segments.append(_Segment(chart, t0, sol.t[-1], sol.sol))
        y = sol.y[:, -1].copy()
        if sol.status == 0:
            break
        # chart-leaving event
        te = sol.t[-1]
        z = codec.z(y)
        here = ChartPoint(chart, (complex(z[0]), complex(z[1])))
        target = model.best_chart(here)
        if target == chart:
            raise FlowError("chart switch requested but current chart is already best")
        jtrans = model.transition_jacobian(here, target)
        moved = model.transition(here, target)
        if codec.with_jacobian:
            a, b = codec.jac(y)
            a2 = jtrans.A @ a
            b2 = jtrans.A @ b
            rho_now = codec.rho(y) if codec.with_rho else TwoForm.zero()
            aj_now = codec.aj(y) if codec.with_aj else 0.0
            y = codec.pack(moved.as_array(), a2, b2, rho_now, aj_now)
        else:
            aj_now = codec.aj(y) if codec.with_aj else 0.0
            y = codec.pack(moved.as_array(), aj=aj_now)
        chart = target
        t0 = te
        switches += 1
        if switches > cfg.max_switches:
            raise FlowError(f"more than {cfg.max_switches} chart switches")

    if dense:
        return DenseFlow(segments, codec, p, t, switches)

    z = codec.z(y)
    endpoint = ChartPoint(chart, (complex(z[0]), complex(z[1])))
    jac = None
    if with_jacobian:
        jac = RealLinearMap(*codec.jac(y))
        if np.linalg.cond(jac.real_matrix()) > cfg.cond_limit:
            raise FlowError("flow Jacobian is ill-conditioned")
    return FlowState(
        p,
        endpoint,
        t,
        jac,
        codec.rho(y) if codec.with_rho else None,
        codec.aj(y) if with_aj else None,
        switches,
    )


def reference_form(section: AnticanonicalSection, p: ChartPoint) -> TwoForm:
    """The meromorphic form 1/s dz1^dz2 at p (complex TwoForm)."""
    s = section.value(p)
    if s == 0:
        raise NearCurveError("meromorphic form has a pole on the curve")
    return TwoForm.from_20(1.0 / s)


def pullback_holsymp(
    section: AnticanonicalSection,
    metric: KstarMetric,
    state: FlowState,
    cutoff: float = 1e-3,
) -> TwoForm:
    """Pull the endpoint meromorphic form back to the start point.

    Real part: the start symplectic form (flow invariance); imaginary
    part: the transported symplectic partner. Refuses near the curve,
    where the smooth reconstruction through rho must be used instead.
    """
    norm_sigma = math.sqrt(section_norm_sq(section, metric, state.point))
    if norm_sigma < cutoff:
        raise NearCurveError(
            f"endpoint too close to the anticanonical curve (||sigma|| = {norm_sigma:.2e})"
        )
    if state.jacobian is None:
        raise ValueError("flow state carries no Jacobian")
    return pullback(reference_form(section, state.point), state.jacobian)
