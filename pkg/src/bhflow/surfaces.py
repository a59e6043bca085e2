"""Concrete surface models: CP^2 and CP^1 x CP^1.

A point is held in an affine chart as a pair of complex coordinates.
The anticanonical bundle is trivialized per chart by dz1 ^ dz2; a
section is stored as the homogeneous coefficient vector (10 cubic
monomials for CP^2, 9 bidegree-(2,2) monomials for the quadric) and
dehomogenized per chart *with the orientation sign of the chart*, so
that s_target = s_source * det(d target / d source) holds exactly on
overlaps.

The bundle metric is Fubini-Study type: weight (1+|z|^2)^-3 on CP^2
charts and (1+|z|^2)^-2 (1+|w|^2)^-2 on product charts. Its curvature
form F = -i ddbar log h0 is positive; the potential f = log(|s|^2 h0)
satisfies d d^c f = F away from the curve {s = 0} with
d^c = (i/2)(d' - d'').
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnrepresentablePointError
from .forms import RealLinearMap, TwoForm

CP2 = "CP2"
CP1XCP1 = "CP1xCP1"

# lex order of the degree-3 monomials in (x0, x1, x2)
_CP2_EXPONENTS = [
    (3, 0, 0), (2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 1, 1),
    (1, 0, 2), (0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3),
]
# lex order of z^a w^b, a, b in {0, 1, 2}
_PROD_EXPONENTS = [(a, b) for a in range(3) for b in range(3)]

_PIVOT_FLOOR = 1e-14


@dataclass(frozen=True)
class ChartPoint:
    chart: int
    z: tuple  # (complex, complex)

    def as_array(self) -> np.ndarray:
        return np.array(self.z, dtype=complex)


class SurfaceModel:
    """Chart atlas of CP^2 (3 charts) or CP^1 x CP^1 (4 charts)."""

    def __init__(self, kind: str, radius: float = 2.0):
        if kind not in (CP2, CP1XCP1):
            raise ValueError(f"unknown surface kind {kind!r}")
        self.kind = kind
        self.radius = float(radius)
        self.n_charts = 3 if kind == CP2 else 4

    # CP^2 chart k uses coordinates (x_a / x_k, x_b / x_k), a < b != k.
    @staticmethod
    def _cp2_affine_indices(chart: int):
        return tuple(i for i in range(3) if i != chart)

    def homogeneous(self, p: ChartPoint):
        """Homogeneous representative(s): a 3-vector for CP^2, a pair of
        2-vectors for the product."""
        z1, z2 = p.z
        if self.kind == CP2:
            x = np.zeros(3, dtype=complex)
            x[p.chart] = 1.0
            a, b = self._cp2_affine_indices(p.chart)
            x[a], x[b] = z1, z2
            return x
        i, j = divmod(p.chart, 2)
        u = np.array([1.0, z1], dtype=complex) if i == 0 else np.array([z1, 1.0], dtype=complex)
        v = np.array([1.0, z2], dtype=complex) if j == 0 else np.array([z2, 1.0], dtype=complex)
        return u, v

    def best_chart(self, p: ChartPoint) -> int:
        if self.kind == CP2:
            x = self.homogeneous(p)
            return int(np.argmax(np.abs(x)))
        u, v = self.homogeneous(p)
        i = 0 if abs(u[0]) >= abs(u[1]) else 1
        j = 0 if abs(v[0]) >= abs(v[1]) else 1
        return 2 * i + j

    def transition(self, p: ChartPoint, target: int) -> ChartPoint:
        if target == p.chart:
            return p
        if self.kind == CP2:
            x = self.homogeneous(p)
            pivot = x[target]
            if abs(pivot) < _PIVOT_FLOOR:
                raise UnrepresentablePointError(
                    f"point has (near) zero homogeneous coordinate {target}"
                )
            a, b = self._cp2_affine_indices(target)
            return ChartPoint(target, (complex(x[a] / pivot), complex(x[b] / pivot)))
        i, j = divmod(p.chart, 2)
        k, l = divmod(target, 2)
        z1, z2 = p.z
        if i != k:
            if abs(z1) < _PIVOT_FLOOR:
                raise UnrepresentablePointError("first-factor pivot (near) zero")
            z1 = 1.0 / z1
        if j != l:
            if abs(z2) < _PIVOT_FLOOR:
                raise UnrepresentablePointError("second-factor pivot (near) zero")
            z2 = 1.0 / z2
        return ChartPoint(target, (complex(z1), complex(z2)))

    def transition_jacobian(self, p: ChartPoint, target: int) -> RealLinearMap:
        """Derivative of the chart change at p (complex-linear, B = 0)."""
        if target == p.chart:
            return RealLinearMap.identity()
        if self.kind == CP2:
            x = self.homogeneous(p)
            pivot = x[target]
            if abs(pivot) < _PIVOT_FLOOR:
                raise UnrepresentablePointError(
                    f"point has (near) zero homogeneous coordinate {target}"
                )
            src = self._cp2_affine_indices(p.chart)
            tgt = self._cp2_affine_indices(target)
            a = np.zeros((2, 2), dtype=complex)
            # w_r = x_{tgt[r]} / x_target with x_{src[s]} = z_s, x_{p.chart} = 1
            for r in range(2):
                for s in range(2):
                    d_num = 1.0 if tgt[r] == src[s] else 0.0
                    d_den = 1.0 if target == src[s] else 0.0
                    a[r, s] = (d_num * pivot - x[tgt[r]] * d_den) / pivot**2
            return RealLinearMap.complex_linear(a)
        i, j = divmod(p.chart, 2)
        k, l = divmod(target, 2)
        z1, z2 = p.z
        d1 = 1.0 + 0j
        d2 = 1.0 + 0j
        if i != k:
            if abs(z1) < _PIVOT_FLOOR:
                raise UnrepresentablePointError("first-factor pivot (near) zero")
            d1 = -1.0 / z1**2
        if j != l:
            if abs(z2) < _PIVOT_FLOOR:
                raise UnrepresentablePointError("second-factor pivot (near) zero")
            d2 = -1.0 / z2**2
        return RealLinearMap.complex_linear(np.diag([d1, d2]))

    def normalize(self, p: ChartPoint) -> ChartPoint:
        """Move p to a chart where max(|z1|, |z2|) <= radius."""
        if max(abs(p.z[0]), abs(p.z[1])) <= self.radius:
            return p
        return self.transition(p, self.best_chart(p))


class _PolyTable:
    """Sparse bivariate polynomial sum c * z1^a * z2^b with derivative tables."""

    def __init__(self, exponents, coeffs):
        e = np.asarray(exponents, dtype=int).reshape(-1, 2)
        c = np.asarray(coeffs, dtype=complex).reshape(-1)
        keep = np.abs(c) > 0
        self.e = e[keep]
        self.c = c[keep]

    def value(self, z1: complex, z2: complex) -> complex:
        if len(self.c) == 0:
            return 0.0 + 0j
        return complex(np.sum(self.c * z1 ** self.e[:, 0] * z2 ** self.e[:, 1]))

    def diff(self, axis: int) -> "_PolyTable":
        e = self.e.copy()
        c = self.c * e[:, axis]
        e[:, axis] = np.maximum(e[:, axis] - 1, 0)
        return _PolyTable(e, c)


class AnticanonicalSection:
    """Holomorphic anticanonical section with per-chart dehomogenization."""

    def __init__(self, model: SurfaceModel, coefficients):
        coeffs = np.asarray(coefficients, dtype=complex).reshape(-1)
        need = 10 if model.kind == CP2 else 9
        if coeffs.shape[0] != need:
            raise ValueError(f"{model.kind} section needs {need} coefficients, got {coeffs.shape[0]}")
        self.model = model
        self.coefficients = coeffs
        self._tables = [self._build_chart_table(k) for k in range(model.n_charts)]
        self._d1 = [t.diff(0) for t in self._tables]
        self._d2 = [t.diff(1) for t in self._tables]
        self._h = [
            (t.diff(0).diff(0), t.diff(0).diff(1), t.diff(1).diff(1)) for t in self._tables
        ]

    def _build_chart_table(self, chart: int) -> _PolyTable:
        if self.model.kind == CP2:
            # chart signs (+1, -1, +1) make s transform by the Jacobian
            # determinant of the coordinate change on overlaps
            sign = -1.0 if chart == 1 else 1.0
            a, b = SurfaceModel._cp2_affine_indices(chart)
            exps = [(e[a], e[b]) for e in _CP2_EXPONENTS]
            return _PolyTable(exps, sign * self.coefficients)
        i, j = divmod(chart, 2)
        sign = (-1.0) ** (i + j)
        exps = [
            (2 - a if i else a, 2 - b if j else b) for (a, b) in _PROD_EXPONENTS
        ]
        return _PolyTable(exps, sign * self.coefficients)

    def value(self, p: ChartPoint) -> complex:
        return self._tables[p.chart].value(*p.z)

    def grad(self, p: ChartPoint) -> np.ndarray:
        z1, z2 = p.z
        return np.array(
            [self._d1[p.chart].value(z1, z2), self._d2[p.chart].value(z1, z2)], dtype=complex
        )

    def hessian(self, p: ChartPoint) -> np.ndarray:
        z1, z2 = p.z
        h11, h12, h22 = (t.value(z1, z2) for t in self._h[p.chart])
        return np.array([[h11, h12], [h12, h22]], dtype=complex)

    def sha256(self) -> str:
        import hashlib

        return hashlib.sha256(self.coefficients.tobytes()).hexdigest()


def fermat_cubic(model: SurfaceModel) -> AnticanonicalSection:
    """x0^3 + x1^3 + x2^3 on CP^2: a smooth anticanonical curve."""
    if model.kind != CP2:
        raise ValueError("the Fermat cubic lives on CP^2")
    c = np.zeros(10, dtype=complex)
    c[0] = c[6] = c[9] = 1.0
    return AnticanonicalSection(model, c)


def product_unit_section(model: SurfaceModel) -> AnticanonicalSection:
    """s == 1 on the (0,0) chart of CP^1 x CP^1 (divisor entirely at infinity)."""
    if model.kind != CP1XCP1:
        raise ValueError("the unit section lives on CP^1 x CP^1")
    c = np.zeros(9, dtype=complex)
    c[0] = 1.0
    return AnticanonicalSection(model, c)


@dataclass(frozen=True)
class KstarMetric:
    """Fubini-Study type hermitian metric on the anticanonical bundle.

    sign = -1 inverts the weight (h0 -> 1/h0), flipping the curvature;
    useful only to exercise the negative-curvature failure paths.
    """

    kind: str
    sign: int = 1

    def log_weight(self, p: ChartPoint) -> float:
        z1, z2 = p.z
        if self.kind == CP2:
            return -3.0 * self.sign * math.log(1.0 + abs(z1) ** 2 + abs(z2) ** 2)
        return -2.0 * self.sign * (
            math.log(1.0 + abs(z1) ** 2) + math.log(1.0 + abs(z2) ** 2)
        )

    def weight(self, p: ChartPoint) -> float:
        return math.exp(self.log_weight(p))

    def grad_log_weight(self, p: ChartPoint) -> np.ndarray:
        """l_k = d log h0 / dz_k."""
        z = p.as_array()
        if self.kind == CP2:
            q = 1.0 + float(np.sum(np.abs(z) ** 2))
            return -3.0 * self.sign * z.conj() / q
        q = 1.0 + np.abs(z) ** 2
        return -2.0 * self.sign * z.conj() / q

    def dz_grad_log_weight(self, p: ChartPoint) -> np.ndarray:
        """Matrix of d l_k / dz_j (row j, column k)."""
        z = p.as_array()
        if self.kind == CP2:
            q = 1.0 + float(np.sum(np.abs(z) ** 2))
            return 3.0 * self.sign * np.outer(z.conj(), z.conj()) / q**2
        q = 1.0 + np.abs(z) ** 2
        return np.diag(2.0 * self.sign * z.conj() ** 2 / q**2)

    def dzbar_grad_log_weight(self, p: ChartPoint) -> np.ndarray:
        """Matrix of d l_k / dzbar_j (row j, column k)."""
        z = p.as_array()
        if self.kind == CP2:
            q = 1.0 + float(np.sum(np.abs(z) ** 2))
            return 3.0 * self.sign * (np.outer(z, z.conj()) / q**2 - np.eye(2) / q)
        q = 1.0 + np.abs(z) ** 2
        return np.diag(-2.0 * self.sign / q**2)

    def log_weight_hessian(self, p: ChartPoint) -> np.ndarray:
        """H_jk = d^2 log h0 / dz_j dzbar_k."""
        return self.dzbar_grad_log_weight(p).T


def section_norm_sq(section: AnticanonicalSection, metric: KstarMetric, p: ChartPoint) -> float:
    """||sigma||^2 = |s|^2 h0; chart independent."""
    return abs(section.value(p)) ** 2 * metric.weight(p)


def potential(section: AnticanonicalSection, metric: KstarMetric, p: ChartPoint) -> float:
    """f = log ||sigma||^2 (equals -inf on the anticanonical curve)."""
    s = abs(section.value(p))
    if s == 0.0:
        return -math.inf
    return 2.0 * math.log(s) + metric.log_weight(p)


def grad_f(section: AnticanonicalSection, metric: KstarMetric, p: ChartPoint) -> np.ndarray:
    """(1,0) components of df: ds_k / s + d log h0 / dz_k.

    Diverges on the curve; the Hamiltonian field in the flow module is
    the globally smooth object obtained after multiplication by s.
    """
    s = section.value(p)
    if s == 0:
        raise ZeroDivisionError("grad_f is infinite on the anticanonical curve")
    return section.grad(p) / s + metric.grad_log_weight(p)


def curvature_form(metric: KstarMetric, p: ChartPoint) -> TwoForm:
    """F = -i ddbar log h0 as a real (1,1) TwoForm; positive for sign=+1."""
    return TwoForm.real_form(0.0, -1j * metric.log_weight_hessian(p))
