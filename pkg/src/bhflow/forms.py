"""Pointwise linear algebra on a two-complex-dimensional tangent space.

Everything here lives at a single point: real 2-forms and their
(p,q)-blocks in the (dz, dzbar) basis, real-linear maps of the tangent
space written as v -> A v + B conj(v), complex-structure operators,
and point metrics on the underlying R^4.

Conventions (frozen once, inherited by every other module):

* wedge evaluation carries no 1/2:  (a^b)(v,w) = a(v)b(w) - a(w)b(v),
  so (i dz^dzbar)(d/dx, d/dy) = 2;
* a real tangent vector is represented by its complex components
  v_k = dz_k(v), i.e. d/dx_k -> e_k and d/dy_k -> i e_k;
* a real (1,1) form sum b_jk dz_j^dzbar_k is positive iff the hermitian
  matrix -i b is positive definite (sign fixed by the Fubini-Study
  example in the surfaces module).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateJacobianError

# Real basis order (d/dx1, d/dy1, d/dx2, d/dy2); Q stacks (v, conj v)
# over real coordinates, so complex bilinear data converts to real Gram
# matrices by congruence with Q.
_QTOP = np.array([[1.0, 1.0j, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0j]])
_Q = np.vstack([_QTOP, _QTOP.conj()])
_QINV = np.linalg.inv(_Q)
_EPS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class TwoForm:
    """A 2-form at a point: c20 dz1^dz2 + sum b_jk dz_j^dzbar_k + c02 dzbar1^dzbar2.

    Coefficients may be complex; a *real* form satisfies
    c02 = conj(c20) and b anti-hermitian.
    """

    c20: complex
    c11: np.ndarray  # 2x2 complex, coefficient of dz_j ^ dzbar_k
    c02: complex

    @staticmethod
    def zero() -> "TwoForm":
        return TwoForm(0.0, np.zeros((2, 2), dtype=complex), 0.0)

    @staticmethod
    def real_form(c20: complex, c11: np.ndarray) -> "TwoForm":
        """Build a real form: c02 is forced to conj(c20) and the (1,1)
        block is projected onto its anti-hermitian part."""
        b = np.asarray(c11, dtype=complex)
        b = 0.5 * (b - b.conj().T)
        return TwoForm(complex(c20), b, np.conj(complex(c20)))

    @staticmethod
    def from_20(c20: complex) -> "TwoForm":
        """The (possibly complex) multiple c20 * dz1^dz2."""
        return TwoForm(complex(c20), np.zeros((2, 2), dtype=complex), 0.0)

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.c20 + other.c20, self.c11 + other.c11, self.c02 + other.c02)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.c20 - other.c20, self.c11 - other.c11, self.c02 - other.c02)

    def __mul__(self, a: complex) -> "TwoForm":
        return TwoForm(a * self.c20, a * self.c11, a * self.c02)

    __rmul__ = __mul__

    def __truediv__(self, a: complex) -> "TwoForm":
        return self * (1.0 / a)

    def __neg__(self) -> "TwoForm":
        return self * (-1.0)

    def conj_form(self) -> "TwoForm":
        """Complex conjugate as a form (swaps (2,0) and (0,2) blocks)."""
        return TwoForm(np.conj(self.c02), -self.c11.conj().T, np.conj(self.c20))

    def real_part(self) -> "TwoForm":
        return (self + self.conj_form()) * 0.5

    def imag_part(self) -> "TwoForm":
        return (self - self.conj_form()) * (-0.5j)

    def norm(self) -> float:
        """Frobenius norm of the coefficient data."""
        return float(
            np.sqrt(abs(self.c20) ** 2 + np.sum(np.abs(self.c11) ** 2) + abs(self.c02) ** 2)
        )

    def is_real(self, tol: float = 1e-10) -> bool:
        return (self - self.conj_form()).norm() <= tol * max(1.0, self.norm())

    # -- representations ---------------------------------------------------

    def smatrix(self) -> np.ndarray:
        """4x4 complex antisymmetric matrix S with beta(v,w) = (v, vbar) S (w, wbar)."""
        s = np.zeros((4, 4), dtype=complex)
        s[:2, :2] = self.c20 * _EPS2
        s[:2, 2:] = self.c11
        s[2:, :2] = -self.c11.T
        s[2:, 2:] = self.c02 * _EPS2
        return s

    @staticmethod
    def from_smatrix(s: np.ndarray) -> "TwoForm":
        s = 0.5 * (s - s.T)
        return TwoForm(s[0, 1], s[:2, 2:].copy(), s[2, 3])

    def gram(self) -> np.ndarray:
        """Real 4x4 antisymmetric Gram matrix on (d/dx1, d/dy1, d/dx2, d/dy2).

        Only meaningful for real forms; the imaginary residue is dropped.
        """
        g = _Q.T @ self.smatrix() @ _Q
        return g.real.copy()

    @staticmethod
    def from_gram(gram: np.ndarray) -> "TwoForm":
        g = 0.5 * (np.asarray(gram, dtype=float) - np.asarray(gram, dtype=float).T)
        return TwoForm.from_smatrix(_QINV.T @ g @ _QINV)


def evaluate(form: TwoForm, v, w, vbar=None, wbar=None) -> complex:
    """Evaluate a 2-form on two tangent vectors.

    v, w are complex pairs (dz_1, dz_2 components). By default the
    vectors are treated as real, i.e. their dzbar components are the
    conjugates; pass vbar / wbar explicitly to evaluate on complexified
    vectors such as d/dz_k (vbar = 0).
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    vb = np.conj(v) if vbar is None else np.asarray(vbar, dtype=complex)
    wb = np.conj(w) if wbar is None else np.asarray(wbar, dtype=complex)
    vv = np.concatenate([v, vb])
    ww = np.concatenate([w, wb])
    return complex(vv @ form.smatrix() @ ww)


def p11_projection(form: TwoForm) -> TwoForm:
    """The (1,1) component with respect to the background complex structure."""
    return TwoForm(0.0, form.c11.copy(), 0.0)


def wedge_top(a: TwoForm, b: TwoForm) -> complex:
    """Coefficient of dz1^dz2^dzbar1^dzbar2 in a^b.

    That top form equals 4 dx1^dy1^dx2^dy2, so a positive real
    coefficient means a^b is a positive multiple of the volume form.
    """
    ba, bb = a.c11, b.c11
    mixed = (
        -ba[0, 0] * bb[1, 1]
        - ba[1, 1] * bb[0, 0]
        + ba[0, 1] * bb[1, 0]
        + ba[1, 0] * bb[0, 1]
    )
    return complex(a.c20 * b.c02 + a.c02 * b.c20 + mixed)


def top_density(a: TwoForm, b: TwoForm) -> float:
    """a^b as a multiple of the volume form dx1^dy1^dx2^dy2 (real part)."""
    return 4.0 * wedge_top(a, b).real


@dataclass(frozen=True)
class RealLinearMap:
    """A real-linear map of the tangent space, v -> A v + B conj(v)."""

    A: np.ndarray  # 2x2 complex
    B: np.ndarray  # 2x2 complex

    @staticmethod
    def identity() -> "RealLinearMap":
        return RealLinearMap(np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex))

    @staticmethod
    def complex_linear(a: np.ndarray) -> "RealLinearMap":
        return RealLinearMap(np.asarray(a, dtype=complex), np.zeros((2, 2), dtype=complex))

    def apply(self, v, vbar=None) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        vb = np.conj(v) if vbar is None else np.asarray(vbar, dtype=complex)
        return self.A @ v + self.B @ vb

    def compose(self, other: "RealLinearMap") -> "RealLinearMap":
        """self o other (apply `other` first)."""
        a = self.A @ other.A + self.B @ other.B.conj()
        b = self.A @ other.B + self.B @ other.A.conj()
        return RealLinearMap(a, b)

    __matmul__ = compose

    def rmatrix(self) -> np.ndarray:
        """4x4 complex block matrix acting on stacked (v, conj v)."""
        r = np.zeros((4, 4), dtype=complex)
        r[:2, :2] = self.A
        r[:2, 2:] = self.B
        r[2:, :2] = self.B.conj()
        r[2:, 2:] = self.A.conj()
        return r

    def real_matrix(self) -> np.ndarray:
        """The map as a real 4x4 matrix on (dx1, dy1, dx2, dy2)."""
        m = _QINV @ self.rmatrix() @ _Q
        return m.real.copy()

    def inverse(self, cond_limit: float = 1e12) -> "RealLinearMap":
        r = self.rmatrix()
        if np.linalg.cond(r) > cond_limit:
            raise DegenerateJacobianError("real-linear map is numerically singular")
        rinv = np.linalg.inv(r)
        return RealLinearMap(rinv[:2, :2].copy(), rinv[:2, 2:].copy())

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.A) ** 2) + np.sum(np.abs(self.B) ** 2)))


def pullback(form: TwoForm, jmap: RealLinearMap) -> TwoForm:
    """(J* beta)(v, w) = beta(J v, J w)."""
    r = jmap.rmatrix()
    return TwoForm.from_smatrix(r.T @ form.smatrix() @ r)


@dataclass(frozen=True)
class ComplexStructureOp:
    """A real-linear map squaring to -identity."""

    op: RealLinearMap

    def __post_init__(self):
        sq = self.op.compose(self.op)
        err = RealLinearMap(sq.A + np.eye(2), sq.B).norm()
        if err > 1e-10 * max(1.0, self.op.norm() ** 2):
            raise ValueError(f"operator does not square to -identity (residual {err:.3e})")

    def real_matrix(self) -> np.ndarray:
        return self.op.real_matrix()

    def orientation_sign(self) -> int:
        """+1 if (e, Ie, e', Ie') is positively oriented for the standard
        orientation of (dx1, dy1, dx2, dy2)."""
        m = self.real_matrix()
        best = 0.0
        for k in (1, 2, 3):
            e1 = np.eye(4)[0]
            e2 = np.eye(4)[k]
            d = np.linalg.det(np.column_stack([e1, m @ e1, e2, m @ e2]))
            if abs(d) > abs(best):
                best = d
        return 1 if best > 0 else -1


IPLUS = ComplexStructureOp(RealLinearMap.complex_linear(1j * np.eye(2)))


def conjugate_structure(istruct: ComplexStructureOp, jmap: RealLinearMap) -> ComplexStructureOp:
    """Transport a complex structure through an invertible map: J^-1 o I o J."""
    jinv = jmap.inverse()
    return ComplexStructureOp(jinv.compose(istruct.op).compose(jmap))


@dataclass(frozen=True)
class PointMetric:
    """Symmetric bilinear form on the real tangent space."""

    gram: np.ndarray  # 4x4 real symmetric

    @staticmethod
    def from_array(g: np.ndarray) -> "PointMetric":
        g = np.asarray(g, dtype=float)
        return PointMetric(0.5 * (g + g.T))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gram)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def is_positive(self) -> bool:
        return self.min_eigenvalue() > 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.gram))


def metric_from_form(w: TwoForm, istruct: ComplexStructureOp, tol: float = 1e-8) -> PointMetric:
    """g(v, u) := w(v, I u) for a real (1,1) form w.

    Raises ValueError if the result is not symmetric, which signals that
    w was not of type (1,1) for I.
    """
    gw = w.gram()
    mi = istruct.real_matrix()
    g = gw @ mi
    asym = np.linalg.norm(g - g.T)
    if asym > tol * max(1.0, np.linalg.norm(g)):
        raise ValueError(f"input form is not (1,1) for the given structure (asymmetry {asym:.3e})")
    return PointMetric.from_array(g)


def form_from_gram(gram: np.ndarray) -> TwoForm:
    return TwoForm.from_gram(gram)


@dataclass(frozen=True)
class QuaternionPackage:
    """Pointwise data of a bihermitian pair (I+, I-, g).

    p is the cosine-type angle defined by I+ I- + I- I+ = -2p,
    commutator is [I+, I-], phi(v,w) = g([I+, I-] v, w), and
    phi_plus / phi_minus are its twists by I+ / I- in the first slot.
    norm_phi_sq uses the trace convention |L|^2 = tr_g(L^T L)/4, under
    which norm_phi_sq = 4 (1 - p^2) is an exact identity.
    """

    p: float
    commutator: RealLinearMap
    phi: TwoForm
    phi_plus: TwoForm
    phi_minus: TwoForm
    norm_phi_sq: float


def quaternion_package(
    iplus: ComplexStructureOp,
    iminus: ComplexStructureOp,
    g: PointMetric,
    compat_tol: float = 1e-8,
) -> QuaternionPackage:
    """Assemble (p, [I+,I-], phi, phi', phi'', |phi|^2) from a metric and
    two compatible complex structures.

    Both structures must be g-compatible (g(I., I.) = g) to tolerance and
    induce the same orientation. A zero metric (the t=0 degenerate case)
    is allowed and produces vanishing forms.
    """
    mp = iplus.real_matrix()
    mm = iminus.real_matrix()
    gm = g.gram
    gnorm = np.linalg.norm(gm)

    if gnorm > 0:
        for name, m in (("first", mp), ("second", mm)):
            err = np.linalg.norm(m.T @ gm @ m - gm)
            if err > compat_tol * gnorm:
                raise ValueError(
                    f"{name} structure is not compatible with the metric "
                    f"(relative error {err / gnorm:.3e})"
                )
    if iplus.orientation_sign() != iminus.orientation_sign():
        raise ValueError("structures induce opposite orientations")

    p = -0.25 * float(np.trace(mp @ mm))
    mc = mp @ mm - mm @ mp
    comm = _real_matrix_to_map(mc)

    gphi = mc.T @ gm
    gphi = 0.5 * (gphi - gphi.T)
    phi = TwoForm.from_gram(gphi)
    phi_plus = TwoForm.from_gram(mp.T @ gphi)
    phi_minus = TwoForm.from_gram(mm.T @ gphi)

    if gnorm == 0.0 or np.linalg.norm(mc) < 1e-14:
        norm_phi_sq = 0.0
    else:
        ct = np.linalg.solve(gm, mc.T @ gm)  # g-transpose of the commutator
        norm_phi_sq = 0.25 * float(np.trace(ct @ mc))
    return QuaternionPackage(p, comm, phi, phi_plus, phi_minus, norm_phi_sq)


def _real_matrix_to_map(m: np.ndarray) -> RealLinearMap:
    r = _Q @ m @ _QINV
    return RealLinearMap(r[:2, :2].copy(), r[:2, 2:].copy())


def hermitian_form(g: PointMetric, istruct: ComplexStructureOp) -> TwoForm:
    """The 2-form w(v, u) = g(I v, u) of a metric and compatible structure."""
    gm = istruct.real_matrix().T @ g.gram
    return TwoForm.from_gram(0.5 * (gm - gm.T))


def positive_part_matrix(form: TwoForm) -> np.ndarray:
    """Hermitian matrix whose positivity decides positivity of a real (1,1) form."""
    h = -1j * form.c11
    return 0.5 * (h + h.conj().T)


def is_positive_form(form: TwoForm) -> bool:
    return bool(np.linalg.eigvalsh(positive_part_matrix(form))[0] > 0.0)
