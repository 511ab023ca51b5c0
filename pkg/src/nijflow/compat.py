"""Geodesic compatibility of the companion metric, in three equivalent forms.

A metric g and an operator field L are geodesically compatible when L maps
g-geodesics to curves that are geodesics up to reparametrization.  The module
checks this in three ways:

* bracket form (symbolic): the phase-space identity
  {H, F} = 2 H * d(tr L)/du^q  h1^(aq) p_a  with H = h1/2 and
  F^(kj) = h1^(ks) L^j_s, certified as an exact polynomial identity;
* coordinate form (pointwise): the first-order system R_ijk = 0 coupling g,
  its first derivatives and dL, evaluated numerically at sample points;
* Lie form (pointwise): the invariant relation on vector fields

    Lie_{L xi} g(eta, xi) - Lie_xi g(eta, L xi) - g(eta, [L xi, xi])
      + g([eta, L xi], xi) - g([eta, xi], L xi) = g(eta, xi) Lie_xi tr L,

  with the fields expanded exactly and the metric supplied numerically.

The module also implements the symmetry transform g -> gM, which carries a
compatible metric to another compatible metric whenever M is a symmetry of L.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactpoly import ExactPolynomial
from .metric import (
    CovariantMetricAt,
    GramMatrix,
    PhaseFunction,
    gram_matrix,
    poisson_bracket,
)
from .operators import (
    OperatorField,
    companion_second,
    is_symmetry,
    lie_bracket_fields,
)


class CompatError(ValueError):
    """Raised for invalid compatibility computations."""


@dataclass(frozen=True)
class CompatReport:
    """Outcome of one compatibility check.

    ``mode`` is "symbolic" or "pointwise".  For symbolic checks the residual
    polynomial is attached and the magnitude is its largest absolute
    coefficient; for pointwise checks the magnitude is the maximum absolute
    residual over the sampled points.
    """
    mode: str
    verdict: bool
    residual: float
    residual_polynomial: PhaseFunction | None = None

    @classmethod
    def symbolic(cls, residual: PhaseFunction) -> "CompatReport":
        size = max((abs(c) for _, c in residual.poly.terms()), default=Fraction(0))
        return cls("symbolic", residual.is_zero(), float(size), residual)

    @classmethod
    def pointwise(cls, max_abs: float, tol: float) -> "CompatReport":
        return cls("pointwise", max_abs < tol, float(max_abs))


@dataclass(frozen=True)
class SelfAdjointReport:
    """Antisymmetry of h1 L^T, plus the closure h1 L^T = sigma_1 h1 + h2
    when the full family is available."""
    ok: bool
    antisymmetry: tuple[tuple[ExactPolynomial, ...], ...]
    closure: tuple[tuple[ExactPolynomial, ...], ...] | None


def _h1_LT(h1: GramMatrix, L: OperatorField) -> list[list[ExactPolynomial]]:
    n = h1.n
    out = []
    for k in range(n):
        row = []
        for j in range(n):
            acc = ExactPolynomial.zero(n)
            for s in range(n):
                acc = acc + h1.entry(k, s) * L.entry(j, s)
            row.append(acc)
        out.append(row)
    return out


def self_adjoint_residual(h1: GramMatrix, L: OperatorField,
                          family: Sequence[PhaseFunction] | None = None
                          ) -> SelfAdjointReport:
    """L is h1-self-adjoint iff the matrix (h1 L^T)^(kj) is symmetric."""
    if h1.n != L.n:
        raise CompatError("metric and operator sizes differ")
    n = h1.n
    W = _h1_LT(h1, L)
    antisym = tuple(tuple(W[k][j] - W[j][k] for j in range(n)) for k in range(n))
    closure = None
    if family is not None:
        sigma1 = L.trace()
        expected = [[sigma1 * h1.entry(k, j) for j in range(n)] for k in range(n)]
        if n >= 2:
            h2g = gram_matrix(family[1])
            for k in range(n):
                for j in range(n):
                    expected[k][j] = expected[k][j] + h2g.entry(k, j)
        closure = tuple(tuple(W[k][j] - expected[k][j] for j in range(n))
                        for k in range(n))
    ok = all(e.is_zero() for row in antisym for e in row)
    if closure is not None:
        ok = ok and all(e.is_zero() for row in closure for e in row)
    return SelfAdjointReport(ok, antisym, closure)


def benenti_residual(family: Sequence[PhaseFunction],
                     sigma: Sequence[ExactPolynomial]) -> PhaseFunction:
    """Exact bracket-form residual {H, F} - 2 H G with H = h1/2,
    F = (h1 L^T)^(kj) p_k p_j and G = d(tr L)/du^q h1^(aq) p_a."""
    n = len(sigma)
    if len(family) != n:
        raise CompatError("family length must match the coefficient list")
    L = companion_second(sigma)
    h1 = gram_matrix(family[0])
    nv = 2 * n
    W = _h1_LT(h1, L)
    F_poly = ExactPolynomial.zero(nv)
    for k in range(n):
        for j in range(n):
            if W[k][j].is_zero():
                continue
            pk = ExactPolynomial.variable(nv, n + k)
            pj = ExactPolynomial.variable(nv, n + j)
            F_poly = F_poly + W[k][j].with_appended_vars(n) * pk * pj
    F = PhaseFunction(n, F_poly, 2)
    H = family[0] * Fraction(1, 2)
    trace = L.trace()
    G_poly = ExactPolynomial.zero(nv)
    for q in range(n):
        dtr = trace.partial(q)
        if dtr.is_zero():
            continue
        for a in range(n):
            pa = ExactPolynomial.variable(nv, n + a)
            G_poly = G_poly + (dtr * h1.entry(a, q)).with_appended_vars(n) * pa
    G = PhaseFunction(n, G_poly, 1)
    return poisson_bracket(H, F) - 2 * (H * G)


def coordinate_form_residual_at(g_at: CovariantMetricAt, L: OperatorField,
                                point: Sequence[float] | None = None) -> float:
    """Max-abs residual of the first-order compatibility system

        R_ijk = [g_ka d_i L^a_j + (d_a g_ik - d_k g_ia) L^a_j + (j <-> k)]
                - [g_ik d_j tr L + (j <-> k)].
    """
    n = L.n
    if g_at.n != n:
        raise CompatError("metric and operator sizes differ")
    if point is None:
        point = g_at.point
    elif tuple(float(x) for x in point) != g_at.point:
        raise CompatError("point differs from the one the metric was built at")
    g = g_at.g
    dg = g_at.dg  # dg[a, i, j] = d g_ij / d u^a
    Lv = L.evaluate_at(point)
    dL = np.array([[[L.entry(a, b).partial(i).evaluate(point)
                     for b in range(n)] for a in range(n)] for i in range(n)])
    # dL[i, a, b] = d_i L^a_b
    trace = L.trace()
    dtr = np.array([trace.partial(j).evaluate(point) for j in range(n)])

    def half(i, j, k):
        t1 = sum(g[k, a] * dL[i, a, j] for a in range(n))
        t2 = sum((dg[a, i, k] - dg[k, i, a]) * Lv[a, j] for a in range(n))
        return t1 + t2

    worst = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                lhs = half(i, j, k) + half(i, k, j)
                rhs = g[i, k] * dtr[j] + g[i, j] * dtr[k]
                worst = max(worst, abs(lhs - rhs))
    return worst


def _field_values(fields, point):
    return np.array([f.evaluate(point) for f in fields])


def _field_jacobian(fields, point, n):
    return np.array([[f.partial(a).evaluate(point) for a in range(n)]
                     for f in fields])  # [i, a] = d_a f^i


def lie_form_residual_at(g_at: CovariantMetricAt, L: OperatorField,
                         xi: Sequence[ExactPolynomial],
                         eta: Sequence[ExactPolynomial],
                         point: Sequence[float] | None = None) -> float:
    """Absolute residual of the invariant compatibility relation on the two
    polynomial vector fields; brackets and field derivatives are expanded
    exactly, the metric enters through ``g_at``."""
    n = L.n
    if len(xi) != n or len(eta) != n:
        raise CompatError("vector fields must have one component per coordinate")
    if point is None:
        point = g_at.point
    g = g_at.g
    dg = g_at.dg
    Lxi = L.apply_to_field(xi)
    b_Lxi_xi = lie_bracket_fields(Lxi, xi)
    b_eta_Lxi = lie_bracket_fields(eta, Lxi)
    b_eta_xi = lie_bracket_fields(eta, xi)

    xi_v = _field_values(xi, point)
    eta_v = _field_values(eta, point)
    Lxi_v = _field_values(Lxi, point)
    dxi = _field_jacobian(xi, point, n)
    deta = _field_jacobian(eta, point, n)
    dLxi = _field_jacobian(Lxi, point, n)

    def lie_of_pairing(Z_v, A_v, dA, B_v, dB):
        # directional derivative of g(A, B) along Z
        total = 0.0
        for a in range(n):
            term = (A_v @ dg[a] @ B_v
                    + dA[:, a] @ g @ B_v
                    + A_v @ g @ dB[:, a])
            total += Z_v[a] * term
        return total

    t1 = lie_of_pairing(Lxi_v, eta_v, deta, xi_v, dxi)
    t2 = lie_of_pairing(xi_v, eta_v, deta, Lxi_v, dLxi)
    t3 = eta_v @ g @ _field_values(b_Lxi_xi, point)
    t4 = _field_values(b_eta_Lxi, point) @ g @ xi_v
    t5 = _field_values(b_eta_xi, point) @ g @ Lxi_v
    trace = L.trace()
    lie_tr = sum(xi_v[a] * trace.partial(a).evaluate(point) for a in range(n))
    rhs = (eta_v @ g @ xi_v) * lie_tr
    return float(abs(t1 - t2 - t3 + t4 - t5 - rhs))


def symmetry_metric(g_at: CovariantMetricAt, M: OperatorField,
                    check_against: OperatorField | None = None,
                    self_adjoint_tol: float = 1e-9,
                    singular_tol: float = 1e-12) -> CovariantMetricAt:
    """The transformed covariant metric g~ = gM at a point, with its
    derivative tensor assembled by the product rule (exact dM, numeric dg).

    When ``check_against`` is an operator field, M is first certified as a
    symmetry of it symbolically.  M must be g-self-adjoint at the point, i.e.
    gM symmetric there, and g~ must be invertible.
    """
    n = M.n
    if g_at.n != n:
        raise CompatError("metric and operator sizes differ")
    if check_against is not None and not is_symmetry(check_against, M).ok:
        raise CompatError("M is not a symmetry of the given operator")
    point = g_at.point
    Mv = M.evaluate_at(point)
    gt = g_at.g @ Mv
    if np.abs(gt - gt.T).max() > self_adjoint_tol:
        raise CompatError("M is not metric-self-adjoint at the point")
    if abs(np.linalg.det(gt)) < singular_tol:
        raise CompatError("transformed metric is singular at the point")
    dM = np.array([[[M.entry(a, b).partial(i).evaluate(point)
                     for b in range(n)] for a in range(n)] for i in range(n)])
    dgt = np.array([g_at.dg[a] @ Mv + g_at.g @ dM[a] for a in range(n)])
    # symmetrize away inversion round-off so downstream checks see an exactly
    # symmetric metric value
    gt = 0.5 * (gt + gt.T)
    return CovariantMetricAt(point, gt, dgt)
