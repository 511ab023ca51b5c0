"""The quadratic integral family and contravariant metric of a companion
operator field.

Phase-space functions live on the cotangent chart with variable ordering
(u^1, ..., u^n, p_1, ..., p_n).  For an operator L in second companion form
with characteristic coefficients sigma, the family h_1, ..., h_n is read off
the square of the momentum pencil

    S = p_n L^(n-1) + p_(n-1) L^(n-2) + ... + p_1 Id,

namely h_i = (S^2)[first row, column n+1-i].  Each h_i is a quadratic form in
p whose Gram matrix has polynomial entries in u; the Gram matrix of h_1 is
the contravariant metric of the construction.

An independent construction of the same family expands powers of L in the
basis Id, L, ..., L^(n-1) via the characteristic relation and collects
coefficients; the two routes must agree exactly and are cross-checked in the
test suite and the verification pipeline.

The canonical Poisson bracket used throughout is

    {f, g} = sum_k df/dp_k dg/du^k - df/du^k dg/dp_k,

so {p_i, u^j} = delta_i^j.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactpoly import ExactPolynomial, format_polynomial, phase_names
from .operators import OperatorField, companion_second


class MetricError(ValueError):
    """Raised for invalid metric computations."""


def _p_degree_of_term(exps, n):
    return sum(exps[n:])


class PhaseFunction:
    """Polynomial on the cotangent chart, homogeneous in the momenta.

    ``poly`` has 2n variables ordered (u, p); ``p_degree`` is the common
    momentum degree of all terms.  The zero polynomial is accepted at any
    declared degree.
    """

    __slots__ = ("n", "poly", "p_degree")

    def __init__(self, n: int, poly: ExactPolynomial, p_degree: int | None = None):
        if poly.nvars != 2 * n:
            raise MetricError(
                f"phase polynomial must have {2 * n} variables, got {poly.nvars}")
        degrees = {_p_degree_of_term(e, n) for e, _ in poly.terms()}
        if len(degrees) > 1:
            raise MetricError(
                f"polynomial is not homogeneous in the momenta: degrees {sorted(degrees)}")
        inferred = degrees.pop() if degrees else None
        if p_degree is None:
            if inferred is None:
                raise MetricError("momentum degree of the zero function must be given")
            p_degree = inferred
        elif inferred is not None and inferred != p_degree:
            raise MetricError(
                f"declared momentum degree {p_degree} does not match {inferred}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "p_degree", p_degree)

    def __setattr__(self, name, value):
        raise AttributeError("PhaseFunction is immutable")

    @classmethod
    def zero(cls, n: int, p_degree: int = 0) -> "PhaseFunction":
        return cls(n, ExactPolynomial.zero(2 * n), p_degree)

    def du(self, i: int) -> ExactPolynomial:
        """Partial derivative in u^i (0-based), as a raw 2n-variable polynomial."""
        return self.poly.partial(i)

    def dp(self, i: int) -> ExactPolynomial:
        """Partial derivative in p_i (0-based)."""
        return self.poly.partial(self.n + i)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def evaluate(self, u: Sequence[float], p: Sequence[float]) -> float:
        return self.poly.evaluate(list(u) + list(p))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseFunction):
            return NotImplemented
        return self.n == other.n and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((self.n, self.poly))

    def __add__(self, other: "PhaseFunction") -> "PhaseFunction":
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.p_degree != other.p_degree:
            raise MetricError("cannot add phase functions of different momentum degree")
        return PhaseFunction(self.n, self.poly + other.poly, self.p_degree)

    def __sub__(self, other: "PhaseFunction") -> "PhaseFunction":
        return self + (-1) * other

    def __mul__(self, other) -> "PhaseFunction":
        if isinstance(other, (int, Fraction)):
            return PhaseFunction(self.n, self.poly * other, self.p_degree)
        if isinstance(other, ExactPolynomial):
            # multiplication by a function of u alone keeps the momentum degree
            if other.nvars == self.n:
                other = other.with_appended_vars(self.n)
            if other.nvars != 2 * self.n:
                raise MetricError("scalar factor must live on the base or the chart")
            if any(_p_degree_of_term(e, self.n) for e, _ in other.terms()):
                raise MetricError("scalar factor must not involve the momenta")
            return PhaseFunction(self.n, self.poly * other, self.p_degree)
        if isinstance(other, PhaseFunction):
            self._check(other)
            return PhaseFunction(self.n, self.poly * other.poly,
                                 self.p_degree + other.p_degree)
        return NotImplemented

    __rmul__ = __mul__

    def _check(self, other: "PhaseFunction") -> None:
        if self.n != other.n:
            raise MetricError("phase functions live on different charts")

    def __str__(self) -> str:
        return format_polynomial(self.poly, phase_names(self.n))

    def __repr__(self) -> str:
        return f"PhaseFunction({self.n}, {self!s})"


def poisson_bracket(f: PhaseFunction, g: PhaseFunction) -> PhaseFunction:
    """{f, g} = sum_k df/dp_k dg/du^k - df/du^k dg/dp_k."""
    f._check(g)
    n = f.n
    acc = ExactPolynomial.zero(2 * n)
    for k in range(n):
        acc = acc + f.dp(k) * g.du(k) - f.du(k) * g.dp(k)
    degree = max(f.p_degree + g.p_degree - 1, 0)
    return PhaseFunction(n, acc, degree)


class GramMatrix:
    """Symmetric matrix of base polynomials: coefficients of a quadratic
    form in the momenta, h = sum_ab G^ab p_a p_b."""

    __slots__ = ("n", "entries")

    def __init__(self, entries: Sequence[Sequence[ExactPolynomial]]):
        n = len(entries)
        rows = tuple(tuple(e if isinstance(e, ExactPolynomial)
                           else ExactPolynomial.constant(n, e) for e in row)
                     for row in entries)
        if any(len(row) != n for row in rows):
            raise MetricError("Gram matrix must be square")
        for row in rows:
            for e in row:
                if e.nvars != n:
                    raise MetricError("Gram entries must be base polynomials")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise MetricError("Gram matrix must be symmetric")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, name, value):
        raise AttributeError("GramMatrix is immutable")

    def entry(self, i: int, j: int) -> ExactPolynomial:
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GramMatrix):
            return NotImplemented
        return self.entries == other.entries

    def evaluate_at(self, point: Sequence[float]) -> np.ndarray:
        return np.array([[e.evaluate(point) for e in row] for row in self.entries])

    def derivative(self, a: int) -> tuple[tuple[ExactPolynomial, ...], ...]:
        """Entrywise partial derivative in u^a."""
        return tuple(tuple(e.partial(a) for e in row) for row in self.entries)

    def determinant(self) -> ExactPolynomial:
        """Exact determinant by cofactor expansion."""
        return _det(self.entries)

    def quadratic_form(self) -> PhaseFunction:
        """The phase function sum_ab G^ab p_a p_b."""
        n = self.n
        acc = ExactPolynomial.zero(2 * n)
        for a in range(n):
            for b in range(n):
                pa = ExactPolynomial.variable(2 * n, n + a)
                pb = ExactPolynomial.variable(2 * n, n + b)
                acc = acc + self.entries[a][b].with_appended_vars(n) * pa * pb
        return PhaseFunction(n, acc, 2)


def _det(rows) -> ExactPolynomial:
    n = len(rows)
    nv = rows[0][0].nvars
    if n == 1:
        return rows[0][0]
    acc = ExactPolynomial.zero(nv)
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        cofactor = rows[0][j] * _det(minor)
        acc = acc + cofactor if j % 2 == 0 else acc - cofactor
    return acc


def _phase_matrix_product(a, b, nvars):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = ExactPolynomial.zero(nvars)
            for s in range(n):
                acc = acc + a[i][s] * b[s][j]
            row.append(acc)
        out.append(row)
    return out


def build_h_family(sigma: Sequence[ExactPolynomial]) -> list[PhaseFunction]:
    """The family h_1, ..., h_n from the square of the momentum pencil.

    Returns quadratic phase functions; the Gram matrix of h_1 is the
    contravariant metric.
    """
    n = len(sigma)
    L = companion_second(sigma)
    powers = [OperatorField.identity(n)]
    for _ in range(n - 1):
        powers.append(powers[-1] @ L)
    nv = 2 * n
    pencil = [[ExactPolynomial.zero(nv) for _ in range(n)] for _ in range(n)]
    for k in range(n):
        pk = ExactPolynomial.variable(nv, n + k)
        lifted = powers[k].phase_entries()
        for i in range(n):
            for j in range(n):
                pencil[i][j] = pencil[i][j] + pk * lifted[i][j]
    square = _phase_matrix_product(pencil, pencil, nv)
    return [PhaseFunction(n, square[0][n - i], 2) for i in range(1, n + 1)]


def reduced_power_coefficients(sigma: Sequence[ExactPolynomial],
                               max_power: int) -> list[list[ExactPolynomial]]:
    """Coefficients of L^k, k = 0..max_power, in the basis Id, L, ...,
    L^(n-1), using the characteristic relation
    L^n = sigma_1 L^(n-1) + ... + sigma_n Id."""
    n = len(sigma)
    one = ExactPolynomial.constant(n, 1)
    zero = ExactPolynomial.zero(n)
    coeffs = [[one if m == 0 else zero for m in range(n)]]
    for _ in range(max_power):
        prev = coeffs[-1]
        top = prev[n - 1]
        nxt = [top * sigma[n - 1]]
        for m in range(1, n):
            nxt.append(prev[m - 1] + top * sigma[n - 1 - m])
        coeffs.append(nxt)
    return coeffs


def h_family_from_powers(sigma: Sequence[ExactPolynomial]) -> list[PhaseFunction]:
    """Independent route to the same family: the Gram entry of h_m at (i, j)
    is the coefficient of L^(n-m) in the expansion of L^(i+j-2)."""
    n = len(sigma)
    coeffs = reduced_power_coefficients(sigma, 2 * n - 2)
    nv = 2 * n
    out = []
    for m in range(1, n + 1):
        acc = ExactPolynomial.zero(nv)
        for i in range(n):
            for j in range(n):
                c = coeffs[i + j][n - m]
                if c.is_zero():
                    continue
                pi = ExactPolynomial.variable(nv, n + i)
                pj = ExactPolynomial.variable(nv, n + j)
                acc = acc + c.with_appended_vars(n) * pi * pj
        out.append(PhaseFunction(n, acc, 2))
    return out


def gram_matrix(h: PhaseFunction) -> GramMatrix:
    """Extract the symmetric coefficient matrix of a momentum-quadratic
    phase function."""
    if h.p_degree != 2 and not h.is_zero():
        raise MetricError("Gram extraction requires a momentum-quadratic function")
    n = h.n
    acc = [[dict() for _ in range(n)] for _ in range(n)]

    def add(i, j, exps, coeff):
        d = acc[i][j]
        d[exps] = d.get(exps, Fraction(0)) + coeff

    for exps, coeff in h.poly.terms():
        u_part = exps[:n]
        p_part = exps[n:]
        support = [k for k, e in enumerate(p_part) if e]
        if len(support) == 1:
            a = support[0]
            add(a, a, u_part, coeff)
        else:
            a, b = support
            add(a, b, u_part, coeff / 2)
            add(b, a, u_part, coeff / 2)
    rows = [[ExactPolynomial(n, acc[i][j]) for j in range(n)] for i in range(n)]
    return GramMatrix(rows)


@dataclass(frozen=True)
class GramShapeReport:
    """Outcome of the normal-form check on the metric's Gram matrix."""
    ok: bool
    determinant: ExactPolynomial
    failures: tuple[str, ...]


def check_gram_normal_form(gram: GramMatrix) -> GramShapeReport:
    """For companion input the metric Gram matrix is unit anti-triangular:
    zero above the anti-diagonal, ones on it, and determinant +1 or -1."""
    n = gram.n
    failures = []
    one = ExactPolynomial.constant(n, 1)
    for i in range(n):
        for j in range(n):
            e = gram.entry(i, j)
            if i + j < n - 1 and not e.is_zero():
                failures.append(f"entry ({i + 1},{j + 1}) should vanish")
            if i + j == n - 1 and e != one:
                failures.append(f"entry ({i + 1},{j + 1}) should be one")
    det = gram.determinant()
    if det != one and det != ExactPolynomial.constant(n, -1):
        failures.append("determinant is not a unit")
    return GramShapeReport(not failures, det, tuple(failures))


@dataclass(frozen=True)
class ShiftReport:
    """Residuals of the differential recursion tying dh_i, dh_(i+1) and dh_1
    through the operator; all residuals vanish exactly in the torsion-free
    companion case."""
    ok: bool
    u_residuals: tuple[tuple[ExactPolynomial, ...], ...]
    p_residuals: tuple[tuple[ExactPolynomial, ...], ...]

    def max_abs_at(self, u, p) -> float:
        point = list(u) + list(p)
        vals = [abs(r.evaluate(point))
                for group in (self.u_residuals, self.p_residuals)
                for row in group for r in row]
        return max(vals)


def differential_shift_residuals(sigma: Sequence[ExactPolynomial],
                                 family: Sequence[PhaseFunction]) -> ShiftReport:
    """Exact residuals of the identities

        sum_s dh_i/du^s L^s_j = sigma_i dh_1/du^j + dh_(i+1)/du^j
        sum_s dh_i/dp_s L^j_s = sigma_i dh_1/dp_j + dh_(i+1)/dp_j

    for i = 1..n, where the i = n case closes with the sigma_n dh_1 term
    alone."""
    n = len(sigma)
    if len(family) != n:
        raise MetricError("family length must match the coefficient list")
    L = companion_second(sigma).phase_entries()
    sig = [s.with_appended_vars(n) for s in sigma]
    h1 = family[0]
    u_rows = []
    p_rows = []
    for i in range(n):
        hi = family[i]
        nxt = family[i + 1] if i + 1 < n else None
        u_row = []
        p_row = []
        for j in range(n):
            acc_u = ExactPolynomial.zero(2 * n)
            acc_p = ExactPolynomial.zero(2 * n)
            for s in range(n):
                acc_u = acc_u + hi.du(s) * L[s][j]
                acc_p = acc_p + hi.dp(s) * L[j][s]
            acc_u = acc_u - sig[i] * h1.du(j)
            acc_p = acc_p - sig[i] * h1.dp(j)
            if nxt is not None:
                acc_u = acc_u - nxt.du(j)
                acc_p = acc_p - nxt.dp(j)
            u_row.append(acc_u)
            p_row.append(acc_p)
        u_rows.append(tuple(u_row))
        p_rows.append(tuple(p_row))
    ok = all(r.is_zero() for rows in (u_rows, p_rows) for row in rows for r in row)
    return ShiftReport(ok, tuple(u_rows), tuple(p_rows))


@dataclass(frozen=True)
class PoissonPairReport:
    """Pairwise Poisson brackets of the family; all must vanish exactly."""
    ok: bool
    residuals: tuple[tuple[int, int, PhaseFunction], ...]


def pairwise_poisson(family: Sequence[PhaseFunction]) -> PoissonPairReport:
    residuals = []
    ok = True
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            b = poisson_bracket(family[i], family[j])
            if not b.is_zero():
                ok = False
            residuals.append((i + 1, j + 1, b))
    return PoissonPairReport(ok, tuple(residuals))


@dataclass(frozen=True)
class CovariantMetricAt:
    """The covariant metric and its first derivatives at a point.

    ``g`` is the inverse of the Gram matrix value; ``dg[a]`` is the matrix
    of d g_ij / d u^a obtained from the inverse-derivative rule
    dg = -g (dG) g, where G is the contravariant Gram matrix.
    """
    point: tuple[float, ...]
    g: np.ndarray
    dg: np.ndarray  # shape (n, n, n), first index is the derivative direction

    @property
    def n(self) -> int:
        return len(self.point)


def covariant_at(gram: GramMatrix, point: Sequence[float],
                 singular_tol: float = 1e-12) -> CovariantMetricAt:
    """Invert the contravariant metric at a point and push the derivative
    through the inversion."""
    n = gram.n
    G = gram.evaluate_at(point)
    if abs(np.linalg.det(G)) < singular_tol:
        raise MetricError(f"contravariant metric is singular at {tuple(point)}")
    g = np.linalg.inv(G)
    dG = np.array([[[e.evaluate(point) for e in row]
                    for row in gram.derivative(a)] for a in range(n)])
    dg = np.array([-g @ dG[a] @ g for a in range(n)])
    return CovariantMetricAt(tuple(float(x) for x in point), g, dg)
