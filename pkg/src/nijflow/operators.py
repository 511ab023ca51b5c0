"""Polynomial operator fields on the base coordinates u^1..u^n.

An operator field is an n-by-n matrix of :class:`ExactPolynomial` entries in
the n base variables.  The module provides the two companion normal forms,
the Nijenhuis torsion, the compatibility bracket <L, M> for commuting pairs,
symmetry and strong-symmetry tests, characteristic polynomial coefficients by
the trace recursion, and a numeric cyclicity (gl-regularity) probe.

Index convention: entry(i, j) is the matrix element with upper index i and
lower index j, so a vector transforms as (L xi)^i = sum_j L^i_j xi^j.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactpoly import ExactPolynomial

VectorField = tuple[ExactPolynomial, ...]


class OperatorError(ValueError):
    """Raised for structurally invalid operator computations."""


def _as_entry(n: int, value) -> ExactPolynomial:
    if isinstance(value, ExactPolynomial):
        if value.nvars != n:
            raise OperatorError(
                f"entry has {value.nvars} variables, expected {n}")
        return value
    if isinstance(value, (int, Fraction)):
        return ExactPolynomial.constant(n, value)
    raise OperatorError(f"not a polynomial entry: {value!r}")


class OperatorField:
    """Square matrix of exact polynomials in as many variables as its size."""

    __slots__ = ("n", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        n = len(entries)
        if n == 0 or any(len(row) != n for row in entries):
            raise OperatorError("entries must form a non-empty square matrix")
        self_entries = tuple(tuple(_as_entry(n, e) for e in row) for row in entries)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", self_entries)

    def __setattr__(self, name, value):
        raise AttributeError("OperatorField is immutable")

    @classmethod
    def identity(cls, n: int) -> "OperatorField":
        one = Fraction(1)
        return cls([[one if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, n: int) -> "OperatorField":
        return cls([[0] * n for _ in range(n)])

    def entry(self, i: int, j: int) -> ExactPolynomial:
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorField):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def __add__(self, other: "OperatorField") -> "OperatorField":
        self._check(other)
        return OperatorField([[a + b for a, b in zip(ra, rb)]
                              for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: "OperatorField") -> "OperatorField":
        self._check(other)
        return OperatorField([[a - b for a, b in zip(ra, rb)]
                              for ra, rb in zip(self.entries, other.entries)])

    def __mul__(self, scalar) -> "OperatorField":
        if isinstance(scalar, (int, Fraction, ExactPolynomial)):
            return OperatorField([[e * scalar for e in row] for row in self.entries])
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorField") -> "OperatorField":
        self._check(other)
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = ExactPolynomial.zero(n)
                for s in range(n):
                    acc = acc + self.entries[i][s] * other.entries[s][j]
                row.append(acc)
            rows.append(row)
        return OperatorField(rows)

    def _check(self, other: "OperatorField") -> None:
        if self.n != other.n:
            raise OperatorError(f"operator sizes differ: {self.n} vs {other.n}")

    def transpose(self) -> "OperatorField":
        return OperatorField([[self.entries[j][i] for j in range(self.n)]
                              for i in range(self.n)])

    def antitranspose(self) -> "OperatorField":
        """Reflection across the anti-diagonal."""
        n = self.n
        return OperatorField([[self.entries[n - 1 - j][n - 1 - i]
                               for j in range(n)] for i in range(n)])

    def trace(self) -> ExactPolynomial:
        acc = ExactPolynomial.zero(self.n)
        for i in range(self.n):
            acc = acc + self.entries[i][i]
        return acc

    def power(self, k: int) -> "OperatorField":
        if k < 0:
            raise OperatorError("operator powers must be non-negative")
        result = OperatorField.identity(self.n)
        for _ in range(k):
            result = result @ self
        return result

    def evaluate_at(self, point: Sequence[float]) -> np.ndarray:
        return np.array([[e.evaluate(point) for e in row] for row in self.entries])

    def phase_entries(self) -> tuple[tuple[ExactPolynomial, ...], ...]:
        """Entries embedded into the cotangent chart variables (u, p)."""
        return tuple(tuple(e.with_appended_vars(self.n) for e in row)
                     for row in self.entries)

    def apply_to_field(self, xi: Sequence[ExactPolynomial]) -> VectorField:
        """The vector field with components (L xi)^i = L^i_j xi^j."""
        if len(xi) != self.n:
            raise OperatorError("vector field arity does not match operator size")
        out = []
        for i in range(self.n):
            acc = ExactPolynomial.zero(self.n)
            for j in range(self.n):
                acc = acc + self.entries[i][j] * xi[j]
            out.append(acc)
        return tuple(out)

    def __str__(self) -> str:
        from .exactpoly import base_names, format_polynomial
        names = base_names(self.n)
        rows = []
        for row in self.entries:
            rows.append("[" + ", ".join(format_polynomial(e, names) for e in row) + "]")
        return "[" + ", ".join(rows) + "]"

    __repr__ = __str__


def commutator(a: OperatorField, b: OperatorField) -> OperatorField:
    return (a @ b) - (b @ a)


def lie_bracket_fields(x: Sequence[ExactPolynomial],
                       y: Sequence[ExactPolynomial]) -> VectorField:
    """Lie bracket [X, Y]^i = X^a d_a Y^i - Y^a d_a X^i of polynomial fields."""
    n = len(x)
    if len(y) != n:
        raise OperatorError("vector fields must have equal arity")
    out = []
    for i in range(n):
        acc = ExactPolynomial.zero(x[0].nvars)
        for a in range(n):
            acc = acc + x[a] * y[i].partial(a) - y[a] * x[i].partial(a)
        out.append(acc)
    return tuple(out)


def _sigma_list(sigma: Sequence) -> list[ExactPolynomial]:
    n = len(sigma)
    if n == 0:
        raise OperatorError("at least one coefficient is required")
    out = []
    for s in sigma:
        if isinstance(s, ExactPolynomial):
            if s.nvars != n:
                raise OperatorError(
                    f"coefficient has {s.nvars} variables, expected {n}")
            out.append(s)
        elif isinstance(s, (int, Fraction)):
            out.append(ExactPolynomial.constant(n, s))
        else:
            raise OperatorError(f"not a polynomial coefficient: {s!r}")
    return out


def companion_second(sigma: Sequence) -> OperatorField:
    """Second companion form: ones on the superdiagonal, the coefficient row
    (sigma_n, ..., sigma_1) along the bottom."""
    sig = _sigma_list(sigma)
    n = len(sig)
    rows = [[ExactPolynomial.zero(n) for _ in range(n)] for _ in range(n)]
    for i in range(n - 1):
        rows[i][i + 1] = ExactPolynomial.constant(n, 1)
    for j in range(n):
        rows[n - 1][j] = sig[n - 1 - j]
    return OperatorField(rows)


def companion_first(sigma: Sequence) -> OperatorField:
    """First companion form: the anti-diagonal transpose of the second one,
    with the coefficients (sigma_1, ..., sigma_n) down the first column."""
    return companion_second(sigma).antitranspose()


class OneTwoTensorField:
    """A (1,2)-tensor with polynomial components T^k_{ij}."""

    __slots__ = ("n", "components")

    def __init__(self, components: Sequence[Sequence[Sequence[ExactPolynomial]]]):
        n = len(components)
        comp = tuple(tuple(tuple(_as_entry(n, c) for c in row) for row in layer)
                     for layer in components)
        if any(len(layer) != n or any(len(row) != n for row in layer)
               for layer in comp):
            raise OperatorError("components must form an n*n*n array")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "components", comp)

    def __setattr__(self, name, value):
        raise AttributeError("OneTwoTensorField is immutable")

    def component(self, k: int, i: int, j: int) -> ExactPolynomial:
        return self.components[k][i][j]

    def is_zero(self) -> bool:
        return all(c.is_zero() for layer in self.components
                   for row in layer for c in row)

    def is_skew(self) -> bool:
        n = self.n
        return all((self.components[k][i][j] + self.components[k][j][i]).is_zero()
                   for k in range(n) for i in range(n) for j in range(i + 1))

    def symmetrized(self) -> "OneTwoTensorField":
        n = self.n
        return OneTwoTensorField(
            [[[self.components[k][i][j] + self.components[k][j][i]
               for j in range(n)] for i in range(n)] for k in range(n)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, OneTwoTensorField):
            return NotImplemented
        return self.components == other.components

    def __neg__(self) -> "OneTwoTensorField":
        return OneTwoTensorField([[[-c for c in row] for row in layer]
                                  for layer in self.components])

    def contract(self, xi: Sequence[ExactPolynomial],
                 eta: Sequence[ExactPolynomial]) -> VectorField:
        """The vector field T(xi, eta)^k = T^k_{ij} xi^i eta^j."""
        n = self.n
        out = []
        for k in range(n):
            acc = ExactPolynomial.zero(xi[0].nvars)
            for i in range(n):
                for j in range(n):
                    acc = acc + self.components[k][i][j] * xi[i] * eta[j]
            out.append(acc)
        return tuple(out)


def nijenhuis_torsion(L: OperatorField) -> OneTwoTensorField:
    """Torsion components N^k_{ij}; the operator is Nijenhuis iff all vanish.

    N^k_{ij} = L^s_i d_s L^k_j - L^s_j d_s L^k_i
             - L^k_s d_i L^s_j + L^k_s d_j L^s_i.
    """
    n = L.n
    E = L.entries
    dE = [[[E[a][b].partial(s) for s in range(n)] for b in range(n)]
          for a in range(n)]
    # dE[a][b][s] = d_s L^a_b
    comps = []
    for k in range(n):
        layer = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = ExactPolynomial.zero(n)
                for s in range(n):
                    acc = acc + E[s][i] * dE[k][j][s]
                    acc = acc - E[s][j] * dE[k][i][s]
                    acc = acc - E[k][s] * dE[s][j][i]
                    acc = acc + E[k][s] * dE[s][i][j]
                row.append(acc)
            layer.append(row)
        comps.append(layer)
    return OneTwoTensorField(comps)


def torsion_of_pair(L: OperatorField, M: OperatorField) -> OneTwoTensorField:
    """Components of the compatibility bracket <L, M> for commuting L, M.

    <L, M>^k_{ij} = -(d_j L^s_i) M^k_s + (d_i M^s_j) L^k_s
                    - L^s_i d_s M^k_j + M^s_j d_s L^k_i.

    With M = L this equals minus the Nijenhuis torsion.
    """
    n = L.n
    A, B = L.entries, M.entries
    comps = []
    for k in range(n):
        layer = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = ExactPolynomial.zero(n)
                for s in range(n):
                    acc = acc - A[s][i].partial(j) * B[k][s]
                    acc = acc + B[s][j].partial(i) * A[k][s]
                    acc = acc - A[s][i] * B[k][j].partial(s)
                    acc = acc + B[s][j] * A[k][i].partial(s)
                row.append(acc)
            layer.append(row)
        comps.append(layer)
    return OneTwoTensorField(comps)


def guiding_bracket(L: OperatorField, M: OperatorField) -> OneTwoTensorField:
    """The compatibility bracket <L, M>; requires LM = ML so the result is a
    well-defined tensor field."""
    L._check(M)
    if not commutator(L, M).is_zero():
        raise OperatorError("the bracket requires commuting operator fields")
    return torsion_of_pair(L, M)


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of a symmetry test: the commutator and the relevant part of
    the compatibility bracket, both exact."""
    ok: bool
    commutator: OperatorField
    residual: OneTwoTensorField


def is_symmetry(L: OperatorField, M: OperatorField) -> SymmetryReport:
    """M is a symmetry of L when LM = ML and the symmetric (in the lower
    indices) part of <L, M> vanishes."""
    comm = commutator(L, M)
    residual = torsion_of_pair(L, M).symmetrized()
    return SymmetryReport(comm.is_zero() and residual.is_zero(), comm, residual)


def is_strong_symmetry(L: OperatorField, M: OperatorField) -> SymmetryReport:
    """M is a strong symmetry of L when LM = ML and <L, M> = 0."""
    comm = commutator(L, M)
    residual = torsion_of_pair(L, M)
    return SymmetryReport(comm.is_zero() and residual.is_zero(), comm, residual)


def char_coefficients(L: OperatorField) -> list[ExactPolynomial]:
    """Coefficients (sigma_1, ..., sigma_n) of the characteristic polynomial
    written as lambda^n - sigma_1 lambda^(n-1) - ... - sigma_n, computed by
    the trace recursion

        A_0 = Id,  M_k = L A_(k-1),  sigma_k = tr(M_k) / k,
        A_k = M_k - sigma_k Id.
    """
    n = L.n
    ident = OperatorField.identity(n)
    A = ident
    sigma: list[ExactPolynomial] = []
    for k in range(1, n + 1):
        M = L @ A
        s = M.trace() * Fraction(1, k)
        sigma.append(s)
        A = M - (ident * s)
    return sigma


def is_gl_regular_at(L: OperatorField, point: Sequence[float],
                     trials: int = 8, tol: float = 1e-9) -> bool:
    """Numeric cyclicity probe: search for a vector whose Krylov matrix
    [v, Lv, ..., L^(n-1) v] at the point has row-scaled determinant above
    ``tol``.  Standard basis vectors are tried first (the last one is cyclic
    for the second companion form), then vectors from a fixed-seed stream.
    """
    n = L.n
    A = L.evaluate_at(point)
    rng = np.random.default_rng(180451)
    candidates: list[np.ndarray] = []
    for i in range(n - 1, -1, -1):
        e = np.zeros(n)
        e[i] = 1.0
        candidates.append(e)
    while len(candidates) < max(trials, n):
        candidates.append(rng.standard_normal(n))
    for v in candidates[:max(trials, n)]:
        K = np.empty((n, n))
        w = v.astype(float)
        for c in range(n):
            K[:, c] = w
            w = A @ w
        scale = np.abs(K).max(axis=1)
        if np.any(scale == 0):
            continue
        if abs(np.linalg.det(K / scale[:, None])) > tol:
            return True
    return False
