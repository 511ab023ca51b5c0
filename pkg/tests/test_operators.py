"""Operator fields: companion forms, torsion, bracket, symmetries."""

import itertools
import random
from fractions import Fraction

import pytest

from support import random_polynomial, sigma_coordinates2, sigma_torsion_free2

from nijflow.exactpoly import ExactPolynomial, parse_expression
from nijflow.operators import (
    OperatorError,
    OperatorField,
    char_coefficients,
    commutator,
    companion_first,
    companion_second,
    guiding_bracket,
    is_gl_regular_at,
    is_strong_symmetry,
    is_symmetry,
    lie_bracket_fields,
    nijenhuis_torsion,
    torsion_of_pair,
)


def upoly(text, n):
    return parse_expression(text, [f"u{i + 1}" for i in range(n)])


def random_field(rng, nvars, arity):
    return tuple(random_polynomial(rng, nvars, max_terms=3, max_degree=2)
                 for _ in range(arity))


def perm_sign(perm):
    sign = 1
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            sign = -sign
    return sign


def char_poly_by_determinant(L):
    """Oracle: det(lambda*Id - L) by permutation expansion, with lambda
    appended as an extra polynomial variable."""
    n = L.n
    lam = ExactPolynomial.variable(n + 1, n)
    M = [[lam - L.entries[i][j].with_appended_vars(1) if i == j
          else -L.entries[i][j].with_appended_vars(1)
          for j in range(n)] for i in range(n)]
    det = ExactPolynomial.zero(n + 1)
    for perm in itertools.permutations(range(n)):
        prod = ExactPolynomial.constant(n + 1, perm_sign(perm))
        for i in range(n):
            prod = prod * M[i][perm[i]]
        det = det + prod
    return det


def torsion_by_fields(L, xi, eta):
    """Oracle: N(X, Y) = [LX, LY] - L[LX, Y] - L[X, LY] + L^2 [X, Y]."""
    Lxi = L.apply_to_field(xi)
    Leta = L.apply_to_field(eta)
    t1 = lie_bracket_fields(Lxi, Leta)
    t2 = L.apply_to_field(lie_bracket_fields(Lxi, eta))
    t3 = L.apply_to_field(lie_bracket_fields(xi, Leta))
    t4 = L.apply_to_field(L.apply_to_field(lie_bracket_fields(xi, eta)))
    return tuple(a - b - c + d for a, b, c, d in zip(t1, t2, t3, t4))


def bracket_by_fields(L, M, xi, eta):
    """Oracle: <L, M>(X, Y) = M[LX, Y] + L[X, MY] - [LX, MY] - LM[X, Y]."""
    Lxi = L.apply_to_field(xi)
    Meta = M.apply_to_field(eta)
    t1 = M.apply_to_field(lie_bracket_fields(Lxi, eta))
    t2 = L.apply_to_field(lie_bracket_fields(xi, Meta))
    t3 = lie_bracket_fields(Lxi, Meta)
    t4 = L.apply_to_field(M.apply_to_field(lie_bracket_fields(xi, eta)))
    return tuple(a + b - c - d for a, b, c, d in zip(t1, t2, t3, t4))


class TestCompanionForms:
    def test_second_companion_n2(self):
        L = companion_second(sigma_torsion_free2())
        assert L.entry(0, 0).is_zero()
        assert L.entry(0, 1) == ExactPolynomial.constant(2, 1)
        assert L.entry(1, 0) == sigma_torsion_free2()[1]
        assert L.entry(1, 1) == sigma_torsion_free2()[0]

    def test_second_companion_n1(self):
        L = companion_second([upoly("u1", 1)])
        assert L.entry(0, 0) == upoly("u1", 1)

    def test_second_companion_n3(self):
        a, b, c = (upoly(t, 3) for t in ("u1", "u2", "u3"))
        L = companion_second([a, b, c])
        one = ExactPolynomial.constant(3, 1)
        assert L.entry(0, 1) == one and L.entry(1, 2) == one
        assert [L.entry(2, j) for j in range(3)] == [c, b, a]
        assert L.entry(0, 0).is_zero() and L.entry(0, 2).is_zero()

    def test_first_companion_is_antitranspose(self):
        s1, s2 = (upoly(t, 2) for t in ("u1", "u2"))
        L1 = companion_first([s1, s2])
        assert L1.entry(0, 0) == s1
        assert L1.entry(0, 1) == ExactPolynomial.constant(2, 1)
        assert L1.entry(1, 0) == s2
        assert L1.entry(1, 1).is_zero()
        assert companion_second([s1, s2]).antitranspose() == L1

    def test_first_companion_coordinate_pair_torsion_free(self):
        assert nijenhuis_torsion(companion_first(sigma_coordinates2())).is_zero()

    def test_wrong_length_rejected(self):
        with pytest.raises(OperatorError):
            companion_second([upoly("u1", 2)])


class TestTorsion:
    def test_coordinate_pair_torsion(self):
        # second companion of (u1, u2): the only nonzero components are
        # N^2_{12} = -u1 = -N^2_{21}
        N = nijenhuis_torsion(companion_second(sigma_coordinates2()))
        assert N.component(0, 0, 1).is_zero()
        assert N.component(1, 0, 1) == upoly("0 - u1", 2)
        assert N.component(1, 1, 0) == upoly("u1", 2)

    def test_torsion_free_pair(self):
        assert nijenhuis_torsion(companion_second(sigma_torsion_free2())).is_zero()

    def test_constant_operator_torsion_free(self):
        sig = [ExactPolynomial.constant(3, Fraction(k, 2)) for k in (1, 2, 3)]
        assert nijenhuis_torsion(companion_second(sig)).is_zero()

    def test_torsion_is_skew(self):
        rng = random.Random(31)
        for n in (2, 3):
            sig = [random_polynomial(rng, n, max_terms=3, max_degree=2)
                   for _ in range(n)]
            assert nijenhuis_torsion(companion_second(sig)).is_skew()

    def test_matches_field_formula(self):
        rng = random.Random(8842)
        for n in (2, 3):
            sig = [random_polynomial(rng, n, max_terms=2, max_degree=2)
                   for _ in range(n)]
            L = companion_second(sig)
            N = nijenhuis_torsion(L)
            for _ in range(3):
                xi = random_field(rng, n, n)
                eta = random_field(rng, n, n)
                direct = torsion_by_fields(L, xi, eta)
                contracted = N.contract(xi, eta)
                assert all((a - b).is_zero() for a, b in zip(direct, contracted))


class TestGuidingBracket:
    def test_self_bracket_is_minus_torsion(self):
        for sig in (sigma_coordinates2(), sigma_torsion_free2()):
            L = companion_second(sig)
            B = guiding_bracket(L, L)
            N = nijenhuis_torsion(L)
            assert B == -N

    def test_identity_partner_vanishes(self):
        L = companion_second(sigma_coordinates2())
        assert guiding_bracket(L, OperatorField.identity(2)).is_zero()

    def test_non_commuting_rejected(self):
        L = companion_second(sigma_coordinates2())
        M = OperatorField([[upoly("u2", 2), 0], [0, upoly("u1", 2)]])
        assert not commutator(L, M).is_zero()
        with pytest.raises(OperatorError):
            guiding_bracket(L, M)

    def test_matches_field_formula_for_powers(self):
        rng = random.Random(515)
        for n in (2, 3):
            sig = [random_polynomial(rng, n, max_terms=2, max_degree=1)
                   for _ in range(n)]
            L = companion_second(sig)
            M = L.power(2)
            B = guiding_bracket(L, M)
            for _ in range(2):
                xi = random_field(rng, n, n)
                eta = random_field(rng, n, n)
                direct = bracket_by_fields(L, M, xi, eta)
                contracted = B.contract(xi, eta)
                assert all((a - b).is_zero() for a, b in zip(direct, contracted))


class TestSymmetries:
    def test_powers_are_strong_symmetries_of_torsion_free(self):
        L = companion_second(sigma_torsion_free2())
        for M in (OperatorField.identity(2), L, L.power(2)):
            report = is_strong_symmetry(L, M)
            assert report.ok
            assert report.commutator.is_zero()

    def test_symmetry_weaker_than_strong(self):
        L = companion_second(sigma_torsion_free2())
        report = is_symmetry(L, L.power(2))
        assert report.ok

    def test_coordinate_pair_not_strong_self_symmetry(self):
        # nonzero torsion means <L, L> != 0
        L = companion_second(sigma_coordinates2())
        assert not is_strong_symmetry(L, L).ok
        # but <L, L> is skew, so its symmetrized part vanishes
        assert is_symmetry(L, L).ok

    def test_report_carries_residuals(self):
        L = companion_second(sigma_coordinates2())
        report = is_strong_symmetry(L, L)
        assert report.residual.component(1, 0, 1) == upoly("u1", 2)


class TestCharCoefficients:
    def test_twice_identity(self):
        two_id = OperatorField.identity(2) * 2
        sig = char_coefficients(two_id)
        assert sig[0] == ExactPolynomial.constant(2, 4)
        assert sig[1] == ExactPolynomial.constant(2, -4)

    def test_companion_round_trip(self):
        rng = random.Random(4096)
        for n in (1, 2, 3, 4):
            sig = [random_polynomial(rng, n, max_terms=2, max_degree=2)
                   for _ in range(n)]
            assert char_coefficients(companion_second(sig)) == sig

    def test_against_determinant_oracle(self):
        rng = random.Random(900)
        for n in (2, 3):
            entries = [[random_polynomial(rng, n, max_terms=2, max_degree=1)
                        for _ in range(n)] for _ in range(n)]
            L = OperatorField(entries)
            sig = char_coefficients(L)
            lam = ExactPolynomial.variable(n + 1, n)
            expected = lam ** n
            for k, s in enumerate(sig, start=1):
                expected = expected - s.with_appended_vars(1) * lam ** (n - k)
            assert char_poly_by_determinant(L) == expected


class TestGlRegularity:
    def test_companion_always_regular(self):
        L = companion_second(sigma_coordinates2())
        assert is_gl_regular_at(L, [0.0, 0.0])
        assert is_gl_regular_at(L, [1.3, -0.7])

    def test_identity_never_regular_for_n_above_one(self):
        assert not is_gl_regular_at(OperatorField.identity(2), [0.5, 0.5])

    def test_scalar_polynomial_multiple_of_identity(self):
        u1 = upoly("u1", 2)
        L = OperatorField([[u1, 0], [0, u1]])
        assert not is_gl_regular_at(L, [2.0, 1.0])

    def test_distinct_diagonal_is_regular(self):
        L = OperatorField([[upoly("u1", 2), 0], [0, upoly("u2", 2)]])
        assert is_gl_regular_at(L, [1.0, 2.0])


class TestVectorFieldUtilities:
    def test_lie_bracket_antisymmetric(self):
        rng = random.Random(12)
        x = random_field(rng, 3, 3)
        y = random_field(rng, 3, 3)
        b1 = lie_bracket_fields(x, y)
        b2 = lie_bracket_fields(y, x)
        assert all((a + b).is_zero() for a, b in zip(b1, b2))

    def test_jacobi_identity(self):
        rng = random.Random(13)
        x = random_field(rng, 2, 2)
        y = random_field(rng, 2, 2)
        z = random_field(rng, 2, 2)
        j1 = lie_bracket_fields(x, lie_bracket_fields(y, z))
        j2 = lie_bracket_fields(y, lie_bracket_fields(z, x))
        j3 = lie_bracket_fields(z, lie_bracket_fields(x, y))
        assert all((a + b + c).is_zero() for a, b, c in zip(j1, j2, j3))

    def test_coordinate_field_action(self):
        L = companion_second(sigma_coordinates2())
        e2 = (ExactPolynomial.zero(2), ExactPolynomial.constant(2, 1))
        img = L.apply_to_field(e2)
        assert img[0] == ExactPolynomial.constant(2, 1)
        assert img[1] == upoly("u1", 2)


class TestMatrixAlgebra:
    def test_power_and_matmul_agree(self):
        L = companion_second(sigma_torsion_free2())
        assert L.power(3) == L @ L @ L

    def test_trace_of_companion(self):
        L = companion_second(sigma_coordinates2())
        assert L.trace() == upoly("u1", 2)

    def test_cayley_hamilton(self):
        # L^n = sigma_1 L^(n-1) + ... + sigma_n Id for companion input
        for n in (2, 3):
            sig = [upoly(f"u{i + 1}", n) for i in range(n)]
            L = companion_second(sig)
            acc = OperatorField.zero(n)
            for k, s in enumerate(sig, start=1):
                acc = acc + L.power(n - k) * s
            assert L.power(n) == acc

    def test_size_mismatch_rejected(self):
        with pytest.raises(OperatorError):
            OperatorField.identity(2) @ OperatorField.identity(3)
