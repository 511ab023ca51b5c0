"""Shared helpers for the test suite."""

from fractions import Fraction

from nijflow.exactpoly import ExactPolynomial, parse_expression


def unames(n):
    return [f"u{i + 1}" for i in range(n)]


def upnames(n):
    return unames(n) + [f"p{i + 1}" for i in range(n)]


def upoly(text, n):
    return parse_expression(text, unames(n))


def random_polynomial(rng, nvars, max_terms=6, max_degree=3, max_coeff=9):
    """A sparse random polynomial with small rational coefficients."""
    terms = []
    for _ in range(rng.randrange(max_terms + 1)):
        exps = tuple(rng.randrange(max_degree + 1) for _ in range(nvars))
        coeff = Fraction(rng.randint(-max_coeff, max_coeff),
                         rng.randint(1, max_coeff))
        terms.append((exps, coeff))
    return ExactPolynomial(nvars, terms)


def random_sigma(rng, n, max_terms=3, max_degree=2, max_coeff=5):
    """Random characteristic-coefficient lists; sparse so the downstream
    exact algebra stays small."""
    sig = []
    for _ in range(n):
        nterms = rng.randint(1, max_terms)
        terms = []
        for _ in range(nterms):
            exps = [0] * n
            for _ in range(rng.randint(0, max_degree)):
                exps[rng.randrange(n)] += 1
            coeff = Fraction(rng.randint(-max_coeff, max_coeff) or 1,
                             rng.randint(1, 3))
            terms.append((tuple(exps), coeff))
        sig.append(ExactPolynomial(n, terms))
    return sig


def random_phase_function(rng, n, p_degree, max_terms=4, max_degree=2):
    """Random momentum-homogeneous polynomial on the cotangent chart."""
    from nijflow.metric import PhaseFunction

    terms = []
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * (2 * n)
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(n)] += 1
        for _ in range(p_degree):
            exps[n + rng.randrange(n)] += 1
        coeff = Fraction(rng.randint(-6, 6) or 1, rng.randint(1, 4))
        terms.append((tuple(exps), coeff))
    return PhaseFunction(n, ExactPolynomial(2 * n, terms), p_degree)


# Named coefficient lists used throughout the suite.

def sigma_torsion_free2():
    """n=2 list whose second companion operator has zero torsion."""
    return [upoly("u1", 2), upoly("u2 - 1/2*u1^2", 2)]


def sigma_coordinates2():
    """n=2 list sigma = (u1, u2); its second companion operator has torsion
    component N^2_{12} = -u1, the standard negative control."""
    return [upoly("u1", 2), upoly("u2", 2)]


def sigma_constant(n, values=None):
    """Constant coefficients; every derived identity then holds trivially
    and flows are affine."""
    if values is None:
        values = [Fraction(2 - k, 2) for k in range(n)]
    return [ExactPolynomial.constant(n, v) for v in values]
