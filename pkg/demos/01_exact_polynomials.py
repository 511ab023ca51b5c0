"""Exact multivariate polynomials: parsing, arithmetic, evaluation.

Everything downstream rests on polynomials with rational coefficients and
exact arithmetic, so this demo walks the core idioms: the expression
grammar, canonical printing, calculus helpers, and the one precedence rule
worth knowing (unary minus binds the base, so -u1^2 parses as (-u1)^2).
"""

from fractions import Fraction

from nijflow import (ExactPolynomial, base_names, format_polynomial,
                     parse_expression, phase_names)

names = base_names(2)                       # ["u1", "u2"]
print("== parsing ==")
for text in ("u1", "u2 - 1/2*u1^2", "(u1 + u2)^3", "-u1^2", "0 - u1^2"):
    poly = parse_expression(text, names)
    print(f"  {text!r:18} -> {format_polynomial(poly, names)}")

print("\n== arithmetic is exact ==")
sigma2 = parse_expression("u2 - 1/2*u1^2", names)
cube = sigma2 ** 3
print(f"  sigma2^3 has {len(list(cube.terms()))} terms, degree "
      f"{cube.total_degree()}")
third = cube * Fraction(1, 3)
print(f"  (sigma2^3)/3 leading coefficient: "
      f"{next(iter(third.terms()))[1]}")

print("\n== calculus ==")
print(f"  d(sigma2)/du1 = {format_polynomial(sigma2.partial(0), names)}")
print(f"  d(sigma2)/du2 = {format_polynomial(sigma2.partial(1), names)}")

print("\n== evaluation ==")
point = [1.5, -0.25]
print(f"  sigma2{tuple(point)} = {sigma2.evaluate(point)}")
print(f"  exact: sigma2(3/2, -1/4) = "
      f"{sigma2.evaluate_exact([Fraction(3, 2), Fraction(-1, 4)])}")

print("\n== phase-space variables ==")
print(f"  cotangent chart for n=3: {phase_names(3)}")
h = parse_expression("2*p1*p2 + u1*p2^2", phase_names(2))
print(f"  round trip: {format_polynomial(h, phase_names(2))}")

print("\n== the one precedence quirk ==")
a = parse_expression("-u1^2", names)        # (-u1)^2 = u1^2
b = ExactPolynomial.zero(2) - parse_expression("u1^2", names)
print(f"  parse('-u1^2')  = {format_polynomial(a, names)}")
print(f"  0 - parse('u1^2') = {format_polynomial(b, names)}")
