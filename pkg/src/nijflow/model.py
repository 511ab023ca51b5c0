"""One-stop bundle for a companion-form problem.

Given the characteristic coefficients sigma the bundle derives everything
the rest of the package consumes: the companion operator, the quadratic
first-integral family and its Gram matrix, the operator hierarchy and the
phase-space integrals.  Construction is eager; all members are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exactpoly import ExactPolynomial, base_names, parse_expression
from .hierarchy import first_integrals, killing_operators
from .metric import GramMatrix, PhaseFunction, build_h_family, gram_matrix
from .operators import OperatorField, companion_second


@dataclass(frozen=True)
class CompanionModel:
    """A companion operator with its derived metric and hierarchy."""
    sigma: tuple[ExactPolynomial, ...]
    operator: OperatorField
    family: tuple[PhaseFunction, ...]
    gram: GramMatrix
    killing: tuple[OperatorField, ...]
    integrals: tuple[PhaseFunction, ...]

    @property
    def n(self) -> int:
        return len(self.sigma)

    @classmethod
    def from_sigma(cls, sigma: Sequence[ExactPolynomial]) -> "CompanionModel":
        sigma = tuple(sigma)
        operator = companion_second(sigma)
        family = tuple(build_h_family(sigma))
        gram = gram_matrix(family[0])
        killing = tuple(killing_operators(sigma))
        integrals = tuple(first_integrals(gram, killing))
        return cls(sigma, operator, family, gram, killing, integrals)

    @classmethod
    def from_expressions(cls, expressions: Sequence[str]) -> "CompanionModel":
        n = len(expressions)
        names = base_names(n)
        return cls.from_sigma([parse_expression(e, names) for e in expressions])
