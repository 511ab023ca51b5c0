"""Hamiltonian flows of the quadratic integrals on the cotangent chart.

States are points (u, p).  Each integral F yields the canonical vector field

    du^i/dt = dF/dp_i,      dp_i/dt = -dF/du^i,

whose right-hand side is compiled once from the exact polynomials into flat
coefficient tables and then evaluated in plain floating point, so repeated
trajectories are deterministic bit for bit.

Two integrators are provided: a fixed-step classical Runge-Kutta scheme and
an embedded adaptive pair of orders four and five with proportional step
control.  Orbit grids are filled by composing the commuting flows: the time
lattice is generated by prefix flows in the higher times, and each line is
swept in the x-parameter by the flow of the first integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .exactpoly import ExactPolynomial
from .metric import GramMatrix, PhaseFunction

State = list[float]


class FlowError(RuntimeError):
    """Integration failure; carries the last accepted state when known."""

    def __init__(self, message: str, last_state: "CotangentPoint | None" = None):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class CotangentPoint:
    """A point of the cotangent chart: base coordinates and momenta."""
    u: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self):
        if len(self.u) != len(self.p):
            raise ValueError("u and p must have the same length")
        if not all(math.isfinite(x) for x in (*self.u, *self.p)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))

    @property
    def n(self) -> int:
        return len(self.u)

    def state(self) -> State:
        return list(self.u) + list(self.p)

    @classmethod
    def from_state(cls, state: Sequence[float]) -> "CotangentPoint":
        half = len(state) // 2
        return cls(tuple(state[:half]), tuple(state[half:]))

    def distance(self, other: "CotangentPoint") -> float:
        return max(abs(a - b) for a, b in zip(self.state(), other.state()))


@dataclass(frozen=True)
class FlowSettings:
    """Integrator configuration.

    ``method`` selects "rk4" (fixed step ``step``) or "rk45" (adaptive with
    ``abs_tol``/``rel_tol``).  ``horizon`` bounds the allowed flow times;
    trajectories of polynomial Hamiltonians can blow up in finite time, so
    callers must opt in to long integrations explicitly.
    """
    method: str = "rk4"
    step: float = 1e-3
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    horizon: float = 1.0
    max_steps: int = 2_000_000
    min_step: float = 1e-13

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown integrator {self.method!r}")
        if self.step <= 0 or self.horizon <= 0:
            raise ValueError("step and horizon must be positive")
        if self.abs_tol <= 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be positive")


def _compile_polynomial(poly: ExactPolynomial):
    terms = []
    for exps, coeff in poly.terms():
        powers = tuple((i, e) for i, e in enumerate(exps) if e)
        terms.append((float(coeff), powers))
    return tuple(terms)


def _eval_compiled(terms, state: Sequence[float]) -> float:
    total = 0.0
    for coeff, powers in terms:
        v = coeff
        for i, e in powers:
            x = state[i]
            if e == 1:
                v *= x
            elif e == 2:
                v *= x * x
            else:
                v *= x ** e
        total += v
    return total


class HamiltonianField:
    """Compiled canonical vector field of one phase function."""

    __slots__ = ("n", "hamiltonian", "du_dt", "dp_dt", "_compiled")

    def __init__(self, hamiltonian: PhaseFunction):
        n = hamiltonian.n
        du_dt = tuple(hamiltonian.dp(i) for i in range(n))
        dp_dt = tuple(-hamiltonian.du(i) for i in range(n))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "du_dt", du_dt)
        object.__setattr__(self, "dp_dt", dp_dt)
        object.__setattr__(self, "_compiled",
                           tuple(_compile_polynomial(c) for c in (*du_dt, *dp_dt)))

    def __setattr__(self, name, value):
        raise AttributeError("HamiltonianField is immutable")

    def __call__(self, state: Sequence[float]) -> State:
        return [_eval_compiled(terms, state) for terms in self._compiled]

    def divergence(self) -> ExactPolynomial:
        """Symbolic divergence; identically zero for canonical fields."""
        acc = ExactPolynomial.zero(2 * self.n)
        for i in range(self.n):
            acc = acc + self.du_dt[i].partial(i) + self.dp_dt[i].partial(self.n + i)
        return acc

    def value(self, point: CotangentPoint) -> float:
        return self.hamiltonian.evaluate(point.u, point.p)


def hamiltonian_rhs(F: Union[PhaseFunction, HamiltonianField]) -> HamiltonianField:
    if isinstance(F, HamiltonianField):
        return F
    return HamiltonianField(F)


def _rk4_segment(f: Callable[[State], State], y: State, t_span: float,
                 step: float) -> State:
    nsteps = max(1, math.ceil(abs(t_span) / step - 1e-12))
    h = t_span / nsteps
    half = 0.5 * h
    sixth = h / 6.0
    m = len(y)
    for _ in range(nsteps):
        try:
            k1 = f(y)
            k2 = f([y[i] + half * k1[i] for i in range(m)])
            k3 = f([y[i] + half * k2[i] for i in range(m)])
            k4 = f([y[i] + h * k3[i] for i in range(m)])
            ynew = [y[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
                    for i in range(m)]
        except OverflowError:
            raise FlowError("state blew up during a step",
                            CotangentPoint.from_state(y)) from None
        if not all(math.isfinite(v) for v in ynew):
            raise FlowError("state became non-finite",
                            CotangentPoint.from_state(y))
        y = ynew
    return y


# Embedded pair of orders 4 and 5 (Fehlberg coefficients); the fifth-order
# solution is propagated and the difference drives the step control.
_RK45_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RK45_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RK45_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)


def _rk45_segment(f: Callable[[State], State], y: State, t_span: float,
                  settings: FlowSettings) -> State:
    if t_span == 0.0:
        return list(y)
    m = len(y)
    direction = 1.0 if t_span > 0 else -1.0
    remaining = abs(t_span)
    h = min(0.05, remaining)
    atol, rtol = settings.abs_tol, settings.rel_tol
    steps = 0
    while remaining > 0.0:
        steps += 1
        if steps > settings.max_steps:
            raise FlowError("step budget exhausted",
                            CotangentPoint.from_state(y))
        h = min(h, remaining)
        try:
            ks = []
            for row in _RK45_A:
                z = list(y)
                for a, k in zip(row, ks):
                    if a:
                        ha = direction * h * a
                        for i in range(m):
                            z[i] += ha * k[i]
                ks.append(f(z))
            y5 = [y[i] + direction * h * sum(b * ks[s][i]
                                             for s, b in enumerate(_RK45_B5) if b)
                  for i in range(m)]
        except OverflowError:
            raise FlowError("state blew up during a step",
                            CotangentPoint.from_state(y)) from None
        err = 0.0
        for i in range(m):
            e4 = sum((b5 - b4) * ks[s][i]
                     for s, (b5, b4) in enumerate(zip(_RK45_B5, _RK45_B4)))
            scale = atol + rtol * max(abs(y[i]), abs(y5[i]))
            err = max(err, abs(direction * h * e4) / scale)
        accepted = err <= 1.0 and all(math.isfinite(v) for v in y5)
        if accepted:
            y = y5
            remaining -= h
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        if not math.isfinite(factor):
            factor = 0.2
        h *= factor
        if h < settings.min_step and remaining > 0.0:
            raise FlowError("step size underflow",
                            CotangentPoint.from_state(y))
    return y


def _advance(f: HamiltonianField, y: State, t_span: float,
             settings: FlowSettings) -> State:
    if t_span == 0.0:
        return list(y)
    if settings.method == "rk4":
        y = _rk4_segment(f, y, t_span, settings.step)
        if not all(math.isfinite(v) for v in y):
            raise FlowError("state became non-finite")
        return y
    return _rk45_segment(f, y, t_span, settings)


def integrate_flow(F: Union[PhaseFunction, HamiltonianField],
                   start: CotangentPoint, t: float,
                   settings: FlowSettings = FlowSettings()) -> CotangentPoint:
    """The flow of one integral applied to a point for time ``t``."""
    if abs(t) > settings.horizon + 1e-12:
        raise FlowError(f"flow time {t} exceeds the configured horizon "
                        f"{settings.horizon}")
    f = hamiltonian_rhs(F)
    return CotangentPoint.from_state(_advance(f, start.state(), t, settings))


def integrate_flow_path(F: Union[PhaseFunction, HamiltonianField],
                        start: CotangentPoint, times: Sequence[float],
                        settings: FlowSettings = FlowSettings()
                        ) -> list[CotangentPoint]:
    """States of one flow at an increasing sequence of times, reached by
    chaining segment integrations from the previous stop."""
    f = hamiltonian_rhs(F)
    for t in times:
        if abs(t) > settings.horizon + 1e-12:
            raise FlowError(f"flow time {t} exceeds the configured horizon "
                            f"{settings.horizon}")
    out = []
    y = start.state()
    prev = 0.0
    for t in times:
        y = _advance(f, y, t - prev, settings)
        prev = t
        out.append(CotangentPoint.from_state(y))
    return out


@dataclass(frozen=True)
class AxisSpec:
    """One uniform lattice axis."""
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("axis needs at least one node")
        if self.count == 1 and self.stop != self.start:
            raise ValueError("single-node axis must have stop == start")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    @property
    def delta(self) -> float:
        if self.count == 1:
            return 0.0
        return (self.stop - self.start) / (self.count - 1)


@dataclass
class SolutionGrid:
    """Solution samples on a rectangular lattice.

    ``axes`` lists the lattice axes in index order; ``u`` has one trailing
    component axis, shape (axis counts..., n); ``p`` is parallel to ``u`` for
    flow-generated grids and None for direct PDE output.
    """
    axes: tuple[AxisSpec, ...]
    u: np.ndarray
    p: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = tuple(a.count for a in self.axes)
        if self.u.shape[:-1] != shape:
            raise ValueError(f"u has shape {self.u.shape}, axes imply {shape}")
        if self.p is not None and self.p.shape != self.u.shape:
            raise ValueError("p must match u in shape")

    @property
    def n(self) -> int:
        return self.u.shape[-1]

    def axis(self, name: str) -> int:
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise KeyError(f"no axis named {name!r}")


def orbit_grid(integrals: Sequence[Union[PhaseFunction, HamiltonianField]],
               start: CotangentPoint, axes: Sequence[AxisSpec],
               settings: FlowSettings = FlowSettings(),
               meta: dict | None = None) -> SolutionGrid:
    """Fill a lattice with the composed commuting flows.

    ``axes[0]`` parametrizes the flow of ``integrals[0]`` (the x-sweep) and
    ``axes[k]`` for k >= 1 the flow of ``integrals[k]``.  The time lattice in
    the higher axes is produced once by prefix composition, then every line
    is swept in x from its lattice node.
    """
    if len(axes) != len(integrals):
        raise ValueError("one axis per integral is required")
    fields = [hamiltonian_rhs(F) for F in integrals]
    n = fields[0].n
    axes = tuple(axes)
    for a in axes:
        if max(abs(a.start), abs(a.stop)) > settings.horizon + 1e-12:
            raise FlowError(f"axis {a.name!r} exceeds the configured horizon")
    t_axes = axes[1:]
    t_shape = tuple(a.count for a in t_axes)
    t_values = [a.values() for a in t_axes]

    # states at the time-lattice nodes, by prefix composition
    states: dict[tuple[int, ...], CotangentPoint] = {}
    origin = start
    for k, a in enumerate(t_axes):
        if a.start != 0.0:
            origin = integrate_flow(fields[k + 1], origin, a.start, settings)
    states[(0,) * len(t_axes)] = origin
    for idx in np.ndindex(*t_shape):
        if idx in states:
            continue
        k = max(d for d in range(len(t_axes)) if idx[d] > 0)
        prev = idx[:k] + (idx[k] - 1,) + idx[k + 1:]
        dt = t_values[k][idx[k]] - t_values[k][idx[k] - 1]
        states[idx] = integrate_flow(fields[k + 1], states[prev], dt, settings)

    x_axis = axes[0]
    u = np.empty((x_axis.count,) + t_shape + (n,))
    p = np.empty_like(u)
    x_values = list(x_axis.values())
    for idx in np.ndindex(*t_shape):
        points = integrate_flow_path(fields[0], states[idx], x_values, settings)
        for ix, pt in enumerate(points):
            u[(ix,) + idx] = pt.u
            p[(ix,) + idx] = pt.p
    grid_meta = {"generator": "orbit", "settings": settings}
    if meta:
        grid_meta.update(meta)
    return SolutionGrid(axes, u, p, grid_meta)


def verify_commutation(integrals: Sequence[Union[PhaseFunction, HamiltonianField]],
                       start: CotangentPoint, s: float, t: float,
                       settings: FlowSettings = FlowSettings()) -> float:
    """Largest endpoint mismatch between the two orders of composing each
    pair of flows for times (s, t)."""
    fields = [hamiltonian_rhs(F) for F in integrals]
    worst = 0.0
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            one = integrate_flow(fields[j], integrate_flow(fields[i], start, s,
                                                           settings), t, settings)
            two = integrate_flow(fields[i], integrate_flow(fields[j], start, t,
                                                           settings), s, settings)
            worst = max(worst, one.distance(two))
    return worst


def verify_conservation(integrals: Sequence[Union[PhaseFunction, HamiltonianField]],
                        start: CotangentPoint, t: float,
                        settings: FlowSettings = FlowSettings()) -> float:
    """Largest drift of any integral along any of the flows up to time t."""
    fields = [hamiltonian_rhs(F) for F in integrals]
    reference = [f.value(start) for f in fields]
    worst = 0.0
    for f in fields:
        end = integrate_flow(f, start, t, settings)
        for g, ref in zip(fields, reference):
            worst = max(worst, abs(g.value(end) - ref))
    return worst


def geodesic_from(u0: Sequence[float], udot0: Sequence[float],
                  gram: GramMatrix) -> CotangentPoint:
    """Initial covector of the geodesic with given initial velocity: solve
    G(u0) p = udot0 for the momenta."""
    G = gram.evaluate_at(list(u0))
    try:
        p = np.linalg.solve(G, np.asarray(udot0, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise FlowError(f"metric is singular at {tuple(u0)}") from exc
    return CotangentPoint(tuple(float(x) for x in u0), tuple(float(x) for x in p))
