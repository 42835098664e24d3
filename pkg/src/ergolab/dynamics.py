"""Weighted bilinear and multilinear averages along polynomial orbits.

Two exactly representable measure-preserving systems:

  * CyclicShift(J): states are residues mod J, the map adds 1, and
    observables are J-periodic signals.  Orbit positions x + P(n) are
    reduced mod J in exact integer arithmetic.
  * RationalRotation(p, q): states are the q points a/q of the circle,
    the map adds p/q (gcd(p, q) = 1 so the rotation is ergodic), and
    observables are trigonometric polynomials.  Irrational rotations are
    approximated by continued-fraction convergents p/q supplied by the
    caller.

The central object is A_N(x) = (1/N) sum_{n<=N} nu(n) f(T^{P(n)} x) g(T^{Q(n)} x);
on the cyclic shift this is, by construction, the same expression the
spectral module evaluates, which gives an external oracle for both.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .maximal import LacunaryLadder
from .polynomials import IntPolynomial, eval_mod_range
from .spectral import PeriodicSignal
from .weights import WeightKind, WeightTable

MAX_ROTATION_DENOMINATOR = 1 << 31
MAX_TRIG_MODES = 64


@dataclass(frozen=True)
class CyclicShift:
    """j -> j + 1 on Z/JZ; preserves normalized counting measure."""

    period: int

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be at least 1")

    def check_state(self, x: int) -> int:
        if not 0 <= x < self.period:
            raise ValueError(f"state {x} outside Z/{self.period}Z")
        return x


@dataclass(frozen=True)
class RationalRotation:
    """x -> x + p/q on the q-point circle {a/q}; requires gcd(p, q) = 1."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if not 1 <= self.denominator <= MAX_ROTATION_DENOMINATOR:
            raise ValueError("denominator outside [1, 2^31]")
        if gcd(self.numerator, self.denominator) != 1:
            raise ValueError("numerator and denominator must be coprime")

    def check_state(self, x: int) -> int:
        if not 0 <= x < self.denominator:
            raise ValueError(f"state {x} is not a point a/{self.denominator}")
        return x


@dataclass(frozen=True)
class TrigPolynomial:
    """Finite mode expansion sum_i c_i e^{2 pi i m_i x} on the circle."""

    modes: tuple[int, ...]
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if len(self.modes) != len(self.coeffs) or not self.modes:
            raise ValueError("modes and coeffs must be equal-length and nonempty")
        if len(self.modes) > MAX_TRIG_MODES:
            raise ValueError(f"at most {MAX_TRIG_MODES} modes supported")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("modes must be distinct")

    def sup_norm_bound(self) -> float:
        return float(sum(abs(c) for c in self.coeffs))

    def at_points(self, numerators: np.ndarray, denominator: int) -> np.ndarray:
        """Values at the circle points numerators/denominator."""
        numerators = np.asarray(numerators, dtype=np.int64)
        out = np.zeros(numerators.shape, dtype=np.complex128)
        for mode, coeff in zip(self.modes, self.coeffs):
            residues = (mode % denominator) * (numerators % denominator) % denominator
            out += coeff * np.exp(2j * np.pi * residues / denominator)
        return out


def continued_fraction_convergents(alpha: float, max_denominator: int) -> list[tuple[int, int]]:
    """Convergents p/q of alpha with q <= max_denominator.

    Standard recurrence p_k = a_k p_{k-1} + p_{k-2} (same for q).  Use the
    last convergent as the rotation frequency when an irrational rotation
    is wanted: consecutive convergents are automatically coprime.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be at least 1")
    out: list[tuple[int, int]] = []
    p_prev, q_prev, p_cur, q_cur = 1, 0, int(np.floor(alpha)), 1
    x = alpha - np.floor(alpha)
    out.append((p_cur, q_cur))
    for _ in range(64):
        if x <= 0:
            break
        x = 1.0 / x
        a = int(np.floor(x))
        x -= a
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if q_cur > max_denominator:
            break
        out.append((p_cur, q_cur))
    return out


def windowed_orbit_signal(
    system,
    observable,
    poly: IntPolynomial,
    x: int,
    n_bar: int,
    period: int,
) -> PeriodicSignal:
    """Orbit samples cut off outside [-2*n_bar, 2*n_bar], embedded in Z/period.

    The signal is observable(T^{P(n)} x) for |n| <= 2*n_bar and zero
    otherwise, with index n taken mod period.  This is the finite-window
    transfer of a dynamical-system observable to a shift-system signal;
    period must exceed 4*n_bar so the window does not wrap onto itself.
    """
    if n_bar < 1:
        raise ValueError("n_bar must be at least 1")
    if period <= 4 * n_bar:
        raise ValueError("period must exceed 4 * n_bar to hold the window")
    x = system.check_state(x)
    window = np.arange(-2 * n_bar, 2 * n_bar + 1, dtype=np.int64)
    samples = _orbit_values(system, observable, poly, window, x)
    values = np.zeros(period, dtype=np.complex128)
    values[window % period] = samples
    return PeriodicSignal(period, values)


def preserves_counting_measure(system) -> bool:
    """Literal pushforward check: the one-step map permutes the states."""
    if isinstance(system, CyclicShift):
        states = np.arange(system.period)
        image = (states + 1) % system.period
    elif isinstance(system, RationalRotation):
        states = np.arange(system.denominator)
        image = (states + system.numerator) % system.denominator
    else:
        raise TypeError(f"unsupported system {type(system).__name__}")
    return bool(np.array_equal(np.sort(image), states))


def visits_every_state(system: RationalRotation, x: int = 0) -> bool:
    """Ergodicity of the rotation: the orbit of x covers all q points."""
    q = system.denominator
    orbit = (x + np.arange(q, dtype=np.int64) * system.numerator) % q
    return bool(np.unique(orbit).size == q)


def _orbit_values(system, observable, poly: IntPolynomial, n_values: np.ndarray, x: int, power: int = 1):
    """observable(T^{power * P(n)} x) for each n, exact index arithmetic."""
    if isinstance(system, CyclicShift):
        if not isinstance(observable, PeriodicSignal) or observable.period != system.period:
            raise ValueError("cyclic shift observables must be signals of matching period")
        j = system.period
        idx = eval_mod_range(poly, n_values, j)
        if power != 1:
            idx = (power % j) * idx % j
        return observable.values[(x + idx) % j]
    if isinstance(system, RationalRotation):
        if not isinstance(observable, TrigPolynomial):
            raise ValueError("rotation observables must be trigonometric polynomials")
        q = system.denominator
        idx = eval_mod_range(poly, n_values, q)
        if power != 1:
            idx = (power % q) * idx % q
        positions = (x + idx * (system.numerator % q)) % q
        return observable.at_points(positions, q)
    raise TypeError(f"unsupported system {type(system).__name__}")


def _weights(table: WeightTable, n_max: int) -> np.ndarray:
    if not 1 <= n_max <= table.limit:
        raise ValueError(f"N={n_max} outside table range [1, {table.limit}]")
    return table.values[1 : n_max + 1].astype(np.float64)


def bilinear_average(
    system,
    f,
    g,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    table: WeightTable,
    n_max: int,
    x: int,
) -> complex:
    """(1/N) sum_{n<=N} nu(n) f(T^{P(n)} x) g(T^{Q(n)} x)."""
    x = system.check_state(x)
    w = _weights(table, n_max)
    n_values = np.arange(1, n_max + 1, dtype=np.int64)
    fa = _orbit_values(system, f, p_poly, n_values, x)
    gb = _orbit_values(system, g, q_poly, n_values, x)
    prod = fa * gb
    return complex((w * prod).sum() / n_max)


def multilinear_average(
    system,
    observables,
    polys,
    table: WeightTable,
    n_max: int,
    x: int,
    powers=None,
) -> complex:
    """(1/N) sum nu(n) prod_i f_i(T_i^{P_i(n)} x) with each T_i a power of T."""
    if len(observables) != len(polys) or not observables:
        raise ValueError("need k >= 1 observables with one polynomial each")
    if powers is None:
        powers = [1] * len(observables)
    if len(powers) != len(observables):
        raise ValueError("powers must match the observables")
    x = system.check_state(x)
    w = _weights(table, n_max)
    n_values = np.arange(1, n_max + 1, dtype=np.int64)
    prod = _orbit_values(system, observables[0], polys[0], n_values, x, powers[0])
    for obs, poly, power in zip(observables[1:], polys[1:], powers[1:]):
        prod = prod * _orbit_values(system, obs, poly, n_values, x, power)
    return complex((w * prod).sum() / n_max)


@dataclass(frozen=True)
class AverageTrace:
    """A_N(x) sampled along the lacunary ladder."""

    start: int
    weight_kind: WeightKind | None
    p_spec: str
    q_spec: str
    lengths: tuple[int, ...]
    values: tuple[complex, ...]

    def first_at_least(self, n_min: int) -> tuple[int, complex]:
        for n_value, value in zip(self.lengths, self.values):
            if n_value >= n_min:
                return n_value, value
        raise ValueError(f"trace has no length >= {n_min}")

    @property
    def final(self) -> tuple[int, complex]:
        return self.lengths[-1], self.values[-1]


def convergence_trace(
    system,
    f,
    g,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    table: WeightTable,
    rho: float,
    x: int,
    n_limit: int | None = None,
) -> AverageTrace:
    """A_N(x) for every ladder member N = floor(rho^m) up to the limit.

    One pass with running sums: the full term sequence is accumulated
    blockwise between consecutive members, never recomputed from scratch.
    """
    x = system.check_state(x)
    limit = min(table.limit, n_limit) if n_limit else table.limit
    ladder = LacunaryLadder.build(rho, limit)
    members = np.array(ladder.members, dtype=np.int64)
    n_end = int(members[-1])
    w = _weights(table, n_end)
    n_values = np.arange(1, n_end + 1, dtype=np.int64)
    fa = _orbit_values(system, f, p_poly, n_values, x)
    gb = _orbit_values(system, g, q_poly, n_values, x)
    terms = w * (fa * gb)
    starts = np.concatenate([[0], members[:-1]])
    prefix = np.cumsum(np.add.reduceat(terms, starts))
    values = prefix / members
    return AverageTrace(
        start=x,
        weight_kind=table.kind,
        p_spec=p_poly.spec_string(),
        q_spec=q_poly.spec_string(),
        lengths=tuple(int(m) for m in members),
        values=tuple(complex(v) for v in values),
    )


def cauchy_schwarz_split(
    system,
    f,
    f_approx,
    g,
    g_approx,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    table: WeightTable,
    n_max: int,
    x: int,
) -> tuple[float, float]:
    """(lhs, rhs) of the splitting bound used to pass from bounded to
    square-integrable observables:

        |A_N(f - f1, g - g1)(x)| <= ((1/N) sum |df|^2 along P-orbit)^(1/2)
                                  * ((1/N) sum |dg|^2 along Q-orbit)^(1/2)

    Holds pointwise because |nu| <= 1."""
    x = system.check_state(x)
    df = PeriodicSignal(f.period, f.values - f_approx.values)
    dg = PeriodicSignal(g.period, g.values - g_approx.values)
    lhs = abs(bilinear_average(system, df, dg, p_poly, q_poly, table, n_max, x))
    n_values = np.arange(1, n_max + 1, dtype=np.int64)
    df_orbit = np.abs(_orbit_values(system, df, p_poly, n_values, x)) ** 2
    dg_orbit = np.abs(_orbit_values(system, dg, q_poly, n_values, x)) ** 2
    rhs = float(np.sqrt(df_orbit.mean()) * np.sqrt(dg_orbit.mean()))
    return lhs, rhs
