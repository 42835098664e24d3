"""Sieved multiplicative weights and their partial-sum diagnostics.

Values nu(n) live in {-1, 0, +1}:

    liouville(n) = (-1)**Omega(n), Omega counting prime factors with
    multiplicity; mobius(n) agrees with liouville(n) on squarefree n and
    vanishes when a squared prime divides n; both equal +1 at n = 1.

Tables are sieved in one vectorized block and are immutable afterwards,
so concurrent readers need no locking.  Partial sums are exact 64-bit
integers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

#: Hard cap on one-block sieve size; above this the table would not fit the
#: memory budget this lab is designed for (values + Omega scratch + cumsum).
DEFAULT_LIMIT_CAP = 200_000_000


class CapacityError(RuntimeError):
    """Requested table exceeds the configured memory budget."""


class WeightKind(enum.Enum):
    MOBIUS = "mobius"
    LIOUVILLE = "liouville"


@dataclass
class WeightTable:
    """Sieved weight values for n = 1..limit.

    Attributes:
        kind: which arithmetic function the table holds; None for custom
            tables built through ``from_values`` (test controls etc.).
        limit: largest sieved argument.
        values: int8 array of length limit+1; index 0 is an unused sentinel.
    """

    kind: WeightKind | None
    limit: int
    values: np.ndarray
    _cumulative: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, values: np.ndarray, kind: WeightKind | None = None) -> "WeightTable":
        arr = np.asarray(values, dtype=np.int8)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("values must be a 1-d array with at least indexes 0 and 1")
        if arr.min() < -1 or arr.max() > 1:
            raise ValueError("weight values must lie in {-1, 0, +1}")
        arr = arr.copy()
        arr[0] = 0
        arr.setflags(write=False)
        return cls(kind=kind, limit=arr.size - 1, values=arr)

    def cumulative(self) -> np.ndarray:
        """Exact running sums sum_{n<=N} nu(n) as int64, cached."""
        if self._cumulative is None:
            self._cumulative = np.cumsum(self.values, dtype=np.int64)
            self._cumulative.setflags(write=False)
        return self._cumulative


def _prime_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def sieve(kind: WeightKind, limit: int, limit_cap: int = DEFAULT_LIMIT_CAP) -> WeightTable:
    """Sieve mobius or liouville values for all n <= limit.

    One vectorized pass: every prime power p**k <= limit contributes +1 to
    Omega on its multiples, which gives liouville = (-1)**Omega; mobius is
    the squarefree restriction.  Runs in O(limit log log limit) element
    updates.

    Raises:
        ValueError: limit < 1.
        CapacityError: limit above the configured cap.
    """
    if limit < 1:
        raise ValueError("sieve limit must be at least 1")
    if limit > limit_cap:
        raise CapacityError(f"limit {limit} exceeds capacity cap {limit_cap}")

    prime = _prime_mask(limit) if limit >= 2 else np.zeros(limit + 1, dtype=bool)
    primes = np.nonzero(prime)[0]

    omega = np.zeros(limit + 1, dtype=np.uint8)
    for p in primes:
        omega[p::p] += 1
    for p in primes[primes <= math.isqrt(limit)]:
        pk = int(p) * int(p)
        while pk <= limit:
            omega[pk::pk] += 1
            pk *= int(p)

    values = np.where(omega & 1, -1, 1).astype(np.int8)
    if kind is WeightKind.MOBIUS:
        squarefree = np.ones(limit + 1, dtype=bool)
        for p in primes[primes <= math.isqrt(limit)]:
            sq = int(p) * int(p)
            squarefree[sq::sq] = False
        values[~squarefree] = 0
    values[0] = 0
    values.setflags(write=False)
    return WeightTable(kind=kind, limit=limit, values=values)


def constant_table(limit: int, value: int = 1) -> WeightTable:
    """All-constant table (control experiments); value in {-1, 0, +1}."""
    return WeightTable.from_values(np.full(limit + 1, value, dtype=np.int8))


def zero_table(limit: int) -> WeightTable:
    return constant_table(limit, 0)


def partial_sum(table: WeightTable, n: int) -> int:
    """sum_{m<=n} nu(m), exact."""
    if not 1 <= n <= table.limit:
        raise ValueError(f"n={n} outside table range [1, {table.limit}]")
    return int(table.cumulative()[n])


@dataclass(frozen=True)
class IdentityCheck:
    holds: bool
    first_counterexample: int | None


def check_lambda_mu_identity(
    mu_table: WeightTable, lambda_table: WeightTable, n: int
) -> IdentityCheck:
    """Verify liouville(m) == sum over d*d | m of mobius(m / d^2) for m <= n.

    The convolution side is accumulated by a direct double loop over the
    square divisors d*d, vectorized per d.
    """
    if n < 1 or n > mu_table.limit or n > lambda_table.limit:
        raise ValueError("n outside the range of the supplied tables")
    conv = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, math.isqrt(n) + 1):
        step = d * d
        count = n // step
        conv[step :: step][:count] += mu_table.values[1 : count + 1]
    mismatch = np.nonzero(conv[1:] != lambda_table.values[1 : n + 1])[0]
    if mismatch.size:
        return IdentityCheck(False, int(mismatch[0]) + 1)
    return IdentityCheck(True, None)


def zeta_reciprocal_partial(mu_table: WeightTable, s: float, n: int) -> float:
    """Partial Dirichlet series sum_{m<=n} mobius(m) / m**s, real s > 1.

    Converges to the reciprocal of zeta(s); the crude tail bound is
    sum_{m>n} m**-s < n**(1-s)/(s-1).
    """
    if not s > 1:
        raise ValueError("s must exceed 1 for the series to converge")
    if not 1 <= n <= mu_table.limit:
        raise ValueError(f"n={n} outside table range [1, {mu_table.limit}]")
    weights = mu_table.values[1 : n + 1].astype(np.float64)
    powers = np.arange(1, n + 1, dtype=np.float64) ** (-s)
    return float(np.dot(weights, powers))


@dataclass(frozen=True)
class PartialSumProfile:
    """|partial_sum(N)| against N and against N**exponent at checkpoints."""

    checkpoints: tuple[int, ...]
    sums: tuple[int, ...]
    linear_ratios: tuple[float, ...]
    exponent: float
    exponent_ratios: tuple[float, ...]

    @property
    def max_exponent_ratio(self) -> float:
        return max(self.exponent_ratios)


def partial_sum_profile(
    table: WeightTable, checkpoints: list[int], exponent: float = 0.6
) -> PartialSumProfile:
    """Report |sum_{n<=N} nu(n)| / N and / N**exponent at the checkpoints.

    Reported, not asserted: the exponent profile is an empirical stand-in
    for square-root-cancellation behaviour of the partial sums.
    """
    sums = [partial_sum(table, n) for n in checkpoints]
    return PartialSumProfile(
        checkpoints=tuple(checkpoints),
        sums=tuple(sums),
        linear_ratios=tuple(abs(s) / n for s, n in zip(sums, checkpoints)),
        exponent=exponent,
        exponent_ratios=tuple(abs(s) / n**exponent for s, n in zip(sums, checkpoints)),
    )
