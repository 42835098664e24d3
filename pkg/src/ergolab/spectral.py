"""Finitary Fourier engine on Z/JZ with dual-path cross-validation.

Normalization (everything downstream depends on it): the forward
transform of a J-periodic function carries the 1/J factor,

    F(f)(k) = (1/J) * sum_n f(n) e^{-2 pi i k n / J},
    f(j)    = sum_k F(f)(k) e^{+2 pi i k j / J},

so Parseval reads (1/J) sum_j |f(j)|^2 = sum_k |F(f)(k)|^2.  Most FFT
libraries put the 1/J on the inverse; here it is on the forward
transform.  Kernels are signed mass distributions and transform without
the 1/J factor: the transform of a point mass at x is k -> e^{2 pi i k x / J}.

The weighted average

    A_N(j) = (1/N) sum_{n<=N} nu(n) f(j + P(n)) g(j + Q(n))

admits two computation routes: the direct sum above, and the spectral
route through the coefficients

    D[N][k][l] = (1/N) sum_{n<=N} nu(n) e^{2 pi i (k P(n) + l Q(n)) / J},

via A_N(j) = sum_{k,l} F(f)(k) F(g)(l) D[N][k][l] e^{2 pi i (k+l) j / J}.
The two routes are independent code paths and the test suite holds them
together at tight tolerances; any disagreement is a bug, not a feature.

lp norms on Z/JZ use the normalized counting measure:
||f||_p = ((1/J) sum |f(j)|^p)^(1/p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .polynomials import IntPolynomial, eval_mod_range
from .weights import WeightTable

# Tolerances in force for the dual-path identities (relative to
# max(1, reference magnitude)).
ROUNDTRIP_RTOL = 1e-12
PARSEVAL_RTOL = 1e-12
CONV_RTOL = 1e-9
SQUARE_IDENTITY_RTOL = 1e-9
KERNEL_CONSISTENCY_RTOL = 1e-9

TOLERANCES = {
    "roundtrip_rtol": ROUNDTRIP_RTOL,
    "parseval_rtol": PARSEVAL_RTOL,
    "conv_rtol": CONV_RTOL,
    "square_identity_rtol": SQUARE_IDENTITY_RTOL,
    "kernel_consistency_rtol": KERNEL_CONSISTENCY_RTOL,
}


@dataclass
class PeriodicSignal:
    """Complex J-periodic sequence; index arithmetic is always mod J."""

    period: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.period < 1 or self.values.shape != (self.period,):
            raise ValueError("values must be a complex vector of length period >= 1")

    @classmethod
    def constant(cls, period: int, value: complex = 1.0) -> "PeriodicSignal":
        return cls(period, np.full(period, value, dtype=np.complex128))

    @classmethod
    def delta(cls, period: int, at: int = 0) -> "PeriodicSignal":
        values = np.zeros(period, dtype=np.complex128)
        values[at % period] = 1.0
        return cls(period, values)

    @classmethod
    def seeded_pm1(cls, period: int, seed: int) -> "PeriodicSignal":
        return cls(period, rng.pm1(seed, period).astype(np.complex128))

    @classmethod
    def seeded_complex(cls, period: int, seed: int) -> "PeriodicSignal":
        return cls(period, rng.complex_box(seed, period))

    def norm(self, p: float) -> float:
        """lp norm under the normalized counting measure (1/J) sum."""
        if p == np.inf:
            return float(np.max(np.abs(self.values)))
        return float(np.mean(np.abs(self.values) ** p) ** (1.0 / p))

    def norm_counting(self, p: float) -> float:
        """lp norm under unnormalized counting measure (plain sum)."""
        if p == np.inf:
            return float(np.max(np.abs(self.values)))
        return float(np.sum(np.abs(self.values) ** p) ** (1.0 / p))


@dataclass
class Spectrum:
    """Fourier coefficients under the 1/J-forward normalization."""

    period: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.period < 1 or self.coeffs.shape != (self.period,):
            raise ValueError("coeffs must be a complex vector of length period >= 1")


def dft(signal: PeriodicSignal) -> Spectrum:
    """Forward transform, 1/J on this side.  Exact-length FFT for any J."""
    return Spectrum(signal.period, np.fft.fft(signal.values) / signal.period)


def idft(spectrum: Spectrum) -> PeriodicSignal:
    return PeriodicSignal(spectrum.period, np.fft.ifft(spectrum.coeffs) * spectrum.period)


def _weight_slice(table: WeightTable, n_max: int) -> np.ndarray:
    if not 1 <= n_max <= table.limit:
        raise ValueError(f"N={n_max} outside table range [1, {table.limit}]")
    return table.values[1 : n_max + 1].astype(np.float64)


def _orbit_residues(
    p_poly: IntPolynomial, q_poly: IntPolynomial, n_max: int, period: int
) -> tuple[np.ndarray, np.ndarray]:
    n_values = np.arange(1, n_max + 1, dtype=np.int64)
    return (
        eval_mod_range(p_poly, n_values, period),
        eval_mod_range(q_poly, n_values, period),
    )


@dataclass
class DCoefficients:
    """Matrix D[k][l] of weighted character sums; |D[k][l]| <= 1."""

    period: int
    length: int
    matrix: np.ndarray

    def slice_by_total(self, s: int) -> np.ndarray:
        """Vector over k of D[k][(s-k) mod J], the fixed-total-degree slice."""
        j = self.period
        k = np.arange(j)
        return self.matrix[k, (s - k) % j]


def d_coefficients(
    table: WeightTable,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    n_max: int,
    period: int,
) -> DCoefficients:
    """All J^2 coefficients in O(N + J^2 log J).

    The weight mass is scattered onto (P(n) mod J, Q(n) mod J) and the
    matrix is one 2-d transform of that mass table; phases are exact
    because the residues are computed with modular Horner evaluation.
    """
    if period < 1:
        raise ValueError("period must be at least 1")
    w = _weight_slice(table, n_max) / n_max
    a, b = _orbit_residues(p_poly, q_poly, n_max, period)
    mass = np.bincount(a * period + b, weights=w, minlength=period * period)
    mass = mass.reshape(period, period)
    matrix = np.fft.ifft2(mass)
    matrix *= period * period
    return DCoefficients(period=period, length=n_max, matrix=matrix)


@dataclass
class DiagonalKernel:
    """Signed particle masses on Z/JZ: one particle per summand n."""

    period: int
    positions: np.ndarray
    masses: np.ndarray

    def total_mass(self) -> float:
        return float(self.masses.sum())

    def dense(self) -> np.ndarray:
        out = np.zeros(self.period, dtype=np.float64)
        np.add.at(out, self.positions, self.masses)
        return out

    def transform(self) -> np.ndarray:
        """k -> sum_i mass_i e^{2 pi i k x_i / J} (no 1/J for mass tables)."""
        return np.fft.ifft(self.dense()) * self.period


@dataclass
class OffDiagonalKernel:
    """Signed particle masses on (Z/JZ)^2."""

    period: int
    rows: np.ndarray
    cols: np.ndarray
    masses: np.ndarray

    def total_mass(self) -> float:
        return float(self.masses.sum())

    def dense(self) -> np.ndarray:
        flat = np.bincount(
            self.rows * self.period + self.cols,
            weights=self.masses,
            minlength=self.period * self.period,
        )
        return flat.reshape(self.period, self.period)

    def transform(self) -> np.ndarray:
        """(k, s) -> sum_i mass_i e^{2 pi i (k u_i + s v_i) / J}."""
        out = np.fft.ifft2(self.dense())
        out *= self.period * self.period
        return out


def off_diagonal(
    kernel: DiagonalKernel, other: DiagonalKernel | None = None
) -> OffDiagonalKernel:
    """Lift particle kernels to the product space.

    With one argument the particles land on the diagonal (x_i, x_i); with
    two kernels sharing the same particle masses they land on (x_i, y_i).
    """
    if other is None:
        other = kernel
    if kernel.period != other.period:
        raise ValueError("kernel periods differ")
    if kernel.positions.shape != other.positions.shape or not np.array_equal(
        kernel.masses, other.masses
    ):
        raise ValueError("kernels must share the same particle list and masses")
    return OffDiagonalKernel(
        period=kernel.period,
        rows=kernel.positions.copy(),
        cols=other.positions.copy(),
        masses=kernel.masses.copy(),
    )


def build_kernels(
    table: WeightTable,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    n_max: int,
    period: int,
) -> tuple[DiagonalKernel, DiagonalKernel, OffDiagonalKernel]:
    """(K_P, K_Q, L) where L carries mass nu(n)/N at (P(n)-Q(n), Q(n)).

    The 2-d transform of L reproduces the D matrix along fixed-total
    slices: transform(L)[k, s] == D[k][(s-k) mod J].
    """
    if period < 1:
        raise ValueError("period must be at least 1")
    w = _weight_slice(table, n_max) / n_max
    a, b = _orbit_residues(p_poly, q_poly, n_max, period)
    k_p = DiagonalKernel(period, a, w)
    k_q = DiagonalKernel(period, b, w.copy())
    l_kernel = OffDiagonalKernel(period, (a - b) % period, b, w.copy())
    return k_p, k_q, l_kernel


def _total_degree_spectrum(
    f_spec: Spectrum, g_spec: Spectrum, coeffs: DCoefficients
) -> np.ndarray:
    """c[s] = sum_k F(f)(k) F(g)(s-k) D[k][s-k]; regrouping by s = k + l."""
    if not f_spec.period == g_spec.period == coeffs.period:
        raise ValueError("spectra and coefficients must share one period")
    j = coeffs.period
    ff, fg = f_spec.coeffs, g_spec.coeffs
    total = np.zeros(j, dtype=np.complex128)
    for k in range(j):
        total += ff[k] * np.roll(fg * coeffs.matrix[k], k)
    return total


def spectral_average_all(
    f_spec: Spectrum, g_spec: Spectrum, coeffs: DCoefficients
) -> PeriodicSignal:
    """A_N at every j through the Fourier route: one inverse transform of
    the total-degree spectrum."""
    total = _total_degree_spectrum(f_spec, g_spec, coeffs)
    return idft(Spectrum(coeffs.period, total))


def spectral_average(
    f_spec: Spectrum, g_spec: Spectrum, coeffs: DCoefficients, j: int
) -> complex:
    total = _total_degree_spectrum(f_spec, g_spec, coeffs)
    period = coeffs.period
    chars = np.exp(2j * np.pi * (j % period) * np.arange(period) / period)
    return complex(np.sum(total * chars))


def direct_average(
    table: WeightTable,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    f: PeriodicSignal,
    g: PeriodicSignal,
    n_max: int,
    j: int,
) -> complex:
    """Literal (1/N) sum nu(n) f(j + P(n)) g(j + Q(n)) at one base point."""
    if f.period != g.period:
        raise ValueError("signal periods differ")
    period = f.period
    w = _weight_slice(table, n_max)
    a, b = _orbit_residues(p_poly, q_poly, n_max, period)
    fa = f.values[(a + j) % period]
    gb = g.values[(b + j) % period]
    prod = fa * gb
    return complex((w * prod).sum() / n_max)


def direct_average_all(
    table: WeightTable,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    f: PeriodicSignal,
    g: PeriodicSignal,
    n_max: int,
) -> PeriodicSignal:
    """Direct route evaluated at every j; O(N) per j, vectorized over n."""
    if f.period != g.period:
        raise ValueError("signal periods differ")
    period = f.period
    w = _weight_slice(table, n_max) / n_max
    a, b = _orbit_residues(p_poly, q_poly, n_max, period)
    f2 = np.concatenate([f.values, f.values])
    g2 = np.concatenate([g.values, g.values])
    out = np.empty(period, dtype=np.complex128)
    for j in range(period):
        out[j] = np.dot(f2[a + j] * g2[b + j], w)
    return PeriodicSignal(period, out)


def l2_norm_of_average(
    f_spec: Spectrum, g_spec: Spectrum, coeffs: DCoefficients
) -> float:
    """Squared normalized l2 norm of A_N from the spectral side:
    sum_s |sum_k F(f)(k) F(g)(s-k) D[k][s-k]|^2.

    Equals (1/J) sum_j |A_N(j)|^2; the test suite checks the direct side.
    """
    total = _total_degree_spectrum(f_spec, g_spec, coeffs)
    return float(np.sum(np.abs(total) ** 2))


@dataclass(frozen=True)
class L4BoundRow:
    length: int
    l2_norm: float
    norm4_product: float
    ratio: float


def l4_bound_report(
    f: PeriodicSignal,
    g: PeriodicSignal,
    table: WeightTable,
    p_poly: IntPolynomial,
    q_poly: IntPolynomial,
    n_list: list[int],
) -> list[L4BoundRow]:
    """||A_N||_2 against ||f||_4 ||g||_4 for increasing N.

    Emits the measured ratio per N so its decay can be inspected; no hard
    bound is asserted because the comparison constant is not effective.
    The weight mass tables are accumulated incrementally across the N
    list, one 2-d transform per N.
    """
    if f.period != g.period:
        raise ValueError("signal periods differ")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    period = f.period
    f_spec, g_spec = dft(f), dft(g)
    norm4 = f.norm(4) * g.norm(4)

    raw_mass = np.zeros(period * period, dtype=np.float64)
    rows = []
    previous = 0
    w_full = _weight_slice(table, n_list[-1])
    a_full, b_full = _orbit_residues(p_poly, q_poly, n_list[-1], period)
    for n_max in n_list:
        seg = slice(previous, n_max)
        raw_mass += np.bincount(
            a_full[seg] * period + b_full[seg],
            weights=w_full[seg],
            minlength=period * period,
        )
        previous = n_max
        matrix = np.fft.ifft2(raw_mass.reshape(period, period))
        matrix *= period * period / n_max
        coeffs = DCoefficients(period=period, length=n_max, matrix=matrix)
        l2 = float(np.sqrt(l2_norm_of_average(f_spec, g_spec, coeffs)))
        ratio = l2 / norm4 if norm4 > 0 else 0.0
        rows.append(L4BoundRow(n_max, l2, norm4, ratio))
    return rows
