"""Numerical laboratory for weighted arithmetic averages.

Subpackages cover: multiplicative weight sieves (Mobius, Liouville),
exact integer polynomials, weighted polynomial exponential sums with
grid maximization, a finitary Fourier engine on Z/JZ with dual-path
cross-validation, weighted bilinear ergodic averages on cyclic and
rotation systems, and lacunary maximal/oscillation statistics.
"""

__version__ = "0.1.0"

from .weights import WeightKind, WeightTable, sieve, partial_sum
from .polynomials import IntPolynomial, parse_poly
from .spectral import PeriodicSignal, Spectrum, dft, idft

__all__ = [
    "__version__",
    "WeightKind",
    "WeightTable",
    "sieve",
    "partial_sum",
    "IntPolynomial",
    "parse_poly",
    "PeriodicSignal",
    "Spectrum",
    "dft",
    "idft",
]
