"""Counter-based pseudorandom generator for reproducible test signals.

The generator is SplitMix64: output(i) = mix64(seed + (i+1) * GAMMA) with
GAMMA = 0x9E3779B97F4A7C15 and the finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

all in 64-bit wrapping arithmetic.  Because outputs are a pure function of
(seed, counter), streams can be regenerated in any order, sliced, and
reproduced from any implementation of the same mixer.  Reference vectors
(also asserted in the test suite): seed 0 produces

    0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Return outputs offset..offset+count-1 of the stream for `seed` (uint64)."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def derive_seed(seed: int, index: int) -> int:
    """Independent child seed: mix64(seed XOR mix64(index + 1))."""
    return mix64((seed & _MASK) ^ mix64(index + 1))


def uniform01(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """float64 samples in [0, 1): top 53 bits of each output scaled by 2**-53."""
    u = splitmix64(seed, count, offset)
    return (u >> np.uint64(11)).astype(np.float64) * 2.0**-53


def pm1(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """float64 samples in {-1.0, +1.0} from the top bit of each output."""
    u = splitmix64(seed, count, offset)
    return 1.0 - 2.0 * (u >> np.uint64(63)).astype(np.float64)


def complex_box(seed: int, count: int) -> np.ndarray:
    """complex128 samples with re, im uniform in [-1, 1)."""
    re = 2.0 * uniform01(seed, count) - 1.0
    im = 2.0 * uniform01(seed, count, offset=count) - 1.0
    return re + 1j * im


def integers_mod(seed: int, count: int, modulus: int) -> np.ndarray:
    """int64 samples in [0, modulus); plain reduction, bias is irrelevant here."""
    if modulus < 1:
        raise ValueError("modulus must be positive")
    u = splitmix64(seed, count)
    return (u % np.uint64(modulus)).astype(np.int64)
