import numpy as np
import pytest

from ergolab import rng
from ergolab.dynamics import (
    AverageTrace,
    CyclicShift,
    RationalRotation,
    TrigPolynomial,
    bilinear_average,
    cauchy_schwarz_split,
    continued_fraction_convergents,
    convergence_trace,
    multilinear_average,
    preserves_counting_measure,
    visits_every_state,
    windowed_orbit_signal,
)
from ergolab.polynomials import IntPolynomial
from ergolab.spectral import PeriodicSignal, d_coefficients, dft, direct_average, spectral_average
from ergolab.weights import WeightKind, constant_table, partial_sum, sieve, zero_table

LINEAR = IntPolynomial((0, 1))
SQUARE = IntPolynomial((0, 0, 1))


def test_unweighted_constant_average_is_one():
    table = constant_table(5000)
    system = CyclicShift(32)
    ones = PeriodicSignal.constant(32)
    for n in (1, 100, 5000):
        value = bilinear_average(system, ones, ones, SQUARE, LINEAR, table, n, 7)
        assert value == pytest.approx(1.0, abs=1e-15)


def test_constant_observables_reduce_to_partial_sum(mobius_100k):
    system = CyclicShift(64)
    ones = PeriodicSignal.constant(64)
    n = 4321
    value = bilinear_average(system, ones, ones, SQUARE, LINEAR, mobius_100k, n, 0)
    assert value == pytest.approx(partial_sum(mobius_100k, n) / n, abs=1e-14)


def test_cyclic_average_equals_direct_average_bitwise(mobius_100k):
    j = 128
    f = PeriodicSignal.seeded_pm1(j, 301)
    g = PeriodicSignal.seeded_pm1(j, 302)
    system = CyclicShift(j)
    for x in (0, 17, 127):
        ours = bilinear_average(system, f, g, SQUARE, LINEAR, mobius_100k, 10_000, x)
        same = direct_average(mobius_100k, SQUARE, LINEAR, f, g, 10_000, x)
        assert ours == same  # identical formula, two code paths


def test_cyclic_average_matches_spectral_oracle(mobius_100k):
    j = 128
    f = PeriodicSignal.seeded_pm1(j, 311)
    g = PeriodicSignal.seeded_pm1(j, 312)
    coeffs = d_coefficients(mobius_100k, SQUARE, LINEAR, 10_000, j)
    x = 41
    ours = bilinear_average(CyclicShift(j), f, g, SQUARE, LINEAR, mobius_100k, 10_000, x)
    oracle = spectral_average(dft(f), dft(g), coeffs, x)
    assert abs(ours - oracle) < 1e-9


def test_rotation_average_matches_cmath_loop(liouville_100k):
    import cmath

    rot = RationalRotation(3, 257)
    f = TrigPolynomial(modes=(1, -2), coeffs=(1.0, 0.5j))
    g = TrigPolynomial(modes=(4,), coeffs=(1.0,))
    n, x = 500, 11
    value = bilinear_average(rot, f, g, SQUARE, LINEAR, liouville_100k, n, x)
    total = 0j
    for k in range(1, n + 1):
        pos_f = (x + (k * k % 257) * 3) % 257
        pos_g = (x + (k % 257) * 3) % 257
        fv = cmath.exp(2j * cmath.pi * pos_f / 257) + 0.5j * cmath.exp(-4j * cmath.pi * pos_f / 257)
        gv = cmath.exp(8j * cmath.pi * pos_g / 257)
        total += int(liouville_100k.values[k]) * fv * gv
    assert abs(value - total / n) < 1e-11


def test_measure_preservation_checks():
    assert preserves_counting_measure(CyclicShift(17))
    assert preserves_counting_measure(RationalRotation(5, 12))
    assert visits_every_state(RationalRotation(5, 12))
    assert visits_every_state(RationalRotation(1, 97), x=13)


def test_rotation_requires_coprime_frequency():
    with pytest.raises(ValueError):
        RationalRotation(4, 12)


def test_invalid_states_rejected(mobius_100k):
    ones = PeriodicSignal.constant(8)
    with pytest.raises(ValueError):
        bilinear_average(CyclicShift(8), ones, ones, SQUARE, LINEAR, mobius_100k, 10, 8)
    with pytest.raises(ValueError):
        bilinear_average(CyclicShift(8), ones, ones, SQUARE, LINEAR, mobius_100k, 10, -1)


def test_multilinear_k1_constant():
    table = constant_table(1000)
    ones = PeriodicSignal.constant(16)
    value = multilinear_average(CyclicShift(16), [ones], [LINEAR], table, 1000, 3)
    assert value == pytest.approx(1.0, abs=1e-15)


def test_multilinear_k2_agrees_with_bilinear_exactly(mobius_100k):
    j = 64
    system = CyclicShift(j)
    for trial in range(100):
        f = PeriodicSignal.seeded_complex(j, rng.derive_seed(400, 2 * trial))
        g = PeriodicSignal.seeded_complex(j, rng.derive_seed(400, 2 * trial + 1))
        n = 100 + 37 * trial
        x = trial % j
        two = bilinear_average(system, f, g, SQUARE, LINEAR, mobius_100k, n, x)
        multi = multilinear_average(system, [f, g], [SQUARE, LINEAR], mobius_100k, n, x)
        assert two == multi


def test_multilinear_k3_zero_weights():
    table = zero_table(1000)
    j = 16
    obs = [PeriodicSignal.seeded_pm1(j, s) for s in (1, 2, 3)]
    value = multilinear_average(
        CyclicShift(j), obs, [LINEAR, SQUARE, LINEAR], table, 1000, 0
    )
    assert value == 0.0


def test_multilinear_powers_shift_orbits(mobius_100k):
    j = 32
    f = PeriodicSignal.seeded_pm1(j, 11)
    g = PeriodicSignal.seeded_pm1(j, 12)
    # T1 = T^2, T2 = T^3 with linear times equals polynomials 2n and 3n.
    via_powers = multilinear_average(
        CyclicShift(j), [f, g], [LINEAR, LINEAR], mobius_100k, 500, 5, powers=[2, 3]
    )
    via_polys = bilinear_average(
        CyclicShift(j),
        f,
        g,
        IntPolynomial((0, 2)),
        IntPolynomial((0, 3)),
        mobius_100k,
        500,
        5,
    )
    assert via_powers == pytest.approx(via_polys, abs=1e-15)


def test_trace_zero_weights_all_zero():
    table = zero_table(4096)
    j = 16
    f = PeriodicSignal.seeded_pm1(j, 21)
    trace = convergence_trace(CyclicShift(j), f, f, SQUARE, LINEAR, table, 2.0, 3)
    assert all(v == 0 for v in trace.values)


def test_trace_matches_from_scratch_recomputation(mobius_100k):
    j = 97
    f = PeriodicSignal.seeded_pm1(j, 31)
    g = PeriodicSignal.seeded_pm1(j, 32)
    system = CyclicShift(j)
    trace = convergence_trace(
        system, f, g, SQUARE, LINEAR, mobius_100k, 2.0, 10, n_limit=50_000
    )
    for n_value, value in zip(trace.lengths, trace.values):
        scratch = bilinear_average(system, f, g, SQUARE, LINEAR, mobius_100k, n_value, 10)
        assert abs(value - scratch) < 1e-12


def test_trace_decays_on_cyclic_shift(mobius_1m):
    j = 97
    f = PeriodicSignal.seeded_pm1(j, 41)
    g = PeriodicSignal.seeded_pm1(j, 42)
    trace = convergence_trace(
        CyclicShift(j), f, g, SQUARE, LINEAR, mobius_1m, 2.0, 0, n_limit=10**6
    )
    assert abs(trace.values[-1]) < abs(trace.values[0])
    # |A_1| = |nu(1) f(x + P(1)) g(x + Q(1))| = 1 for pm1 observables.
    assert abs(trace.values[0]) == pytest.approx(1.0, abs=1e-15)


def test_trace_bounded_by_sup_norms(liouville_100k):
    j = 31
    f = PeriodicSignal.seeded_complex(j, 51)
    g = PeriodicSignal.seeded_complex(j, 52)
    trace = convergence_trace(
        CyclicShift(j), f, g, SQUARE, LINEAR, liouville_100k, 1.5, 7, n_limit=10_000
    )
    bound = f.norm(np.inf) * g.norm(np.inf)
    assert all(abs(v) <= bound + 1e-12 for v in trace.values)


def test_trace_requires_rho_above_one(mobius_100k):
    f = PeriodicSignal.constant(8)
    with pytest.raises(ValueError):
        convergence_trace(CyclicShift(8), f, f, SQUARE, LINEAR, mobius_100k, 1.0, 0)


def test_trace_first_at_least():
    trace = AverageTrace(0, WeightKind.MOBIUS, "0,1", "0,-1", (1, 2, 64, 128), (1j, 0.5, 0.25, 0.1))
    assert trace.first_at_least(64) == (64, 0.25)
    assert trace.final == (128, 0.1)
    with pytest.raises(ValueError):
        trace.first_at_least(1000)


def test_continued_fraction_convergents_golden_ratio():
    phi = (1 + 5**0.5) / 2
    convergents = continued_fraction_convergents(phi, 1000)
    # Fibonacci quotients, pairwise coprime, improving approximations.
    assert (1, 1) in convergents and (987, 610) in convergents
    import math

    errors = [abs(phi - p / q) for p, q in convergents]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert all(math.gcd(p, q) == 1 for p, q in convergents)
    # Convergents feed straight into rotation systems.
    p, q = convergents[-1]
    assert visits_every_state(RationalRotation(p, q))


def test_windowed_orbit_signal_embedding(mobius_100k):
    j, n_bar = 97, 8
    system = CyclicShift(j)
    f = PeriodicSignal.seeded_pm1(j, 71)
    period = 128
    embedded = windowed_orbit_signal(system, f, SQUARE, 5, n_bar, period)
    for n in (-2 * n_bar, -3, 0, 7, 2 * n_bar):
        expected = f.values[(5 + SQUARE(n)) % j]
        assert embedded.values[n % period] == expected
    # Outside the window the signal vanishes.
    assert embedded.values[(2 * n_bar + 1) % period] == 0
    assert np.count_nonzero(embedded.values) == 4 * n_bar + 1
    with pytest.raises(ValueError):
        windowed_orbit_signal(system, f, SQUARE, 5, n_bar, 4 * n_bar)


def test_windowed_signals_feed_maximal_statistics(mobius_100k):
    from ergolab.maximal import CLASSICAL_P, CLASSICAL_Q, global_maximal

    j, n_bar = 31, 16
    system = CyclicShift(j)
    f = PeriodicSignal.seeded_pm1(j, 81)
    g = PeriodicSignal.seeded_pm1(j, 82)
    phi = windowed_orbit_signal(system, f, SQUARE, 3, n_bar, 256)
    psi = windowed_orbit_signal(system, g, LINEAR, 3, n_bar, 256)
    top = global_maximal(phi, psi, CLASSICAL_P, CLASSICAL_Q, mobius_100k, n_bar)
    assert float(np.max(np.abs(top.values))) <= phi.norm(np.inf) * psi.norm(np.inf)


def test_cauchy_schwarz_split_bound(mobius_100k):
    j = 64
    system = CyclicShift(j)
    for trial in range(20):
        f = PeriodicSignal.seeded_complex(j, rng.derive_seed(600, 4 * trial))
        f1 = PeriodicSignal.seeded_complex(j, rng.derive_seed(600, 4 * trial + 1))
        g = PeriodicSignal.seeded_complex(j, rng.derive_seed(600, 4 * trial + 2))
        g1 = PeriodicSignal.seeded_complex(j, rng.derive_seed(600, 4 * trial + 3))
        lhs, rhs = cauchy_schwarz_split(
            system, f, f1, g, g1, SQUARE, LINEAR, mobius_100k, 200 + trial, trial % j
        )
        assert lhs <= rhs + 1e-12
