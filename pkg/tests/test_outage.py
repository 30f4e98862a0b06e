import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manetsim.outage import (
    LinkOutageInput,
    OutageNumericsError,
    _g_series,
    coefficient_H,
    monte_carlo_outage,
    outage_probability,
    outage_probability_batch,
)


def h_by_enumeration(t, interferers, beta1):
    """Independent check: explicit sum over all multi-indices summing to t."""
    if not interferers:
        return 1.0 if t == 0 else 0.0
    series = [_g_series(omega, m, beta1, t) for omega, m in interferers]
    total = 0.0
    for combo in itertools.product(range(t + 1), repeat=len(interferers)):
        if sum(combo) != t:
            continue
        prod = 1.0
        for series_i, ell in zip(series, combo):
            prod *= series_i[ell]
        total += prod
    return total


def test_outage_zero_noise_no_interferers_is_zero():
    inp = LinkOutageInput(omega_k=3.7, m_k=1, beta=1.0, z=0.0)
    assert outage_probability(inp) == 0.0


def test_outage_rayleigh_noise_only():
    inp = LinkOutageInput(omega_k=1.0, m_k=1, beta=1.0, z=1.0)
    assert outage_probability(inp) == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_outage_single_rayleigh_interferer_third():
    inp = LinkOutageInput(omega_k=1.0, m_k=1, interferers=((0.5, 1),), beta=1.0, z=0.0)
    assert outage_probability(inp) == pytest.approx(1 / 3, abs=1e-12)


def test_oracle_matches_closed_form_mixed_case():
    inp = LinkOutageInput(omega_k=1.0, m_k=2, interferers=((0.2, 1), (0.2, 1)), beta=1.0, z=0.5)
    closed = outage_probability(inp)
    est, se = monte_carlo_outage(inp, 1_000_000, np.random.default_rng(0))
    assert abs(closed - est) <= 4 * se


def test_oracle_trivial_cases():
    inp = LinkOutageInput(omega_k=1.0, m_k=1, beta=1.0, z=0.0)
    est, se = monte_carlo_outage(inp, 10_000, np.random.default_rng(1))
    assert est == 0.0 and se == 0.0

    inp = LinkOutageInput(omega_k=1.0, m_k=1, beta=1e12, z=1.0)
    est, _ = monte_carlo_outage(inp, 10_000, np.random.default_rng(2))
    assert est > 0.999


def test_oracle_requires_draws():
    inp = LinkOutageInput(omega_k=1.0, m_k=1)
    with pytest.raises(ValueError):
        monte_carlo_outage(inp, 0, np.random.default_rng(0))


def test_coefficient_h_trivial_cases():
    interferers = ((0.4, 2), (1.2, 1), (0.1, 3))
    beta1 = 0.8
    expected = 1.0
    for omega, m in interferers:
        psi = 1.0 / (beta1 * omega / m + 1.0)
        expected *= psi**m
    assert coefficient_H(0, interferers, beta1) == pytest.approx(expected, rel=1e-14)
    assert coefficient_H(0, (), beta1) == 1.0
    assert coefficient_H(3, (), beta1) == 0.0
    with pytest.raises(ValueError):
        coefficient_H(-1, interferers, beta1)


def test_coefficient_h_single_interferer_order_one():
    # One Rayleigh interferer with unit power at beta1=1: psi = 1/2, so the
    # order-1 term is (omega/m) * psi^2 = 1/4.
    assert coefficient_H(1, ((1.0, 1),), 1.0) == pytest.approx(0.25, abs=1e-15)


def test_coefficient_h_matches_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(0, 6))
        interferers = tuple(
            (float(rng.uniform(0.05, 3.0)), int(rng.integers(1, 4))) for _ in range(n)
        )
        beta1 = float(rng.uniform(0.1, 5.0))
        for t in range(4):
            dp = coefficient_H(t, interferers, beta1)
            brute = h_by_enumeration(t, interferers, beta1)
            assert dp == pytest.approx(brute, rel=1e-12, abs=1e-15)


def _random_input(rng):
    n = int(rng.integers(0, 7))
    return LinkOutageInput(
        omega_k=float(rng.uniform(0.1, 10.0)),
        m_k=int(rng.integers(1, 4)),
        interferers=tuple((float(rng.uniform(0.01, 2.0)), int(rng.integers(1, 4))) for _ in range(n)),
        beta=float(rng.choice([0.5, 1.0, 2.0])),
        z=float(rng.choice([0.0, 0.1, 1.0])),
    )


def test_probability_in_unit_interval_randomized():
    rng = np.random.default_rng(4)
    for _ in range(300):
        eps = outage_probability(_random_input(rng))
        assert 0.0 <= eps <= 1.0


def test_monotonicity_randomized():
    rng = np.random.default_rng(5)
    for _ in range(200):
        inp = _random_input(rng)
        base = outage_probability(inp)
        import dataclasses

        more_beta = dataclasses.replace(inp, beta=inp.beta * 1.5)
        assert outage_probability(more_beta) >= base - 1e-12
        more_noise = dataclasses.replace(inp, z=inp.z + 0.5)
        assert outage_probability(more_noise) >= base - 1e-12
        stronger_signal = dataclasses.replace(inp, omega_k=inp.omega_k * 2.0)
        assert outage_probability(stronger_signal) <= base + 1e-12
        extra = dataclasses.replace(inp, interferers=inp.interferers + ((0.3, 2),))
        assert outage_probability(extra) >= base - 1e-12
        if inp.interferers:
            boosted = list(inp.interferers)
            boosted[0] = (boosted[0][0] * 2.0, boosted[0][1])
            assert (
                outage_probability(dataclasses.replace(inp, interferers=tuple(boosted)))
                >= base - 1e-12
            )


@settings(max_examples=200, deadline=None)
@given(
    omega_k=st.floats(0.05, 50.0),
    m_k=st.integers(1, 3),
    beta=st.floats(0.1, 10.0),
    z=st.floats(0.0, 2.0),
    omegas=st.lists(st.floats(0.01, 5.0), max_size=6),
)
def test_probability_bounds_property(omega_k, m_k, beta, z, omegas):
    inp = LinkOutageInput(
        omega_k=omega_k,
        m_k=m_k,
        interferers=tuple((o, 1 + i % 3) for i, o in enumerate(omegas)),
        beta=beta,
        z=z,
    )
    assert 0.0 <= outage_probability(inp) <= 1.0


def test_batch_matches_scalar():
    rng = np.random.default_rng(6)
    inputs = [_random_input(rng) for _ in range(250)]
    width = max((len(i.interferers) for i in inputs), default=0)
    n = len(inputs)
    omega_i = np.ones((n, max(width, 1)))
    m_i = np.ones((n, max(width, 1)))
    active = np.zeros((n, max(width, 1)), dtype=bool)
    for row, inp in enumerate(inputs):
        for col, (omega, m) in enumerate(inp.interferers):
            omega_i[row, col] = omega
            m_i[row, col] = m
            active[row, col] = True
    for beta in (0.5, 1.0, 2.0):
        for z in (0.0, 0.1, 1.0):
            batch = outage_probability_batch(
                np.array([i.omega_k for i in inputs]),
                np.array([i.m_k for i in inputs]),
                omega_i,
                m_i,
                beta,
                z,
                active=active,
            )
            import dataclasses

            scalars = [
                outage_probability(dataclasses.replace(i, beta=beta, z=z)) for i in inputs
            ]
            np.testing.assert_allclose(batch, scalars, rtol=0, atol=1e-12)


def test_batch_rejects_large_desired_m():
    with pytest.raises(ValueError):
        outage_probability_batch(np.array([1.0]), np.array([4]), np.ones((1, 1)), np.ones((1, 1)), 1.0, 0.0)


def test_batch_no_interferers():
    eps = outage_probability_batch(np.array([1.0]), np.array([1]), np.zeros((1, 0)), np.zeros((1, 0)), 1.0, 1.0)
    assert eps[0] == pytest.approx(1 - math.exp(-1), abs=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(omega_k=0.0, m_k=1),
        dict(omega_k=1.0, m_k=0),
        dict(omega_k=1.0, m_k=1.5),
        dict(omega_k=1.0, m_k=1, beta=0.0),
        dict(omega_k=1.0, m_k=1, z=-0.1),
        dict(omega_k=1.0, m_k=1, interferers=((0.0, 1),)),
        dict(omega_k=1.0, m_k=1, interferers=((1.0, 0),)),
    ],
)
def test_input_validation(kwargs):
    with pytest.raises(ValueError):
        LinkOutageInput(**kwargs)


def test_numerics_guard_is_exported():
    assert issubclass(OutageNumericsError, ArithmeticError)
