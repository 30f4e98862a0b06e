"""Conditional outage probability of a link given a fixed interferer set.

The desired signal and each interferer fade independently with unit-mean
gamma-distributed power gains (integer Nakagami parameters). Conditioned on
the normalized powers, the probability that the SINR falls below the
threshold has a closed form; :func:`monte_carlo_outage` provides an
independent sampling estimate used to validate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ROUNDOFF_TOL = 1e-12


class OutageNumericsError(ArithmeticError):
    """The closed form strayed outside [0, 1] by more than round-off."""


@dataclass(frozen=True)
class LinkOutageInput:
    """One link: desired power/fading, interferer powers/fadings, threshold
    ``beta`` and inverse reference SNR ``z`` (0 = noiseless)."""

    omega_k: float
    m_k: int
    interferers: tuple[tuple[float, int], ...] = ()
    beta: float = 1.0
    z: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "interferers", tuple((float(o), int(m)) for o, m in self.interferers))
        if not self.omega_k > 0:
            raise ValueError("omega_k must be > 0")
        if int(self.m_k) != self.m_k or self.m_k < 1:
            raise ValueError("m_k must be an integer >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.z < 0:
            raise ValueError("z must be >= 0")
        for omega_i, m_i in self.interferers:
            if not omega_i > 0:
                raise ValueError("interferer powers must be > 0")
            if m_i < 1:
                raise ValueError("interferer fading parameters must be integers >= 1")


def _g_series(omega_i: float, m_i: int, beta1: float, t_max: int) -> list[float]:
    """Series expansion coefficients contributed by one interferer.

    Term 0 is psi**m; term l is binom(l+m-1, l) * (omega/m)**l * psi**(m+l)
    with psi = 1 / (1 + beta1 * omega / m).
    """
    ratio = omega_i / m_i
    psi = 1.0 / (beta1 * ratio + 1.0)
    out = [psi**m_i]
    for ell in range(1, t_max + 1):
        out.append(math.comb(ell + m_i - 1, ell) * ratio**ell * psi ** (m_i + ell))
    return out


def _h_coefficients(interferers: Sequence[tuple[float, int]], beta1: float, t_max: int) -> list[float]:
    """H_0..H_t_max by incremental convolution over the interferer set."""
    h = [0.0] * (t_max + 1)
    h[0] = 1.0
    for omega_i, m_i in interferers:
        g = _g_series(omega_i, m_i, beta1, t_max)
        h = [sum(h[u - ell] * g[ell] for ell in range(u + 1)) for u in range(t_max + 1)]
    return h


def coefficient_H(t: int, interferers: Sequence[tuple[float, int]], beta1: float) -> float:
    """Total weight of all ways the interferers' series terms multiply out to
    order ``t`` (sum over multi-indices with entries summing to t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return _h_coefficients(interferers, beta1, t)[t]


def outage_probability(inp: LinkOutageInput) -> float:
    """Closed-form conditional outage probability of one link.

    The double sum is evaluated in the algebraically simplified form
    sum_s beta1**s sum_t z**(s-t) H_t / (s-t)! so that the noiseless limit
    z=0 needs no special casing (0**0 = 1 keeps the t=s term). The raw value
    must land within ROUNDOFF_TOL of [0, 1]; anything further out indicates a
    transcription bug and raises :class:`OutageNumericsError`.
    """
    beta1 = inp.beta * inp.m_k / inp.omega_k
    h = _h_coefficients(inp.interferers, beta1, inp.m_k - 1)
    z = inp.z
    total = 0.0
    for s in range(inp.m_k):
        inner = 0.0
        for t in range(s + 1):
            inner += z ** (s - t) * h[t] / math.factorial(s - t)
        total += beta1**s * inner
    eps = 1.0 - math.exp(-beta1 * z) * total
    if not (-ROUNDOFF_TOL <= eps <= 1.0 + ROUNDOFF_TOL):
        raise OutageNumericsError(f"outage probability {eps!r} outside [0, 1] beyond round-off")
    return min(1.0, max(0.0, eps))


def outage_probability_batch(
    omega_k: np.ndarray,
    m_k: np.ndarray,
    omega_i: np.ndarray,
    m_i: np.ndarray,
    beta: float,
    z: float,
    active: np.ndarray | None = None,
) -> np.ndarray:
    """Vectorized closed form for many links sharing one (beta, z).

    ``omega_k``/``m_k`` have shape (n,), ``omega_i``/``m_i`` shape (n, J);
    ``active`` masks which of the J interferer slots count for each link.
    Desired-link fading parameters above 3 are not supported here (use the
    scalar routine); interferer parameters may be any integer >= 1.
    """
    omega_k = np.asarray(omega_k, dtype=float)
    m_k = np.asarray(m_k)
    if m_k.size and m_k.max() > 3:
        raise ValueError("batch path supports desired-link m <= 3")
    omega_i = np.atleast_2d(np.asarray(omega_i, dtype=float))
    m_i = np.atleast_2d(np.asarray(m_i, dtype=float))
    if active is None:
        act = np.ones(omega_i.shape)
    else:
        act = np.asarray(active, dtype=float)

    beta1 = beta * m_k / omega_k
    if omega_i.shape[1]:
        ratio = omega_i / m_i
        psi = 1.0 / (beta1[:, None] * ratio + 1.0)
        rp = ratio * psi
        log_g0 = act * (m_i * np.log(psi))
        a = act * (m_i * rp)
        b = act * (0.5 * m_i * (m_i + 1.0) * rp * rp)
        s_log = log_g0.sum(axis=1)
        s_a = a.sum(axis=1)
        s_a2 = (a * a).sum(axis=1)
        s_b = b.sum(axis=1)
    else:
        s_log = np.zeros(omega_k.shape)
        s_a = s_a2 = s_b = s_log
    return _combine_h_sums(beta1, m_k, z, s_log, s_a, s_a2, s_b)


def _combine_h_sums(beta1, m_k, z, s_log, s_a, s_a2, s_b) -> np.ndarray:
    """Assemble outage probabilities from per-link interferer sums.

    H_0 = exp(sum log G_0); H_1 and H_2 follow from the first- and
    second-order symmetric functions of the per-interferer series ratios.
    """
    h0 = np.exp(s_log)
    h1 = h0 * s_a
    h2 = h0 * (s_b + 0.5 * (s_a * s_a - s_a2))
    x = h0.copy()
    m2 = m_k >= 2
    if m2.any():
        x = np.where(m2, x + beta1 * (z * h0 + h1), x)
    m3 = m_k >= 3
    if m3.any():
        x = np.where(m3, x + beta1 * beta1 * (0.5 * z * z * h0 + z * h1 + h2), x)
    eps = 1.0 - np.exp(-beta1 * z) * x
    if eps.size and not ((eps > -ROUNDOFF_TOL) & (eps < 1.0 + ROUNDOFF_TOL)).all():
        bad = eps[(eps <= -ROUNDOFF_TOL) | (eps >= 1.0 + ROUNDOFF_TOL)]
        raise OutageNumericsError(f"outage probabilities outside [0, 1] beyond round-off: {bad[:5]}")
    return np.clip(eps, 0.0, 1.0)


def monte_carlo_outage(
    inp: LinkOutageInput,
    draws: int,
    rng: np.random.Generator,
    chunk: int = 1_000_000,
) -> tuple[float, float]:
    """Sampling estimate of the outage probability and its standard error.

    Every power gain is drawn as a unit-mean gamma variable with the link's
    fading parameter as shape; an outage is counted when the resulting SINR
    is at or below the threshold.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    count = 0
    remaining = draws
    while remaining > 0:
        n = min(remaining, chunk)
        desired = inp.omega_k * rng.gamma(inp.m_k, 1.0 / inp.m_k, size=n)
        denom = np.full(n, inp.z)
        for omega_i, m_i in inp.interferers:
            denom += omega_i * rng.gamma(m_i, 1.0 / m_i, size=n)
        count += int(np.count_nonzero(desired <= inp.beta * denom))
        remaining -= n
    estimate = count / draws
    stderr = math.sqrt(estimate * (1.0 - estimate) / draws)
    return estimate, stderr
