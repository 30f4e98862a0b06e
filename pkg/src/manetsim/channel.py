"""Propagation model: power-law path loss, lognormal shadowing and
distance-dependent Nakagami fading severity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .topology import Topology, distance_matrix


@dataclass(frozen=True)
class ChannelParams:
    """Link-budget parameters shared by every link in the network.

    ``gamma`` (reference SNR at unit distance) and ``beta`` (SINR threshold)
    are linear, not dB. ``sigma_s_db`` stays in dB because shadowing enters a
    link gain as 10**(xi/10). ``g_over_h`` is the despreading factor applied
    to interference power only.
    """

    alpha: float = 3.5
    sigma_s_db: float = 8.0
    r_f: float = 0.2
    g_over_h: float = 96.0
    gamma: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha < 2:
            raise ValueError("alpha must be >= 2")
        if self.g_over_h < 1:
            raise ValueError("g_over_h must be >= 1")
        if self.sigma_s_db < 0:
            raise ValueError("sigma_s_db must be >= 0")
        if self.r_f < 0:
            raise ValueError("r_f must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")

    @property
    def z(self) -> float:
        """Inverse reference SNR; 0 in the noiseless limit (gamma = inf)."""
        return 0.0 if math.isinf(self.gamma) else 1.0 / self.gamma


@dataclass(frozen=True, eq=False)
class ShadowingField:
    """Per-link shadowing factors in dB, symmetric and fixed for the
    lifetime of one topology (both traversal directions of a link see the
    same value)."""

    xi_db: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi_db, dtype=float)
        if xi.ndim != 2 or xi.shape[0] != xi.shape[1]:
            raise ValueError("xi_db must be a square matrix")
        object.__setattr__(self, "xi_db", xi)

    @property
    def num_nodes(self) -> int:
        return self.xi_db.shape[0]


def draw_shadowing(topology: Topology, sigma_s_db: float, rng: np.random.Generator) -> ShadowingField:
    """Draw one symmetric shadowing realization for a topology.

    Entries are i.i.d. zero-mean Gaussians with standard deviation
    ``sigma_s_db``; the field is all-zero when ``sigma_s_db`` is 0.
    """
    if sigma_s_db < 0:
        raise ValueError("sigma_s_db must be >= 0")
    n = topology.num_nodes
    xi = np.zeros((n, n))
    if sigma_s_db > 0:
        iu = np.triu_indices(n, k=1)
        vals = rng.normal(0.0, sigma_s_db, size=iu[0].shape[0])
        xi[iu] = vals
        xi.T[iu] = vals
    return ShadowingField(xi)


def nakagami_m(d: float, r_f: float) -> int:
    """Fading severity of a link of length ``d``: line-of-sight links fade
    less. m=3 up to r_f/2, m=2 up to r_f, m=1 (Rayleigh) beyond."""
    if d <= 0:
        raise ValueError("d must be > 0")
    if d <= r_f / 2.0:
        return 3
    if d <= r_f:
        return 2
    return 1


def normalized_power(kind: str, d: float, xi_db: float, params: ChannelParams) -> float:
    """Normalized received power of a transmitter at distance ``d``.

    Desired transmitters see the full path gain; interferers are suppressed
    by the despreading factor. Equal transmit powers are assumed throughout.
    """
    if d <= 0:
        raise ValueError("d must be > 0")
    gain = 10.0 ** (xi_db / 10.0) * d ** (-params.alpha)
    if kind == "desired":
        return gain
    if kind == "interferer":
        return gain / params.g_over_h
    raise ValueError(f"kind must be 'desired' or 'interferer', got {kind!r}")


def link_gain_matrix(topology: Topology, shadowing: ShadowingField, params: ChannelParams) -> np.ndarray:
    """Shadowed path gain 10**(xi/10) * d**(-alpha) for every ordered pair.

    The diagonal is NaN (a node has no link to itself). Interferer powers are
    this matrix divided by ``g_over_h``.
    """
    d = distance_matrix(topology)
    np.fill_diagonal(d, np.nan)
    return 10.0 ** (shadowing.xi_db / 10.0) * d ** (-params.alpha)


def nakagami_matrix(dist: np.ndarray, r_f: float) -> np.ndarray:
    """Integer fading parameter for every ordered pair (diagonal set to 1)."""
    m = np.ones(dist.shape, dtype=np.int64)
    if r_f > 0:
        m[dist <= r_f] = 2
        m[dist <= r_f / 2.0] = 3
    np.fill_diagonal(m, 1)
    return m
