"""Performance bookkeeping: link/path delays, per-topology measures and
topology-level averages."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


def link_delay(n_l: int, T: float, T_e: float) -> float:
    """Delay of one link delivered after ``n_l`` attempts: n_l*T + (n_l-1)*T_e."""
    if n_l < 1:
        raise ValueError("n_l must be >= 1")
    return n_l * T + (n_l - 1) * T_e


def path_delay(attempts: Sequence[int], T: float, T_e: float) -> float:
    """Message-delivery delay of a path: sum of its link delays."""
    if not attempts:
        raise ValueError("path must contain at least one link")
    return sum(link_delay(n, T, T_e) for n in attempts)


def densities(node_density: float, mu: float, p: float) -> tuple[float, float]:
    """Relay density and contention density for homogeneous mu and p."""
    if not 0 <= mu <= 1:
        raise ValueError("mu must lie in [0, 1]")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return node_density * mu, node_density * p * (1.0 - mu)


@dataclass(frozen=True)
class TopologyMetrics:
    """Per-topology tallies over K trials.

    ``mean_hops``/``mean_delay`` condition on success and are None when every
    trial failed; the phase reliabilities condition on the preceding phase
    and are None when their denominator is empty.
    """

    trials: int
    failures: int
    reliability: float
    mean_hops: float | None
    mean_delay: float | None
    ase: float
    request_reliability: float
    ack_reliability: float | None
    delivery_reliability: float | None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.failures + round(self.reliability * self.trials) == self.trials:
            raise ValueError("reliability inconsistent with failure count")


def topology_metrics(outcomes: Sequence, protocol_cfg, node_density: float) -> TopologyMetrics:
    """Aggregate the trial outcomes of one topology.

    The conditional delay adds the discovery term 2*c*h*T_d per success; the
    area spectral efficiency divides by the full trial count (failed trials
    included) so unreliable protocols are penalized.
    """
    k = len(outcomes)
    if k < 1:
        raise ValueError("need at least one trial outcome")
    c = protocol_cfg.c
    t_d = protocol_cfg.T_d

    failures = 0
    n_request = 0
    n_req_ack = 0
    n_success = 0
    hop_sum = 0
    delay_sum = 0.0
    inv_delay_sum = 0.0
    for o in outcomes:
        if not o.success:
            failures += 1
        if o.request_ok:
            n_request += 1
            if o.ack_ok:
                n_req_ack += 1
        if o.success:
            n_success += 1
            total = o.path_delay + 2.0 * c * o.hops * t_d
            hop_sum += o.hops
            delay_sum += total
            inv_delay_sum += 1.0 / total

    reliability = 1.0 - failures / k
    mean_hops = hop_sum / n_success if n_success else None
    mean_delay = delay_sum / n_success if n_success else None
    ase = node_density / k * inv_delay_sum
    return TopologyMetrics(
        trials=k,
        failures=failures,
        reliability=reliability,
        mean_hops=mean_hops,
        mean_delay=mean_delay,
        ase=ase,
        request_reliability=n_request / k,
        ack_reliability=n_req_ack / n_request if n_request else None,
        delivery_reliability=n_success / n_req_ack if n_req_ack else None,
    )


@dataclass(frozen=True)
class AveragedMetrics:
    """Unweighted means over topologies; conditional quantities skip the
    topologies where they are undefined."""

    topologies: int
    reliability: float
    reliability_stderr: float
    ase: float
    ase_stderr: float
    mean_hops: float | None
    mean_delay: float | None
    request_reliability: float
    ack_reliability: float | None
    delivery_reliability: float | None


def _mean_defined(values: Iterable[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def _mean_stderr(vals: Sequence[float]) -> tuple[float, float]:
    n = len(vals)
    mean = sum(vals) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


def topological_averages(per_topology: Sequence[TopologyMetrics]) -> AveragedMetrics:
    if not per_topology:
        raise ValueError("need at least one topology")
    rel, rel_se = _mean_stderr([m.reliability for m in per_topology])
    ase, ase_se = _mean_stderr([m.ase for m in per_topology])
    return AveragedMetrics(
        topologies=len(per_topology),
        reliability=rel,
        reliability_stderr=rel_se,
        ase=ase,
        ase_stderr=ase_se,
        mean_hops=_mean_defined(m.mean_hops for m in per_topology),
        mean_delay=_mean_defined(m.mean_delay for m in per_topology),
        request_reliability=sum(m.request_reliability for m in per_topology) / len(per_topology),
        ack_reliability=_mean_defined(m.ack_reliability for m in per_topology),
        delivery_reliability=_mean_defined(m.delivery_reliability for m in per_topology),
    )
