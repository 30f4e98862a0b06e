"""Path selection and message delivery for the three routing protocols.

AODV floods the network once (one outage draw per directed link), picks a
fewest-hops path over the surviving candidate links, verifies the reverse
acknowledgement traversal, then delivers over the fixed path. Greedy
forwarding picks, hop by hop, the in-range neighbor closest to the
destination; its path is purely geometric. Maximum progress runs an RTS/CTS
exchange per hop, keeps only two-way candidate links, silences potential
interferers inside the guard zones of both exchange endpoints, and delivers
hop by hop.

``run_trial`` drives one protocol over an environment object that exposes
the per-slot outage realizations (see ``engine.TrialEnv``); everything here
is deterministic given that environment and the trial RNG.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .metrics import path_delay

PROTOCOL_NAMES = ("aodv", "gf", "mp")

STAGE_NO_PATH = "no-path"
STAGE_DISCOVERY = "discovery"
STAGE_ACK = "acknowledgement"
STAGE_DELIVERY = "delivery"
STAGE_HORIZON = "horizon"


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol identity plus the delay/retry constants of a run.

    ``B`` bounds message-delivery attempts per link (discovery phases always
    get a single attempt). ``r_t`` only matters for greedy forwarding,
    ``r_g`` only for maximum progress. ``c`` flags whether discovery delays
    enter the end-to-end delay.
    """

    protocol: str
    B: int = 4
    r_t: float = 0.4
    r_g: float = 0.15
    T: float = 1.0
    T_e: float = 1.2
    T_d: float = 0.1

    def __post_init__(self):
        if self.protocol not in PROTOCOL_NAMES:
            raise ValueError(f"protocol must be one of {PROTOCOL_NAMES}, got {self.protocol!r}")
        if int(self.B) != self.B or self.B < 1:
            raise ValueError("B must be an integer >= 1")
        if self.protocol == "gf" and not self.r_t > 0:
            raise ValueError("r_t must be > 0 for greedy forwarding")
        if self.r_g < 0:
            raise ValueError("r_g must be >= 0")
        for name in ("T", "T_e", "T_d"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def c(self) -> int:
        """Discovery-delay flag: 0 for greedy forwarding, 1 otherwise."""
        return 0 if self.protocol == "gf" else 1


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one routing trial.

    ``attempts`` lists the delivery attempts per path link. ``request_ok`` /
    ``ack_ok`` / ``delivery_ok`` decompose where a trial failed; flags after
    the failing phase are None (undefined).
    """

    success: bool
    path: tuple[int, ...] | None
    attempts: tuple[int, ...] | None
    hops: int | None
    path_delay: float | None
    failure_stage: str | None
    request_ok: bool
    ack_ok: bool | None
    delivery_ok: bool | None


def _failure(stage: str, request_ok: bool, ack_ok: bool | None, delivery_ok: bool | None) -> TrialOutcome:
    return TrialOutcome(
        success=False,
        path=None,
        attempts=None,
        hops=None,
        path_delay=None,
        failure_stage=stage,
        request_ok=request_ok,
        ack_ok=ack_ok,
        delivery_ok=delivery_ok,
    )


def eligible_links(topology, roles, cfg: ProtocolConfig) -> set[tuple[int, int]]:
    """Directed links a protocol may ever use, before any outage draw.

    AODV admits every ordered pair of route-eligible nodes (source, relays,
    destination). The geographic protocols require strict progress toward
    the destination, links originating at the source or a relay and ending
    at a relay or the destination; greedy forwarding additionally caps the
    link length at its transmission range.
    """
    pos = topology.positions
    dest = topology.dest_index
    eligible_nodes = [i for i in range(topology.num_nodes) if roles.is_route_eligible(i)]
    links: set[tuple[int, int]] = set()
    if cfg.protocol == "aodv":
        for a in eligible_nodes:
            for b in eligible_nodes:
                if a != b:
                    links.add((a, b))
        return links
    rdist = np.hypot(pos[:, 0] - pos[dest, 0], pos[:, 1] - pos[dest, 1])
    for a in eligible_nodes:
        if a == dest:
            continue
        for b in eligible_nodes:
            if b == a or b == topology.source_index:
                continue
            if rdist[b] >= rdist[a]:
                continue
            if cfg.protocol == "gf":
                link = np.hypot(pos[a, 0] - pos[b, 0], pos[a, 1] - pos[b, 1])
                if link > cfg.r_t:
                    continue
            links.add((a, b))
    return links


def aodv_discover(adjacency: np.ndarray, source: int, dest: int, rng: np.random.Generator) -> list[int] | None:
    """Fewest-hops path over candidate links, uniform among ties.

    Breadth-first level expansion counts the shortest paths into every node;
    sampling predecessors proportionally to those counts picks one
    fewest-hops path uniformly at random. Returns None when the destination
    is unreachable.
    """
    n = adjacency.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    counts = np.zeros(n)
    counts[source] = 1.0
    frontier = np.array([source])
    levels = [frontier]
    while dist[dest] < 0:
        reach = adjacency[frontier]
        nxt_mask = reach.any(axis=0) & (dist < 0)
        if not nxt_mask.any():
            return None
        nxt = np.flatnonzero(nxt_mask)
        counts[nxt] = counts[frontier] @ adjacency[np.ix_(frontier, nxt)]
        dist[nxt] = dist[frontier[0]] + 1
        frontier = nxt
        levels.append(frontier)

    path = [dest]
    v = dest
    for level in range(dist[dest] - 1, -1, -1):
        nodes = levels[level]
        preds = nodes[adjacency[nodes, v]]
        if preds.shape[0] == 1:
            u = int(preds[0])
        else:
            w = counts[preds]
            u = int(preds[rng.choice(preds.shape[0], p=w / w.sum())])
        path.append(u)
        v = u
    path.reverse()
    return path


def bfs_hops(adjacency: np.ndarray, source: int, dest: int) -> int | None:
    """Plain queue-based BFS hop count; independent check for the fewest-hops
    search above."""
    n = adjacency.shape[0]
    dist = [-1] * n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == dest:
            return dist[u]
        for v in range(n):
            if adjacency[u, v] and dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return None


def aodv_acknowledge(path, outage_draw) -> bool:
    """Traverse the discovered path in reverse; ``outage_draw(k, j)`` draws
    the acknowledgement-slot outage of the directed link k -> j."""
    for u, v in reversed(list(zip(path[:-1], path[1:]))):
        if outage_draw(v, u):
            return False
    return True


def greedy_next_hop(candidates: np.ndarray, remaining: np.ndarray, rng: np.random.Generator) -> int | None:
    """Candidate terminus minimizing the remaining distance (uniform among
    exact ties); None when no candidate exists."""
    if candidates.shape[0] == 0:
        return None
    best = remaining.min()
    ties = np.flatnonzero(remaining == best)
    pick = ties[0] if ties.shape[0] == 1 else ties[rng.integers(ties.shape[0])]
    return int(candidates[pick])


def mp_next_link(
    candidates: np.ndarray,
    remaining: np.ndarray,
    forward_outage: np.ndarray,
    reverse_outage: np.ndarray,
    rng: np.random.Generator,
) -> tuple[int | None, bool]:
    """Select the two-way candidate link giving the most progress.

    Returns (terminus, any_forward). ``any_forward`` distinguishes a hop
    where no RTS got through (request failure) from one where RTS arrived
    somewhere but no CTS made it back (acknowledgement failure).
    """
    fwd_ok = ~forward_outage
    any_forward = bool(fwd_ok.any())
    two_way = fwd_ok & ~reverse_outage
    if not two_way.any():
        return None, any_forward
    idx = np.flatnonzero(two_way)
    vals = remaining[idx]
    best = vals.min()
    ties = idx[vals == best]
    pick = ties[0] if ties.shape[0] == 1 else ties[rng.integers(ties.shape[0])]
    return int(candidates[pick]), any_forward


def apply_guard_zone(
    interferer_indices: np.ndarray,
    distances: np.ndarray,
    outage_draws: np.ndarray,
    r_g: float,
) -> frozenset[int]:
    """Interferers silenced by one RTS/CTS message: those within the guard
    radius whose link from the message source is not in outage."""
    inside = distances <= r_g
    heard = ~np.asarray(outage_draws, dtype=bool)
    return frozenset(int(i) for i in np.asarray(interferer_indices)[inside & heard])


class SlotHorizonError(RuntimeError):
    """The trial ran out of time slots."""


def deliver_over_link(next_outage, B: int) -> int | None:
    """Attempt a link until success or ``B`` failures.

    ``next_outage()`` consumes the next slot and reports whether the attempt
    was in outage. Returns the number of attempts used on success, None on
    failure.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    for attempt in range(1, B + 1):
        if not next_outage():
            return attempt
    return None


def run_trial(cfg: ProtocolConfig, env, rng: np.random.Generator, validate: bool = False) -> TrialOutcome:
    """Run one end-to-end routing trial over a realized environment."""
    if cfg.protocol == "aodv":
        return _run_aodv(cfg, env, rng, validate)
    if cfg.protocol == "gf":
        return _run_gf(cfg, env, rng, validate)
    return _run_mp(cfg, env, rng, validate)


class _SlotCursor:
    """Hands out consecutive slot indices; raises once the horizon is hit."""

    __slots__ = ("slot", "limit")

    def __init__(self, start: int, limit: int):
        self.slot = start
        self.limit = limit

    def take(self) -> int:
        if self.slot >= self.limit:
            raise SlotHorizonError
        s = self.slot
        self.slot += 1
        return s


def _deliver(cfg, env, rng, u, v, cursor: _SlotCursor, silenced, validate) -> int | None:
    def next_outage() -> bool:
        s = cursor.take()
        if validate and silenced:
            base = env.link_eps(s, u, v, ())
            cut = env.link_eps(s, u, v, silenced)
            if cut > base + 1e-12:
                raise AssertionError("silencing increased an outage probability")
        return env.link_outage(s, u, v, silenced, rng)

    return deliver_over_link(next_outage, cfg.B)


def _success(cfg, path, attempts) -> TrialOutcome:
    return TrialOutcome(
        success=True,
        path=tuple(path),
        attempts=tuple(attempts),
        hops=len(path) - 1,
        path_delay=path_delay(attempts, cfg.T, cfg.T_e),
        failure_stage=None,
        request_ok=True,
        ack_ok=True,
        delivery_ok=True,
    )


def _run_aodv(cfg, env, rng, validate) -> TrialOutcome:
    nodes, outage = env.candidate_outage_draws(0, rng)
    adjacency = ~outage
    np.fill_diagonal(adjacency, False)
    src = int(np.searchsorted(nodes, env.source))
    dst = int(np.searchsorted(nodes, env.dest))
    compact = aodv_discover(adjacency, src, dst, rng)
    if compact is None:
        return _failure(STAGE_NO_PATH, request_ok=False, ack_ok=None, delivery_ok=None)
    if validate:
        oracle = bfs_hops(adjacency, src, dst)
        if oracle != len(compact) - 1:
            raise AssertionError(f"fewest-hops search returned {len(compact) - 1} hops, BFS says {oracle}")
    path = [int(nodes[c]) for c in compact]

    if not aodv_acknowledge(path, lambda k, j: env.link_outage(1, k, j, (), rng)):
        return _failure(STAGE_ACK, request_ok=True, ack_ok=False, delivery_ok=None)

    cursor = _SlotCursor(2, env.num_slots)
    attempts = []
    for u, v in zip(path[:-1], path[1:]):
        try:
            n_l = _deliver(cfg, env, rng, u, v, cursor, (), validate)
        except SlotHorizonError:
            return _failure(STAGE_HORIZON, request_ok=True, ack_ok=True, delivery_ok=False)
        if n_l is None:
            return _failure(STAGE_DELIVERY, request_ok=True, ack_ok=True, delivery_ok=False)
        attempts.append(n_l)
    return _success(cfg, path, attempts)


def _run_gf(cfg, env, rng, validate) -> TrialOutcome:
    # The greedy path is a pure function of the geometry: build it first.
    path = [env.source]
    current = env.source
    while current != env.dest:
        candidates, remaining = env.candidates_from(current)
        nxt = greedy_next_hop(candidates, remaining, rng)
        if nxt is None:
            return _failure(STAGE_NO_PATH, request_ok=False, ack_ok=None, delivery_ok=None)
        if validate and env.remaining_distance(nxt) >= env.remaining_distance(current):
            raise AssertionError("greedy hop did not reduce the remaining distance")
        path.append(nxt)
        current = nxt

    cursor = _SlotCursor(0, env.num_slots)
    attempts = []
    for u, v in zip(path[:-1], path[1:]):
        try:
            n_l = _deliver(cfg, env, rng, u, v, cursor, (), validate)
        except SlotHorizonError:
            return _failure(STAGE_HORIZON, request_ok=True, ack_ok=True, delivery_ok=False)
        if n_l is None:
            return _failure(STAGE_DELIVERY, request_ok=True, ack_ok=True, delivery_ok=False)
        attempts.append(n_l)
    return _success(cfg, path, attempts)


def _run_mp(cfg, env, rng, validate) -> TrialOutcome:
    path = [env.source]
    attempts: list[int] = []
    current = env.source
    cursor = _SlotCursor(0, env.num_slots)
    while current != env.dest:
        candidates, remaining = env.candidates_from(current)
        if candidates.shape[0] == 0:
            return _failure(STAGE_NO_PATH, request_ok=False, ack_ok=None, delivery_ok=None)
        try:
            slot = cursor.take()
        except SlotHorizonError:
            return _failure(STAGE_HORIZON, request_ok=False, ack_ok=None, delivery_ok=None)
        fwd_out, rev_out = env.mp_candidate_draws(slot, current, rng)
        relay, any_forward = mp_next_link(candidates, remaining, fwd_out, rev_out, rng)
        if relay is None:
            if any_forward:
                return _failure(STAGE_ACK, request_ok=True, ack_ok=False, delivery_ok=None)
            return _failure(STAGE_DISCOVERY, request_ok=False, ack_ok=None, delivery_ok=None)
        if validate and env.remaining_distance(relay) >= env.remaining_distance(current):
            raise AssertionError("maximum-progress hop did not reduce the remaining distance")

        # Both the RTS (from the current node) and the CTS (from the chosen
        # relay) establish guard zones for this hop's delivery.
        silenced = env.guard_silenced(slot, current, rng) | env.guard_silenced(slot, relay, rng)
        silenced_key = tuple(sorted(silenced))
        try:
            n_l = _deliver(cfg, env, rng, current, relay, cursor, silenced_key, validate)
        except SlotHorizonError:
            return _failure(STAGE_HORIZON, request_ok=True, ack_ok=True, delivery_ok=False)
        if n_l is None:
            return _failure(STAGE_DELIVERY, request_ok=True, ack_ok=True, delivery_ok=False)
        attempts.append(n_l)
        path.append(relay)
        current = relay
    return _success(cfg, path, attempts)
