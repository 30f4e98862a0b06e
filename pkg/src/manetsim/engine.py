"""Four-layer Monte-Carlo engine.

Layer 1 draws a topology and its shadowing, layer 2 marks every mobile as a
potential relay or potential interferer, layer 3 draws the transmitting
interferer set of every time slot from that fixed pool (this is what makes
interference correlated across slots), and layer 4 realizes per-link outage
events and runs the routing protocols.

Outage probabilities are memoized per slot draw and evaluated in bulk. For
integer fading parameters up to 3 the closed form needs only three
interferer sums per link, so rows of links against a slot's interferer
indicator reduce to a few small matrix products, and the full route-eligible
matrix needed by the AODV request flood is assembled by multiplying cached
per-interferer factor matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelParams,
    ShadowingField,
    draw_shadowing,
    link_gain_matrix,
    nakagami_m,
    nakagami_matrix,
    normalized_power,
)
from .metrics import TopologyMetrics, topology_metrics
from .outage import ROUNDOFF_TOL, LinkOutageInput, OutageNumericsError, _combine_h_sums, outage_probability
from .protocols import ProtocolConfig, apply_guard_zone, run_trial
from .topology import Topology, distance_matrix, generate_topology


@dataclass(frozen=True, eq=False)
class RoleAssignment:
    """Relay/interferer marking of every mobile. The source and destination
    are neither: they carry traffic and never transmit interference."""

    is_relay: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.is_relay, dtype=bool)
        if flags.ndim != 1 or flags.shape[0] < 2:
            raise ValueError("is_relay must be a flat array over all nodes")
        if flags[0] or flags[-1]:
            raise ValueError("source and destination cannot be marked as relays")
        object.__setattr__(self, "is_relay", flags)

    @property
    def num_nodes(self) -> int:
        return self.is_relay.shape[0]

    @property
    def relay_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_relay)

    @property
    def interferer_pool(self) -> np.ndarray:
        """Mobiles that may transmit interference (non-relay mobiles)."""
        pool = ~self.is_relay
        pool[0] = False
        pool[-1] = False
        return np.flatnonzero(pool)

    @property
    def route_eligible_indices(self) -> np.ndarray:
        eligible = self.is_relay.copy()
        eligible[0] = True
        eligible[-1] = True
        return np.flatnonzero(eligible)

    def is_route_eligible(self, i: int) -> bool:
        return i == 0 or i == self.num_nodes - 1 or bool(self.is_relay[i])


def mark_roles(topology: Topology, mu: float, rng: np.random.Generator) -> RoleAssignment:
    """Mark each mobile independently as a potential relay with probability mu."""
    if not 0 <= mu <= 1:
        raise ValueError("mu must lie in [0, 1]")
    flags = np.zeros(topology.num_nodes, dtype=bool)
    if topology.num_mobiles:
        flags[1:-1] = rng.random(topology.num_mobiles) < mu
    return RoleAssignment(flags)


def draw_interferer_indicators(
    roles: RoleAssignment, p: float, num_slots: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-slot transmit indicators over the potential-interferer pool,
    shape (num_slots, pool size). Aloha access: independent across slots."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if num_slots < 1:
        raise ValueError("num_slots must be >= 1")
    return rng.random((num_slots, roles.interferer_pool.shape[0])) < p


def draw_interferer_sets(
    roles: RoleAssignment, p: float, num_slots: int, rng: np.random.Generator
) -> list[frozenset[int]]:
    """Per-slot transmitting interferer sets (node indices), all subsets of
    the one pool fixed by the marking."""
    ind = draw_interferer_indicators(roles, p, num_slots, rng)
    pool = roles.interferer_pool
    return [frozenset(int(i) for i in pool[row]) for row in ind]


def build_outage_matrix(
    topology: Topology,
    shadowing: ShadowingField,
    params: ChannelParams,
    roles: RoleAssignment,
    interferer_set,
    silenced=frozenset(),
) -> np.ndarray:
    """Outage probability for every ordered pair of route-eligible nodes.

    Reference implementation built on the scalar closed form; the engine's
    hot paths use the vectorized equivalent. Entries outside route-eligible
    pairs (and the diagonal) are NaN.
    """
    pool = set(int(i) for i in roles.interferer_pool)
    interferer_set = set(int(i) for i in interferer_set)
    if not interferer_set <= pool:
        raise ValueError("interferer_set must be a subset of the potential-interferer pool")
    active = sorted(interferer_set - set(int(i) for i in silenced))

    d = distance_matrix(topology)
    xi = shadowing.xi_db
    n = topology.num_nodes
    matrix = np.full((n, n), np.nan)
    eligible = roles.route_eligible_indices
    for j in eligible:
        interferers = tuple(
            (normalized_power("interferer", d[i, j], xi[i, j], params), nakagami_m(d[i, j], params.r_f))
            for i in active
        )
        for k in eligible:
            if k == j:
                continue
            inp = LinkOutageInput(
                omega_k=normalized_power("desired", d[k, j], xi[k, j], params),
                m_k=nakagami_m(d[k, j], params.r_f),
                interferers=interferers,
                beta=params.beta,
                z=params.z,
            )
            matrix[k, j] = outage_probability(inp)
    return matrix


def realize_outages(matrix: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli outage draw per entry; NaN entries never report an outage."""
    return rng.random(matrix.shape) < matrix


class LinkModel:
    """Per-(topology, shadowing) link quantities shared by all markings."""

    def __init__(self, topology: Topology, shadowing: ShadowingField, params: ChannelParams):
        self.topology = topology
        self.params = params
        self.z = params.z
        self.dist = distance_matrix(topology)
        self.gain = link_gain_matrix(topology, shadowing, params)  # NaN diagonal
        self.m = nakagami_matrix(self.dist, params.r_f)
        self.m_float = self.m.astype(float)
        # Composite threshold of the desired link and the per-interferer
        # power-to-fading ratio; both symmetric, NaN on the diagonal.
        self.beta1 = params.beta * self.m_float / self.gain
        self.int_ratio = self.gain / (params.g_over_h * self.m_float)
        self.rdist = self.dist[topology.dest_index]


class _PairBlock:
    """Outage evaluator for a fixed list of ordered pairs.

    Holds the per-pair, per-pool-member feature rows whose dot products with
    a transmit-indicator vector give the interferer sums of the closed form;
    one block is reused across every slot and trial of a marking.
    """

    __slots__ = ("z", "b1", "mdes", "f0", "fa", "fa2", "fb")

    def __init__(self, z, b1, mdes, f0, fa, fa2, fb):
        self.z = z
        self.b1 = b1
        self.mdes = mdes
        self.f0 = f0
        self.fa = fa
        self.fa2 = fa2
        self.fb = fb

    def eps(self, s_vec: np.ndarray) -> np.ndarray:
        if self.f0 is None:
            zero = np.zeros(self.b1.shape[0])
            return _combine_h_sums(self.b1, self.mdes, self.z, zero, zero, zero, zero)
        return _combine_h_sums(
            self.b1, self.mdes, self.z, self.f0 @ s_vec, self.fa @ s_vec, self.fa2 @ s_vec, self.fb @ s_vec
        )

    def eps_single(self, s_vec: np.ndarray) -> float:
        """Scalar fast path for single-pair blocks."""
        b1 = float(self.b1[0])
        mdes = int(self.mdes[0])
        z = self.z
        if self.f0 is None:
            h0, sa, sa2, sb = 1.0, 0.0, 0.0, 0.0
        else:
            h0 = math.exp(float(self.f0[0] @ s_vec))
            sa = float(self.fa[0] @ s_vec)
            sa2 = float(self.fa2[0] @ s_vec)
            sb = float(self.fb[0] @ s_vec)
        x = h0
        if mdes >= 2:
            h1 = h0 * sa
            x += b1 * (z * h0 + h1)
            if mdes >= 3:
                h2 = h0 * (sb + 0.5 * (sa * sa - sa2))
                x += b1 * b1 * (0.5 * z * z * h0 + z * h1 + h2)
        eps = 1.0 - math.exp(-b1 * z) * x
        if not (-ROUNDOFF_TOL <= eps <= 1.0 + ROUNDOFF_TOL):
            raise OutageNumericsError(f"outage probability {eps!r} outside [0, 1] beyond round-off")
        return min(1.0, max(0.0, eps))


class MarkingScope:
    """Caches tied to one (topology, marking, protocol): link eligibility,
    per-origin candidate lists, guard-zone neighborhoods and the feature
    blocks behind the bulk outage evaluations."""

    def __init__(self, link_model: LinkModel, roles: RoleAssignment, cfg: ProtocolConfig):
        self.lm = link_model
        self.roles = roles
        self.cfg = cfg
        self.pool = roles.interferer_pool
        self.eligible = roles.route_eligible_indices
        self.pool_position = np.full(roles.num_nodes, -1, dtype=np.int64)
        self.pool_position[self.pool] = np.arange(self.pool.shape[0])
        # Receiver-major views over the pool (symmetric matrices, so rows
        # indexed by receiver are valid).
        if self.pool.shape[0]:
            self._ratio_pool = link_model.int_ratio[:, self.pool]
            self._m_pool = link_model.m_float[:, self.pool]
        else:
            self._ratio_pool = None
            self._m_pool = None
        dest = link_model.topology.dest_index
        relays = roles.relay_indices
        self._termini = np.sort(np.append(relays, dest))
        self._cand_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._guard_nodes_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._origin_blocks: dict[int, _PairBlock] = {}
        self._link_blocks: dict[tuple[int, int], _PairBlock] = {}
        self._guard_blocks: dict[int, _PairBlock] = {}
        self._full_state = None

    # ----- eligibility ---------------------------------------------------

    def candidates_from(self, origin: int) -> tuple[np.ndarray, np.ndarray]:
        """Eligible termini from ``origin`` and their remaining distances to
        the destination (strict progress; range-limited for greedy
        forwarding)."""
        hit = self._cand_cache.get(origin)
        if hit is not None:
            return hit
        lm = self.lm
        base = self._termini
        mask = (lm.rdist[base] < lm.rdist[origin]) & (base != origin)
        if self.cfg.protocol == "gf":
            mask &= lm.dist[origin, base] <= self.cfg.r_t
        cands = base[mask]
        out = (cands, lm.rdist[cands])
        self._cand_cache[origin] = out
        return out

    def guard_candidates(self, sender: int) -> tuple[np.ndarray, np.ndarray]:
        """Potential interferers inside the guard zone of ``sender``:
        (node indices, pool positions)."""
        hit = self._guard_nodes_cache.get(sender)
        if hit is not None:
            return hit
        near = self.pool[self.lm.dist[sender, self.pool] <= self.cfg.r_g]
        out = (near, self.pool_position[near])
        self._guard_nodes_cache[sender] = out
        return out

    # ----- pair blocks ----------------------------------------------------

    def pair_block(self, k_arr: np.ndarray, j_arr: np.ndarray, exclude_pos: np.ndarray | None = None) -> _PairBlock:
        """Build the feature block of arbitrary ordered pairs.

        ``exclude_pos`` gives, per pair, the pool position of the receiver
        itself (or -1); a receiver never contributes to its own interference.
        """
        lm = self.lm
        b1 = lm.beta1[k_arr, j_arr]
        mdes = lm.m[k_arr, j_arr]
        if self._ratio_pool is None:
            return _PairBlock(lm.z, b1, mdes, None, None, None, None)
        ratio = self._ratio_pool[j_arr]  # fancy indexing: already a copy
        if exclude_pos is not None:
            rows = np.flatnonzero(exclude_pos >= 0)
            if rows.shape[0]:
                ratio[rows, exclude_pos[rows]] = 0.0
        mi = self._m_pool[j_arr]
        psi = 1.0 / (b1[:, None] * ratio + 1.0)
        rp = ratio * psi
        f0 = mi * np.log(psi)
        fa = mi * rp
        fb = (0.5 * mi * (mi + 1.0)) * rp * rp
        return _PairBlock(lm.z, b1, mdes, f0, fa, fa * fa, fb)

    def eps_pairs(self, k_arr, j_arr, s_vec: np.ndarray, exclude_pos: np.ndarray | None = None) -> np.ndarray:
        """Closed-form outage probabilities of ordered pairs under one
        interferer indicator vector (float 0/1 over the pool)."""
        k_arr = np.asarray(k_arr, dtype=np.int64)
        j_arr = np.asarray(j_arr, dtype=np.int64)
        return self.pair_block(k_arr, j_arr, exclude_pos).eps(s_vec)

    def origin_block(self, origin: int) -> _PairBlock:
        """Feature block over the forward and reverse links between
        ``origin`` and its candidates (forward rows first)."""
        block = self._origin_blocks.get(origin)
        if block is None:
            cands, _ = self.candidates_from(origin)
            rep = np.full(cands.shape[0], origin, dtype=np.int64)
            block = self.pair_block(np.concatenate([rep, cands]), np.concatenate([cands, rep]))
            self._origin_blocks[origin] = block
        return block

    def link_block(self, k: int, j: int) -> _PairBlock:
        key = (k, j)
        block = self._link_blocks.get(key)
        if block is None:
            block = self.pair_block(np.array([k]), np.array([j]))
            self._link_blocks[key] = block
        return block

    def guard_block(self, sender: int) -> _PairBlock:
        block = self._guard_blocks.get(sender)
        if block is None:
            gnodes, gpos = self.guard_candidates(sender)
            rep = np.full(gnodes.shape[0], sender, dtype=np.int64)
            block = self.pair_block(rep, gnodes, exclude_pos=gpos)
            self._guard_blocks[sender] = block
        return block

    # ----- full route-eligible matrix --------------------------------------

    def _full_matrix_state(self):
        """Per-interferer factor matrices for the full route-eligible grid.

        H_0 of every pair is the product over transmitting interferers of
        psi**m; caching psi**m as one (pool, n, n) stack turns each slot's
        H_0 matrix into a handful of elementwise multiplications. Pairs with
        a desired-link fading parameter above 1 additionally need first- and
        second-order sums, which are kept for just those pairs.
        """
        if self._full_state is not None:
            return self._full_state
        lm = self.lm
        elig = self.eligible
        b1 = lm.beta1[np.ix_(elig, elig)]
        mdes = lm.m[np.ix_(elig, elig)]
        damp = np.exp(-b1 * lm.z)
        if self._ratio_pool is None:
            self._full_state = (b1, mdes, damp, None)
            return self._full_state

        ratio = self._ratio_pool[elig]  # (n_e, pool), receiver-major
        mi = lm.m[np.ix_(elig, self.pool)]
        psi = 1.0 / (ratio.T[:, None, :] * b1[None, :, :] + 1.0)  # (pool, k, j)
        cond2 = (mi.T >= 2)[:, None, :]
        cond3 = (mi.T >= 3)[:, None, :]
        psi_pow = psi * np.where(cond2, psi, 1.0)
        psi_pow *= np.where(cond3, psi, 1.0)

        kk, jj = np.nonzero(mdes >= 2)
        if kk.shape[0]:
            hi_block = self.pair_block(elig[kk], elig[jj])
        else:
            hi_block = None
        self._full_state = (b1, mdes, damp, (psi_pow, kk, jj, hi_block))
        return self._full_state

    def full_eps_matrices(self, indicator_rows) -> list[np.ndarray]:
        """Outage matrices over route-eligible nodes, one per boolean
        indicator row (diagonal NaN)."""
        b1, mdes, damp, state = self._full_matrix_state()
        n_e = self.eligible.shape[0]
        z = self.lm.z
        out = []
        for s_bool in indicator_rows:
            if state is None:
                h0 = np.ones((n_e, n_e))
                x = h0
            else:
                psi_pow, kk, jj, hi_block = state
                x = np.ones((n_e, n_e))
                for i in np.flatnonzero(s_bool):
                    x *= psi_pow[i]
                if hi_block is not None:
                    s_f = s_bool.astype(float)
                    h0 = x[kk, jj]
                    sa = hi_block.fa @ s_f
                    h1 = h0 * sa
                    extra = hi_block.b1 * (z * h0 + h1)
                    m3 = hi_block.mdes >= 3
                    if m3.any():
                        h2 = h0 * (hi_block.fb @ s_f + 0.5 * (sa * sa - hi_block.fa2 @ s_f))
                        extra = np.where(
                            m3, extra + hi_block.b1**2 * (0.5 * z * z * h0 + z * h1 + h2), extra
                        )
                    x[kk, jj] += extra
            eps = 1.0 - damp * x
            np.fill_diagonal(eps, np.nan)
            finite = eps[~np.isnan(eps)]
            if finite.size and not ((finite > -ROUNDOFF_TOL) & (finite < 1.0 + ROUNDOFF_TOL)).all():
                raise OutageNumericsError("full outage matrix strayed outside [0, 1] beyond round-off")
            out.append(np.clip(eps, 0.0, 1.0))
        return out


class SlotScope:
    """One layer-3 draw: transmit indicators for every slot plus memoized
    outage evaluations shared by the layer-4 trials."""

    def __init__(self, marking: MarkingScope, indicators: np.ndarray):
        self.marking = marking
        self.indicators = np.asarray(indicators, dtype=bool)
        self._ind_f = self.indicators.astype(float)
        self._full: dict[int, np.ndarray] = {}
        self._mp_rows: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        self._guard: dict[tuple[int, int], np.ndarray] = {}
        self._single: dict[tuple, float] = {}

    @property
    def num_slots(self) -> int:
        return self.indicators.shape[0]

    def interferer_sets(self) -> list[frozenset[int]]:
        pool = self.marking.pool
        return [frozenset(int(i) for i in pool[row]) for row in self.indicators]

    def set_full(self, slot: int, matrix: np.ndarray) -> None:
        self._full[slot] = matrix

    def full_eps(self, slot: int) -> np.ndarray:
        hit = self._full.get(slot)
        if hit is None:
            hit = self.marking.full_eps_matrices([self.indicators[slot]])[0]
            self._full[slot] = hit
        return hit

    def mp_rows(self, slot: int, origin: int) -> tuple[np.ndarray, np.ndarray]:
        """Forward and reverse outage probabilities between ``origin`` and
        each of its candidates in one slot."""
        key = (slot, origin)
        hit = self._mp_rows.get(key)
        if hit is None:
            eps = self.marking.origin_block(origin).eps(self._ind_f[slot])
            half = eps.shape[0] // 2
            hit = (eps[:half], eps[half:])
            self._mp_rows[key] = hit
        return hit

    def guard_eps(self, slot: int, sender: int) -> np.ndarray:
        """Outage probability of the links from ``sender`` to each of its
        guard-zone neighbors in one slot."""
        key = (slot, sender)
        hit = self._guard.get(key)
        if hit is None:
            block = self.marking.guard_block(sender)
            hit = block.eps(self._ind_f[slot]) if block.b1.shape[0] else np.zeros(0)
            self._guard[key] = hit
        return hit

    def link_eps(self, slot: int, k: int, j: int, silenced: tuple[int, ...] = ()) -> float:
        """Outage probability of one directed link in one slot, with the
        given pool positions silenced."""
        key = (slot, k, j, silenced)
        hit = self._single.get(key)
        if hit is None:
            if silenced:
                s = self._ind_f[slot].copy()
                s[list(silenced)] = 0.0
            else:
                s = self._ind_f[slot]
            hit = self.marking.link_block(k, j).eps_single(s)
            self._single[key] = hit
        return hit


class TrialEnv:
    """What one routing trial sees: candidates, outage draws, guard zones."""

    def __init__(self, marking: MarkingScope, slots: SlotScope, cfg: ProtocolConfig):
        self.marking = marking
        self.slots = slots
        self.cfg = cfg
        topo = marking.lm.topology
        self.source = topo.source_index
        self.dest = topo.dest_index
        self.num_slots = slots.num_slots

    def remaining_distance(self, node: int) -> float:
        return float(self.marking.lm.rdist[node])

    def candidates_from(self, origin: int) -> tuple[np.ndarray, np.ndarray]:
        return self.marking.candidates_from(origin)

    def candidate_outage_draws(self, slot: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        eps = self.slots.full_eps(slot)
        return self.marking.eligible, rng.random(eps.shape) < eps

    def mp_candidate_draws(self, slot: int, origin: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        fwd_eps, rev_eps = self.slots.mp_rows(slot, origin)
        n = fwd_eps.shape[0]
        return rng.random(n) < fwd_eps, rng.random(n) < rev_eps

    def link_eps(self, slot: int, k: int, j: int, silenced: tuple[int, ...] = ()) -> float:
        return self.slots.link_eps(slot, k, j, silenced)

    def link_outage(self, slot: int, k: int, j: int, silenced, rng: np.random.Generator) -> bool:
        return rng.random() < self.slots.link_eps(slot, k, j, tuple(silenced))

    def guard_silenced(self, slot: int, sender: int, rng: np.random.Generator) -> frozenset[int]:
        """Pool positions silenced by one RTS/CTS message from ``sender``."""
        gnodes, gpos = self.marking.guard_candidates(sender)
        if gnodes.shape[0] == 0:
            return frozenset()
        eps = self.slots.guard_eps(slot, sender)
        draws = rng.random(eps.shape[0]) < eps
        silenced_nodes = apply_guard_zone(gnodes, self.marking.lm.dist[sender, gnodes], draws, self.cfg.r_g)
        return frozenset(int(self.marking.pool_position[i]) for i in silenced_nodes)


@dataclass(frozen=True)
class SimulationPoint:
    """Scenario parameters for one sweep point (everything but the protocol)."""

    M: int
    r_net: float = 1.0
    r_ex: float = 0.05
    dest_distance: float = 0.5
    mu: float = 0.4
    p: float = 0.3
    channel: ChannelParams = field(default_factory=ChannelParams)
    topologies: int = 200
    k1: int = 10
    k2: int = 10
    k3: int = 10
    max_hops: int = 30

    def __post_init__(self):
        for name in ("topologies", "k1", "k2", "k3", "max_hops"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.mu <= 1:
            raise ValueError("mu must lie in [0, 1]")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")

    @property
    def node_density(self) -> float:
        return (self.M + 1) / (math.pi * self.r_net**2)

    def num_slots(self, cfg: ProtocolConfig) -> int:
        return self.max_hops * cfg.B + 2


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def run_point(
    point: SimulationPoint,
    cfg: ProtocolConfig,
    seed: int,
    topo_indices=None,
    validate: bool = False,
) -> list[tuple[int, TopologyMetrics]]:
    """Run the four nested layers for one protocol at one sweep point.

    Every random stream is derived from (seed, topology index, layer tags)
    only, so results are independent of how topologies are distributed over
    workers and identical realizations are shared by all protocols.
    """
    if topo_indices is None:
        topo_indices = range(point.topologies)
    num_slots = point.num_slots(cfg)
    out = []
    for t in topo_indices:
        topo = generate_topology(point.M, point.r_net, point.r_ex, point.dest_distance, _rng(seed, t, 0))
        shadow = draw_shadowing(topo, point.channel.sigma_s_db, _rng(seed, t, 1))
        lm = LinkModel(topo, shadow, point.channel)
        outcomes = []
        for k1 in range(point.k1):
            roles = mark_roles(topo, point.mu, _rng(seed, t, 2, k1))
            scope = MarkingScope(lm, roles, cfg)
            slot_scopes = [
                SlotScope(scope, draw_interferer_indicators(roles, point.p, num_slots, _rng(seed, t, 3, k1, k2)))
                for k2 in range(point.k2)
            ]
            if cfg.protocol == "aodv":
                # The request flood needs the full slot-0 matrix of every
                # layer-3 draw; batching them shares the factor matrices.
                mats = scope.full_eps_matrices([ss.indicators[0] for ss in slot_scopes])
                for ss, mat in zip(slot_scopes, mats):
                    ss.set_full(0, mat)
            for k2, ss in enumerate(slot_scopes):
                env = TrialEnv(scope, ss, cfg)
                for k3 in range(point.k3):
                    outcomes.append(run_trial(cfg, env, _rng(seed, t, 4, k1, k2, k3), validate))
        out.append((t, topology_metrics(outcomes, cfg, point.node_density)))
    return out


def run_point_parallel(
    point: SimulationPoint,
    cfg: ProtocolConfig,
    seed: int,
    workers: int = 1,
    validate: bool = False,
) -> list[TopologyMetrics]:
    """Same as :func:`run_point` over all topologies, optionally fanned out
    to worker processes; the merge order is fixed by topology index so the
    result does not depend on the worker count."""
    indices = list(range(point.topologies))
    if workers <= 1:
        results = run_point(point, cfg, seed, indices, validate)
    else:
        from concurrent.futures import ProcessPoolExecutor

        n_chunks = min(len(indices), workers * 4)
        chunks = [c.tolist() for c in np.array_split(np.asarray(indices), n_chunks) if c.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_point, point, cfg, seed, chunk, validate) for chunk in chunks]
            results = [item for fut in futures for item in fut.result()]
    results.sort(key=lambda pair: pair[0])
    return [m for _, m in results]
