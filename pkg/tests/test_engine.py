import math

import numpy as np
import pytest

from manetsim.channel import ChannelParams, draw_shadowing, nakagami_m, normalized_power
from manetsim.engine import (
    LinkModel,
    MarkingScope,
    RoleAssignment,
    SimulationPoint,
    SlotScope,
    TrialEnv,
    build_outage_matrix,
    draw_interferer_indicators,
    draw_interferer_sets,
    mark_roles,
    realize_outages,
    run_point,
    run_point_parallel,
)
from manetsim.outage import LinkOutageInput, outage_probability
from manetsim.protocols import ProtocolConfig
from manetsim.topology import Topology, distance_matrix, generate_topology


def make_roles(num_nodes, relay_indices):
    flags = np.zeros(num_nodes, dtype=bool)
    flags[list(relay_indices)] = True
    return RoleAssignment(flags)


def test_role_assignment_rejects_endpoint_relays():
    with pytest.raises(ValueError):
        make_roles(5, [0])
    with pytest.raises(ValueError):
        make_roles(5, [4])


def test_mark_roles_extremes():
    topo = generate_topology(30, 1.0, 0.05, 0.5, np.random.default_rng(0))
    all_relays = mark_roles(topo, 1.0, np.random.default_rng(1))
    assert all_relays.relay_indices.shape[0] == 30
    assert all_relays.interferer_pool.shape[0] == 0
    none = mark_roles(topo, 0.0, np.random.default_rng(1))
    assert none.relay_indices.shape[0] == 0
    assert none.interferer_pool.shape[0] == 30
    with pytest.raises(ValueError):
        mark_roles(topo, 1.5, np.random.default_rng(1))


def test_mark_roles_mean_count():
    topo = generate_topology(200, 1.0, 0.05, 0.5, np.random.default_rng(2))
    rng = np.random.default_rng(3)
    n = 1000
    counts = [mark_roles(topo, 0.4, rng).relay_indices.shape[0] for _ in range(n)]
    mean = sum(counts) / n
    sigma = math.sqrt(200 * 0.4 * 0.6 / n)
    assert abs(mean - 80.0) <= 3 * sigma


def test_interferer_sets_extremes_and_pool():
    topo = generate_topology(40, 1.0, 0.05, 0.5, np.random.default_rng(4))
    roles = mark_roles(topo, 0.4, np.random.default_rng(5))
    pool = set(int(i) for i in roles.interferer_pool)
    empty = draw_interferer_sets(roles, 0.0, 20, np.random.default_rng(6))
    assert all(not s for s in empty)
    full = draw_interferer_sets(roles, 1.0, 20, np.random.default_rng(6))
    assert all(s == frozenset(pool) for s in full)
    some = draw_interferer_sets(roles, 0.5, 50, np.random.default_rng(7))
    relays = set(int(i) for i in roles.relay_indices)
    for s in some:
        assert s <= pool
        assert not (s & relays)


def test_interferer_sets_mean_size():
    # Pool of exactly 120 potential interferers, p=0.3.
    roles = make_roles(202, range(1, 81))
    assert roles.interferer_pool.shape[0] == 120
    ind = draw_interferer_indicators(roles, 0.3, 10_000, np.random.default_rng(8))
    mean = ind.sum(axis=1).mean()
    sigma = math.sqrt(120 * 0.3 * 0.7 / 10_000)
    assert abs(mean - 36.0) <= 3 * sigma


def test_transmit_indicators_uncorrelated_across_slots():
    # Aloha access: one mobile's transmit indicator is independent from slot
    # to slot even though every slot draws from the same pool.
    roles = make_roles(42, range(1, 11))
    ind = draw_interferer_indicators(roles, 0.3, 20_000, np.random.default_rng(1)).astype(float)
    a, b = ind[:-1], ind[1:]
    corr = ((a * b).mean(axis=0) - a.mean(axis=0) * b.mean(axis=0)) / (a.std(axis=0) * b.std(axis=0))
    assert np.abs(corr).max() <= 3.5 / math.sqrt(ind.shape[0] - 1)


def test_silencing_never_increases_outage():
    topo, params, shadow, roles = _small_setup(seed=20)
    lm = LinkModel(topo, shadow, params)
    scope = MarkingScope(lm, roles, ProtocolConfig(protocol="mp"))
    pool = roles.interferer_pool
    rng = np.random.default_rng(21)
    member = rng.random(pool.shape[0]) < 0.8
    slots = SlotScope(scope, member[None, :])
    eligible = roles.route_eligible_indices
    for _ in range(30):
        k, j = rng.choice(eligible, size=2, replace=False)
        silenced = tuple(sorted(int(i) for i in rng.choice(pool.shape[0], size=2, replace=False)))
        base = slots.link_eps(0, int(k), int(j), ())
        cut = slots.link_eps(0, int(k), int(j), silenced)
        assert cut <= base + 1e-15


def test_realize_outages_trivial_and_stats():
    rng = np.random.default_rng(9)
    zeros = np.zeros((5, 5))
    assert not realize_outages(zeros, rng).any()
    ones = np.ones((5, 5))
    assert realize_outages(ones, rng).all()
    quarter = np.full((100_000,), 0.25)
    frac = realize_outages(quarter, rng).mean()
    assert abs(frac - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 100_000)
    with_nan = np.array([[np.nan, 1.0], [1.0, np.nan]])
    draws = realize_outages(with_nan, rng)
    assert not draws[0, 0] and not draws[1, 1]
    assert draws[0, 1] and draws[1, 0]


def _small_setup(seed=0, sigma=8.0, gamma=1.0, with_pool=True):
    topo = generate_topology(12, 1.0, 0.05, 0.5, np.random.default_rng(seed))
    params = ChannelParams(sigma_s_db=sigma, gamma=gamma)
    shadow = draw_shadowing(topo, sigma, np.random.default_rng(seed + 1))
    relays = [1, 3, 5, 7] if with_pool else range(1, 13)
    roles = make_roles(topo.num_nodes, relays)
    return topo, params, shadow, roles


def test_matrix_no_interference_noiseless_is_zero():
    topo, _, shadow, roles = _small_setup(gamma=1.0)
    params = ChannelParams(gamma=math.inf)
    matrix = build_outage_matrix(topo, shadow, params, roles, frozenset())
    eligible = roles.route_eligible_indices
    block = matrix[np.ix_(eligible, eligible)]
    off = ~np.eye(len(eligible), dtype=bool)
    assert (block[off] == 0.0).all()
    # Everything else stays NaN.
    assert np.isnan(matrix[2, 4])


def test_matrix_silencing_everyone_equals_no_interference():
    topo, params, shadow, roles = _small_setup()
    interferers = frozenset(int(i) for i in roles.interferer_pool[:4])
    base = build_outage_matrix(topo, shadow, params, roles, frozenset())
    silenced = build_outage_matrix(topo, shadow, params, roles, interferers, silenced=interferers)
    np.testing.assert_array_equal(base, silenced)


def test_matrix_rejects_interferers_outside_pool():
    topo, params, shadow, roles = _small_setup()
    relay = int(roles.relay_indices[0])
    with pytest.raises(ValueError):
        build_outage_matrix(topo, shadow, params, roles, frozenset([relay]))


def test_far_interferer_barely_moves_outage():
    # Tight cluster of route-eligible nodes around the origin with a single
    # potential interferer two network radii away: every outage entry must
    # stay within 1e-6 of its interference-free value.
    positions = np.array(
        [
            [0.0, 0.0],  # source
            [0.03, 0.0],  # relay
            [0.0, 0.03],  # relay
            [2.0, 0.0],  # potential interferer, far away
            [0.02, -0.02],  # destination
        ]
    )
    topo = Topology(positions, r_net=2.5, r_ex=0.01)
    params = ChannelParams(sigma_s_db=0.0)
    shadow = draw_shadowing(topo, 0.0, np.random.default_rng(0))
    roles = make_roles(5, [1, 2])
    with_far = build_outage_matrix(topo, shadow, params, roles, frozenset([3]))
    without = build_outage_matrix(topo, shadow, params, roles, frozenset())
    eligible = roles.route_eligible_indices
    idx = np.ix_(eligible, eligible)
    diff = np.abs(with_far[idx] - without[idx])
    off = ~np.eye(len(eligible), dtype=bool)
    assert np.nanmax(diff[off]) <= 1e-6
    assert np.nanmax(diff[off]) > 0.0


@pytest.mark.parametrize("gamma", [1.0, math.inf])
def test_fast_matrix_matches_reference(gamma):
    topo, _, shadow, roles = _small_setup(seed=10, gamma=gamma)
    params = ChannelParams(gamma=gamma)
    lm = LinkModel(topo, shadow, params)
    scope = MarkingScope(lm, roles, ProtocolConfig(protocol="aodv"))
    pool = roles.interferer_pool
    rng = np.random.default_rng(11)
    for _ in range(5):
        member = rng.random(pool.shape[0]) < 0.6
        interferer_set = frozenset(int(i) for i in pool[member])
        reference = build_outage_matrix(topo, shadow, params, roles, interferer_set)
        fast = scope.full_eps_matrices([member])[0]
        eligible = roles.route_eligible_indices
        np.testing.assert_allclose(
            fast, reference[np.ix_(eligible, eligible)], rtol=0, atol=1e-12
        )


def test_fast_single_links_and_silencing_match_reference():
    topo, params, shadow, roles = _small_setup(seed=12)
    lm = LinkModel(topo, shadow, params)
    scope = MarkingScope(lm, roles, ProtocolConfig(protocol="mp"))
    pool = roles.interferer_pool
    rng = np.random.default_rng(13)
    member = rng.random(pool.shape[0]) < 0.7
    interferer_set = frozenset(int(i) for i in pool[member])
    silenced_positions = tuple(int(i) for i in np.flatnonzero(member)[:2])
    silenced_nodes = frozenset(int(pool[i]) for i in silenced_positions)

    reference = build_outage_matrix(topo, shadow, params, roles, interferer_set, silenced=silenced_nodes)
    slots = SlotScope(scope, member[None, :])
    eligible = roles.route_eligible_indices
    for k in eligible:
        for j in eligible:
            if k == j:
                continue
            fast = slots.link_eps(0, int(k), int(j), silenced_positions)
            assert fast == pytest.approx(reference[k, j], abs=1e-12)


def test_mp_rows_match_reference_matrix():
    topo, params, shadow, roles = _small_setup(seed=14)
    lm = LinkModel(topo, shadow, params)
    scope = MarkingScope(lm, roles, ProtocolConfig(protocol="mp"))
    pool = roles.interferer_pool
    member = np.random.default_rng(15).random(pool.shape[0]) < 0.5
    interferer_set = frozenset(int(i) for i in pool[member])
    reference = build_outage_matrix(topo, shadow, params, roles, interferer_set)
    slots = SlotScope(scope, member[None, :])
    origin = topo.source_index
    cands, _ = scope.candidates_from(origin)
    fwd, rev = slots.mp_rows(0, origin)
    for pos, c in enumerate(cands):
        assert fwd[pos] == pytest.approx(reference[origin, c], abs=1e-12)
        assert rev[pos] == pytest.approx(reference[c, origin], abs=1e-12)


def test_guard_eps_excludes_receiver_from_its_own_interference():
    topo, params, shadow, roles = _small_setup(seed=16)
    lm = LinkModel(topo, shadow, params)
    cfg = ProtocolConfig(protocol="mp", r_g=10.0)  # every interferer in range
    scope = MarkingScope(lm, roles, cfg)
    pool = roles.interferer_pool
    member = np.ones(pool.shape[0], dtype=bool)
    slots = SlotScope(scope, member[None, :])
    sender = topo.source_index
    gnodes, _ = scope.guard_candidates(sender)
    eps = slots.guard_eps(0, sender)
    d = distance_matrix(topo)
    for pos, receiver in enumerate(gnodes):
        interferers = tuple(
            (
                normalized_power("interferer", d[i, receiver], shadow.xi_db[i, receiver], params),
                nakagami_m(d[i, receiver], params.r_f),
            )
            for i in pool
            if i != receiver
        )
        inp = LinkOutageInput(
            omega_k=normalized_power("desired", d[sender, receiver], shadow.xi_db[sender, receiver], params),
            m_k=nakagami_m(d[sender, receiver], params.r_f),
            interferers=interferers,
            beta=params.beta,
            z=params.z,
        )
        assert eps[pos] == pytest.approx(outage_probability(inp), abs=1e-12)


def test_slot_scope_interferer_sets_match_pool():
    topo, params, shadow, roles = _small_setup(seed=17)
    lm = LinkModel(topo, shadow, params)
    scope = MarkingScope(lm, roles, ProtocolConfig(protocol="gf"))
    ind = draw_interferer_indicators(roles, 0.5, 6, np.random.default_rng(18))
    slots = SlotScope(scope, ind)
    sets = slots.interferer_sets()
    assert len(sets) == 6
    pool = frozenset(int(i) for i in roles.interferer_pool)
    for s in sets:
        assert s <= pool


def test_point_run_reproducible_and_worker_invariant():
    point = SimulationPoint(M=25, topologies=6, k1=2, k2=2, k3=2)
    cfg = ProtocolConfig(protocol="mp")
    a = run_point(point, cfg, seed=123)
    b = run_point(point, cfg, seed=123)
    assert a == b
    serial = run_point_parallel(point, cfg, seed=123, workers=1)
    parallel = run_point_parallel(point, cfg, seed=123, workers=2)
    assert serial == parallel


def test_topologies_shared_across_protocols():
    # Layer realizations derive only from (seed, topology, layer), never the
    # protocol, so paired comparisons see identical networks.
    point = SimulationPoint(M=10, topologies=2, k1=1, k2=1, k3=1)
    seeds_seen = []
    for proto in ("aodv", "gf"):
        topo = generate_topology(
            point.M, point.r_net, point.r_ex, point.dest_distance,
            np.random.default_rng(np.random.SeedSequence([99, 0, 0])),
        )
        seeds_seen.append(topo.positions)
    np.testing.assert_array_equal(seeds_seen[0], seeds_seen[1])


def test_simulation_point_validation():
    with pytest.raises(ValueError):
        SimulationPoint(M=10, topologies=0)
    with pytest.raises(ValueError):
        SimulationPoint(M=10, mu=1.2)
    point = SimulationPoint(M=200)
    assert point.node_density == pytest.approx(201 / math.pi)
    assert point.num_slots(ProtocolConfig(protocol="aodv", B=4)) == 122
