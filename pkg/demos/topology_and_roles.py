#!/usr/bin/env python3
"""Draw one network realization: uniform-clustered mobiles, relay marking,
and the transmitting interferers of a few time slots.

Recreates the standard picture of the scenario: source at the center,
destination on the perimeter, 200 mobiles with exclusion zones, roughly 40%
of them willing to relay.
"""
import numpy as np

from manetsim import draw_interferer_sets, generate_topology, mark_roles
from manetsim.topology import distance_matrix, save_topology

rng = np.random.default_rng(7)
topo = generate_topology(M=200, r_net=1.0, r_ex=0.05, dest_distance=1.0, rng=rng)
roles = mark_roles(topo, mu=0.4, rng=rng)
slots = draw_interferer_sets(roles, p=0.3, num_slots=5, rng=rng)

d = distance_matrix(topo)
np.fill_diagonal(d, np.inf)
print(f"nodes: {topo.num_nodes} (source 0 at origin, destination {topo.dest_index} on the rim)")
print(f"minimum pairwise separation: {d.min():.4f} (exclusion radius 0.05)")
print(f"potential relays: {roles.relay_indices.shape[0]} / 200")
print(f"potential interferers: {roles.interferer_pool.shape[0]}")
print("transmitting interferers per slot:", [len(s) for s in slots])

save_topology(topo, "topology.txt")
print("wrote topology.txt (replayable with manetsim.load_topology)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    relays = roles.relay_indices
    others = roles.interferer_pool
    pos = topo.positions
    ax.scatter(pos[others, 0], pos[others, 1], s=14, facecolors="none", edgecolors="gray",
               label="potential interferer")
    ax.scatter(pos[relays, 0], pos[relays, 1], s=14, c="k", label="potential relay")
    ax.scatter(*pos[0], marker="*", s=220, c="tab:blue", label="source")
    ax.scatter(*pos[topo.dest_index], marker="*", s=220, c="tab:red", label="destination")
    ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, linestyle=":"))
    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig("topology_and_roles.png", dpi=120)
    print("wrote topology_and_roles.png")
except ImportError:
    print("matplotlib not available; skipped the plot")
