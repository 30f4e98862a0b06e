#!/usr/bin/env python3
"""Reduced-scale sweep of source-destination distance for all three
protocols: reliability, conditional hops/delay and area spectral efficiency.

Uses 30 topologies with 4x4x4 trials per layer so it finishes in about a
minute; crank the constants for smoother curves.
"""
import time

import numpy as np

from manetsim import ChannelParams, ProtocolConfig
from manetsim.engine import SimulationPoint, run_point_parallel
from manetsim.metrics import topological_averages

SEED = 99
DISTANCES = [0.2, 0.4, 0.6, 0.8, 1.0]
PROTOCOLS = ("aodv", "gf", "mp")

start = time.time()
rows = {}
for dest in DISTANCES:
    point = SimulationPoint(M=200, dest_distance=dest, channel=ChannelParams(),
                            topologies=30, k1=4, k2=4, k3=4)
    for name in PROTOCOLS:
        cfg = ProtocolConfig(protocol=name, B=4, r_t=0.4)
        rows[(name, dest)] = topological_averages(run_point_parallel(point, cfg, SEED))

print(f"{'dist':>5} {'protocol':>9} {'reliability':>12} {'hops':>6} {'delay':>7} {'ase':>7}")
for dest in DISTANCES:
    for name in PROTOCOLS:
        avg = rows[(name, dest)]
        hops = f"{avg.mean_hops:.2f}" if avg.mean_hops is not None else "-"
        delay = f"{avg.mean_delay:.2f}" if avg.mean_delay is not None else "-"
        print(f"{dest:>5} {name:>9} {avg.reliability:>12.4f} {hops:>6} {delay:>7} {avg.ase:>7.2f}")
print(f"\n{time.time() - start:.0f}s")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8))
    for name, marker in zip(PROTOCOLS, "os^"):
        axes[0].plot(DISTANCES, [rows[(name, d)].reliability for d in DISTANCES],
                     marker=marker, label=name)
        axes[1].plot(DISTANCES, [rows[(name, d)].ase for d in DISTANCES],
                     marker=marker, label=name)
    axes[0].set_ylabel("average path reliability")
    axes[1].set_ylabel("normalized area spectral efficiency")
    for ax in axes:
        ax.set_xlabel("source-destination distance")
        ax.grid(alpha=0.4)
        ax.legend()
    fig.tight_layout()
    fig.savefig("protocol_comparison.png", dpi=120)
    print("wrote protocol_comparison.png")
except ImportError:
    print("matplotlib not available; skipped the plot")
