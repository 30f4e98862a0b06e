#!/usr/bin/env python3
"""Follow one routing trial of each protocol through a shared realization.

All three protocols see the same topology, shadowing, relay marking and
per-slot interferer sets; only their path-selection rules differ. The trial
printout shows the selected path, the delivery attempts per link and the
end-to-end delay.
"""
import numpy as np

from manetsim import ChannelParams, ProtocolConfig, run_trial
from manetsim.channel import draw_shadowing
from manetsim.engine import (
    LinkModel,
    MarkingScope,
    SlotScope,
    TrialEnv,
    draw_interferer_indicators,
    mark_roles,
)
from manetsim.topology import generate_topology

SEED = 2024
channel = ChannelParams()  # defaults: alpha=3.5, 8 dB shadowing, G/h=96

topo = generate_topology(M=200, r_net=1.0, r_ex=0.05, dest_distance=0.6,
                         rng=np.random.default_rng(SEED))
shadow = draw_shadowing(topo, channel.sigma_s_db, np.random.default_rng(SEED + 1))
link_model = LinkModel(topo, shadow, channel)
roles = mark_roles(topo, mu=0.4, rng=np.random.default_rng(SEED + 2))
print(f"topology: 202 nodes, destination at distance 0.6, "
      f"{roles.relay_indices.shape[0]} potential relays\n")

for name in ("aodv", "gf", "mp"):
    cfg = ProtocolConfig(protocol=name, B=4, r_t=0.4, r_g=0.15)
    scope = MarkingScope(link_model, roles, cfg)
    indicators = draw_interferer_indicators(
        roles, 0.3, 30 * cfg.B + 2, np.random.default_rng(SEED + 3)
    )
    env = TrialEnv(scope, SlotScope(scope, indicators), cfg)
    outcome = run_trial(cfg, env, np.random.default_rng(SEED + 4))
    print(f"--- {name}")
    if outcome.success:
        print(f"  path: {' -> '.join(map(str, outcome.path))}")
        print(f"  attempts per link: {list(outcome.attempts)}")
        extra = 2 * cfg.c * outcome.hops * cfg.T_d
        print(f"  message delay {outcome.path_delay:.2f}"
              f" + discovery delay {extra:.2f} = {outcome.path_delay + extra:.2f}")
    else:
        print(f"  routing failure at stage: {outcome.failure_stage}")
    print()
