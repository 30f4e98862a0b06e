#!/usr/bin/env python3
"""Closed-form link outage probability vs a brute-force Monte-Carlo check.

One link with a few interferers: sweep the SINR threshold, evaluate the
closed form, and overlay a sampling estimate. The two must agree to within
sampling noise for any mix of fading parameters.
"""
import numpy as np

from manetsim import LinkOutageInput, monte_carlo_outage, outage_probability

rng = np.random.default_rng(1)

# A mid-length desired link (unit normalized power, mild line-of-sight
# fading) against three interferers of mixed severity, moderate noise.
interferers = ((0.08, 1), (0.03, 2), (0.015, 1))
betas_db = np.arange(-10, 16, 2)

print(f"{'beta_dB':>8} {'closed form':>12} {'monte carlo':>12} {'sigma':>8}")
closed_vals, mc_vals = [], []
for beta_db in betas_db:
    inp = LinkOutageInput(
        omega_k=1.0, m_k=2, interferers=interferers, beta=10 ** (beta_db / 10), z=0.5
    )
    closed = outage_probability(inp)
    est, se = monte_carlo_outage(inp, 200_000, rng)
    gap = abs(closed - est) / se if se > 0 else 0.0
    closed_vals.append(closed)
    mc_vals.append(est)
    print(f"{beta_db:>8} {closed:>12.6f} {est:>12.6f} {gap:>7.2f}s")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.figure(figsize=(6, 4))
    plt.semilogy(betas_db, closed_vals, "-", label="closed form")
    plt.semilogy(betas_db, mc_vals, "o", mfc="none", label="monte carlo (2e5 draws)")
    plt.xlabel("SINR threshold (dB)")
    plt.ylabel("outage probability")
    plt.grid(True, which="both", alpha=0.4)
    plt.legend()
    plt.tight_layout()
    plt.savefig("outage_closed_form.png", dpi=120)
    print("\nwrote outage_closed_form.png")
except ImportError:
    print("\nmatplotlib not available; skipped the plot")
