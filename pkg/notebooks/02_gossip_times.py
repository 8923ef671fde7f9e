"""
Monte Carlo dissemination times
===============================

Single- and multi-piece push-pull gossip on rings and complete graphs,
with the conductance bounds printed alongside as yardsticks.
"""

# %%
import numpy as np

from qgossip import (
    GossipConfig,
    bound_single,
    complete_matrix,
    estimate_time,
    gen_complete,
    gen_ring,
    ring_matrix,
    run_to_completion,
)
from qgossip.conductance import circulant_arc_conductance

EPS = 0.1

# %% [markdown]
# One traced run on the ring of eight: the informed arc grows from both ends.

# %%
trace = run_to_completion(GossipConfig(gen_ring(8), ring_matrix(8), seed=3))
for t, informed in enumerate(trace.rounds):
    print(t, sorted(informed))

# %% [markdown]
# Complete graphs: the 0.1-time grows like log n.

# %%
for n in (8, 16, 32, 64, 128, 256):
    cfg = GossipConfig(gen_complete(n), complete_matrix(n), seed=0)
    est = estimate_time(cfg, EPS, 2000, vertex_transitive=True)
    print(f"n={n:4d}  T={est.t_estimate:3d}  CI={est.quantile_ci}  log2 n={np.log2(n):.0f}")

# %% [markdown]
# Rings: linear growth, far above the complete graph.

# %%
for n in (8, 16, 32, 64, 128):
    P = ring_matrix(n)
    est = estimate_time(GossipConfig(gen_ring(n), P, seed=0), EPS, 2000, vertex_transitive=True)
    yard = bound_single(P, EPS, circulant_arc_conductance(P).value)
    print(f"n={n:4d}  T={est.t_estimate:4d}  yardstick={yard:8.1f}")

# %% [markdown]
# Multi-piece: every vertex starts with its own message.

# %%
for n in (8, 16, 32):
    est = estimate_time(GossipConfig(gen_ring(n), ring_matrix(n), mode="multi", seed=0), EPS, 300)
    est_c = estimate_time(GossipConfig(gen_complete(n), complete_matrix(n), mode="multi", seed=0), EPS, 300)
    print(f"n={n:3d}  ring T_M={est.t_estimate:4d}  complete T_M={est_c.t_estimate:3d}")
