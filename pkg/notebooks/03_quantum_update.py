"""
Upgrading a ring to a complete entanglement graph
=================================================

Swap planning, Bell-pair provisioning, and gossip over teleportation
links on the upgraded network.
"""

# %%
from qgossip import (
    TwoQubitState,
    apply_update,
    chain_concurrence,
    concurrence,
    gen_ring,
    plan_update,
    run_quantum_gossip,
)
from qgossip.quantum import doubling_schedule, replay_schedule, ring_swap_count

# %% [markdown]
# Swapping through Bell pairs keeps concurrence at 1; one weak link drags the
# whole chain down.

# %%
bell = TwoQubitState.bell()
weak = TwoQubitState([[0.9 ** 0.5, 0], [0, 0.1 ** 0.5]])
print(concurrence(bell), concurrence(weak))
print(chain_concurrence([bell] * 6), chain_concurrence([bell] * 5 + [weak]))

# %% [markdown]
# The ring of eight needs 20 new links and 36 swaps.

# %%
plan = plan_update(gen_ring(8))
print(plan.totals)
for p in plan.pairs[:6]:
    print(p.u, p.v, p.path, p.swaps)

# %% [markdown]
# Swap totals grow like n^3, or n^4 with n replicas for multi-piece gossip.

# %%
for n in (8, 16, 32, 64):
    single = plan_update(gen_ring(n))
    multi = plan_update(gen_ring(n), "multi")
    print(n, single.total_swaps, ring_swap_count(n), multi.totals["swaps_with_replicas"])

# %% [markdown]
# After the update any vertex reaches all eight in three rounds of pushes.

# %%
net = apply_update(gen_ring(8), plan)
sizes, drained = replay_schedule(net, doubling_schedule(8))
print(sizes, net.total() - drained.total(), "Bell pairs used")

# %% [markdown]
# Gossip on the upgraded ring, each exchange paid for by a teleport.

# %%
res = run_quantum_gossip(gen_ring(8), "single", 0.1, 5000, seed=0)
print(res.estimate.t_estimate, "rounds; most Bell pairs drawn from one pair:", res.max_draw.max())
res_m = run_quantum_gossip(gen_ring(8), "multi", 0.1, 500, seed=0)
print(res_m.estimate.t_estimate, "rounds (multi); max draw", res_m.max_draw.max(), "of", res_m.plan.replicas)
