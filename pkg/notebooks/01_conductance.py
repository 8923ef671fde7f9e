"""
Conductance of the ring and the complete graph
===============================================

Exact conductance by subset enumeration, the ring's arc fast path, and
the mean conductance that drives multi-piece gossip.
"""

# %%
import numpy as np

from qgossip import complete_matrix, k_conductance, mean_conductance, ring_matrix
from qgossip.conductance import conductance
from qgossip.conductance import circulant_arc_conductance, circulant_mean_conductance

# %% [markdown]
# The ring's worst set is half the circle: two boundary edges of weight 1/4
# over n/2 vertices.

# %%
for n in (4, 8, 12, 16, 20):
    rep = conductance(ring_matrix(n))
    print(f"ring n={n:2d}  Phi={rep.value:.4f}  argmin={rep.argmin}")

# %%
for n in (4, 8, 12, 16, 20):
    print(f"complete n={n:2d}  Phi={conductance(complete_matrix(n)).value:.4f}")

# %% [markdown]
# k-conductance shrinks as larger sets are allowed.

# %%
P = ring_matrix(12)
print([round(k_conductance(P, k).value, 4) for k in range(1, 7)])

# %% [markdown]
# Exhaustive enumeration stops at n=20. For rings the arc scan gives the same
# answer in O(n) and reaches any size.

# %%
for n in (16, 64, 256, 1024):
    P = ring_matrix(n)
    print(n, circulant_arc_conductance(P).value, circulant_mean_conductance(P))

# %% [markdown]
# Mean conductance of the ring grows like n^3 (exactly n^3/4 for n divisible by 4).

# %%
ns = np.array([8, 12, 16, 20])
vals = np.array([mean_conductance(ring_matrix(int(n))) for n in ns])
print(vals / ns ** 3)
