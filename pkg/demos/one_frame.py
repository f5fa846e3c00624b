"""Walk through a single frame: field, candidates, DP tables, decisions.

Run:  python3 demos/one_frame.py
"""

import numpy as np

from cachestream import SimConfig
from cachestream.channel import ccdf_B, deliverable_bits
from cachestream.geometry import candidate_set, sample_field
from cachestream.mdp import complexity, lookup_action
from cachestream.policy import ALL_KINDS, TableCache, choose_node

cfg = SimConfig()
rng = np.random.default_rng(42)

# Nodes around the user, one PPP per quality type.
field = sample_field(cfg, rng)
print("nodes per type:", field.type_counts().tolist())

# Strongest node of each type at the decision slot.
fading = rng.standard_exponential(len(field))
cands = candidate_set(field, fading)
for node, power in zip(cands.candidates, cands.channel_power):
    p5 = ccdf_B(5000, node.distance, cfg)
    print(f"  type {node.node_type}: d = {node.distance:6.3f} m, |h|^2 = {power:8.3f}, "
          f"P(B >= 5 kbit) = {p5:.3f}")

# The user starts with an empty buffer, so the headroom is Q_tilde.
z0 = cfg.Q_tilde
tables = TableCache(cfg)
for kind in ALL_KINDS:
    d = choose_node(kind, cands, z0, cfg, tables)
    print(f"{kind.value:>16}: type {d.chosen.node_type} at {d.chosen.distance:.3f} m")
print(f"DP tables solved: {tables.solved} (shared by all policies)")

# Frame values of every candidate, as seen by the proposed rule.
d = choose_node("proposed", cands, z0, cfg, tables)
for i, v in d.frame_values.items():
    print(f"  candidate {i} (type {cands.candidates[i].node_type}): expected frame cost {v:.2f}")

# Play the frame on the chosen node.
node, table = d.chosen, d.table
z = z0
for t in range(cfg.T):
    u = fading[node.index] if t == 0 else rng.standard_exponential()
    b = int(deliverable_bits(node.distance, u, cfg))
    a = lookup_action(table, t, z, b)
    print(f"  slot {t}: b = {b:6d} bits -> M = {a.M}, q = {a.q}")
    z = min(z + cfg.c, cfg.Q_tilde) - a.M

info = complexity(table.space, cfg)
print(f"evaluations per slot: {table.evaluations_per_slot} = "
      f"{info['n_states']} x {info['N_B']} x {info['N_theta']:.2f}")
