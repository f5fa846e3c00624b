"""Delay and quality of the four policies on the default setup.

Every policy sees the same node fields and fading draws, so differences
between rows come from the decisions alone.

Run:  python3 demos/compare_policies.py [trials]
"""

import sys

from cachestream import SimConfig
from cachestream.policy import ALL_KINDS
from cachestream.sim import mean_stderr, run_experiment

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 50
cfg = SimConfig()
res = run_experiment(cfg, ALL_KINDS, trials, base_seed=0)

print(f"{trials} trials, K = {cfg.K} frames of T = {cfg.T} slots")
print(f"{'policy':>16}  {'delay rate':>18}  {'quality (stall=0)':>18}  {'quality (raw)':>14}")
for kind in ALL_KINDS:
    d, de = mean_stderr(res.values(kind, "delay_rate"))
    qz, qe = mean_stderr(res.values(kind, "avg_quality_stall_zeroed"))
    q, _ = mean_stderr(res.values(kind, "avg_quality_per_chunk"))
    print(f"{kind.value:>16}  {d:.5f} +- {de:.5f}  {qz:8.3f} +- {qe:.3f}  {q:14.3f}")

# The highest-quality rule pays for quality with far more stalls; one-step
# decisions track the DP closely because the queue term dominates the stage cost.
