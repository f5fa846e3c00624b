"""Sweep the interference level and the caching case, writing CSV files.

Run:  python3 demos/sweeps.py [trials] [outdir]
"""

import sys
from pathlib import Path

from cachestream import SimConfig
from cachestream.experiments import SweepSpec, run_sweep

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20
out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("sweep_out")
out.mkdir(exist_ok=True)

for axis, values in [("upsilon_db", [0, 5, 10, 15]), ("caching_case", [1, 2, 3]),
                     ("V", [0.005, 0.015, 0.05, 0.15])]:
    spec = SweepSpec(axis, values, SimConfig(), trials=trials, output_path=out / f"{axis}.csv",
                     base_seed=1)
    points = run_sweep(spec)
    print(f"\n{axis}")
    for pt in points:
        res = pt.result
        row = "  ".join(f"{k.value}: {res.mean(k, 'delay_rate'):.4f}/"
                        f"{res.mean(k, res.quality_metric()):.2f}" for k in res.kinds)
        print(f"  {pt.value:>6}  {row}")
print(f"\nCSV files in {out}/  (delay/quality per cell above)")
