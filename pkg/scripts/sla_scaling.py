"""Time the sweeping-line solver on full-filling Union-Jack lattices.

    python scripts/sla_scaling.py --L-min 10 --L-max 30 --repeats 3
"""

import argparse
import math
import statistics

import numpy as np

from udmis.graph import LatticeSpec, generate_ud_lattice
from udmis.sla import sla_solve, warmup

ap = argparse.ArgumentParser()
ap.add_argument("--L-min", type=int, default=10)
ap.add_argument("--L-max", type=int, default=30)
ap.add_argument("--repeats", type=int, default=3)
ap.add_argument("--rho-ppt", type=int, default=1000)
args = ap.parse_args()

warmup()
ns, ts = [], []
print(f"{'L':>3} {'N':>5} {'|MIS|':>6} {'peak':>8} {'median s':>10}")
for L in range(args.L_min, args.L_max + 1):
    g = generate_ud_lattice(LatticeSpec(L, args.rho_ppt, 2, 0))
    runs = [sla_solve(g, "size", witness=False) for _ in range(args.repeats)]
    t = statistics.median(r.wall_time for r in runs)
    print(f"{L:>3} {g.n:>5} {runs[0].mis_size:>6} {runs[0].variants_peak:>8} {t:>10.4f}", flush=True)
    ns.append(g.n)
    ts.append(t)

x = np.sqrt(ns)
slope, _ = np.polyfit(x, np.log(ts), 1)
slope_n, _ = np.polyfit(x, np.log(np.array(ts) / np.array(ns)), 1)
print(f"TTS ~ base^sqrt(N): base = {math.exp(slope):.3f}")
print(f"TTS ~ N * base^sqrt(N): base = {math.exp(slope_n):.3f}")
