"""
Mean-value estimate against the simulator
=========================================

The analytic module solves a saturated fixed point for the per-slot
transmission probability and turns it into a throughput estimate. It is a
reconstruction meant as a coarse band (+-0.05) around simulated saturated
throughput, not a reproduction of a published model.
"""
import math

from dcfbackoff import BackoffParams, SimConfig, TrafficModel, run
from dcfbackoff.analytic import analyze, heavy_stage_gap

for n in (10, 50, 100):
    for kind in ("BEB", "DCBTA"):
        a = analyze(kind, n, BackoffParams.default(8))
        sim = run(SimConfig(n_stations=n, strategy=kind, traffic=TrafficModel(math.inf),
                            sim_time_us=30_000_000, warmup_us=3_000_000))
        print(f"n={n:3d} {kind:5s}  tau={a['tau']:.4f} p={a['p_coll']:.3f}  "
              f"analytic {a['throughput']:.4f}  simulated {sim.normalized_throughput:.4f}")

# recursive 2*CW+2 windows versus the closed form 2**i * CW_min + 2
for row in heavy_stage_gap(BackoffParams(8, 1 << 16, 10, 512)):
    print(row)
