"""
A reduced throughput-versus-load sweep
======================================

The ``fig2`` preset (n=50, CW_min=8, m=6, BEB/ELBA/DCBTA) on a coarse load
grid with a short span, written to CSV. The same grid at full scale is::

    dcfbackoff sweep --preset fig2 --out fig2.csv
"""
import sys
from dataclasses import replace

from dcfbackoff.sweep import emit, preset, run_sweep

spec = preset("fig2")
spec = replace(
    spec,
    offered_load_grid=(0.2, 0.4, 0.6, 0.8, 1.0, 1.2),
    replications=3,
    base=replace(spec.base, sim_time_us=20_000_000, warmup_us=2_000_000),
)
rows = run_sweep(spec)

print(f"{'load':>5s}  " + "  ".join(f"{s.value:>15s}" for s in spec.strategies))
for load in spec.offered_load_grid:
    cells = []
    for s in spec.strategies:
        r = next(r for r in rows if r.strategy == s.value and r.offered_load == load)
        cells.append(f"{r.throughput_mean:.4f}±{r.throughput_ci95:.4f}")
    print(f"{load:5.2f}  " + "  ".join(f"{c:>15s}" for c in cells))

out = sys.argv[1] if len(sys.argv) > 1 else "fig2_small.csv"
emit(rows, "csv", out)
print("wrote", out)
