"""
Where DCBTA windows settle
==========================

DCBTA doubles on collision but gives back only one or two slots per
success, so under contention windows drift up to CW_max and stay there.
This prints the window distribution across stations at the end of a
saturated run, for BEB and DCBTA, next to the resulting throughput.
"""
import math

import numpy as np

from dcfbackoff import BackoffParams, SimConfig, TrafficModel, World

for n in (50, 100):
    for kind in ("BEB", "ELBA", "DCBTA"):
        world = World(SimConfig(n_stations=n, strategy=kind, backoff=BackoffParams.default(8),
                                traffic=TrafficModel(math.inf), sim_time_us=30_000_000,
                                warmup_us=3_000_000))
        while not world.done:
            world.advance()
        m = world.metrics()
        cws = np.array([st.backoff_state.cw for st in world.stations])
        print(f"n={n:3d} {kind:5s}  throughput {m.normalized_throughput:.4f}  "
              f"collision rate {m.collision_rate:.3f}  "
              f"cw median {np.median(cws):6.0f}  min {cws.min():4d}  max {cws.max():4d}")
