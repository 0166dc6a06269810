"""
Contention-window rules side by side
====================================

Each strategy is a pair of integer update rules. Here we trace where the
window goes after a run of collisions and where it falls back to after a
run of successes.
"""
from dcfbackoff import BackoffParams, BackoffState, StrategyKind, on_collision, on_success, stage_cw_table

params = BackoffParams.default(cw_min=8, cw_max=1024, max_stage_m=6)   # threshold = 512

# collision-only trajectories, stage 0 .. m
for kind in StrategyKind:
    print(f"{kind.value:6s}", stage_cw_table(kind, params))

# DCBTA uses two regimes around the threshold
for cw in (256, 512, 513, 600):
    up = on_collision(StrategyKind.DCBTA, params, BackoffState(cw)).cw
    down = on_success(StrategyKind.DCBTA, params, BackoffState(cw)).cw
    print(f"DCBTA cw={cw:4d}: collision -> {up:4d}, success -> {down:4d}")

# how many successes does it take to come back down from cw_max?
for kind in StrategyKind:
    s, steps = BackoffState(params.cw_max), 0
    while s.cw > params.cw_min:
        s = on_success(kind, params, s)
        steps += 1
    print(f"{kind.value:6s} needs {steps:4d} successes to return from {params.cw_max} to {params.cw_min}")
