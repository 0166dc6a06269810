"""
One simulation run and its delay ledger
=======================================

Fifty stations at 60 % offered load running DCBTA. The ledger splits the
measured channel time into successful exchanges, collisions, idle slots
spent counting down and idle slots with nobody backlogged.
"""
from dcfbackoff import BackoffParams, PhyParams, SimConfig, TrafficModel, run, total_delay_us
from dcfbackoff.sim import arrival_rate_for_load

phy = PhyParams()
rate = arrival_rate_for_load(0.6, 50, phy)
config = SimConfig(
    n_stations=50,
    strategy="DCBTA",
    backoff=BackoffParams.default(8),
    traffic=TrafficModel(rate),
    sim_time_us=30_000_000,
    warmup_us=2_000_000,
    seed=1,
)
m = run(config)

print(f"per-station rate   {rate:.3f} packets/s")
print(f"throughput         {m.normalized_throughput:.4f} (offered {m.offered_load:.2f})")
print(f"avg tx delay       {m.avg_tx_delay_us:.0f} us  (ledger total / transmissions)")
print(f"avg queue delay    {m.avg_queue_delay_us:.0f} us  (arrival to ACK)")
print(f"collision rate     {m.collision_rate:.4f} per attempt")

led = m.ledger
for name in ("total_tx_time_us", "total_collision_time_us", "total_backoff_time_us",
             "total_empty_slot_time_us"):
    print(f"  {name:26s} {getattr(led, name):>12d}")
print(f"  {'sum':26s} {total_delay_us(led):>12d}  == measured span {m.span_us}")
