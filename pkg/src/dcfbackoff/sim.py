"""Slotted DCF simulation with RTS/CTS, Poisson arrivals and pluggable backoff.

Channel model: backlogged stations decrement their counters on every idle
slot, freeze them while the medium is busy and transmit when they reach zero.
One transmitter is a success (busy for T_s), two or more a collision (busy for
T_c).  Packets arriving during a channel event are enqueued when it ends; a
station whose queue was empty draws a fresh counter at that boundary.

Time is integer microseconds throughout.  An arrival rate of ``math.inf``
gives a saturated source: the queue is refilled as soon as a packet leaves.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .backoff import (
    BackoffParams,
    BackoffState,
    ContractViolation,
    StrategyKind,
    on_collision,
    on_success,
    sample_backoff,
)
from .metrics import MetricsCollector, RunMetrics
from .phy import PhyParams, tx_time_collision_us, tx_time_success_us

NEVER = np.iinfo(np.int64).max


@dataclass(frozen=True)
class TrafficModel:
    arrival_rate_pps: float = 0.0
    queue_capacity: int = 1

    def __post_init__(self):
        if not self.arrival_rate_pps >= 0:
            raise ContractViolation(f"arrival_rate_pps must be >= 0, got {self.arrival_rate_pps}")
        if self.queue_capacity < 1:
            raise ContractViolation(f"queue_capacity must be >= 1, got {self.queue_capacity}")

    @property
    def saturated(self) -> bool:
        return math.isinf(self.arrival_rate_pps)


@dataclass(frozen=True)
class SimConfig:
    n_stations: int = 50
    strategy: StrategyKind = StrategyKind.BEB
    backoff: BackoffParams = field(default_factory=BackoffParams)
    phy: PhyParams = field(default_factory=PhyParams)
    traffic: TrafficModel = field(default_factory=TrafficModel)
    sim_time_us: int = 100_000_000
    seed: int = 0
    warmup_us: int = 5_000_000
    keep_samples: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strategy", StrategyKind.parse(self.strategy))
        if self.n_stations < 1:
            raise ContractViolation(f"n_stations must be >= 1, got {self.n_stations}")
        if not self.sim_time_us > self.warmup_us >= 0:
            raise ContractViolation(
                f"need sim_time_us > warmup_us >= 0, got {self.sim_time_us}, {self.warmup_us}"
            )


def offered_load(n_stations: int, arrival_rate_pps: float, phy: PhyParams) -> float:
    """Aggregate payload demand over channel capacity."""
    return n_stations * arrival_rate_pps * phy.payload_bits / phy.channel_rate_bps


def arrival_rate_for_load(load: float, n_stations: int, phy: PhyParams) -> float:
    """Per-station Poisson rate that produces the given normalized offered load."""
    if n_stations < 1:
        raise ContractViolation(f"n_stations must be >= 1, got {n_stations}")
    return load * phy.channel_rate_bps / (n_stations * phy.payload_bits)


@dataclass
class Station:
    id: int
    backoff_state: BackoffState
    counter: int | None = None
    queue: deque = field(default_factory=deque)
    next_arrival_us: int = NEVER


class SlotKind(enum.Enum):
    IDLE = "idle"
    SUCCESS = "success"
    COLLISION = "collision"


@dataclass(frozen=True)
class SlotOutcome:
    kind: SlotKind
    stations: tuple[int, ...]
    elapsed_us: int
    # idle slots covered; always 1 from step(), possibly more from World.advance()
    n_slots: int = 1


class World:
    """Mutable state of one simulation run."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.t_us = 0
        arrivals_seq, backoff_seq = np.random.SeedSequence(config.seed).spawn(2)
        self.arrival_rng = np.random.default_rng(arrivals_seq)
        self.rng = np.random.default_rng(backoff_seq)
        self.ts_us = tx_time_success_us(config.phy)
        self.tc_us = tx_time_collision_us(config.phy)
        self.collector = MetricsCollector(
            self.ts_us, self.tc_us, config.phy.slot_us, keep_samples=config.keep_samples
        )
        self.arrivals = self.deliveries = self.drops = 0

        rate = config.traffic.arrival_rate_pps
        self._mean_gap_us = 1e6 / rate if 0 < rate < math.inf else None
        init = BackoffState.initial(config.backoff)
        self.stations = [Station(i, init) for i in range(config.n_stations)]
        for st in self.stations:
            if config.traffic.saturated:
                self._enqueue(st, 0)
                st.counter = sample_backoff(st.backoff_state, self.rng)
            elif self._mean_gap_us is not None:
                st.next_arrival_us = self._draw_gap()

    def _draw_gap(self) -> int:
        return int(round(self.arrival_rng.exponential(self._mean_gap_us)))

    def _enqueue(self, st: Station, t_us: int) -> None:
        self.arrivals += 1
        if len(st.queue) < self.config.traffic.queue_capacity:
            st.queue.append(t_us)
        else:
            self.drops += 1

    def _deliver_arrivals(self) -> None:
        # everything that arrived before the current boundary joins now
        t = self.t_us
        for st in self.stations:
            was_empty = not st.queue
            if self.config.traffic.saturated:
                if was_empty:
                    self._enqueue(st, t)
            else:
                while st.next_arrival_us < t:
                    self._enqueue(st, st.next_arrival_us)
                    st.next_arrival_us += self._draw_gap()
            if was_empty and st.queue:
                st.counter = sample_backoff(st.backoff_state, self.rng)

    @property
    def counting(self) -> bool:
        return self.t_us >= self.config.warmup_us

    @property
    def done(self) -> bool:
        return self.t_us >= self.config.sim_time_us

    def contenders(self) -> list[Station]:
        return [st for st in self.stations if st.queue]

    def _idle(self, n_slots: int, contenders: list[Station]) -> SlotOutcome:
        if self.counting:
            self.collector.open(self.t_us)
            self.collector.idle(n_slots, bool(contenders))
        for st in contenders:
            st.counter -= n_slots
        elapsed = n_slots * self.config.phy.slot_us
        self.t_us += elapsed
        self._deliver_arrivals()
        return SlotOutcome(SlotKind.IDLE, (), elapsed, n_slots)

    def _success(self, st: Station) -> SlotOutcome:
        cfg = self.config
        end = self.t_us + self.ts_us
        arrived = st.queue.popleft()
        self.deliveries += 1
        if self.counting:
            self.collector.open(self.t_us)
            self.collector.success(end - arrived)
        st.backoff_state = on_success(cfg.strategy, cfg.backoff, st.backoff_state)
        st.counter = sample_backoff(st.backoff_state, self.rng) if st.queue else None
        self.t_us = end
        self._deliver_arrivals()
        return SlotOutcome(SlotKind.SUCCESS, (st.id,), self.ts_us, 0)

    def _collision(self, colliders: list[Station]) -> SlotOutcome:
        cfg = self.config
        if self.counting:
            self.collector.open(self.t_us)
            self.collector.collision(len(colliders))
        for st in colliders:
            st.backoff_state = on_collision(cfg.strategy, cfg.backoff, st.backoff_state)
            st.counter = sample_backoff(st.backoff_state, self.rng)
        self.t_us += self.tc_us
        self._deliver_arrivals()
        return SlotOutcome(SlotKind.COLLISION, tuple(st.id for st in colliders), self.tc_us, 0)

    def _resolve(self, contenders: list[Station]) -> SlotOutcome | None:
        ready = [st for st in contenders if st.counter == 0]
        if len(ready) == 1:
            return self._success(ready[0])
        if ready:
            return self._collision(ready)
        return None

    def advance(self) -> SlotOutcome:
        """Like :func:`step`, but a run of idle slots is consumed in one go.

        The jump stops at the first counter expiry, at the end of the slot in
        which the next packet arrives, at the warmup boundary and at the end of
        the run, so the trajectory is identical to repeated single steps.
        """
        contenders = self.contenders()
        outcome = self._resolve(contenders)
        if outcome is not None:
            return outcome
        slot = self.config.phy.slot_us
        t = self.t_us
        k = -(-(self.config.sim_time_us - t) // slot)
        if t < self.config.warmup_us:
            k = min(k, -(-(self.config.warmup_us - t) // slot))
        if contenders:
            k = min(k, min(st.counter for st in contenders))
        next_arrival = min(st.next_arrival_us for st in self.stations)
        if next_arrival != NEVER:
            k = min(k, (next_arrival - t) // slot + 1)
        return self._idle(max(k, 1), contenders)

    def metrics(self) -> RunMetrics:
        cfg = self.config
        out = self.collector.finish(
            self.t_us,
            cfg.phy.payload_bits,
            cfg.phy.channel_rate_bps,
            offered_load(cfg.n_stations, cfg.traffic.arrival_rate_pps, cfg.phy),
        )
        out.arrivals = self.arrivals
        out.deliveries = self.deliveries
        out.drops = self.drops
        out.queued = sum(len(st.queue) for st in self.stations)
        return out


def step(world: World) -> SlotOutcome:
    """Resolve one channel event: a single idle slot, a success or a collision."""
    contenders = world.contenders()
    outcome = world._resolve(contenders)
    if outcome is None:
        outcome = world._idle(1, contenders)
    return outcome


def run(config: SimConfig, *, fast: bool = True, trace: list | None = None) -> RunMetrics:
    """Simulate ``config`` up to ``sim_time_us`` and return post-warmup metrics.

    ``trace``, when given, receives every SlotOutcome in order.
    """
    world = World(config)
    advance = world.advance if fast else (lambda: step(world))
    while not world.done:
        outcome = advance()
        if trace is not None:
            trace.append(outcome)
    return world.metrics()
