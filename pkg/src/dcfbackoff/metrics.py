"""Throughput and delay accounting.

The delay ledger splits measured channel time into four additive parts:
successful exchanges, collisions, idle slots in which at least one station
was counting down (backoff time), and idle slots with no backlogged station
at all (empty slots).  Average transmission delay is the ledger total divided
by the number of successful transmissions.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .backoff import ContractViolation


class UndefinedMetric(ArithmeticError):
    """A ratio metric was requested with a zero denominator."""


@dataclass
class DelayLedger:
    total_tx_time_us: int = 0
    total_collision_time_us: int = 0
    total_backoff_time_us: int = 0
    total_empty_slot_time_us: int = 0
    n_transmissions: int = 0
    n_collisions: int = 0

    def check(self, ts_us: int, tc_us: int) -> None:
        if any(v < 0 for v in asdict(self).values()):
            raise ContractViolation(f"negative ledger entry in {self}")
        if self.total_tx_time_us != self.n_transmissions * ts_us:
            raise ContractViolation("transmission time != n_transmissions * T_s")
        if self.total_collision_time_us != self.n_collisions * tc_us:
            raise ContractViolation("collision time != n_collisions * T_c")


def total_delay_us(ledger: DelayLedger) -> int:
    return (ledger.total_tx_time_us + ledger.total_collision_time_us
            + ledger.total_backoff_time_us + ledger.total_empty_slot_time_us)


def avg_transmission_delay_us(ledger: DelayLedger) -> float:
    if ledger.n_transmissions == 0:
        raise UndefinedMetric("average transmission delay needs at least one transmission")
    return total_delay_us(ledger) / ledger.n_transmissions


def normalized_throughput(delivered_payload_bits, span_us, channel_rate_bps) -> float:
    """Delivered payload as a fraction of raw channel capacity over ``span_us``."""
    if span_us <= 0:
        raise ContractViolation(f"span_us must be > 0, got {span_us}")
    s = delivered_payload_bits / (channel_rate_bps * span_us * 1e-6)
    if s > 1 + 1e-12:
        raise ContractViolation(f"normalized throughput {s} exceeds 1")
    return s


@dataclass
class RunMetrics:
    normalized_throughput: float
    avg_tx_delay_us: float
    avg_queue_delay_us: float
    collision_rate: float
    offered_load: float
    ledger: DelayLedger
    span_us: int
    n_attempts: int = 0
    n_collided_attempts: int = 0
    # whole-run packet bookkeeping, warmup included
    arrivals: int = 0
    deliveries: int = 0
    drops: int = 0
    queued: int = 0
    delay_samples_us: list[int] | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricsCollector:
    """Accumulates post-warmup channel events into a ledger."""

    ts_us: int
    tc_us: int
    slot_us: int
    keep_samples: bool = False
    ledger: DelayLedger = field(default_factory=DelayLedger)
    start_us: int | None = None
    n_attempts: int = 0
    n_collided_attempts: int = 0
    queue_delay_sum_us: int = 0
    samples: list[int] = field(default_factory=list)

    def open(self, t_us: int) -> None:
        if self.start_us is None:
            self.start_us = t_us

    def idle(self, n_slots: int, contended: bool) -> None:
        if contended:
            self.ledger.total_backoff_time_us += n_slots * self.slot_us
        else:
            self.ledger.total_empty_slot_time_us += n_slots * self.slot_us

    def success(self, delay_us: int) -> None:
        self.ledger.n_transmissions += 1
        self.ledger.total_tx_time_us += self.ts_us
        self.n_attempts += 1
        self.queue_delay_sum_us += delay_us
        if self.keep_samples:
            self.samples.append(delay_us)

    def collision(self, n_colliders: int) -> None:
        self.ledger.n_collisions += 1
        self.ledger.total_collision_time_us += self.tc_us
        self.n_attempts += n_colliders
        self.n_collided_attempts += n_colliders

    def finish(self, end_us: int, payload_bits: int, channel_rate_bps: int,
               offered_load: float) -> RunMetrics:
        self.ledger.check(self.ts_us, self.tc_us)
        start = end_us if self.start_us is None else self.start_us
        span = end_us - start
        n_tx = self.ledger.n_transmissions
        return RunMetrics(
            normalized_throughput=(
                normalized_throughput(n_tx * payload_bits, span, channel_rate_bps)
                if span > 0 else 0.0
            ),
            avg_tx_delay_us=avg_transmission_delay_us(self.ledger) if n_tx else math.nan,
            avg_queue_delay_us=self.queue_delay_sum_us / n_tx if n_tx else math.nan,
            collision_rate=(
                self.n_collided_attempts / self.n_attempts if self.n_attempts else 0.0
            ),
            offered_load=offered_load,
            ledger=self.ledger,
            span_us=span,
            n_attempts=self.n_attempts,
            n_collided_attempts=self.n_collided_attempts,
            delay_samples_us=list(self.samples) if self.keep_samples else None,
        )
