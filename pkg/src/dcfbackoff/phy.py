"""PHY/MAC timing constants (microseconds) and RTS/CTS exchange durations."""
from __future__ import annotations

from dataclasses import dataclass, fields

from .backoff import ContractViolation


@dataclass(frozen=True)
class PhyParams:
    payload_bits: int = 8184
    data_duration_us: int = 8200
    channel_rate_bps: int = 1_000_000
    slot_us: int = 50
    difs_us: int = 128
    sifs_us: int = 28
    ack_timeout_us: int = 300
    rts_us: int = 350
    cts_us: int = 350
    # no ACK length is given alongside the other constants; reuse the timeout
    ack_us: int = 300

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ContractViolation(f"{f.name} must be an integer, got {value!r}")
            if value <= 0:
                raise ContractViolation(f"{f.name} must be > 0, got {value}")
        if self.sifs_us >= self.difs_us:
            raise ContractViolation(
                f"sifs_us ({self.sifs_us}) must be shorter than difs_us ({self.difs_us})"
            )

    @property
    def payload_time_us(self) -> float:
        return self.payload_bits * 1e6 / self.channel_rate_bps


def tx_time_success_us(phy) -> int:
    """RTS + SIFS + CTS + SIFS + DATA + SIFS + ACK + DIFS."""
    return (phy.rts_us + phy.sifs_us + phy.cts_us + phy.sifs_us
            + phy.data_duration_us + phy.sifs_us + phy.ack_us + phy.difs_us)


def tx_time_collision_us(phy) -> int:
    """Channel time lost to a collided RTS, followed by DIFS."""
    return phy.rts_us + phy.difs_us
