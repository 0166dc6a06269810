"""Contention-window update rules for DCF backoff strategies.

Every strategy is a pair of pure functions ``(cw, params) -> cw'``, one applied
after a collision and one after a successful exchange.  All arithmetic is
integer and results are clamped to ``[cw_min, cw_max]``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np


class ContractViolation(ValueError):
    """Raised when a value breaks a documented invariant."""


class StrategyKind(str, enum.Enum):
    BEB = "BEB"
    MILD = "MILD"
    LILD = "LILD"
    EIED = "EIED"
    DIDD = "DIDD"
    ELBA = "ELBA"
    DCBTA = "DCBTA"

    @classmethod
    def parse(cls, value: "str | StrategyKind") -> "StrategyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown strategy {value!r} (expected one of {names})") from None


@dataclass(frozen=True)
class BackoffParams:
    cw_min: int = 8
    cw_max: int = 1024
    max_stage_m: int = 6
    cw_threshold: int = 512

    def __post_init__(self):
        if not 1 <= self.cw_min <= self.cw_threshold <= self.cw_max:
            raise ContractViolation(
                "need 1 <= cw_min <= cw_threshold <= cw_max, got "
                f"cw_min={self.cw_min}, cw_threshold={self.cw_threshold}, cw_max={self.cw_max}"
            )
        if self.max_stage_m < 0:
            raise ContractViolation(f"max_stage_m must be >= 0, got {self.max_stage_m}")

    @classmethod
    def default(cls, cw_min: int = 8, cw_max: int = 1024, max_stage_m: int = 6) -> "BackoffParams":
        """Build parameters with the threshold at half of ``cw_max``."""
        return cls(cw_min, cw_max, max_stage_m, cw_max // 2)

    @classmethod
    def fixed(cls, cw: int) -> "BackoffParams":
        """A degenerate window that no strategy can move (cw_min == cw_max)."""
        return cls(cw, cw, 0, cw)


@dataclass(frozen=True)
class BackoffState:
    cw: int
    stage: int = 0

    @classmethod
    def initial(cls, params: BackoffParams) -> "BackoffState":
        return cls(params.cw_min, 0)

    def check(self, params: BackoffParams) -> None:
        if not params.cw_min <= self.cw <= params.cw_max:
            raise ContractViolation(
                f"cw={self.cw} outside [{params.cw_min}, {params.cw_max}]"
            )
        if not 0 <= self.stage <= params.max_stage_m:
            raise ContractViolation(
                f"stage={self.stage} outside [0, {params.max_stage_m}]"
            )


Rule = Callable[[int, BackoffParams], int]


def _double(cw, p):
    return 2 * cw


def _reset(cw, p):
    return p.cw_min


def _halve(cw, p):
    return cw // 2


def _minus_one(cw, p):
    return cw - 1


def _elba_grow(cw, p):
    # exponential up to the threshold, linear beyond it; the cap keeps the rule monotone
    return min(2 * cw, p.cw_threshold) if cw < p.cw_threshold else cw + p.cw_min


def _dcbta_grow(cw, p):
    return 2 * cw if cw <= p.cw_threshold else 2 * cw + 2


def _dcbta_shrink(cw, p):
    return cw - 1 if cw <= p.cw_threshold else cw - 2


# (on_collision, on_success) per strategy, before clamping
RULES: dict[StrategyKind, tuple[Rule, Rule]] = {
    StrategyKind.BEB: (_double, _reset),
    StrategyKind.MILD: (lambda cw, p: (3 * cw) // 2, _minus_one),
    StrategyKind.LILD: (lambda cw, p: cw + p.cw_min, lambda cw, p: cw - p.cw_min),
    StrategyKind.EIED: (_double, _halve),
    StrategyKind.DIDD: (_double, _halve),
    StrategyKind.ELBA: (_elba_grow, _reset),
    StrategyKind.DCBTA: (_dcbta_grow, _dcbta_shrink),
}


def on_collision(kind: StrategyKind, params: BackoffParams, state: BackoffState) -> BackoffState:
    """Window after an unsuccessful transmission; never smaller than before."""
    state.check(params)
    grow, _ = RULES[StrategyKind.parse(kind)]
    cw = max(min(grow(state.cw, params), params.cw_max), params.cw_min)
    return BackoffState(cw, min(state.stage + 1, params.max_stage_m))


def on_success(kind: StrategyKind, params: BackoffParams, state: BackoffState) -> BackoffState:
    """Window after a successful exchange; never larger than before. Resets the stage."""
    state.check(params)
    _, shrink = RULES[StrategyKind.parse(kind)]
    cw = min(max(shrink(state.cw, params), params.cw_min), params.cw_max)
    return BackoffState(cw, 0)


def sample_backoff(state: BackoffState, rng: np.random.Generator) -> int:
    """Draw a backoff counter uniformly from ``{0, ..., cw - 1}``."""
    if state.cw < 1:
        raise ContractViolation(f"cannot sample from cw={state.cw}")
    return int(rng.integers(state.cw))


def stage_cw_table(kind: StrategyKind, params: BackoffParams) -> list[int]:
    """Windows reached from ``cw_min`` by 0, 1, ..., max_stage_m consecutive collisions."""
    state = BackoffState.initial(params)
    table = [state.cw]
    for _ in range(params.max_stage_m):
        state = on_collision(kind, params, state)
        table.append(state.cw)
    return table

