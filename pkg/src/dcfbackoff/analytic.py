"""Closed-form transmission probabilities and a mean-value equilibrium estimate.

This is a reconstructed saturated fixed-point model, not the full unsaturated
equilibrium-point analysis: it weights per-stage transmission probabilities
with a truncated geometric stage distribution and couples them to the
collision probability seen by one station among ``n``.  It is used as a
coarse cross-check of simulator throughput, nothing more.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backoff import BackoffParams, StrategyKind, stage_cw_table
from .phy import PhyParams, tx_time_collision_us, tx_time_success_us

MODEL_LABEL = "reconstructed mean-value equilibrium (saturated)"


class EquilibriumNotConverged(RuntimeError):
    def __init__(self, tau, p_coll, iterations, residual):
        super().__init__(
            f"no fixed point after {iterations} iterations: "
            f"p={p_coll:.6g}, tau={tau:.6g}, residual={residual:.3g}"
        )
        self.tau = tau
        self.p_coll = p_coll
        self.iterations = iterations
        self.residual = residual


def r_light(cw_i: int) -> float:
    """Per-slot transmission probability 1 / CW_i."""
    if cw_i < 1:
        raise ZeroDivisionError(f"transmission probability undefined for cw={cw_i}")
    return 1.0 / cw_i


def r_heavy(stage_i: int, cw_min: int) -> float:
    """Heavy-load transmission probability 1 / (2**i * CW_min + 2)."""
    return 1.0 / (2 ** stage_i * cw_min + 2)


@dataclass(frozen=True)
class StageProfile:
    cw_by_stage: tuple[int, ...]
    r_by_stage: tuple[float, ...]

    def __post_init__(self):
        if not self.r_by_stage or len(self.r_by_stage) != len(self.cw_by_stage):
            raise ValueError("profile needs one probability per stage")
        if any(not 0.0 < r <= 1.0 for r in self.r_by_stage):
            raise ValueError(f"stage probabilities must lie in (0, 1]: {self.r_by_stage}")


def stage_profile(kind: StrategyKind, params: BackoffParams) -> StageProfile:
    """Collision-only window trajectory and its per-stage probabilities.

    For DCBTA, stages whose window 2**i * CW_min exceeds the threshold use
    the heavy-load closed form; every other stage uses 1 / CW_i.
    """
    cws = stage_cw_table(kind, params)
    rs = []
    for i, cw in enumerate(cws):
        if StrategyKind.parse(kind) is StrategyKind.DCBTA and 2 ** i * params.cw_min > params.cw_threshold:
            rs.append(r_heavy(i, params.cw_min))
        else:
            rs.append(r_light(cw))
    return StageProfile(tuple(cws), tuple(rs))


def heavy_stage_gap(params: BackoffParams) -> list[dict]:
    """Compare the recursive DCBTA window with the closed form on heavy stages.

    Returns one record per stage with ``2**i * cw_min > cw_threshold``.
    """
    cws = stage_cw_table(StrategyKind.DCBTA, params)
    rows = []
    for i, cw in enumerate(cws):
        if 2 ** i * params.cw_min > params.cw_threshold:
            closed = 2 ** i * params.cw_min + 2
            rows.append({
                "stage": i,
                "cw_recursive": cw,
                "cw_closed_form": closed,
                "abs_r_gap": abs(r_heavy(i, params.cw_min) - 1.0 / cw),
            })
    return rows


def mean_tau(profile: StageProfile, p: float) -> float:
    """Transmission probability averaged over the time spent in each stage.

    Stage i is entered with relative frequency p**i (truncated at the last
    stage) and occupied for 1 / r_i slots on average, so the time-occupancy
    weight of r_i is p**i / r_i.
    """
    r = np.asarray(profile.r_by_stage)
    visits = p ** np.arange(len(r))
    occupancy = visits / r
    return float(occupancy @ r / occupancy.sum())


@dataclass(frozen=True)
class Equilibrium:
    tau: float
    p_coll: float
    iterations: int
    residual: float


def solve_equilibrium(profile: StageProfile, n: int, tolerance: float = 1e-9,
                      max_iter: int = 10_000, damping: float = 0.5) -> Equilibrium:
    """Damped fixed-point iteration on p = 1 - (1 - tau(p))**(n - 1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p = 0.0
    for it in range(1, max_iter + 1):
        tau = mean_tau(profile, p)
        target = 1.0 - (1.0 - tau) ** (n - 1)
        residual = abs(p - target)
        if residual <= tolerance:
            return Equilibrium(tau, p, it, residual)
        p = (1.0 - damping) * p + damping * target
    tau = mean_tau(profile, p)
    raise EquilibriumNotConverged(tau, p, max_iter, abs(p - (1.0 - (1.0 - tau) ** (n - 1))))


def analytic_saturation_throughput(eq: Equilibrium, n: int, phy: PhyParams) -> float:
    """Normalized throughput from the per-slot idle/success/collision split."""
    tau = eq.tau
    p_tr = 1.0 - (1.0 - tau) ** n
    p_succ = n * tau * (1.0 - tau) ** (n - 1)
    p_coll = p_tr - p_succ
    p_idle = 1.0 - p_tr
    if p_succ == 0.0:
        return 0.0
    denom = (p_idle * phy.slot_us + p_succ * tx_time_success_us(phy)
             + p_coll * tx_time_collision_us(phy))
    return p_succ * phy.payload_time_us / denom


def analyze(kind: StrategyKind, n: int, params: BackoffParams | None = None,
            phy: PhyParams | None = None) -> dict:
    """Profile, equilibrium and throughput in one labelled record."""
    params = params or BackoffParams.default()
    phy = phy or PhyParams()
    profile = stage_profile(kind, params)
    eq = solve_equilibrium(profile, n)
    return {
        "model": MODEL_LABEL,
        "strategy": StrategyKind.parse(kind).value,
        "n": n,
        "cw_min": params.cw_min,
        "cw_max": params.cw_max,
        "m": params.max_stage_m,
        "cw_by_stage": list(profile.cw_by_stage),
        "r_by_stage": list(profile.r_by_stage),
        "tau": eq.tau,
        "p_coll": eq.p_coll,
        "iterations": eq.iterations,
        "residual": eq.residual,
        "throughput": analytic_saturation_throughput(eq, n, phy),
    }
