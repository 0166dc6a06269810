import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import bisect

from dcfbackoff.analytic import (
    MODEL_LABEL,
    Equilibrium,
    EquilibriumNotConverged,
    StageProfile,
    analytic_saturation_throughput,
    analyze,
    heavy_stage_gap,
    mean_tau,
    r_heavy,
    r_light,
    solve_equilibrium,
    stage_profile,
)
from dcfbackoff.backoff import BackoffParams, StrategyKind
from dcfbackoff.phy import PhyParams

K = StrategyKind


def test_r_light():
    assert r_light(8) == 0.125
    assert r_light(1) == 1.0
    assert r_light(1024) == 1 / 1024
    with pytest.raises(ZeroDivisionError):
        r_light(0)


def test_r_heavy():
    assert r_heavy(3, 8) == pytest.approx(1 / 66)
    assert r_heavy(3, 8) == pytest.approx(0.015152, abs=1e-6)
    assert r_heavy(0, 8) == pytest.approx(1 / 10)
    assert r_heavy(6, 8) == pytest.approx(1 / 514)


def test_profile_invariants():
    prof = stage_profile(K.BEB, BackoffParams.default())
    assert prof.cw_by_stage == (8, 16, 32, 64, 128, 256, 512)
    assert prof.r_by_stage == tuple(1 / w for w in prof.cw_by_stage)
    with pytest.raises(ValueError):
        StageProfile((8,), (0.0,))
    with pytest.raises(ValueError):
        StageProfile((8, 16), (0.125,))


def test_dcbta_profile_uses_closed_form_on_heavy_stages():
    params = BackoffParams(8, 1 << 20, 9, 512)
    prof = stage_profile(K.DCBTA, params)
    for i, r in enumerate(prof.r_by_stage):
        if 2 ** i * 8 > 512:
            assert r == r_heavy(i, 8)
        else:
            assert r == 1 / prof.cw_by_stage[i]


def test_heavy_stage_gap_diagnostic():
    params = BackoffParams(8, 1 << 20, 9, 512)
    rows = heavy_stage_gap(params)
    assert [r["stage"] for r in rows] == [7, 8, 9]
    # stage 7 is reached by plain doubling of 512, which is not above the threshold
    assert (rows[0]["cw_recursive"], rows[0]["cw_closed_form"]) == (1024, 1026)
    # the first window produced by the heavy rule, 2 * 1024 + 2, equals the closed form
    assert rows[1]["cw_recursive"] == rows[1]["cw_closed_form"] == 2050
    assert rows[1]["abs_r_gap"] == 0
    # after that the +2 compounds
    assert (rows[2]["cw_recursive"], rows[2]["cw_closed_form"]) == (4102, 4098)
    assert rows[2]["abs_r_gap"] == pytest.approx(1 / 4098 - 1 / 4102)
    assert heavy_stage_gap(BackoffParams.default()) == []


def test_lone_station_equilibrium():
    prof = stage_profile(K.BEB, BackoffParams.default())
    eq = solve_equilibrium(prof, 1)
    assert eq.p_coll == 0.0
    assert eq.tau == prof.r_by_stage[0]


@pytest.mark.parametrize("w", [2, 16, 1024])
def test_single_stage_two_stations(w):
    eq = solve_equilibrium(StageProfile((w,), (1 / w,)), 2)
    assert eq.tau == pytest.approx(1 / w)
    assert eq.p_coll == pytest.approx(1 / w, abs=1e-9)
    assert eq.residual <= 1e-9


def composed(prof, n):
    return lambda p: p - (1 - (1 - mean_tau(prof, p)) ** (n - 1))


@pytest.mark.parametrize("kind", [K.BEB, K.DCBTA, K.MILD, K.LILD])
@pytest.mark.parametrize("n", [5, 50, 100])
def test_equilibrium_matches_bisection(kind, n):
    prof = stage_profile(kind, BackoffParams.default())
    eq = solve_equilibrium(prof, n)
    root = bisect(composed(prof, n), 0.0, 1.0, xtol=1e-13)
    assert eq.p_coll == pytest.approx(root, abs=1e-8)
    assert eq.residual <= 1e-9
    assert 0 <= eq.tau <= 1 and 0 <= eq.p_coll <= 1


def test_tau_is_monotone_in_p():
    prof = stage_profile(K.BEB, BackoffParams.default())
    taus = [mean_tau(prof, p) for p in np.linspace(0, 1, 201)]
    assert all(a >= b for a, b in zip(taus, taus[1:]))
    g = composed(prof, 50)
    vals = [g(p) for p in np.linspace(0, 1, 201)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_non_convergence_is_reported():
    prof = stage_profile(K.BEB, BackoffParams.default())
    with pytest.raises(EquilibriumNotConverged) as info:
        solve_equilibrium(prof, 50, tolerance=1e-15, max_iter=3)
    assert info.value.iterations == 3
    assert info.value.residual > 1e-15


def test_throughput_degenerate_cases():
    phy = PhyParams()
    assert analytic_saturation_throughput(Equilibrium(0.0, 0.0, 1, 0.0), 10, phy) == 0.0
    lone = analytic_saturation_throughput(Equilibrium(1.0, 0.0, 1, 0.0), 1, phy)
    assert lone == pytest.approx(8184 / 9412)
    assert lone == pytest.approx(0.8695, abs=1e-4)


@given(tau=st.floats(0, 1), n=st.integers(1, 200))
def test_throughput_bounded(tau, n):
    s = analytic_saturation_throughput(Equilibrium(tau, 0.0, 1, 0.0), n, PhyParams())
    assert 0.0 <= s <= 1.0


def test_analyze_is_labelled():
    out = analyze(K.DCBTA, 50)
    assert out["model"] == MODEL_LABEL and "reconstructed" in out["model"]
    assert 0 < out["throughput"] < 1
    assert math.isclose(out["p_coll"], 1 - (1 - out["tau"]) ** 49, abs_tol=1e-8)
