import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcfbackoff.backoff import (
    BackoffParams,
    BackoffState,
    ContractViolation,
    StrategyKind,
    on_collision,
    on_success,
    sample_backoff,
    stage_cw_table,
)

from oracles import chi_square_uniform

K = StrategyKind
TABLE1 = BackoffParams.default()


def collide(kind, cw, params=TABLE1):
    return on_collision(kind, params, BackoffState(cw)).cw


def succeed(kind, cw, params=TABLE1):
    return on_success(kind, params, BackoffState(cw)).cw


def test_default_params_follow_table1():
    assert TABLE1 == BackoffParams(8, 1024, 6, 512)
    assert BackoffParams.default(cw_max=2048).cw_threshold == 1024


@pytest.mark.parametrize("args", [(0, 16, 2, 8), (16, 8, 2, 8), (8, 16, 2, 4), (8, 16, 2, 32), (8, 16, -1, 8)])
def test_invalid_params_rejected(args):
    with pytest.raises(ContractViolation):
        BackoffParams(*args)


def test_dcbta_examples():
    assert collide(K.DCBTA, 256) == 512
    assert collide(K.DCBTA, 600, BackoffParams(8, 2048, 6, 512)) == 1202
    assert collide(K.DCBTA, 600) == 1024
    assert succeed(K.DCBTA, 100) == 99
    assert succeed(K.DCBTA, 600) == 598
    assert succeed(K.DCBTA, 8) == 8


def test_baseline_examples():
    assert collide(K.BEB, 8) == 16
    assert collide(K.MILD, 64) == 96
    assert collide(K.LILD, 64) == 72
    assert succeed(K.DIDD, 128) == 64


def test_dcbta_threshold_boundary_is_light():
    # cw == threshold takes the light rules on both events
    assert collide(K.DCBTA, 512, BackoffParams(8, 4096, 6, 512)) == 1024
    assert succeed(K.DCBTA, 512) == 511
    assert collide(K.DCBTA, 513, BackoffParams(8, 4096, 6, 512)) == 1028
    assert succeed(K.DCBTA, 513) == 511


def test_stage_tracking():
    s = BackoffState.initial(TABLE1)
    for expected in [1, 2, 3, 4, 5, 6, 6, 6]:
        s = on_collision(K.BEB, TABLE1, s)
        assert s.stage == expected
    assert on_success(K.MILD, TABLE1, s).stage == 0


@pytest.mark.parametrize("cw", [0, 7, 1025])
def test_out_of_range_state_is_contract_violation(cw):
    with pytest.raises(ContractViolation):
        on_collision(K.BEB, TABLE1, BackoffState(cw))
    with pytest.raises(ContractViolation):
        on_success(K.BEB, TABLE1, BackoffState(cw))


def test_bad_stage_is_contract_violation():
    with pytest.raises(ContractViolation):
        on_success(K.BEB, TABLE1, BackoffState(8, 7))


def test_strategy_parse():
    assert K.parse("dcbta") is K.DCBTA
    assert K.parse(K.ELBA) is K.ELBA
    with pytest.raises(ValueError, match="unknown strategy"):
        K.parse("aloha")


def test_stage_tables():
    assert stage_cw_table(K.BEB, TABLE1) == [8, 16, 32, 64, 128, 256, 512]
    assert stage_cw_table(K.DCBTA, TABLE1) == [8, 16, 32, 64, 128, 256, 512]
    big = BackoffParams(8, 2048, 7, 1024)
    assert stage_cw_table(K.DCBTA, big) == [8, 16, 32, 64, 128, 256, 512, 1024]
    # one more stage crosses into the heavy branch: 2 * 1024 + 2 clamps to 2048
    assert stage_cw_table(K.DCBTA, BackoffParams(8, 2048, 8, 1024))[-1] == 2048
    assert stage_cw_table(K.MILD, TABLE1) == [8, 12, 18, 27, 40, 60, 90]
    assert stage_cw_table(K.LILD, TABLE1) == [8, 16, 24, 32, 40, 48, 56]


def test_fixed_window_is_immovable():
    p = BackoffParams.fixed(16)
    for kind in K:
        assert collide(kind, 16, p) == 16
        assert succeed(kind, 16, p) == 16


def test_sample_backoff_singleton_and_range():
    rng = np.random.default_rng(1)
    assert all(sample_backoff(BackoffState(1), rng) == 0 for _ in range(50))
    draws = [sample_backoff(BackoffState(8), rng) for _ in range(40_000)]
    assert set(draws) == set(range(8))
    assert np.mean(draws) == pytest.approx(3.5, abs=0.05)
    assert isinstance(draws[0], int)


def test_sample_backoff_zero_window():
    with pytest.raises(ContractViolation):
        sample_backoff(BackoffState(0), np.random.default_rng(0))


def test_sample_backoff_chi_square_cw1024():
    rng = np.random.default_rng(2024)
    state = BackoffState(1024)
    draws = np.fromiter((sample_backoff(state, rng) for _ in range(1_000_000)), dtype=np.int64)
    assert draws.min() >= 0 and draws.max() <= 1023
    _, pvalue = chi_square_uniform(draws, 0, 1024, bins=16)
    assert pvalue > 0.01


def test_sample_backoff_deterministic():
    a = [sample_backoff(BackoffState(300), np.random.default_rng(9)) for _ in range(3)]
    b = [sample_backoff(BackoffState(300), np.random.default_rng(9)) for _ in range(3)]
    assert a == b


# ----------------------------------------------------------- properties

params_st = st.builds(
    lambda cw_min, extra, m, frac: BackoffParams(
        cw_min, cw_min + extra, m, cw_min + int(extra * frac)
    ),
    st.integers(1, 64), st.integers(0, 4032), st.integers(0, 10), st.floats(0, 1),
)


@settings(max_examples=200, deadline=None)
@given(kind=st.sampled_from(list(K)), params=params_st,
       events=st.lists(st.booleans(), min_size=1, max_size=300))
def test_reachable_states_stay_in_range(kind, params, events):
    s = BackoffState.initial(params)
    for collided in events:
        s = (on_collision if collided else on_success)(kind, params, s)
        assert params.cw_min <= s.cw <= params.cw_max
        assert 0 <= s.stage <= params.max_stage_m


def test_random_event_sequences_stay_in_range():
    rng = np.random.default_rng(7)
    for kind in K:
        for params in (TABLE1, BackoffParams.default(128), BackoffParams(3, 777, 4, 300)):
            s = BackoffState.initial(params)
            for collided in rng.random(10_000) < 0.5:
                s = (on_collision if collided else on_success)(kind, params, s)
                assert params.cw_min <= s.cw <= params.cw_max


@pytest.mark.parametrize("kind", list(K))
@pytest.mark.parametrize("params", [TABLE1, BackoffParams(8, 4096, 9, 2048), BackoffParams(5, 999, 3, 400)])
def test_pointwise_monotone_and_directional(kind, params):
    prev_c = prev_s = None
    for cw in range(params.cw_min, params.cw_max + 1):
        c, s = collide(kind, cw, params), succeed(kind, cw, params)
        assert c >= cw or c == params.cw_max
        assert s <= cw
        if prev_c is not None:
            assert c >= prev_c
            assert s >= prev_s
        prev_c, prev_s = c, s


def test_on_success_monotone_nonincreasing_output_direction():
    # repeated successes walk down to cw_min, repeated collisions up to cw_max
    for kind in K:
        s = BackoffState(TABLE1.cw_max)
        for _ in range(2000):
            s = on_success(kind, TABLE1, s)
        assert s.cw == TABLE1.cw_min
        for _ in range(2000):
            s = on_collision(kind, TABLE1, s)
        assert s.cw == TABLE1.cw_max


@given(cw=st.integers(8, 1024))
def test_dcbta_branch_selection(cw):
    wide = BackoffParams(8, 1 << 20, 6, 512)
    heavy = cw > 512
    assert collide(K.DCBTA, cw, wide) == (2 * cw + 2 if heavy else 2 * cw)
    assert succeed(K.DCBTA, cw) == max(cw - (2 if heavy else 1), 8)


@given(kind=st.sampled_from(list(K)), cw=st.integers(8, 1024), seed=st.integers(0, 2**32))
def test_determinism(kind, cw, seed):
    s = BackoffState(cw, 3)
    assert on_collision(kind, TABLE1, s) == on_collision(kind, TABLE1, s)
    assert (sample_backoff(s, np.random.default_rng(seed))
            == sample_backoff(s, np.random.default_rng(seed)))


def test_elba_crossover():
    assert collide(K.ELBA, 128) == 256
    assert collide(K.ELBA, 300) == 512
    assert collide(K.ELBA, 512) == 520
    assert collide(K.ELBA, 1020) == 1024
    assert succeed(K.ELBA, 700) == 8
