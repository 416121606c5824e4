import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fgts_cdb.env import (
    BanditInstance,
    FeatureConvention,
    InvalidConfigurationError,
    RegretTrace,
    generate_instance,
    per_round_regret,
    regret_decomposition_check,
    sample_preference,
)


@pytest.mark.parametrize("seed", [0, 1, 17, 2 ** 31])
def test_theta_star_unit_norm(seed):
    inst = generate_instance(seed, 10, 32)
    assert abs(np.linalg.norm(inst.theta_star) - 1.0) <= 1e-12


def test_d5_k32_exhausts_the_cube():
    inst = generate_instance(3, 5, 32)
    all_signs = {tuple(v) for v in itertools.product([-1.0, 1.0], repeat=5)}
    assert {tuple(a) for a in inst.arms} == all_signs


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 9), st.integers(1, 40))
@settings(max_examples=50, deadline=None)
def test_arms_distinct_sign_vectors(seed, d, K):
    K = min(K, 2 ** d)
    inst = generate_instance(seed, d, K)
    assert inst.arms.shape == (K, d)
    assert set(np.unique(inst.arms)) <= {-1.0, 1.0}
    assert len({a.tobytes() for a in inst.arms}) == K


def test_same_seed_is_bitwise_identical():
    a, b = generate_instance(42, 15, 32), generate_instance(42, 15, 32)
    assert a.theta_star.tobytes() == b.theta_star.tobytes()
    assert a.arms.tobytes() == b.arms.tobytes()
    assert a.fingerprint() == b.fingerprint()


def test_too_many_arms_rejected():
    with pytest.raises(InvalidConfigurationError):
        generate_instance(0, 3, 9)


def test_unit_convention_scales_rows():
    raw = generate_instance(5, 10, 32, "raw")
    unit = generate_instance(5, 10, 32, FeatureConvention.UNIT_NORMALIZED)
    assert np.allclose(np.linalg.norm(unit.arms, axis=1), 1.0)
    assert np.allclose(unit.arms * math.sqrt(10), raw.arms)


def test_instance_is_read_only():
    inst = generate_instance(0, 4, 8)
    with pytest.raises(ValueError):
        inst.arms[0, 0] = 3.0


def _freq(inst, a1, a2, n=100_000, seed=0):
    rng = np.random.default_rng(seed)
    return sum(sample_preference(rng, inst, a1, a2) == 1 for _ in range(n)) / n


def test_identical_arms_are_a_coin_flip():
    inst = generate_instance(0, 5, 32)
    assert abs(_freq(inst, 4, 4) - 0.5) <= 0.01


def test_ln3_gap_wins_three_quarters():
    inst = BanditInstance(np.array([1.0, 0.0]), np.array([[math.log(3), 1.0], [0.0, -1.0]]))
    assert abs(_freq(inst, 0, 1) - 0.75) <= 0.01


def test_preference_stream_is_reproducible():
    inst = generate_instance(0, 5, 32)
    r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
    seq1 = [sample_preference(r1, inst, 1, 2) for _ in range(200)]
    seq2 = [sample_preference(r2, inst, 1, 2) for _ in range(200)]
    assert seq1 == seq2


def test_regret_of_optimal_pair_is_zero():
    inst = generate_instance(1, 6, 20)
    best = inst.best_arm()
    assert per_round_regret(inst, best, best) == 0.0


def test_regret_best_worst_is_half_gap():
    arms = np.array([[1.0, 1.0, -1.0], [-1.0, 1.0, -1.0]])
    inst = BanditInstance(np.array([1.0, 0.0, 0.0]), arms)
    assert per_round_regret(inst, 0, 1) == pytest.approx(1.0, abs=1e-15)


def test_regret_nonnegative_exhaustive():
    inst = generate_instance(2, 3, 8)
    for a1, a2 in itertools.product(range(8), repeat=2):
        assert per_round_regret(inst, a1, a2) >= 0


def test_decomposition_true_model():
    inst = generate_instance(4, 5, 32)
    best = inst.best_arm()
    assert regret_decomposition_check(inst, inst.theta_star, inst.theta_star, best, best) <= 1e-12


def test_decomposition_random_parameters():
    rng = np.random.default_rng(7)
    inst = generate_instance(8, 5, 32)
    for _ in range(50):
        th1, th2 = rng.standard_normal((2, 5))
        a1, a2 = int(np.argmax(inst.arms @ th1)), int(np.argmax(inst.arms @ th2))
        assert regret_decomposition_check(inst, th1, th2, a1, a2) < 1e-10


def test_decomposition_reports_violated_precondition():
    inst = generate_instance(8, 5, 32)
    th = inst.theta_star
    worst = int(np.argmin(inst.arms @ th))
    # a1 is not the argmax under theta1, so the identity has no reason to hold
    assert regret_decomposition_check(inst, th, th, worst, inst.best_arm()) > 1e-3


def test_regret_trace_cumulative():
    tr = RegretTrace(np.array([0.5, 0.0, 1.25]))
    assert np.allclose(tr.cumulative, [0.5, 0.5, 1.75])
    assert not tr.failed and len(tr) == 3
