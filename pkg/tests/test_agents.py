import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fgts_cdb.agents import (
    CoLSTIMAgent,
    EstimationError,
    FGTSAgent,
    MaxInPAgent,
    MaxPairUCBAgent,
    SequencingError,
    VACDBAgent,
    colstim_challenger,
    colstim_select,
    covariance_update,
    fit_logistic,
    maxinp_active_set,
    maxinp_select,
    maxpairucb_scores,
    maxpairucb_select,
    mle_estimate,
)
from fgts_cdb.agents.mle import logistic_gradient
from fgts_cdb.core import DuelingRecord
from fgts_cdb.env import BanditInstance, generate_instance, per_round_regret
from fgts_cdb.harness.validate import brute_colstim_challenger, brute_maxinp, brute_maxpairucb
from fgts_cdb.posterior import DuelStats, SgldConfig


def random_state(rng, d=5, K=32, n=30):
    arms = np.where(rng.random((K, d)) < 0.5, -1.0, 1.0)
    theta = rng.standard_normal(d)
    sigma = 0.001 * np.eye(d)
    for _ in range(n):
        a, b = rng.integers(0, K, size=2)
        sigma = covariance_update(sigma, arms[a], arms[b])
    return theta, np.linalg.inv(sigma), arms


# --- selectors against brute force -------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_maxpairucb_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    theta, sinv, arms = random_state(rng)
    beta = float(rng.choice([0.01, 0.1, 1.0, 10.0]))
    assert maxpairucb_select(theta, sinv, arms, beta) == brute_maxpairucb(theta, sinv, arms, beta)


@pytest.mark.parametrize("seed", range(10))
def test_maxinp_matches_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    theta, sinv, arms = random_state(rng)
    beta = float(rng.choice([0.01, 0.1, 1.0, 10.0]))
    assert maxinp_select(theta, sinv, arms, beta) == brute_maxinp(theta, sinv, arms, beta)


@pytest.mark.parametrize("seed", range(10))
def test_colstim_challenger_matches_enumeration(seed):
    rng = np.random.default_rng(200 + seed)
    theta, sinv, arms = random_state(rng)
    first = int(rng.integers(0, 32))
    assert colstim_challenger(theta, sinv, arms, 1.0, first) == brute_colstim_challenger(theta, sinv, arms, 1.0, first)


def test_maxinp_two_arms():
    arms = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert maxinp_select(np.zeros(2), np.eye(2), arms, 1.0) in {(0, 1), (1, 0)}


def test_maxinp_large_beta_picks_farthest_pair():
    rng = np.random.default_rng(3)
    arms = rng.standard_normal((12, 4))
    theta = rng.standard_normal(4)
    assert maxinp_active_set(theta, np.eye(4), arms, 1e6).all()
    x, y = maxinp_select(theta, np.eye(4), arms, 1e6)
    dist = max(np.linalg.norm(arms[a] - arms[b]) for a, b in itertools.product(range(12), repeat=2))
    assert np.linalg.norm(arms[x] - arms[y]) == pytest.approx(dist, rel=1e-12)


def test_maxinp_beta_zero_is_best_best():
    rng = np.random.default_rng(4)
    theta, sinv, arms = random_state(rng, K=16)
    best = int(np.argmax(arms @ theta))
    assert maxinp_active_set(theta, sinv, arms, 0.0).sum() == 1
    assert maxinp_select(theta, sinv, arms, 0.0) == (best, best)


def test_maxpairucb_beta_zero_is_best_best():
    rng = np.random.default_rng(5)
    theta, sinv, arms = random_state(rng)
    best = int(np.argmax(arms @ theta))
    assert maxpairucb_select(theta, sinv, arms, 0.0) == (best, best)


def test_maxpairucb_scores_symmetric():
    rng = np.random.default_rng(6)
    theta, sinv, arms = random_state(rng)
    s = maxpairucb_scores(theta, sinv, arms, 2.0)
    assert np.array_equal(s, s.T)


def test_colstim_zero_scale_and_zero_beta():
    rng = np.random.default_rng(7)
    theta, sinv, arms = random_state(rng)
    best = int(np.argmax(arms @ theta))
    a1, _ = colstim_select(rng, theta, sinv, arms, 1.0, 0.0)
    assert a1 == best
    for _ in range(20):
        _, a2 = colstim_select(rng, theta, sinv, arms, 0.0, 5.0)
        assert a2 == best


# --- FGTS --------------------------------------------------------------------

def _fgts(sampler=None, seeds=(1, 2), **kw):
    rngs = [np.random.default_rng(s) for s in seeds]
    return FGTSAgent(5, rngs, sampler=sampler, **kw)


def test_oracle_sampler_has_zero_regret():
    inst = generate_instance(0, 5, 32)
    agent = _fgts(sampler=lambda j, rng, init, t: inst.theta_star)
    a1, a2 = agent.select(inst.arms, 1)
    assert a1 == a2 == inst.best_arm()
    assert per_round_regret(inst, a1, a2) == 0.0


def test_zero_sampler_ties_to_index_zero():
    inst = generate_instance(0, 5, 32)
    agent = _fgts(sampler=lambda j, rng, init, t: np.zeros(5))
    assert agent.select(inst.arms, 1) == (0, 0)


@pytest.mark.parametrize("mu", [0.0, 0.3])
def test_swapping_chain_seeds_swaps_arms(mu):
    # at round 1 the two chain targets coincide, so only the seeds differ
    inst = generate_instance(1, 5, 32)
    x = _fgts(seeds=(11, 12), mu=mu).select(inst.arms, 1)
    y = _fgts(seeds=(12, 11), mu=mu).select(inst.arms, 1)
    assert x == y[::-1]


def test_swapping_chain_seeds_swaps_arms_without_feel_good_later():
    inst = generate_instance(1, 5, 32)
    agents = [_fgts(seeds=(11, 12)), _fgts(seeds=(12, 11))]
    recs = [DuelingRecord(1, 3, 7, 1), DuelingRecord(2, 7, 3, -1), DuelingRecord(3, 0, 9, 1)]
    for rec in recs:
        for ag in agents:
            ag.select(inst.arms, rec.round)
            ag.update(rec, inst.arms)
    x, y = (ag.select(inst.arms, 4) for ag in agents)
    assert x == y[::-1]


def _history_agent(seeds, inst):
    agent = _fgts(seeds=seeds, mu=0.5)
    rng = np.random.default_rng(99)
    for t in range(1, 21):
        agent.select(inst.arms, t)
        a, b = (int(v) for v in rng.integers(0, inst.K, size=2))
        agent.update(DuelingRecord(t, a, b, int(rng.choice([-1, 1]))), inst.arms)
    return agent


def test_chain_independence():
    inst = generate_instance(2, 5, 32)
    first = {_history_agent((5, s), inst).select(inst.arms, 21)[0] for s in range(100)}
    assert len(first) == 1


def test_fgts_warm_start_records_samples():
    inst = generate_instance(3, 5, 32)
    seen = []

    def sampler(j, rng, init, t):
        seen.append(init.copy())
        return np.full(5, float(t))

    agent = _fgts(sampler=sampler)
    agent.select(inst.arms, 1)
    agent.update(DuelingRecord(1, 0, 1, 1), inst.arms)
    agent.select(inst.arms, 2)
    assert np.array_equal(seen[0], np.zeros(5)) and np.array_equal(seen[2], np.ones(5))

    seen.clear()
    cold = _fgts(sampler=sampler, sgld=SgldConfig(warm_start=False))
    cold.select(inst.arms, 1)
    cold.update(DuelingRecord(1, 0, 1, 1), inst.arms)
    cold.select(inst.arms, 2)
    assert all(np.array_equal(s, np.zeros(5)) for s in seen)


# --- MLE and covariance ------------------------------------------------------

def test_mle_empty_history_is_zero():
    inst = generate_instance(0, 5, 32)
    assert np.array_equal(mle_estimate([], inst, 0.001), np.zeros(5))


def test_mle_contradicting_pairs_give_zero():
    inst = generate_instance(0, 5, 32)
    hist, t = [], 1
    for a, b in [(1, 2), (4, 9), (0, 31)]:
        hist += [DuelingRecord(t, a, b, 1), DuelingRecord(t + 1, a, b, -1)]
        t += 2
    assert np.allclose(mle_estimate(hist, inst, 0.001), 0.0, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_mle_first_order_optimality(seed):
    rng = np.random.default_rng(seed)
    inst = generate_instance(seed, 5, 32)
    hist = [DuelingRecord(t, int(rng.integers(32)), int(rng.integers(32)), int(rng.choice([-1, 1])))
            for t in range(1, 201)]
    theta = mle_estimate(hist, inst, 0.001)
    stats = DuelStats.from_history(hist, inst)
    assert np.linalg.norm(logistic_gradient(theta, stats.diffs, stats.weights, 0.001)) < 1e-8


def test_mle_separable_data_still_converges():
    inst = generate_instance(0, 5, 32)
    best = inst.best_arm()
    hist = [DuelingRecord(t, best, (t % 31) + (t % 31 >= best), 1) for t in range(1, 60)]
    mle_estimate(hist, inst, 0.001)


def test_newton_objective_is_monotone():
    rng = np.random.default_rng(8)
    diffs = rng.standard_normal((150, 5)) * 2
    trace = []
    fit_logistic(diffs, np.ones(150), 0.001, trace=trace)
    assert len(trace) >= 2
    for before, after in zip(trace, trace[1:]):
        assert after <= before + 1e-12 * max(1.0, abs(before))


def test_estimation_error_carries_residual():
    err = EstimationError(3e-5, 100)
    assert err.residual == 3e-5 and "3.000e-05" in str(err)


def test_covariance_update_cases():
    sigma = 0.001 * np.eye(4)
    phi = np.array([1.0, -1.0, 1.0, 1.0])
    assert np.array_equal(covariance_update(sigma, phi, phi), sigma)
    other = np.array([-1.0, -1.0, 1.0, -1.0])
    delta = phi - other
    eig = np.sort(np.linalg.eigvalsh(covariance_update(sigma, phi, other)))
    assert np.allclose(eig, sorted([0.001 + delta @ delta, 0.001, 0.001, 0.001]), rtol=1e-12, atol=1e-15)


def test_covariance_determinant_nondecreasing():
    rng = np.random.default_rng(9)
    arms = np.where(rng.random((16, 4)) < 0.5, -1.0, 1.0)
    sigma = 0.001 * np.eye(4)
    det = np.linalg.det(sigma)
    for _ in range(40):
        a, b = rng.integers(0, 16, size=2)
        sigma = covariance_update(sigma, arms[a], arms[b])
        nxt = np.linalg.det(sigma)
        assert nxt >= det * (1 - 1e-12)
        det = nxt


# --- VACDB -------------------------------------------------------------------

def test_vacdb_round_one_is_maxpairucb():
    inst = generate_instance(4, 5, 32)
    agent = VACDBAgent(5, 32, beta=0.5)
    expected = maxpairucb_select(np.zeros(5), np.eye(5) / 0.001, inst.arms, 0.5)
    assert agent.select(inst.arms, 1) == expected


def test_vacdb_dominance_rule():
    arms = np.array([[1.0, 0.0], [0.0, 0.0], [-1.0, 0.0]])
    agent = VACDBAgent(2, 3, beta=1.0, elim_factor=2.0)
    agent.layers[0].theta = np.array([1.0, 0.0])
    # margin at the first layer is 2 * 1 * 0.5 = 1
    kept = agent.eliminate(0, np.ones(3, dtype=bool), arms)
    assert kept.tolist() == [True, True, False]
    # an already eliminated arm stays out even if it would qualify
    kept = agent.eliminate(0, np.array([True, False, True]), arms)
    assert kept.tolist() == [True, False, False]


def test_vacdb_survivors_only_shrink():
    inst = generate_instance(6, 5, 32)
    agent = VACDBAgent(5, 32, beta=0.1)
    # a confident, well-informed first layer so elimination fires from round 1
    agent.layers[0].sigma_inv = 1e-6 * np.eye(5)
    agent.layers[0].theta = 10 * inst.theta_star
    rng = np.random.default_rng(0)
    prev = [layer.alive.copy() for layer in agent.layers]
    from fgts_cdb.env import sample_preference
    for t in range(1, 301):
        a1, a2 = agent.select(inst.arms, t)
        agent.update(DuelingRecord(t, a1, a2, sample_preference(rng, inst, a1, a2)), inst.arms)
        for layer, old in zip(agent.layers, prev):
            assert not np.any(layer.alive & ~old)
        prev = [layer.alive.copy() for layer in agent.layers]
    assert prev[1].sum() < 32


# --- interface contract ------------------------------------------------------

def _all_agents(d=5, K=32, seed=0):
    return [
        _fgts(seeds=(seed, seed + 1), mu=0.1),
        MaxInPAgent(d),
        MaxPairUCBAgent(d),
        CoLSTIMAgent(d, np.random.default_rng(seed)),
        VACDBAgent(d, K),
    ]


@pytest.mark.parametrize("idx", range(5))
def test_sequencing_errors(idx):
    inst = generate_instance(0, 5, 32)
    agent = _all_agents()[idx]
    with pytest.raises(SequencingError):
        agent.select(inst.arms, 2)
    agent.select(inst.arms, 1)
    with pytest.raises(SequencingError):
        agent.update(DuelingRecord(2, 0, 1, 1), inst.arms)


@pytest.mark.parametrize("idx", range(5))
def test_single_arm_set(idx):
    inst = BanditInstance(np.array([0.6, 0.8]), np.array([[1.0, -1.0]]))
    agent = _all_agents(d=2, K=1)[idx]
    assert agent.select(inst.arms, 1) == (0, 0)
    assert per_round_regret(inst, 0, 0) == 0.0


def _play(agent, inst, T, seed, replay=None):
    rng = np.random.default_rng(seed)
    from fgts_cdb.env import sample_preference
    picks, recs = [], []
    for t in range(1, T + 1):
        a1, a2 = agent.select(inst.arms, t)
        y = replay[t - 1].preference if replay else sample_preference(rng, inst, a1, a2)
        rec = DuelingRecord(t, a1, a2, y)
        agent.update(rec, inst.arms)
        picks.append((a1, a2))
        recs.append(rec)
    return picks, recs


@pytest.mark.parametrize("idx", range(5))
def test_determinism_and_replay(idx):
    inst = generate_instance(7, 5, 32)
    p1, recs = _play(_all_agents()[idx], inst, 40, 3)
    p2, _ = _play(_all_agents()[idx], inst, 40, 3)
    p3, _ = _play(_all_agents()[idx], inst, 40, 3, replay=recs)
    assert p1 == p2 == p3


@given(st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_selections_are_valid_indices(seed):
    rng = np.random.default_rng(seed)
    theta, sinv, arms = random_state(rng, K=8, d=3)
    for sel in (maxinp_select(theta, sinv, arms, 1.0), maxpairucb_select(theta, sinv, arms, 1.0),
                colstim_select(rng, theta, sinv, arms, 1.0, 1.0)):
        assert all(0 <= a < 8 for a in sel)


def test_roundoff_ties_go_to_lowest_pair():
    # every antipodal pair has reward sum 0 and the same width under a multiple of I
    arms = np.array([[-1.0, 1, -1], [1.0, 1, 1], [1.0, -1, 1], [-1.0, -1, -1]])
    sinv = np.eye(3) / 0.001 * (1 + 1e-15)
    theta = np.array([0.3, 0.0, -0.7])
    assert maxpairucb_select(theta, sinv, arms, 10.0) == (0, 2)
    assert maxinp_select(theta, sinv, arms, 1e4) == (0, 2)
