import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from capbayes.agents import (
    BLASTS, LINEAR_REGRET, STS, TS, AgentConfig, BanditAgent, blasts_channel, blasts_select,
    distortion_matrix, optimal_action_entropy, regret_matrix, sts_channel, sts_select, ts_channel,
    ts_select,
)
from capbayes.bandit import BanditEnv, BetaBelief, GaussianBelief


def prob_first_beats_second(a1, b1, a2, b2):
    f = lambda x: stats.beta.pdf(x, a1, b1) * stats.beta.cdf(x, a2, b2)
    return integrate.quad(f, 0, 1)[0]


def test_ts_probability_matching():
    belief = BetaBelief(np.array([2.0, 1.0]), np.array([1.0, 1.0]))
    p = prob_first_beats_second(2, 1, 1, 1)
    assert p == pytest.approx(2 / 3, abs=1e-10)
    rng = np.random.default_rng(0)
    n = 100_000
    freq = sum(ts_select(belief, rng) == 0 for _ in range(n)) / n
    assert abs(freq - p) < 0.01


def test_ts_single_arm():
    assert ts_select(BetaBelief.uniform(1), np.random.default_rng(0)) == 0


def test_ts_follows_concentrated_belief():
    belief = BetaBelief(np.array([1.0, 1.0, 1e6]), np.array([1e6, 1e6, 1.0]))
    rng = np.random.default_rng(0)
    assert all(ts_select(belief, rng) == 2 for _ in range(1000))


def test_sts_examples():
    rng = np.random.default_rng(0)
    assert sts_select(BetaBelief.uniform(1), 0.1, rng) == 0
    # With a huge epsilon every arm qualifies; the lowest index wins.
    assert all(sts_select(BetaBelief.uniform(4), 1.0, rng) == 0 for _ in range(200))
    with pytest.raises(ValueError):
        sts_select(BetaBelief.uniform(2), -0.1, rng)


def test_sts_zero_epsilon_matches_ts():
    belief = BetaBelief(np.array([3.0, 2.0, 5.0]), np.array([2.0, 2.0, 4.0]))
    a = np.random.default_rng(7)
    b = np.random.default_rng(7)
    # Continuous samples have no ties, so both rules pick the same arm from the same draw.
    assert [sts_select(belief, 0.0, a) for _ in range(500)] == [ts_select(belief, b) for _ in range(500)]


def test_sts_channel_picks_first_epsilon_optimal():
    samples = np.array([[0.5, 0.55, 0.2], [0.1, 0.3, 0.9]])
    assert np.array_equal(sts_channel(samples, 0.1), [[1, 0, 0], [0, 0, 1]])
    assert np.array_equal(sts_channel(samples, 0.0), [[0, 1, 0], [0, 0, 1]])


def test_regret_and_distortion_matrices():
    s = np.array([[0.2, 0.5, 0.4]])
    assert np.allclose(regret_matrix(s), [[0.3, 0.0, 0.1]])
    assert np.allclose(distortion_matrix(s), [[0.09, 0.0, 0.01]])
    assert np.allclose(distortion_matrix(s, LINEAR_REGRET), regret_matrix(s))


def test_ts_channel_splits_ties():
    assert np.allclose(ts_channel([[1.0, 1.0, 0.0]]), [[0.5, 0.5, 0.0]])


def test_config_validation():
    with pytest.raises(ValueError):
        AgentConfig(STS)
    with pytest.raises(ValueError):
        AgentConfig(TS, epsilon=0.1)
    with pytest.raises(ValueError):
        AgentConfig(BLASTS, lam=-1.0)
    with pytest.raises(ValueError):
        AgentConfig.blasts(beta=1.0, lam=1.0)
    assert AgentConfig.blasts(beta=0.0).lam == math.inf
    assert AgentConfig.blasts(lam=0.0).beta == math.inf
    assert AgentConfig.blasts(beta=100.0).name == "BLASTS(beta=100)"


def test_blasts_lambda_zero_is_ts_in_distribution():
    belief = GaussianBelief(np.array([-1.0, 0.0, 1.0]), np.ones(3))
    cfg = AgentConfig.blasts(lam=0.0, z_samples=1)
    a = np.random.default_rng(3)
    rng = np.random.default_rng(4)
    n = 20_000
    blasts = np.bincount([blasts_select(belief, cfg, a) for _ in range(n)], minlength=3) / n
    ts = np.bincount([ts_select(belief, rng) for _ in range(n)], minlength=3) / n
    assert 0.5 * np.abs(blasts - ts).sum() < 0.02


def test_blasts_huge_lambda_is_uniform():
    belief = GaussianBelief(np.array([-1.0, 0.0, 1.0]), np.ones(3))
    cfg = AgentConfig.blasts(lam=1e6, z_samples=500)
    samples, res = blasts_channel(belief, cfg, np.random.default_rng(0))
    assert samples.shape == (500, 3)
    assert np.allclose(res.marginal, 1 / 3, atol=1e-3)
    assert res.rate < 1e-6


def test_blasts_decision_fields():
    belief = BetaBelief.uniform(4)
    cfg = AgentConfig.blasts(beta=10.0, z_samples=50)
    dec = blasts_select(belief, cfg, np.random.default_rng(0), full=True)
    assert 0 <= dec.source_index < 50
    assert dec.result.delta[dec.source_index, dec.action] > 0
    with pytest.raises(ValueError):
        blasts_select(belief, AgentConfig(TS), np.random.default_rng(0))


def test_optimal_action_entropy():
    assert optimal_action_entropy(np.eye(4)) == pytest.approx(math.log(4))
    assert optimal_action_entropy([[0.0, 1.0]] * 5) == 0.0


def test_agent_step_updates_belief_and_reports_regret():
    env = BanditEnv("bernoulli", [0.0, 1.0])
    agent = BanditAgent(AgentConfig(TS), BetaBelief.uniform(2), rate_samples=200)
    rngs = [np.random.default_rng(i) for i in range(3)]
    rec, diag = agent.step(env, 1, *rngs)
    assert diag.regret == (1.0 if rec.action == 0 else 0.0)
    assert rec.reward == rec.action
    assert agent.belief.alpha.sum() + agent.belief.beta.sum() == 5
    assert 0 <= diag.rate <= math.log(2)


def test_agent_rejects_mismatched_env():
    agent = BanditAgent(AgentConfig(TS), BetaBelief.uniform(2))
    with pytest.raises(ValueError):
        agent.step(BanditEnv("bernoulli", [0.5] * 3), 1, *(np.random.default_rng(0),) * 2)


def test_single_arm_rate_is_zero():
    agent = BanditAgent(AgentConfig(STS, epsilon=0.1), BetaBelief.uniform(1))
    rng = np.random.default_rng(0)
    _, diag = agent.step(BanditEnv("bernoulli", [0.4]), 1, rng, rng)
    assert diag.rate == 0.0 and diag.regret == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_blasts_rate_bounded_by_optimal_action_entropy(seed, k):
    # The target rate never exceeds what it costs to communicate A* exactly.
    rng = np.random.default_rng(seed)
    belief = GaussianBelief(rng.normal(size=k), rng.uniform(0.2, 2.0, size=k))
    for beta in (0.1, 10.0, 1e4):
        samples, res = blasts_channel(belief, AgentConfig.blasts(beta=beta, z_samples=200),
                                      np.random.default_rng(seed))
        assert res.rate <= optimal_action_entropy(samples) + 1e-6
