"""Bandit environments and conjugate per-arm beliefs.

Two reward models are supported: Bernoulli rewards with Beta posteriors and
Gaussian rewards (unit observation noise) with Gaussian posteriors. Beliefs are
immutable; every update returns a new object.
"""
from dataclasses import dataclass

import numpy as np

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"
KINDS = (BERNOULLI, GAUSSIAN)

# Observation noise variance for Gaussian rewards; fixed, not configurable.
NOISE_VAR = 1.0


@dataclass(frozen=True)
class BanditEnv:
    kind: str
    means: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        if self.kind not in KINDS:
            raise ValueError(f"unknown bandit kind {self.kind!r}")
        if means.ndim != 1 or means.size == 0:
            raise ValueError("means must be a non-empty vector")
        if not np.all(np.isfinite(means)):
            raise ValueError("means must be finite")
        if self.kind == BERNOULLI and (means.min() < 0 or means.max() > 1):
            raise ValueError("Bernoulli means must lie in [0, 1]")
        object.__setattr__(self, "means", means)

    @property
    def n_arms(self):
        return self.means.size

    @property
    def best_mean(self):
        return float(self.means.max())

    def regret(self, action):
        """Expected shortfall of ``action`` relative to the best arm."""
        return self.best_mean - float(self.means[action])


@dataclass(frozen=True)
class StepRecord:
    t: int
    action: int
    reward: float


@dataclass(frozen=True)
class BetaBelief:
    """Independent Beta(alpha_a, beta_a) posteriors over Bernoulli arm means."""

    alpha: np.ndarray
    beta: np.ndarray
    kind = BERNOULLI

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("alpha and beta must be vectors of equal length")
        if np.any(a <= 0) or np.any(b <= 0):
            raise ValueError("Beta parameters must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def uniform(cls, n_arms):
        return cls(np.ones(n_arms), np.ones(n_arms))

    @property
    def n_arms(self):
        return self.alpha.size

    @property
    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    @property
    def var(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1))

    def sample(self, rng, size=None):
        """Draw arm-mean vectors; shape ``(n_arms,)`` or ``(size, n_arms)``."""
        shape = (self.n_arms,) if size is None else (size, self.n_arms)
        return rng.beta(np.broadcast_to(self.alpha, shape), np.broadcast_to(self.beta, shape))

    def update(self, action, reward):
        if reward not in (0, 1):
            raise ValueError(f"Bernoulli reward must be 0 or 1, got {reward!r}")
        a, b = self.alpha.copy(), self.beta.copy()
        a[action] += reward
        b[action] += 1 - reward
        return BetaBelief(a, b)


@dataclass(frozen=True)
class GaussianBelief:
    """Independent N(mu_a, var_a) posteriors over arm means, unit reward noise."""

    mu: np.ndarray
    var: np.ndarray
    kind = GAUSSIAN

    def __post_init__(self):
        m = np.asarray(self.mu, dtype=float)
        v = np.asarray(self.var, dtype=float)
        if m.shape != v.shape or m.ndim != 1:
            raise ValueError("mu and var must be vectors of equal length")
        if np.any(v <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("variances must be positive and means finite")
        object.__setattr__(self, "mu", m)
        object.__setattr__(self, "var", v)

    @classmethod
    def standard(cls, n_arms):
        return cls(np.zeros(n_arms), np.ones(n_arms))

    @property
    def n_arms(self):
        return self.mu.size

    @property
    def mean(self):
        return self.mu

    def sample(self, rng, size=None):
        shape = (self.n_arms,) if size is None else (size, self.n_arms)
        return self.mu + np.sqrt(self.var) * rng.standard_normal(shape)

    def update(self, action, reward):
        reward = float(reward)
        if not np.isfinite(reward):
            raise ValueError("reward must be finite")
        mu, var = self.mu.copy(), self.var.copy()
        precision = 1.0 / var[action] + 1.0 / NOISE_VAR
        mu[action] = (mu[action] / var[action] + reward / NOISE_VAR) / precision
        var[action] = 1.0 / precision
        return GaussianBelief(mu, var)


def prior_belief(kind, n_arms):
    """Default prior: Beta(1,1) per Bernoulli arm, N(0,1) per Gaussian arm."""
    if kind == BERNOULLI:
        return BetaBelief.uniform(n_arms)
    if kind == GAUSSIAN:
        return GaussianBelief.standard(n_arms)
    raise ValueError(f"unknown bandit kind {kind!r}")


def sample_reward(env, action, rng):
    if not 0 <= action < env.n_arms:
        raise IndexError(f"action {action} out of range for {env.n_arms} arms")
    mean = env.means[action]
    if env.kind == BERNOULLI:
        return int(rng.random() < mean)
    return float(mean + np.sqrt(NOISE_VAR) * rng.standard_normal())


def update_belief(belief, rec):
    if not 0 <= rec.action < belief.n_arms:
        raise IndexError(f"action {rec.action} out of range for {belief.n_arms} arms")
    return belief.update(rec.action, rec.reward)


def sample_env(belief, rng):
    """One plausible environment drawn from the posterior."""
    return BanditEnv(belief.kind, belief.sample(rng))
