"""Bandit action-selection rules: Thompson Sampling, satisficing TS and BLASTS.

BLASTS draws ``Z`` environments from the posterior, solves for the
rate-distortion-optimal channel from sampled environment to action, then acts
by sampling one environment index uniformly and an action from that row.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import rd
from .bandit import StepRecord, sample_reward

TS = "TS"
STS = "STS"
BLASTS = "BLASTS"
AGENT_KINDS = (TS, STS, BLASTS)

LINEAR_REGRET = "linear-regret"
SQUARED_REGRET = "squared-regret"
DISTORTIONS = (LINEAR_REGRET, SQUARED_REGRET)


@dataclass(frozen=True)
class AgentConfig:
    kind: str
    epsilon: float | None = None
    lam: float | None = None
    z_samples: int = 1000
    ba_iters: int = rd.DEFAULT_MAX_ITERS
    ba_tol: float = rd.DEFAULT_TOL
    distortion_kind: str = SQUARED_REGRET
    name: str = ""

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.kind == STS and (self.epsilon is None or self.epsilon < 0):
            raise ValueError("STS requires epsilon >= 0")
        if self.kind == BLASTS and (self.lam is None or self.lam < 0):
            raise ValueError("BLASTS requires lambda >= 0")
        if self.kind != STS and self.epsilon is not None:
            raise ValueError(f"epsilon is only meaningful for STS, not {self.kind}")
        if self.kind != BLASTS and self.lam is not None:
            raise ValueError(f"lambda is only meaningful for BLASTS, not {self.kind}")
        if self.z_samples < 1:
            raise ValueError("z_samples must be at least 1")
        if self.distortion_kind not in DISTORTIONS:
            raise ValueError(f"unknown distortion kind {self.distortion_kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self.default_name())

    @classmethod
    def blasts(cls, beta=None, lam=None, **kw):
        """BLASTS config from either the rate price ``lam`` or its inverse ``beta``."""
        if (beta is None) == (lam is None):
            raise ValueError("give exactly one of beta or lam")
        if lam is None:
            lam = math.inf if beta == 0 else 1.0 / beta
        return cls(BLASTS, lam=lam, **kw)

    @property
    def beta(self):
        """Lagrange multiplier on distortion; lam = 0 maps to beta = inf."""
        if self.lam is None:
            return None
        if self.lam == 0:
            return math.inf
        return 1.0 / self.lam

    def default_name(self):
        if self.kind == STS:
            return f"STS(eps={self.epsilon:g})"
        if self.kind == BLASTS:
            return f"BLASTS(beta={self.beta:g})"
        return TS


def regret_matrix(samples):
    """``d[z, a] = max_b theta_z(b) - theta_z(a)`` for sampled mean vectors."""
    samples = np.asarray(samples, dtype=float)
    return samples.max(axis=1, keepdims=True) - samples


def distortion_matrix(samples, kind=SQUARED_REGRET):
    d = regret_matrix(samples)
    if kind == SQUARED_REGRET:
        return d * d
    if kind == LINEAR_REGRET:
        return d
    raise ValueError(f"unknown distortion kind {kind!r}")


def _uniform_argmax(theta, rng):
    best = np.flatnonzero(theta == theta.max())
    if best.size == 1:
        return int(best[0])
    return int(rng.choice(best))


def ts_select(belief, rng):
    """Sample an environment, act greedily; ties broken uniformly at random."""
    return _uniform_argmax(belief.sample(rng), rng)


def sts_select(belief, epsilon, rng):
    """Lowest-index arm within ``epsilon`` of the sampled environment's best."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    theta = belief.sample(rng)
    return int(np.flatnonzero(theta.max() - theta <= epsilon)[0])


def ts_channel(samples):
    """Thompson Sampling's decision rule on a sample set: uniform over argmax."""
    return rd.argmin_channel(regret_matrix(samples))


def sts_channel(samples, epsilon):
    d = regret_matrix(samples)
    first = np.argmax(d <= epsilon, axis=1)
    delta = np.zeros_like(d)
    delta[np.arange(d.shape[0]), first] = 1.0
    return delta


@dataclass
class BlastsDecision:
    action: int
    samples: np.ndarray
    result: rd.BAResult
    source_index: int


def blasts_channel(belief, cfg, rng):
    """Draw ``cfg.z_samples`` environments and solve for the BLASTS channel."""
    samples = belief.sample(rng, size=cfg.z_samples)
    d = distortion_matrix(samples, cfg.distortion_kind)
    res = rd.blahut_arimoto(None, d, cfg.beta, max_iters=cfg.ba_iters, tol=cfg.ba_tol)
    return samples, res


def blasts_select(belief, cfg, rng, full=False):
    if cfg.kind != BLASTS:
        raise ValueError(f"blasts_select needs a BLASTS config, got {cfg.kind}")
    samples, res = blasts_channel(belief, cfg, rng)
    z = int(rng.integers(cfg.z_samples))
    row = res.delta[z]
    action = int(rng.choice(row.size, p=row / row.sum()))
    if full:
        return BlastsDecision(action, samples, res, z)
    return action


def optimal_action_entropy(samples):
    """Plug-in entropy of the argmax over sampled environments, ties split evenly."""
    counts = ts_channel(samples).sum(axis=0)
    p = counts / counts.sum()
    p = p[p > 0]
    return max(0.0, float(-np.sum(p * np.log(p))))


@dataclass
class StepDiagnostics:
    rate: float
    regret: float


@dataclass
class BanditAgent:
    """Belief plus decision rule; ``step`` plays one round against ``env``."""

    cfg: AgentConfig
    belief: object
    rate_samples: int = 0

    def select(self, rng):
        if self.cfg.kind == TS:
            return ts_select(self.belief, rng), None
        if self.cfg.kind == STS:
            return sts_select(self.belief, self.cfg.epsilon, rng), None
        dec = blasts_select(self.belief, self.cfg, rng, full=True)
        return dec.action, dec.result.rate

    def step(self, env, t, action_rng, reward_rng, diag_rng=None):
        """Select, observe, update; diagnostics use the true env and are never fed back."""
        if env.n_arms != self.belief.n_arms:
            raise ValueError("environment and belief disagree on the number of arms")
        action, rate = self.select(action_rng)
        if rate is None:
            rate = self._target_rate(diag_rng)
        rec = StepRecord(t, action, sample_reward(env, action, reward_rng))
        self.belief = self.belief.update(rec.action, rec.reward)
        return rec, StepDiagnostics(rate=rate, regret=env.regret(action))

    def _target_rate(self, rng):
        # TS/STS rate: I(E; target) estimated from posterior samples, deterministic targets.
        if self.belief.n_arms == 1:
            return 0.0
        if self.rate_samples <= 0 or rng is None:
            return float("nan")
        samples = self.belief.sample(rng, size=self.rate_samples)
        if self.cfg.kind == TS:
            return optimal_action_entropy(samples)
        counts = sts_channel(samples, self.cfg.epsilon).sum(axis=0)
        p = counts[counts > 0] / counts.sum()
        return max(0.0, float(-np.sum(p * np.log(p))))


def run_bandit_episode_step(agent, env, t, action_rng, reward_rng, diag_rng=None):
    return agent.step(env, t, action_rng, reward_rng, diag_rng)
