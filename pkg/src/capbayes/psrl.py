"""Posterior sampling (PSRL) and value-equivalent sampling (VSRL) for tabular MDPs.

The posterior is a Dirichlet over each next-state row and a Beta over each
mean reward, with rewards realised as Bernoulli draws. VSRL compresses ``Z``
posterior samples with Blahut-Arimoto, using the same samples as the output
codebook and the value-equivalence distortion between them.
"""
from dataclasses import dataclass

import numpy as np

from . import rd
from .mdp import TabularMDP, ve_distortion_matrix, solve_optimal


@dataclass(frozen=True)
class MdpPosterior:
    dirichlet: np.ndarray          # (S, A, S)
    reward_alpha: np.ndarray       # (S, A)
    reward_beta: np.ndarray        # (S, A)
    init_dist: np.ndarray
    horizon: int
    known_reward: np.ndarray | None = None

    def __post_init__(self):
        if np.any(self.dirichlet <= 0):
            raise ValueError("Dirichlet concentrations must be positive")
        if np.any(self.reward_alpha <= 0) or np.any(self.reward_beta <= 0):
            raise ValueError("Beta parameters must be positive")

    @classmethod
    def prior(cls, n_states, n_actions, horizon, init_dist=None, concentration=1.0, known_reward=None):
        if init_dist is None:
            init_dist = np.zeros(n_states)
            init_dist[0] = 1.0
        return cls(
            np.full((n_states, n_actions, n_states), float(concentration)),
            np.ones((n_states, n_actions)),
            np.ones((n_states, n_actions)),
            np.asarray(init_dist, dtype=float),
            horizon,
            None if known_reward is None else np.asarray(known_reward, dtype=float),
        )

    @property
    def n_states(self):
        return self.dirichlet.shape[0]

    @property
    def n_actions(self):
        return self.dirichlet.shape[1]

    def mean_transition(self):
        return self.dirichlet / self.dirichlet.sum(axis=2, keepdims=True)

    def sample(self, rng):
        # Gamma normalisation is the vectorised Dirichlet draw.
        g = rng.standard_gamma(self.dirichlet)
        p = g / g.sum(axis=2, keepdims=True)
        if self.known_reward is not None:
            r = self.known_reward
        else:
            r = rng.beta(self.reward_alpha, self.reward_beta)
        return TabularMDP(r, p, self.init_dist, self.horizon)


@dataclass(frozen=True)
class EpisodeTrajectory:
    states: np.ndarray   # (H + 1,)
    actions: np.ndarray  # (H,)
    rewards: np.ndarray  # (H,)

    def __post_init__(self):
        h = len(self.actions)
        if len(self.rewards) != h or len(self.states) != h + 1:
            raise ValueError("trajectory needs H actions, H rewards and H + 1 states")


def psrl_episode_policy(post, rng):
    """Optimal policy of one MDP drawn from the posterior."""
    policy, _ = solve_optimal(post.sample(rng))
    return policy


@dataclass
class VsrlDecision:
    policy: np.ndarray
    rate: float
    distortion: float
    source_index: int
    compressed_index: int
    result: rd.BAResult


def default_distortion_sets(samples):
    """First-step greedy policies and first-step optimal values of each sample."""
    pis, vs = [], []
    for m in samples:
        policy, values = solve_optimal(m)
        pis.append(policy[0])
        vs.append(values[0])
    return np.array(pis), np.array(vs)


def vsrl_channel(samples, beta, policies=None, values=None, max_iters=rd.DEFAULT_MAX_ITERS, tol=rd.DEFAULT_TOL):
    if policies is None or values is None:
        dp, dv = default_distortion_sets(samples)
        policies = dp if policies is None else policies
        values = dv if values is None else values
    d = ve_distortion_matrix(samples, policies, values)
    return d, rd.blahut_arimoto(None, d, beta, max_iters=max_iters, tol=tol)


def vsrl_episode_policy(post, beta, z_samples, rng, policies=None, values=None,
                        max_iters=rd.DEFAULT_MAX_ITERS, tol=rd.DEFAULT_TOL):
    """Compress ``z_samples`` posterior MDPs and act optimally for the compressed draw."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if z_samples < 1:
        raise ValueError("z_samples must be at least 1")
    samples = [post.sample(rng) for _ in range(z_samples)]
    _, res = vsrl_channel(samples, beta, policies, values, max_iters, tol)
    z = int(rng.integers(z_samples))
    row = res.delta[z]
    k = int(rng.choice(z_samples, p=row / row.sum()))
    policy, _ = solve_optimal(samples[k])
    return VsrlDecision(policy, res.rate, res.distortion, z, k, res)


def update_mdp_posterior(post, traj):
    rewards = np.asarray(traj.rewards)
    if post.known_reward is None and not np.all((rewards == 0) | (rewards == 1)):
        raise ValueError("rewards must be 0 or 1 under the Bernoulli reward model")
    dirichlet = post.dirichlet.copy()
    alpha, beta = post.reward_alpha.copy(), post.reward_beta.copy()
    for h, a in enumerate(traj.actions):
        s, s2 = traj.states[h], traj.states[h + 1]
        dirichlet[s, a, s2] += 1
        if post.known_reward is None:
            alpha[s, a] += rewards[h]
            beta[s, a] += 1 - rewards[h]
    return MdpPosterior(dirichlet, alpha, beta, post.init_dist, post.horizon, post.known_reward)


def run_episode(mdp, policy, rng):
    """Roll out ``policy`` once; rewards are Bernoulli with the MDP's mean."""
    h = mdp.horizon
    states = np.zeros(h + 1, dtype=int)
    actions = np.zeros(h, dtype=int)
    rewards = np.zeros(h)
    states[0] = rng.choice(mdp.n_states, p=mdp.init_dist)
    for t in range(h):
        s = states[t]
        a = int(rng.choice(mdp.n_actions, p=policy[t, s]))
        actions[t] = a
        rewards[t] = float(rng.random() < mdp.reward[s, a])
        states[t + 1] = rng.choice(mdp.n_states, p=mdp.transition[s, a])
    return EpisodeTrajectory(states, actions, rewards)


def policy_key(policy):
    """Hashable greedy action profile of a deterministic policy."""
    return tuple(np.argmax(policy, axis=2).ravel().tolist())
