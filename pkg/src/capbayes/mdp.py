"""Tabular episodic MDPs: Bellman operators, backward induction, value-equivalence distortion.

Rewards and transitions are time-homogeneous; policies are non-stationary and
stored as ``(H, S, A)`` arrays of action probabilities. Value tables are
``(H + 1, S)`` arrays whose last row is the terminal zero.
"""
import json
from dataclasses import dataclass

import numpy as np


class MDPError(ValueError):
    pass


@dataclass(frozen=True)
class TabularMDP:
    reward: np.ndarray      # (S, A), mean rewards in [0, 1]
    transition: np.ndarray  # (S, A, S)
    init_dist: np.ndarray   # (S,)
    horizon: int

    def __post_init__(self):
        r = np.asarray(self.reward, dtype=float)
        p = np.asarray(self.transition, dtype=float)
        mu = np.asarray(self.init_dist, dtype=float)
        if r.ndim != 2:
            raise MDPError(f"reward must be (S, A), got {r.shape}")
        s, a = r.shape
        if p.shape != (s, a, s):
            raise MDPError(f"transition must be {(s, a, s)}, got {p.shape}")
        if mu.shape != (s,):
            raise MDPError(f"init_dist must have length {s}")
        if np.any(r < 0) or np.any(r > 1):
            raise MDPError("rewards must lie in [0, 1]")
        if np.any(p < 0) or np.any(np.abs(p.sum(axis=2) - 1) > 1e-9):
            raise MDPError("transition rows must be probability vectors")
        if np.any(mu < 0) or abs(mu.sum() - 1) > 1e-9:
            raise MDPError("init_dist must be a probability vector")
        if int(self.horizon) < 1:
            raise MDPError("horizon must be at least 1")
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "init_dist", mu)
        object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def n_states(self):
        return self.reward.shape[0]

    @property
    def n_actions(self):
        return self.reward.shape[1]

    def to_json(self):
        return json.dumps({
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "horizon": self.horizon,
            "reward": self.reward.ravel().tolist(),
            "transition": self.transition.ravel().tolist(),
            "init_dist": self.init_dist.tolist(),
        })

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, str) else text
        s, a = int(doc["n_states"]), int(doc["n_actions"])
        return cls(
            reward=np.asarray(doc["reward"], dtype=float).reshape(s, a),
            transition=np.asarray(doc["transition"], dtype=float).reshape(s, a, s),
            init_dist=np.asarray(doc["init_dist"], dtype=float),
            horizon=int(doc["horizon"]),
        )


def random_mdp(n_states, n_actions, horizon, rng, concentration=1.0):
    """Draw an MDP from a Dirichlet(concentration) / Uniform[0, 1] prior."""
    p = rng.dirichlet(np.full(n_states, concentration), size=(n_states, n_actions))
    r = rng.random((n_states, n_actions))
    mu = np.zeros(n_states)
    mu[0] = 1.0
    return TabularMDP(r, p, mu, horizon)


def random_policy(n_states, n_actions, horizon, rng):
    return rng.dirichlet(np.ones(n_actions), size=(horizon, n_states))


def _check_policy_step(mdp, pi_h):
    pi_h = np.asarray(pi_h, dtype=float)
    if pi_h.shape != (mdp.n_states, mdp.n_actions):
        raise MDPError(f"policy step must be {(mdp.n_states, mdp.n_actions)}, got {pi_h.shape}")
    return pi_h


def q_values(mdp, v):
    """``Q(s, a) = U(s, a) + sum_s' T(s'|s, a) v(s')``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (mdp.n_states,):
        raise MDPError(f"value vector must have length {mdp.n_states}, got {v.shape}")
    return mdp.reward + mdp.transition @ v


def bellman_apply(mdp, pi_h, v):
    """One application of the policy Bellman operator to ``v``."""
    pi_h = _check_policy_step(mdp, pi_h)
    return np.sum(pi_h * q_values(mdp, v), axis=1)


def greedy(q):
    """Deterministic policy on the lowest-index maximiser of each row."""
    pi = np.zeros_like(q)
    pi[np.arange(q.shape[0]), np.argmax(q, axis=1)] = 1.0
    return pi


def solve_optimal(mdp):
    """Backward induction; returns ``(policy (H, S, A), values (H + 1, S))``."""
    h, s, a = mdp.horizon, mdp.n_states, mdp.n_actions
    values = np.zeros((h + 1, s))
    policy = np.zeros((h, s, a))
    for t in range(h - 1, -1, -1):
        q = q_values(mdp, values[t + 1])
        policy[t] = greedy(q)
        values[t] = q.max(axis=1)
    return policy, values


def policy_value(mdp, policy):
    policy = np.asarray(policy, dtype=float)
    if policy.shape != (mdp.horizon, mdp.n_states, mdp.n_actions):
        raise MDPError(f"policy must be {(mdp.horizon, mdp.n_states, mdp.n_actions)}, got {policy.shape}")
    values = np.zeros((mdp.horizon + 1, mdp.n_states))
    for t in range(mdp.horizon - 1, -1, -1):
        values[t] = bellman_apply(mdp, policy[t], values[t + 1])
    return values


def expected_return(mdp, policy):
    return float(mdp.init_dist @ policy_value(mdp, policy)[0])


def _same_shape(m1, m2):
    if (m1.n_states, m1.n_actions, m1.horizon) != (m2.n_states, m2.n_actions, m2.horizon):
        raise MDPError("MDPs differ in states, actions or horizon")


def ve_distortion(m1, m2, policies, values):
    """Largest squared sup-norm Bellman gap over the given policies and value functions."""
    _same_shape(m1, m2)
    if len(policies) == 0 or len(values) == 0:
        raise MDPError("policy and value sets must be non-empty")
    worst = 0.0
    for v in values:
        gap = q_values(m1, v) - q_values(m2, v)
        for pi in policies:
            pi = _check_policy_step(m1, pi)
            worst = max(worst, float(np.max(np.abs(np.sum(pi * gap, axis=1)))))
    return worst * worst


def ve_distortion_matrix(mdps, policies, values):
    """Pairwise ``ve_distortion`` for a list of same-shaped MDPs, vectorised.

    Returns a symmetric ``(n, n)`` matrix with zero diagonal.
    """
    if not mdps:
        raise MDPError("need at least one MDP")
    for m in mdps[1:]:
        _same_shape(mdps[0], m)
    pis = np.asarray(policies, dtype=float)        # (P, S, A)
    vs = np.asarray(values, dtype=float)           # (V, S)
    if pis.ndim != 3 or vs.ndim != 2 or len(pis) == 0 or len(vs) == 0:
        raise MDPError("policies must be (P, S, A) and values (V, S), both non-empty")
    r = np.stack([m.reward for m in mdps])         # (n, S, A)
    p = np.stack([m.transition for m in mdps])     # (n, S, A, S)
    q = r[:, None] + np.einsum("nsat,vt->nvsa", p, vs)        # (n, V, S, A)
    b = np.einsum("psa,nvsa->npvs", pis, q)                    # (n, P, V, S)
    b = b.reshape(len(mdps), -1)
    n = len(mdps)
    out = np.zeros((n, n))
    for i in range(n):
        gap = np.max(np.abs(b[i] - b[i + 1:]), axis=1) if i + 1 < n else np.empty(0)
        out[i, i + 1:] = gap * gap
        out[i + 1:, i] = gap * gap
    return out
