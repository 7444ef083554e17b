"""Seeded experiment runner, multi-seed aggregation and learning diagnostics.

Every replication draws its true environment from the prior (Bayesian regret).
Random streams are split from the replication seed by ``(stream, agent)``
spawn keys, so adding or removing an agent never changes another agent's draws.
"""
import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, is_dataclass

import numpy as np
from scipy import stats

from . import __version__, rd
from .agents import (
    BLASTS, BanditAgent, distortion_matrix, optimal_action_entropy, sts_channel, ts_channel,
)
from .bandit import BERNOULLI, BanditEnv, GaussianBelief, prior_belief
from .mdp import expected_return, random_mdp, solve_optimal
from .psrl import MdpPosterior, psrl_episode_policy, run_episode, update_mdp_posterior, vsrl_episode_policy

log = logging.getLogger(__name__)

ENV_STREAM, ACTION_STREAM, REWARD_STREAM, DIAG_STREAM = range(4)


def stream(seed, kind, agent=0):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(kind, agent)))


@dataclass
class SeedResult:
    seed: int
    agents: list
    cum_regret: np.ndarray   # (n_agents, T)
    rate: np.ndarray         # (n_agents, T); NaN where not computed


@dataclass
class Aggregate:
    mean: np.ndarray
    stderr: np.ndarray
    n_seeds: int


def aggregate_seeds(series):
    """Pointwise mean and standard error of equal-length series."""
    arr = [np.asarray(s, dtype=float) for s in series]
    if not arr:
        raise ValueError("no series to aggregate")
    if any(a.shape != arr[0].shape for a in arr):
        raise ValueError("series lengths differ")
    stack = np.stack(arr)
    n = stack.shape[0]
    mean = stack.mean(axis=0)
    if n == 1:
        return Aggregate(mean, np.zeros_like(mean), 1)
    return Aggregate(mean, stack.std(axis=0, ddof=1) / math.sqrt(n), n)


def draw_bandit_env(env_spec, rng):
    kind, n = env_spec["kind"], env_spec["n_arms"]
    if "fixed_means" in env_spec:
        return BanditEnv(kind, np.asarray(env_spec["fixed_means"], dtype=float))
    return BanditEnv(kind, prior_belief(kind, n).sample(rng))


def run_bandit_seed(cfg, seed):
    env = draw_bandit_env(cfg.env, stream(seed, ENV_STREAM))
    n_agents, horizon = len(cfg.agents), cfg.horizon
    cum = np.zeros((n_agents, horizon))
    rate = np.full((n_agents, horizon), np.nan)
    for i, acfg in enumerate(cfg.agents):
        agent = BanditAgent(acfg, prior_belief(env.kind, env.n_arms), rate_samples=cfg.rate_samples)
        a_rng, r_rng, d_rng = (stream(seed, k, i) for k in (ACTION_STREAM, REWARD_STREAM, DIAG_STREAM))
        total = 0.0
        for t in range(horizon):
            _, diag = agent.step(env, t + 1, a_rng, r_rng, d_rng)
            total += diag.regret
            cum[i, t] = total
            rate[i, t] = diag.rate
    return SeedResult(seed, [a.name for a in cfg.agents], cum, rate)


def run_mdp_seed(cfg, seed):
    e = cfg.env
    s, a, h = e["n_states"], e["n_actions"], e["horizon"]
    conc = float(e.get("concentration", 1.0))
    true_mdp = random_mdp(s, a, h, stream(seed, ENV_STREAM), concentration=conc)
    v_star = float(true_mdp.init_dist @ solve_optimal(true_mdp)[1][0])
    n_agents, episodes = len(cfg.agents), cfg.horizon
    cum = np.zeros((n_agents, episodes))
    rate = np.full((n_agents, episodes), np.nan)
    for i, spec in enumerate(cfg.agents):
        post = MdpPosterior.prior(s, a, h, true_mdp.init_dist, concentration=conc)
        a_rng, r_rng = stream(seed, ACTION_STREAM, i), stream(seed, REWARD_STREAM, i)
        total = 0.0
        for k in range(episodes):
            if spec.kind == "PSRL":
                policy = psrl_episode_policy(post, a_rng)
            else:
                dec = vsrl_episode_policy(post, spec.beta, spec.z_samples, a_rng,
                                          max_iters=spec.ba_iters, tol=spec.ba_tol)
                policy = dec.policy
                rate[i, k] = dec.rate
            total += v_star - expected_return(true_mdp, policy)
            cum[i, k] = total
            post = update_mdp_posterior(post, run_episode(true_mdp, policy, r_rng))
    return SeedResult(seed, [sp.name for sp in cfg.agents], cum, rate)


def _run_seed(args):
    cfg, seed = args
    try:
        fn = run_mdp_seed if cfg.kind == "mdp-regret" else run_bandit_seed
        return fn(cfg, seed), None
    except Exception as exc:  # reported per seed, never swallowed silently
        return None, f"seed {seed}: {type(exc).__name__}: {exc}"


@dataclass
class ExperimentResult:
    seeds: list
    failures: list
    agg_regret: dict
    agg_rate: dict


def run_trajectories(cfg):
    """Run every seed of a regret/rate experiment; returns per-seed results and failures."""
    jobs = [(cfg, s) for s in cfg.seeds]
    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(cfg.n_jobs) as pool:
            outcomes = list(pool.map(_run_seed, jobs))
    else:
        outcomes = [_run_seed(j) for j in jobs]
    results = [r for r, _ in outcomes if r is not None]
    failures = [f for _, f in outcomes if f is not None]
    for f in failures:
        log.error("replication failed: %s", f)
    agg_regret, agg_rate = {}, {}
    if results:
        for i, name in enumerate(results[0].agents):
            agg_regret[name] = aggregate_seeds([r.cum_regret[i] for r in results])
            agg_rate[name] = aggregate_seeds([r.rate[i] for r in results])
    return ExperimentResult(results, failures, agg_regret, agg_rate)


def _fmt(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def _writer(path, header):
    fh = open(path, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


def write_series_csv(path, results, attr, column):
    fh, w = _writer(path, ["seed", "t", "agent", column])
    with fh:
        for r in results:
            data = getattr(r, attr)
            for i, name in enumerate(r.agents):
                for t in range(data.shape[1]):
                    w.writerow([r.seed, t + 1, name, _fmt(data[i, t])])


def write_agg_csv(path, agg):
    fh, w = _writer(path, ["t", "agent", "mean", "stderr"])
    with fh:
        for name, a in agg.items():
            for t in range(a.mean.size):
                w.writerow([t + 1, name, _fmt(a.mean[t]), _fmt(a.stderr[t])])


def _jsonable(obj):
    if is_dataclass(obj):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_manifest(out, cfg, overrides=(), extra=None):
    doc = {
        "code_version": f"capbayes {__version__}",
        "kind": cfg.kind,
        "seeds": cfg.seeds,
        "config": _jsonable(cfg.raw),
        "overrides": list(overrides),
        "agents": [_jsonable(a) for a in cfg.agents],
    }
    doc.update(extra or {})
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg, out=None, overrides=()):
    """Run ``cfg`` and write its CSV outputs plus ``manifest.json`` into ``out``."""
    out = out or cfg.out
    os.makedirs(out, exist_ok=True)
    if cfg.kind == "rd-curve":
        result = run_rd_curve(cfg, out)
        write_manifest(out, cfg, overrides)
        return result
    if cfg.kind == "marginal-sweep":
        result = run_marginal_sweep(cfg, out)
        write_manifest(out, cfg, overrides)
        return result
    res = run_trajectories(cfg)
    write_series_csv(os.path.join(out, "regret.csv"), res.seeds, "cum_regret", "cum_regret")
    write_agg_csv(os.path.join(out, "regret_agg.csv"), res.agg_regret)
    if cfg.kind in ("bandit-rate", "mdp-regret"):
        write_series_csv(os.path.join(out, "rate.csv"), res.seeds, "rate", "rate_nats")
        write_agg_csv(os.path.join(out, "rate_agg.csv"), res.agg_rate)
    write_manifest(out, cfg, overrides, {"failed_seeds": res.failures})
    return res


# ---------------------------------------------------------------- rd curves


@dataclass
class CurveRow:
    agent: str
    param: float
    rate: float
    distortion: float


def sts_points(samples, epsilons, kind):
    """Rate and distortion of the satisficing target for each epsilon, same source."""
    d = distortion_matrix(samples, kind)
    w = rd.uniform_weights(samples.shape[0])
    return [(e, rd.channel_rate(w, ch), rd.channel_distortion(w, ch, d))
            for e in epsilons for ch in [sts_channel(samples, e)]]


def run_rd_curve(cfg, out=None):
    rng = stream(cfg.seeds[0], ENV_STREAM)
    belief = prior_belief(cfg.env["kind"], cfg.env["n_arms"])
    samples = belief.sample(rng, size=cfg.z_samples)
    d = distortion_matrix(samples, cfg.distortion_kind)
    points = rd.rd_curve(None, d, cfg.betas, max_iters=cfg.ba_iters, tol=cfg.ba_tol)
    rows = [CurveRow("BLASTS", p.beta, p.rate, p.distortion) for p in points]
    rows += [CurveRow("STS", e, r, dist) for e, r, dist in sts_points(samples, cfg.epsilons, cfg.distortion_kind)]
    if out:
        fh, w = _writer(os.path.join(out, "rd_curve.csv"), ["agent", "param", "rate_nats", "distortion"])
        with fh:
            for row in rows:
                w.writerow([row.agent, _fmt(row.param), _fmt(row.rate), _fmt(row.distortion)])
        rd.write_curve_csv(os.path.join(out, "blasts_curve.csv"), points)
    return rows


# ------------------------------------------------------------ marginal sweep


@dataclass
class MarginalRow:
    variant: str
    lam: float
    arm: int
    blasts_prob: float
    ts_prob: float
    rate: float


def marginal_sweep(mu, sigma, lambdas, z_samples, ts_samples, seed, distortion_kind="linear-regret",
                   ba_iters=rd.DEFAULT_MAX_ITERS, ba_tol=rd.DEFAULT_TOL):
    """BLASTS marginal action distribution per rate price, with TS reference.

    The same seed gives the same standard-normal draws for every belief, so
    sweeps over ``mu`` or ``sigma`` share common random numbers.
    """
    belief = GaussianBelief(np.asarray(mu, float), np.asarray(sigma, float) ** 2)
    samples = belief.sample(stream(seed, ENV_STREAM), size=z_samples)
    ts = ts_channel(belief.sample(stream(seed, DIAG_STREAM), size=ts_samples)).mean(axis=0)
    d = distortion_matrix(samples, distortion_kind)
    out = []
    for lam in lambdas:
        beta = math.inf if lam == 0 else 1.0 / lam
        res = rd.blahut_arimoto(None, d, beta, max_iters=ba_iters, tol=ba_tol)
        out.append((lam, res.marginal, res.rate))
    return ts, out


def run_marginal_sweep(cfg, out=None):
    rows = []
    for i, v in enumerate(cfg.variants):
        name = v.get("name", f"variant{i}")
        ts, sweep = marginal_sweep(v["mu"], v["sigma"], cfg.lambdas, cfg.z_samples, cfg.ts_samples,
                                   cfg.seeds[0], cfg.distortion_kind, cfg.ba_iters, cfg.ba_tol)
        for lam, marg, rate in sweep:
            for arm in range(marg.size):
                rows.append(MarginalRow(name, lam, arm, float(marg[arm]), float(ts[arm]), rate))
    if out:
        fh, w = _writer(os.path.join(out, "marginal.csv"),
                        ["variant", "lambda", "arm", "blasts_prob", "ts_prob", "rate_nats"])
        with fh:
            for r in rows:
                w.writerow([r.variant, _fmt(r.lam), r.arm, _fmt(r.blasts_prob), _fmt(r.ts_prob), _fmt(r.rate)])
    return rows


# ---------------------------------------------------------------- diagnostics


def estimate_optimal_action_entropy(belief, n_samples, rng):
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    return optimal_action_entropy(belief.sample(rng, size=n_samples))


@dataclass
class InformationRatio:
    ratio: float | None      # None when the information gain is numerically zero
    regret: float            # E[mean(target) - mean(action)]
    information: float       # I(target; (action, observation)), nats
    n_samples: int

    @property
    def defined(self):
        return self.ratio is not None


def observation_probs(samples, kind, n_bins=40):
    """``p[z, a, o]``: probability of discretised observation ``o`` after pulling ``a``."""
    if kind == BERNOULLI:
        return np.stack([1.0 - samples, samples], axis=2)
    lo, hi = samples.min() - 4.0, samples.max() + 4.0
    edges = np.concatenate([[-np.inf], np.linspace(lo, hi, n_bins - 1), [np.inf]])
    cdf = stats.norm.cdf(edges[None, None, :] - samples[:, :, None])
    return np.diff(cdf, axis=2)


def estimate_information_ratio(belief, cfg, n_samples, rng, n_bins=40):
    """Squared expected shortfall to the target over the information gained about it.

    The target is drawn through the agent's channel on ``n_samples`` posterior
    draws (the argmax rule for TS); the action is drawn independently from the
    channel's marginal, as probability matching does.
    """
    samples = belief.sample(rng, size=n_samples)
    if cfg.kind == BLASTS:
        d = distortion_matrix(samples, cfg.distortion_kind)
        delta = rd.blahut_arimoto(None, d, cfg.beta, max_iters=cfg.ba_iters, tol=cfg.ba_tol).delta
    else:
        delta = ts_channel(samples)
    w = rd.uniform_weights(n_samples)
    pi = w @ delta
    regret = float(np.sum(w[:, None] * delta * samples) - np.sum(w[:, None] * pi[None, :] * samples))
    obs = observation_probs(samples, belief.kind, n_bins)
    info = 0.0
    for a in np.flatnonzero(pi > 0):
        joint = (w[:, None] * delta).T @ obs[:, a, :]        # (target, observation)
        joint = joint / joint.sum()
        px, po = joint.sum(axis=1), joint.sum(axis=0)
        mask = joint > 0
        info += pi[a] * float(np.sum(joint[mask] * np.log(joint[mask] / np.outer(px, po)[mask])))
    info = max(info, 0.0)
    ratio = regret**2 / info if info >= 1e-12 else None
    return InformationRatio(ratio, regret, info, n_samples)


def block_means(x, n_blocks):
    x = np.asarray(x, dtype=float)
    return np.array([b.mean(axis=-1) for b in np.array_split(x, n_blocks, axis=-1)]).T


@dataclass
class TrendTest:
    spearman: float          # on the seed-averaged block means
    frac_nonpositive: float  # bootstrap fraction with correlation <= 0
    n_boot: int

    def passes(self, level=0.95):
        return self.frac_nonpositive >= level


def rate_trend(per_seed, n_blocks=10, n_boot=1000, seed=0):
    """Spearman correlation of block-mean rate against block index, bootstrapped over seeds."""
    per_seed = np.asarray(per_seed, dtype=float)
    blocks = block_means(per_seed, n_blocks)          # (n_seeds, n_blocks)
    idx = np.arange(n_blocks)
    point = stats.spearmanr(idx, blocks.mean(axis=0)).statistic
    rng = np.random.default_rng(seed)
    n = blocks.shape[0]
    hits = 0
    for _ in range(n_boot):
        m = blocks[rng.integers(n, size=n)].mean(axis=0)
        rho = stats.spearmanr(idx, m).statistic
        hits += bool(np.isnan(rho) or rho <= 0)
    return TrendTest(float(point), hits / n_boot, n_boot)


def cumulative_rate_drops(mean_rate):
    """Running sum of per-step rate decreases ``R_t - R_{t+1}``."""
    r = np.asarray(mean_rate, dtype=float)
    return np.concatenate([[0.0], np.cumsum(r[:-1] - r[1:])])
