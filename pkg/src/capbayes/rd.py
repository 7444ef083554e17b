"""Blahut-Arimoto rate-distortion solver over an empirical (Monte-Carlo) source.

A source is ``Z`` weighted samples; the output alphabet has ``K`` symbols and
``d[z, k]`` is the distortion of emitting ``k`` for sample ``z``. The solver
minimises ``I(source; output) + beta * E[d]`` over channels ``delta[z, k]``.
All rates are in nats.
"""
import csv
from dataclasses import dataclass

import numba
import numpy as np

from .info import DistributionError, as_dist

DEFAULT_MAX_ITERS = 200
DEFAULT_TOL = 1e-9


class SolverError(ValueError):
    """Raised on malformed solver inputs."""


@dataclass
class BAResult:
    """Converged channel plus its marginal, rate and distortion."""

    delta: np.ndarray
    marginal: np.ndarray
    rate: float
    distortion: float
    iters: int
    converged: bool
    beta: float

    @property
    def objective(self):
        if np.isinf(self.beta):
            return self.distortion
        return self.rate + self.beta * self.distortion


@dataclass(frozen=True)
class RDPoint:
    beta: float
    rate: float
    distortion: float
    iters: int = 0


def uniform_weights(z):
    return np.full(z, 1.0 / z)


def _check(weights, d):
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] == 0 or d.shape[1] == 0:
        raise SolverError(f"distortion matrix must be non-empty 2-D, got shape {d.shape}")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise SolverError("distortion entries must be finite and non-negative")
    if weights is None:
        w = uniform_weights(d.shape[0])
    else:
        try:
            w = as_dist(weights, "source weights")
        except DistributionError as exc:
            raise SolverError(str(exc)) from exc
        if w.shape != (d.shape[0],):
            raise SolverError(f"weights of length {w.size} do not match {d.shape[0]} source samples")
    return w, d


def _check_channel(weights, delta):
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 2:
        raise SolverError(f"channel must be 2-D, got shape {delta.shape}")
    w = uniform_weights(delta.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (delta.shape[0],):
        raise SolverError(f"weights of length {w.size} do not match {delta.shape[0]} channel rows")
    if np.any(delta < 0) or np.any(np.abs(delta.sum(axis=1) - 1) > 1e-9):
        raise SolverError("channel rows must be probability vectors")
    return w, delta


@numba.njit(cache=True)
def _log_space_row(logq, logker_row, out):
    # Row update in log space with max subtraction; used when the shifted kernel underflows.
    k = out.size
    mx = -np.inf
    for j in range(k):
        v = logq[j] + logker_row[j]
        if v > mx:
            mx = v
    tot = 0.0
    for j in range(k):
        v = logq[j] + logker_row[j]
        out[j] = np.exp(v - mx) if v > -np.inf else 0.0
        tot += out[j]
    kl = 0.0
    for j in range(k):
        out[j] /= tot
        if out[j] > 0:
            kl += out[j] * (np.log(out[j]) - logq[j])
    return kl


@numba.njit(cache=True, fastmath={"contract", "reassoc", "arcp"})
def _ba_kernel(w, d, beta, max_iters, tol):
    z, k = d.shape
    # Row-shifted kernel exp(-beta * (d - min_k d)); each row's minimum maps to 1.
    logker = np.empty((z, k))
    ker = np.empty((z, k))
    kerlog = np.empty((z, k))
    for i in range(z):
        m = d[i, 0]
        for j in range(1, k):
            m = min(m, d[i, j])
        for j in range(k):
            logker[i, j] = -beta * (d[i, j] - m)
            ker[i, j] = np.exp(logker[i, j])
            kerlog[i, j] = ker[i, j] * logker[i, j]
    q = np.full(k, 1.0 / k)
    q_used = q.copy()
    logq = np.empty(k)
    row = np.empty(k)
    prev = np.inf
    iters = 0
    converged = False
    for it in range(max_iters):
        iters = it + 1
        q_used[:] = q
        # delta(j|i) = q_j ker_ij / s_i; its KL to q is sum_j delta_ij logker_ij - log s_i.
        rate_ub = 0.0
        acc = np.zeros(k)
        extra = np.zeros(k)
        for i in range(z):
            s = 0.0
            t = 0.0
            for j in range(k):
                s += q[j] * ker[i, j]
                t += q[j] * kerlog[i, j]
            if s > 1e-300:
                c = w[i] / s
                rate_ub += c * t - w[i] * np.log(s)
                for j in range(k):
                    acc[j] += c * ker[i, j]
            else:
                for j in range(k):
                    logq[j] = np.log(q[j]) if q[j] > 0 else -np.inf
                rate_ub += w[i] * _log_space_row(logq, logker[i], row)
                for j in range(k):
                    extra[j] += w[i] * row[j]
        qn = np.empty(k)
        for j in range(k):
            qn[j] = q[j] * acc[j] + extra[j]
        q = qn
        if abs(rate_ub - prev) < tol:
            converged = True
            break
        prev = rate_ub
    # Materialise the channel produced by the final iteration.
    delta = np.empty((z, k))
    for j in range(k):
        logq[j] = np.log(q_used[j]) if q_used[j] > 0 else -np.inf
    for i in range(z):
        s = 0.0
        for j in range(k):
            s += q_used[j] * ker[i, j]
        if s > 1e-300:
            for j in range(k):
                delta[i, j] = q_used[j] * ker[i, j] / s
        else:
            _log_space_row(logq, logker[i], delta[i])
    return delta, iters, converged


def argmin_channel(d):
    """Zero-rate-cost limit: each row uniform over its exact minimisers."""
    d = np.asarray(d, dtype=float)
    mask = d == d.min(axis=1, keepdims=True)
    return mask / mask.sum(axis=1, keepdims=True)


def blahut_arimoto(weights, d, beta, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
    """Solve for the channel minimising ``rate + beta * distortion``.

    Iterates ``q(k) = sum_z w_z delta(k|z)`` and
    ``delta(k|z) ∝ q(k) exp(-beta d[z, k])`` from uniform rows, stopping once
    the rate moves by less than ``tol`` between iterations or after
    ``max_iters``. ``beta = inf`` returns the pure distortion minimiser with
    ties split uniformly. ``weights=None`` means uniform source weights.
    Outputs whose marginal reaches zero stay at zero.
    """
    w, d = _check(weights, d)
    beta = float(beta)
    if np.isnan(beta) or beta < 0:
        raise SolverError(f"beta must be non-negative, got {beta}")
    if max_iters < 1:
        raise SolverError("max_iters must be at least 1")
    if np.isinf(beta):
        delta, iters, converged = argmin_channel(d), 0, True
    else:
        delta, iters, converged = _ba_kernel(w, d, beta, int(max_iters), float(tol))
        if not np.all(np.isfinite(delta)):
            raise FloatingPointError("Blahut-Arimoto produced non-finite channel entries")
    q = w @ delta
    return BAResult(
        delta=delta,
        marginal=q,
        rate=_rate(w, delta, q),
        distortion=float(np.sum(w[:, None] * delta * d)),
        iters=iters,
        converged=converged,
        beta=beta,
    )


def _rate(w, delta, q):
    mask = delta > 0
    with np.errstate(divide="ignore"):
        logratio = np.log(np.where(mask, delta, 1.0)) - np.log(np.where(q > 0, q, 1.0))[None, :]
    return max(0.0, float(np.sum(np.where(mask, w[:, None] * delta * logratio, 0.0))))


def channel_rate(weights, delta):
    """Mutual information between source sample and channel output."""
    w, delta = _check_channel(weights, delta)
    return _rate(w, delta, w @ delta)


def channel_distortion(weights, delta, d):
    w, delta = _check_channel(weights, delta)
    d = np.asarray(d, dtype=float)
    if d.shape != delta.shape:
        raise SolverError(f"distortion shape {d.shape} does not match channel {delta.shape}")
    return float(np.sum(w[:, None] * delta * d))


def marginal_action_distribution(weights, delta):
    w, delta = _check_channel(weights, delta)
    return w @ delta


def rd_curve(weights, d, betas, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
    """One converged (rate, distortion) point per Lagrange multiplier in ``betas``."""
    betas = [float(b) for b in betas]
    if not betas:
        raise SolverError("beta grid is empty")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise SolverError("beta grid must be sorted ascending")
    points = []
    for b in betas:
        res = blahut_arimoto(weights, d, b, max_iters=max_iters, tol=tol)
        points.append(RDPoint(b, res.rate, res.distortion, res.iters))
    return points


def write_curve_csv(path, points):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta", "rate_nats", "distortion", "iters"])
        for p in points:
            writer.writerow([repr(p.beta), repr(p.rate), repr(p.distortion), p.iters])
