"""Information measures over finite discrete distributions, in nats."""
import numpy as np

NORM_TOL = 1e-9


class DistributionError(ValueError):
    """Raised when an array is not a valid probability distribution."""


class AbsoluteContinuityError(DistributionError):
    """Raised when KL(p || q) is infinite because q vanishes where p does not."""


def as_dist(p, name="distribution"):
    """Validate ``p`` as a probability vector (or table) and return it as a float array.

    Entries must be non-negative and sum to one within ``NORM_TOL``; inputs that
    pass are renormalized exactly, anything else is rejected.
    """
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise DistributionError(f"{name} is empty")
    if not np.all(np.isfinite(p)):
        raise DistributionError(f"{name} has non-finite entries")
    if np.any(p < 0):
        raise DistributionError(f"{name} has negative entries (min {p.min():.3g})")
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise DistributionError(f"{name} sums to {total!r}, not 1")
    return p / total


def _plogp(p):
    p = p[p > 0]
    return float(np.sum(p * np.log(p)))


def entropy(p):
    """Shannon entropy -sum p ln p, skipping zero-probability outcomes."""
    p = as_dist(p)
    return max(0.0, -_plogp(p.ravel()))


def kl_divergence(p, q):
    p = as_dist(p, "p")
    q = as_dist(q, "q")
    if p.shape != q.shape:
        raise DistributionError(f"shape mismatch: {p.shape} vs {q.shape}")
    mask = p > 0
    if np.any(q[mask] == 0):
        raise AbsoluteContinuityError("q assigns zero mass where p is positive")
    return max(0.0, float(np.sum(p[mask] * np.log(p[mask] / q[mask]))))


def marginals(joint):
    j = as_dist(joint, "joint")
    if j.ndim != 2:
        raise DistributionError(f"joint must be 2-D, got shape {j.shape}")
    return j.sum(axis=1), j.sum(axis=0)


def mutual_information(joint):
    """I(X;Y) as KL between the joint table and the product of its marginals."""
    j = as_dist(joint, "joint")
    if j.ndim != 2:
        raise DistributionError(f"joint must be 2-D, got shape {j.shape}")
    px, py = j.sum(axis=1), j.sum(axis=0)
    mask = j > 0
    prod = np.outer(px, py)
    mi = float(np.sum(j[mask] * np.log(j[mask] / prod[mask])))
    return max(0.0, mi)


def conditional_entropy(joint):
    """H(X | Y) for a joint table indexed [x, y]."""
    j = as_dist(joint, "joint")
    py = j.sum(axis=0)
    total = 0.0
    for y in np.flatnonzero(py > 0):
        col = j[:, y] / py[y]
        total -= py[y] * _plogp(col)
    return max(0.0, total)
