"""Plug-in information functionals and coarse-graining operators.

All quantities are reported in bits (log base 2), with 0 log 0 = 0 by
continuity.  These are exact functions of their inputs: the plug-in entropy
satisfies the coarse-graining chain rule identically, which is what the
consistency benchmarks measure the resampling estimators against.
"""

from __future__ import annotations

import math

import numpy as np

from .types import CountVector, EmptySampleError, JointCountMatrix, PartitionMap, Simplex

_LN2 = math.log(2.0)


def _plogp(p: np.ndarray) -> np.ndarray:
    """p * log2(p) elementwise with 0 log 0 = 0."""
    out = np.zeros_like(p, dtype=np.float64)
    mask = p > 0.0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def entropy_bits(probs: np.ndarray) -> float:
    """Shannon entropy in bits of a bare probability vector (no validation)."""
    return float(-_plogp(np.asarray(probs, dtype=np.float64)).sum())


def _probs_of(d: Simplex | CountVector) -> np.ndarray:
    if isinstance(d, Simplex):
        return d.weights
    if isinstance(d, CountVector):
        if d.n == 0:
            raise EmptySampleError("entropy of an empty sample is undefined")
        return d.counts / d.n
    raise TypeError(f"expected Simplex or CountVector, got {type(d).__name__}")


def entropy_naive(d: Simplex | CountVector) -> float:
    """Plug-in entropy H in bits; for counts, the entropy of counts/n."""
    return entropy_bits(_probs_of(d))


def entropy_miller_madow(c: CountVector) -> float:
    """Plug-in entropy plus the (m - 1)/(2n) occupancy correction, in bits.

    m is the number of occupied bins.  The correction is linear in the
    counts, unlike the resampling correction.
    """
    if not isinstance(c, CountVector):
        raise TypeError("entropy_miller_madow expects a CountVector")
    n = c.n
    if n == 0:
        raise EmptySampleError("entropy of an empty sample is undefined")
    m_hat = int((c.counts > 0).sum())
    return entropy_naive(c) + (m_hat - 1) / (2.0 * n * _LN2)


def kl_divergence(p: Simplex, q: Simplex) -> float:
    """KL divergence D(p||q) in bits.

    Returns ``math.inf`` when some outcome has p_i > 0 but q_i = 0: such
    outcomes make the alternative impossible to confuse with the truth, and
    callers are expected to detect the infinity rather than catch an error.
    """
    pw, qw = p.weights, q.weights
    if pw.size != qw.size:
        raise ValueError("distributions must have the same length")
    support = pw > 0.0
    if np.any(qw[support] == 0.0):
        return math.inf
    ps = pw[support]
    return float(np.sum(ps * np.log2(ps / qw[support])))


def jsd_naive(p: Simplex, q: Simplex, alpha: float) -> float:
    """Jensen-Shannon divergence J_alpha(p, q) in bits.

    Computed as H(alpha p + beta q) - alpha H(p) - beta H(q); lies in
    [0, H(alpha, beta)] and is therefore at most one bit.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    pw, qw = p.weights, q.weights
    if pw.size != qw.size:
        raise ValueError("distributions must have the same length")
    beta = 1.0 - alpha
    mix = alpha * pw + beta * qw
    return entropy_bits(mix) - alpha * entropy_bits(pw) - beta * entropy_bits(qw)


def _joint_probs(j) -> np.ndarray:
    if isinstance(j, JointCountMatrix):
        if j.n == 0:
            raise EmptySampleError("mutual information of an empty sample is undefined")
        return j.counts / j.n
    arr = np.asarray(j, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("joint distribution must be a 2-D array")
    if np.any(arr < 0.0):
        raise ValueError("joint probabilities must be non-negative")
    total = arr.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint probabilities sum to {total!r}, not 1")
    return arr / total


def mi_naive(j: JointCountMatrix | np.ndarray) -> float:
    """Plug-in mutual information of a joint, in bits.

    Accepts a JointCountMatrix (uses the empirical joint) or a 2-D array of
    probabilities summing to one.
    """
    pij = _joint_probs(j)
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)
    prod = np.outer(pi, pj)
    mask = pij > 0.0
    return float(np.sum(pij[mask] * np.log2(pij[mask] / prod[mask])))


def coarse_grain(d: Simplex | CountVector, m: PartitionMap):
    """Merge bins of a distribution or count vector along a partition map."""
    if isinstance(d, Simplex):
        if m.k_fine != len(d):
            raise ValueError("partition map length must match distribution length")
        merged = np.bincount(m.assignment, weights=d.weights, minlength=m.k_coarse)
        return Simplex(merged)
    if isinstance(d, CountVector):
        if m.k_fine != len(d):
            raise ValueError("partition map length must match count vector length")
        merged = np.bincount(m.assignment, weights=d.counts, minlength=m.k_coarse)
        return CountVector(np.rint(merged).astype(np.int64))
    raise TypeError(f"expected Simplex or CountVector, got {type(d).__name__}")


def coarse_grain_joint(j, row_map: PartitionMap, col_map: PartitionMap):
    """Merge rows and columns of a joint independently."""
    if isinstance(j, JointCountMatrix):
        arr = j.counts
        wrap = JointCountMatrix
    else:
        arr = np.asarray(j, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("joint must be a 2-D array")
        wrap = None
    ki, kj = arr.shape
    if row_map.k_fine != ki or col_map.k_fine != kj:
        raise ValueError("partition maps must match the joint's shape")
    out = np.zeros((row_map.k_coarse, col_map.k_coarse), dtype=np.float64)
    np.add.at(out, (row_map.assignment[:, None], col_map.assignment[None, :]), arr)
    if wrap is not None:
        return wrap(np.rint(out).astype(np.int64))
    return out
