"""Samplers for the prior hierarchy used by the benchmarks.

Three nested families over the k-simplex:

* symmetric Dirichlet(beta) -- the homogeneous base case (beta = 1 is the
  Laplace prior);
* the entropy-flat mixture -- beta drawn with density proportional to
  d xi / d beta, xi(beta) being the prior mean entropy, then Dirichlet(beta);
* the coarse-grained mixture -- draw k' uniformly from [k, k^2], draw an
  entropy-flat distribution over k' bins, randomly partition the k' bins
  into k non-empty groups, and merge.  Merging a Dirichlet is again a
  Dirichlet (with summed concentrations), so this is an inhomogeneous
  Dirichlet mixture that no single homogeneous prior contains.

``random_partition`` draws uniformly over set partitions of k_fine elements
into exactly k_coarse non-empty blocks, either by the Stirling-triangle
recursion or by rejection-sampling uniform surjective label vectors.  Both
routes realize the same distribution (every partition corresponds to exactly
k_coarse! labeled surjections, and block labels are assigned by a uniform
bijection either way); the choice is a cost tradeoff, with rejection viable
once k_fine sufficiently exceeds k_coarse * ln(k_coarse).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._rng import as_generator
from .special import digamma
from .types import PartitionMap, Simplex

_NSB_GRID_POINTS = 10_000
_BETA_LOW = 1e-6
_BETA_HIGH = 1e4
# below this concentration, gamma variates underflow; sample in log space
_LOG_SPACE_BETA = 0.1


@dataclass(frozen=True)
class PriorSpec:
    """A named prior over the k-simplex for benchmark configuration."""

    kind: str  # "dirichlet" | "nsb" | "dprime"
    k: int
    beta: float | None = None
    partition_method: str = "auto"

    def __post_init__(self):
        if self.kind not in ("dirichlet", "nsb", "dprime"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.kind == "dirichlet":
            if self.beta is None or self.beta <= 0:
                raise ValueError("dirichlet prior needs beta > 0")
        if self.partition_method not in ("auto", "stirling", "rejection"):
            raise ValueError(f"unknown partition method {self.partition_method!r}")

    def sample(self, rng, size: int | None = None):
        if self.kind == "dirichlet":
            return sample_dirichlet(self.k, self.beta, rng, size=size)
        if self.kind == "nsb":
            return sample_nsb(self.k, rng, size=size)
        return sample_dprime(self.k, rng, size=size, partition_method=self.partition_method)

    def label(self) -> str:
        if self.kind == "dirichlet":
            return f"dirichlet(beta={self.beta:g})"
        return self.kind


def _dirichlet_rows(k: int, betas: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One simplex row per entry of ``betas``; log-space path for tiny beta."""
    size = betas.size
    out = np.empty((size, k))
    small = betas < _LOG_SPACE_BETA
    if small.any():
        b = betas[small][:, None]
        # G(b) = G(b+1) * U^(1/b) in distribution; work with logs and softmax
        logg = np.log(rng.gamma(b + 1.0, size=(int(small.sum()), k)))
        logg += np.log(rng.random((int(small.sum()), k))) / b
        logg -= logg.max(axis=1, keepdims=True)
        g = np.exp(logg)
        out[small] = g / g.sum(axis=1, keepdims=True)
    big = ~small
    if big.any():
        g = rng.gamma(betas[big][:, None], size=(int(big.sum()), k))
        out[big] = g / g.sum(axis=1, keepdims=True)
    return out


def sample_dirichlet(k: int, beta: float, rng, size: int | None = None):
    """Draw from the symmetric Dirichlet(beta) over k bins.

    Returns a Simplex, or a (size, k) array of rows when ``size`` is given.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not beta > 0:
        raise ValueError("beta must be positive")
    gen = as_generator(rng)
    rows = _dirichlet_rows(k, np.full(size or 1, float(beta)), gen)
    if size is None:
        return Simplex(rows[0])
    return rows


@lru_cache(maxsize=64)
def _nsb_grid(k: int) -> tuple[np.ndarray, np.ndarray]:
    """(log-beta grid, normalized CDF of the entropy-flat weight) for k bins."""
    logb = np.linspace(math.log(_BETA_LOW), math.log(_BETA_HIGH), _NSB_GRID_POINTS)
    beta = np.exp(logb)
    xi = digamma(k * beta + 1.0) - digamma(beta + 1.0)
    cdf = xi - xi[0]
    cdf /= cdf[-1]
    return logb, cdf


def _nsb_betas(k: int, rng: np.random.Generator, size: int) -> np.ndarray:
    if k <= 4096:
        logb, cdf = _nsb_grid(k)
    else:
        logb_arr = np.linspace(math.log(_BETA_LOW), math.log(_BETA_HIGH), _NSB_GRID_POINTS)
        beta = np.exp(logb_arr)
        xi = digamma(k * beta + 1.0) - digamma(beta + 1.0)
        cdf = xi - xi[0]
        cdf /= cdf[-1]
        logb = logb_arr
    u = rng.random(size)
    return np.exp(np.interp(u, cdf, logb))


def sample_nsb(k: int, rng, size: int | None = None):
    """Draw from the entropy-flat Dirichlet mixture over k bins.

    beta is drawn by inverse-CDF on a precomputed log-spaced grid (the CDF of
    the d xi / d beta weight is xi itself, accumulated by trapezoid), then the
    distribution is a Dirichlet(beta) draw.
    """
    if k < 2:
        raise ValueError("the entropy-flat mixture needs k >= 2")
    gen = as_generator(rng)
    betas = _nsb_betas(k, gen, size or 1)
    rows = _dirichlet_rows(k, betas, gen)
    if size is None:
        return Simplex(rows[0])
    return rows


# ---------------------------------------------------------------------------
# uniform random set partitions into exactly k non-empty blocks


@lru_cache(maxsize=32)
def _stirling_column(k: int, n_max: int) -> tuple:
    """Exact Stirling numbers S(m, j) for m <= n_max, j <= k, as big ints."""
    table = [[0] * (k + 1) for _ in range(n_max + 1)]
    table[0][0] = 1
    for m in range(1, n_max + 1):
        row = table[m]
        prev = table[m - 1]
        for j in range(1, min(m, k) + 1):
            row[j] = prev[j - 1] + j * prev[j]
    return tuple(tuple(r) for r in table)


def _partition_stirling(k_fine: int, k_coarse: int, rng: np.random.Generator) -> np.ndarray:
    """Sequential construction weighted by the S(m, j) recursion."""
    table = _stirling_column(k_coarse, k_fine)
    decisions = np.empty(k_fine, dtype=np.int64)  # -1 = new block, else join index
    j = k_coarse
    us = rng.random(k_fine)
    joins = rng.integers(0, k_coarse, size=k_fine)  # pre-drawn, reduced mod j on use
    for m in range(k_fine, 0, -1):
        if m == j:
            decisions[m - 1] = -1
            j -= 1
            continue
        p_new = Fraction(table[m - 1][j - 1], table[m][j])
        if us[m - 1] < p_new:
            decisions[m - 1] = -1
            j -= 1
        else:
            decisions[m - 1] = joins[m - 1] % j
    labels = np.empty(k_fine, dtype=np.int64)
    created = 0
    for m in range(1, k_fine + 1):
        d = decisions[m - 1]
        if d < 0:
            labels[m - 1] = created
            created += 1
        else:
            labels[m - 1] = d
    perm = rng.permutation(k_coarse)
    return perm[labels]


def _partition_rejection(k_fine: int, k_coarse: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform surjection by rejection; uniform over partitions by symmetry."""
    while True:
        labels = rng.integers(0, k_coarse, size=k_fine)
        if np.bincount(labels, minlength=k_coarse).all():
            return labels


def _rejection_viable(k_fine: int, k_coarse: int) -> bool:
    if k_coarse == 1:
        return True
    # expected number of missed labels; acceptance ~ exp(-miss)
    miss = k_coarse * (1.0 - 1.0 / k_coarse) ** k_fine
    return miss <= 1.2


def random_partition(k_fine: int, k_coarse: int, rng, method: str = "auto") -> PartitionMap:
    """A uniform random set partition of k_fine bins into exactly k_coarse
    non-empty blocks, with block labels assigned by a uniform bijection.

    ``method`` picks the construction route ("stirling" or "rejection");
    both realize the same uniform distribution, and "auto" chooses by cost.
    """
    if not 1 <= k_coarse <= k_fine:
        raise ValueError("need 1 <= k_coarse <= k_fine")
    gen = as_generator(rng)
    if method == "auto":
        method = "rejection" if _rejection_viable(k_fine, k_coarse) else "stirling"
    if method == "stirling":
        labels = _partition_stirling(k_fine, k_coarse, gen)
    elif method == "rejection":
        labels = _partition_rejection(k_fine, k_coarse, gen)
    else:
        raise ValueError(f"unknown partition method {method!r}")
    return PartitionMap(labels)


def sample_dprime(
    k: int,
    rng,
    size: int | None = None,
    partition_method: str = "auto",
    k_prime: int | None = None,
):
    """Draw from the coarse-grained inhomogeneous mixture over k bins.

    Steps: k' uniform on [k, k^2]; an entropy-flat draw over k' bins; a
    uniform random partition of the k' bins into k non-empty groups; merge.
    ``k_prime`` pins the intermediate size (diagnostics only; when it equals
    k the construction collapses to the entropy-flat mixture).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    gen = as_generator(rng)
    rows = np.empty((size or 1, k))
    for i in range(size or 1):
        kp = int(k_prime) if k_prime is not None else int(gen.integers(k, k * k + 1))
        if kp < k or kp > k * k:
            raise ValueError("k_prime must lie in [k, k^2]")
        if k == 1:
            rows[i] = 1.0
            continue
        if kp < 2:
            rows[i] = 1.0  # k == kp == 1 handled above; defensive
            continue
        fine = sample_nsb(kp, gen)
        pm = random_partition(kp, k, gen, method=partition_method)
        rows[i] = np.bincount(pm.assignment, weights=fine.weights, minlength=k)
    if size is None:
        return Simplex(rows[0])
    return rows
