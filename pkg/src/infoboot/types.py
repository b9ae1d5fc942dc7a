"""Shared data containers: distributions, count histograms, partition maps,
and the value-with-uncertainty record returned by the resampling estimators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: absolute tolerance on sum(weights) == 1 at Simplex construction
SIMPLEX_ATOL = 1e-9


class EmptySampleError(ValueError):
    """Raised when an operation requires at least one observation."""


class UnreachableTargetError(ValueError):
    """Raised when an error-rate target cannot be met for any sample size."""


class QuadratureConvergenceError(RuntimeError):
    """Raised when doubling the quadrature nodes moves the result > 1e-6 bits."""


class EnumerationCapError(ValueError):
    """Raised when an exact enumeration would exceed the configured state cap."""


def _as_float_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("expected a non-empty 1-D vector")
    return arr


def _as_count_array(values, ndim: int) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != ndim or arr.size < 1:
        raise ValueError(f"expected a non-empty {ndim}-D array of counts")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise ValueError("counts must be integers")
        arr = rounded
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("counts must be non-negative")
    return arr


@dataclass(frozen=True)
class Simplex:
    """A probability distribution over k >= 1 outcomes.

    Weights must be non-negative and sum to one within ``SIMPLEX_ATOL``;
    inputs inside that tolerance are renormalized silently, anything else
    is rejected.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = _as_float_vector(self.weights)
        if np.any(w < 0.0):
            raise ValueError("simplex weights must be non-negative")
        total = w.sum()
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"simplex weights sum to {total!r}, not 1")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, k: int) -> "Simplex":
        return cls(np.full(k, 1.0 / k))


@dataclass(frozen=True)
class CountVector:
    """A histogram of non-negative integer observation counts."""

    counts: np.ndarray

    def __post_init__(self):
        c = _as_count_array(self.counts, ndim=1)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def __len__(self) -> int:
        return self.counts.size

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def empirical(self) -> Simplex:
        """The empirical distribution counts/n (explicit conversion only)."""
        if self.n == 0:
            raise EmptySampleError("cannot normalize an empty sample")
        return Simplex(self.counts / self.n)


@dataclass(frozen=True)
class JointCountMatrix:
    """A k_i x k_j contingency table of non-negative integer counts."""

    counts: np.ndarray

    def __post_init__(self):
        c = _as_count_array(self.counts, ndim=2)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def row_margin(self) -> CountVector:
        return CountVector(self.counts.sum(axis=1))

    def col_margin(self) -> CountVector:
        return CountVector(self.counts.sum(axis=0))

    def flatten(self) -> CountVector:
        return CountVector(self.counts.reshape(-1))


@dataclass(frozen=True)
class PartitionMap:
    """A surjective assignment of k_fine bins onto k_coarse bin indices."""

    assignment: np.ndarray

    def __post_init__(self):
        a = _as_count_array(self.assignment, ndim=1)
        k_coarse = int(a.max()) + 1
        hit = np.bincount(a, minlength=k_coarse)
        if np.any(hit == 0):
            raise ValueError("partition map must be surjective onto [0, k_coarse)")
        if k_coarse > a.size:
            raise ValueError("k_coarse cannot exceed k_fine")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def k_fine(self) -> int:
        return self.assignment.size

    @property
    def k_coarse(self) -> int:
        return int(self.assignment.max()) + 1

    @classmethod
    def identity(cls, k: int) -> "PartitionMap":
        return cls(np.arange(k))

    @classmethod
    def merge_last_two(cls, k: int) -> "PartitionMap":
        """Bins 0..k-3 stay distinct; the last two map to one coarse bin."""
        if k < 2:
            raise ValueError("need at least two bins to merge")
        a = np.arange(k)
        a[-1] = k - 2
        return cls(a)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], k_fine: int) -> "PartitionMap":
        a = np.full(k_fine, -1, dtype=np.int64)
        for label, block in enumerate(blocks):
            for idx in block:
                a[idx] = label
        if np.any(a < 0):
            raise ValueError("blocks do not cover all fine bins")
        return cls(a)


@dataclass(frozen=True)
class Estimate:
    """A point estimate in bits with its resampling standard error.

    ``degenerate`` is set when the input's empirical resampling distribution
    is a point mass (zero naive entropy), in which case the correction is
    vacuous and harnesses typically drop the sample.
    """

    value: float
    stderr: float
    method: str
    replicates: int
    seed: int
    degenerate: bool = False

    def __post_init__(self):
        if self.stderr < 0.0:
            raise ValueError("stderr must be non-negative")

    def to_dict(self) -> dict:
        return {
            "value_bits": self.value,
            "stderr_bits": self.stderr,
            "method": self.method,
            "replicates": self.replicates,
            "seed": self.seed,
            "degenerate": self.degenerate,
        }
