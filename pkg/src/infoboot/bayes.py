"""Dirichlet-posterior and entropy-flat-mixture estimators.

``ww_entropy`` is the closed-form posterior mean of the entropy under a
symmetric Dirichlet prior with concentration beta, expressed in polygamma
functions; ``ww_mi`` combines three such terms (rows, columns, joint) with
the aggregated concentrations implied by marginalizing the joint prior.

``nsb_entropy`` mixes the Dirichlet posteriors over beta with weight
w(beta) = k psi1(k beta + 1) - psi1(beta + 1), the derivative of the prior
mean entropy, so that the implied prior over entropy is approximately flat.
The mixture integral runs over log beta on [log 1e-6, log 1e4] with a
trapezoid rule whose node count grows like sqrt(n) (the posterior over
log beta tightens like 1/sqrt(n)), and the evidence is normalized through
log-sum-exp because it spans hundreds of orders of magnitude.  ``nsb_mi``
places a single concentration on the joint cell space and integrates the
posterior-mean mutual information under the same weights.

All internal arithmetic is in nats; results convert to bits at the boundary.
Batch variants evaluate many count vectors on one shared grid and are what
the benchmark harness calls; they are deterministic, pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import digamma, gammaln, trigamma
from .types import CountVector, JointCountMatrix, QuadratureConvergenceError

_LN2 = math.log(2.0)

LOG_BETA_LOW = math.log(1e-6)
LOG_BETA_HIGH = math.log(1e4)


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration controls for the mixture estimators.

    ``nodes`` is the baseline trapezoid node count in log beta; the
    effective count is scaled up with the sample size so the narrowing
    posterior stays resolved.  With ``check_convergence`` the integral is
    recomputed on a doubled grid and a shift above 1e-6 bits raises
    ``QuadratureConvergenceError``.
    """

    log_beta_low: float = LOG_BETA_LOW
    log_beta_high: float = LOG_BETA_HIGH
    nodes: int = 200
    check_convergence: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.log_beta_low) and math.isfinite(self.log_beta_high)):
            raise ValueError("integration bounds must be finite")
        if self.log_beta_low >= self.log_beta_high:
            raise ValueError("lower bound must be below upper bound")
        if self.nodes < 32:
            raise ValueError("need at least 32 quadrature nodes")


_DEFAULT_SPEC = QuadratureSpec()


def _counts_1d(c) -> np.ndarray:
    if isinstance(c, CountVector):
        return c.counts
    return CountVector(c).counts


def _counts_2d(j) -> np.ndarray:
    if isinstance(j, JointCountMatrix):
        return j.counts
    return JointCountMatrix(j).counts


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (beta > 0.0) or not math.isfinite(beta):
        raise ValueError("concentration beta must be positive and finite")
    return beta


# ---------------------------------------------------------------------------
# Wolpert-Wolf closed forms


def _ww_entropy_nats(counts: np.ndarray, beta, k: int | None = None):
    """Posterior mean entropy in nats; vectorized over a trailing beta axis.

    ``counts`` has shape (..., k); ``beta`` broadcasts against the result.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if k is None:
        k = counts.shape[-1]
    n = counts.sum(axis=-1)
    a = counts[..., None] + beta  # (..., k, B)
    s = (a * digamma(a + 1.0)).sum(axis=-2)
    big_a = n[..., None] + k * np.asarray(beta, dtype=np.float64)
    return digamma(big_a + 1.0) - s / big_a


def ww_entropy(c, beta: float) -> float:
    """Dirichlet(beta) posterior mean of the entropy, in bits.

    Defined for any non-negative counts including the all-zero pure-prior
    case; always lies strictly inside (0, log2 k) for k >= 2.
    """
    beta = _check_beta(beta)
    counts = _counts_1d(c)
    return float(_ww_entropy_nats(counts, np.array([beta]))[0]) / _LN2


def ww_entropy_batch(counts, beta: float) -> np.ndarray:
    """ww_entropy for each row of a (T, k) count array, in bits."""
    beta = _check_beta(beta)
    arr = np.asarray(counts, dtype=np.float64)
    return _ww_entropy_nats(arr, np.array([beta]))[..., 0] / _LN2


def _ww_mi_nats(joint: np.ndarray, beta) -> np.ndarray:
    """Posterior mean MI in nats for joints (..., ki, kj), beta broadcastable."""
    joint = np.asarray(joint, dtype=np.float64)
    ki, kj = joint.shape[-2], joint.shape[-1]
    n = joint.sum(axis=(-2, -1))
    beta = np.asarray(beta, dtype=np.float64)
    big_a = n[..., None] + (ki * kj) * beta

    cells = joint.reshape(joint.shape[:-2] + (ki * kj,))
    a_c = cells[..., None] + beta
    s_cells = (a_c * digamma(a_c + 1.0)).sum(axis=-2)
    a_r = joint.sum(axis=-1)[..., None] + kj * beta
    s_rows = (a_r * digamma(a_r + 1.0)).sum(axis=-2)
    a_col = joint.sum(axis=-2)[..., None] + ki * beta
    s_cols = (a_col * digamma(a_col + 1.0)).sum(axis=-2)

    return digamma(big_a + 1.0) - (s_rows + s_cols - s_cells) / big_a


def ww_mi(j, beta: float) -> float:
    """Posterior mean mutual information under Dirichlet(beta) on the joint
    cells, in bits.

    Equals E[H_rows] + E[H_cols] - E[H_joint], where the margins carry the
    aggregated concentrations (k_j beta per row bin, k_i beta per column
    bin) implied by merging cells of the joint prior.  May be combined
    freely with ``ww_entropy`` since the three terms share one posterior.
    """
    beta = _check_beta(beta)
    joint = _counts_2d(j)
    return float(_ww_mi_nats(joint, np.array([beta]))[0]) / _LN2


def ww_mi_batch(joints, beta: float) -> np.ndarray:
    """ww_mi for each (ki, kj) slice of a (T, ki, kj) count array, in bits."""
    beta = _check_beta(beta)
    arr = np.asarray(joints, dtype=np.float64)
    return _ww_mi_nats(arr, np.array([beta]))[..., 0] / _LN2


# ---------------------------------------------------------------------------
# NSB mixture machinery


def _effective_nodes(spec: QuadratureSpec, n_max: int, factor: int = 1) -> int:
    span = spec.log_beta_high - spec.log_beta_low
    scaled = int(math.ceil(span * math.sqrt(n_max + 4.0) / 0.35)) + 1
    return max(spec.nodes, scaled) * factor


def _grid(spec: QuadratureSpec, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.linspace(spec.log_beta_low, spec.log_beta_high, nodes)
    return t, np.exp(t)


def _log_prior_mass(t: np.ndarray, beta: np.ndarray, k: int) -> np.ndarray:
    """ln[w(beta) * beta] plus trapezoid end corrections, on the grid."""
    if k < 2:
        raise ValueError("mixture estimators need k >= 2 bins")
    w = k * trigamma(k * beta + 1.0) - trigamma(beta + 1.0)
    out = np.log(w) + t
    out[0] += math.log(0.5)
    out[-1] += math.log(0.5)
    return out


def _row_value_index(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compress each row of (T, k) counts to (value-index, multiplicity) pairs.

    Returns (uniq (V,), idx (T, D), mult (T, D)) with zero-padded columns;
    padding rows point at uniq[0] with multiplicity 0.  Zero counts are kept
    as a genuine value so the value tables can absorb the empty-bin terms.
    """
    uniq = np.unique(counts)
    t_rows, k = counts.shape
    if k <= 32:
        idx = np.searchsorted(uniq, counts)
        mult = np.ones_like(counts, dtype=np.float64)
        return uniq, idx, mult
    idx_list = []
    mult_list = []
    for row in counts:
        vals, mults = np.unique(row, return_counts=True)
        idx_list.append(np.searchsorted(uniq, vals))
        mult_list.append(mults)
    d_max = max(len(v) for v in idx_list)
    idx = np.zeros((t_rows, d_max), dtype=np.int64)
    mult = np.zeros((t_rows, d_max), dtype=np.float64)
    for i, (iv, mv) in enumerate(zip(idx_list, mult_list)):
        idx[i, : len(iv)] = iv
        mult[i, : len(mv)] = mv
    return uniq, idx, mult


def _gather_sum(table: np.ndarray, idx: np.ndarray, mult: np.ndarray) -> np.ndarray:
    """sum_d mult[:, d] * table[idx[:, d], :] -> (rows, nodes)."""
    out = mult[:, 0, None] * table[idx[:, 0]]
    for d in range(1, idx.shape[1]):
        out += mult[:, d, None] * table[idx[:, d]]
    return out


def _total_tables(
    totals: np.ndarray, kb: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-distinct-total evidence base and psi(A + 1), gathered per row."""
    uniq_n, inv = np.unique(totals, return_inverse=True)
    ev_base = gammaln(kb)[None, :] - gammaln(uniq_n[:, None] + kb[None, :])
    psi_a1 = digamma(uniq_n[:, None] + kb[None, :] + 1.0)
    big_a = uniq_n[:, None] + kb[None, :]
    return ev_base[inv], psi_a1[inv], big_a[inv]


def _chunks(total: int, nodes: int) -> list[slice]:
    rows = max(1, 4_000_000 // max(nodes, 1))
    return [slice(s, min(s + rows, total)) for s in range(0, total, rows)]


def _nsb_entropy_nats(counts: np.ndarray, spec: QuadratureSpec, nodes: int) -> np.ndarray:
    t_rows, k = counts.shape
    totals = counts.sum(axis=1)
    t, beta = _grid(spec, nodes)
    kb = k * beta
    log_prior = _log_prior_mass(t, beta, k)

    uniq, idx, mult = _row_value_index(counts)
    glb = gammaln(beta)
    ev_tab = gammaln(uniq[:, None] + beta[None, :]) - glb[None, :]
    ev_tab[uniq == 0] = 0.0
    av = uniq[:, None] + beta[None, :]
    h_tab = av * digamma(av + 1.0)

    out = np.empty(t_rows)
    for sl in _chunks(t_rows, nodes):
        ev_rows = _gather_sum(ev_tab, idx[sl], mult[sl])
        s_rows = _gather_sum(h_tab, idx[sl], mult[sl])
        ev_base, psi_a1, big_a = _total_tables(totals[sl], kb)
        est = psi_a1 - s_rows / big_a
        logmass = ev_rows + ev_base + log_prior[None, :]
        logmass -= logmass.max(axis=1, keepdims=True)
        wgt = np.exp(logmass)
        out[sl] = (wgt * est).sum(axis=1) / wgt.sum(axis=1)
    return out


def _nsb_mi_nats(joints: np.ndarray, spec: QuadratureSpec, nodes: int) -> np.ndarray:
    t_rows, ki, kj = joints.shape
    k = ki * kj
    cells = joints.reshape(t_rows, k)
    rows = joints.sum(axis=2)
    cols = joints.sum(axis=1)
    totals = cells.sum(axis=1)

    t, beta = _grid(spec, nodes)
    kb = k * beta
    log_prior = _log_prior_mass(t, beta, k)

    uniq_c, idx_c, mult_c = _row_value_index(cells)
    glb = gammaln(beta)
    ev_tab = gammaln(uniq_c[:, None] + beta[None, :]) - glb[None, :]
    ev_tab[uniq_c == 0] = 0.0
    av = uniq_c[:, None] + beta[None, :]
    h_cells = av * digamma(av + 1.0)

    uniq_r, idx_r, mult_r = _row_value_index(rows)
    ar = uniq_r[:, None] + (kj * beta)[None, :]
    h_rows = ar * digamma(ar + 1.0)
    uniq_l, idx_l, mult_l = _row_value_index(cols)
    al = uniq_l[:, None] + (ki * beta)[None, :]
    h_cols = al * digamma(al + 1.0)

    out = np.empty(t_rows)
    for sl in _chunks(t_rows, nodes):
        ev_rows = _gather_sum(ev_tab, idx_c[sl], mult_c[sl])
        s = (
            _gather_sum(h_rows, idx_r[sl], mult_r[sl])
            + _gather_sum(h_cols, idx_l[sl], mult_l[sl])
            - _gather_sum(h_cells, idx_c[sl], mult_c[sl])
        )
        ev_base, psi_a1, big_a = _total_tables(totals[sl], kb)
        est = psi_a1 - s / big_a
        logmass = ev_rows + ev_base + log_prior[None, :]
        logmass -= logmass.max(axis=1, keepdims=True)
        wgt = np.exp(logmass)
        out[sl] = (wgt * est).sum(axis=1) / wgt.sum(axis=1)
    return out


def _with_convergence_check(eval_fn, spec: QuadratureSpec, n_max: int) -> float:
    base = _effective_nodes(spec, n_max)
    value = float(eval_fn(base)) / _LN2
    if spec.check_convergence:
        doubled = float(eval_fn(2 * base)) / _LN2
        if abs(doubled - value) > 1e-6:
            raise QuadratureConvergenceError(
                f"quadrature moved {abs(doubled - value):.3e} bits on node doubling"
            )
        value = doubled
    return value


def nsb_entropy(c, spec: QuadratureSpec = _DEFAULT_SPEC) -> float:
    """Entropy posterior mean under the flat-entropy Dirichlet mixture, bits."""
    counts = _counts_1d(c)[None, :]
    n = int(counts.sum())
    return _with_convergence_check(
        lambda nodes: _nsb_entropy_nats(counts, spec, nodes)[0], spec, n
    )


def nsb_mi(j, spec: QuadratureSpec = _DEFAULT_SPEC) -> float:
    """MI posterior mean under a single flat-entropy mixture on the joint, bits."""
    joint = _counts_2d(j)[None, :, :]
    n = int(joint.sum())
    return _with_convergence_check(
        lambda nodes: _nsb_mi_nats(joint, spec, nodes)[0], spec, n
    )


def nsb_entropy_batch(counts, spec: QuadratureSpec = _DEFAULT_SPEC) -> np.ndarray:
    """nsb_entropy for each row of a (T, k) count array, in bits.

    Rows may have different totals.  Skips the per-call doubling check (the
    node rule is validated once by the regression suite); pass a spec with
    more nodes to tighten manually.
    """
    arr = np.asarray(counts, dtype=np.int64)
    nodes = _effective_nodes(spec, int(arr.sum(axis=1).max()) if arr.size else 0)
    return _nsb_entropy_nats(arr, spec, nodes) / _LN2


def nsb_mi_batch(joints, spec: QuadratureSpec = _DEFAULT_SPEC) -> np.ndarray:
    """nsb_mi for each (ki, kj) slice of a (T, ki, kj) count array, in bits."""
    arr = np.asarray(joints, dtype=np.int64)
    nodes = _effective_nodes(spec, int(arr.sum(axis=(1, 2)).max()) if arr.size else 0)
    return _nsb_mi_nats(arr, spec, nodes) / _LN2
