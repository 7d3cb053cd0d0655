"""Rényi information measures on finite alphabets.

All quantities are in bits. Orders are positive reals or ``math.inf``; the
Shannon order 1 and the min-entropy order ``inf`` use dedicated branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ShapeError

PMF_TOL = 1e-9
_LN2 = math.log(2.0)

def _check_probs(values, what: str = "pmf") -> np.ndarray:
    p = np.asarray(values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ShapeError(f"{what} must be a non-empty 1-D array, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise DomainError(f"{what} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PMF_TOL:
        raise DomainError(f"{what} sums to {p.sum():.15g}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    """Probability mass function on ``{0, ..., n-1}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _check_probs(self.probs)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights) -> "DiscretePmf":
        """Build a pmf from nonnegative weights, rescaling them to sum to one."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise DomainError("weights must be nonnegative with positive total")
        return cls(w / w.sum())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True, eq=False)
class DiscreteChannel:
    """Row-stochastic transition matrix ``rows[x, y] = P(y | x)``."""

    rows: np.ndarray

    def __post_init__(self):
        w = np.array(self.rows, dtype=float)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ShapeError(f"channel must be a non-empty 2-D array, got shape {w.shape}")
        for i, row in enumerate(w):
            _check_probs(row, what=f"channel row {i}")
        w.setflags(write=False)
        object.__setattr__(self, "rows", w)

    @property
    def n_in(self) -> int:
        return self.rows.shape[0]

    @property
    def n_out(self) -> int:
        return self.rows.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.rows, dtype=dtype)


def as_pmf(p) -> np.ndarray:
    if isinstance(p, DiscretePmf):
        return p.probs
    return _check_probs(p)


def as_channel(ch) -> np.ndarray:
    if isinstance(ch, DiscreteChannel):
        return ch.rows
    return DiscreteChannel(ch).rows


def check_order(order) -> float:
    a = float(order)
    if math.isnan(a) or a <= 0:
        raise DomainError(f"Rényi order must be positive or inf, got {order!r}")
    return a


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def renyi_entropy(p, order) -> float:
    """Rényi entropy of ``p`` in bits.

    >>> renyi_entropy([0.5, 0.5], 2)
    1.0
    """
    p = as_pmf(p)
    a = check_order(order)
    support = p[p > 0]
    if a == 1.0:
        return float(-np.sum(support * np.log2(support)))
    if math.isinf(a):
        return float(-math.log2(support.max()))
    log_power_sum = logsumexp(a * np.log(support))
    return float(log_power_sum / ((1.0 - a) * _LN2))


def kl_divergence(p, q) -> float:
    p, q = as_pmf(p), as_pmf(q)
    if p.shape != q.shape:
        raise ShapeError(f"alphabet sizes differ: {p.size} vs {q.size}")
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return float(np.sum(p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))))


def renyi_divergence(p, q, order) -> float:
    """Rényi divergence ``D_order(p || q)`` in bits; ``inf`` is a valid result."""
    p, q = as_pmf(p), as_pmf(q)
    if p.shape != q.shape:
        raise ShapeError(f"alphabet sizes differ: {p.size} vs {q.size}")
    a = check_order(order)
    if a == 1.0:
        return kl_divergence(p, q)
    mask = p > 0
    if math.isinf(a):
        if np.any(q[mask] == 0):
            return math.inf
        return float(np.max(np.log2(p[mask]) - np.log2(q[mask])))
    if a > 1 and np.any(q[mask] == 0):
        return math.inf
    # terms with p = 0 vanish for every positive order; for a < 1 so do q = 0 terms
    keep = mask & (q > 0)
    if not np.any(keep):
        return math.inf
    log_terms = a * np.log(p[keep]) + (1.0 - a) * np.log(q[keep])
    return float(logsumexp(log_terms) / ((a - 1.0) * _LN2))


def _check_pair(px, ch):
    px, w = as_pmf(px), as_channel(ch)
    if w.shape[0] != px.size:
        raise ShapeError(f"input pmf has {px.size} symbols but channel has {w.shape[0]} rows")
    return px, w


def joint_pmf(px, ch) -> np.ndarray:
    px, w = _check_pair(px, ch)
    return px[:, None] * w


def output_pmf(px, ch) -> np.ndarray:
    px, w = _check_pair(px, ch)
    return px @ w


def shannon_mi(px, ch) -> float:
    """Shannon mutual information ``I(X;Y)`` in bits."""
    px, w = _check_pair(px, ch)
    py = px @ w
    joint = px[:, None] * w
    mask = joint > 0
    ratio = w[mask] / np.broadcast_to(py, w.shape)[mask]
    return float(max(np.sum(joint[mask] * np.log2(ratio)), 0.0))


def _log_sibson_terms(px: np.ndarray, w: np.ndarray, a: float) -> np.ndarray:
    """Per-output ``ln sum_x p(x) w(y|x)^a`` with zero entries dropped."""
    active = px > 0
    logs = _log(px[active])[:, None] + a * _log(w[active])
    return logsumexp(logs, axis=0)


def sibson_mi(px, ch, order) -> float:
    """Sibson's mutual information ``I_order(X;Y)`` in bits."""
    px, w = _check_pair(px, ch)
    a = check_order(order)
    if a == 1.0:
        return shannon_mi(px, w)
    if math.isinf(a):
        return float(max(math.log2(w[px > 0].max(axis=0).sum()), 0.0))
    inner = _log_sibson_terms(px, w, a)
    value = a / (a - 1.0) * logsumexp(inner / a) / _LN2
    return float(max(value, 0.0))


def sibson_optimizer(px, ch, order) -> np.ndarray:
    """Output measure attaining the minimum in Sibson's definition.

    At order 1 this is the output marginal; at ``inf`` it is proportional to
    the column-wise maximum of the active rows.
    """
    px, w = _check_pair(px, ch)
    a = check_order(order)
    if a == 1.0:
        return px @ w
    if math.isinf(a):
        m = w[px > 0].max(axis=0)
        return m / m.sum()
    log_q = _log_sibson_terms(px, w, a) / a
    return np.exp(log_q - logsumexp(log_q))


def sibson_objective(px, ch, q, order) -> float:
    """``D_order(P_XY || P_X x Q)`` for an arbitrary output measure ``q``."""
    px, w = _check_pair(px, ch)
    q = as_pmf(q)
    if q.size != w.shape[1]:
        raise ShapeError(f"output measure has {q.size} symbols, channel has {w.shape[1]}")
    joint = (px[:, None] * w).ravel()
    product = (px[:, None] * q[None, :]).ravel()
    # renormalize against rounding so the pmf check cannot trip on valid input
    return renyi_divergence(joint / joint.sum(), product / product.sum(), order)
