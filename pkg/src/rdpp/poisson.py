"""Poisson functional representation on finite alphabets.

Given an input ``x``, marks ``Y_i ~ Q`` arrive at unit-rate Poisson times
``T_i`` and the selected index is ``K = argmin_i T_i / L_x(Y_i)`` with
``L_x = P(.|x) / Q``. The selected mark has law ``P(.|x)`` exactly, and ``K``
is a mixture of geometric laws whose success probabilities are
``q_x(y) = 1 / M_x(L_x(y))`` with ``M_x(l) = E_Q[max(L_x, l)]``.
"""

from __future__ import annotations

import bisect
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import renyi
from .errors import AbsoluteContinuityError, CapacityError, DomainError, PrecisionError
from .parallel import resolve_workers

TAIL_TARGET = 1e-12
K_MAX_CAP = 1_000_000
ENUMERATION_CAP = 10**8
SIM_BLOCK = 4096

Conditioning = Union[int, np.ndarray, list, tuple]


class ApproximationWarning(UserWarning):
    """A requested exact quantity was replaced by a Monte Carlo estimate."""


@dataclass
class RankProfile:
    """Truncated law of the selected index plus its exact tail.

    ``pmf[k - 1] = P(K = k)`` for ``k = 1..k_max``. ``weights`` and
    ``success`` hold the geometric mixture the law was built from, which
    lets tail functionals be bracketed rigorously.
    """

    pmf: np.ndarray
    tail_mass: float
    conditioning: Union[int, str]
    weights: Optional[np.ndarray] = None
    success: Optional[np.ndarray] = None

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=float)
        if self.pmf.ndim != 1 or self.pmf.size < 1:
            raise DomainError("rank pmf must be a non-empty 1-D array")
        if np.any(self.pmf < 0) or self.tail_mass < 0:
            raise DomainError("rank pmf and tail mass must be nonnegative")
        total = self.pmf.sum() + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"rank pmf plus tail sums to {total:.17g}, not 1")

    @property
    def k_max(self) -> int:
        return self.pmf.size


@dataclass
class SimReport:
    n_samples: int
    seed: int
    x: Union[int, str]
    index_counts: np.ndarray
    output_counts: np.ndarray
    tv_index: float
    tv_output: float
    exact: RankProfile = field(repr=False)

    @property
    def empirical_pk(self) -> np.ndarray:
        return self.index_counts / self.n_samples


def _setup(ch, q):
    w = renyi.as_channel(ch)
    q = renyi.as_pmf(q)
    if q.size != w.shape[1]:
        raise DomainError(f"proposal has {q.size} symbols, channel has {w.shape[1]} outputs")
    return w, q


def _row(w: np.ndarray, x: int) -> np.ndarray:
    if not (0 <= int(x) < w.shape[0]) or int(x) != x:
        raise DomainError(f"input symbol {x!r} outside 0..{w.shape[0] - 1}")
    return w[int(x)]


def likelihood_ratios(ch, q, x) -> np.ndarray:
    """``L_x(y)`` for every output; zero where both laws vanish."""
    w, q = _setup(ch, q)
    row = _row(w, x)
    bad = (q == 0) & (row > 0)
    if np.any(bad):
        raise AbsoluteContinuityError(
            f"proposal vanishes on outputs {np.flatnonzero(bad).tolist()} charged by row {x}"
        )
    out = np.zeros_like(row)
    np.divide(row, q, out=out, where=q > 0)
    return out


def likelihood_ratio(ch, q, x, y) -> float:
    return float(likelihood_ratios(ch, q, x)[y])


def _check_level(ell) -> float:
    ell = float(ell)
    if not ell > 0:
        raise DomainError(f"level must be positive, got {ell}")
    return ell


def m_profile(ch, q, x, ell) -> float:
    """``M_x(l) = E_Q[max(L_x, l)]``."""
    ell = _check_level(ell)
    lr = likelihood_ratios(ch, q, x)
    q = renyi.as_pmf(q)
    return float(np.sum(q * np.maximum(lr, ell)))


def success_prob(ch, q, x, y) -> float:
    """Local success probability ``q_x(y) = 1 / M_x(L_x(y))``."""
    lr = likelihood_ratios(ch, q, x)
    if lr[y] <= 0:
        raise DomainError(f"output {y} is outside the support of row {x}")
    return 1.0 / m_profile(ch, q, x, lr[y])


def earlier_loss_prob(ch, q, x, ell) -> float:
    """``a(l) = E_Q[(1 - L_x / l)_+]``: chance one earlier arrival loses to level ``l``."""
    ell = _check_level(ell)
    lr = likelihood_ratios(ch, q, x)
    return float(np.sum(renyi.as_pmf(q) * np.maximum(1.0 - lr / ell, 0.0)))


def future_beat_intensity(ch, q, x, ell) -> float:
    """``b(l) = E_Q[(L_x / l - 1)_+]``: rate of later arrivals beating level ``l``."""
    ell = _check_level(ell)
    lr = likelihood_ratios(ch, q, x)
    return float(np.sum(renyi.as_pmf(q) * np.maximum(lr / ell - 1.0, 0.0)))


def success_table(ch, q) -> np.ndarray:
    """Matrix of ``q_x(y)``; entries outside each row's support are NaN."""
    w, q = _setup(ch, q)
    table = np.full(w.shape, np.nan)
    for x in range(w.shape[0]):
        lr = likelihood_ratios(w, q, x)
        m = np.sum(q[None, :] * np.maximum(lr[None, :], lr[:, None]), axis=1)
        sup = w[x] > 0
        table[x, sup] = 1.0 / m[sup]
    return table


def geometric_mixture(ch, q, conditioning: Conditioning):
    """Weights and success probabilities of the geometric mixture for ``K``.

    ``conditioning`` is an input symbol or an input pmf (unconditional law).
    Identical success probabilities are merged.
    """
    w, q = _setup(ch, q)
    if np.ndim(conditioning) == 0:
        px = np.zeros(w.shape[0])
        _row(w, conditioning)
        px[int(conditioning)] = 1.0
    else:
        px = renyi.as_pmf(conditioning)
        if px.size != w.shape[0]:
            raise DomainError(f"input pmf has {px.size} symbols, channel has {w.shape[0]} rows")
    table = success_table(w, q)
    joint = px[:, None] * w
    mask = joint > 0
    succ, inverse = np.unique(table[mask], return_inverse=True)
    weights = np.bincount(inverse, weights=joint[mask], minlength=succ.size)
    return weights / weights.sum(), succ


def _tail(weights, success, k) -> float:
    # sum_{j > k} P(K = j) = E[(1 - q)^k]
    return float(np.sum(weights * np.power(1.0 - success, k)))


def default_k_max(weights, success, target: float = TAIL_TARGET, cap: int = K_MAX_CAP) -> int:
    """Smallest ``k`` whose exact tail mass is below ``target``, capped at ``cap``."""
    if _tail(weights, success, 1) < target:
        return 1
    worst = float(np.max(1.0 - success))
    hi = cap if worst >= 1 else min(cap, max(1, math.ceil(math.log(target) / math.log(worst)) + 1))
    if _tail(weights, success, hi) >= target:
        return hi
    lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail(weights, success, mid) < target:
            hi = mid
        else:
            lo = mid
    return hi


def exact_rank_pmf(ch, q, conditioning: Conditioning, k_max: Optional[int] = None) -> RankProfile:
    """Exact law of the selected index, truncated at ``k_max`` with exact tail mass."""
    weights, success = geometric_mixture(ch, q, conditioning)
    if k_max is None:
        k_max = default_k_max(weights, success)
    if int(k_max) < 1:
        raise DomainError("k_max must be at least 1")
    k = np.arange(int(k_max))
    pmf = np.sum(weights[:, None] * success[:, None] * np.power(1.0 - success[:, None], k), axis=0)
    tail = _tail(weights, success, int(k_max))
    label = int(conditioning) if np.ndim(conditioning) == 0 else "mixture"
    return RankProfile(pmf=pmf, tail_mass=tail, conditioning=label, weights=weights, success=success)


def _collision_mean(weights, success, m: int) -> float:
    """``E[prod q_j / (1 - prod (1 - q_j))]`` over ``m`` i.i.d. copies, by enumeration."""
    n = weights.size
    if n**m > ENUMERATION_CAP:
        raise CapacityError(
            f"exact enumeration needs {n}**{m} terms (cap {ENUMERATION_CAP}); "
            "pass monte_carlo_samples to accept an approximate estimate"
        )
    log_w = np.log(weights)
    log_q = np.log(success)
    with np.errstate(divide="ignore"):
        log_r = np.log1p(-np.minimum(success, 1.0))
    # vectorize over a suffix of d copies; loop over the remaining prefix
    d = m
    while d > 1 and n**d > 2_000_000:
        d -= 1
    idx = np.indices((n,) * d).reshape(d, -1)
    suf_w = log_w[idx].sum(axis=0)
    suf_q = log_q[idx].sum(axis=0)
    suf_r = log_r[idx].sum(axis=0)
    total = 0.0
    for prefix in itertools.product(range(n), repeat=m - d):
        pre = list(prefix)
        lw = suf_w + log_w[pre].sum()
        lq = suf_q + log_q[pre].sum()
        lr = suf_r + log_r[pre].sum()
        # 1 - prod(1 - q) = -expm1(sum log(1 - q)), stable when every q is small
        total += float(np.sum(np.exp(lw + lq) / -np.expm1(lr)))
    return total


def _collision_mean_mc(weights, success, m: int, n_samples: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    draws = success[rng.choice(success.size, size=(n_samples, m), p=weights)]
    with np.errstate(divide="ignore"):
        log_r = np.sum(np.log1p(-np.minimum(draws, 1.0)), axis=1)
    return float(np.mean(np.prod(draws, axis=1) / -np.expm1(log_r)))


def renyi_K_integer(
    ch, q, px, m: int, monte_carlo_samples: Optional[int] = None, seed: int = 0
) -> float:
    """Integer-order Rényi entropy ``H_m(K)`` of the unconditional index, in bits.

    Exact by enumerating ``m``-tuples of (input, output) pairs. When the
    enumeration exceeds :data:`ENUMERATION_CAP` a :class:`CapacityError` is
    raised unless ``monte_carlo_samples`` is given, in which case a Monte
    Carlo estimate is returned with an :class:`ApproximationWarning`.
    """
    if int(m) != m or m < 2:
        raise DomainError(f"order m must be an integer >= 2, got {m!r}")
    m = int(m)
    weights, success = geometric_mixture(ch, q, px)
    try:
        mean = _collision_mean(weights, success, m)
    except CapacityError:
        if monte_carlo_samples is None:
            raise
        warnings.warn(f"H_{m}(K) estimated by Monte Carlo", ApproximationWarning, stacklevel=2)
        mean = _collision_mean_mc(weights, success, m, monte_carlo_samples, seed)
    return float(max(math.log2(mean) / (1 - m), 0.0))


def _power_sum_bounds(profile: RankProfile, alpha: float):
    head = float(np.sum(np.power(profile.pmf, alpha)))
    # pmf is nonincreasing in k, so every tail term is at most min(p_kmax, tail)
    top = min(float(profile.pmf[-1]), profile.tail_mass)
    return head, head + top ** (alpha - 1.0) * profile.tail_mass


def renyi_K_truncated(profile: RankProfile, alpha: float) -> tuple[float, float]:
    """Bracket ``(lower, upper)`` on ``H_alpha(K)`` in bits from a truncated profile."""
    alpha = float(alpha)
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    s_lo, s_hi = _power_sum_bounds(profile, alpha)
    lower = math.log2(s_hi) / (1.0 - alpha)
    upper = math.log2(s_lo) / (1.0 - alpha)
    return max(lower, 0.0), max(upper, 0.0)


def renyi_K_upper(ch, q, px, alpha: float) -> float:
    """Upper bound on ``H_alpha(K)`` for real ``alpha > 2`` via integer orders ``m <= alpha``."""
    alpha = float(alpha)
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    top = int(math.floor(alpha)) if math.isfinite(alpha) else 2
    return min(renyi_K_integer(ch, q, px, m) for m in range(2, top + 1))


def log_moment_K(profile: RankProfile, tol: float = 1e-6) -> float:
    """``E[log2 K]`` with the truncation error bracketed below ``tol``."""
    lo, hi = log_moment_bracket(profile)
    if hi - lo > tol:
        raise PrecisionError(
            f"tail bracket width {hi - lo:.3g} exceeds {tol:.3g}; rebuild the profile with a larger k_max"
        )
    return 0.5 * (lo + hi)


def log_moment_bracket(profile: RankProfile) -> tuple[float, float]:
    k_max = profile.k_max
    head = float(np.sum(profile.pmf * np.log2(np.arange(1, k_max + 1))))
    if profile.tail_mass == 0:
        return head, head
    lower = head + profile.tail_mass * math.log2(k_max + 1)
    if profile.weights is None:
        return lower, math.inf
    # log2 j <= log2 k + (j - k) / (k ln 2) and sum_{j>k} q r^(j-1) (j - k) = r^k / q
    r_k = np.power(1.0 - profile.success, k_max)
    extra = np.sum(profile.weights * r_k / profile.success) / (k_max * math.log(2))
    upper = head + profile.tail_mass * math.log2(k_max) + float(extra)
    return lower, max(upper, lower)


class _Race:
    """Precomputed per-input quantities for repeated simulation."""

    def __init__(self, ch, q, x):
        w, q = _setup(ch, q)
        self.lr = likelihood_ratios(w, q, x).tolist()
        self.l_max = max(self.lr)
        if not self.l_max > 0:
            raise DomainError(f"conditional row {x} has no mass")
        self.cdf = np.cumsum(q).tolist()
        self.cdf[-1] = math.inf
        self.last = int(np.flatnonzero(q > 0)[-1])

    def run(self, rng: np.random.Generator, chunk: int = 8):
        lr, cdf, l_max = self.lr, self.cdf, self.l_max
        t = 0.0
        best = math.inf
        best_y, best_k = -1, 0
        i = 0
        while True:
            gaps = rng.standard_exponential(chunk).tolist()
            us = rng.random(chunk).tolist()
            for gap, u in zip(gaps, us):
                t += gap
                if t / l_max >= best:
                    return best_y, best_k
                i += 1
                y = min(bisect.bisect_right(cdf, u), self.last)
                ell = lr[y]
                # strict comparison keeps the earliest index on exact ties
                if ell > 0 and t / ell < best:
                    best, best_y, best_k = t / ell, y, i


def simulate_once(ch, q, x, rng: np.random.Generator) -> tuple[int, int]:
    """One draw of ``(Y, K)`` from the Poisson race conditioned on input ``x``."""
    return _Race(ch, q, x).run(rng)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(block,)))


def _simulate_block(races, xs_probs, seed, block, size):
    rng = _block_rng(seed, block)
    if xs_probs is None:
        xs = [0] * size
    else:
        xs = rng.choice(len(xs_probs), size=size, p=xs_probs).tolist()
    out = np.empty((size, 3), dtype=np.int64)
    for j, x in enumerate(xs):
        y, k = races[x].run(rng)
        out[j] = (x, y, k)
    return out


def simulate_profile(
    ch, q, x: Conditioning, n: int, seed: int, workers: Optional[int] = None
) -> SimReport:
    """Monte Carlo law of ``(Y, K)`` compared against the exact index law.

    Samples are split into fixed blocks of :data:`SIM_BLOCK`; block ``b`` draws
    from a generator keyed by ``(seed, b)``, so the report does not depend on
    the number of workers. ``x`` may be an input symbol or an input pmf.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be at least 1")
    w, qv = _setup(ch, q)
    if np.ndim(x) == 0:
        races = {0: _Race(w, qv, x)}
        probs = None
        target = w[int(x)]
        label: Union[int, str] = int(x)
    else:
        px = renyi.as_pmf(x)
        races = {i: _Race(w, qv, i) for i in range(w.shape[0]) if px[i] > 0}
        probs = px
        target = px[:, None] * w
        label = "mixture"

    sizes = [min(SIM_BLOCK, n - s) for s in range(0, n, SIM_BLOCK)]
    jobs = [(b, size) for b, size in enumerate(sizes)]
    n_workers = min(resolve_workers(workers), len(jobs))
    run = lambda job: _simulate_block(races, probs, seed, job[0], job[1])  # noqa: E731
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    draws = np.concatenate(parts)

    ks = draws[:, 2]
    index_counts = np.bincount(ks - 1)
    if probs is None:
        output_counts = np.bincount(draws[:, 1], minlength=w.shape[1])
        emp_out = output_counts / n
    else:
        output_counts = np.zeros(w.shape, dtype=np.int64)
        np.add.at(output_counts, (draws[:, 0], draws[:, 1]), 1)
        emp_out = output_counts / n
    tv_output = 0.5 * float(np.abs(emp_out - target).sum())

    exact = exact_rank_pmf(w, qv, x if probs is None else probs)
    if exact.k_max < index_counts.size:
        exact = exact_rank_pmf(w, qv, x if probs is None else probs, k_max=index_counts.size)
    tv_index = total_variation(index_counts / n, exact)
    return SimReport(
        n_samples=n,
        seed=int(seed),
        x=label,
        index_counts=index_counts,
        output_counts=output_counts,
        tv_index=tv_index,
        tv_output=tv_output,
        exact=exact,
    )


def total_variation(empirical: np.ndarray, exact: RankProfile) -> float:
    """TV distance between an empirical index law and an exact profile.

    ``empirical`` must not extend beyond ``exact.k_max``; the exact tail is
    counted as unmatched mass.
    """
    emp = np.zeros(exact.k_max)
    if empirical.size > exact.k_max:
        raise DomainError("empirical support exceeds the exact profile's k_max")
    emp[: empirical.size] = empirical
    return 0.5 * (float(np.abs(emp - exact.pmf).sum()) + exact.tail_mass)
