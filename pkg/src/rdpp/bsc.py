"""Binary symmetric channel benchmark with closed-form index law.

Uniform input, crossover ``p`` and the uniform proposal (the Sibson optimizer
for every order by symmetry) give ``P(K=1) = 1/2 + p`` and
``P(K=k) = (1/2) r^(k-1)`` for ``k >= 2`` with ``r = 1 - 1 / (2 (1 - p))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import poisson
from .errors import DomainError
from .renyi import DiscreteChannel, DiscretePmf

ENGINE_TOL = 1e-12
TV_TOL_AT_1E5 = 0.01


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 0.5:
        raise DomainError(f"crossover probability must lie in [0, 0.5], got {p}")
    return p


def bsc_channel(p: float):
    """``(input pmf, channel, proposal)`` for the uniform-input BSC."""
    p = _check_p(p)
    px = DiscretePmf(np.array([0.5, 0.5]))
    ch = DiscreteChannel(np.array([[1.0 - p, p], [p, 1.0 - p]]))
    return px, ch, DiscretePmf(np.array([0.5, 0.5]))


def closed_form_rank_pmf(p: float, k):
    p = _check_p(p)
    k = np.asarray(k)
    if np.any(k < 1):
        raise DomainError("k must be at least 1")
    r = 1.0 - 1.0 / (2.0 * (1.0 - p))
    out = np.where(k == 1, 0.5 + p, 0.5 * np.power(r, np.maximum(k - 1, 0)))
    return float(out) if out.ndim == 0 else out


def h2_curve(p_grid: Sequence[float]) -> list[tuple[float, float]]:
    rows = []
    for p in p_grid:
        if not 0.0 <= p < 0.5:
            raise DomainError(f"grid point {p} outside [0, 0.5)")
        px, ch, q = bsc_channel(p)
        rows.append((float(p), poisson.renyi_K_integer(ch, q, px, 2)))
    return rows


@dataclass
class BscValidation:
    p: float
    n_samples: int
    seed: int
    k_max: int
    closed_form: np.ndarray
    exact_engine: np.ndarray
    empirical: np.ndarray
    max_engine_dev: float
    tv_index: float
    tv_output: float
    p_same: float
    tv_tol: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def validate(
    p: float = 0.1,
    n_samples: int = 100_000,
    seed: int = 7,
    k_max: int = 50,
    tv_tol: Optional[float] = None,
    workers: Optional[int] = None,
) -> BscValidation:
    """Closed form vs exact engine vs Poisson-race simulation at input ``x = 0``.

    The TV tolerance defaults to 0.01 at 10^5 samples and scales as
    ``n^(-1/2)``; the output-law tolerance is ``3 sqrt(2 / n)``.
    """
    p = _check_p(p)
    px, ch, q = bsc_channel(p)
    ks = np.arange(1, k_max + 1)
    closed = closed_form_rank_pmf(p, ks)
    engine = poisson.exact_rank_pmf(ch, q, px, k_max=k_max)
    sim = poisson.simulate_profile(ch, q, 0, n_samples, seed, workers=workers)
    # by symmetry the conditional law given x = 0 equals the unconditional one
    emp = np.zeros(max(k_max, sim.index_counts.size))
    emp[: sim.index_counts.size] = sim.index_counts / n_samples
    if tv_tol is None:
        tv_tol = TV_TOL_AT_1E5 * math.sqrt(1e5 / n_samples)
    max_dev = float(np.max(np.abs(closed - engine.pmf)))
    p_same = float(sim.output_counts[0] / n_samples)
    checks = {
        "engine_matches_closed_form": max_dev <= ENGINE_TOL,
        "index_tv": sim.tv_index <= tv_tol,
        "output_tv": sim.tv_output <= 3.0 * math.sqrt(2.0 / n_samples),
    }
    return BscValidation(
        p=p,
        n_samples=int(n_samples),
        seed=int(seed),
        k_max=int(k_max),
        closed_form=closed,
        exact_engine=engine.pmf,
        empirical=emp[:k_max],
        max_engine_dev=max_dev,
        tv_index=sim.tv_index,
        tv_output=sim.tv_output,
        p_same=p_same,
        tv_tol=tv_tol,
        checks=checks,
    )
