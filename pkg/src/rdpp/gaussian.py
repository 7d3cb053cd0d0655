"""Scalar Gaussian indirect rate-distortion-perception-privacy problem.

Model: ``U = rho (sigma_U / sigma_S) S + Ut`` with ``Ut`` independent of ``S``,
observation ``X = S + gamma Ut + N`` and affine test channel ``Y = c X + Z``.
Distortion is squared error against ``S``, perception is W2 between the
laws of ``S`` and ``Y``, and privacy is Sibson leakage of order ``beta``.
Budgets set to ``None`` are unbounded.
"""

from __future__ import annotations

import math
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from . import renyi
from .errors import DomainError
from .parallel import resolve_workers

CONSTRAINT_TOL = 1e-9
SIGMA_Z_SQ_MIN = 1e-12
PRIVACY_METRICS = ("unconditional", "conditional")

# bisection steps on the SNR variable after grid bracketing
_BISECT_STEPS = 80
_T_GRID_POINTS = 400
_T_FLOOR = 1e-12


@dataclass(frozen=True)
class GaussianModel:
    sigma_s_sq: float
    sigma_u_sq: float
    rho: float
    gamma: float
    sigma_n_sq: float

    def __post_init__(self):
        for name in ("sigma_s_sq", "sigma_u_sq", "rho", "gamma", "sigma_n_sq"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.sigma_s_sq <= 0 or self.sigma_u_sq <= 0:
            raise DomainError("sigma_s_sq and sigma_u_sq must be positive")
        if self.sigma_n_sq < 0:
            raise DomainError("sigma_n_sq must be nonnegative")
        if abs(self.rho) > 1:
            raise DomainError("rho must lie in [-1, 1]")
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative")

    @property
    def sigma_s(self) -> float:
        return math.sqrt(self.sigma_s_sq)

    @property
    def sigma_u(self) -> float:
        return math.sqrt(self.sigma_u_sq)


@dataclass(frozen=True)
class DerivedMoments:
    sigma_ut_sq: float
    sigma_x_sq: float


@dataclass(frozen=True)
class AffineChannel:
    c: float
    sigma_z_sq: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise DomainError("c must be finite")
        if not (math.isfinite(self.sigma_z_sq) and self.sigma_z_sq > 0):
            raise DomainError(f"sigma_z_sq must be positive and finite, got {self.sigma_z_sq}")


@dataclass(frozen=True)
class Thresholds:
    """Distortion, perception (W2) and privacy budgets plus the two orders.

    ``None`` for ``D``, ``Delta`` or ``eps`` means the constraint is absent.
    """

    D: Optional[float] = None
    Delta: Optional[float] = None
    eps: Optional[float] = None
    alpha: float = 2.0
    beta: float = 2.0

    def __post_init__(self):
        for name in ("D", "Delta", "eps"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be a finite nonnegative number or None")
        if not (self.alpha > 1 and self.beta > 1):
            raise DomainError("alpha and beta must exceed 1")


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    slack_distortion: float
    slack_perception_low: float
    slack_perception_high: float
    slack_privacy: float


@dataclass(frozen=True)
class SolveResult:
    status: str
    channel: Optional[AffineChannel]
    rate_bits: Optional[float]
    distortion: Optional[float] = None
    sigma_y: Optional[float] = None
    leakage_bits: Optional[float] = None
    cond_leakage_bits: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


@dataclass
class TradeoffSurface:
    """Minimum rate over a (D, eps) grid; infeasible cells hold NaN."""

    d_axis: np.ndarray
    eps_axis: np.ndarray
    rate_grid: np.ndarray
    Delta: Optional[float]
    alpha: float
    beta: float
    privacy: str = "unconditional"
    channels: list = field(default_factory=list, repr=False)

    @property
    def feasible(self) -> np.ndarray:
        return ~np.isnan(self.rate_grid)


@dataclass(frozen=True)
class LeakageRow:
    gamma: float
    c: float
    sigma_z_sq: float
    leak_uncond_bits: float
    leak_cond_bits: float


def derive_moments(model: GaussianModel) -> DerivedMoments:
    sigma_ut_sq = (1.0 - model.rho**2) * model.sigma_u_sq
    sigma_x_sq = model.sigma_s_sq + model.gamma**2 * sigma_ut_sq + model.sigma_n_sq
    return DerivedMoments(sigma_ut_sq=sigma_ut_sq, sigma_x_sq=sigma_x_sq)


def _half_log(x: float) -> float:
    return 0.5 * math.log2(1.0 + x)


def rate(model: GaussianModel, ch: AffineChannel, alpha: float) -> float:
    """Sibson rate ``I_alpha(X;Y)`` of the affine channel, in bits."""
    sx2 = derive_moments(model).sigma_x_sq
    return _half_log(alpha * ch.c**2 * sx2 / ch.sigma_z_sq)


def rate_from_moments(sxx: float, syy: float, sxy: float, alpha: float) -> float:
    """Gaussian Sibson information from second moments of a jointly Gaussian pair."""
    # exact over the rationals: the float difference cancels badly at high SNR
    det = float(Fraction(sxx) * Fraction(syy) - Fraction(sxy) ** 2)
    if not det > 0:
        raise DomainError("covariance is degenerate: need sxx * syy > sxy**2")
    return _half_log(alpha * sxy**2 / det)


def distortion(model: GaussianModel, ch: AffineChannel) -> float:
    m = derive_moments(model)
    c = ch.c
    return (
        (1.0 - c) ** 2 * model.sigma_s_sq
        + c**2 * model.gamma**2 * m.sigma_ut_sq
        + c**2 * model.sigma_n_sq
        + ch.sigma_z_sq
    )


def distortion_from_moments(model: GaussianModel, sigma_xy: float, sigma_y_sq: float) -> float:
    """``E[(S - Y)^2]`` for any test channel with the given ``Cov(X,Y)`` and ``Var(Y)``."""
    sx2 = derive_moments(model).sigma_x_sq
    return model.sigma_s_sq + sigma_y_sq - 2.0 * model.sigma_s_sq / sx2 * sigma_xy


def output_variance(model: GaussianModel, ch: AffineChannel) -> float:
    return ch.c**2 * derive_moments(model).sigma_x_sq + ch.sigma_z_sq


def gaussian_w2(sigma_a: float, sigma_b: float) -> float:
    """W2 distance between two centred scalar Gaussians given their standard deviations."""
    return abs(sigma_a - sigma_b)


def _cov_ux(model: GaussianModel) -> float:
    return model.rho * model.sigma_u * model.sigma_s + model.gamma * derive_moments(model).sigma_ut_sq


def rho_uy_sq(model: GaussianModel, ch: AffineChannel) -> float:
    num = ch.c**2 * _cov_ux(model) ** 2
    return num / (model.sigma_u_sq * output_variance(model, ch))


def unconditional_leakage(model: GaussianModel, ch: AffineChannel, beta: float) -> float:
    """Sibson leakage ``I_beta(U;Y)`` in bits."""
    r2 = rho_uy_sq(model, ch)
    return _half_log(beta * r2 / (1.0 - r2))


def conditional_leakage(model: GaussianModel, ch: AffineChannel, beta: float) -> float:
    """``I_beta(U;Y|S)`` with an S-dependent reference kernel, in bits.

    Zero whenever ``gamma == 0`` or ``c == 0``.
    """
    num = ch.c**2 * model.gamma**2 * derive_moments(model).sigma_ut_sq
    if num == 0:
        return 0.0
    return _half_log(beta * num / (ch.c**2 * model.sigma_n_sq + ch.sigma_z_sq))


def _leakage(model, ch, beta, privacy):
    if privacy == "unconditional":
        return unconditional_leakage(model, ch, beta)
    if privacy == "conditional":
        return conditional_leakage(model, ch, beta)
    raise DomainError(f"privacy must be one of {PRIVACY_METRICS}, got {privacy!r}")


def _perception_band(model: GaussianModel, Delta: Optional[float]):
    if Delta is None:
        return 0.0, math.inf
    return max(model.sigma_s - Delta, 0.0) ** 2, (model.sigma_s + Delta) ** 2


def check_feasible(
    model: GaussianModel, ch: AffineChannel, th: Thresholds, privacy: str = "unconditional"
) -> FeasibilityReport:
    sy2 = output_variance(model, ch)
    low, high = _perception_band(model, th.Delta)
    slack_d = math.inf if th.D is None else th.D - distortion(model, ch)
    leak = _leakage(model, ch, th.beta, privacy)
    slack_p = math.inf if th.eps is None else th.eps - leak
    slacks = (slack_d, sy2 - low, high - sy2, slack_p)
    return FeasibilityReport(
        feasible=all(s >= -CONSTRAINT_TOL for s in slacks),
        slack_distortion=slack_d,
        slack_perception_low=slacks[1],
        slack_perception_high=slacks[2],
        slack_privacy=slack_p,
    )


def search_region(model: GaussianModel, th: Thresholds):
    """Box ``(c_max, sigma_z_sq_max)`` over which the solver looks for channels."""
    sx = math.sqrt(derive_moments(model).sigma_x_sq)
    if th.Delta is None:
        return math.inf, math.inf
    top = model.sigma_s + th.Delta
    return 1.0 + top / sx, top**2


def _snr_cap(model: GaussianModel, th: Thresholds, privacy: str) -> float:
    """Largest ``t = c^2 sigma_X^2 / sigma_Z^2`` the privacy budget admits.

    Along a ray of fixed ``t`` both leakages depend on ``t`` alone.
    """
    if th.eps is None:
        return math.inf
    g = 2.0 ** (2.0 * th.eps) - 1.0
    m = derive_moments(model)
    if privacy == "unconditional":
        r2_ux = _cov_ux(model) ** 2 / (model.sigma_u_sq * m.sigma_x_sq)
        if r2_ux == 0:
            return math.inf
        s = (g / (th.beta + g)) / r2_ux
        return math.inf if s >= 1 else s / (1.0 - s)
    if privacy == "conditional":
        trace = model.gamma**2 * m.sigma_ut_sq
        if trace == 0:
            return math.inf
        if g == 0:
            return 0.0
        rhs = th.beta * trace / g - model.sigma_n_sq
        return math.inf if rhs <= 0 else m.sigma_x_sq / rhs
    raise DomainError(f"privacy must be one of {PRIVACY_METRICS}, got {privacy!r}")


def _gain_interval(model: GaussianModel, th: Thresholds, t):
    """Admissible gains ``c >= 0`` at SNR ``t > 0`` for distortion and perception.

    Vectorized over ``t``; returns ``(lo, hi)`` with ``lo > hi`` when empty.
    """
    t = np.asarray(t, dtype=float)
    m = derive_moments(model)
    s2, sx2 = model.sigma_s_sq, m.sigma_x_sq
    residual = sx2 - s2
    lo = np.sqrt(SIGMA_Z_SQ_MIN * t / sx2)
    hi = np.full_like(t, math.inf)
    if th.D is not None:
        quad = s2 + residual + sx2 / t
        disc = s2**2 - quad * (s2 - th.D)
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.maximum(lo, (s2 - root) / quad)
        hi = np.where(disc < 0, -math.inf, np.minimum(hi, (s2 + root) / quad))
    if th.Delta is not None:
        low_sq, high_sq = _perception_band(model, th.Delta)
        scale = np.sqrt(sx2 * (1.0 + t) / t)
        lo = np.maximum(lo, math.sqrt(low_sq) / scale)
        hi = np.minimum(hi, math.sqrt(high_sq) / scale)
        c_max, _ = search_region(model, th)
        hi = np.minimum(hi, c_max)
    return lo, hi


def _zero_gain_noise(model: GaussianModel, th: Thresholds) -> Optional[float]:
    """Smallest admissible ``sigma_Z^2`` for the constant channel ``c = 0``, if any."""
    low, high = _perception_band(model, th.Delta)
    v_lo = max(low, SIGMA_Z_SQ_MIN)
    v_hi = high if th.D is None else min(high, th.D - model.sigma_s_sq)
    return v_lo if v_lo <= v_hi else None


def _result(model, th, ch) -> SolveResult:
    return SolveResult(
        status="feasible",
        channel=ch,
        rate_bits=rate(model, ch, th.alpha),
        distortion=distortion(model, ch),
        sigma_y=math.sqrt(output_variance(model, ch)),
        leakage_bits=unconditional_leakage(model, ch, th.beta),
        cond_leakage_bits=conditional_leakage(model, ch, th.beta),
    )


def solve(model: GaussianModel, th: Thresholds, privacy: str = "unconditional") -> SolveResult:
    """Minimum Sibson rate over affine Gaussian test channels.

    The rate depends on ``(c, sigma_Z^2)`` only through the SNR
    ``t = c^2 sigma_X^2 / sigma_Z^2``; at fixed ``t`` the privacy constraint is
    a bound on ``t`` and the remaining constraints cut out an interval of
    gains. The smallest feasible ``t`` is bracketed on a log grid and refined
    by bisection. Among channels at that ``t`` the smallest gain is returned.
    """
    v0 = _zero_gain_noise(model, th)
    if v0 is not None:
        return _result(model, th, AffineChannel(0.0, v0))

    t_cap = _snr_cap(model, th, privacy)
    sx2 = derive_moments(model).sigma_x_sq
    c_max, _ = search_region(model, th)
    if math.isinf(c_max):
        # without a perception budget the distortion root already keeps c below 2
        c_max = 2.0
    t_top = min(t_cap, c_max**2 * sx2 / SIGMA_Z_SQ_MIN)
    if t_top <= _T_FLOOR:
        return SolveResult(status="infeasible", channel=None, rate_bits=None)

    grid = np.geomspace(_T_FLOOR, t_top, _T_GRID_POINTS)
    lo, hi = _gain_interval(model, th, grid)
    ok = np.flatnonzero(lo <= hi)
    if ok.size == 0:
        return SolveResult(status="infeasible", channel=None, rate_bits=None)
    i = ok[0]
    t_bad, t_good = (grid[i - 1] if i > 0 else 0.0), grid[i]
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (t_bad + t_good)
        if mid <= t_bad or mid >= t_good:
            break
        l_mid, h_mid = _gain_interval(model, th, mid)
        if l_mid <= h_mid:
            t_good = mid
        else:
            t_bad = mid
    c_lo, _ = _gain_interval(model, th, t_good)
    c = float(c_lo)
    ch = AffineChannel(c, max(c**2 * sx2 / t_good, SIGMA_Z_SQ_MIN))
    if not check_feasible(model, ch, th, privacy).feasible:
        return SolveResult(status="infeasible", channel=None, rate_bits=None)
    return _result(model, th, ch)


def sweep(
    model: GaussianModel,
    d_axis: Sequence[float],
    eps_axis: Sequence[float],
    Delta: Optional[float],
    alpha: float,
    beta: float,
    privacy: str = "unconditional",
    workers: Optional[int] = None,
) -> TradeoffSurface:
    d_axis = np.asarray(d_axis, dtype=float)
    eps_axis = np.asarray(eps_axis, dtype=float)
    for axis, name in ((d_axis, "D"), (eps_axis, "eps")):
        if axis.ndim != 1 or axis.size == 0 or np.any(np.diff(axis) <= 0):
            raise DomainError(f"{name} axis must be non-empty and strictly increasing")

    def row(d):
        return [
            solve(model, Thresholds(float(d), Delta, float(e), alpha, beta), privacy)
            for e in eps_axis
        ]

    n = resolve_workers(workers)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(row, d_axis))
    else:
        rows = [row(d) for d in d_axis]
    grid = np.array(
        [[r.rate_bits if r.feasible else np.nan for r in rs] for rs in rows], dtype=float
    )
    return TradeoffSurface(d_axis, eps_axis, grid, Delta, alpha, beta, privacy, channels=rows)


def leakage_curves(
    model: GaussianModel,
    channels: Sequence[AffineChannel],
    beta: float,
    gammas: Sequence[float],
) -> list[LeakageRow]:
    rows = []
    for g in gammas:
        m = replace(model, gamma=float(g))
        for ch in channels:
            rows.append(
                LeakageRow(
                    gamma=float(g),
                    c=ch.c,
                    sigma_z_sq=ch.sigma_z_sq,
                    leak_uncond_bits=unconditional_leakage(m, ch, beta),
                    leak_cond_bits=conditional_leakage(m, ch, beta),
                )
            )
    return rows


def _lattice(center: float, step: float, n: int) -> np.ndarray:
    # points sit on a lattice anchored at the origin, not at the slice mean
    base = round(center / step) * step
    return base + step * (np.arange(n) - (n - 1) / 2.0)


def _cell_probs(points: np.ndarray, mean, sd: float) -> np.ndarray:
    edges = 0.5 * (points[1:] + points[:-1])
    z = (edges[None, :] - np.atleast_1d(mean)[:, None]) / sd
    cdf = ndtr(z)
    ones = np.ones((cdf.shape[0], 1))
    probs = np.diff(np.hstack([0 * ones, cdf, ones]), axis=1)
    return probs / probs.sum(axis=1, keepdims=True)


def discretized_slice_sibson(
    model: GaussianModel,
    ch: AffineChannel,
    beta: float,
    grid_halfwidth: float = 6.0,
    n_points: int = 512,
    slice_point: float = 0.0,
) -> float:
    """Sibson ``I_beta`` of a quantized conditional slice ``(U, Y) | S = s``.

    The slice is ``(mu_U + Ut, c s + c gamma Ut + c N + Z)``. Both coordinates
    are quantized to ``n_points`` cells spanning ``grid_halfwidth`` standard
    deviations around the slice mean; the result converges to
    :func:`conditional_leakage` as the grid refines.
    """
    if n_points < 64:
        raise DomainError("n_points must be at least 64")
    if grid_halfwidth < 5:
        raise DomainError("grid_halfwidth must be at least 5 standard deviations")
    m = derive_moments(model)
    sd_u = math.sqrt(m.sigma_ut_sq)
    noise_var = ch.c**2 * model.sigma_n_sq + ch.sigma_z_sq
    gain = ch.c * model.gamma
    if sd_u == 0 or gain == 0:
        return 0.0
    sd_y = math.sqrt(gain**2 * m.sigma_ut_sq + noise_var)
    mu_u = model.rho * model.sigma_u / model.sigma_s * slice_point
    mu_y = ch.c * slice_point

    u = _lattice(mu_u, 2 * grid_halfwidth * sd_u / (n_points - 1), n_points)
    y = _lattice(mu_y, 2 * grid_halfwidth * sd_y / (n_points - 1), n_points)
    pu = _cell_probs(u, mu_u, sd_u)[0]
    rows = _cell_probs(y, mu_y + gain * (u - mu_u), math.sqrt(noise_var))
    return renyi.sibson_mi(pu, rows, beta)
