"""Brute-force reference for the affine Gaussian program.

Written from the model formulas directly so it shares no code with the solver.
"""

import numpy as np


def _fields(model, c, z, beta):
    ut = (1 - model.rho**2) * model.sigma_u_sq
    sx2 = model.sigma_s_sq + model.gamma**2 * ut + model.sigma_n_sq
    sy2 = c**2 * sx2 + z
    dist = (1 - c) ** 2 * model.sigma_s_sq + c**2 * (model.gamma**2 * ut + model.sigma_n_sq) + z
    cov = model.rho * np.sqrt(model.sigma_u_sq * model.sigma_s_sq) + model.gamma * ut
    r2 = c**2 * cov**2 / (model.sigma_u_sq * sy2)
    leak_u = 0.5 * np.log2(1 + beta * r2 / (1 - r2))
    with np.errstate(divide="ignore", invalid="ignore"):
        leak_c = np.where(
            c * model.gamma * ut == 0,
            0.0,
            0.5 * np.log2(1 + beta * c**2 * model.gamma**2 * ut / (c**2 * model.sigma_n_sq + z)),
        )
    return sx2, sy2, dist, leak_u, leak_c


def brute_force(model, th, privacy="unconditional", n=400, rounds=3, tol=1e-9):
    """Minimum rate over a (c, sigma_Z^2) grid refined around the incumbent."""
    s = np.sqrt(model.sigma_s_sq)
    top = s + (th.Delta if th.Delta is not None else 3.0)
    c_lo, c_hi = 0.0, 1.0 + top
    lz_lo, lz_hi = -12.0, np.log10(top**2 + 1.0)
    best = (np.inf, None)
    for _ in range(rounds + 1):
        c = np.linspace(c_lo, c_hi, n)[:, None]
        z = 10.0 ** np.linspace(lz_lo, lz_hi, n)[None, :]
        sx2, sy2, dist, lu, lc = _fields(model, c, z, th.beta)
        ok = np.ones(np.broadcast(c, z).shape, dtype=bool)
        if th.D is not None:
            ok &= dist <= th.D + tol
        if th.Delta is not None:
            sy = np.sqrt(sy2)
            ok &= np.abs(sy - s) <= th.Delta + tol
        if th.eps is not None:
            ok &= (lu if privacy == "unconditional" else lc) <= th.eps + tol
        r = 0.5 * np.log2(1 + th.alpha * c**2 * sx2 / z)
        r = np.where(ok, r, np.inf)
        i, j = np.unravel_index(np.argmin(r), r.shape)
        if r[i, j] < best[0]:
            best = (float(r[i, j]), (float(c[i, 0]), float(z[0, j])))
        if best[1] is None:
            return best
        bc, bz = best[1]
        span_c = (c_hi - c_lo) / 10
        span_z = (lz_hi - lz_lo) / 10
        c_lo, c_hi = max(0.0, bc - span_c), bc + span_c
        lz_lo, lz_hi = max(-12.0, np.log10(bz) - span_z), np.log10(bz) + span_z
    return best
