"""Config ingestion and report emission (JSON and CSV).

JSON reports carry full double precision so they re-ingest without loss.
CSV tables are written with 12 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import gaussian as g
from . import poisson as pfr
from . import renyi
from .errors import DomainError

MODEL_KEYS = ("sigma_s_sq", "sigma_u_sq", "rho", "gamma", "sigma_n_sq")
BUDGET_KEYS = ("D", "Delta", "eps")

SURFACE_HEADER = ("D", "eps", "rate_bits", "feasible")
LEAKAGE_HEADER = ("gamma", "c", "sigma_z_sq", "leak_uncond_bits", "leak_cond_bits")
RANK_HEADER = ("k", "exact_pk", "empirical_pk")
BSC_HEADER = ("k", "closed_form", "exact_engine", "empirical")
H2_HEADER = ("p", "h2_bits")


class SchemaError(ValueError):
    """A JSON document is malformed or misses required fields."""


def fmt(x: Optional[float]) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def write_csv(path_or_buf, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    text = buf.getvalue()
    if path_or_buf is not None:
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return None if math.isnan(x) else x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def write_json(path_or_buf, doc: dict) -> str:
    text = dumps(doc)
    if path_or_buf is not None:
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8") as fh:
                fh.write(text)
    return text


def read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top-level JSON value must be an object")
    return doc


def _number(doc: dict, key: str, default=None, required=True, nullable=False):
    if key not in doc or doc[key] is None:
        if key in doc and nullable:
            return None
        if default is not None or not required:
            return default
        raise SchemaError(f"missing required key {key!r}")
    value = doc[key]
    if value in ("inf", "Infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"key {key!r} must be a number, got {value!r}")
    return float(value)


# ---------------------------------------------------------------- gaussian


def parse_gaussian(doc: dict) -> tuple[g.GaussianModel, g.Thresholds]:
    model = g.GaussianModel(*(_number(doc, k) for k in MODEL_KEYS))
    budgets = {k: _number(doc, k, required=False, nullable=True) for k in BUDGET_KEYS}
    th = g.Thresholds(
        **budgets,
        alpha=_number(doc, "alpha", default=2.0),
        beta=_number(doc, "beta", default=2.0),
    )
    return model, th


def gaussian_doc(model: g.GaussianModel, th: g.Thresholds) -> dict:
    doc = {k: getattr(model, k) for k in MODEL_KEYS}
    doc.update({k: getattr(th, k) for k in BUDGET_KEYS})
    doc.update(alpha=th.alpha, beta=th.beta)
    return doc


def solve_doc(model, th, result: g.SolveResult, privacy: str) -> dict:
    doc = gaussian_doc(model, th)
    doc["privacy"] = privacy
    doc["status"] = result.status
    ch = result.channel
    doc["solution"] = None if ch is None else {
        "c": ch.c,
        "sigma_z_sq": ch.sigma_z_sq,
        "rate_bits": result.rate_bits,
        "distortion": result.distortion,
        "sigma_y": result.sigma_y,
        "leakage_bits": result.leakage_bits,
        "cond_leakage_bits": result.cond_leakage_bits,
    }
    return doc


def parse_solve(doc: dict):
    model, th = parse_gaussian(doc)
    status = doc.get("status")
    if status not in ("feasible", "infeasible"):
        raise SchemaError(f"status must be 'feasible' or 'infeasible', got {status!r}")
    sol = doc.get("solution")
    if status == "infeasible":
        return model, th, g.SolveResult(status="infeasible", channel=None, rate_bits=None)
    if not isinstance(sol, dict):
        raise SchemaError("feasible report needs a 'solution' object")
    ch = g.AffineChannel(_number(sol, "c"), _number(sol, "sigma_z_sq"))
    result = g.SolveResult(
        status="feasible",
        channel=ch,
        rate_bits=_number(sol, "rate_bits"),
        distortion=_number(sol, "distortion"),
        sigma_y=_number(sol, "sigma_y"),
        leakage_bits=_number(sol, "leakage_bits"),
        cond_leakage_bits=_number(sol, "cond_leakage_bits"),
    )
    return model, th, result


def surface_rows(surface: g.TradeoffSurface):
    for i, d in enumerate(surface.d_axis):
        for j, e in enumerate(surface.eps_axis):
            r = surface.rate_grid[i, j]
            ok = not math.isnan(r)
            yield (float(d), float(e), float(r) if ok else None, "1" if ok else "0")


def leakage_rows(rows: Sequence[g.LeakageRow]):
    for r in rows:
        yield (r.gamma, r.c, r.sigma_z_sq, r.leak_uncond_bits, r.leak_cond_bits)


# ---------------------------------------------------------------- discrete channels


def parse_channel(doc: dict):
    """``(input pmf, channel, proposal or None)`` from a channel document."""
    if "input_pmf" not in doc or "transition" not in doc:
        raise SchemaError("channel document needs 'input_pmf' and 'transition'")
    try:
        px = np.asarray(doc["input_pmf"], dtype=float)
        w = np.asarray(doc["transition"], dtype=float)
        q = None if doc.get("proposal") is None else np.asarray(doc["proposal"], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("channel arrays must be numeric") from None
    px = renyi.DiscretePmf(px)
    ch = renyi.DiscreteChannel(w)
    if ch.n_in != len(px):
        raise DomainError(f"input_pmf has {len(px)} symbols but transition has {ch.n_in} rows")
    if q is not None:
        q = renyi.DiscretePmf(q)
        if len(q) != ch.n_out:
            raise DomainError(f"proposal has {len(q)} symbols but transition has {ch.n_out} columns")
    return px, ch, q


def channel_doc(px, ch, q=None) -> dict:
    doc = {"input_pmf": np.asarray(px), "transition": np.asarray(ch)}
    if q is not None:
        doc["proposal"] = np.asarray(q)
    return doc


def rank_doc(profile: pfr.RankProfile) -> dict:
    return {
        "conditioning": profile.conditioning,
        "k_max": profile.k_max,
        "pmf": profile.pmf,
        "tail_mass": profile.tail_mass,
        "mixture_weights": profile.weights,
        "success_probs": profile.success,
    }


def parse_rank(doc: dict) -> pfr.RankProfile:
    for key in ("pmf", "tail_mass", "conditioning"):
        if key not in doc:
            raise SchemaError(f"rank profile misses {key!r}")
    weights = doc.get("mixture_weights")
    success = doc.get("success_probs")
    cond = doc["conditioning"]
    if not (cond == "mixture" or (isinstance(cond, int) and not isinstance(cond, bool))):
        raise SchemaError(f"conditioning must be an input index or 'mixture', got {cond!r}")
    return pfr.RankProfile(
        pmf=np.asarray(doc["pmf"], dtype=float),
        tail_mass=_number(doc, "tail_mass"),
        conditioning=cond,
        weights=None if weights is None else np.asarray(weights, dtype=float),
        success=None if success is None else np.asarray(success, dtype=float),
    )


def rank_rows(exact: pfr.RankProfile, empirical: Optional[np.ndarray] = None):
    n = exact.k_max if empirical is None else max(exact.k_max, empirical.size)
    for k in range(1, n + 1):
        ex = float(exact.pmf[k - 1]) if k <= exact.k_max else None
        if empirical is None:
            yield (k, ex, None)
        else:
            yield (k, ex, float(empirical[k - 1]) if k <= empirical.size else 0.0)


def sim_doc(report: pfr.SimReport) -> dict:
    return {
        "n_samples": report.n_samples,
        "seed": report.seed,
        "x": report.x,
        "index_counts": report.index_counts,
        "output_counts": report.output_counts,
        "tv_index": report.tv_index,
        "tv_output": report.tv_output,
        "exact": rank_doc(report.exact),
    }


def parse_sim(doc: dict) -> pfr.SimReport:
    for key in ("n_samples", "seed", "x", "index_counts", "output_counts", "tv_index", "tv_output", "exact"):
        if key not in doc:
            raise SchemaError(f"simulation report misses {key!r}")
    counts = np.asarray(doc["index_counts"], dtype=np.int64)
    if counts.sum() != doc["n_samples"]:
        raise SchemaError("index counts do not sum to n_samples")
    tv_i, tv_o = _number(doc, "tv_index"), _number(doc, "tv_output")
    if not (0 <= tv_i <= 1 and 0 <= tv_o <= 1):
        raise SchemaError("TV distances must lie in [0, 1]")
    return pfr.SimReport(
        n_samples=int(doc["n_samples"]),
        seed=int(doc["seed"]),
        x=doc["x"],
        index_counts=counts,
        output_counts=np.asarray(doc["output_counts"], dtype=np.int64),
        tv_index=tv_i,
        tv_output=tv_o,
        exact=parse_rank(doc["exact"]),
    )
