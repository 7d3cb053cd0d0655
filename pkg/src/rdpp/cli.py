"""Command-line front end.

Exit codes: 0 success, 2 usage or input-format error, 3 infeasible solve
(the report is still written), 4 numeric or domain error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import bsc, gaussian, poisson, renyi
from . import reports as rep
from .errors import CapacityError, DomainError, PrecisionError, ShapeError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            return np.linspace(float(start), float(stop), n)
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"bad range {text!r}: expected start:stop:count or a comma list") from None


def parse_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def parse_order(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad order {text!r}") from None


def parse_channel_spec(text: str):
    """``bsc:P``, ``rows:a,b;c,d`` or a path to a channel JSON document."""
    if text.startswith("bsc:"):
        return bsc.bsc_channel(_bsc_p(text))[1], None
    if text.startswith("rows:"):
        rows = [parse_floats(r) for r in text[5:].split(";")]
        if len({r.size for r in rows}) != 1:
            raise UsageError("channel rows must have equal length")
        return renyi.DiscreteChannel(np.vstack(rows)), None
    px, ch, _ = rep.parse_channel(rep.read_json(text))
    return ch, px


def _bsc_p(text: str) -> float:
    try:
        return float(text[4:])
    except ValueError:
        raise UsageError(f"bad channel spec {text!r}: expected bsc:P") from None


def _load_channel(args):
    if args.channel.startswith("bsc:"):
        px, ch, q = bsc.bsc_channel(_bsc_p(args.channel))
    else:
        px, ch, q = rep.parse_channel(rep.read_json(args.channel))
    if q is None:
        q = renyi.DiscretePmf.normalized(renyi.sibson_optimizer(px, ch, args.alpha))
    return px, ch, q


def _emit_json(args, doc):
    if getattr(args, "out", None):
        rep.write_json(args.out, doc)
    else:
        rep.write_json(sys.stdout, doc)


# ---------------------------------------------------------------- gaussian


def cmd_gaussian_solve(args) -> int:
    model, th = rep.parse_gaussian(rep.read_json(args.model))
    result = gaussian.solve(model, th, privacy=args.privacy)
    _emit_json(args, rep.solve_doc(model, th, result, args.privacy))
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_gaussian_sweep(args) -> int:
    model, th = rep.parse_gaussian(rep.read_json(args.model))
    delta = th.Delta if args.delta is None else args.delta
    alpha = th.alpha if args.alpha is None else args.alpha
    beta = th.beta if args.beta is None else args.beta
    surface = gaussian.sweep(
        model, parse_range(args.d), parse_range(args.eps), delta, alpha, beta, privacy=args.privacy
    )
    rep.write_csv(args.out or sys.stdout, rep.SURFACE_HEADER, rep.surface_rows(surface))
    return EXIT_OK


def cmd_gaussian_leakage(args) -> int:
    model, th = rep.parse_gaussian(rep.read_json(args.model))
    beta = th.beta if args.beta is None else args.beta
    channels = [
        gaussian.AffineChannel(float(c), float(v))
        for c in parse_range(args.c)
        for v in parse_floats(args.sigma_z_sq)
    ]
    rows = gaussian.leakage_curves(model, channels, beta, parse_floats(args.gammas))
    rep.write_csv(args.out or sys.stdout, rep.LEAKAGE_HEADER, rep.leakage_rows(rows))
    return EXIT_OK


# ---------------------------------------------------------------- info


def cmd_info_entropy(args) -> int:
    p = renyi.DiscretePmf(parse_floats(args.pmf))
    _emit_json(args, {"alpha": args.alpha, "entropy_bits": renyi.renyi_entropy(p, args.alpha)})
    return EXIT_OK


def cmd_info_divergence(args) -> int:
    p = renyi.DiscretePmf(parse_floats(args.p))
    q = renyi.DiscretePmf(parse_floats(args.q))
    value = renyi.renyi_divergence(p, q, args.alpha)
    _emit_json(args, {"alpha": args.alpha, "divergence_bits": value})
    return EXIT_OK


def cmd_info_sibson(args) -> int:
    ch, file_px = parse_channel_spec(args.channel)
    px = renyi.DiscretePmf(parse_floats(args.pmf)) if args.pmf else file_px
    if px is None:
        raise UsageError("--pmf is required unless the channel file carries an input_pmf")
    doc = {
        "alpha": args.alpha,
        "sibson_mi_bits": renyi.sibson_mi(px, ch, args.alpha),
        "optimizer": renyi.sibson_optimizer(px, ch, args.alpha),
    }
    _emit_json(args, doc)
    return EXIT_OK


# ---------------------------------------------------------------- poisson


def _conditioning(args, px):
    return px.probs if args.x is None else args.x


def cmd_poisson_exact(args) -> int:
    px, ch, q = _load_channel(args)
    profile = poisson.exact_rank_pmf(ch, q, _conditioning(args, px), k_max=args.k_max)
    doc = {"channel": rep.channel_doc(px, ch, q), "profile": rep.rank_doc(profile)}
    _emit_json(args, doc)
    if args.csv:
        rep.write_csv(args.csv, rep.RANK_HEADER, rep.rank_rows(profile))
    return EXIT_OK


def cmd_poisson_simulate(args) -> int:
    px, ch, q = _load_channel(args)
    report = poisson.simulate_profile(ch, q, _conditioning(args, px), args.samples, args.seed)
    doc = {"channel": rep.channel_doc(px, ch, q), "simulation": rep.sim_doc(report)}
    _emit_json(args, doc)
    if args.csv:
        rep.write_csv(args.csv, rep.RANK_HEADER, rep.rank_rows(report.exact, report.empirical_pk))
    return EXIT_OK


def cmd_poisson_entropy(args) -> int:
    px, ch, q = _load_channel(args)
    orders = [int(m) for m in parse_floats(args.orders)]
    profile = poisson.exact_rank_pmf(ch, q, px.probs, k_max=args.k_max)
    doc = {
        "channel": rep.channel_doc(px, ch, q),
        "integer_orders": {str(m): poisson.renyi_K_integer(ch, q, px, m) for m in orders},
        "log_moment_bits": poisson.log_moment_K(profile),
        "tail_mass": profile.tail_mass,
        "k_max": profile.k_max,
    }
    if args.order is not None:
        lo, hi = poisson.renyi_K_truncated(profile, args.order)
        doc["order"] = args.order
        doc["truncated_bracket_bits"] = [lo, hi]
        if args.order > 2:
            doc["integer_upper_bits"] = poisson.renyi_K_upper(ch, q, px, args.order)
    _emit_json(args, doc)
    return EXIT_OK


# ---------------------------------------------------------------- bsc


def cmd_bsc_validate(args) -> int:
    v = bsc.validate(args.p, args.samples, args.seed, args.k_max)
    doc = {
        "p": v.p,
        "n_samples": v.n_samples,
        "seed": v.seed,
        "k_max": v.k_max,
        "max_engine_dev": v.max_engine_dev,
        "tv_index": v.tv_index,
        "tv_index_tol": v.tv_tol,
        "tv_output": v.tv_output,
        "p_same": v.p_same,
        "checks": v.checks,
        "passed": v.passed,
        "rows": [
            {"k": k + 1, "closed_form": c, "exact_engine": e, "empirical": m}
            for k, (c, e, m) in enumerate(zip(v.closed_form, v.exact_engine, v.empirical))
        ],
    }
    _emit_json(args, doc)
    if args.csv:
        rows = [(r["k"], r["closed_form"], r["exact_engine"], r["empirical"]) for r in doc["rows"]]
        rep.write_csv(args.csv, rep.BSC_HEADER, rows)
    return EXIT_OK if v.passed else EXIT_NUMERIC


def cmd_bsc_h2curve(args) -> int:
    rows = bsc.h2_curve(parse_range(args.p))
    rep.write_csv(args.out or sys.stdout, rep.H2_HEADER, rows)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rdpp", description="Rényi rate-distortion-perception-privacy workbench")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    gp = groups.add_parser("gaussian", help="scalar Gaussian tradeoff").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    p = gp.add_parser("solve", help="minimum rate for one set of budgets")
    p.add_argument("--model", required=True, help="JSON model and thresholds")
    p.add_argument("--privacy", choices=gaussian.PRIVACY_METRICS, default="unconditional")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gaussian_solve)

    p = gp.add_parser("sweep", help="minimum-rate surface over (D, eps)")
    p.add_argument("--model", required=True)
    p.add_argument("--d", required=True, help="start:stop:count")
    p.add_argument("--eps", required=True, help="start:stop:count")
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--privacy", choices=gaussian.PRIVACY_METRICS, default="unconditional")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gaussian_sweep)

    p = gp.add_parser("leakage", help="unconditional vs conditional leakage table")
    p.add_argument("--model", required=True)
    p.add_argument("--gammas", default="0,0.5")
    p.add_argument("--c", default="0:1:11", help="gains, start:stop:count or list")
    p.add_argument("--sigma-z-sq", dest="sigma_z_sq", default="0.25")
    p.add_argument("--beta", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gaussian_leakage)

    ip = groups.add_parser("info", help="Rényi measures on finite alphabets").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    p = ip.add_parser("entropy")
    p.add_argument("--pmf", required=True)
    p.add_argument("--alpha", type=parse_order, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_info_entropy)
    p = ip.add_parser("divergence")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--alpha", type=parse_order, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_info_divergence)
    p = ip.add_parser("sibson")
    p.add_argument("--pmf")
    p.add_argument("--channel", required=True, help="bsc:P, rows:a,b;c,d or a JSON file")
    p.add_argument("--alpha", type=parse_order, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_info_sibson)

    pp = groups.add_parser("poisson", help="Poisson functional representation").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    for name, func in (
        ("exact", cmd_poisson_exact),
        ("simulate", cmd_poisson_simulate),
        ("entropy", cmd_poisson_entropy),
    ):
        p = pp.add_parser(name)
        p.add_argument("--channel", required=True, help="channel JSON file or bsc:P")
        p.add_argument("--alpha", type=parse_order, default=2.0, help="Sibson order of the default proposal")
        p.add_argument("--k-max", dest="k_max", type=int)
        p.add_argument("--out")
        p.set_defaults(func=func)
        if name != "entropy":
            p.add_argument("--x", type=int, help="input symbol; omit for the unconditional law")
            p.add_argument("--csv")
        if name == "simulate":
            p.add_argument("--samples", type=int, default=100_000)
            p.add_argument("--seed", type=int, default=7)
        if name == "entropy":
            p.add_argument("--orders", default="2,3")
            p.add_argument("--order", type=float, help="real order for the truncated bracket")

    bp = groups.add_parser("bsc", help="binary symmetric channel benchmark").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    p = bp.add_parser("validate")
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--k-max", dest="k_max", type=int, default=50)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bsc_validate)
    p = bp.add_parser("h2curve")
    p.add_argument("--p", default="0.05:0.45:9")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bsc_h2curve)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is not None and not 0 <= getattr(args, "seed", 0) < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        return args.func(args)
    except (UsageError, rep.SchemaError, OSError) as exc:
        print(f"rdpp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ShapeError, PrecisionError, CapacityError, ArithmeticError, ValueError) as exc:
        print(f"rdpp: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
