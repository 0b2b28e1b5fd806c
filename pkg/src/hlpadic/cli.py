"""Command-line interface: exact evaluation, Monte Carlo simulation, identity suites.

Rationals are read and printed as ``num/den``, signatures as comma lists and
tails as an integer or ``neg_inf``. A reproducibility header goes to stderr
so that stdout stays machine readable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import __version__
from .branching_graph import boundary_measure, boundary_measure_2d, gamma_kernel, link
from .distributions import hua_sn_law, law_to_csv, product_cokernel_law
from .experiments import (
    DEFAULT_CHUNK,
    MonteCarloResult,
    default_workers,
    simulate_corner,
    simulate_e_mu,
    simulate_haar_snf,
    simulate_product_chain,
)
from .hall_littlewood import eval_P, eval_skewP_chain, eval_skewQ_chain
from .padic import DEFAULT_GUARD
from .signatures import NEG_INF, InfSignature, Measure, format_signature, parse_signature, signatures_in_box, to_json_obj
from .suites import SUITES

EXIT_IDENTITY_FAILURE = 1
EXIT_GUARD_EXHAUSTED = 3


# --- argument types ------------------------------------------------------------


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 1/3, got {text!r}") from None


def unit_rational(text: str) -> Fraction:
    value = rational(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text!r}")
    return value


def signature(text: str) -> tuple:
    try:
        return parse_signature(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid signature {text!r}: {exc}") from None


def rational_list(text: str) -> tuple:
    if not text.strip():
        return ()
    return tuple(rational(piece) for piece in text.split(","))


def tail(text: str):
    text = text.strip()
    if text in ("neg_inf", "-inf"):
        return NEG_INF
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tail must be an integer or neg_inf, got {text!r}") from None


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return value


# --- output helpers -----------------------------------------------------------------


def _ratio(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _header(args, extra: str = "") -> None:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command") and v is not None}
    shown = " ".join(f"{k}={_show(v)}" for k, v in sorted(params.items()))
    line = f"# hlpadic {__version__} | {args.command}"
    if extra:
        line += f" | {extra}"
    print(f"{line} | {shown}", file=sys.stderr)


def _show(v) -> str:
    if isinstance(v, Fraction):
        return _ratio(v)
    if isinstance(v, tuple):
        return format_signature(v)
    return str(v)


def _emit_value(value: Fraction, fmt: str, label: str) -> None:
    if fmt == "json":
        print(json.dumps({"quantity": label, "value": _ratio(value), "float": float(value)}))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["quantity", "value_num", "value_den", "value_float"])
        writer.writerow([label, value.numerator, value.denominator, repr(float(value))])


def _emit_measure(measure: Measure, fmt: str) -> None:
    if fmt == "json":
        payload = {"complete": measure.complete, "rows": measure.to_json_obj()}
        if not measure.complete:
            payload["deficit"] = _ratio(measure.deficit)
            payload["deficit_float"] = float(measure.deficit)
            if measure.deficit_bound is not None:
                payload["deficit_bound"] = _ratio(measure.deficit_bound)
        print(json.dumps(payload))
    else:
        sys.stdout.write(law_to_csv(measure))
        if not measure.complete:
            d = Fraction(measure.deficit)
            sys.stdout.write(f"deficit,{d.numerator},{d.denominator},{float(d)!r}\n")


# --- eval ------------------------------------------------------------------------


def _same_length(parser, flag: str, values, expected: int, what: str) -> None:
    if len(values) != expected:
        parser.error(f"argument {flag}: expected {expected} {what}, got {len(values)}")


def cmd_eval(args, parser) -> int:
    _header(args)
    kind = args.quantity
    if kind == "hl-p":
        _same_length(parser, "--vars", args.vars, len(args.sig), "variables")
        _emit_value(eval_P(args.sig, args.vars, args.t), args.format, "P")
    elif kind == "skew-p":
        if len(args.mu) < len(args.lam):
            parser.error("argument --lam: must be shorter than --mu")
        _same_length(parser, "--vars", args.vars, len(args.mu) - len(args.lam), "variables")
        _emit_value(eval_skewP_chain(args.mu, args.lam, args.vars, args.t), args.format, "skewP")
    elif kind == "skew-q":
        _same_length(parser, "--lam", args.lam, len(args.nu), "parts")
        _emit_value(eval_skewQ_chain(args.nu, args.lam, args.vars, args.t), args.format, "skewQ")
    elif kind == "link":
        if len(args.lam) >= len(args.mu):
            parser.error("argument --lam: must be shorter than --mu")
        _emit_value(link(args.mu, args.lam, args.t), args.format, "link")
    elif kind == "boundary":
        if args.tail is not NEG_INF and args.mu and args.mu[-1] < args.tail:
            parser.error("argument --tail: must not exceed the last part of --mu")
        mu = InfSignature(args.mu, args.tail)
        if args.rows is not None or args.cols is not None:
            rows = args.rows or args.n
            cols = args.cols or args.n
            _emit_measure(boundary_measure_2d(mu, cols, rows, args.t), args.format)
        elif args.tail is NEG_INF:
            parser.error("argument --tail: neg_inf needs --rows/--cols (two-dimensional corners)")
        else:
            _emit_measure(boundary_measure(mu, args.n, args.t), args.format)
    elif kind == "product-law":
        _emit_measure(product_cokernel_law(args.n, args.k, args.t, args.cap), args.format)
    elif kind == "hua-law":
        if args.sig is not None:
            _emit_value(hua_sn_law(args.sig, args.u, args.t), args.format, "hua")
        else:
            weights = {lam: hua_sn_law(lam, args.u, args.t) for lam in signatures_in_box(args.n, -args.cap, args.cap)}
            kept = sum(weights.values(), Fraction(0))
            _emit_measure(Measure(weights, complete=False, deficit=1 - kept), args.format)
    elif kind == "gamma":
        _same_length(parser, "--nu", args.nu, len(args.lam), "parts")
        _emit_value(gamma_kernel(args.lam, args.nu, args.alpha, args.t), args.format, "gamma")
    return 0


# --- simulate ----------------------------------------------------------------------


def _simulation_table(res: MonteCarloResult, fmt: str, limit: int) -> None:
    emp = res.measure()
    exact = res.exact.weights if res.exact is not None else {}
    keys = sorted(set(emp.weights) | set(exact), key=lambda k: -float(exact.get(k, 0)) - float(emp[k]))
    rows = []
    for key in keys[:limit]:
        rows.append((key, res.counts.get(key, 0), float(emp[key]), exact.get(key)))
    summary = {
        "samples": res.samples,
        "tv": res.tv() if res.exact is not None else None,
        "guard_hits": res.guard_hits,
        "at_precision": res.at_precision,
        "overflow": res.overflow,
        "overflow_rate": res.overflow_rate,
    }
    if fmt == "json":
        print(json.dumps({
            "summary": summary,
            "rows": [
                {
                    "signature": to_json_obj(k),
                    "count": c,
                    "empirical": e,
                    "exact": None if x is None else _ratio(x),
                    "exact_float": None if x is None else float(x),
                }
                for k, c, e, x in rows
            ],
        }))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["signature(s)", "count", "empirical", "exact_num", "exact_den", "exact_float"])
        for k, c, e, x in rows:
            x = Fraction(0) if x is None else Fraction(x)
            writer.writerow([format_signature(k), c, repr(e), x.numerator, x.denominator, repr(float(x))])
        for name, value in summary.items():
            writer.writerow([f"# {name}", value])
    print(
        f"# TV={summary['tv']:.6f} overflow={res.overflow} ({res.overflow_rate:.2e}) "
        f"guard_hits={res.guard_hits} at_precision={res.at_precision}",
        file=sys.stderr,
    )


def _write_log(res: MonteCarloResult, path: str) -> None:
    """One CSV line per trial: trial,signature,flags."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["trial", "signature", "flags"])
        for trial, (key, flags) in enumerate(res.log):
            writer.writerow([trial, format_signature(key), flags])


def cmd_simulate(args, parser) -> int:
    workers = args.workers if args.workers is not None else default_workers()
    args.workers = workers
    _header(args, f"streams=(seed, chunk index), chunk={DEFAULT_CHUNK}, workers={workers}")
    common = dict(p=args.p, N=args.precision, samples=args.samples, seed=args.seed, workers=workers,
                  guard=args.guard, log=args.log is not None)
    try:
        if args.experiment == "haar-snf":
            res = simulate_haar_snf(args.n, **common)
        elif args.experiment == "product-chain":
            res = simulate_product_chain(args.n, args.k, **common)
        elif args.experiment == "corner":
            if args.mu is None:
                parser.error("argument --mu: required for corner")
            _same_length(parser, "--mu", args.mu, min(args.rows, args.cols), "parts")
            res = simulate_corner(args.mu, args.rows, args.cols, axis=args.axis, **common)
        else:
            if args.mu is None:
                parser.error("argument --mu: required for e-mu")
            mu = InfSignature(args.mu, args.tail if args.tail is not None else NEG_INF)
            res = simulate_e_mu(mu, args.rows, args.cols, **common)
    except ValueError as exc:
        parser.error(str(exc))
    _simulation_table(res, args.format, args.limit)
    if args.log is not None:
        _write_log(res, args.log)
    if res.overflow_rate > args.max_overflow_rate:
        print(
            f"error: {res.overflow} of {res.samples} samples hit the precision guard "
            f"(rate {res.overflow_rate:.2e} > {args.max_overflow_rate:.2e}); raise --precision",
            file=sys.stderr,
        )
        return EXIT_GUARD_EXHAUSTED
    return 0


# --- verify ----------------------------------------------------------------------


def cmd_verify(args, parser) -> int:
    _header(args)
    suite = args.suite
    if suite == "skew-cauchy":
        res = SUITES[suite](max_parts=args.max_parts, cap=args.cap or 25)
    elif suite == "coherency":
        res = SUITES[suite](max_n=args.n or 3, max_parts=args.max_parts)
    elif suite == "dual-formula":
        res = SUITES[suite](max_n=args.n or 2, max_parts=args.max_parts)
    elif suite == "hua":
        res = SUITES[suite](max_n=args.n or 2, cap=args.cap, tol=args.tol)
    elif suite == "closed-form":
        res = SUITES[suite](max_n=args.n or 3, max_parts=args.max_parts)
    elif suite == "support":
        res = SUITES[suite](max_m=args.n or 4, hi=args.max_parts)
    else:
        res = SUITES[suite](max_m=args.n or 3, max_parts=min(args.max_parts, 2), cap=args.cap)
    print(res.summary())
    for line in res.failures:
        print(f"  failed: {line}")
    return 0 if res.ok else EXIT_IDENTITY_FAILURE


# --- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hlpadic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hlpadic {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="print an exact value or law")
    ev.add_argument("quantity", choices=["hl-p", "skew-p", "skew-q", "link", "boundary", "product-law", "hua-law", "gamma"])
    ev.add_argument("--sig", type=signature)
    ev.add_argument("--mu", type=signature)
    ev.add_argument("--nu", type=signature)
    ev.add_argument("--lam", type=signature, default=())
    ev.add_argument("--vars", type=rational_list, default=())
    ev.add_argument("--t", type=unit_rational, default=Fraction(1, 2))
    ev.add_argument("--u", type=unit_rational)
    ev.add_argument("--alpha", type=unit_rational)
    ev.add_argument("--tail", type=tail, default=0)
    ev.add_argument("--n", type=positive_int, default=1)
    ev.add_argument("--k", type=positive_int, default=1)
    ev.add_argument("--rows", type=positive_int)
    ev.add_argument("--cols", type=positive_int)
    ev.add_argument("--cap", type=nonneg_int, default=8)
    ev.add_argument("--format", choices=["json", "csv"], default="json")
    ev.set_defaults(func=cmd_eval)

    sim = sub.add_parser("simulate", help="Monte Carlo against an exact law")
    sim.add_argument("experiment", choices=["haar-snf", "product-chain", "corner", "e-mu"])
    sim.add_argument("--p", type=positive_int, default=2)
    sim.add_argument("--precision", type=positive_int, default=24)
    sim.add_argument("--samples", type=positive_int, default=100_000)
    sim.add_argument("--seed", type=nonneg_int, default=0)
    sim.add_argument("--workers", type=positive_int)
    sim.add_argument("--guard", type=nonneg_int, default=DEFAULT_GUARD)
    sim.add_argument("--max-overflow-rate", type=float, default=1e-3)
    sim.add_argument("--log", metavar="PATH", help="write one CSV line per trial: trial,signature,flags")
    sim.add_argument("--n", type=positive_int, default=2)
    sim.add_argument("--k", type=positive_int, default=2)
    sim.add_argument("--mu", type=signature)
    sim.add_argument("--tail", type=tail)
    sim.add_argument("--rows", type=positive_int, default=1)
    sim.add_argument("--cols", type=positive_int, default=2)
    sim.add_argument("--axis", choices=["column", "row"], default="column")
    sim.add_argument("--limit", type=positive_int, default=20)
    sim.add_argument("--format", choices=["json", "csv"], default="csv")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run an identity suite; exit 0 iff it holds")
    ver.add_argument("--suite", choices=sorted(SUITES), required=True)
    ver.add_argument("--max-parts", type=nonneg_int, default=3)
    ver.add_argument("--n", type=positive_int)
    ver.add_argument("--cap", type=positive_int)
    ver.add_argument("--tol", type=float, default=1e-6)
    ver.set_defaults(func=cmd_verify)
    return parser


_REQUIRED = {
    "hl-p": ("sig", "vars"),
    "skew-p": ("mu", "vars"),
    "skew-q": ("nu",),
    "link": ("mu", "lam"),
    "boundary": ("mu",),
    "product-law": (),
    "hua-law": ("u",),
    "gamma": ("lam", "nu", "alpha"),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval":
        for name in _REQUIRED[args.quantity]:
            if getattr(args, name) in (None, ()) and name not in ("lam", "vars"):
                parser.error(f"argument --{name}: required for eval {args.quantity}")
        if args.quantity == "hua-law" and args.sig is not None:
            args.n = len(args.sig)
    try:
        return args.func(args, parser)
    except BrokenPipeError:
        return 0
    except ValueError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
