"""Command-line entry point: analyze / family / sweep / spectral / verify."""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

from .analysis import (
    analysis_report,
    lower_bound_certificate,
    upper_bound_certificate,
)
from .exceptions import CutoffLabError
from .families import MAX_MATERIALIZE_N, Lemma31Family, parse_descriptor
from .harness import emit_report, sweep, sweep_spec_from_json
from .mixture import mixture_to_json, read_mixture
from .spectral import chi_square_mixture, read_chain, spectral_decomposition
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _round(obj):
    """12 significant digits; non-finite floats become strings."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _print_json(obj) -> None:
    print(json.dumps(_round(obj), indent=2))


def _cmd_analyze(args) -> int:
    m = read_mixture(args.mixture)
    report = analysis_report(m, alpha=args.alpha)
    lower, upper = [], []
    for c in args.c or []:
        try:
            if c < 0:
                cert = lower_bound_certificate(m, c, args.epsilon)
                lower.append({"c": c, "epsilon": cert.epsilon, "i_star": cert.i_star,
                              "log_bound": cert.log_bound, "log_floor": cert.log_floor})
            elif c > 0:
                cert = upper_bound_certificate(m, c)
                upper.append({"c": c, "l_index": cert.l_index, "C": cert.C,
                              "log_bound": cert.log_bound})
        except CutoffLabError as exc:
            (lower if c < 0 else upper).append({"c": c, "error": str(exc)})
    if args.c:
        report["certificates"] = {"lower": lower, "upper": upper}
    _print_json(report)
    return EXIT_OK


def _cmd_family(args) -> int:
    fam = parse_descriptor(args.descriptor)
    n = args.n
    t, idx = fam.location(n)
    out = {"family": fam.label, "n": n, "t": t, "w": fam.width(n), "argmax_index": idx}
    try:
        out["r"] = fam.params(n).r
    except CutoffLabError:
        out["r"] = None
    materializable = not (isinstance(fam, Lemma31Family) and
                          (n > MAX_MATERIALIZE_N or 9**n > args.max_terms))
    if materializable:
        m = fam.realize(n)
        if len(m) <= args.max_terms:
            out["mixture"] = mixture_to_json(m)
    _print_json(out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    with open(args.spec) as fh:
        spec = sweep_spec_from_json(json.load(fh))
    rows = sweep(spec, threads=args.threads)
    paths = emit_report(rows, args.format, args.out)
    failed = [r for r in rows if not r.passed]
    for p in paths:
        print(f"wrote {p}")
    print(f"{len(rows)} rows, {len(failed)} failed")
    for r in failed:
        print(f"  FAIL n={r.n} c={r.c:g}: {r.error or r.assertion} (slack {r.slack:.6g})")
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_spectral(args) -> int:
    g = read_chain(args.chain)
    data = spectral_decomposition(g)
    m = chi_square_mixture(g, args.state, data)
    out = {"state": args.state, "stationary": data.stationary.tolist(),
           "mixture": mixture_to_json(m), "analysis": analysis_report(m)}
    _print_json(out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = run_suite(args.suite)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutoff-lab",
        description="Window-cutoff location, width and bounds for exponential-mixture distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a mixture file")
    p.add_argument("--mixture", required=True, help="mixture JSON file")
    p.add_argument("--alpha", type=float, help="check a_i <= alpha A_{i-1}")
    p.add_argument("--c", type=float, nargs="+", help="window offsets for certificates")
    p.add_argument("--epsilon", type=float, help="lower-certificate band (default -c/10)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("family", help="parameters of a family member")
    p.add_argument("--descriptor", required=True,
                   help="JSON, file path, or shorthand like lemma31/const:1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-terms", type=int, default=1000,
                   help="print the realized mixture only up to this many terms")
    p.set_defaults(func=_cmd_family)

    p = sub.add_parser("sweep", help="run an (n, c) grid sweep")
    p.add_argument("--spec", required=True, help="sweep spec JSON file")
    p.add_argument("--out", required=True, help="output file or directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, help="override CUTOFF_LAB_THREADS")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("spectral", help="chi-square mixture of a reversible chain")
    p.add_argument("--chain", required=True, help="chain JSON file")
    p.add_argument("--state", type=int, required=True, help="start state")
    p.set_defaults(func=_cmd_spectral)

    p = sub.add_parser("verify", help="run a bundled verification suite")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.set_defaults(func=_cmd_verify)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (CutoffLabError, OSError, KeyError, json.JSONDecodeError, IndexError) as exc:
        print(f"cutoff-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
