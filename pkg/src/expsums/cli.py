"""Command line interface: ``expsums <verb> [options]``.

Verbs: eval, invariants, poincare, verify, corpus. Shared flags: --config,
--out, --cap, --threads, --format. The default thread count comes from the
EXPSUMS_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import engine, harness, kernels
from .arith import is_prime
from .corpus import builtin_corpus, corpus_entry
from .locus import InconsistentDimension, count_solutions, estimate_s
from .newton import newton_data
from .poincare import monodromy_range_check, reconstruct_poincare
from .polynomial import PolynomialSyntaxError, default_var_names, parse_polynomial, render_polynomial, top_form

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (INI)")
    common.add_argument("--out", help="output directory (default: stdout for single results)")
    common.add_argument("--cap", type=float, default=None, help="enumeration cap in terms")
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${kernels.THREADS_ENV} or 1)")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def _poly_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("polynomial", help="polynomial text, or builtin:<id>")
    p.add_argument("--vars", help="comma separated variable names (default x or x1..xn)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="expsums", description="Exponential sums over residue rings and their invariants.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate one sum E_f(N, xi)")
    _poly_args(p)
    p.add_argument("--N", type=int, required=True, help="modulus")
    p.add_argument("--u", type=int, default=1, help="character index, gcd(u, N) = 1")
    p.add_argument("--max", action="store_true", help="maximize over all primitive characters")
    p.add_argument("--method", choices=("auto", "oracle"), default="auto")

    p = sub.add_parser("invariants", parents=[common], help="Newton and critical-locus data")
    _poly_args(p)
    p.add_argument("--s", type=int, default=None, help="declare s (overrides the estimate)")

    p = sub.add_parser("poincare", parents=[common], help="solution counts and Poincare series")
    _poly_args(p)
    p.add_argument("--p", type=int, required=True, help="prime")
    p.add_argument("--M", type=int, default=20, help="number of counts a_{p,1..M}")
    p.add_argument("--s", type=int, default=None, help="s for the monodromy range check")
    p.add_argument("--count-method", choices=("auto", "brute", "lifting"), default="auto")

    sub.add_parser("verify", parents=[common], help="run an experiment config (default: shipped config)")
    sub.add_parser("corpus", parents=[common], help="list the builtin corpus")
    return parser


def _resolve_poly(text: str, vars_arg: str | None):
    if text.startswith("builtin:"):
        e = corpus_entry(text.split(":", 1)[1])
        return e.polynomial, list(e.vars), e.s
    if vars_arg:
        names = [v.strip() for v in vars_arg.split(",") if v.strip()]
    else:
        import re

        found = sorted(set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text)))
        names = found if found else ["x"]
    return parse_polynomial(text, names), names, None


def _emit(records: list[dict], fmt: str, out: str | None, name: str) -> None:
    if fmt == "json":
        text = json.dumps(records if len(records) != 1 else records[0], indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        cols = list(records[0].keys()) if records else []
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: (format(v, ".12g") if isinstance(v, float) else
                            json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
        text = buf.getvalue()
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"{name}.{fmt}").write_text(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    f, names, _ = _resolve_poly(args.polynomial, args.vars)
    cap = int(args.cap) if args.cap else kernels.DEFAULT_TERM_CAP
    workers = args.threads or kernels.default_workers()
    if args.max:
        res = engine.max_over_characters(f, args.N, cap=cap, workers=workers).as_result()
    elif args.method == "oracle":
        res = engine.expsum_oracle(f, args.N, args.u, cap=cap, workers=workers)
    else:
        res = engine.expsum(f, args.N, args.u, cap=cap, workers=workers)
    _emit([res.to_record(f, names)], args.format, args.out, "eval")
    return EXIT_OK


def cmd_invariants(args) -> int:
    f, names, s_known = _resolve_poly(args.polynomial, args.vars)
    s_decl = args.s if args.s is not None else s_known
    rec = {"f": render_polynomial(f, names), "n": f.nvars, "d": f.degree}
    try:
        rec["locus"] = estimate_s(top_form(f), override=s_decl).to_record()
    except (InconsistentDimension, ValueError) as exc:
        rec["locus"] = {"error": str(exc)}
    rec["newton"] = newton_data(f).to_record()
    _emit([rec], args.format, args.out, "invariants")
    return EXIT_OK


def cmd_poincare(args) -> int:
    f, names, s_known = _resolve_poly(args.polynomial, args.vars)
    if not is_prime(args.p):
        raise ValueError(f"{args.p} is not prime")
    counts = [count_solutions(f, args.p, m, method=args.count_method) for m in range(1, args.M + 1)]
    pd = reconstruct_poincare(counts, args.p, f.nvars)
    rec = {"f": render_polynomial(f, names), **pd.to_record()}
    s = args.s if args.s is not None else s_known
    if s is not None and f.degree >= 2:
        rec["monodromy"] = monodromy_range_check(pd, s, f.degree).to_record()
    _emit([rec], args.format, args.out, "poincare")
    if "monodromy" in rec and not rec["monodromy"]["ok"]:
        print("MONODROMY RANGE VIOLATION", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.config:
        cfg = harness.load_config(args.config)
    else:
        cfg = harness.default_config()
    report = harness.run_experiment(cfg, workers=args.threads, cap=int(args.cap) if args.cap else None)
    written = report.write(args.out)
    for path in written:
        print(path)
    summary = report.summary()
    print(f"instances={summary['instances']} verdicts={summary['verdicts']} skipped={len(summary['skipped'])} "
          f"failures={len(summary['failures'])}")
    for msg in report.failures:
        print(f"FAIL {msg}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_corpus(args) -> int:
    _emit([e.to_record() for e in builtin_corpus()], args.format, args.out, "corpus")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "invariants": cmd_invariants,
    "poincare": cmd_poincare,
    "verify": cmd_verify,
    "corpus": cmd_corpus,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except PolynomialSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, kernels.EnumerationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
