"""Command-line entry point.

Exit codes: 0 success or found, 1 not found or violated, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings
from fractions import Fraction

from . import experiments as ex
from .audit import DEFAULT_PAIR_BUDGET, AuditConfig, ParameterWarning, audit
from .chi import chi
from .coding import NotPrefixFreeError, PrefixCode, check_prefix_free, kraft_sum, shannon_converse_check
from .family import (
    BudgetExceeded,
    FamilyFormatError,
    SpreadParams,
    as_fraction,
    generate_extremal,
    generate_random_family,
    load_family,
    parse_subset,
    serialize_family,
    spread_check,
    spread_number,
)
from .finder import find_disjoint_by_partition, find_sunflower_erdos_rado, find_sunflower_spread


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt_set(s) -> str:
    return "{" + ",".join(map(str, sorted(s))) + "}"


def _rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _emit_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, default=str))


# -- subcommands -----------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.extremal:
        if args.p is None or args.k is None:
            raise UsageError("gen --extremal needs --p and --k")
        family = generate_extremal(args.p, args.k)
    else:
        if None in (args.n, args.k, args.count):
            raise UsageError("gen --random needs --n, --k and --count")
        if args.seed is None:
            raise UsageError("gen --random needs --seed")
        family = generate_random_family(args.n, args.k, args.count, args.seed, args.distinct)
    text = serialize_family(family)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(family)} sets (n={family.n}, k={family.k}) to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_spread(args) -> int:
    family = load_family(args.family)
    if args.r is None:
        num = spread_number(family)
        if args.json:
            _emit_json({"infinite": num.infinite, "count": num.count, "d": num.d,
                        "Z": sorted(num.Z or ()), "value": num.value})
        else:
            print(f"spread number: {num}")
            if num.Z is not None:
                print(f"witness Z={_fmt_set(num.Z)}, count={num.count}")
        return 0
    report = spread_check(family, args.r)
    if args.json:
        _emit_json({"verdict": report.verdict, "r": str(args.r),
                    "Z": sorted(report.Z) if report.Z else None, "count": report.count})
    elif report.spread:
        print(f"spread: every non-empty Z lies in at most r^(k-|Z|) sets (r={args.r})")
    else:
        d = family.k - len(report.Z)
        print(f"violated: witness Z={_fmt_set(report.Z)}, count={report.count} > r^{d} (r={args.r})")
    return 0 if report.spread else 1


def cmd_chi(args) -> int:
    family = load_family(args.family)
    res = chi(family, args.x, parse_subset(args.w))
    if args.json:
        _emit_json({"value": sorted(res.value), "witness": res.witness, "size": res.size})
    else:
        print(f"chi = {_fmt_set(res.value)}")
        print(f"witness y = {res.witness}")
        print(f"size = {res.size}")
    return 0


def cmd_sunflower(args) -> int:
    family = load_family(args.family)
    if args.method == "erdos-rado":
        found = find_sunflower_erdos_rado(family, args.p)
    else:
        if args.seed is None:
            raise UsageError("sunflower --method spread needs --seed")
        params = SpreadParams(p=args.p, alpha=args.alpha)
        found = find_sunflower_spread(family, args.p, params, args.max_iters, args.seed, args.allow_repeats)
    if args.json:
        _emit_json(None if found is None else {"core": sorted(found.core), "petals": list(found.petals)})
    elif found is None:
        print("none")
    else:
        print(f"core: {_fmt_set(found.core)}")
        print("petals: " + " ".join(map(str, found.petals)))
        for i in found.petals:
            print(f"  {i}: {_fmt_set(family[i])}")
    return 0 if found is not None else 1


def cmd_disjoint(args) -> int:
    family = load_family(args.family)
    ys = find_disjoint_by_partition(family, args.p, args.max_iters, args.seed)
    if args.json:
        _emit_json(ys)
    elif ys is None:
        print("none")
    else:
        print("disjoint: " + " ".join(map(str, ys)))
        for i in ys:
            print(f"  {i}: {_fmt_set(family[i])}")
    return 0 if ys is not None else 1


def cmd_kraft(args) -> int:
    with open(args.code, encoding="utf-8") as fh:
        words = [line.strip() for line in fh.read().splitlines()]
    code = PrefixCode(tuple(words))
    check = check_prefix_free(code)
    if not check.ok:
        if args.json:
            _emit_json({"prefix_free": False, "witness": list(check.witness)})
        else:
            i, j = check.witness
            print(f"not prefix-free: word {i} ({code.words[i - 1]!r}) and word {j} ({code.words[j - 1]!r})")
        return 1
    total = kraft_sum(code)
    report = shannon_converse_check(code)
    if args.json:
        _emit_json({"prefix_free": True, "kraft_sum": str(total), "mean_length": str(report.mean_length),
                    "log2_t": report.bound, "holds": report.holds})
    else:
        print(f"kraft sum: {total}")
        print(f"mean length: {report.mean_length} ≈ {float(report.mean_length):.6f}")
        print(f"log2 t: {report.bound:.6f}")
        print(f"mean length >= log2 t: {'holds' if report.holds else 'FAILS'}")
    return 0 if report.holds else 1


def cmd_audit(args) -> int:
    family = load_family(args.family)
    config = AuditConfig(parse_subset(args.u), args.v, args.rho, args.r)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterWarning)
        report = audit(family, config, budget=args.budget or DEFAULT_PAIR_BUDGET)
    if args.csv:
        report.write_csv(args.csv)
    if args.json:
        ew, eu = report.contraction
        _emit_json({"pair_count": report.pair_count, "prefix_free": report.prefix_free,
                    "round_trip": report.round_trip, "mean_length": str(report.mean_length),
                    "log_pairs": report.log_pairs, "converse_holds": report.converse_holds,
                    "E_chi_W": str(ew), "E_chi_U": str(eu), "regression": {k: None if math.isnan(v) else v for k, v in report.regression.items()},
                    "case_counts": report.case_counts, "warnings": report.warnings})
    else:
        print(report.summary())
    return 0 if report.ok else 1


def cmd_experiment(args) -> int:
    family = load_family(args.family)
    threads = args.threads
    budget = args.budget or ex.ENUM_BUDGET
    sampling = not args.exact
    if sampling and (args.trials is None or args.seed is None):
        raise UsageError(f"experiment {args.kind} needs --exact or both --trials and --seed")
    digest = family.digest()
    records: list[ex.ExperimentRecord] = []

    if args.kind in ("chi", "coverage"):
        ws = [args.w] if args.w is not None else list(range(family.n + 1))
        for w in ws:
            if args.kind == "chi":
                stat = "chi_expectation"
                val = (ex.exact_chi_expectation(family, w, budget) if args.exact else
                       ex.estimate_chi_expectation(family, w, args.trials, args.seed, threads))
            else:
                stat = "coverage_probability"
                val = ex.coverage_probability(family, w, exact=args.exact, trials=args.trials,
                                              seed=args.seed, binomial=args.binomial,
                                              threads=threads, budget=budget)
            if isinstance(val, ex.Estimate):
                records.append(ex.ExperimentRecord(stat, w, val.mean, val.halfwidth, args.trials, args.seed, digest))
            else:
                records.append(ex.ExperimentRecord(stat, w, val, None, None, None, digest))
    elif args.kind == "partition":
        if args.p is None:
            raise UsageError("experiment partition needs --p")
        if not sampling:
            raise UsageError("experiment partition is sampling-only: pass --trials and --seed")
        est = ex.partition_success_rate(family, args.p, args.trials, args.seed, threads)
        records.append(ex.ExperimentRecord("partition_success_rate", args.p, est.mean, est.halfwidth,
                                           args.trials, args.seed, digest))
    else:
        if args.seed is None:
            raise UsageError("experiment contraction needs --seed")
        params = SpreadParams(p=args.p or 3, beta=args.beta, gamma=args.gamma, epsilon=args.epsilon)
        records = ex.contraction_schedule(family, params, args.kappa, args.m_max, args.seed,
                                          trials=args.trials or 10_000, r=args.r, budget=budget,
                                          threads=threads)

    buf = io.StringIO()
    ex.write_records_csv(records, buf)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    for rec in records:
        ci = "" if rec.ci_halfwidth is None else f" ± {rec.ci_halfwidth:.4g}"
        note = f"  [{rec.note}]" if rec.note else ""
        print(f"{rec.statistic} @ {rec.m_or_w}: {ex.format_value(rec.value)}{ci}{note}")
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> Parser:
    parser = Parser(prog="sunflowers", description="Sunflowers, spread families and a decodable encoding audit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    def family_arg(p):
        p.add_argument("--family", required=True, metavar="FILE", help="family JSON file")

    g = sub.add_parser("gen", help="write a family file")
    mode = g.add_mutually_exclusive_group(required=True)
    mode.add_argument("--extremal", action="store_true", help="(p-1)^k transversal family")
    mode.add_argument("--random", action="store_true", help="uniform random k-sets")
    g.add_argument("--p", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--count", "--l", type=int, dest="count", help="number of sets")
    g.add_argument("--distinct", action="store_true")
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output", metavar="FILE")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("spread", help="check r-spreadness or report the spread number")
    family_arg(s)
    s.add_argument("--r", type=_rational, help="rational such as 19/10 or 1.9")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_spread)

    c = sub.add_parser("chi", help="evaluate chi(x, W)")
    family_arg(c)
    c.add_argument("--x", type=int, required=True, help="1-based member index")
    c.add_argument("--w", default="", help='comma-separated set, e.g. "1,2,5"')
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_chi)

    f = sub.add_parser("sunflower", help="extract a p-sunflower")
    family_arg(f)
    f.add_argument("--p", type=int, required=True)
    f.add_argument("--method", choices=("erdos-rado", "spread"), default="erdos-rado")
    f.add_argument("--alpha", type=_rational, default=Fraction(4))
    f.add_argument("--max-iters", type=int, default=1000)
    f.add_argument("--seed", type=int)
    f.add_argument("--allow-repeats", action="store_true")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_sunflower)

    d = sub.add_parser("disjoint", help="find p disjoint members by random partitions")
    family_arg(d)
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--max-iters", type=int, default=1000)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_disjoint)

    k = sub.add_parser("kraft", help="Kraft sum and mean-length check for a code file")
    k.add_argument("--code", required=True, metavar="FILE", help="one binary word per line")
    k.add_argument("--json", action="store_true")
    k.set_defaults(func=cmd_kraft)

    a = sub.add_parser("audit-encoding", help="exhaustive encode/decode audit for a fixed U")
    family_arg(a)
    a.add_argument("--u", default="", help='comma-separated conditioning set U')
    a.add_argument("--v", type=int, required=True)
    a.add_argument("--rho", type=_rational, required=True)
    a.add_argument("--r", type=_rational, required=True)
    a.add_argument("--csv", metavar="OUT")
    a.add_argument("--json", action="store_true")
    a.add_argument("--budget", type=int)
    a.set_defaults(func=cmd_audit)

    e = sub.add_parser("experiment", help="exact and Monte Carlo experiments")
    e.add_argument("kind", choices=("chi", "coverage", "contraction", "partition"))
    family_arg(e)
    e.add_argument("--w", type=int, help="set size (default: sweep 0..n)")
    e.add_argument("--p", type=int)
    e.add_argument("--exact", action="store_true")
    e.add_argument("--trials", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--binomial", action="store_true", help="Clopper-Pearson interval for coverage")
    e.add_argument("--kappa", type=_rational, default=Fraction(1))
    e.add_argument("--m-max", type=int, default=3)
    e.add_argument("--beta", type=_rational, default=Fraction(2))
    e.add_argument("--gamma", type=_rational, default=Fraction(1, 4))
    e.add_argument("--epsilon", type=_rational, default=Fraction(1, 4))
    e.add_argument("--r", type=_rational, help="override the schedule's r")
    e.add_argument("--csv", metavar="OUT")
    e.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    e.add_argument("--budget", type=int)
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (FamilyFormatError, NotPrefixFreeError, BudgetExceeded, ValueError,
            IndexError, TypeError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
