"""Command-line front end.

Subcommands: eigenvalues, eigenvector, spectrum, zeta, tree, verify.
Every numeric JSON field is a decimal string (bracket endpoints rounded
outward, so printed intervals still enclose the certified ones); output is
byte-identical across runs for a fixed configuration.  Exit status: 0 on
success, 1 when verification fails, 2 on invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import mpmath as mp

from . import operators, oracle, spectrum, tree, zeta
from .exactnum import cauchy_sum_discrepancy, transformation_discrepancy

EPILOG = (
    "Environment overrides: PADICTREE_TERM_BUDGET (series term budget), "
    "PADICTREE_FLOAT_DPS (DFT/zeta float digits), PADICTREE_ORACLE_DPS "
    "(dense eigensolver digits)."
)


def parse_exact(text: str) -> Fraction:
    """Exact rational from 'a/b', a decimal literal, or scientific notation."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    return Fraction(Decimal(text))


def fraction_decimal(x: Fraction, places: int, mode: str = "nearest") -> str:
    """Fixed-point decimal string; 'floor'/'ceil' give directed rounding so
    interval endpoints stay enclosing after printing."""
    scaled = Fraction(x) * 10**places
    num, den = scaled.numerator, scaled.denominator
    if mode == "floor":
        n = num // den
    elif mode == "ceil":
        n = -((-num) // den)
    else:
        n, r = divmod(num, den)
        if 2 * r >= den:
            n += 1
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


def _record_dict(record: spectrum.EigenvalueRecord, places: int) -> dict:
    return {
        "p": record.p,
        "index": record.index,
        "lo": fraction_decimal(record.lo, places, "floor"),
        "hi": fraction_decimal(record.hi, places, "ceil"),
        "digits": record.digits,
        "value": fraction_decimal(record.midpoint, places),
    }


def _emit_json(payload: dict, out) -> None:
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_csv(rows: list[dict], fieldnames: list[str], out) -> None:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in fieldnames})
    out.write(buffer.getvalue())


def cmd_eigenvalues(args, out) -> int:
    records = [spectrum.refine_eigenvalue(args.p, n, args.digits) for n in range(1, args.count + 1)]
    places = args.digits + 4
    rows = [_record_dict(r, places) for r in records]
    if args.format == "json":
        _emit_json({"command": "eigenvalues", "p": args.p, "count": args.count,
                    "digits": args.digits, "records": rows}, out)
    elif args.format == "csv":
        _emit_csv(rows, ["p", "index", "lo", "hi", "digits", "value"], out)
    else:
        for row in rows:
            out.write(f"n={row['index']}  [{row['lo']}, {row['hi']}]  ~ {row['value']}\n")
    return 0


def cmd_eigenvector(args, out) -> int:
    record = spectrum.refine_eigenvalue(args.p, args.index, args.digits)
    expansion = spectrum.eigenvector_coefficients(record.midpoint, args.p, args.terms)
    seq = spectrum.synthesize_eigenvector(expansion, args.samples)
    res_sq, norm_sq, row0 = spectrum.residual_norm_sq(expansion)
    places = args.digits + 4
    with mp.workdps(places + 10):
        residual = mp.nstr(mp.sqrt(mp.mpf(res_sq.numerator) / res_sq.denominator
                                   / (mp.mpf(norm_sq.numerator) / norm_sq.denominator)), 10)
    coeff_rows = [
        {"order": 2 * k, "value": f"{c.numerator}/{c.denominator}"}
        for k, c in enumerate(expansion.coefficients, start=1)
    ]
    if args.format == "json":
        _emit_json(
            {
                "command": "eigenvector",
                "p": args.p,
                "index": args.index,
                "digits": args.digits,
                "terms": args.terms,
                "samples": args.samples,
                "eigenvalue": fraction_decimal(record.midpoint, places),
                "coefficients": coeff_rows,
                "tail_bound": fraction_decimal(expansion.tail_bound, places, "ceil"),
                "residual_over_norm": residual,
                "values": [fraction_decimal(v, places) for v in seq.values],
            },
            out,
        )
    elif args.format == "csv":
        _emit_csv(coeff_rows, ["order", "value"], out)
    else:
        out.write(f"eigenvalue ~ {fraction_decimal(record.midpoint, places)}\n")
        for row in coeff_rows:
            out.write(f"c({row['order']}) = {row['value']}\n")
        out.write(f"residual |(A-lam)f|/|f| ~ {residual}\n")
    return 0


def cmd_spectrum(args, out) -> int:
    entries = spectrum.dstar_d_spectrum(args.p, parse_exact(args.cutoff), args.digits)
    places = args.digits + 4
    rows = [
        {
            "p": args.p,
            "m": e.m,
            "n": e.n,
            "multiplicity": e.multiplicity,
            "lo": fraction_decimal(e.value.lo, places, "floor"),
            "hi": fraction_decimal(e.value.hi, places, "ceil"),
            "value": fraction_decimal(e.value.center, places),
        }
        for e in entries
    ]
    if args.format == "json":
        _emit_json({"command": "spectrum", "p": args.p, "cutoff": args.cutoff,
                    "digits": args.digits, "entries": rows}, out)
    elif args.format == "csv":
        _emit_csv(rows, ["p", "m", "n", "multiplicity", "lo", "hi", "value"], out)
    else:
        for row in rows:
            out.write(
                f"m={row['m']} n={row['n']} x{row['multiplicity']}  "
                f"[{row['lo']}, {row['hi']}]  ~ {row['value']}\n"
            )
    return 0


def _zeta_result_dict(result: zeta.ZetaResult, digits: int) -> dict:
    with mp.workdps(digits + 10):
        return {
            "s": str(result.s),
            "value_re": mp.nstr(result.value.real, digits),
            "value_im": mp.nstr(result.value.imag, digits),
            "error": mp.nstr(result.error, 6),
            "terms_used": result.terms_used,
            "rigorous_tail": result.rigorous_tail,
            "flags": list(result.flags),
        }


def cmd_zeta(args, out) -> int:
    s = zeta.ComplexS.parse(args.s)
    eps = parse_exact(args.eps)
    prefactor_mode = "paper" if args.mode == "paper" else "totient"
    reference_mode = "paper" if args.mode == "paper" else "asymptotic"
    if args.target == "poles":
        poles = zeta.pole_list(args.p, reference_mode, args.k_max)
        rows = [{"re": q.re, "im": q.im, "k": q.k, "provenance": q.provenance} for q in poles]
        if args.format == "json":
            _emit_json({"command": "zeta", "target": "poles", "p": args.p,
                        "mode": args.mode, "poles": rows}, out)
        elif args.format == "csv":
            _emit_csv(rows, ["re", "im", "k", "provenance"], out)
        else:
            for row in rows:
                out.write(f"{row['provenance']} k={row['k']}: s = {row['re']} + {row['im']} i\n")
        return 0
    if args.target == "d0":
        result = zeta.zeta_D0(args.p, s, eps)
    elif args.target == "d":
        result = zeta.zeta_D(args.p, s, eps, prefactor_mode)
    elif args.target == "schatten":
        result = zeta.schatten_trace(args.p, Fraction(s.re), eps, prefactor_mode)
    else:
        result = zeta.zeta_D0_continued(args.p, s, eps, reference_mode)
    digits = max(12, -zeta._floor_log10(eps) + 2)
    payload = {"command": "zeta", "target": args.target, "p": args.p, "mode": args.mode,
               "eps": args.eps, **_zeta_result_dict(result, digits)}
    if args.format == "json":
        _emit_json(payload, out)
    elif args.format == "csv":
        _emit_csv([payload], ["s", "target", "value_re", "value_im", "error",
                              "terms_used", "rigorous_tail"], out)
    else:
        out.write(
            f"zeta[{args.target}]({payload['s']}) = {payload['value_re']} + {payload['value_im']} i"
            f"  (+/- {payload['error']}; terms {payload['terms_used']};"
            f" rigorous_tail={payload['rigorous_tail']}; flags={payload['flags']})\n"
        )
    return 0


def cmd_tree(args, out) -> int:
    if args.format == "dot" or args.format == "text":
        out.write(tree.tree_dot(args.p, args.depth))
    elif args.format == "json":
        _emit_json({"command": "tree", **tree.tree_as_dict(args.p, args.depth)}, out)
    else:
        raise SystemExit(2)
    return 0


def _verify_checks(args) -> list[dict]:
    checks = []
    report = oracle.truncated_d0_spectrum(args.p, args.oracle_size, args.count, args.digits)
    checks.append(
        {
            "name": "half-line-oracle",
            "passed": bool(report.passed),
            "detail": f"size={args.oracle_size} count={args.count} max_rel_dev={report.max_rel_dev}",
        }
    )
    tree_report = oracle.truncated_tree_spectrum(args.p, args.depth, cluster_rel_tol=Fraction(1, 10**4))
    lam1 = spectrum.refine_eigenvalue(args.p, 1, 12).midpoint
    ok = True
    details = []
    with mp.workdps(40):
        for m in range(0, min(3, args.depth - 2) + 1):
            predicted = mp.mpf((Fraction(args.p ** (2 * m)) * lam1).numerator) / (
                Fraction(args.p ** (2 * m)) * lam1
            ).denominator
            match = None
            for center_str, count in tree_report.clusters:
                center = mp.mpf(center_str)
                if abs(center - predicted) / predicted < mp.mpf("0.02"):
                    match = count
                    break
            expected = spectrum.multiplicity(args.p, m)
            details.append(f"m={m}:{match}/{expected}")
            ok = ok and match == expected
    checks.append(
        {
            "name": "tree-multiplicities",
            "passed": ok,
            "detail": f"depth={args.depth} counts {' '.join(details)}",
        }
    )
    rng = random.Random(20240811)
    adjoint_ok = True
    for _ in range(20):
        f = _random_tree_function(args.p, 4, rng)
        g = _random_tree_function(args.p, 4, rng)
        lhs = operators.tree_inner(operators.apply_D(f), g)
        rhs = operators.tree_inner(f, operators.apply_Dstar(g))
        adjoint_ok = adjoint_ok and lhs == rhs
    checks.append(
        {"name": "adjointness-exact", "passed": adjoint_ok, "detail": "20 random pairs, depth 4"}
    )
    eps = Fraction(1, 10**20)
    idents_ok = True
    for b, q, z in [(Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)),
                    (Fraction(1, 9), Fraction(1, 9), Fraction(1, 3))]:
        disc = transformation_discrepancy(b, q, z, eps)
        idents_ok = idents_ok and disc.contains(0) and disc.radius <= eps
    for a, b, q in [(Fraction(1, 2), Fraction(1, 8), Fraction(1, 4)),
                    (Fraction(1, 3), Fraction(1, 5), Fraction(1, 9))]:
        disc = cauchy_sum_discrepancy(a, b, q, eps)
        idents_ok = idents_ok and disc.contains(0) and disc.radius <= eps
    checks.append({"name": "q-identities", "passed": idents_ok, "detail": "radius <= 1e-20"})
    neve_ok = True
    q = Fraction(1, args.p**2)
    for lam in (Fraction(1, 2), Fraction(1), Fraction(7, 2)):
        lhs = spectrum.char_equation_neve(lam, args.p, Fraction(1, 10**25))
        from .exactnum import char_series_value

        rhs = char_series_value(lam, q, Fraction(1, 10**25)) * (q - 1)
        neve_ok = neve_ok and (lhs - rhs).contains(0)
    checks.append({"name": "reduced-form-equivalence", "passed": neve_ok, "detail": "3 sample points"})
    return checks


def _random_tree_function(p: int, depth: int, rng: random.Random) -> operators.TreeFunction:
    levels = []
    for n in range(depth + 1):
        levels.append(
            tuple(
                Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(p**n)
            )
        )
    return operators.TreeFunction(p, depth, tuple(levels))


def cmd_verify(args, out) -> int:
    checks = _verify_checks(args)
    passed = all(c["passed"] for c in checks)
    if args.format == "json":
        _emit_json({"command": "verify", "p": args.p, "passed": passed, "checks": checks}, out)
    else:
        for c in checks:
            out.write(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['detail']}\n")
        out.write(("OK" if passed else "FAILED") + "\n")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padictree", epilog=EPILOG,
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, digits_default=12):
        sp.add_argument("--p", type=int, default=2, help="prime base (default 2)")
        sp.add_argument("--digits", type=int, default=digits_default,
                        help="certified relative digits (>= 6)")
        sp.add_argument("--format", choices=("json", "csv", "text"), default="json")

    sp = sub.add_parser("eigenvalues", help="certified eigenvalue brackets")
    add_common(sp)
    sp.add_argument("--count", type=int, default=3)
    sp.set_defaults(handler=cmd_eigenvalues)

    sp = sub.add_parser("eigenvector", help="expansion coefficients and residual")
    add_common(sp)
    sp.add_argument("--index", type=int, default=1)
    sp.add_argument("--terms", type=int, default=25, help="coefficient orders kept")
    sp.add_argument("--samples", type=int, default=12, help="entries synthesized")
    sp.set_defaults(handler=cmd_eigenvector)

    sp = sub.add_parser("spectrum", help="tree eigenvalues with multiplicities up to a cutoff")
    add_common(sp)
    sp.add_argument("--cutoff", type=str, default="5")
    sp.set_defaults(handler=cmd_spectrum)

    sp = sub.add_parser("zeta", help="spectral zeta functions")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--s", type=str, default="1", help="complex argument 're[,im]'")
    sp.add_argument("--eps", type=str, default="1e-10")
    sp.add_argument("--mode", choices=("paper", "verified"), default="verified")
    sp.add_argument("--target", choices=("d0", "d", "schatten", "continued", "poles"),
                    default="d")
    sp.add_argument("--k-max", type=int, default=3, help="pole family range (poles target)")
    sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sp.set_defaults(handler=cmd_zeta)

    sp = sub.add_parser("tree", help="truncated tree structure dump")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--format", choices=("dot", "json", "text"), default="dot")
    sp.set_defaults(handler=cmd_tree)

    sp = sub.add_parser("verify", help="run the oracle suite; exit 1 on any failure")
    add_common(sp)
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--oracle-size", type=int, default=60)
    sp.add_argument("--depth", type=int, default=6)
    sp.set_defaults(handler=cmd_verify)
    return parser


def _validate(args) -> None:
    if getattr(args, "p", 2) is not None:
        tree.Prime(args.p)
    digits = getattr(args, "digits", None)
    if digits is not None and digits < 6:
        raise ValueError("digits must be >= 6")
    depth = getattr(args, "depth", None)
    if depth is not None and not (0 <= depth <= 12):
        raise ValueError("depth out of range")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.handler(args, sys.stdout)
    except (ValueError, zeta.PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
