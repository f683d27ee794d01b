"""Command-line interface: ``crninject analyze`` and ``crninject crosscheck``."""

from __future__ import annotations

import argparse
import difflib
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .criteria import (
    DEFAULT_BUDGET,
    AnalysisReport,
    BudgetExceeded,
    Method,
    MethodMismatch,
    Verdict,
    VerdictKind,
    analyze,
    det_extended_jacobian,
    det_fully_open_relation,
    enumeration_size,
)
from .linalg import ReducedBasis
from .network import Network, NetworkError, OpennessClass, classify_openness, parse_network
from .oracle import random_eval_crosscheck

FORMAT_VERSION = 1
DET_PRINT_LIMIT = 10_000

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_INJECTIVE = 2
EXIT_DEGENERATE = 3

_EXIT_FOR = {
    VerdictKind.INJECTIVE: EXIT_OK,
    VerdictKind.NOT_INJECTIVE: EXIT_NOT_INJECTIVE,
    VerdictKind.ALL_DEGENERATE: EXIT_DEGENERATE,
}


def linear_form(coeffs: Sequence[Fraction], names: Sequence[str]) -> str:
    parts = []
    for x, name in zip(coeffs, names):
        if not x:
            continue
        mag = abs(x)
        body = name if mag == 1 else f"{mag}*{name}"
        if not parts:
            parts.append(("-" if x < 0 else "") + body)
        else:
            parts.append(("- " if x < 0 else "+ ") + body)
    return " ".join(parts) or "0"


def basis_forms(net: Network, basis: ReducedBasis) -> list[str]:
    names = [net.species[i].name for i in basis.permutation]
    return [linear_form(w, names) for w in basis.omegas]


def _sign_word(sign: int) -> str:
    return "positive" if sign > 0 else "negative"


def verdict_json(net: Network, v: Verdict) -> dict:
    out: dict = {"kind": v.kind.value}
    if v.kind == VerdictKind.INJECTIVE:
        out["sign"] = v.det_sign
    elif v.kind == VerdictKind.NOT_INJECTIVE:
        out["witnesses"] = {
            "positive": v.positive_witness.describe(net),
            "negative": v.negative_witness.describe(net),
        }
    return out


def verdict_text(v: Verdict) -> str:
    if v.kind == VerdictKind.INJECTIVE:
        other = "all-positive" if v.det_sign < 0 else "all-negative"
        return f"INJECTIVE (det sign: {_sign_word(v.det_sign)}, −det {other})"
    if v.kind == VerdictKind.NOT_INJECTIVE:
        return "NOT INJECTIVE (det has coefficients of both signs)"
    return "ALL STEADY STATES DEGENERATE"


def report_json(report: AnalysisReport, *, timings: bool = True, oracle: dict | None = None) -> dict:
    net = report.network
    names = net.species_names
    out: dict = {
        "format_version": FORMAT_VERSION,
        "network": {
            "n": net.n,
            "m": net.m,
            "species": list(names),
            "reactions": [{"label": r.rate_label, "reaction": r.render(names)} for r in net.reactions],
        },
        "openness": {"class": report.openness.kind.value, "s": report.openness.s, "d": report.openness.d},
        "reduced_basis": {
            "permutation": [names[i] for i in report.basis.permutation],
            "forms": basis_forms(net, report.basis),
        },
        "method": report.method.value,
        "verdict": verdict_json(net, report.verdict),
    }
    if report.enumeration is not None:
        e = report.enumeration
        out["enumeration"] = {"size": e.total, "reaction_sets": e.reaction_sets,
                              "pairs_examined": e.pairs_examined, "nonzero": e.nonzero}
    if report.determinant is not None:
        det = report.determinant
        entry: dict = {"monomial_count": len(det)}
        if len(det) <= DET_PRINT_LIMIT:
            entry["polynomial"] = det.render()
        else:
            entry["truncated"] = True
        out["determinant"] = entry
    if report.degeneracy is not None:
        dg = report.degeneracy
        out["degeneracy"] = {
            "all_degenerate": dg.all_degenerate,
            "certificate": dg.certificate,
            "witness": dg.witness.describe(net) if dg.witness else None,
        }
    if report.open_closed is not None:
        oc = report.open_closed
        out["open_closed"] = {
            "fully_open_verdict": verdict_json(oc.closure, oc.fully_open_verdict),
            "closed_verdict": oc.closed_verdict.kind.value,
            "theorem_applies": oc.theorem_applies,
            "declared_degree_s_monomials": oc.declared_degree_s_monomials,
            "consistent": oc.consistent,
        }
    if report.wsd is not None:
        w = report.wsd
        entry = {"kind": w.kind.value}
        if w.sigma is not None:
            entry["sigma"] = w.sigma
        if w.positive_witness is not None:
            entry["witnesses"] = {"positive": w.positive_witness.describe(net),
                                  "negative": w.negative_witness.describe(net)}
        if w.offending_reaction is not None:
            entry["offending_reaction"] = net.reactions[w.offending_reaction].rate_label
        out["wsd"] = entry
    if oracle is not None:
        out["oracle"] = oracle
    if timings:
        out["timings"] = {k: round(v, 6) for k, v in report.timings.items()}
    return out


def report_text(report: AnalysisReport, *, timings: bool = True, oracle: dict | None = None) -> str:
    net = report.network
    o = report.openness
    lines = [
        f"network: {net.n} species, {net.m} reactions",
        f"openness: {o.kind.value.replace('_', ' ')} (s = {o.s}, d = {o.d})",
    ]
    forms = basis_forms(net, report.basis)
    if forms:
        lines.append("conservation laws: " + "; ".join(forms))
    lines.append(f"method: {report.method.value}")
    lines.append("verdict: " + verdict_text(report.verdict))
    v = report.verdict
    if v.kind == VerdictKind.NOT_INJECTIVE:
        for tag, w in (("positive", v.positive_witness), ("negative", v.negative_witness)):
            info = w.describe(net)
            removed = ",".join(info["removed_species"]) or "-"
            lines.append(f"  {tag} term: {info['monomial']}  (R = {{{','.join(info['reactions'])}}}, I = {{{removed}}})")
    if report.determinant is not None:
        det = report.determinant
        lines.append(f"determinant: {len(det)} monomials")
        if len(det) <= DET_PRINT_LIMIT:
            lines.append(f"  det = {det.render()}")
            lines.append(f"  -det = {(-det).render()}")
        else:
            lines.append(f"  (not printed: more than {DET_PRINT_LIMIT} monomials)")
    if report.degeneracy is not None:
        dg = report.degeneracy
        if dg.all_degenerate:
            lines.append(f"degeneracy: all steady states degenerate ({dg.certificate})")
        else:
            info = dg.witness.describe(net)
            lines.append(f"degeneracy: non-degenerate steady states possible; witness R = {{{','.join(info['reactions'])}}}, "
                         f"I = {{{','.join(info['removed_species'])}}}")
    if report.open_closed is not None:
        oc = report.open_closed
        lines.append(f"fully open closure: {verdict_text(oc.fully_open_verdict)}")
        if oc.theorem_applies:
            lines.append(f"  monomials with s declared constants: {oc.declared_degree_s_monomials}; "
                         f"closed verdict consistent: {'yes' if oc.consistent else 'NO'}")
    if report.wsd is not None:
        w = report.wsd
        if w.sigma is not None:
            lines.append(f"wsd: pass (sigma = {w.sigma})")
        elif w.offending_reaction is not None:
            lines.append(f"wsd: not NAC (reaction {net.reactions[w.offending_reaction].rate_label})")
        else:
            lines.append("wsd: fail")
    if oracle is not None:
        lines.append(f"oracle: {oracle['passed']}/{oracle['trials']} random points agree")
    if timings:
        lines.append("timings: " + ", ".join(f"{k} {v:.3f}s" for k, v in report.timings.items()))
    return "\n".join(lines)


def _load(path: str) -> Network:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        return parse_network(text)
    except NetworkError as e:
        raise CliError(f"{path}: {e}") from e


class CliError(Exception):
    pass


def cmd_analyze(args) -> int:
    net = _load(args.file)
    try:
        report = analyze(
            net,
            method=args.method,
            budget=args.budget,
            want_det=args.det,
            degeneracy=args.degeneracy,
            open_closed=args.open_closed,
            wsd=args.wsd,
        )
    except BudgetExceeded as e:
        raise CliError(f"{e}; rerun with --method elimination") from e
    oracle = None
    if args.oracle:
        rep = random_eval_crosscheck(net, args.oracle, args.seed, budget=args.budget)
        oracle = {"trials": rep.trials, "passed": rep.passed, "seed": args.seed}
    timings = not args.no_timing
    if args.json:
        print(json.dumps(report_json(report, timings=timings, oracle=oracle), indent=2))
    else:
        print(report_text(report, timings=timings, oracle=oracle))
    return _EXIT_FOR[report.verdict.kind]


def cmd_crosscheck(args) -> int:
    net = _load(args.file)
    ok = True
    size = enumeration_size(net)
    if size <= args.budget:
        try:
            det_extended_jacobian(net, method=Method.BOTH, budget=args.budget)
            print("methods: subset expansion and elimination agree")
        except MethodMismatch as e:
            print(f"methods: MISMATCH ({e})")
            ok = False
    else:
        print(f"methods: skipped (enumeration size {size} above budget)")
    if classify_openness(net).kind == OpennessClass.CLOSED:
        lhs, rhs = det_fully_open_relation(net)
        same = lhs == rhs
        ok &= same
        print("fully open identity: " + ("holds" if same else "FAILS"))
    else:
        print("fully open identity: not applicable (network is open)")
    rep = random_eval_crosscheck(net, args.trials, args.seed, budget=args.budget)
    print(f"oracle: {rep.passed}/{rep.trials} random points agree (seed {args.seed})")
    for f in rep.failures[:5]:
        print(f"  mismatch at trial {f['trial']}: symbolic {f['symbolic']} vs evaluated {f['numeric']}")
    ok &= rep.ok
    if args.golden:
        report = analyze(net, budget=args.budget, want_det=True)
        produced = json.dumps(report_json(report, timings=False), indent=2) + "\n"
        try:
            expected = Path(args.golden).read_text(encoding="utf-8")
        except OSError as e:
            raise CliError(f"cannot read {args.golden}: {e.strerror or e}") from e
        if expected == produced:
            print("golden: match")
        else:
            print("golden: MISMATCH")
            sys.stdout.writelines(difflib.unified_diff(
                expected.splitlines(keepends=True), produced.splitlines(keepends=True),
                fromfile=args.golden, tofile="produced"))
            ok = False
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crninject", description="Exact injectivity analysis of mass-action reaction networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="decide injectivity of a network file")
    a.add_argument("file")
    a.add_argument("--json", action="store_true", help="emit a JSON report")
    a.add_argument("--det", action="store_true", help="include the determinant")
    a.add_argument("--method", choices=[m.value for m in Method], default=None,
                   help="determinant method (default: both within budget, else elimination)")
    a.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum (R, I) pairs to enumerate")
    a.add_argument("--degeneracy", action="store_true", help="run the degeneracy check")
    a.add_argument("--open-closed", action="store_true", help="relate to the fully open closure")
    a.add_argument("--wsd", action="store_true", help="run the sign-determinacy check")
    a.add_argument("--oracle", type=int, default=0, metavar="TRIALS", help="also run random-point checks")
    a.add_argument("--seed", type=int, default=0, help="seed for --oracle")
    a.add_argument("--no-timing", action="store_true", help="omit timings (byte-stable output)")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("crosscheck", help="verify symbolic results independently")
    c.add_argument("file")
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--golden", help="JSON report to compare against (analyze --json --det --no-timing)")
    c.set_defaults(func=cmd_crosscheck)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
