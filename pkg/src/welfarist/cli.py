"""Command-line front end.

Every command prints a JSON report on stdout. Exit status: 0 on success or
PASS, 1 when a violation, counterexample or refutation was found, 2 on usage
or input errors. Agent numbers on the command line (``--i``) are 1-based, as
in the reports.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import fairness, lab, model, solver, welfare

EXIT_OK, EXIT_FOUND, EXIT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 3 or 1/2, got {text!r}") from None


def _rational_list(text: str) -> list[Fraction]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals like 1,2,1/2, got {text!r}")
    return [_rational(p) for p in parts]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _welfare(text: str) -> welfare.WelfareExpr:
    try:
        return welfare.parse_welfare(text)
    except welfare.WelfareParseError as exc:
        raise argparse.ArgumentTypeError(f"bad welfare expression {text!r}: {exc}") from None


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_profile(path: str) -> model.Profile:
    try:
        return model.parse_profile(_read(path))
    except (model.ProfileFormatError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _cap(args) -> int:
    if args.cap is None:
        return model.DEFAULT_CAP
    if args.cap > model.DEFAULT_CAP and not args.allow_large:
        raise InputError(f"--cap {args.cap} exceeds the default {model.DEFAULT_CAP}; add --allow-large to confirm")
    return args.cap


def _partner(args, n: int) -> int:
    if not 2 <= args.i <= n:
        raise InputError(f"--i must be between 2 and {n} (1-based agent number)")
    return args.i - 1


def _allocation_doc(profile, alloc, vec=None) -> dict:
    doc = model.allocation_to_dict(alloc, profile)
    vec = model.utility_vector(profile, alloc) if vec is None else vec
    doc["utilities"] = [str(v) for v in vec]
    return doc


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2))


# -- commands --------------------------------------------------------------------


def cmd_solve(args) -> int:
    profile = _load_profile(args.profile)
    cap = _cap(args)
    f = args.welfare
    use_mnw = f.source == "nash"
    if args.one and args.strategy == "bb":
        alloc = solver.solve_one(profile, f, "bb", cap)
        vec = model.utility_vector(profile, alloc)
        _emit({
            "welfare": str(f),
            "rule": "welfarist",
            "strategy": "bb",
            "value": str(welfare.evaluate(f, vec)),
            "maximizers": [_allocation_doc(profile, alloc, vec)],
        })
        return EXIT_OK
    found = solver.mnw_maximizers(profile, cap) if use_mnw else solver.maximizers(profile, f, cap)
    pairs = list(zip(found.allocations, found.utility_vectors))
    if args.one:
        pairs = pairs[:1]
    _emit({
        "welfare": str(f),
        "rule": "mnw" if use_mnw else "welfarist",
        "strategy": "brute",
        "value": str(found.welfare_value),
        "backend": found.backend.value,
        "tolerance_ties": found.tolerance_ties,
        "count": len(found),
        "maximizers": [_allocation_doc(profile, a, v) for a, v in pairs],
    })
    return EXIT_OK


def cmd_check_ef1(args) -> int:
    profile = _load_profile(args.profile)
    try:
        alloc = model.parse_allocation(_read(args.allocation), profile)
    except model.ProfileFormatError as exc:
        raise InputError(f"{args.allocation}: {exc}") from None
    report = fairness.is_ef1(profile, alloc)
    doc = _allocation_doc(profile, alloc)
    doc["ef1"] = report.holds
    doc["violations"] = [
        {
            "envious": profile.agent_names[v.envious],
            "envied": profile.agent_names[v.envied],
            "best_removable_good": profile.good_names[v.best_good],
            "residual_envy": str(v.residual_envy),
        }
        for v in report.violations
    ]
    _emit(doc)
    return EXIT_OK if report.holds else EXIT_FOUND


def _point(args) -> lab.ProbePoint:
    if any(v <= 0 for v in args.x):
        raise InputError("--x entries must be positive")
    return lab.ProbePoint(tuple(args.x), args.k, _partner(args, len(args.x)))


def cmd_probe(args) -> int:
    outcome = lab.probe_exchange(args.welfare, _point(args))
    doc = {"welfare": str(args.welfare), **lab.outcome_to_dict(outcome)}
    _emit(doc)
    return EXIT_OK if outcome.equal else EXIT_FOUND


def cmd_scan(args) -> int:
    if args.n < 2:
        raise InputError("--n must be at least 2")
    if any(v <= 0 for v in args.grid):
        raise InputError("--grid entries must be positive")
    result = lab.scan_exchange(args.welfare, args.n, args.grid, args.kmax)
    doc = {"welfare": str(args.welfare), "result": "PASS" if result.passed else "FAIL", "checked": result.checked}
    if result.passed:
        doc["note"] = "evidence on a finite grid, not a proof"
    else:
        doc["failure"] = lab.outcome_to_dict(result.failure)
    _emit(doc)
    return EXIT_OK if result.passed else EXIT_FOUND


def _spec(args, epsilon=None, swap=False) -> lab.GadgetSpec:
    point = _point(args)
    if swap:
        point = point.swapped()
    eps = point.x[0] / 2 if epsilon is None else epsilon
    try:
        return lab.GadgetSpec(point.x, point.k, point.i, eps, swapped=swap)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_gadget(args) -> int:
    spec = _spec(args, args.epsilon, args.swap)
    sys.stdout.write(model.serialize_profile(lab.build_gadget(spec)).decode())
    return EXIT_OK


def cmd_refute(args) -> int:
    f = args.welfare
    point = _point(args)
    outcome = lab.probe_exchange(f, point)
    if outcome.equal:
        _emit({
            "welfare": str(f),
            "probe": lab.outcome_to_dict(outcome),
            "refuted": False,
            "note": "exchange identity holds at this point; no gadget to build",
        })
        return EXIT_OK
    try:
        eps = lab.find_epsilon(f, point)
    except lab.EpsilonNotFound as exc:
        raise InputError(str(exc)) from None
    report = lab.refute_ef1_existence(f, eps.spec(), cap=_cap(args), probe=outcome)
    _emit({"welfare": str(f), **report.to_dict()})
    return EXIT_FOUND if report.refuted else EXIT_OK


def cmd_equiv(args) -> int:
    if args.n < 2:
        raise InputError("--n must be at least 2")
    if args.m < args.n:
        raise InputError("--m must be at least --n so that every agent can get a good")
    result = lab.equivalence_with_mnw(args.welfare, args.trials, args.seed, args.n, args.m, _cap(args))
    doc = {"welfare": str(args.welfare), "result": "PASS" if result.passed else "FAIL", "trials": args.trials, "seed": args.seed}
    if not result.passed:
        p = result.witness
        doc["witness"] = model.profile_to_dict(p)
        doc["welfare_maximizers"] = [_allocation_doc(p, a) for a in result.welfare_set.allocations]
        doc["mnw_maximizers"] = [_allocation_doc(p, a) for a in result.mnw_set.allocations]
    _emit(doc)
    return EXIT_OK if result.passed else EXIT_FOUND


def cmd_pigeonhole(args) -> int:
    spec = _spec(args, args.epsilon)
    result = lab.check_gadget_pigeonhole(spec, cap=_cap(args))
    profile = lab.build_gadget(spec)
    doc = {
        "x": [str(v) for v in spec.x],
        "k": spec.k,
        "epsilon": str(spec.epsilon),
        "result": "PASS" if result.passed else "FAIL",
        "allocations_checked": result.checked,
        "ef1_allocations": result.ef1_count,
    }
    if result.witness is not None:
        doc["witness"] = _allocation_doc(profile, result.witness)
    _emit(doc)
    return EXIT_OK if result.passed else EXIT_FOUND


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="welfarist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def with_cap(p):
        p.add_argument("--cap", type=_positive_int, help=f"enumeration cap (default {model.DEFAULT_CAP})")
        p.add_argument("--allow-large", action="store_true", help="confirm a --cap above the default")

    def with_point(p, need_i=True):
        p.add_argument("--x", type=_rational_list, required=True, metavar="LIST", help="positive rationals, e.g. 1,2")
        p.add_argument("--k", type=_positive_int, required=True)
        p.add_argument("--i", type=int, required=need_i, default=2, help="partner agent, 1-based, >= 2")

    p = sub.add_parser("solve", help="welfare maximizers of a profile")
    p.add_argument("--profile", required=True, metavar="FILE")
    p.add_argument("--welfare", type=_welfare, required=True, metavar="EXPR")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--all", action="store_true", help="list every maximizer (default)")
    which.add_argument("--one", action="store_true", help="report a single maximizer")
    p.add_argument("--strategy", choices=["brute", "bb"], default="brute")
    with_cap(p)
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("check-ef1", help="audit an allocation for EF1")
    p.add_argument("--profile", required=True, metavar="FILE")
    p.add_argument("--allocation", required=True, metavar="FILE")
    p.set_defaults(run=cmd_check_ef1)

    p = sub.add_parser("probe", help="one exchange-identity probe")
    p.add_argument("--welfare", type=_welfare, required=True, metavar="EXPR")
    with_point(p)
    p.set_defaults(run=cmd_probe)

    p = sub.add_parser("scan", help="exchange-identity probes over a grid")
    p.add_argument("--welfare", type=_welfare, required=True, metavar="EXPR")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=_rational_list, required=True, metavar="LIST")
    p.add_argument("--kmax", type=_positive_int, required=True)
    p.set_defaults(run=cmd_scan)

    p = sub.add_parser("gadget", help="emit a counterexample profile document")
    with_point(p)
    p.add_argument("--epsilon", type=_rational, required=True, metavar="RAT")
    p.add_argument("--swap", action="store_true", help="exchange the x values of agents 1 and i first")
    p.set_defaults(run=cmd_gadget)

    p = sub.add_parser("refute", help="probe, search epsilon, build the gadget, audit its maximizers")
    p.add_argument("--welfare", type=_welfare, required=True, metavar="EXPR")
    with_point(p, need_i=False)
    with_cap(p)
    p.set_defaults(run=cmd_refute)

    p = sub.add_parser("equiv", help="compare maximizer sets with MNW on random profiles")
    p.add_argument("--welfare", type=_welfare, required=True, metavar="EXPR")
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    with_cap(p)
    p.set_defaults(run=cmd_equiv)

    p = sub.add_parser("pigeonhole", help="check the block structure of EF1 allocations of a gadget")
    with_point(p, need_i=False)
    p.add_argument("--epsilon", type=_rational, metavar="RAT", help="default x_1/2")
    with_cap(p)
    p.set_defaults(run=cmd_pigeonhole)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.run(args)
    except (InputError, model.CapacityError, solver.UnsupportedWelfareError, welfare.WelfareDomainError) as exc:
        print(f"welfarist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
