"""Command-line interface.

Exit status: 0 on success, 1 for a mathematical negative (operations that do
not commute, an undecided verification, a bound that is not tight), 2 for
usage errors, bad input and resource limits.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .centralizer import (
    CentralizerReport,
    centralizer_brute,
    centralizer_fast,
    double_centralizer_hom,
    double_centralizer_sandwich,
    hom_search_strategy,
    replay_report,
    verify_dc,
)
from .clone import DEFAULT_MEMBER_LIMIT, derived_clone
from .core import Algebra, OpSet
from .errors import CloneforgeError, IncompleteError, ParseError, ResourceLimitError
from .homsearch import DEFAULT_HOM_CAP, enumerate_homs, operation_algebra
from .io import (
    algebra_from_text,
    algebra_to_dict,
    canonical_json,
    dumps_algebra,
    format_homs,
    load_json,
    parse_algebra,
    parse_group,
    write_atomic,
)
from .kronecker import Matrix, commutes
from .zoo import (
    action_preorder,
    gset_strategy,
    make_free_gset,
    make_vector_space,
    roots_of_action,
    unique_transitions_check,
    vecspace_strategy,
    word_str,
)

VERBS = ("show", "commute", "clone", "centralizer", "dc", "verify", "homs", "zoo-build", "analyze-action")


class UsageError(CloneforgeError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cloneforge", description="Clones, centralizers and double centralizers of finite algebras.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("verb", choices=VERBS)
    src = parser.add_argument_group("input algebra (pick one)")
    src.add_argument("--algebra", metavar="FILE", help="algebra JSON file")
    src.add_argument("--vecspace", nargs=2, type=int, metavar=("P", "D"), help="GF(P)^D as a vector space")
    src.add_argument("--free-gset", nargs=2, metavar=("GROUP_FILE", "R"), help="free G-set on R roots")
    src.add_argument("--monoid-action", metavar="FILE", help="algebra JSON file with unary symbols only")
    parser.add_argument("--f", help="symbol of the first operation (commute)")
    parser.add_argument("--g", help="symbol of the second operation (commute)")
    parser.add_argument("--arity", type=int, help="arity n of the slice")
    parser.add_argument("--cap-arity", type=int, help="largest arity used for upper bounds / brute checks")
    parser.add_argument("--method", choices=("fast", "brute"), default="fast", help="centralizer route")
    parser.add_argument("--target", metavar="FILE", help="target algebra for homs (default: the source)")
    parser.add_argument("--power", type=int, metavar="N", help="homs: use A^(A^N) as the source")
    parser.add_argument("--limit", type=int, help="member limit (clone) or result cap (homs)")
    parser.add_argument("--length-bound", type=int, default=None, help="word length bound (analyze-action)")
    parser.add_argument("--out", metavar="FILE", help="write the JSON report (or hom dump) here")
    parser.add_argument("--replay", metavar="REPORT", help="re-verify the witnesses of a saved report")
    return parser


def _load_algebra(args) -> tuple[Algebra, str]:
    given = [x for x in (args.algebra, args.vecspace, args.free_gset, args.monoid_action) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --algebra, --vecspace, --free-gset, --monoid-action")
    if args.algebra is not None:
        return parse_algebra(args.algebra), "algebra"
    if args.monoid_action is not None:
        return parse_algebra(args.monoid_action), "action"
    if args.vecspace is not None:
        p, d = args.vecspace
        return make_vector_space(p, d), "vecspace"
    group_file, roots = args.free_gset
    try:
        r = int(roots)
    except ValueError:
        raise UsageError(f"--free-gset root count must be an integer, got {roots!r}") from None
    return make_free_gset(parse_group(group_file), r), "free-gset"


def _need_arity(args) -> int:
    if args.arity is None or args.arity < 0:
        raise UsageError("--arity n (n >= 0) is required")
    return args.arity


def _emit(args, report: dict, summary: str) -> None:
    if args.out:
        write_atomic(args.out, canonical_json(report))
    print(summary)


def _opset_dict(ops: OpSet) -> list[list[int]]:
    return [list(map(int, t)) for t in ops.tables()]


def cmd_show(args) -> int:
    algebra, _ = _load_algebra(args)
    sig = ", ".join(f"{name}/{arity}" for name, arity in algebra.signature)
    _emit(args, algebra_to_dict(algebra), f"carrier {algebra.size}; signature: {sig or '(empty)'}")
    return 0


def cmd_zoo_build(args) -> int:
    if args.algebra or args.monoid_action:
        raise UsageError("zoo-build takes --vecspace or --free-gset")
    algebra, _ = _load_algebra(args)
    text = dumps_algebra(algebra)
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote algebra with carrier {algebra.size} to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_commute(args) -> int:
    algebra, _ = _load_algebra(args)
    if not args.f or not args.g:
        raise UsageError("commute needs --f and --g")
    try:
        f, g = algebra[args.f], algebra[args.g]
    except KeyError as exc:
        raise UsageError(f"unknown symbol {exc.args[0]!r}") from None
    ok, witness = commutes(f, g)
    report = {"kind": "commute", "algebra": algebra_to_dict(algebra), "f": args.f, "g": args.g, "commutes": ok}
    if ok:
        _emit(args, report, f"{args.f} commutes with {args.g}")
        return 0
    first, second = _products_at(f, g, witness)
    report["witness"] = {"rows": witness.as_rows(), "code": witness.code(), "first": first, "second": second}
    _emit(args, report, f"{args.f} does not commute with {args.g}; witness rows {witness.as_rows()}: {first} != {second}")
    return 1


def _products_at(f, g, a: Matrix) -> tuple[int, int]:
    """``(f * g)(a)`` and ``(f ~* g)(a)`` at a single matrix."""
    first = g(*(f(*a.column(y)) for y in range(a.cols)))
    second = f(*(g(*a.row(x)) for x in range(a.rows)))
    return first, second


def cmd_clone(args) -> int:
    algebra, _ = _load_algebra(args)
    n = _need_arity(args)
    ops = derived_clone(algebra, n, args.limit or DEFAULT_MEMBER_LIMIT)
    report = {"kind": "clone", "arity": n, "carrier": algebra.size, "members": _opset_dict(ops), "size": len(ops)}
    _emit(args, report, f"derived({n}) has {len(ops)} member(s)")
    return 0


def cmd_centralizer(args) -> int:
    algebra, _ = _load_algebra(args)
    n = _need_arity(args)
    if args.method == "brute":
        ops = centralizer_brute(algebra.operations, n, carrier_size=algebra.size, max_g_arity=args.cap_arity)
    else:
        ops = centralizer_fast(algebra.operations, n, carrier_size=algebra.size, limit=args.limit or DEFAULT_MEMBER_LIMIT)
    report = {"kind": "centralizer", "method": args.method, "arity": n, "carrier": algebra.size,
              "members": _opset_dict(ops), "size": len(ops)}
    _emit(args, report, f"centralizer({n}) has {len(ops)} member(s)")
    return 0


def cmd_dc(args) -> int:
    algebra, _ = _load_algebra(args)
    n = _need_arity(args)
    if args.cap_arity is None:
        ops = double_centralizer_hom(algebra, n, args.limit or DEFAULT_HOM_CAP)
        report = {"kind": "dc", "method": "hom-criterion", "arity": n, "carrier": algebra.size,
                  "members": _opset_dict(ops), "size": len(ops)}
        _emit(args, report, f"DC({n}) has {len(ops)} member(s)")
        return 0
    lower, upper = double_centralizer_sandwich(algebra, n, args.cap_arity)
    exact = lower == upper
    report = {"kind": "dc", "method": "sandwich", "arity": n, "carrier": algebra.size, "cap_arity": args.cap_arity,
              "lower": _opset_dict(lower), "upper": _opset_dict(upper), "exact": exact}
    if exact:
        _emit(args, report, f"DC({n})=derived({n}), size {len(lower)}")
        return 0
    _emit(args, report, f"undecided: {len(lower)} <= |DC({n})| <= {len(upper)}")
    return 1


def cmd_verify(args) -> int:
    if args.replay:
        return _replay(args)
    algebra, kind = _load_algebra(args)
    n = _need_arity(args)
    strategy = {"vecspace": vecspace_strategy, "free-gset": gset_strategy}.get(kind)
    strategy = strategy(algebra) if strategy else hom_search_strategy(args.limit or DEFAULT_HOM_CAP)
    report = verify_dc(algebra, n, strategy)
    data = {"kind": "verify", "algebra": algebra_to_dict(algebra), **report.to_dict()}
    _emit(args, data, report.summary())
    return 0 if report.verified else 1


def _replay(args) -> int:
    data = load_json(args.replay)
    if not isinstance(data, dict) or "algebra" not in data:
        raise ParseError(f"{args.replay}: not a replayable report")
    algebra = algebra_from_text(canonical_json(data["algebra"]))
    kind = data.get("kind")
    if kind == "verify":
        report = CentralizerReport.from_dict(data)
        ok = replay_report(algebra, report)
        print(f"replay {'ok' if ok else 'FAILED'}: {len(report.witnesses)} witness(es), verdict {report.verdict}")
        return 0 if ok and report.verified else 1
    if kind == "commute":
        f, g = algebra[data["f"]], algebra[data["g"]]
        if data["commutes"]:
            ok = commutes(f, g)[0]
        else:
            w = data["witness"]
            first, second = _products_at(f, g, Matrix.from_rows(algebra.size, w["rows"]))
            ok = first != second and (first, second) == (w["first"], w["second"])
        print(f"replay {'ok' if ok else 'FAILED'}")
        return 0 if ok else 1
    raise ParseError(f"{args.replay}: unknown report kind {kind!r}")


def cmd_homs(args) -> int:
    algebra, _ = _load_algebra(args)
    if args.power is not None:
        if args.target:
            raise UsageError("--power and --target are exclusive")
        source, target = operation_algebra(algebra, args.power), algebra
    else:
        source = algebra
        target = parse_algebra(args.target) if args.target else algebra
    cap = args.limit or DEFAULT_HOM_CAP
    result = enumerate_homs(source, target, cap)
    dump = format_homs(h.values for h in result)
    if args.out:
        write_atomic(args.out, dump)
    else:
        sys.stdout.write(dump)
    print(f"{len(result)} homomorphism(s){' (truncated)' if result.truncated else ''}", file=sys.stderr)
    if result.truncated:
        raise ResourceLimitError(f"hom enumeration truncated at the cap {cap}", limit=cap)
    return 0


def cmd_analyze_action(args) -> int:
    algebra, _ = _load_algebra(args)
    structure = action_preorder(algebra)
    roots = sorted(roots_of_action(structure))
    L = args.length_bound if args.length_bound is not None else algebra.size + 1
    unique, witness = unique_transitions_check(algebra, L)
    report = {
        "kind": "action",
        "carrier": algebra.size,
        "reach": structure.reach.astype(int).tolist(),
        "classes": structure.classes,
        "roots": roots,
        "length_bound": L,
        "unique_transitions": unique,
        "witness": None if unique else {"w": list(witness[0]), "v": list(witness[1]), "a": witness[2]},
    }
    line = f"roots {roots}; unique transitions up to length {L}: {'yes' if unique else 'no'}"
    if not unique:
        w, v, a = witness
        line += f" ({word_str(w)}.{a} = {word_str(v)}.{a})"
    _emit(args, report, line)
    return 0


COMMANDS = {
    "show": cmd_show,
    "commute": cmd_commute,
    "clone": cmd_clone,
    "centralizer": cmd_centralizer,
    "dc": cmd_dc,
    "verify": cmd_verify,
    "homs": cmd_homs,
    "zoo-build": cmd_zoo_build,
    "analyze-action": cmd_analyze_action,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.verb](args)
    except (IncompleteError, ResourceLimitError) as exc:
        print(f"cloneforge: limit reached: {exc}", file=sys.stderr)
        return 2
    except (CloneforgeError, OSError) as exc:
        print(f"cloneforge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
