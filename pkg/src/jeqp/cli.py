"""Command-line interface: ``jeqp <command> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from itertools import combinations

from . import __version__
from .canon import DEFAULT_MAX_N, TooLarge, canonical_form, cycle_notation, permute_partition
from .constructions import (BY_NAME, InvalidPattern, PrefixPattern, coordinate_partition,
                            pattern_partition)
from .core import GraphParams, ParameterError, eigenvalue, spectrum
from .eigenfn import (ConsistencyError, InvalidInput, VertexFunction, block_decomposition,
                      classify_form, cross_edge_audit, difference_census, first_eigenvalue_below,
                      function_from_json, function_to_json, is_eigenfunction, partial_difference)
from .partitions import (InvalidPartition, TwoPartition, admissible_matrices, antipodal_closed,
                         partition_from_bytes, partition_from_json, partition_to_bytes,
                         partition_to_json, verify_equitable)
from .search import (SearchSpec, Status, check_f3_differences, check_large_block,
                     enumerate_partitions)

LOG = logging.getLogger("jeqp")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SHARED_DEFAULTS = {"json": False, "seed": 0, "no_timing": False, "threads": 1, "verbose": False}


class UsageError(Exception):
    pass


def _emit(obj, args, out=None):
    out = out or sys.stdout
    if args.json:
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    else:
        for k, v in obj.items():
            out.write(f"{k}: {v}\n")


def _params(args) -> GraphParams:
    return GraphParams(args.n, args.w)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_partition(path: str, n: int | None = None, w: int | None = None) -> TwoPartition:
    """Read a JSON partition file, or the binary variant when n and w are given."""
    if n is not None and w is not None:
        with open(path, "rb") as fh:
            return partition_from_bytes(fh.read(), GraphParams(n, w))
    return partition_from_json(_read_text(path))


def load_function(path: str) -> VertexFunction:
    """A function file, or a partition file read as b*1_C1 - c*1_C2."""
    text = _read_text(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"not JSON: {exc}") from exc
    if isinstance(obj, dict) and "membership" in obj:
        return VertexFunction.of_partition(partition_from_json(text))
    return function_from_json(text)


# -- commands ---------------------------------------------------------------

def cmd_spectrum(args) -> int:
    P = _params(args)
    rows = list(enumerate(spectrum(P)))
    if args.json:
        print(json.dumps({"n": P.n, "w": P.w, "eigenvalues": [v for _, v in rows]}))
    else:
        for i, lam in rows:
            print(f"{i} {lam}")
    return EXIT_OK


def cmd_matrices(args) -> int:
    P = _params(args)
    for m in admissible_matrices(P):
        if args.json:
            print(json.dumps({"b": m.b, "matrix": m.rows()}))
        else:
            print(f"b={m.b} {m}")
    return EXIT_OK


def _build(args) -> TwoPartition:
    if args.pattern:
        if args.n is None or args.w is None:
            raise UsageError("--pattern needs --n and --w")
        pattern = PrefixPattern.from_json(_read_text(args.pattern))
        return pattern_partition(GraphParams(args.n, args.w), pattern)
    if args.name is None:
        raise UsageError("give a construction name or --pattern")
    if args.name == "coord":
        if args.n is None or args.w is None:
            raise UsageError("coord needs --n and --w")
        return coordinate_partition(GraphParams(args.n, args.w), args.i)
    if args.w is None:
        raise UsageError(f"{args.name} needs --w")
    return BY_NAME[args.name](args.w)


def cmd_construct(args) -> int:
    p = _build(args)
    if args.binary:
        if not args.out:
            raise UsageError("--binary needs --out")
        with open(args.out, "wb") as fh:
            fh.write(partition_to_bytes(p))
        return EXIT_OK
    text = partition_to_json(p) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    p = load_partition(args.input, args.n, args.w)
    m = verify_equitable(p)
    if not m:
        _emit({"equitable": False, "witness": m.vertex, "reason": m.reason, **m.details}, args)
        return EXIT_FAIL
    _emit({"equitable": True, "matrix": m.rows(), "eigenvalue": m.a - m.c,
           "sizes": list(p.sizes)}, args)
    return EXIT_OK


def cmd_diff(args) -> int:
    f = load_function(args.input)
    d = partial_difference(f, args.i, args.j)
    text = function_to_json(d) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classify(args) -> int:
    f = load_function(args.input)
    form = classify_form(f)
    print(json.dumps(form.to_json(), sort_keys=True))
    return EXIT_OK if form.kind.value != "Other" else EXIT_FAIL


def cmd_blocks(args) -> int:
    f = load_function(args.input)
    bd = block_decomposition(f)
    _emit({"blocks": [list(b) for b in bd.blocks], "sizes": list(bd.sizes)}, args)
    return EXIT_OK


def cmd_search(args) -> int:
    P = _params(args)
    if args.all_b:
        matrices = admissible_matrices(P)
    elif args.b is not None:
        matrices = [m for m in admissible_matrices(P) if m.b == args.b]
        if not matrices:
            raise UsageError(f"b = {args.b} is not admissible for {P}")
    else:
        raise UsageError("give --b or --all-b")
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    status = Status.COMPLETE
    nodes, wall = 0, 0.0
    try:
        for m in matrices:
            spec = SearchSpec(P, m, budget_nodes=args.budget_nodes, budget_secs=args.budget_secs,
                              symmetry=not args.no_symmetry, threads=args.threads)
            res = enumerate_partitions(spec)
            for p in res.partitions:
                out.write(json.dumps({"n": P.n, "w": P.w, "b": m.b,
                                      "membership": p.membership_string()}) + "\n")
            rec = {"record": "matrix", "b": m.b, "matrix": m.rows(), "status": res.status.value,
                   "classes": len(res.partitions), "nodes": res.nodes}
            if res.note:
                rec["note"] = res.note
            if not args.no_timing:
                rec["wall_secs"] = round(res.wall_secs, 3)
            out.write(json.dumps(rec) + "\n")
            nodes += res.nodes
            wall += res.wall_secs
            if res.status is Status.BUDGET_EXHAUSTED:
                status = Status.BUDGET_EXHAUSTED
        summary = {"record": "summary", "status": status.value, "nodes": nodes}
        if not args.no_timing:
            summary["wall_secs"] = round(wall, 3)
        out.write(json.dumps(summary) + "\n")
    finally:
        if args.out:
            out.close()
    return EXIT_OK if status is Status.COMPLETE else EXIT_FAIL


def cmd_canon(args) -> int:
    p = load_partition(args.input, args.n, args.w)
    cf = canonical_form(p, max_n=args.max_n)
    print(cf.membership)
    if args.cert:
        print(f"perm {cf.cycles()}")
        print(f"swap {int(cf.swapped)}")
    return EXIT_OK


# -- audit --------------------------------------------------------------------

def _check(name, ok, detail=None):
    rec = {"check": name, "status": "pass" if ok else "fail"}
    if detail is not None:
        rec["detail"] = detail
    return rec


def _info(name, detail):
    return {"check": name, "status": "info", "detail": detail}


def audit_partition(p: TwoPartition, seed: int = 0) -> list[dict]:
    """Run every applicable check; returns one record per check."""
    P = p.params
    checks = []
    m = verify_equitable(p)
    if not m:
        checks.append(_check("equitable", False, {"witness": m.vertex, "reason": m.reason, **m.details}))
        return checks
    checks.append(_check("equitable", True, {"matrix": m.rows()}))
    rng = random.Random(seed)
    if P.n <= DEFAULT_MAX_N:
        perm = list(range(1, P.n + 1))
        rng.shuffle(perm)
        swap = rng.random() < 0.5
        same = canonical_form(p).membership == canonical_form(permute_partition(p, perm, swap)).membership
        checks.append(_check("canonical form invariance", same, {"perm": cycle_notation(perm), "swap": swap}))
    if P.w < 2 or m.a - m.c != eigenvalue(P, 2):
        checks.append(_info("second eigenvalue", "not a λ₂ partition"))
        return checks
    checks.append(_check("second eigenvalue", True, {"eigenvalue": m.a - m.c}))
    if P.n == 2 * P.w:
        ap = antipodal_closed(p)
        checks.append(_check("antipodal", bool(ap), None if ap else {"witness": ap.vertex}))
    f = VertexFunction.of_partition(p, m)
    if P.n >= P.w + 2:
        lam = first_eigenvalue_below(P)
        bad = None
        for i, j in combinations(range(1, P.n + 1), 2):
            d = partial_difference(f, i, j)
            if not d.is_zero() and not is_eigenfunction(d, lam):
                bad = [i, j]
                break
        checks.append(_check("differences are eigenfunctions", bad is None,
                             {"eigenvalue": lam} if bad is None else {"pair": bad}))
    ce = cross_edge_audit(p)
    checks.append(_check("cross-edge identity", ce.equal,
                         {"lhs": str(ce.lhs), "rhs": ce.rhs, "cross_edges": ce.cross_edges}))
    if P.n == 2 * P.w:
        try:
            dc = difference_census(p)
        except InvalidInput as exc:
            checks.append(_check("difference census", False, str(exc)))
        else:
            detail = {"k0": dc.k0, "k1": dc.k1, "k2": dc.k2, "k3": dc.k3}
            if dc.routed:
                checks.append(_info("difference census", {**detail, "note": "F3 differences present"}))
            else:
                checks.append(_check("difference census", dc.consistent,
                                     {**detail, "lhs": dc.lhs, "rhs": dc.rhs}))
        if P.w >= 4 and P.n <= DEFAULT_MAX_N:
            checks.append(_check("F3 differences imply the parity construction", check_f3_differences(p)))
        if P.w >= 5 and P.n <= DEFAULT_MAX_N:
            checks.append(_check("large block implies a known construction", check_large_block(p)))
    return checks


def cmd_audit(args) -> int:
    t0 = time.monotonic()
    p = load_partition(args.input, args.n, args.w)
    checks = audit_partition(p, args.seed)
    failed = [c for c in checks if c["status"] == "fail"]
    report = {
        "command": "audit",
        "version": __version__,
        "inputs": {"file": args.input, "n": p.params.n, "w": p.params.w, "seed": args.seed},
        "checks": checks,
        "result": "fail" if failed else "pass",
    }
    if not args.no_timing:
        report["wall_secs"] = round(time.monotonic() - t0, 3)
    if args.json:
        print(json.dumps(report, sort_keys=True, ensure_ascii=False))
    else:
        print(f"audit of {args.input} on J({p.params.n},{p.params.w})")
        for c in checks:
            extra = f"  {c['detail']}" if "detail" in c else ""
            print(f"  [{c['status']}] {c['check']}{extra}")
        print(f"result: {report['result']}")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # shared flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for randomized checks (default 0)")
    common.add_argument("--no-timing", action="store_true", default=argparse.SUPPRESS,
                        help="omit timing fields from reports")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker processes for search (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    ap = argparse.ArgumentParser(prog="jeqp", parents=[common],
                                 description="Equitable two-cell partitions of Johnson graphs.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    def nw(p, required=True):
        p.add_argument("--n", type=int, required=required)
        p.add_argument("--w", type=int, required=required)

    def infile(p):
        p.add_argument("--in", dest="input", required=True, help="partition file ('-' for stdin)")
        p.add_argument("--n", type=int, help="with --w: read the binary format")
        p.add_argument("--w", type=int)

    p = sub.add_parser("spectrum", help="eigenvalues of J(n, w)")
    nw(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("matrices", help="admissible quotient matrices for the second eigenvalue")
    nw(p)
    p.set_defaults(func=cmd_matrices)

    p = sub.add_parser("construct", help="write a construction as a partition file")
    p.add_argument("name", nargs="?", choices=sorted(BY_NAME) + ["coord"])
    nw(p, required=False)
    p.add_argument("--i", type=int, default=1, help="coordinate for 'coord'")
    p.add_argument("--pattern", help="JSON file {\"k\": .., \"B\": [..]}")
    p.add_argument("--out")
    p.add_argument("--binary", action="store_true", help="write the one-bit-per-vertex format")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="check that a partition is equitable")
    infile(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diff", help="partial difference of a function or partition")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("classify", help="match a function against the standard forms")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("blocks", help="block decomposition of a function or partition")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("search", help="enumerate partitions with a given matrix")
    nw(p)
    p.add_argument("--b", type=int)
    p.add_argument("--all-b", action="store_true")
    p.add_argument("--budget-nodes", type=int, default=10**9)
    p.add_argument("--budget-secs", type=float, default=None)
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("canon", help="canonical form of a partition")
    infile(p)
    p.add_argument("--cert", action="store_true", help="also print the permutation and swap flag")
    p.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("audit", help="run every applicable check on a partition")
    infile(p)
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in SHARED_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParameterError, InvalidPartition, InvalidPattern, InvalidInput,
            TooLarge, OSError) as exc:
        print(f"jeqp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"jeqp {args.command}: internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
