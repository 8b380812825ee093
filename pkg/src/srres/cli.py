"""Command-line interface: input files, reports, exit codes, figure hooks.

Input complexes are JSON objects {"m": int, "facets": [[...]]} or
{"m": int, "nonfaces": [[...]]} with 1-indexed, ascending vertex lists and
at most 20 vertices.  Every command prints a report object with a stable
key order and a digest of its results, so identical inputs give
byte-identical output regardless of thread count; `--format text` renders
the main table as tab-delimited lines instead.

Exit codes: 0 on success, 2 when a verification or formality criterion
fails (the report carries the witnesses), 1 on usage or input errors with a
single-line diagnostic on stderr.
"""

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .exactla import FieldSpec
from .mvss import DegenerationTester, build, check_against_operations, pages, pages_to_json
from .oracle import hilbert_identity, m2_compare, strand_homology_report
from .resolution import BettiTable, assemble, hochster_betti, resolution_to_json, verify
from .simplicial import SimplicialComplex, reduced_cohomology, verts_of
from .torus import SubtorusSpec, ef_coordinate, ef_subtorus
from .transfer import (
    StrandCache,
    generic_operations,
    homology_dims,
    module_from_json,
    module_retraction,
    validate_module,
)

MAX_VERTICES = 20
THREADS_ENV = "SRRES_THREADS"


class CliError(Exception):
    """Usage or input problem; becomes a one-line diagnostic and exit 1."""


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 1:
        raise CliError(f"{THREADS_ENV} must be positive, got {n}")
    return n


# -- input files ---------------------------------------------------------------------


def _vertex_lists(value, what: str, m: int) -> List[List[int]]:
    if not isinstance(value, list) or not all(isinstance(f, list) for f in value):
        raise CliError(f'"{what}" must be a list of vertex lists')
    for f in value:
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in f):
            raise CliError(f'"{what}" entries must be integers')
        if any(not (1 <= v <= m) for v in f):
            raise CliError(f'"{what}" vertices must lie in 1..{m}')
        if f != sorted(set(f)):
            raise CliError(f'"{what}" lists must be strictly ascending')
    return value


def complex_from_json(data) -> SimplicialComplex:
    if not isinstance(data, dict):
        raise CliError("complex file must be a JSON object")
    m = data.get("m")
    if not isinstance(m, int) or isinstance(m, bool) or not (0 <= m <= MAX_VERTICES):
        raise CliError(f'"m" must be an integer in 0..{MAX_VERTICES}')
    keys = [k for k in ("facets", "nonfaces") if k in data]
    if len(keys) != 1:
        raise CliError('exactly one of "facets" or "nonfaces" is required')
    lists = _vertex_lists(data[keys[0]], keys[0], m)
    if keys[0] == "facets":
        return SimplicialComplex.from_facets(m, lists)
    return SimplicialComplex.from_nonfaces(m, lists)


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: {exc}")


def load_complex(path: str) -> SimplicialComplex:
    return complex_from_json(load_json(path))


def parse_field(text: str) -> FieldSpec:
    try:
        return FieldSpec.parse(text)
    except ValueError as exc:
        raise CliError(str(exc))


def parse_coords(text: str, m: int) -> int:
    """Comma-separated 1-indexed vertices to a mask; empty means the empty set."""
    text = text.strip()
    if not text:
        return 0
    mask = 0
    for tok in text.split(","):
        try:
            v = int(tok)
        except ValueError:
            raise CliError(f"bad vertex {tok!r} in coordinate list")
        if not (1 <= v <= m):
            raise CliError(f"vertex {v} out of range 1..{m}")
        bit = 1 << (v - 1)
        if mask & bit:
            raise CliError(f"vertex {v} repeated in coordinate list")
        mask |= bit
    return mask


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


# -- report assembly -------------------------------------------------------------------


def results_digest(results: dict) -> str:
    canon = json.dumps(results, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def make_report(command: Sequence[str], field: Optional[str], results: dict) -> dict:
    return {
        "version": __version__,
        "command": list(command),
        "field": field,
        "results": results,
        "digest": results_digest(results),
    }


def emit(report: dict, fmt: str, rows: List[Tuple]) -> None:
    if fmt == "text":
        for row in rows:
            print("\t".join(str(x) for x in row))
    else:
        print(json.dumps(report, sort_keys=True, indent=1))


def _betti_payload(table) -> Tuple[dict, List[Tuple]]:
    entries = [
        {"i": i, "multidegree": verts_of(U), "beta": b}
        for (i, U), b in sorted(table.by_multidegree.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    ]
    results = {
        "m": table.m,
        "betti": entries,
        "totals": list(table.totals()),
        "moment_angle_poincare": {str(n): d for n, d in table.moment_angle_poincare().items()},
    }
    rows = [("i", "multidegree", "beta")]
    rows += [(e["i"], ",".join(map(str, e["multidegree"])) or "-", e["beta"]) for e in entries]
    return results, rows


def _parallel_cohomology(K: SimplicialComplex, field: FieldSpec) -> List[Tuple[int, Dict[int, int]]]:
    """Reduced cohomology dims of every full subcomplex, merged in order.

    The per-multidegree computations are independent; they run on the
    thread pool and are reassembled in ascending mask order so the output
    never depends on the pool size.
    """

    def one(U: int):
        return U, dict(reduced_cohomology(K.full_subcomplex(U), field).dims)

    n = thread_count()
    universe = range(1 << K.m)
    if n == 1:
        return [one(U) for U in universe]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, universe))


# -- commands ----------------------------------------------------------------------


def cmd_betti(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    per_u = _parallel_cohomology(K, field)
    table = {}
    for U, dims in per_u:
        for q, d in dims.items():
            if d:
                table[(U.bit_count() - q - 1, U)] = d
    results, rows = _betti_payload(BettiTable(K.m, table))
    figures = []
    if args.figures:
        from .plots import betti_heatmap

        triples = [(i, U.bit_count(), b) for (i, U), b in table.items()]
        figures.append(betti_heatmap(triples, args.figures))
    return results, rows, 0, figures


def cmd_resolution(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    model = assemble(StrandCache(K, field))
    results = resolution_to_json(model)
    rows = [("generator", "degree", "multidegree"), ]
    for p, (i, U, idx) in enumerate(model.generators):
        rows.append((p, i, ",".join(map(str, verts_of(U))) or "-"))
    rows.append(("term:source", "target", "coefficient", "monomial"))
    for src, tgt, coeff, W in model.iter_terms():
        rows.append((src, tgt, field.encode(coeff), ",".join(map(str, verts_of(W)))))
    return results, rows, 0, []


def cmd_ops(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    cache = StrandCache(K, field)
    strands = []
    rows = [("multidegree", "subset", "degree", "row", "col", "value")]
    for U in range(1 << K.m):
        if not cache.homology(U).dims:
            continue
        table = cache.table(U)
        blocks = []
        for (I, n), mat in sorted(table.theta.items()):
            if args.max_size is not None and I.bit_count() > args.max_size:
                continue
            entries = [[r, c, field.encode(v)] for r, c, v in mat.entries]
            blocks.append({"subset": verts_of(I), "degree": n, "entries": entries})
            for r, c, v in mat.entries:
                rows.append(
                    (
                        ",".join(map(str, verts_of(U))) or "-",
                        ",".join(map(str, verts_of(I))),
                        n,
                        r,
                        c,
                        field.encode(v),
                    )
                )
        if blocks:
            strands.append({"multidegree": verts_of(U), "operations": blocks})
    return {"m": K.m, "strands": strands}, rows, 0, []


def cmd_hochster(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    per_u = _parallel_cohomology(K, field)
    subs = []
    rows = [("multidegree", "cochain degree", "dim")]
    for U, dims in per_u:
        nonzero = {str(q): d for q, d in sorted(dims.items()) if d}
        if nonzero:
            subs.append({"multidegree": verts_of(U), "cohomology": nonzero})
            for q, d in sorted(dims.items()):
                if d:
                    rows.append((",".join(map(str, verts_of(U))) or "-", q, d))
    return {"m": K.m, "subcomplexes": subs}, rows, 0, []


def _verdict_json(v) -> dict:
    return {
        "formal": v.formal,
        "criterion": v.criterion,
        "witness": _jsonable(v.witness),
        "detail": v.detail,
    }


def cmd_ef(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    chosen = [args.coords is not None, args.torus is not None, args.all_coords]
    if sum(chosen) != 1:
        raise CliError("choose exactly one of --coords, --torus, --all-coords")
    model = assemble(StrandCache(K, field))
    figures: List[str] = []
    if args.all_coords:
        lattice = []
        rows = [("I", "formal")]
        for I in sorted(range(1 << K.m), key=lambda i: (i.bit_count(), i)):
            verdict = ef_coordinate(model, I)
            lattice.append({"I": verts_of(I), "formal": verdict.formal})
            rows.append((",".join(map(str, verts_of(I))) or "-", verdict.formal))
        if args.figures:
            from .plots import formality_lattice

            figures.append(
                formality_lattice([(e["I"], e["formal"]) for e in lattice], K.m, args.figures)
            )
        return {"m": K.m, "lattice": lattice}, rows, 0, figures
    if args.torus is not None:
        data = load_json(args.torus)
        try:
            spec = SubtorusSpec.from_json(data, m=K.m)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"bad subtorus rows: {exc}")
        verdict = ef_subtorus(model, spec)
        results = {"rows": [list(r) for r in spec.rows], "verdict": _verdict_json(verdict)}
    else:
        I = parse_coords(args.coords, K.m)
        verdict = ef_coordinate(model, I)
        results = {"I": verts_of(I), "verdict": _verdict_json(verdict)}
    rows = [("formal", "criterion", "detail"), (verdict.formal, verdict.criterion, verdict.detail)]
    return results, rows, 0 if verdict.formal else 2, figures


def cmd_mvss(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    I = parse_coords(args.I, K.m)
    full = (1 << K.m) - 1
    J = parse_coords(args.J, K.m) if args.J is not None else full
    if args.pages is not None and args.pages < 1:
        raise CliError("--pages must be at least 1")
    ac = build(K, I, J, field)
    pg = pages(ac, args.pages)
    cache = StrandCache(K, field)
    chk = check_against_operations(ac, cache, pg)
    tester = DegenerationTester(K, field)
    degen = {"cover": tester.cover_degenerates(I, J)}
    degen["all_multidegrees"] = tester.degenerates(I) if K.m <= 10 else None
    comparisons = []
    for pc in chk.comparisons:
        for dc in pc.degrees:
            comparisons.append(
                {
                    "page": pc.s,
                    "cochain_degree": dc.p,
                    "compared": dc.compared,
                    "reason": dc.reason,
                    "mismatched_summands": [verts_of(W) for W, _o, _e in dc.mismatches],
                }
            )
    results = {
        "I": verts_of(I),
        "J": verts_of(J),
        "pages": pages_to_json(pg),
        "operation_check": {"ok": chk.ok, "comparisons": comparisons},
        "degenerates": degen,
    }
    rows = [("page", "p", "q", "dim")]
    for (r, p, q), d in sorted(pg.dims.items()):
        rows.append((r, p, q, d))
    figures = []
    if args.figures:
        from .plots import page_grid

        figures.append(page_grid(results["pages"], args.figures))
    return results, rows, 0 if chk.ok else 2, figures


def cmd_verify(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    K = load_complex(args.file)
    field = parse_field(args.field)
    model = assemble(StrandCache(K, field))
    report = verify(model, K, box=args.box)
    oracles = [
        hilbert_identity(K, model.betti()),
        strand_homology_report(K, field),
        m2_compare(K, field, model),
    ]
    hoch = hochster_betti(K, field)
    betti_match = dict(model.betti().by_multidegree) == dict(hoch.by_multidegree)
    results = {
        "resolution_checks": [
            {"name": c.name, "ok": c.ok, "details": c.details} for c in report.checks
        ],
        "betti_matches_hochster": betti_match,
        "oracles": [o.to_json() for o in oracles],
    }
    rows = [("check", "status")]
    rows += [(c.name, "ok" if c.ok else "FAIL") for c in report.checks]
    rows.append(("betti_matches_hochster", "ok" if betti_match else "FAIL"))
    rows += [(o.check, o.status) for o in oracles]
    failed = (
        not report.ok
        or not betti_match
        or any(o.status == "fail" for o in oracles)
    )
    return results, rows, 2 if failed else 0, []


def cmd_generic_ops(args) -> Tuple[dict, List[Tuple], int, List[str]]:
    data = load_json(args.file)
    if not isinstance(data, dict) or "field" not in data:
        raise CliError("module file must be a JSON object with a field entry")
    if args.field is not None and parse_field(args.field).name() != data["field"]:
        raise CliError(
            f'--field {args.field} does not match the module field {data["field"]!r}'
        )
    try:
        mod = module_from_json(data)
        validate_module(mod)
    except (KeyError, ValueError, AssertionError) as exc:
        raise CliError(f"bad module file: {exc}")
    ret = module_retraction(mod)
    homology = {str(n): d for n, d in homology_dims(mod, ret).items()}
    gens = sorted(mod.iota)
    multisets = [(g,) for g in gens]
    multisets += [
        (a, b) for ai, a in enumerate(gens) for b in gens[ai:]
    ]
    field = mod.field
    operations = []
    rows = [("multiset", "degree", "row", "col", "value")]
    for ms in multisets:
        by_degree = {}
        for n, mat in sorted(generic_operations(mod, ms, ret).items()):
            entries = [[r, c, field.encode(v)] for r, c, v in mat.entries]
            if entries:
                by_degree[str(n)] = entries
                for r, c, v in mat.entries:
                    rows.append((",".join(ms), n, r, c, field.encode(v)))
        operations.append({"multiset": list(ms), "by_degree": by_degree})
    results = {"field": field.name(), "homology": homology, "operations": operations}
    return results, rows, 0, []


# -- argument surface -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srres", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"srres {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, figures=False):
        p.add_argument("file", help="complex JSON file")
        p.add_argument("--field", default="q", help="coefficients: q or f<p> (default q)")
        p.add_argument("--format", choices=("json", "text"), default="json")
        if figures:
            p.add_argument("--figures", metavar="DIR", help="also render figures into DIR")

    p = sub.add_parser("betti", help="multigraded Betti numbers via full-subcomplex cohomology")
    common(p, figures=True)
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("resolution", help="assembled minimal free resolution")
    common(p)
    p.set_defaults(func=cmd_resolution)

    p = sub.add_parser("ops", help="subset operations on every strand")
    common(p)
    p.add_argument("--max-size", type=int, default=None, help="largest subset size to list")
    p.set_defaults(func=cmd_ops)

    p = sub.add_parser("ef", help="equivariant formality verdicts")
    common(p, figures=True)
    p.add_argument("--coords", help="comma-separated vertices of I (empty for I = {})")
    p.add_argument("--torus", help="JSON file with integer rows spanning the subtorus")
    p.add_argument("--all-coords", action="store_true", help="decide every coordinate subset")
    p.set_defaults(func=cmd_ef)

    p = sub.add_parser("hochster", help="reduced cohomology of every full subcomplex")
    common(p)
    p.set_defaults(func=cmd_hochster)

    p = sub.add_parser("mvss", help="cover spectral sequence pages and operation comparison")
    common(p, figures=True)
    p.add_argument("--I", required=True, help="comma-separated vertices of the deleted set")
    p.add_argument("--J", default=None, help="comma-separated vertices of the multidegree (default all)")
    p.add_argument("--pages", type=int, default=None, help="compute pages up to this index")
    p.set_defaults(func=cmd_mvss)

    p = sub.add_parser("verify", help="resolution checks plus independent oracles")
    common(p)
    p.add_argument("--box", type=int, default=2, help="multidegree sampling box bound")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generic-ops", help="operations of a packaged dg module file")
    p.add_argument("file", help="dg module JSON file")
    p.add_argument("--field", default=None, help="must match the module's own field if given")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_generic_ops)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        results, rows, code, figures = args.func(args)
    except CliError as exc:
        print(f"srres: error: {exc}", file=sys.stderr)
        return 1
    report = make_report(argv, getattr(args, "field", None), results)
    if figures:
        report["figures"] = figures
    emit(report, args.format, rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
