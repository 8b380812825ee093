"""Independent brute-force verifiers for the resolution pipeline.

Every check here recomputes its answer from first principles with its own
naive dense elimination and its own sign conventions, sharing no linear
algebra with the rest of the package; agreement between the two routes is
then meaningful evidence rather than a tautology.  The optional external
computer-algebra comparison shells out to a Macaulay2-compatible binary and
parses a pinned plain-text format.

Checks return an `OracleReport` whether they pass or not, so runs are
auditable; the external comparison reports "skipped" (never a failure) when
the binary is absent or misbehaves.
"""

import hashlib
import json
import os
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .exactla import FieldSpec
from .resolution import ResolutionModel, assemble
from .simplicial import SimplicialComplex, subsets_of, verts_of
from .transfer import StrandCache

M2_ENV = "SRRES_M2_BIN"


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one independent check: pass, fail, or skipped."""

    check: str
    digest: str
    status: str  # "pass" | "fail" | "skipped"
    details: Tuple[str, ...] = ()

    def __post_init__(self):
        assert self.status in ("pass", "fail", "skipped")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def skipped(self) -> bool:
        return self.status == "skipped"

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "digest": self.digest,
            "status": self.status,
            "details": list(self.details),
        }


def inputs_digest(**inputs) -> str:
    """Stable digest of a check's inputs, for audit trails."""
    blob = json.dumps(inputs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _complex_inputs(K: SimplicialComplex) -> dict:
    return {"m": K.m, "faces": sorted(K.faces)}


# -- naive dense elimination (deliberately separate from exactla) -------------------


def dense_rank(rows: List[List], field: FieldSpec) -> int:
    """Rank by plain Gaussian elimination on dense row lists."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    rk = 0
    for col in range(ncols):
        piv = next((i for i in range(rk, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        inv = field.inv(rows[rk][col])
        rows[rk] = [field.mul(inv, x) for x in rows[rk]]
        for i in range(len(rows)):
            if i != rk and rows[i][col]:
                c = rows[i][col]
                rows[i] = [
                    field.sub(x, field.mul(c, y)) for x, y in zip(rows[i], rows[rk])
                ]
        rk += 1
    return rk


# -- strand homology from scratch ----------------------------------------------------


def strand_homology_direct(K: SimplicialComplex, U: int, field: FieldSpec) -> Dict[int, int]:
    """Homology of the squarefree strand at U of the Koszul complex of k[K].

    The strand basis at exterior degree n consists of the pairs (I, J) with
    I disjoint from J, I | J = U, |I| = n and J a face; the differential
    moves one exterior vertex into the face part when the result is again a
    face become zero otherwise.  Everything here is rebuilt directly from
    that description: dense matrices, naive elimination, no shared code with
    the strand cache.
    """
    assert U == U & ((1 << K.m) - 1)
    basis: Dict[int, List[Tuple[int, int]]] = {}
    for J in subsets_of(U):
        if J in K.faces:
            I = U & ~J
            basis.setdefault(I.bit_count(), []).append((I, J))
    for lst in basis.values():
        lst.sort()

    mats: Dict[int, List[List]] = {}  # n -> matrix of d_n : C_n -> C_{n-1}, rows = targets
    for n, cols in basis.items():
        tgt = basis.get(n - 1, [])
        if not tgt:
            continue
        index = {pair: i for i, pair in enumerate(tgt)}
        mat = [[field.zero()] * len(cols) for _ in tgt]
        for c, (I, J) in enumerate(cols):
            pos = 0
            for i in sorted(verts_of(I)):
                bit = 1 << (i - 1)
                if (J | bit) in K.faces:
                    r = index[(I & ~bit, J | bit)]
                    sign = field.one() if pos % 2 == 0 else field.neg(field.one())
                    mat[r][c] = sign
                pos += 1
        mats[n] = mat

    for n, mat in mats.items():
        up = mats.get(n + 1)
        if not up or not mat:
            continue
        for col in range(len(up[0])):
            for r in range(len(mat)):
                acc = field.zero()
                for k in range(len(up)):
                    acc = field.add(acc, field.mul(mat[r][k], up[k][col]))
                assert not acc, "strand differential must square to zero"

    ranks = {n: dense_rank(mat, field) for n, mat in mats.items()}
    dims: Dict[int, int] = {}
    for n, cols in basis.items():
        h = len(cols) - ranks.get(n, 0) - ranks.get(n + 1, 0)
        assert h >= 0
        if h:
            dims[n] = h
    return dims


def strand_homology_report(K: SimplicialComplex, field: FieldSpec) -> OracleReport:
    """Compare the direct strand homology with the pipeline on every multidegree."""
    cache = StrandCache(K, field)
    digest = inputs_digest(check="strand_homology", field=field.name(), **_complex_inputs(K))
    bad = []
    for U in range(1 << K.m):
        direct = strand_homology_direct(K, U, field)
        pipeline = {n: d for n, d in cache.homology(U).dims.items() if d}
        if direct != pipeline:
            bad.append(f"U={U}: direct {direct} != pipeline {pipeline}")
    status = "pass" if not bad else "fail"
    return OracleReport("strand_homology", digest, status, tuple(bad))


# -- Hilbert series identity ---------------------------------------------------------


def hilbert_numerator_direct(K: SimplicialComplex) -> Dict[int, int]:
    """Numerator of the Hilbert series of k[K] over the full polynomial ring.

    Clearing denominators in the face-wise sum of the Hilbert series gives,
    for each face, the product of its variables times (1 - t_j) over the
    complementary vertices; expanding keeps every exponent squarefree, so
    the numerator is a plain mask-indexed integer polynomial.  No resolution
    data is touched.
    """
    full = (1 << K.m) - 1
    out: Dict[int, int] = {}
    for sigma in K.faces:
        for S in subsets_of(full & ~sigma):
            U = sigma | S
            c = out.get(U, 0) + (-1) ** S.bit_count()
            if c:
                out[U] = c
            else:
                out.pop(U, None)
    return out


def hilbert_identity(K: SimplicialComplex, betti) -> OracleReport:
    """Check the alternating Betti sum against the face-counting numerator."""
    from_betti: Dict[int, int] = {}
    for (i, U), b in betti.by_multidegree.items():
        c = from_betti.get(U, 0) + (-1) ** i * b
        if c:
            from_betti[U] = c
        else:
            from_betti.pop(U, None)
    direct = hilbert_numerator_direct(K)
    digest = inputs_digest(check="hilbert_identity", **_complex_inputs(K))
    if direct == from_betti:
        return OracleReport("hilbert_identity", digest, "pass")
    bad = [
        f"t^{U}: faces give {direct.get(U, 0)}, resolution gives {from_betti.get(U, 0)}"
        for U in sorted(set(direct) | set(from_betti))
        if direct.get(U, 0) != from_betti.get(U, 0)
    ]
    return OracleReport("hilbert_identity", digest, "fail", tuple(bad))


# -- external computer-algebra comparison --------------------------------------------

# Pinned exchange format (also what the test stub emits):
#   SRRES-M2 BEGIN
#   GEN <i> <e_1> ... <e_m>      one line per resolution generator, 0/1 exponents
#   LAST <i> VARS v<a> v<b> ...  variables in the final differential (may be none)
#   SRRES-M2 END


def m2_script(K: SimplicialComplex, field: FieldSpec) -> str:
    """Macaulay2 source that prints the pinned exchange format for K."""
    coeff = "QQ" if field.p is None else f"ZZ/{field.p}"
    gens = []
    for nf in minimal_nonfaces(K):
        gens.append("*".join(f"v_{i}" for i in verts_of(nf)))
    ideal = "monomialIdeal(" + ",".join(gens) + ")" if gens else "monomialIdeal(0_R)"
    return "\n".join(
        [
            f"R = {coeff}[v_1..v_{K.m}, Degrees => entries id_(ZZ^{K.m})];",
            f"I = {ideal};",
            "C = res (R^1/I);",
            'print "SRRES-M2 BEGIN";',
            "for i from 0 to length C do (",
            "  for d in degrees C_i do (",
            '    print concatenate("GEN ", toString i, " ",',
            '      demark(" ", apply(d, e -> toString e)));',
            "  );",
            ");",
            "top = length C;",
            "vars0 = if top == 0 then {} else "
            "unique flatten apply(flatten entries C.dd_top, support);",
            'print concatenate("LAST ", toString top, " VARS ",',
            '  demark(" ", apply(vars0, v -> toString v)));',
            'print "SRRES-M2 END";',
        ]
    )


def minimal_nonfaces(K: SimplicialComplex) -> List[int]:
    """Masks of the minimal non-faces, sorted."""
    full = (1 << K.m) - 1
    out = []
    for S in range(1, full + 1):
        if S in K.faces:
            continue
        vs = verts_of(S)
        if all((S & ~(1 << (v - 1))) in K.faces for v in vs):
            out.append(S)
    return sorted(out)


def parse_m2_output(text: str, m: int) -> Tuple[Dict[Tuple[int, int], int], List[int]]:
    """Parse the pinned exchange format into a Betti table and last-diff vars."""
    betti: Dict[Tuple[int, int], int] = {}
    last_vars: List[int] = []
    in_block = False
    seen_block = False
    for line in text.splitlines():
        line = line.strip()
        if line == "SRRES-M2 BEGIN":
            in_block, seen_block = True, True
            continue
        if line == "SRRES-M2 END":
            in_block = False
            continue
        if not in_block:
            continue
        parts = line.split()
        if parts[:1] == ["GEN"]:
            i = int(parts[1])
            exps = [int(e) for e in parts[2:]]
            if len(exps) != m or any(e not in (0, 1) for e in exps):
                raise ValueError(f"bad generator line: {line!r}")
            U = sum(1 << k for k, e in enumerate(exps) if e)
            betti[(i, U)] = betti.get((i, U), 0) + 1
        elif parts[:1] == ["LAST"]:
            for tok in parts[3:]:
                if not tok.startswith("v_") and not tok.startswith("v"):
                    raise ValueError(f"bad variable token: {tok!r}")
                last_vars.append(int(tok.lstrip("v_")))
        else:
            raise ValueError(f"unrecognized line: {line!r}")
    if not seen_block:
        raise ValueError("no SRRES-M2 block in output")
    return betti, sorted(set(last_vars))


def _model_last_diff_vars(model: ResolutionModel) -> List[int]:
    degrees = model.degrees()
    if len(degrees) <= 1:
        return []
    top = max(degrees)
    vars_: set = set()
    for p in model.generators_at(top):
        for _tgt, _coeff, W in model.terms[p]:
            vars_.update(verts_of(W))
    return sorted(vars_)


def m2_compare(
    K: SimplicialComplex,
    field: FieldSpec,
    model: Optional[ResolutionModel] = None,
    timeout: float = 120.0,
) -> OracleReport:
    """Compare Betti table and last-differential support with an external CAS.

    The binary named by the SRRES_M2_BIN environment variable is run on a
    generated script; a missing or failing binary yields a skipped report,
    never an error.
    """
    digest = inputs_digest(check="m2_compare", field=field.name(), **_complex_inputs(K))
    binary = os.environ.get(M2_ENV)
    if not binary:
        return OracleReport("m2_compare", digest, "skipped", (f"{M2_ENV} not set",))
    script = m2_script(K, field)
    try:
        with tempfile.NamedTemporaryFile("w", suffix=".m2", delete=False) as fh:
            fh.write(script)
            path = fh.name
        try:
            proc = subprocess.run(
                [binary, "--script", path],
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        finally:
            os.unlink(path)
        if proc.returncode != 0:
            return OracleReport(
                "m2_compare",
                digest,
                "skipped",
                (f"exit {proc.returncode}", proc.stderr.strip()[:500]),
            )
        external_betti, external_vars = parse_m2_output(proc.stdout, K.m)
    except (OSError, subprocess.SubprocessError, ValueError) as exc:
        return OracleReport("m2_compare", digest, "skipped", (repr(exc)[:500],))

    if model is None:
        model = assemble(StrandCache(K, field))
    ours = dict(model.betti().by_multidegree)
    bad = []
    for key in sorted(set(ours) | set(external_betti)):
        if ours.get(key, 0) != external_betti.get(key, 0):
            bad.append(
                f"beta{key}: ours {ours.get(key, 0)}, external {external_betti.get(key, 0)}"
            )
    our_vars = _model_last_diff_vars(model)
    if our_vars != external_vars:
        bad.append(f"last differential vars: ours {our_vars}, external {external_vars}")
    status = "pass" if not bad else "fail"
    return OracleReport("m2_compare", digest, status, tuple(bad))
