"""Minimal multigraded free resolutions of face rings, assembled from strands.

The free module with one generator per strand homology class carries a
differential whose coefficient of the squarefree monomial v_W is the subset
operation theta_W computed in `transfer`.  This module materializes that
differential as an explicit `ResolutionModel`, derives Betti tables from it,
verifies the resolution degree by degree against the face ring, and forms the
quotient complexes obtained by restricting the coefficient ring to a subset of
the polynomial variables (the algebraic model for a coordinate subtorus).

Conventions: a generator is a triple (homological degree, multidegree mask,
index within the strand homology basis).  Differential terms are stored per
source generator as (target position, coefficient, monomial mask); monomial
masks are always nonempty and disjoint decompositions of source minus target
multidegree, so minimality and multigrading are visible structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .exactla import FieldSpec, SparseMatrix, rank
from .simplicial import SimplicialComplex, subsets_of, verts_of
from .transfer import StrandCache

# A differential term: (position of target generator, coefficient, monomial mask).
Term = Tuple[int, object, int]


# -- Betti tables ---------------------------------------------------------------


@dataclass(frozen=True)
class BettiTable:
    """Multigraded Betti numbers beta[(i, U)] with coarser aggregate views."""

    m: int
    by_multidegree: Dict[Tuple[int, int], int]

    def beta(self, i: int, U: int) -> int:
        return self.by_multidegree.get((i, U), 0)

    def by_total_degree(self) -> Dict[Tuple[int, int], int]:
        """Aggregate beta_{i,j} over multidegrees of total degree j."""
        out: Dict[Tuple[int, int], int] = {}
        for (i, U), b in self.by_multidegree.items():
            key = (i, U.bit_count())
            out[key] = out.get(key, 0) + b
        return out

    def totals(self) -> Tuple[int, ...]:
        """Total rank at each homological degree, degree 0 upward."""
        if not self.by_multidegree:
            return ()
        top = max(i for i, _ in self.by_multidegree)
        sums = [0] * (top + 1)
        for (i, _), b in self.by_multidegree.items():
            sums[i] += b
        return tuple(sums)

    def projective_dimension(self) -> int:
        return len(self.totals()) - 1

    def moment_angle_poincare(self) -> Dict[int, int]:
        """Cohomology dimensions of the associated moment-angle complex.

        A class counted by beta[(i, U)] sits in cohomological degree
        2|U| - i; summing gives the dimension of each graded piece.
        """
        out: Dict[int, int] = {}
        for (i, U), b in self.by_multidegree.items():
            n = 2 * U.bit_count() - i
            out[n] = out.get(n, 0) + b
        return {n: d for n, d in sorted(out.items()) if d}


def hochster_betti(K: SimplicialComplex, field: FieldSpec) -> BettiTable:
    """Betti table computed purely from full-subcomplex cohomology.

    beta[(i, U)] equals the dimension of reduced cohomology of K_U in degree
    |U| - i - 1; no strand or resolution machinery is involved, so this is an
    independent cross-check for `ResolutionModel.betti`.
    """
    from .simplicial import reduced_cohomology

    table: Dict[Tuple[int, int], int] = {}
    for U in range(1 << K.m):
        coh = reduced_cohomology(K.full_subcomplex(U), field)
        for q, d in coh.dims.items():
            if d:
                table[(U.bit_count() - q - 1, U)] = d
    return BettiTable(K.m, table)


# -- the resolution model --------------------------------------------------------


@dataclass
class ResolutionModel:
    """The assembled free resolution: generators plus differential terms.

    generators[p] = (homological degree, multidegree mask, index in strand
    homology); terms[p] lists the differential of generator p.  The model is
    data-only; verification lives in `verify`.
    """

    m: int
    field: FieldSpec
    generators: Tuple[Tuple[int, int, int], ...]
    terms: Tuple[Tuple[Term, ...], ...]

    def position(self, gen: Tuple[int, int, int]) -> int:
        return self.generators.index(gen)

    def degrees(self) -> List[int]:
        return sorted({g[0] for g in self.generators})

    def generators_at(self, i: int) -> List[int]:
        return [p for p, g in enumerate(self.generators) if g[0] == i]

    def iter_terms(self):
        """Yield (source position, target position, coefficient, monomial mask)."""
        for src, lst in enumerate(self.terms):
            for tgt, coeff, W in lst:
                yield src, tgt, coeff, W

    def betti(self) -> BettiTable:
        table: Dict[Tuple[int, int], int] = {}
        for i, U, _ in self.generators:
            table[(i, U)] = table.get((i, U), 0) + 1
        return BettiTable(self.m, table)

    def monomial_support(self) -> List[int]:
        """Sorted list of distinct monomial masks appearing in the differential."""
        return sorted({W for _, _, _, W in self.iter_terms()})


def assemble(cache: StrandCache) -> ResolutionModel:
    """Build the resolution model from the operation tables of every strand."""
    m = cache.K.m
    order = sorted(range(1 << m), key=lambda u: (u.bit_count(), u))
    gens: List[Tuple[int, int, int]] = []
    for U in order:
        hom = cache.homology(U)
        for n in sorted(hom.dims):
            for idx in range(hom.dims[n]):
                gens.append((n, U, idx))
    gens.sort(key=lambda g: (g[0], g[1].bit_count(), g[1], g[2]))
    pos = {g: p for p, g in enumerate(gens)}

    terms: List[List[Term]] = [[] for _ in gens]
    for U in order:
        if not cache.homology(U).dims:
            continue
        table = cache.table(U)
        for (I, n), mat in table.theta.items():
            for r, c, coeff in mat.entries:
                src = pos[(n, U, c)]
                tgt = pos[(n - 1, U & ~I, r)]
                terms[src].append((tgt, coeff, I))
    for lst in terms:
        lst.sort(key=lambda t: (t[2].bit_count(), t[2], t[0]))
    return ResolutionModel(m, cache.field, tuple(gens), tuple(tuple(t) for t in terms))


def resolution_to_json(model: ResolutionModel) -> dict:
    """JSON-friendly dict: generators and differential terms, 1-indexed vertices."""
    return {
        "m": model.m,
        "field": model.field.name(),
        "generators": [
            {"degree": i, "multidegree": list(verts_of(U)), "index": idx}
            for i, U, idx in model.generators
        ],
        "terms": [
            [
                {
                    "target": tgt,
                    "coefficient": model.field.encode(coeff),
                    "monomial": list(verts_of(W)),
                }
                for tgt, coeff, W in lst
            ]
            for lst in model.terms
        ],
    }


# -- verification ----------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    details: str = ""


@dataclass(frozen=True)
class VerifyReport:
    checks: Tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def multidegree_samples(m: int, box: int = 2, cap: int = 5000) -> List[Tuple[int, ...]]:
    """Deterministic sample of multidegrees: the 0/1 box, then box*e_i shifts.

    Generation stops as soon as `cap` multidegrees have been produced, so the
    sample stays affordable for large vertex counts.
    """
    out: List[Tuple[int, ...]] = []
    seen = set()

    def cube():
        for mask in range(1 << m):
            yield tuple((mask >> j) & 1 for j in range(m))

    def push(a: Tuple[int, ...]) -> bool:
        if a not in seen:
            seen.add(a)
            out.append(a)
        return len(out) >= cap

    for a in cube():
        if push(a):
            return out
    for i in range(m):
        for a in cube():
            shifted = list(a)
            shifted[i] += box
            if push(tuple(shifted)):
                return out
    return out


def _graded_piece(
    generators: Sequence[Tuple[int, int, int]],
    terms: Sequence[Sequence[Term]],
    eligible: Sequence[bool],
    field: FieldSpec,
):
    """Slots per homological degree and differential matrices of one graded piece.

    Returns (slots, mats) where slots[i] lists generator positions present in
    this multidegree and mats[i] is the block of the differential from degree i
    to degree i-1 on those slots.
    """
    slots: Dict[int, List[int]] = {}
    for p, g in enumerate(generators):
        if eligible[p]:
            slots.setdefault(g[0], []).append(p)
    col_of = {p: j for lst in slots.values() for j, p in enumerate(lst)}
    mats: Dict[int, SparseMatrix] = {}
    for i, cols in slots.items():
        rows = slots.get(i - 1, [])
        trips = []
        for j, p in enumerate(cols):
            for tgt, coeff, _ in terms[p]:
                if eligible[tgt]:
                    trips.append((col_of[tgt], j, coeff))
        mats[i] = SparseMatrix.build(len(rows), len(cols), trips, field)
    return slots, mats


def _homology_dims_of_piece(slots, mats, field) -> Dict[int, int]:
    ranks = {i: rank(mat, field) for i, mat in mats.items()}
    dims: Dict[int, int] = {}
    for i, lst in slots.items():
        # may go negative when the input is not actually a complex; callers
        # compare against expected dims, so any nonzero defect is surfaced
        h = len(lst) - ranks.get(i, 0) - ranks.get(i + 1, 0)
        if h:
            dims[i] = h
    return dims


def _squarefree_eligible(model: ResolutionModel, a: Tuple[int, ...]) -> List[bool]:
    return [
        all(a[v - 1] >= 1 for v in verts_of(U)) for _, U, _ in model.generators
    ]


def verify(
    model: ResolutionModel,
    K: SimplicialComplex,
    box: int = 2,
    cap: int = 5000,
) -> VerifyReport:
    """Run the four resolution checks and report each with a witness on failure.

    1. the differential is well-formed and squares to zero symbolically;
    2. minimality: every term has a nonzero coefficient and nonempty monomial;
    3. strand exactness: each sampled multidegree piece has homology equal to
       the face ring's graded piece in degree 0 and nothing elsewhere;
    4. the alternating sum of Betti multidegrees equals the face-set expansion
       of the multigraded Hilbert series numerator, exactly.
    """
    field = model.field
    checks: List[CheckResult] = []

    # (1) well-formedness + d^2 = 0.
    bad = ""
    for src, tgt, coeff, W in model.iter_terms():
        si, sU, _ = model.generators[src]
        ti, tU, _ = model.generators[tgt]
        if W == 0 or (tU | W) != sU or (tU & W) or ti != si - 1:
            bad = f"malformed term {src}->{tgt} monomial {verts_of(W)}"
            break
    if not bad:
        for src in range(len(model.generators)):
            square: Dict[Tuple[int, int], object] = {}
            for mid, c1, W1 in model.terms[src]:
                for tgt, c2, W2 in model.terms[mid]:
                    assert W1 & W2 == 0
                    key = (tgt, W1 | W2)
                    square[key] = field.add(square.get(key, field.zero()), field.mul(c2, c1))
            nonzero = [k for k, v in square.items() if v != field.zero()]
            if nonzero:
                tgt, W = nonzero[0]
                bad = (
                    f"d^2 != 0: generator {src} hits {tgt} "
                    f"with monomial {verts_of(W)}"
                )
                break
    checks.append(CheckResult("square_zero", not bad, bad))

    # (2) minimality.
    bad = ""
    for src, tgt, coeff, W in model.iter_terms():
        if coeff == field.zero():
            bad = f"zero coefficient on term {src}->{tgt}"
            break
        if W == 0:
            bad = f"constant (unit) entry on term {src}->{tgt}"
            break
    checks.append(CheckResult("minimality", not bad, bad))

    # (3) strand exactness over the sampled multidegree box.
    bad = ""
    for a in multidegree_samples(model.m, box, cap):
        eligible = _squarefree_eligible(model, a)
        slots, mats = _graded_piece(model.generators, model.terms, eligible, field)
        dims = _homology_dims_of_piece(slots, mats, field)
        support = [j + 1 for j, aj in enumerate(a) if aj > 0]
        expected = {0: 1} if K.has_face(support) else {}
        if dims != expected:
            bad = f"multidegree {a}: homology {dims}, expected {expected}"
            break
    checks.append(CheckResult("strand_exactness", not bad, bad))

    # (4) multigraded Hilbert identity.
    lhs = hilbert_numerator_from_betti(model.betti())
    rhs = hilbert_numerator_from_faces(K)
    ok = lhs == rhs
    bad = ""
    if not ok:
        diff = sorted(set(lhs) ^ set(rhs) | {k for k in lhs if lhs[k] != rhs.get(k)})
        bad = f"first differing monomial mask {diff[0]} ({verts_of(diff[0])})"
    checks.append(CheckResult("hilbert_identity", ok, bad))

    return VerifyReport(tuple(checks))


def hilbert_numerator_from_betti(betti: BettiTable) -> Dict[int, int]:
    """Alternating sum over the Betti table, as a squarefree polynomial in t."""
    out: Dict[int, int] = {}
    for (i, U), b in betti.by_multidegree.items():
        out[U] = out.get(U, 0) + (-b if i % 2 else b)
    return {U: c for U, c in out.items() if c}


def hilbert_numerator_from_faces(K: SimplicialComplex) -> Dict[int, int]:
    """The same numerator expanded from the face set: sum over faces sigma of
    (prod_{i in sigma} t_i) * (prod_{i not in sigma} (1 - t_i))."""
    full = (1 << K.m) - 1
    out: Dict[int, int] = {}
    for sigma in K.faces:
        for T in subsets_of(full & ~sigma):
            key = sigma | T
            sign = -1 if T.bit_count() % 2 else 1
            out[key] = out.get(key, 0) + sign
    return {U: c for U, c in out.items() if c}


# -- coordinate quotients ---------------------------------------------------------


@dataclass
class QuotientComplex:
    """The resolution with coefficients cut down to variables in `coords`.

    Differential terms whose monomial leaves `coords` are dropped; the result
    computes the equivariant cohomology of the corresponding coordinate
    subtorus action.  Zero differential is equivalent to the homology being
    free, which is the formality criterion this quotient exists to test.
    """

    model: ResolutionModel
    coords: int
    terms: Tuple[Tuple[Term, ...], ...]

    @property
    def is_zero_differential(self) -> bool:
        return all(not lst for lst in self.terms)

    def surviving_monomials(self) -> List[int]:
        return sorted({W for lst in self.terms for _, _, W in lst})


def quotient_by_coordinates(model: ResolutionModel, I: Iterable[int] | int) -> QuotientComplex:
    coords = I if isinstance(I, int) else sum(1 << (v - 1) for v in set(I))
    assert coords < (1 << model.m)
    kept = tuple(
        tuple(t for t in lst if t[2] & ~coords == 0) for lst in model.terms
    )
    return QuotientComplex(model, coords, kept)


def _quotient_eligible(q: QuotientComplex, a: Tuple[int, ...]) -> List[bool]:
    """A generator appears in multidegree a when a - U is a valid exponent of
    the quotient coefficient ring: nonnegative and supported in coords."""
    out = []
    for _, U, _ in q.model.generators:
        ok = True
        for j, aj in enumerate(a):
            extra = aj - ((U >> j) & 1)
            if extra < 0 or (extra > 0 and not (q.coords >> j) & 1):
                ok = False
                break
        out.append(ok)
    return out


def quotient_homology_dims(
    q: QuotientComplex, bound: int
) -> Dict[Tuple[int, Tuple[int, ...]], int]:
    """Homology of the quotient complex, keyed by (cohomological degree, a).

    Scans every multidegree a with entries at most `bound`.  A homology class
    at homological degree i and multidegree a has cohomological degree
    2|a| - i, matching the grading of the Borel-construction model.
    """
    model = q.model
    out: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    for a in _box(model.m, bound):
        eligible = _quotient_eligible(q, a)
        if not any(eligible):
            continue
        slots, mats = _graded_piece(model.generators, q.terms, eligible, model.field)
        for i, h in _homology_dims_of_piece(slots, mats, model.field).items():
            out[(2 * sum(a) - i, a)] = h
    return out


def quotient_free_dims(
    q: QuotientComplex, bound: int
) -> Dict[Tuple[int, Tuple[int, ...]], int]:
    """Dimensions the homology would have if the quotient differential were
    zero (a free module on the generators); the comparison target for
    torsion-detection."""
    model = q.model
    out: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    for a in _box(model.m, bound):
        for p, ok in enumerate(_quotient_eligible(q, a)):
            if ok:
                i = model.generators[p][0]
                key = (2 * sum(a) - i, a)
                out[key] = out.get(key, 0) + 1
    return out


def _box(m: int, bound: int) -> List[Tuple[int, ...]]:
    out = [()]
    for _ in range(m):
        out = [a + (x,) for a in out for x in range(bound + 1)]
    return out
