"""Subtorus bookkeeping and equivariant-formality deciders.

A subtorus of the m-torus is presented by integer rows, each a one-parameter
subgroup t -> (t^{a_1}, ..., t^{a_m}).  Reduction lemmas turn any such
presentation into a coordinate vertex set (the hull in characteristic zero,
the p-hull in characteristic p), after which formality of the action on the
moment-angle complex is decided by several independent criteria:

* `ef_coordinate` scans the assembled resolution for differential terms whose
  monomial lives inside the chosen coordinates (operation vanishing);
* `ef_combinatorial` tests that every face-deletion inclusion
  K_J minus (I cap J) -> K_J kills reduced cohomology (no resolution data);
* `ef_flag` is the field-free combinatorial criterion available for flag
  complexes;
* `edge_ideal_jclosed` is the graph-theoretic form of the flag criterion for
  independence complexes.

All deciders return an `EfVerdict` carrying a machine-checkable witness on
failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .exactla import FieldSpec, SparseMatrix, kernel_basis
from .resolution import ResolutionModel
from .simplicial import (
    SimplicialComplex,
    induced_map_on_cohomology,
    mask_of,
    reduced_cohomology,
    verts_of,
)


def _as_mask(I: Iterable[int] | int, m: int) -> int:
    mask = I if isinstance(I, int) else mask_of(sorted(set(I)), m)
    if not 0 <= mask < (1 << m):
        raise ValueError(f"coordinate set {I!r} out of range for m={m}")
    return mask


# -- subtorus specifications -------------------------------------------------------


@dataclass(frozen=True)
class SubtorusSpec:
    """A subtorus given by generating one-parameter subgroups (integer rows).

    An empty row list is the explicit trivial torus.
    """

    m: int
    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != self.m:
                raise ValueError(f"row {row} does not have length {self.m}")
            if not all(isinstance(a, int) for a in row):
                raise ValueError(f"row {row} must consist of integers")

    @staticmethod
    def of(m: int, rows: Iterable[Iterable[int]]) -> "SubtorusSpec":
        return SubtorusSpec(m, tuple(tuple(int(a) for a in row) for row in rows))

    @staticmethod
    def trivial(m: int) -> "SubtorusSpec":
        return SubtorusSpec(m, ())

    @staticmethod
    def from_json(data: dict, m: Optional[int] = None) -> "SubtorusSpec":
        rows = data["rows"]
        if m is None:
            if not rows:
                raise ValueError("empty row list needs an explicit vertex count")
            m = len(rows[0])
        return SubtorusSpec.of(m, rows)


def integer_kernel(rows: Sequence[Sequence[int]], m: int) -> List[Tuple[int, ...]]:
    """A basis of the lattice {x : sum_i row_i * x_i = 0 for every row}.

    Computed by unimodular row reduction of the transposed system augmented
    with an identity block.  Kernels of integer matrices are saturated, so two
    applications of this function saturate a row lattice.
    """
    k = len(rows)
    work = []
    for i in range(m):
        lead = [int(row[i]) for row in rows]
        tail = [0] * m
        tail[i] = 1
        work.append(lead + tail)
    top = 0
    for c in range(k):
        while top < m:
            nz = [r for r in range(top, m) if work[r][c]]
            if not nz:
                break
            r0 = min(nz, key=lambda r: (abs(work[r][c]), r))
            work[top], work[r0] = work[r0], work[top]
            clean = True
            for r in range(top + 1, m):
                if work[r][c]:
                    q = work[r][c] // work[top][c]
                    work[r] = [a - q * b for a, b in zip(work[r], work[top])]
                    if work[r][c]:
                        clean = False
            if clean:
                top += 1
                break
    return [tuple(w[k:]) for w in work[top:]]


def saturated_rows(spec: SubtorusSpec) -> List[Tuple[int, ...]]:
    """A basis of all one-parameter subgroups of the generated subtorus.

    The given rows may generate a finite-index sublattice only (e.g. (2, 4)
    generates the same subtorus as (1, 2)); the double integer-kernel
    saturates the lattice so that hull computations quantify over the whole
    subtorus rather than the presentation.
    """
    orthogonal = integer_kernel(spec.rows, spec.m)
    return integer_kernel(orthogonal, spec.m)


def hull(spec: SubtorusSpec) -> int:
    """Vertex mask of the smallest coordinate subtorus containing the subtorus."""
    mask = 0
    for row in spec.rows:
        for i, a in enumerate(row):
            if a:
                mask |= 1 << i
    return mask


def p_hull(spec: SubtorusSpec, p: int) -> int:
    """Vertex mask of the mod-p coordinate hull.

    Coordinate i belongs to the hull when some one-parameter subgroup of the
    subtorus has i-th exponent not divisible by p; the saturation step makes
    this quantify over the subtorus itself.
    """
    FieldSpec(p)  # validates that p is prime
    mask = 0
    for row in saturated_rows(spec):
        for i, a in enumerate(row):
            if a % p:
                mask |= 1 << i
    return mask


def j_ideal_generators(spec: SubtorusSpec, field: FieldSpec) -> List[dict]:
    """Deterministic basis of the linear forms cutting out the subtorus.

    These are the degree-two generators of the ideal whose quotient computes
    the equivariant cohomology of the subtorus action.  The row lattice is
    saturated first so the answer depends on the subtorus, not on the chosen
    generating rows; each basis vector is a dense coefficient tuple.
    """
    rows = saturated_rows(spec)
    trips = [
        (r, c, field.of(a))
        for r, row in enumerate(rows)
        for c, a in enumerate(row)
        if field.of(a) != field.zero()
    ]
    A = SparseMatrix.build(len(rows), spec.m, trips, field)
    return kernel_basis(A, field)


# -- formality verdicts ------------------------------------------------------------


@dataclass(frozen=True)
class EfVerdict:
    """Outcome of one formality decider, with a witness on failure."""

    formal: bool
    criterion: str
    witness: Optional[tuple]
    detail: str

    def __post_init__(self) -> None:
        assert (self.witness is None) == self.formal


def ef_coordinate(model: ResolutionModel, I: Iterable[int] | int) -> EfVerdict:
    """Formality of the coordinate subtorus on vertex set I, from the resolution.

    Formal exactly when no differential term has monomial support inside I;
    the witness is the first offending (monomial mask, source generator) in
    lexicographic (size, mask, generator) order.
    """
    coords = _as_mask(I, model.m)
    hits = [
        (W, src)
        for src, tgt, coeff, W in model.iter_terms()
        if W & ~coords == 0
    ]
    if not hits:
        return EfVerdict(
            True,
            "coordinate",
            None,
            f"no differential term has monomial inside {verts_of(coords)}",
        )
    hits.sort(key=lambda t: (t[0].bit_count(), t[0], t[1]))
    W, src = hits[0]
    gen = model.generators[src]
    return EfVerdict(
        False,
        "coordinate",
        (W, src),
        f"monomial {verts_of(W)} appears on generator {gen}",
    )


class FaceDeletionTester:
    """Memoized face-deletion maps for one complex and field.

    Answers, for any pair (J, A) with A inside J, whether the inclusion of the
    face deletion (K_J minus A) into K_J kills all reduced cohomology; formality
    of the coordinate set I is the conjunction over all J with A = I cap J.
    """

    def __init__(self, K: SimplicialComplex, field: FieldSpec):
        self.K = K
        self.field = field
        self._coh: Dict[int, object] = {}
        self._bad: Dict[Tuple[int, int], Optional[int]] = {}

    def subcomplex_cohomology(self, J: int):
        if J not in self._coh:
            self._coh[J] = reduced_cohomology(self.K.full_subcomplex(J), self.field)
        return self._coh[J]

    def nonzero_degree(self, J: int, A: int) -> Optional[int]:
        """First degree where restriction to the face deletion is nonzero."""
        assert A & ~J == 0
        key = (J, A)
        if key not in self._bad:
            if A == 0:
                self._bad[key] = None  # deleting the empty face leaves the void complex
            else:
                HK = self.subcomplex_cohomology(J)
                if HK.total_dim() == 0:
                    self._bad[key] = None
                else:
                    KJ = self.K.full_subcomplex(J)
                    fmap = induced_map_on_cohomology(
                        KJ.face_deletion(A), KJ, self.field, HK=HK
                    )
                    nz = fmap.nonzero_degrees()
                    self._bad[key] = nz[0] if nz else None
        return self._bad[key]

    def verdict(self, I: Iterable[int] | int) -> EfVerdict:
        coords = _as_mask(I, self.K.m)
        for J in sorted(range(1 << self.K.m), key=lambda j: (j.bit_count(), j)):
            bad = self.nonzero_degree(J, coords & J)
            if bad is not None:
                return EfVerdict(
                    False,
                    "combinatorial",
                    (J, bad),
                    f"restriction from {verts_of(J)} to its deletion of "
                    f"{verts_of(coords & J)} is nonzero in degree {bad}",
                )
        return EfVerdict(
            True,
            "combinatorial",
            None,
            f"all {1 << self.K.m} face-deletion restrictions vanish",
        )


def ef_combinatorial(
    K: SimplicialComplex,
    I: Iterable[int] | int,
    field: FieldSpec,
    tester: Optional[FaceDeletionTester] = None,
) -> EfVerdict:
    if tester is None:
        tester = FaceDeletionTester(K, field)
    assert tester.K is K and tester.field == field
    return tester.verdict(I)


def ef_flag(K: SimplicialComplex, I: Iterable[int] | int) -> EfVerdict:
    """Field-independent formality criterion for flag complexes.

    Formal exactly when I is a face and, for every missing edge {i, j} and
    every v in I outside it, both {i, v} and {j, v} are edges.
    """
    if not K.is_flag():
        raise ValueError("flag criterion requires a flag complex")
    coords = _as_mask(I, K.m)
    if coords not in K.faces:
        return EfVerdict(
            False, "flag", ("nonface", coords), f"{verts_of(coords)} is not a face"
        )
    for edge in K.missing_edges():
        i, j = verts_of(edge)
        for v in verts_of(coords & ~edge):
            if not (K.has_face([i, v]) and K.has_face([j, v])):
                return EfVerdict(
                    False,
                    "flag",
                    (edge, v),
                    f"missing edge {{{i},{j}}} with {v} not joined to both ends",
                )
    return EfVerdict(True, "flag", None, "face condition and all missing edges pass")


def ef_subtorus(model: ResolutionModel, spec: SubtorusSpec) -> EfVerdict:
    """Formality of an arbitrary subtorus: reduce to coordinates, then decide.

    In characteristic zero the subtorus is replaced by its hull, in
    characteristic p by its p-hull; the coordinate decider then runs on the
    already-built resolution.
    """
    assert spec.m == model.m
    p = model.field.char
    coords = hull(spec) if p == 0 else p_hull(spec, p)
    how = "hull" if p == 0 else f"{p}-hull"
    inner = ef_coordinate(model, coords)
    return EfVerdict(
        inner.formal,
        "subtorus",
        inner.witness,
        f"{how} reduces to coordinates {verts_of(coords)}; {inner.detail}",
    )


def flag_low_operations_vanish(model: ResolutionModel, I: Iterable[int] | int) -> bool:
    """Vanishing of the two low blocks that decide formality for flag complexes.

    Checks only single-vertex terms out of cohomological degree 4 and
    two-vertex terms out of cohomological degree 3 (with support inside I);
    for flag complexes this is equivalent to the full coordinate criterion.
    """
    coords = _as_mask(I, model.m)
    for src, tgt, coeff, W in model.iter_terms():
        if W & ~coords:
            continue
        si, sU, _ = model.generators[src]
        degree = 2 * sU.bit_count() - si
        if W.bit_count() == 1 and degree == 4:
            return False
        if W.bit_count() == 2 and degree == 3:
            return False
    return True


# -- graphs and edge ideals ---------------------------------------------------------


def _edge_masks(m: int, edges: Iterable[Iterable[int]]) -> List[int]:
    out = []
    for e in edges:
        mask = _as_mask(e, m)
        if mask.bit_count() != 2:
            raise ValueError(f"{e!r} is not an edge")
        out.append(mask)
    return sorted(set(out))


def independence_complex(m: int, edges: Iterable[Iterable[int]]) -> SimplicialComplex:
    """The flag complex whose faces are the independent sets of the graph."""
    return SimplicialComplex.from_nonfaces(
        m, [verts_of(e) for e in _edge_masks(m, edges)]
    )


def edge_ideal_jclosed(
    m: int, edges: Iterable[Iterable[int]], I: Iterable[int] | int
) -> Tuple[bool, Optional[tuple]]:
    """Graph form of the flag formality criterion for independence complexes.

    True exactly when I is independent and no edge {i, j} has a vertex of I
    outside it adjacent to either end; the witness names the first violation.
    """
    E = _edge_masks(m, edges)
    eset = set(E)
    coords = _as_mask(I, m)
    for e in E:
        if e & coords == e:
            return False, ("dependent", e)
    for e in E:
        i, j = verts_of(e)
        for v in verts_of(coords & ~e):
            for end in (i, j):
                if mask_of([end, v], m) in eset:
                    return False, ("adjacent", e, v)
    return True, None
