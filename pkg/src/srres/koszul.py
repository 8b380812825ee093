"""Multidegree strands of the reduced Koszul complex of a face ring.

For a simplicial complex K on [m], the reduced Koszul complex of its face
ring splits as a direct sum over squarefree multidegrees U.  The strand at U
has one basis monomial for every face I of K with I contained in U; writing
J = U \\ I for the exterior part, the monomial sits in homological degree
|J| = |U| - |I|.  The differential trades one exterior generator for a
polynomial one:

    d(I, J) = sum over j in J with I+j a face of (-1)^{eps(j,J)} (I+j, J-j)

where eps(j, J) counts elements of J below j.  Interior products iota_v
remove an exterior generator and connect the strand at U to the strand at
U - v; they anticommute with d.

Each strand is isomorphic, by the signed bijection (I, J) -> (-1)^{eps(I,U)}
I*, to the reduced simplicial cochain complex of the full subcomplex K_U,
homological degree n matching cochain degree |U| - n - 1.  That isomorphism
is built (and checked to be a chain map) in `hochster_iso`; it is what makes
strand homology computable and testable against `simplicial` directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .exactla import FieldSpec, SparseMatrix, complex_retraction
from .simplicial import (
    CochainComplex,
    CohomologyData,
    SimplicialComplex,
    epsilon,
    face_key,
    induced_map_on_cohomology,
    reduced_cochain_complex,
    reduced_cohomology,
)


@dataclass(frozen=True)
class Strand:
    """One multidegree strand, as an explicit chain complex.

    basis[n] lists the face masks I with |U| - |I| = n, in lexicographic
    order; diff[n] maps degree n to degree n-1.  `index` resolves (n, I)
    to the column of I in basis[n].
    """

    m: int
    U: int
    field: FieldSpec
    basis: Dict[int, Tuple[int, ...]]
    diff: Dict[int, SparseMatrix]
    index: Dict[Tuple[int, int], int]

    def degrees(self):
        return sorted(self.basis)

    def dim(self, n: int) -> int:
        return len(self.basis.get(n, ()))

    def diff_at(self, n: int) -> SparseMatrix:
        got = self.diff.get(n)
        return got if got is not None else SparseMatrix.zero(self.dim(n - 1), self.dim(n))

    def subcomplex(self) -> SimplicialComplex:
        """The full subcomplex K_U that the strand's faces span."""
        faces = frozenset(f for b in self.basis.values() for f in b)
        return SimplicialComplex(self.m, faces)


def build_strand(K: SimplicialComplex, U: int, field: FieldSpec) -> Strand:
    if U >> K.m:
        raise ValueError("multidegree outside the vertex set")
    u_size = U.bit_count()
    by_deg: Dict[int, list] = {}
    for f in K.full_subcomplex(U).faces:
        by_deg.setdefault(u_size - f.bit_count(), []).append(f)
    basis = {n: tuple(sorted(faces, key=face_key)) for n, faces in by_deg.items()}
    index = {(n, f): i for n, faces in basis.items() for i, f in enumerate(faces)}
    one = field.one()
    neg = field.neg(one)
    diff = {}
    for n, faces in sorted(basis.items()):
        trips = []
        for col, I in enumerate(faces):
            J = U & ~I
            rest = J
            while rest:
                low = rest & -rest
                rest &= rest - 1
                T = I | low
                if (n - 1, T) in index:
                    sgn = (J & (low - 1)).bit_count()
                    trips.append((index[(n - 1, T)], col, one if sgn % 2 == 0 else neg))
        diff[n] = SparseMatrix.build(len(basis.get(n - 1, ())), len(faces), trips, field)
    strand = Strand(K.m, U, field, basis, diff, index)
    for n in strand.degrees():
        if n - 1 in diff:
            assert diff[n - 1].mul(diff[n], field).is_zero, "strand differential must square to zero"
    return strand


def iota_matrix(src: Strand, dst: Strand, v: int, n: int) -> SparseMatrix:
    """Interior product by u_v: degree n of the strand at U to degree n-1 at U-v.

    On a monomial (I, J) it gives (-1)^{eps(v,J)} (I, J-v) when v lies in J
    and zero otherwise (in particular when v lies in I).
    """
    bit = 1 << (v - 1)
    if not (src.U & bit) or dst.U != src.U & ~bit:
        raise ValueError("iota must drop exactly the chosen vertex of the multidegree")
    field = src.field
    one = field.one()
    neg = field.neg(one)
    trips = []
    for col, I in enumerate(src.basis.get(n, ())):
        if I & bit:
            continue
        J = src.U & ~I
        row = dst.index.get((n - 1, I))
        assert row is not None, "faces avoiding v persist in the smaller strand"
        sgn = (J & (bit - 1)).bit_count()
        trips.append((row, col, one if sgn % 2 == 0 else neg))
    return SparseMatrix.build(dst.dim(n - 1), src.dim(n), trips, field)


def hochster_sign(I: int, U: int):
    return -1 if epsilon(I, U) % 2 else 1


@dataclass(frozen=True)
class HochsterIso:
    """Signed bijection from a strand to the reduced cochains of K_U.

    maps[n] sends strand degree n to cochain degree |U|-n-1 and is a
    diagonal +-1 matrix because both sides order faces the same way.
    """

    strand: Strand
    cochains: CochainComplex
    maps: Dict[int, SparseMatrix]

    def cochain_degree(self, n: int) -> int:
        return self.strand.U.bit_count() - n - 1

    def hom_degree(self, q: int) -> int:
        return self.strand.U.bit_count() - q - 1


def hochster_iso(strand: Strand, cochains: Optional[CochainComplex] = None) -> HochsterIso:
    field = strand.field
    if cochains is None:
        cochains = reduced_cochain_complex(strand.subcomplex(), field)
    u_size = strand.U.bit_count()
    one = field.one()
    neg = field.neg(one)
    cindex = {
        (q, f): i for q, faces in cochains.basis.items() for i, f in enumerate(faces)
    }
    maps = {}
    for n, faces in strand.basis.items():
        q = u_size - n - 1
        trips = []
        for col, I in enumerate(faces):
            row = cindex[(q, I)]
            trips.append((row, col, one if epsilon(I, strand.U) % 2 == 0 else neg))
        maps[n] = SparseMatrix.build(len(cochains.basis.get(q, ())), len(faces), trips, field)
    iso = HochsterIso(strand, cochains, maps)
    for n in strand.degrees():
        if n - 1 not in maps:
            continue
        q = u_size - n - 1
        lhs = maps[n - 1].mul(strand.diff[n], field)
        rhs = cochains.diff[q].mul(maps[n], field)
        assert lhs == rhs, "face-to-cochain comparison must intertwine the differentials"
    return iso


@dataclass(frozen=True)
class StrandHomology:
    """Homology of one strand with a deterministic retraction.

    reps[n] are cycle representatives in strand coordinates; pi[n] projects
    a cycle onto class coordinates, sigma[n] includes the representatives,
    and h[n] is the contracting homotopy raising homological degree by one
    (d h + h d = 1 - sigma pi degreewise).
    """

    strand: Strand
    dims: Dict[int, int]
    reps: Dict[int, tuple]
    pi: Dict[int, SparseMatrix]
    sigma: Dict[int, SparseMatrix]
    h: Dict[int, SparseMatrix]

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def class_of(self, n: int, vec: dict) -> dict:
        if self.dims.get(n, 0) == 0:
            return {}
        return self.pi[n].mul_vec(vec, self.strand.field)


def strand_homology(strand: Strand) -> StrandHomology:
    # the retraction engine speaks cochain conventions; negate the grading
    dims_in = {-n: strand.dim(n) for n in strand.basis}
    diffs_in = {-n: strand.diff[n] for n in strand.diff}
    ret = complex_retraction(dims_in, diffs_in, strand.field)
    dims, reps, pi, sigma, h = {}, {}, {}, {}, {}
    for qq, r in ret.items():
        n = -qq
        if r.h_dim:
            dims[n] = r.h_dim
            reps[n] = r.reps
        pi[n] = r.pi
        sigma[n] = r.sigma
        h[n] = r.h
    return StrandHomology(strand, dims, reps, pi, sigma, h)


def _signed_permutation_inverse(M: SparseMatrix, field: FieldSpec) -> SparseMatrix:
    rows_seen = set()
    trips = []
    for r, c, v in M.entries:
        assert r not in rows_seen, "expected a signed permutation matrix"
        rows_seen.add(r)
        trips.append((c, r, field.inv(v)))
    assert len(rows_seen) == M.nrows == M.ncols
    return SparseMatrix.build(M.ncols, M.nrows, trips, field)


def hochster_transport(
    hom: StrandHomology, iso: HochsterIso, coh: CohomologyData
) -> Dict[int, Tuple[SparseMatrix, SparseMatrix]]:
    """Base change between strand homology classes and H~ of K_U.

    For each homological degree n with classes, returns (T, S): T rewrites
    strand class coordinates in the representative basis of H~^{|U|-n-1}(K_U),
    and S is its two-sided inverse (checked).
    """
    field = hom.strand.field
    out = {}
    for n, d in sorted(hom.dims.items()):
        q = iso.cochain_degree(n)
        assert coh.dims.get(q, 0) == d, "strand homology must match H~ of the subcomplex"
        fwd = iso.maps[n]
        back = _signed_permutation_inverse(fwd, field)
        t_trips = []
        for j, rep in enumerate(hom.reps[n]):
            vec = {i: v for i, v in enumerate(rep) if v}
            cls = coh.class_of(q, fwd.mul_vec(vec, field))
            t_trips.extend((i, j, v) for i, v in cls.items())
        T = SparseMatrix.build(d, d, t_trips, field)
        s_trips = []
        for j, rep in enumerate(coh.reps[q]):
            vec = {i: v for i, v in enumerate(rep) if v}
            cls = hom.class_of(n, back.mul_vec(vec, field))
            s_trips.extend((i, j, v) for i, v in cls.items())
        S = SparseMatrix.build(d, d, s_trips, field)
        assert S.mul(T, field) == SparseMatrix.identity(d, field)
        assert T.mul(S, field) == SparseMatrix.identity(d, field)
        out[n] = (T, S)
    return out


def primary_operation_matrix(
    src: StrandHomology, dst: StrandHomology, v: int
) -> Dict[int, SparseMatrix]:
    """The degree-one operation pi o iota_v o sigma on strand homology.

    Keys are source homological degrees n with classes; the matrix has
    shape dim H_{n-1}(strand at U-v) by dim H_n(strand at U).
    """
    field = src.strand.field
    out = {}
    for n in sorted(src.dims):
        it = iota_matrix(src.strand, dst.strand, v, n)
        rows = dst.dims.get(n - 1, 0)
        if rows == 0:
            out[n] = SparseMatrix.zero(0, src.dims[n])
            continue
        out[n] = dst.pi[n - 1].mul(it.mul(src.sigma[n], field), field)
    return out


def restriction_model_matrix(
    src: StrandHomology,
    dst: StrandHomology,
    v: int,
    src_coh: Optional[CohomologyData] = None,
    dst_coh: Optional[CohomologyData] = None,
) -> Dict[int, SparseMatrix]:
    """The same operation computed on the simplicial side.

    The interior product iota_v corresponds, through the comparison
    isomorphism, to (-1)^{eps(v,U)+|U|-n} times the restriction map
    H~^q(K_U) -> H~^q(K_{U-v}), q = |U|-n-1.  This routes every class
    through that model; agreement with `primary_operation_matrix` is the
    correctness check for the whole sign scheme.
    """
    field = src.strand.field
    U = src.strand.U
    u_size = U.bit_count()
    KU = src.strand.subcomplex()
    KUv = dst.strand.subcomplex()
    if src_coh is None:
        src_coh = reduced_cohomology(KU, field)
    if dst_coh is None:
        dst_coh = reduced_cohomology(KUv, field)
    iso_src = hochster_iso(src.strand, src_coh.complex_)
    iso_dst = hochster_iso(dst.strand, dst_coh.complex_)
    tr_src = hochster_transport(src, iso_src, src_coh)
    tr_dst = hochster_transport(dst, iso_dst, dst_coh)
    induced = induced_map_on_cohomology(KUv, KU, field, HK=src_coh, HL=dst_coh)
    eps_v = epsilon(1 << (v - 1), U)
    out = {}
    for n in sorted(src.dims):
        d_src = src.dims[n]
        rows = dst.dims.get(n - 1, 0)
        if rows == 0:
            out[n] = SparseMatrix.zero(0, d_src)
            continue
        q = u_size - n - 1
        block = induced.blocks.get(q)
        if block is None or block.is_zero:
            out[n] = SparseMatrix.zero(rows, d_src)
            continue
        T = tr_src[n][0]
        S = tr_dst[n - 1][1]
        mat = S.mul(block.mul(T, field), field)
        if (eps_v + u_size - n) % 2:
            mat = mat.scale(field.neg(field.one()), field)
        out[n] = mat
    return out
