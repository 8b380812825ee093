"""Abstract simplicial complexes on labeled vertices 1..m, exactly.

Faces are stored as bitmasks (vertex i is bit i-1) in a frozenset; the set is
closed downward.  Two degenerate complexes are kept distinct throughout the
package: the VOID complex (no faces at all) and the complex {(): the empty
face only}.  Reduced (co)homology follows suit: the empty face sits in degree
-1, so H~ of {()} is one-dimensional in degree -1 while H~ of VOID vanishes.

Orientation convention, fixed once for the whole package: the boundary of an
ordered simplex {j0 < ... < jq} is sum_l (-1)^l {j0 .. ^jl .. jq}, and the
boundary of a single vertex is the empty face (coefficient +1).  Cochain
differentials are the transposes.  This is the convention under which the
monomial-to-cochain comparison map in `koszul` is a chain isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

from .exactla import FieldSpec, SparseMatrix, complex_retraction, vec_to_dict

MAX_VERTICES = 20


def mask_of(vertices: Iterable[int], m: int) -> int:
    mask = 0
    for v in vertices:
        if not (1 <= v <= m):
            raise ValueError(f"vertex {v} outside 1..{m}")
        bit = 1 << (v - 1)
        if mask & bit:
            raise ValueError(f"repeated vertex {v}")
        mask |= bit
    return mask


def verts_of(mask: int) -> Tuple[int, ...]:
    out = []
    v = 1
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def subsets_of(mask: int):
    """All submasks of `mask`, including 0 and mask itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def epsilon(I: int, J: int) -> int:
    """Number of pairs (i, j) in I x J with i > j (arguments are bitmasks)."""
    count = 0
    rest = I
    while rest:
        low = rest & -rest
        count += (J & (low - 1)).bit_count()
        rest ^= low
    return count


def face_key(mask: int) -> Tuple[int, ...]:
    """Sort key: vertex tuple, i.e. lexicographic order on faces."""
    return verts_of(mask)


@dataclass(frozen=True)
class SimplicialComplex:
    """A downward-closed family of faces on the vertex set 1..m.

    `faces` holds bitmasks.  An empty family is the VOID complex; any
    non-void complex contains the empty face 0.  Ghost vertices (i with {i}
    not a face) are allowed.
    """

    m: int
    faces: frozenset

    def __post_init__(self) -> None:
        if not (0 <= self.m <= MAX_VERTICES):
            raise ValueError(f"m must be between 0 and {MAX_VERTICES}")
        if self.faces and 0 not in self.faces:
            raise ValueError("non-void complex must contain the empty face")

    # -- constructors ----------------------------------------------------------

    @staticmethod
    def void(m: int) -> "SimplicialComplex":
        return SimplicialComplex(m, frozenset())

    @staticmethod
    def from_faces(m: int, faces: Iterable[int]) -> "SimplicialComplex":
        fs = frozenset(faces)
        for f in fs:
            for v in range(m):
                sub = f & ~(1 << v)
                if sub != f and sub not in fs:
                    raise ValueError("face set is not closed downward")
        return SimplicialComplex(m, fs)

    @staticmethod
    def from_facets(m: int, facets: Iterable[Iterable[int]]) -> "SimplicialComplex":
        faces = {0}
        for facet in facets:
            mask = mask_of(facet, m)
            faces.update(subsets_of(mask))
        return SimplicialComplex(m, frozenset(faces))

    @staticmethod
    def from_nonfaces(m: int, nonfaces: Iterable[Iterable[int]]) -> "SimplicialComplex":
        """The largest complex avoiding every given set (they need not be minimal)."""
        masks = [mask_of(nf, m) for nf in nonfaces]
        faces = set()
        for cand in range(1 << m):
            if all(cand & nf != nf for nf in masks):
                faces.add(cand)
        return SimplicialComplex(m, frozenset(faces))

    @staticmethod
    def full_simplex(m: int) -> "SimplicialComplex":
        return SimplicialComplex(m, frozenset(range(1 << m)))

    # -- basic queries ----------------------------------------------------------

    @property
    def is_void(self) -> bool:
        return not self.faces

    def has_face(self, vertices: Iterable[int]) -> bool:
        return mask_of(vertices, self.m) in self.faces

    def faces_sorted(self) -> list:
        return sorted(self.faces, key=face_key)

    def facet_masks(self) -> list:
        return sorted(
            (f for f in self.faces if not any(g != f and g & f == f for g in self.faces)),
            key=face_key,
        )

    def dim(self) -> int:
        """Dimension; -1 for {()} and -2 for VOID by convention."""
        if self.is_void:
            return -2
        return max(f.bit_count() for f in self.faces) - 1

    def vertex_mask(self) -> int:
        mask = 0
        for f in self.faces:
            mask |= f
        return mask

    def f_vector(self) -> Tuple[int, ...]:
        counts: Dict[int, int] = {}
        for f in self.faces:
            counts[f.bit_count()] = counts.get(f.bit_count(), 0) + 1
        top = max(counts) if counts else 0
        return tuple(counts.get(k, 0) for k in range(top + 1))

    # -- constructions ----------------------------------------------------------

    def full_subcomplex(self, U: Iterable[int] | int) -> "SimplicialComplex":
        """Faces contained in U; labels are kept, not relabeled."""
        mask = U if isinstance(U, int) else mask_of(U, self.m)
        return SimplicialComplex(self.m, frozenset(f for f in self.faces if f & ~mask == 0))

    def face_deletion(self, F: Iterable[int] | int) -> "SimplicialComplex":
        """Faces not containing F; F = empty set deletes everything (VOID)."""
        mask = F if isinstance(F, int) else mask_of(F, self.m)
        return SimplicialComplex(self.m, frozenset(f for f in self.faces if f & mask != mask))

    def join(self, other: "SimplicialComplex") -> "SimplicialComplex":
        """Join of complexes with disjoint supports on the same vertex pool."""
        if self.m != other.m:
            raise ValueError("join requires the same ambient vertex set")
        if self.vertex_mask() & other.vertex_mask():
            raise ValueError("join requires disjoint supports")
        return SimplicialComplex(
            self.m, frozenset(a | b for a in self.faces for b in other.faces)
        )

    def contains(self, other: "SimplicialComplex") -> bool:
        return other.faces <= self.faces

    # -- combinatorial predicates -------------------------------------------------

    def minimal_nonfaces(self) -> list:
        """Minimal sets that are not faces, in lexicographic order."""
        if self.is_void:
            return [0]
        out = []
        for size in range(self.m + 1):
            for comb in itertools.combinations(range(1, self.m + 1), size):
                mask = mask_of(comb, self.m)
                if mask in self.faces:
                    continue
                if all(
                    (mask & ~(1 << (v - 1))) in self.faces for v in comb
                ):
                    out.append(mask)
        out.sort(key=face_key)
        return out

    def is_flag(self) -> bool:
        """True iff every minimal non-face has exactly two vertices (quadratic
        relations), vacuously true for full simplices."""
        return all(nf.bit_count() == 2 for nf in self.minimal_nonfaces())

    def missing_edges(self) -> list:
        out = []
        for i, j in itertools.combinations(range(1, self.m + 1), 2):
            mask = (1 << (i - 1)) | (1 << (j - 1))
            if mask not in self.faces:
                out.append(mask)
        return out


# -- reduced cochain complexes ------------------------------------------------------


@dataclass(frozen=True)
class CochainComplex:
    """Reduced simplicial cochains of a complex over a field.

    basis[q] lists the q-faces (bitmasks, lexicographic order); diff[q] is the
    coboundary C^q -> C^{q+1}.  Degrees run from -1 (the empty face) upward;
    for VOID everything is empty.
    """

    field: FieldSpec
    basis: dict  # q -> tuple of face masks
    diff: dict  # q -> SparseMatrix

    def dims(self) -> dict:
        return {q: len(b) for q, b in self.basis.items()}

    def degrees(self) -> list:
        return sorted(self.basis)


def reduced_cochain_complex(K: SimplicialComplex, field: FieldSpec) -> CochainComplex:
    by_deg: Dict[int, list] = {}
    for f in K.faces:
        by_deg.setdefault(f.bit_count() - 1, []).append(f)
    basis = {q: tuple(sorted(faces, key=face_key)) for q, faces in by_deg.items()}
    if not basis:
        return CochainComplex(field, {}, {})
    top = max(basis)
    for q in range(-1, top + 1):
        basis.setdefault(q, ())
    index = {
        (q, f): i for q, faces in basis.items() for i, f in enumerate(faces)
    }
    one = field.one()
    neg = field.neg(one)
    diff = {}
    for q in range(-1, top + 1):
        trips = []
        for col, f in enumerate(basis[q]):
            for tau in basis.get(q + 1, ()):
                if tau & f == f:
                    extra = tau & ~f
                    pos = (tau & (extra - 1)).bit_count()
                    trips.append((index[(q + 1, tau)], col, one if pos % 2 == 0 else neg))
        diff[q] = SparseMatrix.build(len(basis.get(q + 1, ())), len(basis[q]), trips, field)
    return CochainComplex(field, basis, diff)


@dataclass(frozen=True)
class CohomologyData:
    """Reduced cohomology with deterministic representative cocycles.

    reps[q] are columns in the C^q coordinates of `complex_.basis[q]`; pi[q]
    expresses any cocycle's class in those representatives (and kills
    coboundaries), coming from the same deterministic splitting used for
    every complex in the package.
    """

    complex_: CochainComplex
    dims: dict
    reps: dict
    pi: dict

    def dim(self, q: int) -> int:
        return self.dims.get(q, 0)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def class_of(self, q: int, cochain: dict) -> dict:
        """Class of a cocycle given as sparse vector in basis[q] coords."""
        if self.dims.get(q, 0) == 0:
            return {}
        return self.pi[q].mul_vec(cochain, self.complex_.field)


def reduced_cohomology(K: SimplicialComplex, field: FieldSpec) -> CohomologyData:
    cx = reduced_cochain_complex(K, field)
    dims_in = cx.dims()
    ret = complex_retraction(dims_in, cx.diff, field)
    dims = {}
    reps = {}
    pi = {}
    for q, r in ret.items():
        if r.h_dim:
            dims[q] = r.h_dim
            reps[q] = r.reps
        pi[q] = r.pi
    return CohomologyData(cx, dims, reps, pi)


def euler_characteristic_reduced(K: SimplicialComplex) -> int:
    return sum((-1) ** (f.bit_count() - 1) for f in K.faces)


@dataclass(frozen=True)
class CohomologyMap:
    """An induced map on reduced cohomology, one matrix per degree."""

    blocks: dict  # q -> SparseMatrix (dim H^q(L) x dim H^q(K))

    @property
    def is_zero(self) -> bool:
        return all(b.is_zero for b in self.blocks.values())

    def nonzero_degrees(self) -> list:
        return sorted(q for q, b in self.blocks.items() if not b.is_zero)


def restrict_cochain(
    src: CochainComplex, dst: CochainComplex, q: int, vec: dict
) -> dict:
    """Restriction C^q(K) -> C^q(L) for L a subcomplex of K (sparse coords)."""
    sbasis = src.basis.get(q, ())
    dindex = {f: i for i, f in enumerate(dst.basis.get(q, ()))}
    out = {}
    for i, v in vec.items():
        j = dindex.get(sbasis[i])
        if j is not None:
            out[j] = v
    return out


def induced_map_on_cohomology(
    L: SimplicialComplex,
    K: SimplicialComplex,
    field: FieldSpec,
    HK: Optional[CohomologyData] = None,
    HL: Optional[CohomologyData] = None,
) -> CohomologyMap:
    """Map on reduced cohomology induced by an inclusion L <= K.

    Cochains restrict; classes of restricted representatives are read off in
    L's deterministic representatives.  Raises if L is not a subcomplex of K.
    """
    if L.m != K.m or not K.contains(L):
        raise ValueError("induced map requires a subcomplex with shared labels")
    HK = HK if HK is not None else reduced_cohomology(K, field)
    HL = HL if HL is not None else reduced_cohomology(L, field)
    blocks = {}
    for q, d in HK.dims.items():
        cols = []
        for rep in HK.reps[q]:
            restricted = restrict_cochain(HK.complex_, HL.complex_, q, vec_to_dict(rep))
            cols.append(HL.class_of(q, restricted))
        blocks[q] = SparseMatrix.build(
            HL.dim(q), d,
            ((r, c, v) for c, col in enumerate(cols) for r, v in col.items()),
            field,
        )
    return CohomologyMap(blocks)
