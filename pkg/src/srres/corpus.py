"""Deterministic complex corpora for the cross-checking sweeps.

Three legs, all reproducible byte-for-byte:

* every downward-closed family on up to 4 labeled vertices (199 in total,
  counting the void family and the empty complex for each vertex count);
* the families on 5 labeled vertices (7581 of them), capped to a fixed-size
  prefix in digest order so the selection is spread over the family space
  instead of biased by enumeration order;
* seeded random sparse complexes on 6 and 7 vertices.
"""

import hashlib
import random
from dataclasses import dataclass
from typing import Iterator, List, Tuple

from .simplicial import SimplicialComplex


def downset_families(m: int) -> Iterator[Tuple[int, ...]]:
    """All downward-closed families of subsets of [m], as sorted mask tuples.

    Subsets are considered in popcount-then-value order, so every proper
    subset of a candidate is decided before the candidate itself; a family
    may take a subset only if it already has all its facets one size down.
    """
    order = sorted(range(1 << m), key=lambda s: (s.bit_count(), s))
    out: List[int] = []

    def rec(k: int) -> Iterator[Tuple[int, ...]]:
        if k == len(order):
            yield tuple(sorted(out))
            return
        s = order[k]
        closed = True
        v = s
        while v:
            low = v & -v
            if (s & ~low) not in out_set:
                closed = False
                break
            v &= v - 1
        yield from rec(k + 1)
        if closed:
            out.append(s)
            out_set.add(s)
            yield from rec(k + 1)
            out_set.discard(s)
            out.pop()

    out_set: set = set()
    yield from rec(0)


def family_digest(m: int, faces: Tuple[int, ...]) -> str:
    blob = f"{m}:" + ",".join(map(str, faces))
    return hashlib.sha256(blob.encode()).hexdigest()


def small_complexes(max_m: int = 4) -> List[SimplicialComplex]:
    """Every complex on 0..max_m labeled vertices, in enumeration order."""
    out = []
    for m in range(max_m + 1):
        for faces in downset_families(m):
            out.append(SimplicialComplex.from_faces(m, faces))
    return out


def capped_five_vertex(cap: int) -> List[SimplicialComplex]:
    """A digest-ordered prefix of the 7581 families on 5 vertices."""
    families = sorted(downset_families(5), key=lambda f: family_digest(5, f))
    return [SimplicialComplex.from_faces(5, faces) for faces in families[:cap]]


def random_complexes(m: int, count: int, seed: int, max_facets: int = 9, maxdim: int = 3) -> List[SimplicialComplex]:
    """Seeded random sparse complexes: a few random facets, closed downward."""
    rng = random.Random((seed, m, count).__repr__())
    out = []
    for _ in range(count):
        faces = {0}
        for _f in range(rng.randint(2, max_facets)):
            verts = rng.sample(range(m), rng.randint(1, maxdim))
            s = 0
            for v in verts:
                s |= 1 << v
            stack = [s]
            while stack:
                f = stack.pop()
                if f in faces:
                    continue
                faces.add(f)
                v = f
                while v:
                    low = v & -v
                    stack.append(f & ~low)
                    v &= v - 1
        out.append(SimplicialComplex.from_faces(m, sorted(faces)))
    return out


@dataclass(frozen=True)
class CorpusSpec:
    """Knobs for the full sweep corpus; defaults are the shipped sweep."""

    cap5: int = 90
    random6: int = 55
    random7: int = 50
    seed: int = 20240911


def full_corpus(spec: CorpusSpec = CorpusSpec()) -> List[SimplicialComplex]:
    out = small_complexes()
    out.extend(capped_five_vertex(spec.cap5))
    out.extend(random_complexes(6, spec.random6, spec.seed))
    out.extend(random_complexes(7, spec.random7, spec.seed))
    return out
