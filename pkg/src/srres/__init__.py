"""Exact minimal free resolutions of Stanley-Reisner rings.

The package computes, over Q or GF(p) with exact arithmetic throughout:

* multigraded minimal free resolutions of Stanley-Reisner rings, built from
  strand-by-strand homological transfer (`transfer`, `resolution`);
* the induced subset operations on moment-angle cohomology and their
  comparison with Mayer-Vietoris spectral sequence differentials (`mvss`);
* equivariant-formality verdicts for coordinate subtori through several
  independent criteria (`torus`, `mvss`), cross-checked by brute-force
  oracles (`oracle`).
"""

__version__ = "0.1.0"

from .exactla import GF2, GF3, QQ, FieldSpec, SparseMatrix
from .simplicial import SimplicialComplex

__all__ = [
    "FieldSpec",
    "GF2",
    "GF3",
    "QQ",
    "SimplicialComplex",
    "SparseMatrix",
    "__version__",
]
