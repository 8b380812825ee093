"""Exact linear algebra over the rationals and prime fields.

Everything here is deterministic and exact: rational entries are
`fractions.Fraction` (always in lowest terms, positive denominator), prime
field entries are plain ints normalized to ``0 <= a < p``.  No floating point
anywhere, and no modular lifting for rational computations.

Pivoting rule, used by every elimination in the package: scan columns left to
right, and inside a column pick the first remaining row with a nonzero entry.
With that rule fixed, reduced row echelon forms, kernel bases, solutions and
splittings are all bit-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Scalar = Union[Fraction, int]

_MR_BASES = (2, 3, 5, 7)  # deterministic Miller-Rabin witnesses for n < 3.2e9


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The coefficient field: `p is None` means Q, otherwise GF(p)."""

    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.p is not None:
            if not (2 <= self.p < 2**31):
                raise ValueError(f"characteristic out of range: {self.p}")
            if not _is_prime(self.p):
                raise ValueError(f"characteristic must be prime: {self.p}")

    # -- element constructors ------------------------------------------------

    @property
    def char(self) -> int:
        return 0 if self.p is None else self.p

    def zero(self) -> Scalar:
        return Fraction(0) if self.p is None else 0

    def one(self) -> Scalar:
        return Fraction(1) if self.p is None else 1

    def of(self, n: int) -> Scalar:
        return Fraction(n) if self.p is None else n % self.p

    def of_fraction(self, num: int, den: int = 1) -> Scalar:
        if self.p is None:
            return Fraction(num, den)
        d = den % self.p
        if d == 0:
            raise ZeroDivisionError("denominator vanishes in GF(p)")
        return num % self.p * pow(d, self.p - 2, self.p) % self.p

    # -- arithmetic ------------------------------------------------------------

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        return a + b if self.p is None else (a + b) % self.p

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        return a - b if self.p is None else (a - b) % self.p

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        return a * b if self.p is None else a * b % self.p

    def neg(self, a: Scalar) -> Scalar:
        return -a if self.p is None else -a % self.p

    def inv(self, a: Scalar) -> Scalar:
        if not a:
            raise ZeroDivisionError("inverting zero")
        return 1 / a if self.p is None else pow(a, self.p - 2, self.p)

    def div(self, a: Scalar, b: Scalar) -> Scalar:
        return self.mul(a, self.inv(b))

    def name(self) -> str:
        return "q" if self.p is None else f"f{self.p}"

    def encode(self, a: Scalar) -> str:
        """Text form of a scalar, stable across sessions ("-3/7" or "5")."""
        if self.p is None:
            f = Fraction(a)
            return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
        return str(a % self.p)

    def decode(self, text: str) -> Scalar:
        if self.p is None:
            num, _, den = text.partition("/")
            return Fraction(int(num), int(den) if den else 1)
        return int(text) % self.p

    @staticmethod
    def parse(text: str) -> "FieldSpec":
        """Parse "q" or "f<p>" (e.g. "f2", "f3", "f101")."""
        text = text.strip().lower()
        if text == "q":
            return FieldSpec(None)
        if text.startswith("f") and text[1:].isdigit():
            return FieldSpec(int(text[1:]))
        raise ValueError(f"unknown field {text!r}; expected 'q' or 'f<p>'")


QQ = FieldSpec(None)
GF2 = FieldSpec(2)
GF3 = FieldSpec(3)


Vector = tuple  # dense vector of scalars


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable sparse matrix; entries sorted row-major, no zeros, no dups."""

    nrows: int
    ncols: int
    entries: tuple  # of (row, col, value)

    def __post_init__(self) -> None:
        last = (-1, -1)
        for r, c, v in self.entries:
            if not (0 <= r < self.nrows and 0 <= c < self.ncols):
                raise ValueError(f"entry out of range: {(r, c)}")
            if (r, c) <= last:
                raise ValueError("entries must be sorted row-major without duplicates")
            if not v:
                raise ValueError("stored zero entry")
            last = (r, c)

    # -- constructors ----------------------------------------------------------

    @staticmethod
    def build(nrows: int, ncols: int, triplets: Iterable, field: FieldSpec) -> "SparseMatrix":
        """Sum duplicate triplets, drop zeros, sort: the canonical form."""
        acc: dict = {}
        for r, c, v in triplets:
            key = (r, c)
            acc[key] = field.add(acc[key], v) if key in acc else v
        ents = tuple((r, c, v) for (r, c), v in sorted(acc.items()) if v)
        return SparseMatrix(nrows, ncols, ents)

    @staticmethod
    def from_dense(rows: Sequence[Sequence[Scalar]], ncols: Optional[int] = None) -> "SparseMatrix":
        nr = len(rows)
        nc = ncols if ncols is not None else (len(rows[0]) if rows else 0)
        ents = tuple(
            (r, c, v) for r, row in enumerate(rows) for c, v in enumerate(row) if v
        )
        return SparseMatrix(nr, nc, ents)

    @staticmethod
    def zero(nrows: int, ncols: int) -> "SparseMatrix":
        return SparseMatrix(nrows, ncols, ())

    @staticmethod
    def identity(n: int, field: FieldSpec) -> "SparseMatrix":
        one = field.one()
        return SparseMatrix(n, n, tuple((i, i, one) for i in range(n)))

    # -- views -----------------------------------------------------------------

    def to_dense(self, field: FieldSpec) -> list:
        rows = [[field.zero()] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.entries:
            rows[r][c] = v
        return rows

    def row_dicts(self) -> list:
        rows: list = [dict() for _ in range(self.nrows)]
        for r, c, v in self.entries:
            rows[r][c] = v
        return rows

    def col_dicts(self) -> list:
        cols: list = [dict() for _ in range(self.ncols)]
        for r, c, v in self.entries:
            cols[c][r] = v
        return cols

    def column(self, c: int) -> dict:
        return {r: v for r, cc, v in self.entries if cc == c}

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def transpose(self, field: FieldSpec) -> "SparseMatrix":
        return SparseMatrix.build(
            self.ncols, self.nrows, ((c, r, v) for r, c, v in self.entries), field
        )

    # -- arithmetic ------------------------------------------------------------

    def mul(self, other: "SparseMatrix", field: FieldSpec) -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in matrix product")
        orows = other.row_dicts()
        acc: dict = {}
        for r, k, v in self.entries:
            for c, w in orows[k].items():
                key = (r, c)
                prod = field.mul(v, w)
                acc[key] = field.add(acc[key], prod) if key in acc else prod
        ents = tuple((r, c, v) for (r, c), v in sorted(acc.items()) if v)
        return SparseMatrix(self.nrows, other.ncols, ents)

    def mul_vec(self, vec: dict, field: FieldSpec) -> dict:
        """Apply to a sparse column vector {index: value}."""
        out: dict = {}
        cols = None
        if len(vec) * 4 < self.nrows:
            cols = self.col_dicts()
        if cols is not None:
            for k, x in vec.items():
                for r, v in cols[k].items():
                    prod = field.mul(v, x)
                    out[r] = field.add(out[r], prod) if r in out else prod
        else:
            for r, c, v in self.entries:
                x = vec.get(c)
                if x:
                    prod = field.mul(v, x)
                    out[r] = field.add(out[r], prod) if r in out else prod
        return {r: v for r, v in out.items() if v}

    def add(self, other: "SparseMatrix", field: FieldSpec) -> "SparseMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in matrix sum")
        trips = list(self.entries) + list(other.entries)
        return SparseMatrix.build(self.nrows, self.ncols, trips, field)

    def scale(self, s: Scalar, field: FieldSpec) -> "SparseMatrix":
        if not s:
            return SparseMatrix.zero(self.nrows, self.ncols)
        ents = tuple((r, c, field.mul(s, v)) for r, c, v in self.entries)
        return SparseMatrix(self.nrows, self.ncols, tuple((r, c, v) for r, c, v in ents if v))


# -- elimination ----------------------------------------------------------------


def _eliminate(rows: list, ncols: int, field: FieldSpec) -> list:
    """In-place RREF on row dicts; only columns < ncols are pivot candidates.

    Returns the pivot list [(row_index_in_final_order, col), ...].  Rows are
    reordered so pivot rows come first (by pivot column), zero rows last,
    which together with the first-nonzero pivot rule makes the output unique.
    """
    sub = field.sub
    mul = field.mul
    inv = field.inv
    pivots = []
    used = [False] * len(rows)
    for c in range(ncols):
        pr = -1
        for i, row in enumerate(rows):
            if not used[i] and row.get(c):
                pr = i
                break
        if pr < 0:
            continue
        used[pr] = True
        row = rows[pr]
        f = inv(row[c])
        if f != field.one():
            for k in list(row):
                nv = mul(f, row[k])
                if nv:
                    row[k] = nv
                else:
                    del row[k]
        for i, other in enumerate(rows):
            if i == pr:
                continue
            x = other.get(c)
            if not x:
                continue
            for k, v in row.items():
                nv = sub(other.get(k, field.zero()), mul(x, v))
                if nv:
                    other[k] = nv
                elif k in other:
                    del other[k]
        pivots.append((pr, c))
    order = [pr for pr, _ in pivots] + [i for i in range(len(rows)) if not used[i]]
    rows[:] = [rows[i] for i in order]
    return [(j, c) for j, (_, c) in enumerate(pivots)]


def rref(M: SparseMatrix, field: FieldSpec):
    """Reduced row echelon form.

    Returns (R, pivot_columns, T) with T @ M == R; R has its pivot rows first
    (unit leading entries, cleared columns) and zero rows at the bottom.
    """
    n = M.ncols
    rows = M.row_dicts()
    one = field.one()
    for i, row in enumerate(rows):
        row[n + i] = one
    pivots = _eliminate(rows, n, field)
    r_trips = []
    t_trips = []
    for i, row in enumerate(rows):
        for k in sorted(row):
            if k < n:
                r_trips.append((i, k, row[k]))
            else:
                t_trips.append((i, k - n, row[k]))
    R = SparseMatrix(M.nrows, n, tuple(r_trips))
    T = SparseMatrix(M.nrows, M.nrows, tuple(sorted(t_trips)))
    return R, [c for _, c in pivots], T


def rank(M: SparseMatrix, field: FieldSpec) -> int:
    rows = M.row_dicts()
    return len(_eliminate(rows, M.ncols, field))


def kernel_basis(M: SparseMatrix, field: FieldSpec) -> list:
    """Kernel vectors in the standard RREF free-variable basis (dense tuples)."""
    R, pivots, _ = rref(M, field)
    pivot_set = set(pivots)
    free = [c for c in range(M.ncols) if c not in pivot_set]
    rrows = R.row_dicts()
    basis = []
    for j in free:
        vec = [field.zero()] * M.ncols
        vec[j] = field.one()
        for i, c in enumerate(pivots):
            x = rrows[i].get(j)
            if x:
                vec[c] = field.neg(x)
        basis.append(tuple(vec))
    return basis


def solve(M: SparseMatrix, b: dict, field: FieldSpec):
    """One solution of M x = b with zeros in the free variables, or None.

    `b` is a sparse column {row: value}; absence of a solution is a value,
    not an error.
    """
    rows = M.row_dicts()
    n = M.ncols
    for r, v in b.items():
        if v:
            rows[r][n] = v
    pivots = _eliminate(rows, n, field)
    x = [field.zero()] * n
    for i, c in pivots:
        x[c] = rows[i].get(n, field.zero())
    for i in range(len(pivots), len(rows)):
        if rows[i].get(n):
            return None
    return tuple(x)


@dataclass(frozen=True)
class SplitData:
    """Deterministic splitting of a linear map d.

    kernel: basis of ker d (RREF free-variable convention);
    complement: standard basis vectors at the pivot columns, so d restricted
    to their span is injective; image: d(complement), a basis of im d;
    coords: the matrix expressing d(complement[k]) in the image basis (the
    identity, by construction, kept explicit so callers can rely on it).
    """

    kernel: tuple
    complement: tuple
    image: tuple
    coords: SparseMatrix
    pivot_columns: tuple


def split(M: SparseMatrix, field: FieldSpec) -> SplitData:
    R, pivots, _ = rref(M, field)
    ker = tuple(kernel_from_rref(R, pivots, M.ncols, field))
    comp = []
    img = []
    cols = M.col_dicts()
    for c in pivots:
        e = [field.zero()] * M.ncols
        e[c] = field.one()
        comp.append(tuple(e))
        col = [field.zero()] * M.nrows
        for r, v in cols[c].items():
            col[r] = v
        img.append(tuple(col))
    coords = SparseMatrix.identity(len(pivots), field)
    return SplitData(ker, tuple(comp), tuple(img), coords, tuple(pivots))


def kernel_from_rref(R: SparseMatrix, pivots: list, ncols: int, field: FieldSpec) -> list:
    pivot_set = set(pivots)
    rrows = R.row_dicts()
    basis = []
    for j in range(ncols):
        if j in pivot_set:
            continue
        vec = [field.zero()] * ncols
        vec[j] = field.one()
        for i, c in enumerate(pivots):
            x = rrows[i].get(j)
            if x:
                vec[c] = field.neg(x)
        basis.append(tuple(vec))
    return basis


def invert(M: SparseMatrix, field: FieldSpec) -> SparseMatrix:
    if M.nrows != M.ncols:
        raise ValueError("inverting a non-square matrix")
    R, pivots, T = rref(M, field)
    if len(pivots) != M.ncols:
        raise ValueError("matrix is singular")
    return T


# -- per-degree retraction data ---------------------------------------------------


@dataclass(frozen=True)
class DegreeRetraction:
    """sigma/pi/h data for one degree of a complex (see `complex_retraction`)."""

    dim: int
    h_dim: int
    sigma: SparseMatrix  # H -> C
    pi: SparseMatrix  # C -> H
    h: SparseMatrix  # C (this degree) -> C (previous degree)
    reps: tuple  # columns of sigma as dense tuples


def complex_retraction(dims: dict, diffs: dict, field: FieldSpec) -> dict:
    """Deformation retraction of a finite complex onto its homology.

    `dims[n]` is the dimension of the degree-n term; `diffs[n]` maps degree n
    to degree n+1 (direction is a convention only; callers may feed homological
    complexes by negating their grading).  For each degree the splitting is:

      A = span of standard vectors at the pivot columns of d_n  (C/Z lift),
      Z = ker d_n (RREF kernel basis),
      B = d_{n-1}(pivot columns of d_{n-1})  (image basis),
      H-reps = Z-basis vectors extending the B-basis greedily in order.

    Then sigma includes the chosen representatives, pi reads off the H-block
    of the inverse of [A | B | H], and h lifts the B-block through d_{n-1}.
    The identities pi sigma = 1 and d h + h d = 1 - sigma pi hold exactly and
    are asserted by callers.
    """
    degrees = sorted(dims)
    splits = {n: split(diffs[n], field) for n in degrees if n in diffs}
    out = {}
    for n in degrees:
        dim = dims[n]
        sp_out = splits.get(n)
        sp_in = splits.get(n - 1)
        apiv = list(sp_out.pivot_columns) if sp_out else []
        zker = list(sp_out.kernel) if sp_out else _std_basis(dim, field)
        bimg = list(sp_in.image) if sp_in else []
        reps = _extend_basis(bimg, zker, field)
        cols = []
        for c in apiv:
            e = [field.zero()] * dim
            e[c] = field.one()
            cols.append(tuple(e))
        cols.extend(bimg)
        cols.extend(reps)
        na, nb, nh = len(apiv), len(bimg), len(reps)
        assert na + nb + nh == dim, "A+B+H must decompose the degree"
        if dim:
            W = SparseMatrix.build(
                dim, dim,
                ((r, c, v) for c, col in enumerate(cols) for r, v in enumerate(col) if v),
                field,
            )
            Winv = invert(W, field)
        else:
            Winv = SparseMatrix.zero(0, 0)
        wrows = Winv.row_dicts() if dim else []
        pi = SparseMatrix.build(
            nh, dim,
            ((i, c, v) for i, row in enumerate(wrows[na + nb:]) for c, v in row.items()),
            field,
        )
        sigma = SparseMatrix.build(
            dim, nh,
            ((r, j, v) for j, col in enumerate(reps) for r, v in enumerate(col) if v),
            field,
        )
        prev_dim = dims.get(n - 1, 0)
        h_trips = []
        if nb and sp_in is not None:
            # h = (lift of B through d_{n-1}) o (B-coordinates)
            for i, row in enumerate(wrows[na:na + nb]):
                c_prev = sp_in.pivot_columns[i]
                for c, v in row.items():
                    h_trips.append((c_prev, c, v))
        h = SparseMatrix.build(prev_dim, dim, h_trips, field)
        out[n] = DegreeRetraction(dim, nh, sigma, pi, h, tuple(reps))
    return out


def _std_basis(dim: int, field: FieldSpec) -> list:
    basis = []
    for j in range(dim):
        e = [field.zero()] * dim
        e[j] = field.one()
        basis.append(tuple(e))
    return basis


def _extend_basis(have: list, candidates: list, field: FieldSpec) -> list:
    """Candidates (in order) that extend `have` to a basis of their joint span."""
    if not candidates:
        return []
    dim = len(candidates[0])
    cols = list(have) + list(candidates)
    M = SparseMatrix.build(
        dim, len(cols),
        ((r, c, v) for c, col in enumerate(cols) for r, v in enumerate(col) if v),
        field,
    )
    _, pivots, _ = rref(M, field)
    return [candidates[c - len(have)] for c in pivots if c >= len(have)]


def vec_to_dict(vec: Sequence[Scalar]) -> dict:
    return {i: v for i, v in enumerate(vec) if v}


def dict_to_vec(d: dict, dim: int, field: FieldSpec) -> tuple:
    out = [field.zero()] * dim
    for i, v in d.items():
        out[i] = v
    return tuple(out)
