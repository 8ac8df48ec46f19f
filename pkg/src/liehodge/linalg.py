"""Exact dense linear algebra over the Gaussian rationals.

Rank, kernel/image bases, linear solve, and the Moore-Penrose
pseudo-inverse, all computed without any floating point.  The forward
elimination is fraction-free (Bareiss) on denominator-cleared rows with
partial pivoting by lowest bit-size, which keeps intermediate entries
small on the structured matrices this package produces.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Optional, Sequence

from .errors import SingularOperator
from .scalars import GR, GaussianRational

Vector = tuple[GaussianRational, ...]


def as_vector(values: Iterable) -> Vector:
    return tuple(GR.coerce(v) for v in values)


def dot(u: Sequence[GaussianRational], v: Sequence[GaussianRational]) -> GaussianRational:
    """Hermitian inner product <u, v> = sum u_i * conj(v_i)."""
    acc = GR(0)
    for a, b in zip(u, v):
        if a and b:
            acc = acc + a * b.conjugate()
    return acc


class ExactMatrix:
    """Immutable dense matrix with GaussianRational entries."""

    __slots__ = ("rows", "cols", "entries", "_cache")

    def __init__(self, entries: Sequence[Sequence], cols: Optional[int] = None):
        rows = [tuple(GR.coerce(x) for x in row) for row in entries]
        ncols = len(rows[0]) if rows else (cols or 0)
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix rows")
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", ncols)
        object.__setattr__(self, "entries", tuple(rows))
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zeros(rows: int, cols: int) -> "ExactMatrix":
        z = GR(0)
        return ExactMatrix([[z] * cols for _ in range(rows)], cols=cols)

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        z, one = GR(0), GR(1)
        return ExactMatrix([[one if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def from_columns(columns: Sequence[Sequence], rows: Optional[int] = None) -> "ExactMatrix":
        cols = [as_vector(c) for c in columns]
        if not cols:
            return ExactMatrix.zeros(rows or 0, 0)
        m = len(cols[0])
        return ExactMatrix(
            [[cols[j][i] for j in range(len(cols))] for i in range(m)],
            cols=len(cols),
        )

    # -- basic access ---------------------------------------------------

    def __getitem__(self, idx) -> GaussianRational:
        i, j = idx
        return self.entries[i][j]

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(self.entries[i][j] for i in range(self.rows))

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def is_zero(self) -> bool:
        return all(not x for row in self.entries for x in row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in row) for row in self.entries)
        return f"ExactMatrix({self.rows}x{self.cols}: {body})"

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._require_shape(other, same=True)
        return ExactMatrix(
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)
            ],
            cols=self.cols,
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._require_shape(other, same=True)
        return ExactMatrix(
            [
                [a - b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)
            ],
            cols=self.cols,
        )

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix([[-a for a in row] for row in self.entries], cols=self.cols)

    def scale(self, c) -> "ExactMatrix":
        c = GR.coerce(c)
        return ExactMatrix([[c * a for a in row] for row in self.entries], cols=self.cols)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        zero = GR(0)
        out = [[zero] * other.cols for _ in range(self.rows)]
        for i in range(self.rows):
            arow = self.entries[i]
            orow = out[i]
            for k in range(self.cols):
                a = arow[k]
                if not a:
                    continue
                brow = other.entries[k]
                for j in range(other.cols):
                    b = brow[j]
                    if b:
                        orow[j] = orow[j] + a * b
        return ExactMatrix(out, cols=other.cols)

    def apply(self, vec: Sequence[GaussianRational]) -> Vector:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        zero = GR(0)
        out = []
        for i in range(self.rows):
            acc = zero
            arow = self.entries[i]
            for k, v in enumerate(vec):
                if v and arow[k]:
                    acc = acc + arow[k] * v
            out.append(acc)
        return tuple(out)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def conjugate(self) -> "ExactMatrix":
        return ExactMatrix(
            [[a.conjugate() for a in row] for row in self.entries], cols=self.cols
        )

    @property
    def H(self) -> "ExactMatrix":
        """Conjugate transpose."""
        return ExactMatrix(
            [[self.entries[i][j].conjugate() for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def is_hermitian(self) -> bool:
        return self.rows == self.cols and self == self.H

    def _require_shape(self, other: "ExactMatrix", same: bool):
        if same and (self.rows != other.rows or self.cols != other.cols):
            raise ValueError("matrix shapes differ")

    # -- elimination ----------------------------------------------------

    def _rref(self) -> tuple[list[int], list[dict[int, GaussianRational]]]:
        """Reduced row echelon form; cached.  Rows are sparse column maps.

        Forward pass is fraction-free Bareiss on denominator-cleared rows
        (pivot chosen by lowest bit-size; rows untouched by a pivot step are
        left unscaled, which is a harmless row operation); back substitution
        then produces the reduced rational rows.
        """
        if "rref" in self._cache:
            return self._cache["rref"]
        zero = GR(0)
        work: list[dict[int, GaussianRational]] = []
        for row in self.entries:
            denoms = [1]
            for x in row:
                if x:
                    denoms.append(x.re.denominator)
                    denoms.append(x.im.denominator)
            scale = GR(lcm(*denoms))
            work.append({j: scale * x for j, x in enumerate(row) if x})
        pivots: list[int] = []
        prev = GR(1)
        r = 0
        nrows, ncols = self.rows, self.cols
        for c in range(ncols):
            if r >= nrows:
                break
            best = -1
            best_bits = None
            for i in range(r, nrows):
                x = work[i].get(c)
                if x is not None:
                    bits = x.bit_size()
                    if best_bits is None or bits < best_bits:
                        best, best_bits = i, bits
            if best < 0:
                continue
            if best != r:
                work[r], work[best] = work[best], work[r]
            piv = work[r][c]
            rowr = work[r]
            divide = prev != 1
            for i in range(r + 1, nrows):
                rowi = work[i]
                x = rowi.get(c)
                if x is None:
                    continue
                nr = {j: piv * v for j, v in rowi.items()}
                for j, v in rowr.items():
                    acc = nr.get(j, zero) - x * v
                    if acc:
                        nr[j] = acc
                    elif j in nr:
                        del nr[j]
                if divide:
                    inv = prev.inverse()
                    nr = {j: inv * v for j, v in nr.items()}
                nr.pop(c, None)
                work[i] = nr
            pivots.append(c)
            prev = piv
            r += 1
        # back substitution to reduced form
        for k in range(len(pivots) - 1, -1, -1):
            c = pivots[k]
            piv = work[k][c]
            if piv != 1:
                inv = piv.inverse()
                work[k] = {j: inv * v for j, v in work[k].items()}
            rowk = work[k]
            for i in range(k):
                f = work[i].get(c)
                if f:
                    rowi = work[i]
                    for j, v in rowk.items():
                        acc = rowi.get(j, zero) - f * v
                        if acc:
                            rowi[j] = acc
                        elif j in rowi:
                            del rowi[j]
        result = (pivots, work[: len(pivots)])
        self._cache["rref"] = result
        return result

    def rank(self) -> int:
        pivots, _ = self._rref()
        return len(pivots)

    def kernel_basis(self) -> list[Vector]:
        """Exact basis of the right kernel; each vector verified by A.v = 0."""
        pivots, rref = self._rref()
        pivot_set = set(pivots)
        free = [j for j in range(self.cols) if j not in pivot_set]
        zero, one = GR(0), GR(1)
        basis = []
        for f in free:
            v = [zero] * self.cols
            v[f] = one
            for k, c in enumerate(pivots):
                x = rref[k].get(f)
                if x:
                    v[c] = -x
            vec = tuple(v)
            if any(x for x in self.apply(vec)):
                raise AssertionError("kernel vector failed verification")
            basis.append(vec)
        return basis

    def image_basis(self) -> list[Vector]:
        """Columns of A at the pivot positions: an exact basis of the image."""
        pivots, _ = self._rref()
        return [self.column(j) for j in pivots]

    # -- solving ---------------------------------------------------------

    def pinv(self) -> "ExactMatrix":
        """Exact Moore-Penrose pseudo-inverse via rank factorization.

        A = B C with B the pivot columns and C the nonzero reduced rows;
        then A+ = C^H (C C^H)^-1 (B^H B)^-1 B^H, which satisfies all four
        Penrose axioms exactly.
        """
        if "pinv" in self._cache:
            return self._cache["pinv"]
        pivots, rref = self._rref()
        r = len(pivots)
        zero = GR(0)
        if r == 0:
            result = ExactMatrix.zeros(self.cols, self.rows)
        else:
            B = ExactMatrix.from_columns([self.column(j) for j in pivots])
            C = ExactMatrix(
                [[rref[i].get(j, zero) for j in range(self.cols)] for i in range(r)],
                cols=self.cols,
            )
            CCt = C @ C.H
            BtB = B.H @ B
            result = C.H @ CCt.inverse() @ BtB.inverse() @ B.H
        self._cache["pinv"] = result
        return result

    def inverse(self) -> "ExactMatrix":
        if self.rows != self.cols:
            raise SingularOperator("inverse of non-square matrix")
        n = self.rows
        ident = ExactMatrix.identity(n)
        aug = ExactMatrix(
            [list(self.entries[i]) + list(ident.entries[i]) for i in range(n)],
            cols=2 * n,
        )
        pivots, rref = aug._rref()
        if pivots != list(range(n)):
            raise SingularOperator("matrix is singular")
        zero = GR(0)
        return ExactMatrix(
            [[rref[i].get(n + j, zero) for j in range(n)] for i in range(n)],
            cols=n,
        )

    def det_is_zero(self) -> bool:
        return self.rows != self.cols or self.rank() < self.rows

    def solve(self, b: Sequence[GaussianRational]) -> Optional[Vector]:
        """Minimum-norm exact solution of A x = b, or None if inconsistent.

        The returned x = A+ b minimizes the Hermitian norm over all
        solutions whenever the system is consistent.
        """
        bvec = as_vector(b)
        if len(bvec) != self.rows:
            raise ValueError("right-hand side length mismatch")
        x = self.pinv().apply(bvec)
        if self.apply(x) != bvec:
            return None
        return x


def hstack(mats: Sequence[ExactMatrix]) -> ExactMatrix:
    mats = [m for m in mats]
    if not mats:
        raise ValueError("hstack of nothing")
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise ValueError("hstack: row counts differ")
    total_cols = sum(m.cols for m in mats)
    return ExactMatrix(
        [sum((list(m.entries[i]) for m in mats), []) for i in range(rows)],
        cols=total_cols,
    )


def vstack(mats: Sequence[ExactMatrix]) -> ExactMatrix:
    mats = [m for m in mats]
    if not mats:
        raise ValueError("vstack of nothing")
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("vstack: column counts differ")
    return ExactMatrix([list(row) for m in mats for row in m.entries], cols=cols)


def subspace_rank(vectors: Sequence[Sequence[GaussianRational]], dim: int) -> int:
    """Rank of the span of the given vectors inside C^dim."""
    vecs = [as_vector(v) for v in vectors]
    if not vecs:
        return 0
    return ExactMatrix.from_columns(vecs, rows=dim).rank()


def subspace_contains(
    span: Sequence[Sequence[GaussianRational]],
    candidates: Sequence[Sequence[GaussianRational]],
    dim: int,
) -> bool:
    """True iff every candidate vector lies in the span."""
    base = [as_vector(v) for v in span]
    cands = [as_vector(v) for v in candidates]
    if not cands:
        return True
    if not base:
        return all(all(not x for x in v) for v in cands)
    r0 = subspace_rank(base, dim)
    r1 = subspace_rank(base + cands, dim)
    return r0 == r1


def intersection_dim(
    u: Sequence[Sequence[GaussianRational]],
    w: Sequence[Sequence[GaussianRational]],
    dim: int,
) -> int:
    """dim(span u  intersect  span w) = dim u + dim w - dim(u + w)."""
    du = subspace_rank(u, dim)
    dw = subspace_rank(w, dim)
    dsum = subspace_rank(list(u) + list(w), dim)
    return du + dw - dsum
