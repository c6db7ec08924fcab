"""Exact linear algebra over the rationals.

Matrices are stored sparsely as ``QMatrix`` (row -> {col: Fraction}).
Ranks are computed by fraction-free Bareiss elimination over Python
integers; ``rational_rank`` is a plain Gaussian elimination over
``Fraction`` kept as an independent cross-check.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class QMatrix:
    """Sparse matrix with exact rational entries."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: dict | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: dict[int, dict[int, Fraction]] = {}
        if rows:
            for i, row in rows.items():
                clean = {j: _frac(v) for j, v in row.items() if v != 0}
                if clean:
                    self.rows[i] = clean

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @classmethod
    def diagonal(cls, entries: Sequence) -> "QMatrix":
        n = len(entries)
        return cls(n, n, {i: {i: e} for i, e in enumerate(entries) if e != 0})

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence]) -> "QMatrix":
        nrows = len(dense)
        ncols = len(dense[0]) if nrows else 0
        rows = {}
        for i, row in enumerate(dense):
            if len(row) != ncols:
                raise ValueError("ragged dense matrix")
            r = {j: _frac(v) for j, v in enumerate(row) if v != 0}
            if r:
                rows[i] = r
        return cls(nrows, ncols, rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "QMatrix":
        rows: dict[int, dict[int, Fraction]] = {}
        for j, col in enumerate(columns):
            for i, v in enumerate(col):
                if v != 0:
                    rows.setdefault(i, {})[j] = _frac(v)
        out = cls(nrows, len(columns))
        out.rows = rows
        return out

    @classmethod
    def permutation(cls, images: Sequence[int]) -> "QMatrix":
        """Matrix sending basis vector ``j`` to basis vector ``images[j]``."""
        n = len(images)
        return cls(n, n, {images[j]: {j: Fraction(1)} for j in range(n)})

    # access -----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, key) -> Fraction:
        i, j = key
        return self.rows.get(i, {}).get(j, Fraction(0))

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for i, row in self.rows.items():
            for j, v in row.items():
                out[i][j] = v
        return out

    def column(self, j: int) -> list[Fraction]:
        col = [Fraction(0)] * self.nrows
        for i, row in self.rows.items():
            v = row.get(j)
            if v is not None:
                col[i] = v
        return col

    def columns(self) -> list[list[Fraction]]:
        cols = [[Fraction(0)] * self.nrows for _ in range(self.ncols)]
        for i, row in self.rows.items():
            for j, v in row.items():
                cols[j][i] = v
        return cols

    def triples(self) -> list[tuple[int, int, Fraction]]:
        return sorted((i, j, v) for i, row in self.rows.items() for j, v in row.items())

    # arithmetic -------------------------------------------------------
    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out: dict[int, dict[int, Fraction]] = {}
        orows = other.rows
        for i, row in self.rows.items():
            acc: dict[int, Fraction] = {}
            for k, a in row.items():
                brow = orows.get(k)
                if brow is None:
                    continue
                for j, b in brow.items():
                    acc[j] = acc.get(j, 0) + a * b
            acc = {j: v for j, v in acc.items() if v != 0}
            if acc:
                out[i] = acc
        res = QMatrix(self.nrows, other.ncols)
        res.rows = out
        return res

    def apply(self, vec: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.nrows
        for i, row in self.rows.items():
            s = Fraction(0)
            for j, v in row.items():
                if vec[j]:
                    s += v * vec[j]
            out[i] = s
        return out

    def _combine(self, other: "QMatrix", sign: int) -> "QMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = {i: dict(r) for i, r in self.rows.items()}
        for i, row in other.rows.items():
            tgt = out.setdefault(i, {})
            for j, v in row.items():
                nv = tgt.get(j, 0) + sign * v
                if nv:
                    tgt[j] = nv
                else:
                    tgt.pop(j, None)
            if not tgt:
                del out[i]
        res = QMatrix(self.nrows, self.ncols)
        res.rows = out
        return res

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return self._combine(other, -1)

    def scale(self, c) -> "QMatrix":
        c = _frac(c)
        if c == 0:
            return QMatrix(self.nrows, self.ncols)
        res = QMatrix(self.nrows, self.ncols)
        res.rows = {i: {j: c * v for j, v in r.items()} for i, r in self.rows.items()}
        return res

    def __neg__(self) -> "QMatrix":
        return self.scale(-1)

    def transpose(self) -> "QMatrix":
        out: dict[int, dict[int, Fraction]] = {}
        for i, row in self.rows.items():
            for j, v in row.items():
                out.setdefault(j, {})[i] = v
        res = QMatrix(self.ncols, self.nrows)
        res.rows = out
        return res

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.shape, tuple(self.triples())))

    def is_zero(self) -> bool:
        return not self.rows

    def trace(self) -> Fraction:
        return sum((row.get(i, Fraction(0)) for i, row in self.rows.items()), Fraction(0))

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "QMatrix":
        cpos = {c: k for k, c in enumerate(col_idx)}
        out = {}
        for a, i in enumerate(row_idx):
            row = self.rows.get(i)
            if not row:
                continue
            r = {cpos[j]: v for j, v in row.items() if j in cpos}
            if r:
                out[a] = r
        res = QMatrix(len(row_idx), len(col_idx))
        res.rows = out
        return res

    def __repr__(self) -> str:
        return f"QMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


def hstack(mats: Sequence[QMatrix], nrows: int | None = None) -> QMatrix:
    if nrows is None:
        if not mats:
            raise ValueError("hstack of nothing needs nrows")
        nrows = mats[0].nrows
    out: dict[int, dict[int, Fraction]] = {}
    off = 0
    for m in mats:
        if m.nrows != nrows:
            raise ValueError("hstack row mismatch")
        for i, row in m.rows.items():
            tgt = out.setdefault(i, {})
            for j, v in row.items():
                tgt[off + j] = v
        off += m.ncols
    res = QMatrix(nrows, off)
    res.rows = out
    return res


def vstack(mats: Sequence[QMatrix], ncols: int | None = None) -> QMatrix:
    if ncols is None:
        if not mats:
            raise ValueError("vstack of nothing needs ncols")
        ncols = mats[0].ncols
    out: dict[int, dict[int, Fraction]] = {}
    off = 0
    for m in mats:
        if m.ncols != ncols:
            raise ValueError("vstack column mismatch")
        for i, row in m.rows.items():
            out[off + i] = dict(row)
        off += m.nrows
    res = QMatrix(off, ncols)
    res.rows = out
    return res


def block_matrix(blocks: dict[tuple[int, int], QMatrix], row_sizes: Sequence[int],
                 col_sizes: Sequence[int]) -> QMatrix:
    """Assemble a matrix from blocks keyed by (block row, block column)."""
    roff = [0]
    for s in row_sizes:
        roff.append(roff[-1] + s)
    coff = [0]
    for s in col_sizes:
        coff.append(coff[-1] + s)
    out: dict[int, dict[int, Fraction]] = {}
    for (bi, bj), m in blocks.items():
        if m.shape != (row_sizes[bi], col_sizes[bj]):
            raise ValueError(f"block {(bi, bj)} has shape {m.shape}")
        for i, row in m.rows.items():
            tgt = out.setdefault(roff[bi] + i, {})
            for j, v in row.items():
                nv = tgt.get(coff[bj] + j, 0) + v
                if nv:
                    tgt[coff[bj] + j] = nv
                else:
                    tgt.pop(coff[bj] + j, None)
    out = {i: r for i, r in out.items() if r}
    res = QMatrix(roff[-1], coff[-1])
    res.rows = out
    return res


# ---------------------------------------------------------------------------
# elimination


def _integer_rows(m: QMatrix) -> list[list[int]]:
    """Dense integer rows, each row scaled by the lcm of its denominators."""
    out = []
    for i in range(m.nrows):
        row = m.rows.get(i)
        if not row:
            continue
        den = lcm(*(v.denominator for v in row.values()))
        dense = [0] * m.ncols
        for j, v in row.items():
            dense[j] = v.numerator * (den // v.denominator)
        out.append(dense)
    return out


def bareiss_rank(m: QMatrix) -> int:
    """Rank by fraction-free (Bareiss) elimination over the integers."""
    a = _integer_rows(m)
    if not a:
        return 0
    nrows, ncols = len(a), m.ncols
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = None
        for r in range(rank, nrows):
            if a[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        piv = a[rank][col]
        prow = a[rank]
        for r in range(rank + 1, nrows):
            row = a[r]
            f = row[col]
            if f == 0:
                for c in range(col + 1, ncols):
                    if row[c]:
                        row[c] = (piv * row[c]) // prev
            else:
                for c in range(col + 1, ncols):
                    row[c] = (piv * row[c] - f * prow[c]) // prev
                row[col] = 0
        prev = piv
        rank += 1
        if rank == nrows:
            break
    return rank


def rational_rank(m: QMatrix) -> int:
    """Rank by textbook Gaussian elimination over ``Fraction``."""
    return len(rref(m)[1])


def rref(m: QMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns.

    Pivots are chosen as the leftmost column with a nonzero entry; among
    candidate rows the first one is used, so the result is deterministic.
    """
    rows = [dict(m.rows[i]) for i in sorted(m.rows)]
    pivots: list[int] = []
    done: list[dict[int, Fraction]] = []
    ncols = m.ncols
    for col in range(ncols):
        pr = None
        for k, row in enumerate(rows):
            if row.get(col):
                pr = k
                break
        if pr is None:
            continue
        prow = rows.pop(pr)
        inv = 1 / prow[col]
        prow = {j: v * inv for j, v in prow.items()}
        for target in (rows, done):
            for row in target:
                f = row.get(col)
                if f:
                    for j, v in prow.items():
                        nv = row.get(j, 0) - f * v
                        if nv:
                            row[j] = nv
                        else:
                            row.pop(j, None)
        done.append(prow)
        pivots.append(col)
        rows = [r for r in rows if r]
        if not rows:
            break
    dense = []
    for row in done:
        d = [Fraction(0)] * ncols
        for j, v in row.items():
            d[j] = v
        dense.append(d)
    return dense, pivots


def rank(m: QMatrix) -> int:
    return bareiss_rank(m)


def nullspace(m: QMatrix) -> list[list[Fraction]]:
    """Basis of the right kernel {v : m v = 0}, one vector per free column."""
    red, pivots = rref(m)
    pset = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pset:
            continue
        v = [Fraction(0)] * m.ncols
        v[free] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def pivot_columns(m: QMatrix) -> list[int]:
    return rref(m)[1]


def column_basis(m: QMatrix) -> QMatrix:
    """The pivot columns of ``m`` (leftmost independent columns)."""
    piv = pivot_columns(m)
    return m.submatrix(list(range(m.nrows)), piv)


def left_inverse(basis: QMatrix) -> QMatrix:
    """A matrix ``L`` with ``L @ basis = I`` for a full column rank ``basis``.

    ``L`` selects independent rows of ``basis`` and inverts that square block,
    so ``L @ v`` gives the coordinates of any ``v`` in the column span.
    """
    k = basis.ncols
    if k == 0:
        return QMatrix(0, basis.nrows)
    piv_rows = pivot_columns(basis.transpose())
    if len(piv_rows) != k:
        raise ValueError("basis is not of full column rank")
    square = basis.submatrix(piv_rows, list(range(k)))
    inv = inverse(square)
    sel = QMatrix(k, basis.nrows, {a: {r: 1} for a, r in enumerate(piv_rows)})
    return inv @ sel


def inverse(m: QMatrix) -> QMatrix:
    n = m.nrows
    if m.ncols != n:
        raise ValueError("inverse of a non-square matrix")
    aug = hstack([m, QMatrix.identity(n)])
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise ZeroDivisionError("singular matrix")
    return QMatrix.from_dense([row[n:] for row in red[:n]])


def solve(a: QMatrix, b: Sequence) -> list[Fraction] | None:
    """One exact solution of ``a x = b`` or None if inconsistent."""
    aug = hstack([a, QMatrix.from_columns([list(b)], a.nrows)])
    red, pivots = rref(aug)
    if a.ncols in pivots:
        return None
    x = [Fraction(0)] * a.ncols
    for row, pc in zip(red, pivots):
        x[pc] = row[a.ncols]
    return x


def span_contains(basis: QMatrix, vectors: QMatrix) -> bool:
    """Whether every column of ``vectors`` lies in the column span of ``basis``."""
    if vectors.ncols == 0:
        return True
    return rank(hstack([basis, vectors], basis.nrows)) == rank(basis)


def intersection_of_kernels(mats: Iterable[QMatrix], n: int) -> list[list[Fraction]]:
    mats = list(mats)
    if not mats:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    return nullspace(vstack(mats, n))


class IncrementalSpan:
    """Echelon basis of a growing subspace; adding a vector costs one reduction."""

    def __init__(self):
        self._rows: dict[int, dict[int, Fraction]] = {}

    def __len__(self) -> int:
        return len(self._rows)

    def _reduce(self, vec: dict[int, Fraction]) -> dict[int, Fraction]:
        vec = dict(vec)
        for piv in sorted(self._rows):
            c = vec.get(piv)
            if c:
                for j, x in self._rows[piv].items():
                    y = vec.get(j, Fraction(0)) - c * x
                    if y:
                        vec[j] = y
                    else:
                        vec.pop(j, None)
        return vec

    def add(self, vec: dict[int, Fraction]) -> bool:
        """Insert a sparse vector; return whether the span grew."""
        red = self._reduce(vec)
        if not red:
            return False
        piv = min(red)
        inv = 1 / red[piv]
        row = {j: x * inv for j, x in red.items()}
        # keep the basis fully reduced so that pivots stay independent
        for p, other in self._rows.items():
            c = other.get(piv)
            if c:
                for j, x in row.items():
                    y = other.get(j, Fraction(0)) - c * x
                    if y:
                        other[j] = y
                    else:
                        other.pop(j, None)
        self._rows[piv] = row
        return True

    def contains(self, vec: dict[int, Fraction]) -> bool:
        return not self._reduce(vec)
