"""Exact rational linear algebra.

Everything downstream works over ``fractions.Fraction``.  Matrices are stored
row-sparse because the intersection matrices of the larger fibers have tens of
thousands of rows but only a handful of nonzeros per row.  The elimination
picks pivots by minimum row length, which for graph Laplacians is the usual
minimum-degree ordering and keeps fill-in small.
"""
from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

Rational = Fraction


def fmt(q) -> str:
    """Render a rational as ``"num/den"`` (always with an explicit denominator)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse(s: str) -> Fraction:
    return Fraction(s)


class QMatrix:
    """Rectangular matrix of rationals.

    Rows are dicts ``{col: value}`` holding nonzeros only; ``m[i, j]`` returns
    zero for absent entries, so callers can treat it as a dense array.  Entries
    are held as gmpy2 rationals and handed out as Fractions.
    """

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[Mapping[int, object]] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self._rows: list[dict[int, mpq]] = [{} for _ in range(nrows)]
        else:
            if len(rows) != nrows:
                raise ValueError("row count does not match nrows")
            self._rows = []
            for r in rows:
                d = {}
                for j, v in r.items():
                    if not 0 <= j < ncols:
                        raise ValueError(f"column index {j} out of range")
                    if v:
                        d[j] = _to_mpq(v)
                self._rows.append(d)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]]) -> "QMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(nrows, ncols, [{j: v for j, v in enumerate(r) if v} for r in rows])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(nrows, ncols)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return _to_fraction(self._rows[i].get(j, 0))

    def row(self, i: int) -> dict[int, Fraction]:
        """Copy of the nonzero entries of row ``i``."""
        return {j: _to_fraction(v) for j, v in self._rows[i].items()}

    def to_rows(self) -> list[list[Fraction]]:
        out = []
        for r in self._rows:
            dense = [Fraction(0)] * self.ncols
            for j, v in r.items():
                dense[j] = _to_fraction(v)
            out.append(dense)
        return out

    def nnz(self) -> int:
        return sum(len(r) for r in self._rows)

    def _matvec(self, x: Sequence[object]) -> list[mpq]:
        if len(x) != self.ncols:
            raise ValueError(f"vector length {len(x)} != {self.ncols} columns")
        xq = [_to_mpq(v) for v in x]
        zero = mpq(0)
        return [sum((v * xq[j] for j, v in r.items()), zero) for r in self._rows]

    def matvec(self, x: Sequence[object]) -> list[Fraction]:
        return [_to_fraction(v) for v in self._matvec(x)]

    def bilinear(self, x: Sequence[object], y: Sequence[object]) -> Fraction:
        """Return ``x^T M y``."""
        my = self._matvec(y)
        return _to_fraction(sum((_to_mpq(a) * b for a, b in zip(x, my)), mpq(0)))

    def row_sums(self) -> list[Fraction]:
        return [_to_fraction(sum(r.values(), mpq(0))) for r in self._rows]

    def is_symmetric(self) -> bool:
        if not self.is_square:
            return False
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                if self._rows[j].get(i, 0) != v:
                    return False
        return True

    def scaled(self, c) -> "QMatrix":
        c = _to_mpq(c)
        return QMatrix(self.nrows, self.ncols, [{j: c * v for j, v in r.items()} for r in self._rows])

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and self._rows == other._rows

    def __repr__(self) -> str:
        return f"QMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


class Factorization:
    """Sparse Gaussian elimination of a square ``QMatrix``, reusable for many right-hand sides.

    Singular matrices are fine: rows that reduce to zero become consistency
    conditions and columns that never receive a pivot are free.  Arithmetic
    runs on gmpy2 rationals internally; inputs and outputs are Fractions.
    """

    def __init__(self, m: QMatrix):
        if not m.is_square:
            raise ValueError(f"matrix must be square, got {m.nrows}x{m.ncols}")
        n = m.nrows
        self.n = n
        rows = [dict(r) for r in m._rows]
        cols: list[set[int]] = [set() for _ in range(n)]
        for i, r in enumerate(rows):
            for j in r:
                cols[j].add(i)
        remaining = [True] * n
        heap = [(len(r), i) for i, r in enumerate(rows)]
        heapq.heapify(heap)
        steps = []
        zero_rows = []
        while heap:
            length, i = heapq.heappop(heap)
            if not remaining[i] or length != len(rows[i]):
                continue
            remaining[i] = False
            prow = rows[i]
            if not prow:
                zero_rows.append(i)
                continue
            for j in prow:
                cols[j].discard(i)
            pcol = min(prow, key=lambda j: (len(cols[j]), j))
            pv = prow[pcol]
            mults = []
            for r in sorted(cols[pcol]):
                target = rows[r]
                f = target[pcol] / pv
                for j, v in prow.items():
                    nv = target.get(j, 0) - f * v
                    if nv:
                        if j not in target:
                            cols[j].add(r)
                        target[j] = nv
                    elif j in target:
                        del target[j]
                        cols[j].discard(r)
                mults.append((r, f))
                heapq.heappush(heap, (len(target), r))
            steps.append((i, pcol, mults))
        self._rows = rows
        self._steps = steps
        self.zero_rows = zero_rows
        pivot_cols = {s[1] for s in steps}
        self.free_cols = [j for j in range(n) if j not in pivot_cols]

    @property
    def rank(self) -> int:
        return len(self._steps)

    def _forward(self, b: Sequence[object]) -> list:
        bb = [_to_mpq(v) for v in b]
        for i, _, mults in self._steps:
            bi = bb[i]
            if bi:
                for r, f in mults:
                    bb[r] -= f * bi
        return bb

    def _back(self, bb: list, free_values: Mapping[int, object]) -> list[Fraction]:
        x = [mpq(0)] * self.n
        for j, v in free_values.items():
            x[j] = _to_mpq(v)
        for i, pcol, _ in reversed(self._steps):
            row = self._rows[i]
            s = bb[i]
            for j, v in row.items():
                if j != pcol:
                    s -= v * x[j]
            x[pcol] = s / row[pcol]
        return [_to_fraction(v) for v in x]

    def solve(self, b: Sequence[object]) -> list[Fraction] | None:
        """One exact solution of ``M x = b`` (free variables set to 0), or None if inconsistent."""
        if len(b) != self.n:
            raise ValueError(f"right-hand side length {len(b)} != {self.n}")
        bb = self._forward(b)
        if any(bb[z] for z in self.zero_rows):
            return None
        return self._back(bb, {})

    def kernel(self) -> list[list[Fraction]]:
        zero = [mpq(0)] * self.n
        return [self._back(list(zero), {f: 1}) for f in self.free_cols]


def _to_mpq(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _to_fraction(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def solve_linear(m: QMatrix, b: Sequence[object]) -> list[Fraction] | None:
    """Exact solution of ``m x = b``; None when the system is inconsistent.

    >>> solve_linear(QMatrix.identity(2), [1, 2])
    [Fraction(1, 1), Fraction(2, 1)]
    """
    return Factorization(m).solve(b)


def kernel_basis(m: QMatrix) -> list[list[Fraction]]:
    return Factorization(m).kernel()


def bareiss_solve(rows: Sequence[Sequence[object]], b: Sequence[object]) -> list[Fraction] | None:
    """Solve a nonsingular system by fraction-free (Bareiss) elimination.

    Rational input is scaled to integers first; all intermediate values stay
    integral.  Returns None for a singular matrix.
    """
    n = len(rows)
    if any(len(r) != n for r in rows) or len(b) != n:
        raise ValueError("bareiss_solve needs a square system")
    aug = []
    for r, bi in zip(rows, b):
        fr = [Fraction(v) for v in r] + [Fraction(bi)]
        den = 1
        for v in fr:
            den = den * v.denominator // _gcd(den, v.denominator)
        aug.append([int(v * den) for v in fr])
    prev = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if aug[i][k]), None)
        if piv is None:
            return None
        if piv != k:
            aug[k], aug[piv] = aug[piv], aug[k]
        akk = aug[k][k]
        for i in range(k + 1, n):
            aik = aug[i][k]
            row_i, row_k = aug[i], aug[k]
            for j in range(k + 1, n + 1):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(aug[i][n])
        for j in range(i + 1, n):
            s -= aug[i][j] * x[j]
        x[i] = s / aug[i][i]
    return x


def bareiss_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix, fraction-free."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def interpolate(xs: Iterable[object], ys: Iterable[object]) -> list[Fraction]:
    """Coefficients (constant term first) of the unique polynomial of degree < n through n points."""
    xs = [Fraction(v) for v in xs]
    ys = [Fraction(v) for v in ys]
    n = len(xs)
    if n != len(ys) or len(set(xs)) != n:
        raise ValueError("need distinct abscissae, one ordinate each")
    vander = QMatrix.from_rows([[x**e for e in range(n)] for x in xs])
    coeffs = solve_linear(vander, ys)
    assert coeffs is not None
    return coeffs


def poly_eval(coeffs: Sequence[Fraction], x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
