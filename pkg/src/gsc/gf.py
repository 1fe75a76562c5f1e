"""Prime-field arithmetic and small dense linear algebra over GF(q).

Everything here is exact integer arithmetic. Matrices are immutable and
store their entries as plain ints in ``[0, q)``; :class:`FieldElement` is
the scalar view used at API boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_MODULUS = 2**31 - 1


class FieldError(ValueError):
    """Base class for finite-field errors."""


class ModulusMismatchError(FieldError):
    pass


class DimensionError(FieldError):
    pass


class FieldTooLargeError(FieldError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime_above(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p = n + 1
    while not is_prime(p):
        p += 1
    if p > MAX_MODULUS:
        raise FieldTooLargeError(f"required field size {p} exceeds 2^31 - 1")
    return p


def check_modulus(q: int) -> int:
    if q > MAX_MODULUS:
        raise FieldTooLargeError(f"field size {q} exceeds 2^31 - 1")
    if not is_prime(q):
        raise FieldError(f"field size {q} is not prime")
    return q


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self):
        if not 0 <= self.value < self.q:
            object.__setattr__(self, "value", self.value % self.q)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.q != self.q:
                raise ModulusMismatchError(f"F_{self.q} vs F_{other.q}")
            return other.value
        if isinstance(other, int):
            return other % self.q
        return NotImplemented

    def __add__(self, other):
        return FieldElement((self.value + self._other(other)) % self.q, self.q)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement((self.value - self._other(other)) % self.q, self.q)

    def __rsub__(self, other):
        return FieldElement((self._other(other) - self.value) % self.q, self.q)

    def __mul__(self, other):
        return FieldElement((self.value * self._other(other)) % self.q, self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.q, self.q)

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return FieldElement(pow(self.value, -1, self.q), self.q)

    def __truediv__(self, other):
        return self * FieldElement(self._other(other), self.q).inverse()

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


@dataclass(frozen=True)
class Matrix:
    """Dense ``rows x cols`` matrix over GF(q), entries row-major."""

    rows: int
    cols: int
    entries: tuple[int, ...]
    q: int

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        if any(not 0 <= e < self.q for e in self.entries):
            object.__setattr__(self, "entries", tuple(e % self.q for e in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], q: int, cols: int | None = None) -> Matrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), cols, tuple(int(e) % q for r in rows for e in r), q)

    @classmethod
    def zeros(cls, rows: int, cols: int, q: int) -> Matrix:
        return cls(rows, cols, (0,) * (rows * cols), q)

    @classmethod
    def identity(cls, n: int, q: int) -> Matrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)), q)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(self[i, j], self.q)

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> Matrix:
        return Matrix(
            self.cols, self.rows,
            tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)),
            self.q,
        )

    def columns(self, idx: Iterable[int]) -> Matrix:
        idx = list(idx)
        return Matrix.from_rows([[r[j] for j in idx] for r in self.to_rows()], self.q, len(idx))

    def replace(self, i: int, j: int, value: int) -> Matrix:
        entries = list(self.entries)
        entries[i * self.cols + j] = value % self.q
        return Matrix(self.rows, self.cols, tuple(entries), self.q)

    def _same_field(self, other: Matrix):
        if other.q != self.q:
            raise ModulusMismatchError(f"F_{self.q} vs F_{other.q}")

    def __add__(self, other: Matrix) -> Matrix:
        self._same_field(other)
        if self.shape != other.shape:
            raise DimensionError(f"{self.shape} + {other.shape}")
        return Matrix(self.rows, self.cols,
                      tuple((a + b) % self.q for a, b in zip(self.entries, other.entries)), self.q)

    def __sub__(self, other: Matrix) -> Matrix:
        self._same_field(other)
        if self.shape != other.shape:
            raise DimensionError(f"{self.shape} - {other.shape}")
        return Matrix(self.rows, self.cols,
                      tuple((a - b) % self.q for a, b in zip(self.entries, other.entries)), self.q)

    def __matmul__(self, other: Matrix) -> Matrix:
        self._same_field(other)
        if self.cols != other.rows:
            raise DimensionError(f"{self.shape} @ {other.shape}")
        q = self.q
        ocols = [other.transpose().row(j) for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            r = self.row(i)
            out.extend(sum(a * b for a, b in zip(r, c)) % q for c in ocols)
        return Matrix(self.rows, other.cols, tuple(out), q)


def hstack(*ms: Matrix) -> Matrix:
    q, rows = ms[0].q, ms[0].rows
    for m in ms:
        if m.q != q:
            raise ModulusMismatchError("hstack over different fields")
        if m.rows != rows:
            raise DimensionError("hstack with different row counts")
    out = [sum((list(m.row(i)) for m in ms), []) for i in range(rows)]
    return Matrix.from_rows(out, q, sum(m.cols for m in ms))


def vstack(*ms: Matrix) -> Matrix:
    q, cols = ms[0].q, ms[0].cols
    for m in ms:
        if m.q != q:
            raise ModulusMismatchError("vstack over different fields")
        if m.cols != cols:
            raise DimensionError("vstack with different column counts")
    return Matrix(sum(m.rows for m in ms), cols, sum((m.entries for m in ms), ()), q)


def _echelon(rows: list[list[int]], q: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form, first-nonzero pivoting. Returns (rows, pivot columns)."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        s = pow(rows[r][c], -1, q)
        rows[r] = [x * s % q for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % q for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(_echelon(m.to_rows(), m.q)[1])


def det(m: Matrix) -> FieldElement:
    if m.rows != m.cols:
        raise DimensionError(f"determinant of non-square {m.rows}x{m.cols} matrix")
    q = m.q
    a = m.to_rows()
    n = m.rows
    d = 1
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return FieldElement(0, q)
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d = d * a[c][c] % q
        s = pow(a[c][c], -1, q)
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] * s % q
                a[i] = [(x - f * y) % q for x, y in zip(a[i], a[c])]
    return FieldElement(d % q, q)


def row_space_contains(m: Matrix, v: Sequence[int] | Matrix) -> bool:
    """True iff every row of ``v`` lies in the row space of ``m``."""
    if not isinstance(v, Matrix):
        v = Matrix.from_rows([list(v)], m.q, len(v))
    if v.q != m.q:
        raise ModulusMismatchError(f"F_{m.q} vs F_{v.q}")
    if v.cols != m.cols:
        raise DimensionError(f"vector width {v.cols} vs matrix width {m.cols}")
    return rank(vstack(m, v)) == rank(m)


def solve_left(a: Matrix, b: Matrix) -> Matrix | None:
    """Some ``x`` with ``x @ a == b``, or None if no solution exists."""
    if a.cols != b.cols:
        raise DimensionError(f"solve_left: {a.shape} vs {b.shape}")
    q = a.q
    # x a = b  <=>  a^T x^T = b^T; eliminate on [a^T | b^T]
    at, bt = a.transpose(), b.transpose()
    n = a.rows
    if n == 0:
        return Matrix.zeros(b.rows, 0, q) if not any(b.entries) else None
    aug = [list(at.row(i)) + list(bt.row(i)) for i in range(at.rows)]
    red, pivots = _echelon(aug, q) if aug else ([], [])
    if any(p >= n for p in pivots):
        return None
    xt = [[0] * b.rows for _ in range(n)]
    for r, p in enumerate(pivots):
        xt[p] = red[r][n:]
    return Matrix.from_rows(xt, q, b.rows).transpose()
