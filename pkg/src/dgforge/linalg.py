"""Exact field arithmetic and sparse linear algebra over Q and F_p.

Vectors are sparse dicts ``{index: scalar}`` holding no explicit zeros.
Rational scalars are ints when integral and reduced ``Fraction`` otherwise,
which keeps the common +-1 structure constants on the fast int path.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Vec = dict


def _is_prime(n: int) -> bool:
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


@dataclass(frozen=True)
class Field:
    """The field Q (``p == 0``) or F_p."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not _is_prime(self.p):
            raise ValueError(f"field characteristic {self.p} is not prime")

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls(p)

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    def __str__(self) -> str:
        return "Q" if self.p == 0 else f"GF({self.p})"

    @classmethod
    def parse(cls, text: str) -> "Field":
        text = text.strip()
        if text == "Q":
            return cls(0)
        if text.startswith("GF(") and text.endswith(")"):
            return cls(int(text[3:-1]))
        raise ValueError(f"unknown field {text!r}")

    # scalars

    def __call__(self, x) -> object:
        """Canonical scalar from an int, Fraction or string."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        if self.p:
            if isinstance(x, Fraction):
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            return int(x) % self.p
        return self.norm(Fraction(x))

    def norm(self, x):
        if self.p:
            return x % self.p
        if type(x) is Fraction and x.denominator == 1:
            return x.numerator
        return x

    def inv(self, x):
        if self.p:
            if x % self.p == 0:
                raise ZeroDivisionError("inverse of zero")
            return pow(x, -1, self.p)
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.norm(Fraction(1) / x)

    def div(self, a, b):
        return self.norm(a * self.inv(b))

    def format(self, x) -> str:
        x = self.norm(x)
        if type(x) is Fraction:
            return f"{x.numerator}/{x.denominator}"
        return str(x)

    # sparse vectors

    def axpy(self, y: Vec, a, x: Vec) -> None:
        """In place ``y += a * x``."""
        p = self.p
        for k, v in x.items():
            t = y.get(k, 0) + a * v
            if p:
                t %= p
            elif type(t) is Fraction and t.denominator == 1:
                t = t.numerator
            if t:
                y[k] = t
            else:
                y.pop(k, None)

    def scale(self, a, x: Vec) -> Vec:
        if not a:
            return {}
        if self.p:
            return {k: (a * v) % self.p for k, v in x.items() if (a * v) % self.p}
        return {k: self.norm(a * v) for k, v in x.items()}

    def combine(self, terms: Iterable[tuple[object, Vec]]) -> Vec:
        out: Vec = {}
        for a, x in terms:
            if a:
                self.axpy(out, a, x)
        return out


def sign(n: int) -> int:
    return -1 if n & 1 else 1


class Echelon:
    """Incremental sparse echelon basis.

    Every stored row has its pivot as its smallest key, scaled to 1.  With
    ``track=True`` each row also remembers its expression in the inserted
    vectors, so reductions report coefficients (used for kernels, solving and
    cohomology coordinates).
    """

    def __init__(self, field: Field, track: bool = False):
        self.field = field
        self.track = track
        self.rows: dict[int, Vec] = {}
        self.combos: dict[int, Vec] = {}
        self._count = 0

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: Vec, combo: Vec | None = None) -> Vec:
        """Reduce ``v`` modulo the stored rows (returns a new dict).

        If ``combo`` is given it is updated so that on return
        ``original v = residual + sum(combo[t] * inserted_t)``.
        """
        F = self.field
        v = dict(v)
        heap = list(v)
        heapq.heapify(heap)
        seen = set()
        while heap:
            k = heapq.heappop(heap)
            if k in seen:
                continue
            seen.add(k)
            c = v.get(k)
            if not c or k not in self.rows:
                continue
            row = self.rows[k]
            for j in row:
                if j not in v and j not in seen:
                    heapq.heappush(heap, j)
            F.axpy(v, -c, row)
            if combo is not None:
                F.axpy(combo, c, self.combos[k])
        return v

    def add(self, v: Vec) -> Vec | None:
        """Insert ``v``; return None if independent, else the dependency.

        The dependency is a dict over insertion ids summing to zero
        (including the new vector's own id), only available when tracking.
        """
        F = self.field
        tag = self._count
        self._count += 1
        combo: Vec | None = {} if self.track else None
        r = self.reduce(v, combo)
        if not r:
            if combo is None:
                return {}
            dep = F.scale(-1, combo)
            dep[tag] = 1
            return dep
        piv = min(r)
        inv = F.inv(r[piv])
        self.rows[piv] = F.scale(inv, r)
        if self.track:
            c = F.scale(-inv, combo)
            c[tag] = inv
            self.combos[piv] = c
        return None

    def contains(self, v: Vec) -> bool:
        return not self.reduce(v)


def rank_of(field: Field, vectors: Iterable[Vec]) -> int:
    if not field.p:
        return _integer_rank(vectors)
    e = Echelon(field)
    for v in vectors:
        e.add(v)
    return len(e)


def _primitive(v: dict) -> dict:
    g = 0
    for x in v.values():
        g = math.gcd(g, x)
        if g == 1:
            return v
    return {k: x // g for k, x in v.items()}


def _peel_singletons(rows: list[dict]) -> tuple[int, list[dict]]:
    """Strip pivots that cause no fill-in; returns (rank found, remaining rows).

    A row with one entry clears its column everywhere else; a column met by
    a single row makes that row independent of all others.
    """
    cols: dict = {}
    for r, row in enumerate(rows):
        for k in row:
            cols.setdefault(k, set()).add(r)
    alive = set(range(len(rows)))
    rank = 0
    stack = [("r", r) for r, row in enumerate(rows) if len(row) == 1]
    stack += [("c", k) for k, rs in cols.items() if len(rs) == 1]
    while stack:
        kind, key = stack.pop()
        if kind == "r":
            if key not in alive or len(rows[key]) != 1:
                continue
            (k,) = rows[key]
            r0 = key
            for r in cols.pop(k):
                if r == r0:
                    continue
                del rows[r][k]
                if not rows[r]:
                    alive.discard(r)
                elif len(rows[r]) == 1:
                    stack.append(("r", r))
        else:
            rs = cols.get(key)
            if not rs or len(rs) != 1:
                continue
            (r0,) = rs
            del cols[key]
        alive.discard(r0)
        rank += 1
        for k2 in rows[r0]:
            rs = cols.get(k2)
            if rs is None:
                continue
            rs.discard(r0)
            if not rs:
                del cols[k2]
            elif len(rs) == 1:
                stack.append(("c", k2))
    return rank, [rows[r] for r in sorted(alive)]


def _integer_rank(vectors: Iterable[Vec]) -> int:
    """Rank over Q by fraction-free elimination on primitive integer rows."""
    ints = []
    for v in vectors:
        if not v:
            continue
        den = 1
        for x in v.values():
            if type(x) is Fraction:
                den = den * x.denominator // math.gcd(den, x.denominator)
        ints.append({k: int(x * den) for k, x in v.items()})
    found, rest = _peel_singletons(ints)
    return found + _fraction_free_rank(rest)


def _fraction_free_rank(vectors: list[dict]) -> int:
    rows: dict[int, dict] = {}
    for w in vectors:
        heap = list(w)
        heapq.heapify(heap)
        seen = set()
        while heap:
            k = heapq.heappop(heap)
            if k in seen:
                continue
            seen.add(k)
            c = w.get(k)
            if not c or k not in rows:
                continue
            row = rows[k]
            p = row[k]
            g = math.gcd(p, c)
            a, b = p // g, c // g
            if a != 1:
                for j in w:
                    w[j] *= a
            for j, x in row.items():
                t = w.get(j, 0) - b * x
                if t:
                    if j not in w and j not in seen:
                        heapq.heappush(heap, j)
                    w[j] = t
                else:
                    w.pop(j, None)
            w = _primitive(w)
        if w:
            rows[min(w)] = w
    return len(rows)


def kernel_of(field: Field, images: Sequence[Vec]) -> list[Vec]:
    """Basis of ``{c : sum c_i images[i] = 0}`` as sparse coefficient dicts."""
    e = Echelon(field, track=True)
    out = []
    for v in images:
        dep = e.add(v)
        if dep is not None:
            out.append(dep)
    return out


def solve_in_span(field: Field, images: Sequence[Vec], target: Vec) -> Vec | None:
    """Coefficients c with ``sum c_i images[i] == target``, or None."""
    e = Echelon(field, track=True)
    for v in images:
        e.add(v)
    combo: Vec = {}
    r = e.reduce(target, combo)
    return None if r else combo


class Matrix:
    """Sparse matrix with exact entries; rows stored as dicts."""

    __slots__ = ("field", "nrows", "ncols", "_rows")

    def __init__(self, field: Field, nrows: int, ncols: int, rows: Sequence[Vec] | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative matrix dimension")
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = [{} for _ in range(nrows)]
        if len(rows) != nrows:
            raise ValueError("row count mismatch")
        clean = []
        for r in rows:
            for j in r:
                if not 0 <= j < ncols:
                    raise IndexError(f"column {j} out of range for {ncols} columns")
            clean.append({j: field.norm(v) for j, v in r.items() if field.norm(v)})
        self._rows = tuple(clean)

    @classmethod
    def from_dense(cls, field: Field, entries: Sequence[Sequence[object]], ncols: int | None = None) -> "Matrix":
        entries = [list(r) for r in entries]
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        rows = []
        for r in entries:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
            rows.append({j: field(v) for j, v in enumerate(r) if field(v)})
        return cls(field, len(rows), ncols, rows)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        return cls(field, n, n, [{i: 1} for i in range(n)])

    @classmethod
    def zero(cls, field: Field, nrows: int, ncols: int) -> "Matrix":
        return cls(field, nrows, ncols)

    @classmethod
    def from_columns(cls, field: Field, nrows: int, columns: Sequence[Vec]) -> "Matrix":
        rows = [{} for _ in range(nrows)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                if not 0 <= i < nrows:
                    raise IndexError(f"row {i} out of range for {nrows} rows")
                rows[i][j] = v
        return cls(field, nrows, len(columns), rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def row(self, i: int) -> Vec:
        if not 0 <= i < self.nrows:
            raise IndexError(f"row {i} out of range")
        return dict(self._rows[i])

    def column(self, j: int) -> Vec:
        if not 0 <= j < self.ncols:
            raise IndexError(f"column {j} out of range")
        return {i: r[j] for i, r in enumerate(self._rows) if j in r}

    def columns(self) -> list[Vec]:
        cols: list[Vec] = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def __getitem__(self, key: tuple[int, int]):
        i, j = key
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(f"entry ({i}, {j}) out of range for shape {self.shape}")
        return self._rows[i].get(j, 0)

    def to_dense(self) -> list[list[object]]:
        return [[r.get(j, 0) for j in range(self.ncols)] for r in self._rows]

    def density(self) -> float:
        if not self.nrows or not self.ncols:
            return 0.0
        return sum(len(r) for r in self._rows) / (self.nrows * self.ncols)

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.ncols, self.nrows, self.columns())

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        F = self.field
        rows = []
        for r in self._rows:
            out: Vec = {}
            for k, a in r.items():
                F.axpy(out, a, other._rows[k])
            rows.append(out)
        return Matrix(F, self.nrows, other.ncols, rows)

    def apply(self, v: Vec) -> Vec:
        F = self.field
        out: Vec = {}
        for i, r in enumerate(self._rows):
            s = 0
            for j, a in r.items():
                if j in v:
                    s += a * v[j]
            s = F.norm(s)
            if s:
                out[i] = s
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.shape == other.shape
            and self._rows == other._rows
        )

    def __hash__(self):
        return hash((self.shape, tuple(tuple(sorted(r.items())) for r in self._rows)))

    def __repr__(self) -> str:
        F = self.field
        body = "; ".join(" ".join(F.format(x) for x in r) for r in self.to_dense())
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"


DENSE_THRESHOLD = 0.3


def _rref_dense(F: Field, rows: list[list[object]], ncols: int) -> tuple[list[list[object]], list[int]]:
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = F.inv(rows[r][c])
        rows[r] = [F.norm(inv * x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [F.norm(x - f * y) for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def _rref_sparse(F: Field, m: Matrix) -> tuple[list[Vec], list[int]]:
    e = Echelon(F)
    for i in range(m.nrows):
        e.add(m.row(i))
    pivots = sorted(e.rows)
    # back-substitute so every pivot column is a unit vector
    for p in reversed(pivots):
        row = e.rows[p]
        for q in pivots:
            if q < p and p in e.rows[q]:
                F.axpy(e.rows[q], -e.rows[q][p], row)
    return [e.rows[p] for p in pivots], pivots


def rref(m: Matrix, dense_threshold: float = DENSE_THRESHOLD) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns.

    Dense elimination is used when the density is at least
    ``dense_threshold``; both paths return the same canonical matrix.
    """
    F = m.field
    if m.density() >= dense_threshold:
        rows, pivots = _rref_dense(F, m.to_dense(), m.ncols)
        sparse = [{j: v for j, v in enumerate(r) if v} for r in rows]
    else:
        nz, pivots = _rref_sparse(F, m)
        sparse = nz + [{} for _ in range(m.nrows - len(nz))]
    return Matrix(F, m.nrows, m.ncols, sparse), pivots


def rank(m: Matrix) -> int:
    return rank_of(m.field, (m.row(i) for i in range(m.nrows)))


def kernel_basis(m: Matrix) -> Matrix:
    """Columns form the canonical kernel basis (one free variable set to 1)."""
    F = m.field
    R, pivots = rref(m)
    pivset = set(pivots)
    cols = []
    for free in range(m.ncols):
        if free in pivset:
            continue
        v: Vec = {free: 1}
        for i, p in enumerate(pivots):
            a = R[i, free]
            if a:
                v[p] = F.norm(-a)
        cols.append(v)
    return Matrix.from_columns(F, m.ncols, cols)


class DimensionMismatch(ValueError):
    pass


def solve(m: Matrix, b: Sequence[object] | Vec) -> list[object] | None:
    """A solution of ``m x = b`` with free variables 0, or None."""
    F = m.field
    if isinstance(b, dict):
        bv = {i: F.norm(v) for i, v in b.items() if F.norm(v)}
        if any(not 0 <= i < m.nrows for i in bv):
            raise DimensionMismatch("right-hand side index out of range")
    else:
        if len(b) != m.nrows:
            raise DimensionMismatch(f"right-hand side has length {len(b)}, expected {m.nrows}")
        bv = {i: F(v) for i, v in enumerate(b) if F(v)}
    aug_rows = []
    for i in range(m.nrows):
        r = m.row(i)
        if i in bv:
            r[m.ncols] = bv[i]
        aug_rows.append(r)
    aug = Matrix(F, m.nrows, m.ncols + 1, aug_rows)
    R, pivots = rref(aug)
    if pivots and pivots[-1] == m.ncols:
        return None
    x = [0] * m.ncols
    for i, p in enumerate(pivots):
        x[p] = R[i, m.ncols]
    return x
