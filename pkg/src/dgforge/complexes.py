"""Bounded cochain complexes of finite-dimensional graded vector spaces.

A complex is stored flat: one degree per basis vector and the differential
as the sparse image of each basis vector.  Signs follow the Koszul rule with

* tensor:  d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy
* hom:     d(f) = d o f - (-1)^|f| f o d
* shift:   c[k]^n = c^{n+k},  d_{c[k]} = (-1)^k d_c
* cone:    cone(f)^n = a^{n+1} (+) b^n,  d = [[-d_a, 0], [f, d_b]]
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

from .linalg import Echelon, Field, Matrix, Vec, kernel_basis, rank_of, sign


class ComplexError(ValueError):
    pass


class Complex:
    """A bounded cochain complex with a degree +1 differential."""

    def __init__(
        self,
        field: Field,
        degrees: Sequence[int],
        d: Sequence[Vec] | None = None,
        labels: Sequence[str] | None = None,
        check: bool = True,
    ):
        self.field = field
        self.degrees = tuple(int(x) for x in degrees)
        n = len(self.degrees)
        if d is None:
            d = [{} for _ in range(n)]
        if len(d) != n:
            raise ComplexError("differential has wrong length")
        self.d = tuple({k: field.norm(v) for k, v in col.items() if field.norm(v)} for col in d)
        self.labels = tuple(labels) if labels is not None else tuple(f"e{i}" for i in range(n))
        if len(self.labels) != n:
            raise ComplexError("label count mismatch")
        if check:
            self.check()

    def check(self) -> None:
        degs = self.degrees
        for i, col in enumerate(self.d):
            for j in col:
                if not 0 <= j < len(degs):
                    raise ComplexError(f"differential of {self.labels[i]} leaves the basis")
                if degs[j] != degs[i] + 1:
                    raise ComplexError(
                        f"differential of {self.labels[i]} (degree {degs[i]}) hits "
                        f"{self.labels[j]} (degree {degs[j]})"
                    )
        for i in range(len(degs)):
            if self.apply_d(self.d[i]):
                raise ComplexError(f"d^2 != 0 on {self.labels[i]}")

    @classmethod
    def zero(cls, field: Field) -> "Complex":
        return cls(field, [])

    @classmethod
    def ground(cls, field: Field, degree: int = 0) -> "Complex":
        """The field k placed in a single degree."""
        return cls(field, [degree], labels=["1"])

    @classmethod
    def from_blocks(cls, field: Field, dims: dict[int, int], diffs: dict[int, Matrix] | None = None) -> "Complex":
        """Build from per-degree dimensions and matrices ``d_n: C^n -> C^{n+1}``."""
        degrees: list[int] = []
        offsets: dict[int, int] = {}
        for n in sorted(dims):
            offsets[n] = len(degrees)
            degrees.extend([n] * dims[n])
        d: list[Vec] = [{} for _ in degrees]
        for n, m in (diffs or {}).items():
            if m.ncols != dims.get(n, 0) or m.nrows != dims.get(n + 1, 0):
                raise ComplexError(f"d_{n} has shape {m.shape}")
            for j, col in enumerate(m.columns()):
                d[offsets[n] + j] = {offsets[n + 1] + i: v for i, v in col.items()}
        return cls(field, degrees, d)

    # basic structure

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def __len__(self) -> int:
        return len(self.degrees)

    @cached_property
    def _by_degree(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, n in enumerate(self.degrees):
            out.setdefault(n, []).append(i)
        return out

    def indices(self, n: int) -> list[int]:
        return self._by_degree.get(n, [])

    @property
    def support(self) -> list[int]:
        return sorted(self._by_degree)

    def dims(self) -> dict[int, int]:
        return {n: len(ix) for n, ix in sorted(self._by_degree.items())}

    def euler_characteristic(self) -> int:
        return sum(sign(n) * k for n, k in self.dims().items())

    def apply_d(self, v: Vec) -> Vec:
        out: Vec = {}
        for i, c in v.items():
            if self.d[i]:
                self.field.axpy(out, c, self.d[i])
        return out

    def degree_of(self, v: Vec) -> int | None:
        ds = {self.degrees[i] for i in v}
        if len(ds) > 1:
            raise ComplexError("inhomogeneous vector")
        return ds.pop() if ds else None

    def block(self, n: int) -> Matrix:
        """The matrix of d_n from degree n to degree n+1 in local indices."""
        src = self.indices(n)
        tgt = {g: k for k, g in enumerate(self.indices(n + 1))}
        cols = [{tgt[g]: v for g, v in self.d[i].items()} for i in src]
        return Matrix.from_columns(self.field, len(tgt), cols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Complex)
            and self.field == other.field
            and self.degrees == other.degrees
            and self.d == other.d
        )

    def __hash__(self):
        return hash((self.degrees, tuple(tuple(sorted(c.items())) for c in self.d)))

    def __repr__(self) -> str:
        return f"Complex(dims={self.dims()})"

    # cohomology

    def _rank_d(self, n: int) -> int:
        cache = self.__dict__.setdefault("_rcache", {})
        if n not in cache:
            cache[n] = rank_of(self.field, (self.d[i] for i in self.indices(n)))
        return cache[n]

    def cohomology_dim(self, n: int) -> int:
        return len(self.indices(n)) - self._rank_d(n) - self._rank_d(n - 1)

    def cohomology_dims(self) -> dict[int, int]:
        ranks = {n: self._rank_d(n) for n in self.support}
        out = {}
        for n in self.support:
            h = len(self.indices(n)) - ranks[n] - ranks.get(n - 1, 0)
            if h:
                out[n] = h
        return out

    def cohomology(self, n: int) -> "Cohomology":
        cache = self.__dict__.setdefault("_hcache", {})
        if n not in cache:
            cache[n] = Cohomology.compute(self, n)
        return cache[n]

    def is_acyclic(self) -> bool:
        return not self.cohomology_dims()


@dataclass
class Cohomology:
    """H^n of a complex with canonical representative cocycles."""

    complex: Complex
    degree: int
    reps: list[Vec]
    _ech: Echelon = dc_field(repr=False)
    _nboundary: int = dc_field(repr=False, default=0)

    @property
    def dim(self) -> int:
        return len(self.reps)

    @classmethod
    def compute(cls, c: Complex, n: int) -> "Cohomology":
        F = c.field
        src = c.indices(n)
        kb = kernel_basis(c.block(n))
        cocycles = [{src[i]: v for i, v in col.items()} for col in kb.columns()]
        ech = Echelon(F, track=True)
        nb = 0
        for i in c.indices(n - 1):
            if c.d[i]:
                ech.add(c.d[i])
                nb += 1
        reps = []
        tags = {}
        for j, z in enumerate(cocycles):
            if ech.add(z) is None:
                tags[nb + j] = len(reps)
                reps.append(z)
        h = cls(c, n, reps, ech, nb)
        h._tags = tags
        return h

    def is_cocycle(self, v: Vec) -> bool:
        return not self.complex.apply_d(v)

    def coords(self, v: Vec) -> list:
        """Coordinates of the class of cocycle ``v`` in the representative basis."""
        F = self.complex.field
        if any(self.complex.degrees[i] != self.degree for i in v):
            raise ComplexError("vector not in the requested degree")
        if not self.is_cocycle(v):
            raise ComplexError("not a cocycle")
        combo: Vec = {}
        r = self._ech.reduce(v, combo)
        if r:
            raise ComplexError("cocycle outside span (internal error)")
        out = [0] * len(self.reps)
        for t, c in combo.items():
            k = self._tags.get(t)
            if k is not None:
                out[k] = F.norm(out[k] + c)
        return out

    def is_coboundary(self, v: Vec) -> bool:
        return self.is_cocycle(v) and not any(self.coords(v))

    def element(self, coords: Sequence) -> Vec:
        F = self.complex.field
        return F.combine(zip(coords, self.reps))


class ChainMap:
    """A map of graded spaces of degree ``shift`` with d f = (-1)^shift f d."""

    def __init__(self, source: Complex, target: Complex, images: Sequence[Vec], shift: int = 0, check: bool = True):
        if len(images) != source.dim:
            raise ComplexError("chain map needs one image per source basis vector")
        F = source.field
        self.source = source
        self.target = target
        self.shift = shift
        self.images = tuple({k: F.norm(v) for k, v in im.items() if F.norm(v)} for im in images)
        if check:
            self.check()

    def check(self) -> None:
        F = self.source.field
        s = sign(self.shift)
        for i, im in enumerate(self.images):
            for j in im:
                if self.target.degrees[j] != self.source.degrees[i] + self.shift:
                    raise ComplexError(f"component of {self.source.labels[i]} has wrong degree")
            lhs = self.target.apply_d(im)
            rhs = self.apply(self.source.d[i])
            F.axpy(lhs, -s, rhs)
            if lhs:
                raise ComplexError(f"not a chain map at {self.source.labels[i]}")

    @classmethod
    def identity(cls, c: Complex) -> "ChainMap":
        return cls(c, c, [{i: 1} for i in range(c.dim)])

    @classmethod
    def zero(cls, a: Complex, b: Complex, shift: int = 0) -> "ChainMap":
        return cls(a, b, [{} for _ in range(a.dim)], shift)

    def apply(self, v: Vec) -> Vec:
        F = self.source.field
        out: Vec = {}
        for i, c in v.items():
            F.axpy(out, c, self.images[i])
        return out

    def compose(self, g: "ChainMap") -> "ChainMap":
        """``g o self``."""
        return ChainMap(self.source, g.target, [g.apply(im) for im in self.images], self.shift + g.shift)

    def on_cohomology(self, n: int) -> Matrix:
        """Matrix of H^n(f) in representative bases."""
        hs = self.source.cohomology(n)
        ht = self.target.cohomology(n + self.shift)
        cols = [dict((i, v) for i, v in enumerate(ht.coords(self.apply(r))) if v) for r in hs.reps]
        return Matrix.from_columns(self.source.field, ht.dim, cols)


def shift(c: Complex, k: int) -> Complex:
    s = sign(k)
    F = c.field
    return Complex(F, [n - k for n in c.degrees], [F.scale(s, col) for col in c.d], c.labels)


def direct_sum(parts: Sequence[Complex]) -> tuple[Complex, list[int]]:
    """Direct sum and the offset of each summand."""
    if not parts:
        raise ComplexError("empty direct sum needs a field; use Complex.zero")
    F = parts[0].field
    degrees, d, labels, offsets = [], [], [], []
    for p in parts:
        off = len(degrees)
        offsets.append(off)
        degrees.extend(p.degrees)
        d.extend({off + k: v for k, v in col.items()} for col in p.d)
        labels.extend(p.labels)
    return Complex(F, degrees, d, labels, check=False), offsets


def cone(f: ChainMap) -> Complex:
    if f.shift != 0:
        raise ComplexError("cone needs a degree-0 chain map")
    a, b = f.source, f.target
    F = a.field
    na = a.dim
    degrees = [n - 1 for n in a.degrees] + list(b.degrees)
    d = []
    for i in range(na):
        col = {k: F.norm(-v) for k, v in a.d[i].items()}
        col.update({na + k: v for k, v in f.images[i].items()})
        d.append(col)
    d.extend({na + k: v for k, v in col.items()} for col in b.d)
    labels = [f"s{l}" for l in a.labels] + list(b.labels)
    return Complex(F, degrees, d, labels)


@dataclass(frozen=True)
class TensorIndex:
    """Index bookkeeping for a tensor product of two complexes."""

    pairs: tuple[tuple[int, int], ...]
    index: dict

    def __call__(self, i: int, j: int) -> int:
        return self.index[(i, j)]


def tensor_index(a: Complex, b: Complex) -> TensorIndex:
    pairs = []
    for n in a.support:
        for i in a.indices(n):
            for j in range(b.dim):
                pairs.append((i, j))
    return TensorIndex(tuple(pairs), {p: k for k, p in enumerate(pairs)})


def tensor_with_index(a: Complex, b: Complex) -> tuple[Complex, TensorIndex]:
    F = a.field
    ti = tensor_index(a, b)
    degrees = [a.degrees[i] + b.degrees[j] for i, j in ti.pairs]
    d = []
    for i, j in ti.pairs:
        col: Vec = {}
        for k, v in a.d[i].items():
            col[ti(k, j)] = v
        s = sign(a.degrees[i])
        for k, v in b.d[j].items():
            t = ti(i, k)
            col[t] = F.norm(col.get(t, 0) + s * v)
        d.append(col)
    labels = [f"{a.labels[i]}*{b.labels[j]}" for i, j in ti.pairs]
    return Complex(F, degrees, d, labels, check=False), ti


def tensor(a: Complex, b: Complex) -> Complex:
    return tensor_with_index(a, b)[0]


def hom_complex_with_index(a: Complex, b: Complex) -> tuple[Complex, TensorIndex]:
    """Hom(a, b) with basis the elementary maps e_i -> e_j (pairs (i, j))."""
    F = a.field
    pairs = []
    for n in sorted({b.degrees[j] - a.degrees[i] for i in range(a.dim) for j in range(b.dim)}):
        for i in range(a.dim):
            for j in range(b.dim):
                if b.degrees[j] - a.degrees[i] == n:
                    pairs.append((i, j))
    ti = TensorIndex(tuple(pairs), {p: k for k, p in enumerate(pairs)})
    # transpose of d_a: for each i, the k with e_i appearing in d e_k
    preimages: list[list[tuple[int, object]]] = [[] for _ in range(a.dim)]
    for k, col in enumerate(a.d):
        for i, v in col.items():
            preimages[i].append((k, v))
    degrees = [b.degrees[j] - a.degrees[i] for i, j in pairs]
    d = []
    for (i, j), deg in zip(pairs, degrees):
        col: Vec = {}
        # (d o f)(e_i) = d e_j
        for k, v in b.d[j].items():
            t = ti.index[(i, k)]
            col[t] = F.norm(col.get(t, 0) + v)
        # -(-1)^|f| (f o d)(e_k) = coefficient of e_i in d e_k times e_j
        s = -sign(deg)
        for k, v in preimages[i]:
            t = ti.index[(k, j)]
            col[t] = F.norm(col.get(t, 0) + s * v)
        d.append({t: v for t, v in col.items() if v})
    labels = [f"[{a.labels[i]}->{b.labels[j]}]" for i, j in pairs]
    return Complex(F, degrees, d, labels, check=False), ti


def hom_complex(a: Complex, b: Complex) -> Complex:
    return hom_complex_with_index(a, b)[0]


def is_quasi_iso(f: ChainMap) -> bool:
    if f.shift != 0:
        raise ComplexError("quasi-isomorphism test needs a degree-0 chain map")
    degs = set(f.source.support) | set(f.target.support)
    for n in sorted(degs):
        m = f.on_cohomology(n)
        if m.nrows != m.ncols or rank_of(f.source.field, m.columns()) != m.ncols:
            return False
    return True


def sub_complex_basis(c: Complex, vectors: Sequence[Vec]) -> list[Vec]:
    """Close a set of vectors under d and return an echelon basis of the span."""
    F = c.field
    e = Echelon(F)
    queue = list(vectors)
    while queue:
        v = queue.pop()
        r = e.reduce(v)
        if r:
            e.add(r)
            dv = c.apply_d(r)
            if dv:
                queue.append(dv)
    return [e.rows[p] for p in sorted(e.rows)]


@dataclass
class Quotient:
    """A quotient complex ``c / sub`` with its projection."""

    complex: Complex
    keep: list[int]
    _ech: Echelon

    def project(self, v: Vec) -> Vec:
        r = self._ech.reduce(v)
        pos = {g: k for k, g in enumerate(self.keep)}
        return {pos[g]: x for g, x in r.items()}

    def lift(self, k: int) -> Vec:
        return {self.keep[k]: 1}


def quotient_complex(c: Complex, sub: Sequence[Vec], labels: Sequence[str] | None = None) -> Quotient:
    """Quotient by the subcomplex spanned by ``sub`` (closed under d here).

    The quotient basis is the set of non-pivot basis vectors of the echelon
    form of ``sub``; vectors reduce to normal form modulo ``sub``.
    """
    F = c.field
    e = Echelon(F)
    for v in sub_complex_basis(c, sub):
        e.add(v)
    # make rows fully reduced so normal forms only involve non-pivot indices
    pivots = sorted(e.rows)
    for p in reversed(pivots):
        row = e.rows[p]
        for q in pivots:
            if q < p and p in e.rows[q]:
                F.axpy(e.rows[q], -e.rows[q][p], row)
    keep = [i for i in range(c.dim) if i not in e.rows]
    pos = {g: k for k, g in enumerate(keep)}
    d = []
    for g in keep:
        r = e.reduce(c.d[g])
        d.append({pos[k]: v for k, v in r.items()})
    lab = [c.labels[g] for g in keep] if labels is None else list(labels)
    q = Complex(F, [c.degrees[g] for g in keep], d, lab)
    return Quotient(q, keep, e)
