"""Name-based construction of categories, functors and modules.

Builders keep every basis vector under a unique generator name so tables can
be written as ``{"a": 1, "b": -2}`` instead of index dictionaries.  The same
builders back the document loader.
"""

from __future__ import annotations

import itertools
from typing import Hashable, Mapping, Sequence

from .complexes import Complex
from .dgcat import DgCategory, DgFunctor, obj_str
from .linalg import Field, Vec

Obj = Hashable
Combo = Mapping[str, object]


class PresentationError(ValueError):
    """A malformed table entry; the message names the offending entry."""


class CategoryBuilder:
    def __init__(self, field: Field, objects: Sequence[Obj], name: str = "C"):
        self.field = field
        self.objects = list(objects)
        self.name = name
        self.gens: dict[str, tuple[Obj, Obj, int]] = {}
        self._order: dict[tuple[Obj, Obj], list[str]] = {}
        self.diff: dict[str, dict[str, object]] = {}
        self.products: dict[tuple[str, str], dict[str, object]] = {}
        self.units: dict[Obj, dict[str, object]] = {}

    def gen(self, source: Obj, target: Obj, name: str, degree: int = 0) -> "CategoryBuilder":
        if name in self.gens:
            raise PresentationError(f"generator {name!r} declared twice")
        if source not in self.objects or target not in self.objects:
            raise PresentationError(f"generator {name!r}: unknown object")
        self.gens[name] = (source, target, degree)
        self._order.setdefault((source, target), []).append(name)
        return self

    def d(self, name: str, value: Combo) -> "CategoryBuilder":
        self.diff[name] = dict(value)
        return self

    def comp(self, a: str, b: str, value: Combo) -> "CategoryBuilder":
        self.products[(a, b)] = dict(value)
        return self

    def unit(self, x: Obj, value: Combo | str) -> "CategoryBuilder":
        self.units[x] = {value: 1} if isinstance(value, str) else dict(value)
        return self

    def _vec(self, combo: Combo, hom: tuple[Obj, Obj], where: str) -> Vec:
        F = self.field
        idx = {n: i for i, n in enumerate(self._order.get(hom, []))}
        out: Vec = {}
        for n, c in combo.items():
            if n not in self.gens:
                raise PresentationError(f"{where}: unknown generator {n!r}")
            if n not in idx:
                raise PresentationError(
                    f"{where}: generator {n!r} lies in hom{tuple(obj_str(o) for o in self.gens[n][:2])}, "
                    f"expected hom({obj_str(hom[0])},{obj_str(hom[1])})"
                )
            v = F(c)
            if v:
                out[idx[n]] = F.norm(out.get(idx[n], 0) + v)
        return {k: v for k, v in out.items() if v}

    def build(self, check: bool = True) -> DgCategory:
        F = self.field
        homs = {}
        for x in self.objects:
            for y in self.objects:
                names = self._order.get((x, y), [])
                degs = [self.gens[n][2] for n in names]
                d = [self._vec(self.diff.get(n, {}), (x, y), f"d {n}") for n in names]
                homs[(x, y)] = Complex(F, degs, d, names, check=check)
        comp: dict = {}
        index = {n: self._order[(s, t)].index(n) for n, (s, t, _) in self.gens.items()}
        for (a, b), val in self.products.items():
            for n in (a, b):
                if n not in self.gens:
                    raise PresentationError(f"comp {a} {b}: unknown generator {n!r}")
            x, y, _ = self.gens[a]
            y2, z, _ = self.gens[b]
            if y != y2:
                raise PresentationError(f"comp {a} {b}: not composable")
            v = self._vec(val, (x, z), f"comp {a} {b}")
            if v:
                comp.setdefault((x, y, z), {})[(index[a], index[b])] = v
        units = {}
        for x in self.objects:
            if x not in self.units:
                raise PresentationError(f"unit of {obj_str(x)} missing")
            units[x] = self._vec(self.units[x], (x, x), f"unit {obj_str(x)}")
        return DgCategory(F, self.objects, homs, comp, units, self.name)


def algebra_category(
    field: Field,
    basis: Sequence[str],
    product: Mapping[tuple[str, str], Combo],
    unit: Combo | str,
    degrees: Mapping[str, int] | None = None,
    d: Mapping[str, Combo] | None = None,
    name: str = "BA",
    obj: str = "*",
) -> DgCategory:
    """B(A): the one-object dg-category of a dg-algebra, composition = product."""
    b = CategoryBuilder(field, [obj], name)
    degrees = degrees or {}
    for n in basis:
        b.gen(obj, obj, n, degrees.get(n, 0))
    for n, v in (d or {}).items():
        b.d(n, v)
    for k, v in product.items():
        b.comp(k[0], k[1], v)
    b.unit(obj, unit)
    return b.build()


def matrix_algebra(base: DgCategory, n: int, name: str | None = None) -> DgCategory:
    """B(M_n(A)) for a one-object category B(A); basis e{i}{j}.a in lex order."""
    if len(base.objects) != 1:
        raise ValueError("matrix_algebra needs a one-object category")
    (o,) = base.objects
    F = base.field
    h = base.hom(o, o)
    m = h.dim
    labels, degs, d = [], [], []

    def ix(i, j, a):
        return (i * n + j) * m + a

    for i in range(n):
        for j in range(n):
            for a in range(m):
                labels.append(f"e{i + 1}{j + 1}.{h.labels[a]}")
                degs.append(h.degrees[a])
                d.append({ix(i, j, k): v for k, v in h.d[a].items()})
    table = base.comp.get((o, o, o), {})
    comp = {}
    for i, j, k in itertools.product(range(n), repeat=3):
        for (a, b), r in table.items():
            comp[(ix(i, j, a), ix(j, k, b))] = {ix(i, k, c): v for c, v in r.items()}
    unit = {ix(i, i, a): v for i in range(n) for a, v in base.unit(o).items()}
    hom = Complex(F, degs, d, labels)
    return DgCategory(F, [o], {(o, o): hom}, {(o, o, o): comp}, {o: unit}, name or f"M{n}({base.name})")


class FunctorBuilder:
    def __init__(self, source: DgCategory, target: DgCategory, name: str = "f"):
        self.source = source
        self.target = target
        self.name = name
        self.objs: dict[Obj, Obj] = {}
        self.images: dict[str, dict[str, object]] = {}

    def obj(self, x: Obj, y: Obj) -> "FunctorBuilder":
        self.objs[x] = y
        return self

    def map(self, gen: str, value: Combo) -> "FunctorBuilder":
        self.images[gen] = dict(value)
        return self

    def build(self) -> DgFunctor:
        C, D = self.source, self.target
        F = C.field
        for x in C.objects:
            if x not in self.objs:
                raise PresentationError(f"functor {self.name}: object {obj_str(x)} unmapped")
        maps = {}
        for x in C.objects:
            for y in C.objects:
                h = C.hom(x, y)
                tgt = D.hom(self.objs[x], self.objs[y])
                tidx = {l: i for i, l in enumerate(tgt.labels)}
                comps = []
                for lab in h.labels:
                    v: Vec = {}
                    for n, c in self.images.get(lab, {}).items():
                        if n not in tidx:
                            raise PresentationError(f"functor {self.name}: map {lab}: {n!r} not in target hom")
                        v[tidx[n]] = F.norm(v.get(tidx[n], 0) + F(c))
                    comps.append({k: c for k, c in v.items() if c})
                maps[(x, y)] = comps
        return DgFunctor(C, D, self.objs, maps, self.name)


def vec_from_names(field: Field, labels: Sequence[str], combo: Combo) -> Vec:
    idx = {l: i for i, l in enumerate(labels)}
    out: Vec = {}
    for n, c in combo.items():
        if n not in idx:
            raise PresentationError(f"unknown basis element {n!r}")
        out[idx[n]] = field.norm(out.get(idx[n], 0) + field(c))
    return {k: v for k, v in out.items() if v}


def names_from_vec(field: Field, labels: Sequence[str], v: Vec) -> dict[str, object]:
    return {labels[i]: c for i, c in sorted(v.items())}
