"""dg-categories, dg-functors, the homotopy category and isomorphism search.

Composition is written in diagrammatic order: ``compose(x, y, z, a, b)`` takes
``a`` in hom(x, y) and ``b`` in hom(y, z), and satisfies

    d(ab) = (da)b + (-1)^|a| a(db).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .complexes import ChainMap, Cohomology, Complex, ComplexError, is_quasi_iso, tensor_with_index
from .linalg import Field, Vec, sign, solve_in_span

Obj = Hashable


def obj_str(x: Obj) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(obj_str(t) for t in x) + ")"
    return str(x)


@dataclass
class ValidationReport:
    """Outcome of an axiom check; empty ``violations`` means everything holds."""

    subject: str
    checked: int = 0
    violations: list[str] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, msg: str) -> None:
        self.violations.append(msg)

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return f"{self.subject}: pass ({self.checked} checks)"
        head = f"{self.subject}: FAIL ({len(self.violations)} of {self.checked} checks)"
        return "\n".join([head] + [f"  {v}" for v in self.violations[:50]])


def check_complex(report: ValidationReport, c: Complex, where: str) -> None:
    try:
        report.checked += 1
        c.check()
    except ComplexError as e:
        report.fail(f"d^2/degree at {where}: {e}")


class DgCategory:
    """A dg-category with finitely many objects and finite-dimensional homs."""

    def __init__(
        self,
        field: Field,
        objects: Sequence[Obj],
        homs: dict[tuple[Obj, Obj], Complex],
        comp: dict[tuple[Obj, Obj, Obj], dict[tuple[int, int], Vec]],
        units: dict[Obj, Vec],
        name: str = "C",
    ):
        self.field = field
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object names")
        self.name = name
        zero = Complex.zero(field)
        self.homs = {(x, y): homs.get((x, y), zero) for x in self.objects for y in self.objects}
        self.comp = {k: {ij: dict(v) for ij, v in t.items() if v} for k, t in comp.items()}
        self.units = {x: dict(units.get(x, {})) for x in self.objects}

    def __repr__(self) -> str:
        return f"DgCategory({self.name!r}, objects={[obj_str(o) for o in self.objects]})"

    def hom(self, x: Obj, y: Obj) -> Complex:
        return self.homs[(x, y)]

    def unit(self, x: Obj) -> Vec:
        return self.units[x]

    def compose_basis(self, x: Obj, y: Obj, z: Obj, i: int, j: int) -> Vec:
        return self.comp.get((x, y, z), {}).get((i, j), {})

    def compose(self, x: Obj, y: Obj, z: Obj, a: Vec, b: Vec) -> Vec:
        F = self.field
        table = self.comp.get((x, y, z))
        out: Vec = {}
        if not table:
            return out
        for i, u in a.items():
            for j, v in b.items():
                r = table.get((i, j))
                if r:
                    F.axpy(out, u * v, r)
        return out

    def degree(self, x: Obj, y: Obj, i: int) -> int:
        return self.homs[(x, y)].degrees[i]

    def is_degree_zero(self) -> bool:
        return all(set(h.degrees) <= {0} for h in self.homs.values())

    def degree_bounds(self) -> tuple[int, int] | None:
        degs = [n for h in self.homs.values() for n in h.degrees]
        return (min(degs), max(degs)) if degs else None

    def structurally_equal(self, other: "DgCategory") -> bool:
        return (
            self.field == other.field
            and self.objects == other.objects
            and all(self.homs[k] == other.homs[k] for k in self.homs)
            and {k: v for k, v in self.comp.items() if v} == {k: v for k, v in other.comp.items() if v}
            and self.units == other.units
        )

    def full_subcategory(self, objects: Iterable[Obj], name: str | None = None) -> "DgCategory":
        obs = [o for o in self.objects if o in set(objects)]
        homs = {(x, y): self.homs[(x, y)] for x in obs for y in obs}
        comp = {k: v for k, v in self.comp.items() if all(o in obs for o in k)}
        return DgCategory(self.field, obs, homs, comp, {x: self.units[x] for x in obs}, name or self.name)

    def rename_objects(self, mapping: dict[Obj, Obj], name: str | None = None) -> "DgCategory":
        f = lambda o: mapping.get(o, o)
        return DgCategory(
            self.field,
            [f(o) for o in self.objects],
            {(f(x), f(y)): h for (x, y), h in self.homs.items()},
            {(f(x), f(y), f(z)): t for (x, y, z), t in self.comp.items()},
            {f(x): u for x, u in self.units.items()},
            name or self.name,
        )


def validate_dgcat(c: DgCategory) -> ValidationReport:
    """Check d^2 = 0, degrees, Leibniz, associativity and unit laws.

    A category carrying a ``truncation`` (basis elements with a length and a
    length limit, as produced by word-length truncated quotients) is checked
    only on products whose total length stays within the limit.
    """
    F = c.field
    rep = ValidationReport(f"dg-category {c.name}")
    obs = c.objects
    trunc = getattr(c, "truncation", None)

    limit = trunc.limit if trunc is not None else 0
    groups: dict = {}

    def by_length(x, y) -> list[tuple[int, list[int]]]:
        # basis indices of hom(x, y) grouped by truncation length
        if (x, y) not in groups:
            g: dict = {}
            for i in range(c.hom(x, y).dim):
                g.setdefault(trunc.length(x, y, i) if trunc is not None else 0, []).append(i)
            groups[(x, y)] = sorted(g.items())
        return groups[(x, y)]

    for x in obs:
        for y in obs:
            check_complex(rep, c.hom(x, y), f"hom({obj_str(x)},{obj_str(y)})")
    for x, y, z in itertools.product(obs, repeat=3):
        hxy, hyz, hxz = c.hom(x, y), c.hom(y, z), c.hom(x, z)
        for (i, j), r in c.comp.get((x, y, z), {}).items():
            for k in r:
                rep.checked += 1
                if hxz.degrees[k] != hxy.degrees[i] + hyz.degrees[j]:
                    rep.fail(
                        f"degree: {obj_str(x)},{obj_str(y)},{obj_str(z)} "
                        f"{hxy.labels[i]}*{hyz.labels[j]} has a component in the wrong degree"
                    )
        # Leibniz on basis pairs
        for n1, g1 in by_length(x, y):
            for n2, g2 in by_length(y, z):
                if n1 + n2 > limit:
                    continue
                for i, j in itertools.product(g1, g2):
                    rep.checked += 1
                    lhs = hxz.apply_d(c.compose_basis(x, y, z, i, j))
                    F.axpy(lhs, -1, c.compose(x, y, z, hxy.d[i], {j: 1}))
                    F.axpy(lhs, -sign(hxy.degrees[i]), c.compose(x, y, z, {i: 1}, hyz.d[j]))
                    if lhs:
                        rep.fail(f"Leibniz: ({hxy.labels[i]}, {hyz.labels[j]}) over {obj_str(x)},{obj_str(y)},{obj_str(z)}")
    for x, y, z, w in itertools.product(obs, repeat=4):
        hxy, hyz, hzw = c.hom(x, y), c.hom(y, z), c.hom(z, w)
        triples = [
            t
            for n1, g1 in by_length(x, y)
            for n2, g2 in by_length(y, z)
            for n3, g3 in by_length(z, w)
            if n1 + n2 + n3 <= limit
            for t in itertools.product(g1, g2, g3)
        ]
        for i, j, k in triples:
            rep.checked += 1
            lhs = c.compose(x, z, w, c.compose_basis(x, y, z, i, j), {k: 1})
            F.axpy(lhs, -1, c.compose(x, y, w, {i: 1}, c.compose_basis(y, z, w, j, k)))
            if lhs:
                rep.fail(
                    f"associativity: ({hxy.labels[i]}, {hyz.labels[j]}, {hzw.labels[k]}) "
                    f"over {obj_str(x)},{obj_str(y)},{obj_str(z)},{obj_str(w)}"
                )
    for x in obs:
        u = c.unit(x)
        hxx = c.hom(x, x)
        rep.checked += 1
        if any(hxx.degrees[i] != 0 for i in u) or hxx.apply_d(u):
            rep.fail(f"unit of {obj_str(x)} is not a degree-0 cocycle")
        for y in obs:
            hxy = c.hom(x, y)
            for i in range(hxy.dim):
                rep.checked += 1
                if c.compose(x, x, y, u, {i: 1}) != {i: 1}:
                    rep.fail(f"left unit: 1_{obj_str(x)} * {hxy.labels[i]}")
            hyx = c.hom(y, x)
            for i in range(hyx.dim):
                rep.checked += 1
                if c.compose(y, x, x, {i: 1}, u) != {i: 1}:
                    rep.fail(f"right unit: {hyx.labels[i]} * 1_{obj_str(x)}")
    return rep


def opposite(c: DgCategory, name: str | None = None) -> DgCategory:
    """C^op with composition (a, b) -> (-1)^{|a||b|} ba."""
    F = c.field
    homs = {(x, y): c.hom(y, x) for x in c.objects for y in c.objects}
    comp = {}
    for (x, y, z), table in c.comp.items():
        # original: hom(x,y) (x) hom(y,z) -> hom(x,z); opposite triple is (z, y, x)
        hxy, hyz = c.hom(x, y), c.hom(y, z)
        t = {}
        for (i, j), r in table.items():
            s = sign(hxy.degrees[i] * hyz.degrees[j])
            t[(j, i)] = F.scale(s, r)
        comp[(z, y, x)] = t
    if name is None:
        name = c.name[:-3] if c.name.endswith("^op") else c.name + "^op"
    return DgCategory(F, c.objects, homs, comp, c.units, name)


def tensor_cat(c: DgCategory, d: DgCategory, name: str | None = None) -> DgCategory:
    """C (x) D on pairs of objects, with Koszul-signed composition."""
    F = c.field
    if d.field != F:
        raise ValueError("tensor of categories over different fields")
    obs = [(x, y) for x in c.objects for y in d.objects]
    homs, idx = {}, {}
    for (x, y) in obs:
        for (x2, y2) in obs:
            h, ti = tensor_with_index(c.hom(x, x2), d.hom(y, y2))
            homs[((x, y), (x2, y2))] = h
            idx[((x, y), (x2, y2))] = ti
    comp = {}
    for (x, y), (x2, y2), (x3, y3) in itertools.product(obs, repeat=3):
        tc = c.comp.get((x, x2, x3))
        td = d.comp.get((y, y2, y3))
        if not tc or not td:
            continue
        t1 = idx[((x, y), (x2, y2))]
        t2 = idx[((x2, y2), (x3, y3))]
        t3 = idx[((x, y), (x3, y3))]
        hd1 = d.hom(y, y2)
        hc2 = c.hom(x2, x3)
        table: dict[tuple[int, int], Vec] = {}
        for (a, a2), ra in tc.items():
            for (b, b2), rb in td.items():
                s = sign(hd1.degrees[b] * hc2.degrees[a2])
                out: Vec = {}
                for k, u in ra.items():
                    for l, v in rb.items():
                        out[t3(k, l)] = F.norm(s * u * v)
                table[(t1(a, b), t2(a2, b2))] = out
        comp[((x, y), (x2, y2), (x3, y3))] = table
    units = {}
    for (x, y) in obs:
        ti = idx[((x, y), (x, y))]
        units[(x, y)] = {ti(i, j): F.norm(u * v) for i, u in c.unit(x).items() for j, v in d.unit(y).items()}
    return DgCategory(F, obs, homs, comp, units, name or f"{c.name}*{d.name}")


# dg-functors


class DgFunctor:
    """Object map plus degree-0 chain maps on hom complexes."""

    def __init__(
        self,
        source: DgCategory,
        target: DgCategory,
        obj_map: dict[Obj, Obj],
        maps: dict[tuple[Obj, Obj], Sequence[Vec]],
        name: str = "f",
    ):
        self.source = source
        self.target = target
        self.obj_map = dict(obj_map)
        self.name = name
        self.maps = {}
        for x in source.objects:
            for y in source.objects:
                n = source.hom(x, y).dim
                self.maps[(x, y)] = tuple(dict(v) for v in maps.get((x, y), [{}] * n))

    def __call__(self, x: Obj) -> Obj:
        return self.obj_map[x]

    def apply(self, x: Obj, y: Obj, v: Vec) -> Vec:
        F = self.source.field
        out: Vec = {}
        comps = self.maps[(x, y)]
        for i, c in v.items():
            F.axpy(out, c, comps[i])
        return out

    def chain_map(self, x: Obj, y: Obj) -> ChainMap:
        return ChainMap(
            self.source.hom(x, y), self.target.hom(self(x), self(y)), list(self.maps[(x, y)]), check=False
        )

    @classmethod
    def identity(cls, c: DgCategory) -> "DgFunctor":
        maps = {(x, y): [{i: 1} for i in range(c.hom(x, y).dim)] for x in c.objects for y in c.objects}
        return cls(c, c, {x: x for x in c.objects}, maps, name=f"id_{c.name}")

    @classmethod
    def inclusion(cls, sub: DgCategory, c: DgCategory, obj_map: dict[Obj, Obj] | None = None) -> "DgFunctor":
        """Inclusion of a full subcategory (homs copied identically)."""
        obj_map = obj_map or {x: x for x in sub.objects}
        maps = {}
        for x in sub.objects:
            for y in sub.objects:
                if sub.hom(x, y) != c.hom(obj_map[x], obj_map[y]):
                    raise ValueError("not a full subcategory with matching bases")
                maps[(x, y)] = [{i: 1} for i in range(sub.hom(x, y).dim)]
        return cls(sub, c, obj_map, maps, name=f"incl_{sub.name}")

    def then(self, g: "DgFunctor") -> "DgFunctor":
        """The composite ``g o self``."""
        maps = {}
        for x in self.source.objects:
            for y in self.source.objects:
                maps[(x, y)] = [g.apply(self(x), self(y), v) for v in self.maps[(x, y)]]
        objs = {x: g(self(x)) for x in self.source.objects}
        return DgFunctor(self.source, g.target, objs, maps, name=f"{g.name}.{self.name}")


def opposite_functor(f: DgFunctor, source_op: DgCategory | None = None, target_op: DgCategory | None = None) -> DgFunctor:
    """f^op: C^op -> D^op, the same components read on reversed homs."""
    Cop = source_op or opposite(f.source)
    Dop = target_op or opposite(f.target)
    maps = {(y, x): f.maps[(x, y)] for (x, y) in f.maps}
    return DgFunctor(Cop, Dop, f.obj_map, maps, f"{f.name}^op")


def validate_functor(f: DgFunctor) -> ValidationReport:
    C, D = f.source, f.target
    F = C.field
    rep = ValidationReport(f"dg-functor {f.name}")
    for x in C.objects:
        rep.checked += 1
        if f.obj_map.get(x) not in D.objects:
            rep.fail(f"object {obj_str(x)} has no image")
            return rep
    for x in C.objects:
        for y in C.objects:
            rep.checked += 1
            try:
                f.chain_map(x, y).check()
            except ComplexError as e:
                rep.fail(f"component at ({obj_str(x)},{obj_str(y)}): {e}")
    for x, y, z in itertools.product(C.objects, repeat=3):
        hxy, hyz = C.hom(x, y), C.hom(y, z)
        for i in range(hxy.dim):
            fa = f.apply(x, y, {i: 1})
            for j in range(hyz.dim):
                rep.checked += 1
                lhs = f.apply(x, z, C.compose_basis(x, y, z, i, j))
                F.axpy(lhs, -1, D.compose(f(x), f(y), f(z), fa, f.apply(y, z, {j: 1})))
                if lhs:
                    rep.fail(f"composition: ({hxy.labels[i]}, {hyz.labels[j]})")
    for x in C.objects:
        rep.checked += 1
        if f.apply(x, x, C.unit(x)) != D.unit(f(x)):
            rep.fail(f"unit of {obj_str(x)} not preserved")
    return rep


# the homotopy category [C]


class H0Category:
    """[C]: H^0 of every hom complex with the induced composition."""

    def __init__(self, c: DgCategory):
        self.dg = c
        self.objects = c.objects
        self._h: dict[tuple[Obj, Obj], Cohomology] = {}
        self._comp: dict[tuple[Obj, Obj, Obj], dict[tuple[int, int], list]] = {}

    def hom(self, x: Obj, y: Obj) -> Cohomology:
        if (x, y) not in self._h:
            self._h[(x, y)] = self.dg.hom(x, y).cohomology(0)
        return self._h[(x, y)]

    def dim(self, x: Obj, y: Obj) -> int:
        return self.hom(x, y).dim

    def class_of(self, x: Obj, y: Obj, cocycle: Vec) -> list:
        return self.hom(x, y).coords(cocycle)

    def rep(self, x: Obj, y: Obj, coords: Sequence) -> Vec:
        return self.hom(x, y).element(coords)

    def unit_class(self, x: Obj) -> list:
        return self.class_of(x, x, self.dg.unit(x))

    def compose(self, x: Obj, y: Obj, z: Obj, u: Sequence, v: Sequence) -> list:
        """Composite class of ``u`` in [C](x,y) and ``v`` in [C](y,z)."""
        F = self.dg.field
        table = self.structure_constants(x, y, z)
        out = [0] * self.dim(x, z)
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if b:
                    for k, c in enumerate(table[(i, j)]):
                        out[k] += a * b * c
        return [F.norm(t) for t in out]

    def structure_constants(self, x: Obj, y: Obj, z: Obj) -> dict[tuple[int, int], list]:
        key = (x, y, z)
        if key not in self._comp:
            hxy, hyz, hxz = self.hom(x, y), self.hom(y, z), self.hom(x, z)
            t = {}
            for i, a in enumerate(hxy.reps):
                for j, b in enumerate(hyz.reps):
                    t[(i, j)] = hxz.coords(self.dg.compose(x, y, z, a, b))
            self._comp[key] = t
        return self._comp[key]

    def dims(self) -> dict[tuple[Obj, Obj], int]:
        return {(x, y): self.dim(x, y) for x in self.objects for y in self.objects}


def h0_category(c: DgCategory) -> H0Category:
    return H0Category(c)


@dataclass
class IsoWitness:
    """Classes u in [C](x,y), v in [C](y,x) that are mutually inverse."""

    x: Obj
    y: Obj
    u: list
    v: list
    u_rep: Vec
    v_rep: Vec


def verify_iso_witness(h: H0Category, w: IsoWitness) -> bool:
    x, y = w.x, w.y
    if h.class_of(x, y, w.u_rep) != list(w.u) or h.class_of(y, x, w.v_rep) != list(w.v):
        return False
    return h.compose(x, y, x, w.u, w.v) == h.unit_class(x) and h.compose(y, x, y, w.v, w.u) == h.unit_class(y)


@dataclass
class IsoSearch:
    """Result of the randomized search with its soundness bookkeeping."""

    witness: IsoWitness | None
    trials: int
    sample_size: int | None
    exhaustive: bool
    failure_bound: Fraction

    @property
    def found(self) -> bool:
        return self.witness is not None


EXHAUSTIVE_LIMIT = 4096


def sample_space(field: Field, dim: int, trials: int, degree_bound: int):
    """Candidate coefficient vectors for a randomized search.

    Returns ``(iterator factory, sample size, exhaustive)``.  Over F_p with
    p^dim <= EXHAUSTIVE_LIMIT every vector is enumerated; otherwise scalars
    are drawn from a set of at least 2 * degree_bound * trials elements.
    """
    if field.p and field.p**dim <= EXHAUSTIVE_LIMIT:
        def gen(rng):
            return (list(t) for t in itertools.product(range(field.p), repeat=dim))
        return gen, field.p, True
    size = max(2 * max(degree_bound, 1) * max(trials, 1), 2)
    if field.p:
        size = field.p

    def gen(rng):
        for _ in range(trials):
            yield [field(rng.randrange(size)) for _ in range(dim)]

    return gen, size, False


def failure_bound(degree_bound: int, size: int, trials: int) -> Fraction:
    per = Fraction(degree_bound, size) if size else Fraction(1)
    return min(Fraction(1), per) ** trials


def find_iso(c: DgCategory, x: Obj, y: Obj, seed: int = 0, trials: int = 64, h0: H0Category | None = None) -> IsoSearch:
    """Search for an isomorphism x -> y in [C]; every witness is verified."""
    h = h0 or H0Category(c)
    F = c.field
    if x == y:
        u = h.unit_class(x)
        w = IsoWitness(x, x, u, u, c.unit(x), c.unit(x))
        return IsoSearch(w if verify_iso_witness(h, w) else None, 0, None, True, Fraction(0))
    hxy, hyx = h.hom(x, y), h.hom(y, x)
    dims = [h.dim(x, y), h.dim(y, x), h.dim(x, x), h.dim(y, y)]
    if not dims[0] or not dims[1] or dims[2] != dims[3]:
        # no candidate, or End dimensions differ: provably not isomorphic
        return IsoSearch(None, 0, None, True, Fraction(0))
    deg = max(dims)
    gen, size, exhaustive = sample_space(F, dims[0], trials, deg)
    rng = random.Random(seed)
    unit_x = h.unit_class(x)
    n = 0
    # the all-ones class goes first: it is the natural guess for one-dimensional homs
    for u in itertools.chain([[F(1)] * dims[0]], gen(rng)):
        n += 1
        if not any(u):
            continue
        # solve u.v = 1_x for v, linearly in v
        images = []
        for j in range(dims[1]):
            e = [0] * dims[1]
            e[j] = 1
            images.append({k: t for k, t in enumerate(h.compose(x, y, x, u, e)) if t})
        sol = solve_in_span(F, images, {k: t for k, t in enumerate(unit_x) if t})
        if sol is None:
            continue
        v = [F.norm(sol.get(j, 0)) for j in range(dims[1])]
        w = IsoWitness(x, y, u, v, hxy.element(u), hyx.element(v))
        if verify_iso_witness(h, w):
            return IsoSearch(w, n, size, exhaustive, Fraction(0))
    bound = Fraction(0) if exhaustive else failure_bound(deg, size, trials)
    return IsoSearch(None, n, size, exhaustive, bound)


def iso_in_h0(c: DgCategory, x: Obj, y: Obj, seed: int = 0, trials: int = 64) -> IsoWitness | None:
    return find_iso(c, x, y, seed, trials).witness


# quasi-equivalences


@dataclass
class PairDiagnostic:
    x: Obj
    y: Obj
    quasi_iso: bool


def quasi_fully_faithful_report(f: DgFunctor) -> list[PairDiagnostic]:
    out = []
    for x in f.source.objects:
        for y in f.source.objects:
            out.append(PairDiagnostic(x, y, is_quasi_iso(f.chain_map(x, y))))
    return out


def is_quasi_fully_faithful(f: DgFunctor) -> bool:
    return all(p.quasi_iso for p in quasi_fully_faithful_report(f))


def is_quasi_essentially_surjective(f: DgFunctor, seed: int = 0, trials: int = 64) -> bool:
    D = f.target
    h = H0Category(D)
    image = []
    for x in f.source.objects:
        if f(x) not in image:
            image.append(f(x))
    for k, z in enumerate(D.objects):
        if z in image:
            continue
        if not any(find_iso(D, y, z, seed + 7919 * k, trials, h).found for y in image):
            return False
    return True


def is_quasi_equivalence(f: DgFunctor, seed: int = 0, trials: int = 64) -> bool:
    return is_quasi_fully_faithful(f) and is_quasi_essentially_surjective(f, seed, trials)
