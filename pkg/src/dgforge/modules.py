"""dg-modules and bimodules over finite dg-categories.

A module over ``B`` is stored with a right action

    F(x) (x) B(x, y) -> F(y),      m.a

which matches the diagrammatic composition of ``DgCategory``: the axioms are
``(m.a).b = m.(ab)``, ``m.1 = m`` and ``d(m.a) = dm.a + (-1)^|m| m.da`` with no
further signs.  Such a module is a covariant dg-functor B -> C(k), so the
representable ``h^z = B(z, -)`` is a module over B and ``h_x = B(-, x)`` is a
module over B^op.

A bimodule over (C, D) is a module over C (x) D^op.  Its value F(x, y) is best
pictured as arrows y -> x: C post-composes and D pre-composes.  The helpers
``post`` and ``pre`` expose exactly this sign-free "path" view.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .complexes import ChainMap, Complex, ComplexError, direct_sum, is_quasi_iso, quotient_complex, tensor_with_index, tensor_index
from .dgcat import (
    DgCategory,
    DgFunctor,
    H0Category,
    ValidationReport,
    check_complex,
    failure_bound,
    obj_str,
    opposite,
    sample_space,
    tensor_cat,
)
from .linalg import Echelon, Vec, kernel_of, sign, solve_in_span

Obj = Hashable


class DgModule:
    """Per-object complexes F(x) with a right action of the base category."""

    def __init__(
        self,
        base: DgCategory,
        values: dict[Obj, Complex],
        action: dict[tuple[Obj, Obj], dict[tuple[int, int], Vec]],
        name: str = "F",
    ):
        self.base = base
        self.field = base.field
        zero = Complex.zero(base.field)
        self.values = {x: values.get(x, zero) for x in base.objects}
        self.action = {k: {mi: dict(v) for mi, v in t.items() if v} for k, t in action.items()}
        self.name = name

    def __repr__(self) -> str:
        dims = {obj_str(x): c.dim for x, c in self.values.items()}
        return f"{type(self).__name__}({self.name!r}, dims={dims})"

    def __call__(self, x: Obj) -> Complex:
        return self.values[x]

    def act_basis(self, x: Obj, y: Obj, m: int, a: int) -> Vec:
        return self.action.get((x, y), {}).get((m, a), {})

    def act(self, x: Obj, y: Obj, m: Vec, a: Vec) -> Vec:
        F = self.field
        table = self.action.get((x, y))
        out: Vec = {}
        if not table:
            return out
        for i, u in m.items():
            for j, v in a.items():
                r = table.get((i, j))
                if r:
                    F.axpy(out, u * v, r)
        return out

    def total_dim(self) -> int:
        return sum(c.dim for c in self.values.values())

    def cohomology_dims(self) -> dict[Obj, dict[int, int]]:
        return {x: c.cohomology_dims() for x, c in self.values.items()}

    def structurally_equal(self, other: "DgModule") -> bool:
        return (
            self.base.objects == other.base.objects
            and all(self.values[x] == other.values[x] for x in self.values)
            and {k: v for k, v in self.action.items() if v} == {k: v for k, v in other.action.items() if v}
        )

    def degree_bounds(self) -> tuple[int, int] | None:
        degs = [n for c in self.values.values() for n in c.degrees]
        return (min(degs), max(degs)) if degs else None


def validate_module(M: DgModule) -> ValidationReport:
    """Check d^2, degrees, Leibniz, associativity and the unit law."""
    B = M.base
    F = M.field
    rep = ValidationReport(f"module {M.name}")
    for x in B.objects:
        check_complex(rep, M(x), f"{M.name}({obj_str(x)})")
    for x, y in itertools.product(B.objects, repeat=2):
        Mx, My, Bxy = M(x), M(y), B.hom(x, y)
        for (i, j), r in M.action.get((x, y), {}).items():
            rep.checked += 1
            if any(My.degrees[k] != Mx.degrees[i] + Bxy.degrees[j] for k in r):
                rep.fail(f"degree: {Mx.labels[i]}.{Bxy.labels[j]}")
        for i in range(Mx.dim):
            for j in range(Bxy.dim):
                rep.checked += 1
                lhs = My.apply_d(M.act_basis(x, y, i, j))
                F.axpy(lhs, -1, M.act(x, y, Mx.d[i], {j: 1}))
                F.axpy(lhs, -sign(Mx.degrees[i]), M.act(x, y, {i: 1}, Bxy.d[j]))
                if lhs:
                    rep.fail(f"Leibniz: {Mx.labels[i]}.{Bxy.labels[j]} over ({obj_str(x)},{obj_str(y)})")
    for x, y, z in itertools.product(B.objects, repeat=3):
        Mx, Bxy, Byz = M(x), B.hom(x, y), B.hom(y, z)
        if not (Mx.dim and Bxy.dim and Byz.dim):
            continue
        for i in range(Mx.dim):
            for j in range(Bxy.dim):
                ma = M.act_basis(x, y, i, j)
                for k in range(Byz.dim):
                    rep.checked += 1
                    lhs = M.act(y, z, ma, {k: 1})
                    F.axpy(lhs, -1, M.act(x, z, {i: 1}, B.compose_basis(x, y, z, j, k)))
                    if lhs:
                        rep.fail(
                            f"associativity: ({Mx.labels[i]}, {Bxy.labels[j]}, {Byz.labels[k]}) "
                            f"over {obj_str(x)},{obj_str(y)},{obj_str(z)}"
                        )
    for x in B.objects:
        u = B.unit(x)
        for i in range(M(x).dim):
            rep.checked += 1
            if M.act(x, x, {i: 1}, u) != {i: 1}:
                rep.fail(f"unit: {M(x).labels[i]}.1_{obj_str(x)}")
    return rep


def zero_module(base: DgCategory, name: str = "0") -> DgModule:
    return DgModule(base, {}, {}, name)


def module_direct_sum(parts: Sequence[DgModule], name: str = "sum") -> DgModule:
    B = parts[0].base
    values, offsets = {}, {}
    for x in B.objects:
        c, offs = direct_sum([p(x) for p in parts])
        values[x] = c
        offsets[x] = offs
    action = {}
    for x, y in itertools.product(B.objects, repeat=2):
        t = {}
        for k, p in enumerate(parts):
            ox, oy = offsets[x][k], offsets[y][k]
            for (i, j), r in p.action.get((x, y), {}).items():
                t[(ox + i, j)] = {oy + l: v for l, v in r.items()}
        action[(x, y)] = t
    return DgModule(B, values, action, name)


def shift_module(M: DgModule, k: int, name: str | None = None) -> DgModule:
    """M[k]: values shifted, action m.a -> (-1)^{k|a|} m.a (the shift sits on the left)."""
    from .complexes import shift as shift_complex

    B = M.base
    F = M.field
    values = {x: shift_complex(M(x), k) for x in B.objects}
    action = {}
    for (x, y), t in M.action.items():
        Bxy = B.hom(x, y)
        action[(x, y)] = {(i, j): F.scale(sign(k * Bxy.degrees[j]), r) for (i, j), r in t.items()}
    return DgModule(B, values, action, name or f"{M.name}[{k}]")


# module maps and hom complexes


class ModuleMap:
    """Per-object maps f_x: M(x) -> N(x) of a common degree."""

    def __init__(self, source: DgModule, target: DgModule, images: dict[Obj, Sequence[Vec]], degree: int = 0):
        self.source = source
        self.target = target
        self.degree = degree
        self.images = {x: tuple(dict(v) for v in images.get(x, [{}] * source(x).dim)) for x in source.base.objects}

    def apply(self, x: Obj, v: Vec) -> Vec:
        F = self.source.field
        out: Vec = {}
        im = self.images[x]
        for i, c in v.items():
            F.axpy(out, c, im[i])
        return out

    def component(self, x: Obj) -> ChainMap:
        return ChainMap(self.source(x), self.target(x), list(self.images[x]), self.degree, check=False)

    def is_equivalence(self) -> bool:
        return self.degree == 0 and all(is_quasi_iso(self.component(x)) for x in self.source.base.objects)


def validate_module_map(f: ModuleMap) -> ValidationReport:
    M, N = f.source, f.target
    B = M.base
    F = M.field
    rep = ValidationReport(f"module map {M.name} -> {N.name}")
    for x in B.objects:
        rep.checked += 1
        try:
            f.component(x).check()
        except ComplexError as e:
            rep.fail(f"component at {obj_str(x)}: {e}")
    for x, y in itertools.product(B.objects, repeat=2):
        for i in range(M(x).dim):
            for j in range(B.hom(x, y).dim):
                rep.checked += 1
                lhs = f.apply(y, M.act_basis(x, y, i, j))
                F.axpy(lhs, -1, N.act(x, y, f.apply(x, {i: 1}), {j: 1}))
                if lhs:
                    rep.fail(f"linearity: {M(x).labels[i]}.{B.hom(x, y).labels[j]}")
    return rep


@dataclass
class HomComplex:
    """The strict hom complex Hom_B(M, N) with an explicit basis of maps."""

    source: DgModule
    target: DgModule
    complex: Complex
    maps: list[ModuleMap]
    _index: dict = dc_field(repr=False)
    _ech: Echelon = dc_field(repr=False)

    def flatten(self, f: ModuleMap) -> Vec:
        out: Vec = {}
        for x, ims in f.images.items():
            for i, v in enumerate(ims):
                for j, c in v.items():
                    out[self._index[(x, i, j)]] = c
        return out

    def coords(self, f: ModuleMap) -> Vec:
        combo: Vec = {}
        r = self._ech.reduce(self.flatten(f), combo)
        if r:
            raise ValueError("map is not B-linear")
        return combo

    def map_of(self, v: Vec) -> ModuleMap:
        F = self.source.field
        degs = {self.maps[i].degree for i in v}
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        deg = degs.pop() if degs else 0
        images = {x: [dict() for _ in range(self.source(x).dim)] for x in self.source.base.objects}
        for k, c in v.items():
            for x, ims in self.maps[k].images.items():
                for i, im in enumerate(ims):
                    if im:
                        F.axpy(images[x][i], c, im)
        return ModuleMap(self.source, self.target, images, deg)


def hom_complex_modules(M: DgModule, N: DgModule) -> HomComplex:
    """Hom_B(M, N): families f_x with f(m.a) = f(m).a, d f = d o f - (-1)^|f| f o d."""
    B = M.base
    F = M.field
    objs = B.objects
    # global index of elementary maps e_i -> e_j at object x
    index: dict = {}
    entries = []
    for x in objs:
        for i in range(M(x).dim):
            for j in range(N(x).dim):
                index[(x, i, j)] = len(entries)
                entries.append((x, i, j, N(x).degrees[j] - M(x).degrees[i]))
    # constraint coordinates keyed by (x, y, m, a, n)
    ckey: dict = {}

    def key(*k):
        if k not in ckey:
            ckey[k] = len(ckey)
        return ckey[k]

    # where does basis m' of M(w) act into e_i of M(x)?
    hits: dict = {}
    for (w, x), table in M.action.items():
        for (m, a), r in table.items():
            for i, c in r.items():
                hits.setdefault((x, i), []).append((w, m, a, c))
    columns = []
    for x, i, j, deg in entries:
        col: Vec = {}
        # f_y(m.a) term: constraints at (w -> x, m, a) where m.a hits e_i
        for (w, m, a, c) in hits.get((x, i), []):
            k = key(w, x, m, a, j)
            col[k] = F.norm(col.get(k, 0) + c)
        # -f_x(m).a term for m = e_i, any a: x -> y
        for y in objs:
            table = N.action.get((x, y), {})
            for a in range(B.hom(x, y).dim):
                r = table.get((j, a))
                if r:
                    for n, c in r.items():
                        k = key(x, y, i, a, n)
                        col[k] = F.norm(col.get(k, 0) - c)
        columns.append({k: v for k, v in col.items() if v})
    by_deg: dict[int, list[int]] = {}
    for t, e in enumerate(entries):
        by_deg.setdefault(e[3], []).append(t)
    basis: list[Vec] = []
    degrees: list[int] = []
    for deg in sorted(by_deg):
        ids = by_deg[deg]
        for kv in kernel_of(F, [columns[t] for t in ids]):
            basis.append({ids[t]: c for t, c in kv.items()})
            degrees.append(deg)
    ech = Echelon(F, track=True)
    for v in basis:
        ech.add(v)

    # differential of an elementary map, as a flat vector
    def d_flat(v: Vec) -> Vec:
        out: Vec = {}
        for t, c in v.items():
            x, i, j, deg = entries[t]
            for jj, cc in N(x).d[j].items():
                F.axpy(out, c * cc, {index[(x, i, jj)]: 1})
            s = -sign(deg)
            for k in range(M(x).dim):
                cc = M(x).d[k].get(i)
                if cc:
                    F.axpy(out, s * c * cc, {index[(x, k, j)]: 1})
        return out

    d = []
    for v in basis:
        combo: Vec = {}
        r = ech.reduce(d_flat(v), combo)
        if r:
            raise ComplexError("hom complex not closed under d (invalid module)")
        d.append(combo)
    labels = [f"h{k}" for k in range(len(basis))]
    cx = Complex(F, degrees, d, labels)
    maps = []
    for v, deg in zip(basis, degrees):
        images = {x: [dict() for _ in range(M(x).dim)] for x in objs}
        for t, c in v.items():
            x, i, j, _ = entries[t]
            images[x][i][j] = c
        maps.append(ModuleMap(M, N, images, deg))
    return HomComplex(M, N, cx, maps, index, ech)


def compose_maps(f: ModuleMap, g: ModuleMap) -> ModuleMap:
    """g o f (plain composition, no sign)."""
    images = {x: [g.apply(x, v) for v in f.images[x]] for x in f.source.base.objects}
    return ModuleMap(f.source, g.target, images, f.degree + g.degree)


def identity_map(M: DgModule) -> ModuleMap:
    return ModuleMap(M, M, {x: [{i: 1} for i in range(M(x).dim)] for x in M.base.objects})


def module_category(modules: Sequence[DgModule], names: Sequence[Obj] | None = None, name: str = "Mod") -> DgCategory:
    """Full dg-subcategory of modules on the given objects.

    Composition in diagrammatic order carries the Koszul sign
    ``(f, g) -> (-1)^{|f||g|} g o f``.
    """
    F = modules[0].field
    names = list(names) if names is not None else [m.name for m in modules]
    hc = {}
    for (a, M), (b, N) in itertools.product(zip(names, modules), repeat=2):
        hc[(a, b)] = hom_complex_modules(M, N)
    homs = {k: v.complex for k, v in hc.items()}
    comp = {}
    for a, b, c in itertools.product(names, repeat=3):
        h1, h2, h3 = hc[(a, b)], hc[(b, c)], hc[(a, c)]
        table = {}
        for i, f in enumerate(h1.maps):
            for j, g in enumerate(h2.maps):
                v = h3.coords(compose_maps(f, g))
                if v:
                    table[(i, j)] = F.scale(sign(f.degree * g.degree), v)
        comp[(a, b, c)] = table
    units = {a: hc[(a, a)].coords(identity_map(M)) for a, M in zip(names, modules)}
    cat = DgCategory(F, names, homs, comp, units, name)
    cat.hom_data = hc
    return cat


# representables


def yoneda_left(C: DgCategory, z: Obj) -> DgModule:
    """h^z = C(z, -) as a module over C, acting by composition."""
    values = {x: C.hom(z, x) for x in C.objects}
    action = {(x, y): C.comp.get((z, x, y), {}) for x in C.objects for y in C.objects}
    return DgModule(C, values, action, f"h^{obj_str(z)}")


def yoneda_right(C: DgCategory, x: Obj, Cop: DgCategory | None = None) -> DgModule:
    """h_x = C(-, x) as a module over C^op."""
    M = yoneda_left(Cop or opposite(C), x)
    M.name = f"h_{obj_str(x)}"
    return M


# bimodules


_BASES: dict = {}


def bimodule_base(C: DgCategory, D: DgCategory) -> DgCategory:
    key = (id(C), id(D))
    hit = _BASES.get(key)
    if hit is None or hit[0] is not C or hit[1] is not D:
        base = tensor_cat(C, opposite(D), name=f"{C.name}*{D.name}^op")
        hit = (C, D, base)
        _BASES[key] = hit
    return hit[2]


class DgBimodule(DgModule):
    """A module over C (x) D^op, viewed as F(x, y) for x in C, y in D."""

    def __init__(self, left: DgCategory, right: DgCategory, values, action, name: str = "F", base: DgCategory | None = None):
        super().__init__(base or bimodule_base(left, right), values, action, name)
        self.left = left
        self.right = right
        self._tidx: dict = {}

    def at(self, x: Obj, y: Obj) -> Complex:
        return self.values[(x, y)]

    def _ti(self, x, y, x2, y2):
        k = (x, y, x2, y2)
        if k not in self._tidx:
            self._tidx[k] = tensor_index(self.left.hom(x, x2), self.right.hom(y2, y))
        return self._tidx[k]

    def post(self, x: Obj, y: Obj, x2: Obj, m: Vec, a: Vec) -> Vec:
        """m then a: F(x, y) (x) C(x, x2) -> F(x2, y)."""
        ti = self._ti(x, y, x2, y)
        F = self.field
        u = self.right.unit(y)
        el: Vec = {}
        for i, c in a.items():
            for j, e in u.items():
                el[ti(i, j)] = F.norm(c * e)
        return self.act((x, y), (x2, y), m, el)

    def pre(self, y2: Obj, x: Obj, y: Obj, b: Vec, m: Vec) -> Vec:
        """b then m: D(y2, y) (x) F(x, y) -> F(x, y2)."""
        ti = self._ti(x, y, x, y2)
        F = self.field
        u = self.left.unit(x)
        Dh, Fh = self.right.hom(y2, y), self.at(x, y)
        out: Vec = {}
        for j, c in b.items():
            el = {ti(i, j): e for i, e in u.items()}
            for k, mc in m.items():
                s = sign(Dh.degrees[j] * Fh.degrees[k])
                r = self.act((x, y), (x, y2), {k: 1}, el)
                if r:
                    F.axpy(out, s * c * mc, r)
        return out

    @classmethod
    def from_paths(
        cls,
        C: DgCategory,
        D: DgCategory,
        values: dict[tuple[Obj, Obj], Complex],
        post: Callable[[Obj, Obj, Obj, int, int], Vec],
        pre: Callable[[Obj, Obj, Obj, int, int], Vec],
        name: str = "F",
    ) -> "DgBimodule":
        """Assemble from the path-view actions on basis elements.

        ``post(x, y, x2, m, a)`` is m then a in F(x2, y); ``pre(y2, x, y, b, m)``
        is b then m in F(x, y2).
        """
        F = C.field
        base = bimodule_base(C, D)
        zero = Complex.zero(F)
        vals = {o: values.get(o, zero) for o in base.objects}
        action = {}
        for (x, y), (x2, y2) in itertools.product(base.objects, repeat=2):
            src, mid = vals[(x, y)], vals[(x2, y)]
            Ch, Dh = C.hom(x, x2), D.hom(y2, y)
            if not (src.dim and Ch.dim and Dh.dim):
                continue
            ti = tensor_index(Ch, Dh)
            table = {}
            for m in range(src.dim):
                for a in range(Ch.dim):
                    u = post(x, y, x2, m, a)
                    if not u:
                        continue
                    for b in range(Dh.dim):
                        out: Vec = {}
                        for k, c in u.items():
                            s = sign(mid.degrees[k] * Dh.degrees[b])
                            r = pre(y2, x2, y, b, k)
                            if r:
                                F.axpy(out, s * c, r)
                        if out:
                            table[(m, ti(a, b))] = out
            action[((x, y), (x2, y2))] = table
        return cls(C, D, vals, action, name, base)

    def column(self, x: Obj) -> DgModule:
        return restrict_at(self, x)


def phi(f: DgFunctor, name: str | None = None) -> DgBimodule:
    """The bimodule (x, y) -> D(y, f x) of a dg-functor f: C -> D."""
    C, D = f.source, f.target
    values = {(x, y): D.hom(y, f(x)) for x in C.objects for y in D.objects}

    def post(x, y, x2, m, a):
        return D.compose(y, f(x), f(x2), {m: 1}, f.maps[(x, x2)][a])

    def pre(y2, x, y, b, m):
        return D.compose_basis(y2, y, f(x), b, m)

    return DgBimodule.from_paths(C, D, values, post, pre, name or f"phi({f.name})")


def diagonal(C: DgCategory) -> DgBimodule:
    return phi(DgFunctor.identity(C), name=f"diag({C.name})")


def representable_bimodule(U: DgCategory, C: DgCategory, b: Obj, name: str | None = None) -> DgBimodule:
    """h_b as a bimodule over (U, C) for a one-object U with End = k: F(*, y) = C(y, b)."""
    (u,) = U.objects
    if U.hom(u, u).dim != 1:
        raise ValueError("U must have End = k")
    F = C.field
    scale = F.inv(U.unit(u)[0])
    values = {(u, y): C.hom(y, b) for y in C.objects}

    def post(x, y, x2, m, a):
        return {m: scale}

    def pre(y2, x, y, b2, m):
        return C.compose_basis(y2, y, b, b2, m)

    return DgBimodule.from_paths(U, C, values, post, pre, name or f"h_{obj_str(b)}")


def restrict_at(F: DgBimodule, x: Obj) -> DgModule:
    """The column F(x, -) as a module over D^op."""
    D = F.right
    Dop = opposite(D)
    values = {y: F.at(x, y) for y in D.objects}
    action = {}
    for y, y2 in itertools.product(D.objects, repeat=2):
        Dh = D.hom(y2, y)
        table = {}
        for m in range(F.at(x, y).dim):
            for b in range(Dh.dim):
                el = {}
                ti = F._ti(x, y, x, y2)
                for i, e in F.left.unit(x).items():
                    el[ti(i, b)] = e
                r = F.act((x, y), (x, y2), {m: 1}, el)
                if r:
                    table[(m, b)] = r
        action[(y, y2)] = table
    return DgModule(Dop, values, action, f"{F.name}({obj_str(x)},-)")


def restrict_along(f: DgFunctor, G: DgModule) -> DgModule:
    """f^* G = G o f over the source of f."""
    C = f.source
    values = {x: G(f(x)) for x in C.objects}
    action = {}
    for x, y in itertools.product(C.objects, repeat=2):
        table = {}
        for m in range(G(f(x)).dim):
            for a, fa in enumerate(f.maps[(x, y)]):
                r = G.act(f(x), f(y), {m: 1}, fa)
                if r:
                    table[(m, a)] = r
        action[(x, y)] = table
    return DgModule(C, values, action, f"{f.name}^*{G.name}")


def induct_along(f: DgFunctor, M: DgModule) -> DgModule:
    """f_! M: the coequalizer of (+) M(x) C(x,y) D(fy,d) => (+) M(x) D(fx,d)."""
    C, D = f.source, f.target
    Fld = M.field
    values, quots, layouts = {}, {}, {}
    for d in D.objects:
        parts, tis = [], []
        for x in C.objects:
            t, ti = tensor_with_index(M(x), D.hom(f(x), d))
            parts.append(t)
            tis.append(ti)
        if parts:
            total, offs = direct_sum(parts)
        else:
            total, offs = Complex.zero(Fld), []
        pos = {x: k for k, x in enumerate(C.objects)}

        def vec(x, mvec, evec, offs=offs, tis=tis):
            out: Vec = {}
            k = pos[x]
            for i, a in mvec.items():
                for j, b in evec.items():
                    t = offs[k] + tis[k](i, j)
                    out[t] = Fld.norm(out.get(t, 0) + a * b)
            return {t: v for t, v in out.items() if v}

        rel = []
        for x, y in itertools.product(C.objects, repeat=2):
            for m in range(M(x).dim):
                for a in range(C.hom(x, y).dim):
                    ma = M.act_basis(x, y, m, a)
                    fa = f.maps[(x, y)][a]
                    for e in range(D.hom(f(y), d).dim):
                        r = vec(y, ma, {e: 1})
                        Fld.axpy(r, -1, vec(x, {m: 1}, D.compose(f(x), f(y), d, fa, {e: 1})))
                        if r:
                            rel.append(r)
        q = quotient_complex(total, rel)
        values[d] = q.complex
        quots[d] = q
        layouts[d] = (offs, tis)
    # action of D on lifts, then normal form
    action = {}
    for d, d2 in itertools.product(D.objects, repeat=2):
        offs, tis = layouts[d]
        offs2, tis2 = layouts[d2]
        table = {}
        for k, g in enumerate(quots[d].keep):
            # locate the summand and the pair (m, e)
            xi = max(i for i in range(len(offs)) if offs[i] <= g)
            x = C.objects[xi]
            m, e = tis[xi].pairs[g - offs[xi]]
            for b in range(D.hom(d, d2).dim):
                eb = D.compose_basis(f(x), d, d2, e, b)
                if not eb:
                    continue
                lift = {offs2[xi] + tis2[xi](m, j): c for j, c in eb.items()}
                r = quots[d2].project(lift)
                if r:
                    table[(k, b)] = r
        action[(d, d2)] = table
    return DgModule(D, values, action, f"{f.name}_!{M.name}")


# quasi-representability


@dataclass
class ColumnWitness:
    x: Obj
    y: Obj
    coords: list
    cocycle: Vec


@dataclass
class QrWitness:
    """For each x in C an object y_x of D and a class c_x in H^0 F(x, y_x)."""

    columns: dict[Obj, ColumnWitness]

    def object_map(self) -> dict[Obj, Obj]:
        return {x: w.y for x, w in self.columns.items()}


def induced_yoneda_map(col: DgModule, y: Obj, c: Vec) -> ModuleMap:
    """h_y -> col, m -> c.m, for a degree-0 cocycle c in col(y) (col over D^op)."""
    Dop = col.base
    h = yoneda_left(Dop, y)
    images = {z: [col.act(y, z, c, {m: 1}) for m in range(h(z).dim)] for z in Dop.objects}
    return ModuleMap(h, col, images)


def verify_column_witness(col: DgModule, y: Obj, c: Vec) -> bool:
    Cy = col(y)
    if any(Cy.degrees[i] != 0 for i in c) or Cy.apply_d(c):
        return False
    return induced_yoneda_map(col, y, c).is_equivalence()


def verify_qr_witness(F: DgBimodule, w: QrWitness) -> bool:
    if set(w.columns) != set(F.left.objects):
        return False
    for x, cw in w.columns.items():
        if not verify_column_witness(restrict_at(F, x), cw.y, cw.cocycle):
            return False
    return True


@dataclass
class QrSearch:
    witness: QrWitness | None
    failed_column: Obj | None
    failure_bound: Fraction
    notes: list[str] = dc_field(default_factory=list)


def _graded_profile(M: DgModule) -> dict:
    return {x: M(x).cohomology_dims() for x in M.base.objects}


def search_column(col: DgModule, candidates: Sequence[Obj], rng: random.Random, trials: int) -> tuple[ColumnWitness | None, Fraction]:
    """Find y and c in H^0 col(y) whose Yoneda map h_y -> col is a quasi-iso."""
    Dop = col.base
    Fld = col.field
    prof = _graded_profile(col)
    worst = Fraction(0)
    for y in candidates:
        h = yoneda_left(Dop, y)
        if _graded_profile(h) != prof:
            continue
        H = col(y).cohomology(0)
        if not H.dim:
            continue
        degree_bound = sum(sum(v.values()) for v in prof.values())
        gen, size, exhaustive = sample_space(Fld, H.dim, trials, degree_bound)
        # basis classes first: a unit of a degree-0 hom is one of them
        basis = [] if exhaustive else [[Fld(int(i == j)) for i in range(H.dim)] for j in range(H.dim)]
        for coords in itertools.chain(basis, gen(rng)):
            if not any(coords):
                continue
            c = H.element(coords)
            if verify_column_witness(col, y, c):
                return ColumnWitness(None, y, list(coords), c), Fraction(0)
        if not exhaustive:
            worst = max(worst, failure_bound(degree_bound, size, trials))
    return None, worst


def qr_search(
    F: DgBimodule,
    seed: int = 0,
    trials: int = 64,
    candidates: dict[Obj, Sequence[Obj]] | None = None,
) -> QrSearch:
    """Right quasi-representability search with per-column derived seeds."""
    cols = {}
    for k, x in enumerate(F.left.objects):
        col = restrict_at(F, x)
        cands = (candidates or {}).get(x, F.right.objects)
        rng = random.Random(seed * 1000003 + k)
        w, bound = search_column(col, cands, rng, trials)
        if w is None:
            return QrSearch(None, x, bound, [f"no quasi-isomorphism h_y -> {F.name}({obj_str(x)},-) found"])
        w.x = x
        cols[x] = w
    return QrSearch(QrWitness(cols), None, Fraction(0))


def qr_test(F: DgBimodule, seed: int = 0, trials: int = 64, candidates=None) -> QrWitness | None:
    return qr_search(F, seed, trials, candidates).witness


@dataclass
class H0Functor:
    """Object map and the induced maps [C](x, x') -> [D](y_x, y_x')."""

    obj_map: dict[Obj, Obj]
    maps: dict[tuple[Obj, Obj], list[list]]


def qr_to_h0_functor(F: DgBimodule, w: QrWitness) -> H0Functor:
    C, D = F.left, F.right
    Fld = F.field
    hC, hD = H0Category(C), H0Category(D)
    om = w.object_map()
    maps = {}
    for x, x2 in itertools.product(C.objects, repeat=2):
        y, y2 = om[x], om[x2]
        c, c2 = w.columns[x].cocycle, w.columns[x2].cocycle
        target = F.at(x2, y).cohomology(0)
        # c2 . g for each basis class g of [D](y, y2), as classes in H^0 F(x2, y)
        gens = []
        for rep in hD.hom(y, y2).reps:
            v = F.pre(y, x2, y2, rep, c2)
            gens.append({k: t for k, t in enumerate(target.coords(v)) if t})
        images = []
        for rep in hC.hom(x, x2).reps:
            v = F.post(x, y, x2, c, rep)
            goal = {k: t for k, t in enumerate(target.coords(v)) if t}
            sol = solve_in_span(Fld, gens, goal)
            if sol is None:
                raise ValueError("witness does not induce a functor (unverified witness?)")
            images.append([Fld.norm(sol.get(j, 0)) for j in range(len(gens))])
        maps[(x, x2)] = images
    return H0Functor(om, maps)
