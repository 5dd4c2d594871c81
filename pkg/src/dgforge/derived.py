"""Truncated bar resolutions and the derived functors built on them.

Every resolution here is semi-free: a list of generators g sitting at objects
x_g, with d(g) = sum c * g'.b for base elements b.  Two consumers exist:

* ``SemiFree.materialize`` turns the data into an honest ``DgModule`` (used to
  validate signs and for small inputs);
* ``hom_from_semifree`` builds Hom_B(P, N) directly on generators, which is
  the only feasible route for Hochschild cochains of larger algebras.

Bar words are written in the sign-free path picture: a word
``p_0 [p_1 | ... | p_s] p_{s+1}`` reads left to right as composable arrows.
Suspended letters count with degree |a| - 1.  Merging letter k into a
suspended letter k+1 carries (-1)^(prefix through k); merging the last
suspended letter into the free end carries -(-1)^(prefix before it).
Differentiating a suspended letter carries -(-1)^(prefix before it), an
unsuspended one (-1)^(prefix before it).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from typing import Hashable, Sequence

from .complexes import ChainMap, Complex, ComplexError, cone, direct_sum, quotient_complex, tensor_index
from .dgcat import DgCategory, DgFunctor, H0Category, obj_str, opposite, sample_space
from .linalg import Field, Vec, sign
from .modules import (
    DgBimodule,
    DgModule,
    ModuleMap,
    bimodule_base,
    diagonal,
    phi,
)

Obj = Hashable


# normalized letters


class Letters:
    """Normalized hom complexes: B(x, y) for x != y, B(x, x) / k.1_x otherwise.

    Letters are original basis indices; products and differentials are
    reduced modulo the unit.
    """

    def __init__(self, B: DgCategory):
        self.B = B
        self.keep: dict[tuple[Obj, Obj], list[int]] = {}
        self._q = {}
        for x in B.objects:
            for y in B.objects:
                h = B.hom(x, y)
                if x == y and B.unit(x):
                    q = quotient_complex(h, [B.unit(x)])
                    self._q[x] = q
                    self.keep[(x, y)] = list(q.keep)
                else:
                    self.keep[(x, y)] = list(range(h.dim))

    def project(self, x: Obj, y: Obj, v: Vec) -> Vec:
        if x == y and x in self._q:
            q = self._q[x]
            return {q.keep[k]: c for k, c in q.project(v).items()}
        return v

    def d(self, x: Obj, y: Obj, i: int) -> Vec:
        return self.project(x, y, self.B.hom(x, y).d[i])

    def product(self, x: Obj, y: Obj, z: Obj, i: int, j: int) -> Vec:
        return self.project(x, z, self.B.compose_basis(x, y, z, i, j))

    def degree(self, x: Obj, y: Obj, i: int) -> int:
        return self.B.hom(x, y).degrees[i]

    def max_degree(self) -> int | None:
        degs = [self.degree(x, y, i) for (x, y), ks in self.keep.items() for i in ks]
        return max(degs) if degs else None

    def chains(self, s: int, start: Obj | None = None):
        """All letter chains of length s as tuples ((x0, x1, a1), ...)."""
        if s == 0:
            yield ()
            return
        starts = [start] if start is not None else list(self.B.objects)
        for x0 in starts:
            for x1 in self.B.objects:
                for a in self.keep[(x0, x1)]:
                    for rest in self.chains(s - 1, x1):
                        yield ((x0, x1, a),) + rest


def _chain_degree(L: Letters, chain) -> int:
    return sum(L.degree(x, y, a) - 1 for x, y, a in chain)


# semi-free modules


@dataclass
class SemiFree:
    """Generators at objects of ``base`` with d(g) = sum c g'.b."""

    base: DgCategory
    objects: list = dc_field(default_factory=list)
    degrees: list[int] = dc_field(default_factory=list)
    labels: list[str] = dc_field(default_factory=list)
    stages: list[int] = dc_field(default_factory=list)
    diff: list[list[tuple]] = dc_field(default_factory=list)

    def add(self, obj: Obj, degree: int, label: str, stage: int = 0) -> int:
        self.objects.append(obj)
        self.degrees.append(degree)
        self.labels.append(label)
        self.stages.append(stage)
        self.diff.append([])
        return len(self.objects) - 1

    def __len__(self) -> int:
        return len(self.objects)

    def truncate(self, length: int) -> "SemiFree":
        keep = [g for g in range(len(self)) if self.stages[g] < length]
        pos = {g: k for k, g in enumerate(keep)}
        out = SemiFree(self.base)
        for g in keep:
            out.add(self.objects[g], self.degrees[g], self.labels[g], self.stages[g])
            out.diff[-1] = [(c, pos[h], b) for c, h, b in self.diff[g]]
        return out

    def layout(self) -> dict[Obj, list[tuple[int, int]]]:
        """Basis of P(z): pairs (g, b) with b a basis element of B(x_g, z)."""
        B = self.base
        out = {}
        for z in B.objects:
            out[z] = [(g, b) for g in range(len(self)) for b in range(B.hom(self.objects[g], z).dim)]
        return out

    def materialize(self, name: str = "P") -> DgModule:
        B = self.base
        F = B.field
        lay = self.layout()
        pos = {z: {p: k for k, p in enumerate(ps)} for z, ps in lay.items()}
        values = {}
        for z in B.objects:
            degs, d, labels = [], [], []
            for g, b in lay[z]:
                x = self.objects[g]
                h = B.hom(x, z)
                degs.append(self.degrees[g] + h.degrees[b])
                labels.append(f"{self.labels[g]}.{h.labels[b]}")
                out: Vec = {}
                for c, g2, beta in self.diff[g]:
                    x2 = self.objects[g2]
                    for k, v in B.compose(x2, x, z, beta, {b: 1}).items():
                        t = pos[z][(g2, k)]
                        out[t] = F.norm(out.get(t, 0) + c * v)
                s = sign(self.degrees[g])
                for k, v in h.d[b].items():
                    t = pos[z][(g, k)]
                    out[t] = F.norm(out.get(t, 0) + s * v)
                d.append({t: v for t, v in out.items() if v})
            values[z] = Complex(F, degs, d, labels, check=False)
        action = {}
        for z, z2 in itertools.product(B.objects, repeat=2):
            table = {}
            for k, (g, b) in enumerate(lay[z]):
                x = self.objects[g]
                for a in range(B.hom(z, z2).dim):
                    r = B.compose_basis(x, z, z2, b, a)
                    if r:
                        table[(k, a)] = {pos[z2][(g, j)]: v for j, v in r.items()}
            action[(z, z2)] = table
        return DgModule(B, values, action, name)


def hom_from_semifree(P: SemiFree, N: DgModule, labels: bool = False, top: float = float("inf")) -> Complex:
    """Hom_B(P, N): a map f is its family of values f(g) in N(x_g).

    (df)(g) = d f(g) - (-1)^|f| f(d g), with f(g'.b) = f(g').b.

    With a finite ``top`` only cochains of degree <= top + 1 are kept and the
    differential is left empty in degree top + 1, so the result is only good
    for cohomology in degrees <= top.
    """
    F = N.field
    index = {}
    entries = []
    for g in range(len(P)):
        Ng = N(P.objects[g])
        for n in range(Ng.dim):
            deg = Ng.degrees[n] - P.degrees[g]
            if deg <= top + 1:
                index[(g, n)] = len(entries)
                entries.append((g, n, deg))
    users: dict[int, list] = {}
    for g2, terms in enumerate(P.diff):
        for c, g, beta in terms:
            users.setdefault(g, []).append((g2, c, beta))
    cache: dict = {}
    d = []
    for g, n, deg in entries:
        if deg > top:
            d.append({})
            continue
        x = P.objects[g]
        col: Vec = {}
        for k, v in N(x).d[n].items():
            col[index[(g, k)]] = v
        s = -sign(deg)
        for g2, c, beta in users.get(g, ()):
            x2 = P.objects[g2]
            key = (x, x2, n, id(beta))
            r = cache.get(key)
            if r is None:
                r = N.act(x, x2, {n: 1}, beta)
                cache[key] = r
            for k, v in r.items():
                t = index[(g2, k)]
                col[t] = F.norm(col.get(t, 0) + s * c * v)
        d.append({t: v for t, v in col.items() if v})
    labs = None
    if labels:
        labs = [f"{P.labels[g]}->{N(P.objects[g]).labels[n]}" for g, n, _ in entries]
    return Complex(F, [e[2] for e in entries], d, labs, check=False)


# truncation bookkeeping


@dataclass
class TruncationReport:
    length: int
    window: tuple[int, int] | None
    stabilized: bool | None = None
    notes: list[str] = dc_field(default_factory=list)

    def contains(self, n: int) -> bool:
        return self.window is not None and self.window[0] <= n <= self.window[1]

    def describe(self) -> str:
        w = "empty" if self.window is None else f"[{self.window[0]}, {self.window[1]}]"
        s = {None: "not checked", True: "yes", False: "no"}[self.stabilized]
        return f"bar length {self.length}, guaranteed window {w}, stabilized {s}"


def _tail_bound(length: int, top: int, a_max: int | None) -> float:
    """Upper bound on degrees of bar words with at least ``length`` letters."""
    if a_max is None:
        return float("-inf")
    if a_max > 1:
        return float("inf")
    return top + length * (a_max - 1)


def _degree_span(values) -> tuple[int, int] | None:
    degs = [n for c in values for n in c.degrees]
    return (min(degs), max(degs)) if degs else None


# one-sided bar resolution of a module


@dataclass
class BarData:
    module: DgModule
    length: int
    semifree: SemiFree
    augmentation: list[Vec]
    window: tuple[float, float]

    def materialize(self) -> DgModule:
        return self.semifree.materialize(f"bar({self.module.name})")

    def augmentation_map(self, P: DgModule | None = None) -> ModuleMap:
        P = P or self.materialize()
        M = self.module
        lay = self.semifree.layout()
        images = {}
        for z, basis in lay.items():
            ims = []
            for g, b in basis:
                e = self.augmentation[g]
                ims.append(M.act(self.semifree.objects[g], z, e, {b: 1}) if e else {})
            images[z] = ims
        return ModuleMap(P, M, images)

    def exact_in_window(self) -> bool:
        """Cone of the augmentation is acyclic in the guaranteed window."""
        P = self.materialize()
        aug = self.augmentation_map(P)
        lo = self.window[0]
        for z in self.module.base.objects:
            c = cone(aug.component(z))
            for n in c.support:
                if n >= lo and c.cohomology_dim(n):
                    return False
        return True


def bar_resolution(M: DgModule, length: int, letters: Letters | None = None) -> BarData:
    """Normalized bar resolution of a right module, words of < length letters."""
    if length < 1:
        raise ValueError("bar length must be at least 1")
    B = M.base
    F = M.field
    L = letters or Letters(B)
    P = SemiFree(B)
    ids: dict = {}
    words = []
    for s in range(length):
        for x0 in B.objects:
            Mx = M(x0)
            for chain in L.chains(s, x0):
                for m in range(Mx.dim):
                    top = chain[-1][1] if chain else x0
                    deg = Mx.degrees[m] + _chain_degree(L, chain)
                    lab = Mx.labels[m] + "[" + "|".join(B.hom(x, y).labels[a] for x, y, a in chain) + "]"
                    ids[(m, x0, chain)] = P.add(top, deg, lab, s)
                    words.append((m, x0, chain))
    unit_cache = {x: B.unit(x) for x in B.objects}
    letter_vecs: dict = {}  # shared dicts let hom_from_semifree cache actions
    for g, (m, x0, chain) in enumerate(words):
        s = len(chain)
        Mx = M(x0)
        top = P.objects[g]
        # prefix[k]: total degree through letter k (letter 0 is m)
        prefix = [Mx.degrees[m]]
        for x, y, a in chain:
            prefix.append(prefix[-1] + L.degree(x, y, a) - 1)
        terms: dict = {}

        def put(c, key, beta_obj):
            gid = ids[key]
            terms.setdefault((gid, beta_obj), 0)
            terms[(gid, beta_obj)] = F.norm(terms[(gid, beta_obj)] + c)

        for k, c in Mx.d[m].items():
            put(c, (k, x0, chain), None)
        for j, (x, y, a) in enumerate(chain, start=1):
            sg = -sign(prefix[j - 1])
            for a2, c in L.d(x, y, a).items():
                put(sg * c, (m, x0, chain[: j - 1] + ((x, y, a2),) + chain[j:]), None)
        if s >= 1:
            x, y, a = chain[0]
            sg = sign(prefix[0])
            for m2, c in M.act_basis(x0, y, m, a).items():
                put(sg * c, (m2, y, chain[1:]), None)
        for j in range(1, s):
            (x, y, a), (_, z, b) = chain[j - 1], chain[j]
            sg = sign(prefix[j])
            for ab, c in L.product(x, y, z, a, b).items():
                put(sg * c, (m, x0, chain[: j - 1] + ((x, z, ab),) + chain[j + 1 :]), None)
        diff = []
        for (gid, beta), c in terms.items():
            if c:
                diff.append((c, gid, unit_cache[top]))
        if s >= 1:
            x, y, a = chain[-1]
            beta = letter_vecs.setdefault((x, y, a), {a: 1})
            diff.append((-sign(prefix[s - 1]), ids[(m, x0, chain[:-1])], beta))
        P.diff[g] = diff
    aug = [({m: 1} if not chain else {}) for (m, x0, chain) in words]
    span = _degree_span(M.values.values())
    bspan = B.degree_bounds()
    top = (span[1] if span else 0) + max(bspan[1] if bspan else 0, 0)
    tail = _tail_bound(length, top, L.max_degree())
    return BarData(M, length, P, aug, (tail + 1, float("inf")))


# derived hom


def _window_from_cochains(c: Complex, upper: float, reach: int | None = None) -> tuple[int, int] | None:
    """Degrees where truncated cochains compute the full answer.

    With no tail at all (upper infinite) the window extends to ``reach``.
    """
    sup = c.support
    if not sup:
        return None
    lo = sup[0]
    if upper == float("inf"):
        hi = max(sup[-1], reach if reach is not None else sup[-1])
    elif upper == float("-inf"):
        return None
    else:
        hi = upper
    if hi < lo:
        return None
    return (lo, int(hi))


def _cochain_upper(length: int, n_min: int, m_max: int, a_max: int | None) -> float:
    """Largest n with H^n of the truncated cochains guaranteed correct."""
    if a_max is None:
        return float("inf")
    if a_max > 1:
        return float("-inf")
    return n_min - m_max + length * (1 - a_max) - 2


@dataclass
class DerivedResult:
    complex: Complex
    report: TruncationReport

    def dims(self) -> dict[int, int]:
        """H^n dimensions inside the guaranteed window."""
        w = self.report.window
        if w is None:
            return {}
        return {n: self.complex.cohomology_dim(n) for n in range(w[0], w[1] + 1)}


def rhom(M: DgModule, N: DgModule, length: int, stabilize: bool = False, bar: BarData | None = None) -> DerivedResult:
    """RHom_B(M, N) as Hom_B(bar(M), N); a precomputed ``bar`` of M may be passed."""
    if M.base is not N.base and not M.base.structurally_equal(N.base):
        raise ValueError("modules over different base categories")
    L = Letters(M.base)
    if bar is None or bar.length != length or bar.module is not M:
        bar = bar_resolution(M, length, L)
    ms, ns = _degree_span(M.values.values()), _degree_span(N.values.values())
    upper = float("inf") if not ms or not ns else _cochain_upper(length, ns[0], ms[1], L.max_degree())
    c = hom_from_semifree(bar.semifree, N, top=upper)
    rep = TruncationReport(length, _window_from_cochains(c, upper))
    out = DerivedResult(c, rep)
    if stabilize:
        _stabilize(out, lambda: rhom(M, N, length + 1).complex)
    return out


def _stabilize(res: DerivedResult, rerun) -> None:
    w = res.report.window
    if w is None:
        res.report.stabilized = None
        return
    c2 = rerun()
    res.report.stabilized = all(
        res.complex.cohomology_dim(n) == c2.cohomology_dim(n) for n in range(w[0], w[1] + 1)
    )


# Hochschild cochains via the two-sided bar resolution of the diagonal


def diagonal_bar(C: DgCategory, length: int, letters: Letters | None = None) -> SemiFree:
    """Two-sided normalized bar of C, semi-free over C (x) C^op.

    The word [a_1|...|a_s] along x_0 -> ... -> x_s sits at (x_s, x_0).
    """
    F = C.field
    L = letters or Letters(C)
    base = bimodule_base(C, C)
    P = SemiFree(base)
    ids = {}
    words = []
    for s in range(length):
        if s == 0:
            for x in C.objects:
                ids[("id", x)] = P.add((x, x), 0, "[]", 0)
                words.append(("id", x))
            continue
        for chain in L.chains(s):
            x0, xs = chain[0][0], chain[-1][1]
            lab = "[" + "|".join(C.hom(x, y).labels[a] for x, y, a in chain) + "]"
            ids[chain] = P.add((xs, x0), _chain_degree(L, chain), lab, s)
            words.append(chain)
    tis: dict = {}
    betas: dict = {}

    def tidx(x, y, x2, y2):
        k = (x, y, x2, y2)
        if k not in tis:
            tis[k] = tensor_index(C.hom(x, x2), C.hom(y2, y))
        return tis[k]

    for g, w in enumerate(words):
        if w[0] == "id":
            continue
        chain = w
        s = len(chain)
        x0, xs = chain[0][0], chain[-1][1]
        prefix = [0]
        for x, y, a in chain:
            prefix.append(prefix[-1] + L.degree(x, y, a) - 1)
        terms: dict = {}

        def put(c, ch):
            gid = ids[ch]
            terms[gid] = F.norm(terms.get(gid, 0) + c)

        for j, (x, y, a) in enumerate(chain, start=1):
            sg = -sign(prefix[j - 1])
            for a2, c in L.d(x, y, a).items():
                put(sg * c, chain[: j - 1] + ((x, y, a2),) + chain[j:])
        for j in range(1, s):
            (x, y, a), (_, z, b) = chain[j - 1], chain[j]
            sg = sign(prefix[j])
            for ab, c in L.product(x, y, z, a, b).items():
                put(sg * c, chain[: j - 1] + ((x, z, ab),) + chain[j + 1 :])
        here = betas.setdefault(("unit", xs, x0), _unit_pair(C, tidx, xs, x0))
        diff = [(c, gid, here) for gid, c in terms.items() if c]
        # a_1 absorbed by the free start: pre(a_1, g') = (-1)^{|g'||a_1|} g'.(1 (x) a_1)
        x, y, a = chain[0]
        rest = chain[1:]
        g1 = ids[rest] if rest else ids[("id", y)]
        deg_rest = prefix[s] - prefix[1]
        ti = tidx(xs, y, xs, x0)
        beta = betas.setdefault(("pre", xs, y, x0, a), {ti(i, a): u for i, u in C.unit(xs).items()})
        diff.append((sign(deg_rest * L.degree(x, y, a)), g1, beta))
        # a_s absorbed by the free end: post(g'', a_s) = g''.(a_s (x) 1)
        x, y, a = chain[-1]
        front = chain[:-1]
        g2 = ids[front] if front else ids[("id", x0)]
        ti = tidx(x, x0, xs, x0)
        beta = betas.setdefault(("post", x, x0, xs, a), {ti(a, j): u for j, u in C.unit(x0).items()})
        diff.append((-sign(prefix[s - 1]), g2, beta))
        P.diff[g] = diff
    return P


def _unit_pair(C, tidx, x, y) -> Vec:
    ti = tidx(x, y, x, y)
    return {ti(i, j): u * v for i, u in C.unit(x).items() for j, v in C.unit(y).items()}


@dataclass
class HochschildResult:
    dims: dict[int, int]
    report: TruncationReport
    complex: Complex


def hochschild_complex(C: DgCategory, length: int, reach: int | None = None) -> tuple[Complex, TruncationReport]:
    L = Letters(C)
    P = diagonal_bar(C, length, L)
    D = diagonal(C)
    bounds = C.degree_bounds()
    upper = float("inf") if not bounds else _cochain_upper(length, bounds[0], 0, L.max_degree())
    c = hom_from_semifree(P, D, top=upper)
    return c, TruncationReport(length, _window_from_cochains(c, upper, reach))


def hochschild(
    C: DgCategory, i_max: int, length: int | None = None, i_min: int = 0, stabilize: bool = False
) -> HochschildResult:
    """dim HH^i(C) for i_min <= i <= i_max inside the guaranteed window."""
    length = length if length is not None else i_max + 2
    c, rep = hochschild_complex(C, length, i_max)
    dims = {}
    for i in range(i_min, i_max + 1):
        if not rep.contains(i):
            if rep.window and i < rep.window[0]:
                dims[i] = 0  # no cochains below the window at all
                continue
            rep.notes.append(f"HH^{i} outside the guaranteed window")
            continue
        dims[i] = c.cohomology_dim(i)
    if stabilize:
        c2, _ = hochschild_complex(C, length + 1)
        rep.stabilized = all(c2.cohomology_dim(i) == v for i, v in dims.items() if rep.contains(i))
    return HochschildResult(dims, rep, c)


# tensor products of bimodules


def tensor_over(E: DgBimodule, F: DgBimodule, name: str | None = None) -> DgBimodule:
    """Strict E (x)_D F for E over (C, D) and F over (D, C').

    (E (x)_D F)(x, w) is spanned by paths w -F-> y -E-> x modulo moving D
    across the middle.
    """
    C, D, C2 = E.left, E.right, F.right
    if F.left is not D and not F.left.structurally_equal(D):
        raise ValueError("middle categories differ")
    Fld = E.field
    values, quots, layouts = {}, {}, {}
    for x, w in itertools.product(C.objects, C2.objects):
        parts, tis = [], []
        for y in D.objects:
            ti = tensor_index(F.at(y, w), E.at(x, y))
            from .complexes import tensor_with_index

            t, ti = tensor_with_index(F.at(y, w), E.at(x, y))
            parts.append(t)
            tis.append(ti)
        total, offs = direct_sum(parts)
        pos = {y: k for k, y in enumerate(D.objects)}

        def vec(y, fv, ev, offs=offs, tis=tis):
            k = pos[y]
            out: Vec = {}
            for i, a in fv.items():
                for j, b in ev.items():
                    t = offs[k] + tis[k](i, j)
                    out[t] = Fld.norm(out.get(t, 0) + a * b)
            return {t: v for t, v in out.items() if v}

        rel = []
        for y, y2 in itertools.product(D.objects, repeat=2):
            for f in range(F.at(y, w).dim):
                for dd in range(D.hom(y, y2).dim):
                    fd = F.post(y, w, y2, {f: 1}, {dd: 1})
                    for e in range(E.at(x, y2).dim):
                        r = vec(y2, fd, {e: 1})
                        Fld.axpy(r, -1, vec(y, {f: 1}, E.pre(y, x, y2, {dd: 1}, {e: 1})))
                        if r:
                            rel.append(r)
        q = quotient_complex(total, rel)
        values[(x, w)] = q.complex
        quots[(x, w)] = q
        layouts[(x, w)] = (offs, tis, pos)

    def locate(x, w, k):
        offs, tis, _ = layouts[(x, w)]
        g = quots[(x, w)].keep[k]
        yi = max(i for i in range(len(offs)) if offs[i] <= g)
        f, e = tis[yi].pairs[g - offs[yi]]
        return D.objects[yi], f, e

    def post(x, w, x2, m, a):
        y, f, e = locate(x, w, m)
        offs, tis, pos = layouts[(x2, w)]
        k = pos[y]
        lift = {offs[k] + tis[k](f, j): c for j, c in E.post(x, y, x2, {e: 1}, {a: 1}).items()}
        return quots[(x2, w)].project(lift)

    def pre(w2, x, w, b, m):
        y, f, e = locate(x, w, m)
        offs, tis, pos = layouts[(x, w2)]
        k = pos[y]
        lift = {offs[k] + tis[k](i, e): c for i, c in F.pre(w2, y, w, {b: 1}, {f: 1}).items()}
        return quots[(x, w2)].project(lift)

    return DgBimodule.from_paths(C, C2, values, post, pre, name or f"{E.name}*{F.name}")


def _tensor_window(length: int, E: DgBimodule, F: DgBimodule, a_max: int | None) -> float:
    es, fs = _degree_span(E.values.values()), _degree_span(F.values.values())
    if not es or not fs:
        return float("-inf")
    return _tail_bound(length, es[1] + fs[1], a_max) + 2


@dataclass
class TensorResult:
    bimodule: DgBimodule
    report: TruncationReport

    def dims(self) -> dict:
        """Per-object H^n dimensions inside the guaranteed window."""
        w = self.report.window
        out = {}
        for k, c in self.bimodule.values.items():
            if w is None:
                out[k] = {}
                continue
            out[k] = {n: c.cohomology_dim(n) for n in c.support if w[0] <= n <= w[1] and c.cohomology_dim(n)}
        return out


def derived_tensor(E: DgBimodule, F: DgBimodule, length: int, stabilize: bool = False, name: str | None = None) -> TensorResult:
    """E (x)^L_D F through the two-sided bar B(F, D, E) truncated at ``length`` letters.

    Basis at (x, w): words f [d_1|...|d_s] e with f in F(y_0, w), e in E(x, y_s).
    """
    C, D, C2 = E.left, E.right, F.right
    if F.left is not D and not F.left.structurally_equal(D):
        raise ValueError("middle categories differ")
    Fld = E.field
    L = Letters(D)
    values, index, words = {}, {}, {}
    for x, w in itertools.product(C.objects, C2.objects):
        ws = []
        for s in range(length):
            for y0 in D.objects:
                for chain in L.chains(s, y0):
                    ys = chain[-1][1] if chain else y0
                    for f in range(F.at(y0, w).dim):
                        for e in range(E.at(x, ys).dim):
                            ws.append((f, y0, chain, e))
        words[(x, w)] = ws
        index[(x, w)] = {t: k for k, t in enumerate(ws)}
    for (x, w), ws in words.items():
        idx = index[(x, w)]
        degs, d, labels = [], [], []
        for f, y0, chain, e in ws:
            s = len(chain)
            ys = chain[-1][1] if chain else y0
            Fv, Ev = F.at(y0, w), E.at(x, ys)
            prefix = [Fv.degrees[f]]
            for a, b, t in chain:
                prefix.append(prefix[-1] + L.degree(a, b, t) - 1)
            degs.append(prefix[-1] + Ev.degrees[e])
            labels.append(f"{Fv.labels[f]}[{'|'.join(D.hom(a, b).labels[t] for a, b, t in chain)}]{Ev.labels[e]}")
            out: Vec = {}

            def put(c, key):
                k = idx[key]
                out[k] = Fld.norm(out.get(k, 0) + c)

            for k, c in Fv.d[f].items():
                put(c, (k, y0, chain, e))
            for j, (a, b, t) in enumerate(chain, start=1):
                sg = -sign(prefix[j - 1])
                for t2, c in L.d(a, b, t).items():
                    put(sg * c, (f, y0, chain[: j - 1] + ((a, b, t2),) + chain[j:], e))
            sg = sign(prefix[s])
            for k, c in Ev.d[e].items():
                put(sg * c, (f, y0, chain, k))
            if s:
                a, b, t = chain[0]
                for k, c in F.post(y0, w, b, {f: 1}, {t: 1}).items():
                    put(sign(prefix[0]) * c, (k, b, chain[1:], e))
                for j in range(1, s):
                    (a, b, t), (_, z, u) = chain[j - 1], chain[j]
                    for tu, c in L.product(a, b, z, t, u).items():
                        put(sign(prefix[j]) * c, (f, y0, chain[: j - 1] + ((a, z, tu),) + chain[j + 1 :], e))
                a, b, t = chain[-1]
                for k, c in E.pre(a, x, b, {t: 1}, {e: 1}).items():
                    put(-sign(prefix[s - 1]) * c, (f, y0, chain[:-1], k))
            d.append({k: v for k, v in out.items() if v})
        values[(x, w)] = Complex(Fld, degs, d, labels, check=False)

    def post(x, w, x2, m, a):
        f, y0, chain, e = words[(x, w)][m]
        ys = chain[-1][1] if chain else y0
        idx = index[(x2, w)]
        return {idx[(f, y0, chain, k)]: c for k, c in E.post(x, ys, x2, {e: 1}, {a: 1}).items()}

    def pre(w2, x, w, b, m):
        f, y0, chain, e = words[(x, w)][m]
        idx = index[(x, w2)]
        return {idx[(k, y0, chain, e)]: c for k, c in F.pre(w2, y0, w, {b: 1}, {f: 1}).items()}

    T = DgBimodule.from_paths(C, C2, values, post, pre, name or f"{E.name}*L{F.name}")
    upper_all = _degree_span(T.values.values())
    lo = _tensor_window(length, E, F, L.max_degree())
    if upper_all is None or lo == float("inf"):
        window = None
    else:
        lo = upper_all[0] if lo == float("-inf") else max(int(lo), upper_all[0])
        window = (lo, upper_all[1]) if lo <= upper_all[1] else None
    rep = TruncationReport(length, window)
    res = TensorResult(T, rep)
    if stabilize and window is not None:
        T2 = derived_tensor(E, F, length + 1).bimodule
        rep.stabilized = all(
            T.values[k].cohomology_dim(n) == T2.values[k].cohomology_dim(n)
            for k in T.values
            for n in range(window[0], window[1] + 1)
        )
    return res


# homotopy groups of mapping spaces


@dataclass
class UnitHomotopy:
    """pi_i(Map(1, C), x): a vector space dimension, or Aut for i = 1."""

    i: int
    dimension: int | None
    end_algebra_dim: int | None = None
    description: str = ""
    is_unit: object = None


def map_homotopy_unit(C: DgCategory, x: Obj, i: int, seed: int = 0, trials: int = 64) -> UnitHomotopy:
    if i < 1:
        raise ValueError("homotopy degree must be >= 1")
    E = C.hom(x, x)
    if i > 1:
        dim = E.cohomology_dim(1 - i)
        return UnitHomotopy(i, dim, description=f"H^{1 - i}(End({obj_str(x)})) of dimension {dim}")
    h = H0Category(C)
    n = h.dim(x, x)

    def is_unit(coords) -> bool:

        F = C.field
        # invert in the finite-dimensional algebra [C](x, x)
        table = h.structure_constants(x, x, x)
        cols = []
        for j in range(n):
            col = {}
            for k, cu in enumerate(coords):
                if cu:
                    for t, v in enumerate(table.get((k, j), [0] * n)):
                        if v:
                            col[t] = F.norm(col.get(t, 0) + cu * v)
            cols.append({t: v for t, v in col.items() if v})
        from .linalg import solve_in_span

        unit = {t: v for t, v in enumerate(h.unit_class(x)) if v}
        sol = solve_in_span(F, cols, unit)
        if sol is None:
            return False
        inv = [F.norm(sol.get(j, 0)) for j in range(n)]
        return h.compose(x, x, x, inv, coords) == h.unit_class(x)

    return UnitHomotopy(1, None, n, f"Aut of the {n}-dimensional algebra H^0(End({obj_str(x)}))", is_unit)


def map_homotopy_endo(C: DgCategory, i: int, length: int | None = None) -> HochschildResult:
    """pi_i(Map(C, C), Id) for i >= 2 as dim HH^{1-i}(C); i = 1 gives HH^0."""
    deg = 1 - i if i >= 2 else 0
    length = length if length is not None else max(deg, 0) + 2
    return hochschild(C, deg, length, i_min=deg)


# derived Picard verification


@dataclass
class PicardReport:
    verified: bool
    left: "InvertibilityCheck"
    right: "InvertibilityCheck"


@dataclass
class InvertibilityCheck:
    found: bool
    window: tuple[int, int] | None
    dims: dict[int, int]
    diagonal_dims: dict[int, int]
    witness: Vec | None = None
    note: str = ""


def _module_quasi_iso_in_window(f: ModuleMap, window) -> bool:
    for z in f.source.base.objects:
        cm = f.component(z)
        src, tgt = f.source(z), f.target(z)
        for n in sorted(set(src.support) | set(tgt.support)):
            if not (window[0] <= n <= window[1]):
                continue
            a, b = src.cohomology_dim(n), tgt.cohomology_dim(n)
            if a != b:
                return False
            if a and _rank_on_h(cm, n) != a:
                return False
    return True


def _rank_on_h(f: ChainMap, n: int) -> int:
    from .linalg import rank

    return rank(f.on_cohomology(n))


def _check_invertible(A: DgCategory, T: TensorResult, length: int, rng: random.Random, trials: int) -> InvertibilityCheck:
    """Search a class in H^0 Hom(bar(diag), T) inducing a quasi-iso to T."""
    (o,) = A.objects
    Dg = diagonal(A)
    w = T.report.window
    key = (o, o)
    tdims = {n: T.bimodule.values[key].cohomology_dim(n) for n in T.bimodule.values[key].support}
    ddims = Dg.values[key].cohomology_dims()
    if w is None:
        return InvertibilityCheck(False, None, {}, ddims, note="empty window")
    tdims = {n: v for n, v in tdims.items() if w[0] <= n <= w[1] and v}
    ddims_w = {n: v for n, v in ddims.items() if w[0] <= n <= w[1]}
    if tdims != ddims_w:
        return InvertibilityCheck(False, w, tdims, ddims_w, note="cohomology dimensions differ from the diagonal")
    P, Pm, cochains, win = _comparison_data(A, T, length)
    H = cochains.cohomology(0)
    gen, size, exhaustive = sample_space(A.field, H.dim, trials, sum(ddims_w.values()))
    for coords in gen(rng):
        if not any(coords):
            continue
        phi = H.element(coords)
        f = _map_from_cochain(P, Pm, T.bimodule, phi)
        if _module_quasi_iso_in_window(f, win):
            return InvertibilityCheck(True, w, tdims, ddims_w, phi)
    return InvertibilityCheck(False, w, tdims, ddims_w, note="no quasi-isomorphism found")


def _comparison_data(A: DgCategory, T: TensorResult, length: int):
    """bar(diag), its materialization, Hom(bar(diag), T) and the window a map is judged on."""
    L = Letters(A)
    P = diagonal_bar(A, length, L)
    cochains = hom_from_semifree(P, T.bimodule)
    Pm = P.materialize("bar(diag)")
    # the bar of the diagonal is exact above its tail bound
    bar_lo = _tail_bound(length, max(A.degree_bounds()[1], 0), L.max_degree()) + 2
    return P, Pm, cochains, (max(T.report.window[0], bar_lo), T.report.window[1])


def verify_invertibility_witness(A: DgCategory, T: TensorResult, length: int, phi: Vec) -> bool:
    """Recheck a returned cochain: a degree-0 cocycle whose map is a quasi-iso in the window."""
    if T.report.window is None or not phi:
        return False
    P, Pm, cochains, win = _comparison_data(A, T, length)
    if any(not 0 <= k < cochains.dim or cochains.degrees[k] != 0 for k in phi) or cochains.apply_d(phi):
        return False
    return _module_quasi_iso_in_window(_map_from_cochain(P, Pm, T.bimodule, phi), win)


def verify_picard_witness(A: DgCategory, P: DgBimodule, Q: DgBimodule, length: int, report: PicardReport) -> bool:
    """Deterministic re-verification of a verified picard report; False if it was not verified."""
    if not report.verified:
        return False
    return verify_invertibility_witness(A, derived_tensor(P, Q, length), length, report.left.witness) and \
        verify_invertibility_witness(A, derived_tensor(Q, P, length), length, report.right.witness)


def _map_from_cochain(P: SemiFree, Pm: DgModule, N: DgModule, phi: Vec) -> ModuleMap:
    vals: dict[int, Vec] = {}
    k = 0
    for g in range(len(P)):
        n = N(P.objects[g]).dim
        for j in range(n):
            c = phi.get(k + j)
            if c:
                vals.setdefault(g, {})[j] = c
        k += n
    lay = P.layout()
    images = {}
    for z, basis in lay.items():
        images[z] = [N.act(P.objects[g], z, vals[g], {b: 1}) if g in vals else {} for g, b in basis]
    deg = 0
    return ModuleMap(Pm, N, images, deg)


def picard_verify(A: DgCategory, P: DgBimodule, Q: DgBimodule, length: int, seed: int = 0, trials: int = 64) -> PicardReport:
    """Semi-decision: verified iff P (x)^L Q and Q (x)^L P are quasi-isomorphic to the diagonal."""
    if len(A.objects) != 1:
        raise ValueError("picard_verify needs a one-object category")
    rng = random.Random(seed)
    left = _check_invertible(A, derived_tensor(P, Q, length), length, rng, trials)
    right = _check_invertible(A, derived_tensor(Q, P, length), length, rng, trials)
    return PicardReport(left.found and right.found, left, right)


def twisted_diagonal(f: DgFunctor, name: str | None = None) -> DgBimodule:
    """A_f: the diagonal with the pre-action twisted by an automorphism f."""
    C = f.source
    if f.target is not C and not f.target.structurally_equal(C):
        raise ValueError("twist needs an endofunctor")
    return phi(f, name or f"twist({f.name})")


def bimodule_sum(parts: Sequence[DgBimodule], name: str = "sum") -> DgBimodule:
    from .modules import module_direct_sum

    M = module_direct_sum(parts, name)
    return DgBimodule(parts[0].left, parts[0].right, M.values, M.action, name, parts[0].base)


# cell modules


@dataclass
class CellStep:
    """Attach B (x) h_x along A (x) h_x, with A spanned by a subset of B's basis.

    ``attach[i]`` is the image in the current module at x (as a vector over
    its basis) of the i-th basis element of ``sub``.
    """

    obj: Obj
    cell: Complex
    sub: list[int]
    attach: list[Vec]


def sphere_cell(field: Field, obj: Obj, degree: int, attach: Vec) -> CellStep:
    """S^degree -> D: a new generator e of degree - 1 with d e = attach."""
    B = Complex(field, [degree - 1, degree], [{1: 1}, {}], ["e", "s"])
    return CellStep(obj, B, [1], [attach])


def free_cell(field: Field, obj: Obj, degree: int = 0) -> CellStep:
    return CellStep(obj, Complex.ground(field, degree), [], [])


@dataclass
class CellModule:
    semifree: SemiFree
    module: DgModule


def build_cell_module(C: DgCategory, plan: Sequence[CellStep], name: str = "cell", Cop: DgCategory | None = None) -> CellModule:
    """Iterated push-outs along A (x) h_x -> B (x) h_x, a module over C^op."""
    Cop = Cop or opposite(C)
    F = C.field
    P = SemiFree(Cop)
    M = P.materialize(name)
    for k, step in enumerate(plan):
        x = step.obj
        lay = P.layout()
        newid = {}
        subset = set(step.sub)
        for i in range(step.cell.dim):
            if i in subset:
                continue
            newid[i] = P.add(x, step.cell.degrees[i], f"c{k}.{step.cell.labels[i]}", k)
        att = dict(zip(step.sub, step.attach))
        unit = Cop.unit(x)
        for i, g in newid.items():
            terms: dict = {}
            for j, c in step.cell.d[i].items():
                if j in newid:
                    terms[(newid[j], None)] = F.norm(terms.get((newid[j], None), 0) + c)
                else:
                    # attaching image: an element of M(x) = (+) g'.Cop(x_g', x)
                    for t, v in att.get(j, {}).items():
                        g2, b = lay[x][t]
                        terms[(g2, b)] = F.norm(terms.get((g2, b), 0) + c * v)
            diff = []
            for (g2, b), c in terms.items():
                if not c:
                    continue
                diff.append((c, g2, unit if b is None else {b: 1}))
            P.diff[g] = diff
        for j, v in att.items():
            if M(x).apply_d(v):
                raise ComplexError(f"cell step {k}: attaching image of {step.cell.labels[j]} is not a cocycle")
            if any(M(x).degrees[t] != step.cell.degrees[j] for t in v):
                raise ComplexError(f"cell step {k}: attaching image of {step.cell.labels[j]} has the wrong degree")
        M = P.materialize(name)
    return CellModule(P, M)


def random_cell_module(C: DgCategory, rng: random.Random, cells: int = 3, Cop: DgCategory | None = None, name: str = "G") -> DgModule:
    """A cell module with random objects, degrees and attaching cocycles."""
    Cop = Cop or opposite(C)
    F = C.field
    plan: list[CellStep] = []
    M = build_cell_module(C, plan, name, Cop).module
    for _ in range(cells):
        x = rng.choice(C.objects)
        Mx = M(x)
        cands = []
        for n in Mx.support:
            from .linalg import kernel_basis

            src = Mx.indices(n)
            kb = kernel_basis(Mx.block(n))
            zs = [{src[i]: v for i, v in col.items()} for col in kb.columns()]
            if zs:
                cands.append((n, zs))
        if cands and rng.random() < 0.6:
            n, zs = rng.choice(cands)
            att: Vec = {}
            for z in zs:
                F.axpy(att, F(rng.choice((-1, 0, 1))), z)
            if att:
                plan.append(sphere_cell(F, x, n, att))
            else:
                plan.append(free_cell(F, x, rng.choice([-1, 0, 1])))
        else:
            plan.append(free_cell(F, x, rng.choice([-1, 0, 1])))
        M = build_cell_module(C, plan, name, Cop).module
    return M
