"""Drinfeld quotients and localizations, truncated by word length.

Killing an object X adjoins ε_X in End(X) of degree -1 with dε_X = 1_X.  A
morphism a -> b of the quotient is a combination of alternating words

    c_0 ε c_1 ε ... ε c_n,     c_i in C(X_i, X_{i+1}),  X_0 = a, X_{n+1} = b,

with X_1..X_n killed.  Differentiating ε merges its neighbours, composition
concatenates and merges the touching letters.  Words are cut at n <= limit;
composites that would exceed the limit are dropped, so the dg axioms hold for
all products whose total length fits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Hashable, Sequence

from .complexes import Complex
from .dgcat import DgCategory, DgFunctor, H0Category, IsoWitness, obj_str, opposite, verify_iso_witness
from .linalg import Vec, kernel_of, rank_of, sign, solve_in_span
from .modules import ModuleMap, module_category, yoneda_right

Obj = Hashable


class WindowError(ValueError):
    """The requested degree window cannot be honoured."""


@dataclass
class WordTruncation:
    words: dict  # (a, b) -> list of (objects, letters)
    limit: int

    def length(self, x: Obj, y: Obj, i: int) -> int:
        return len(self.words[(x, y)][i][1]) - 1


@dataclass
class QuotientReport:
    kill: tuple
    limit: int
    window: tuple[int, int] | None
    notices: list[str] = dc_field(default_factory=list)


def _word_label(C: DgCategory, objs, letters) -> str:
    parts = []
    for k, c in enumerate(letters):
        if k:
            parts.append(f"e_{obj_str(objs[k])}")
        parts.append(C.hom(objs[k], objs[k + 1]).labels[c])
    return "*".join(parts)


NO_ZERO_OBJECT = "the input has no zero object in its homotopy category; killing anyway"


def _has_zero_object(C: DgCategory) -> bool:
    return any(C.hom(x, x).is_acyclic() for x in C.objects)


class _Alphabet:
    """Letters allowed at each position of a word.

    With ``normalized`` set, inner letters at a killed X skip one basis vector
    on which the unit of X is supported: words with an identity strictly
    inside span a dg-ideal (the two merges around it cancel) and the quotient
    by it is the usual normalization.
    """

    def __init__(self, C: DgCategory, kill: tuple, normalized: bool):
        self.C = C
        self.skip: dict = {}
        if normalized:
            for x in kill:
                u = C.unit(x)
                self.skip[x] = (min(u), u)

    def _inner(self, objs, k: int) -> bool:
        return 0 < k < len(objs) - 2 and objs[k] == objs[k + 1] and objs[k] in self.skip

    def letters(self, objs, k: int) -> range | list:
        n = self.C.hom(objs[k], objs[k + 1]).dim
        if not self._inner(objs, k):
            return range(n)
        p = self.skip[objs[k]][0]
        return [i for i in range(n) if i != p]

    def project(self, x: Obj, v: Vec) -> Vec:
        """Drop the identity component of an inner endomorphism letter."""
        if not v:
            return v
        F = self.C.field
        p, u = self.skip[x]
        lam = v.get(p)
        if not lam:
            return v
        lam = F.div(lam, u[p])
        out = dict(v)
        F.axpy(out, -lam, u)
        out.pop(p, None)
        return {k: c for k, c in out.items() if c}

    def emit(self, objs, head, vec, tail, out, coef):
        """Add coef * (head, v, tail) for the letter combination ``vec``."""
        if self._inner(objs, len(head)):
            vec = self.project(objs[len(head)], vec)
        F = self.C.field
        for c, v in vec.items():
            w = (objs, head + (c,) + tail)
            out[w] = F.norm(out.get(w, 0) + coef * v)


MAX_WORDS = 200_000


def _word_count(C: DgCategory, kill: tuple, N: int, a: Obj, b: Obj, alpha: _Alphabet) -> int:
    total = 0
    for n in range(N + 1 if kill else 1):
        for mids in itertools.product(kill, repeat=n):
            objs = (a,) + mids + (b,)
            size = 1
            for k in range(n + 1):
                size *= len(alpha.letters(objs, k))
            total += size
    return total


def _word_homs(C: DgCategory, kill: tuple, N: int, pairs, alpha: _Alphabet) -> tuple[dict, dict]:
    """Word bases and hom complexes for the given pairs, at most N contractions.

    Words come ordered by contraction count, so words with at most k
    contractions are an initial segment; they span a subcomplex because the
    differential never lengthens a word.
    """
    F = C.field
    words: dict = {}
    homs: dict = {}
    pairs = list(pairs)
    for a, b in pairs:
        count = _word_count(C, kill, N, a, b, alpha)
        if count > MAX_WORDS:
            raise WindowError(
                f"hom({obj_str(a)},{obj_str(b)}) would need {count} words at {N} contractions; "
                f"shrink the window (limit {MAX_WORDS})"
            )
    for a, b in pairs:
        ws = []
        for n in range(N + 1 if kill else 1):
            for mids in itertools.product(kill, repeat=n):
                objs = (a,) + mids + (b,)
                ranges = [alpha.letters(objs, k) for k in range(n + 1)]
                for letters in itertools.product(*ranges):
                    ws.append((objs, letters))
        idx = {w: k for k, w in enumerate(ws)}
        degs, d, labels = [], [], []
        for objs, letters in ws:
            hs = [C.hom(objs[k], objs[k + 1]) for k in range(len(letters))]
            degs.append(sum(h.degrees[c] for h, c in zip(hs, letters)) - (len(letters) - 1))
            labels.append(_word_label(C, objs, letters))
            out: dict = {}
            prefix = 0
            for k, c in enumerate(letters):
                if k:
                    # d e = 1 merges letters k-1 and k
                    merged = C.compose_basis(objs[k - 1], objs[k], objs[k + 1], letters[k - 1], c)
                    alpha.emit(objs[:k] + objs[k + 1 :], letters[: k - 1], merged, letters[k + 1 :], out, sign(prefix))
                    prefix -= 1
                alpha.emit(objs, letters[:k], hs[k].d[c], letters[k + 1 :], out, sign(prefix))
                prefix += hs[k].degrees[c]
            d.append({idx[w]: v for w, v in out.items() if v})
        words[(a, b)] = ws
        homs[(a, b)] = Complex(F, degs, d, labels, check=False)
    return words, homs


def drinfeld_quotient(
    C: DgCategory,
    kill: Sequence[Obj],
    window: tuple[int, int] = (-6, 0),
    name: str | None = None,
    limit: int | None = None,
    objects: Sequence[Obj] | None = None,
    normalized: bool = False,
) -> DgCategory:
    """C/<kill> with at most ``limit`` contractions per word (default -window[0]).

    ``objects`` restricts the output to a full subcategory; killed objects
    still serve as intermediate stops in words.  ``normalized`` drops words
    with an identity letter between two contractions.  The returned category
    carries ``truncation`` (word data) and ``report``.
    """
    lo, hi = window
    if lo > 0 or hi < 0 or lo > hi:
        raise WindowError(f"window [{lo}, {hi}] must contain degree 0")
    missing = set(kill) - set(C.objects)
    if missing:
        raise ValueError(f"unknown objects to kill: {sorted(map(obj_str, missing))}")
    kill = tuple(x for x in C.objects if x in set(kill))
    N = -lo if limit is None else limit
    F = C.field
    obs = list(C.objects if objects is None else objects)
    alpha = _Alphabet(C, kill, normalized)
    words, homs = _word_homs(C, kill, N, itertools.product(obs, repeat=2), alpha)
    index = {k: {w: i for i, w in enumerate(ws)} for k, ws in words.items()}

    def by_length(ws):
        groups: dict = {}
        for i, (_, letters) in enumerate(ws):
            groups.setdefault(len(letters) - 1, []).append(i)
        return groups

    groups = {k: by_length(ws) for k, ws in words.items()}
    comp = {}
    for a, b, c in itertools.product(obs, repeat=3):
        table = {}
        ia = index[(a, c)]
        w1, w2 = words[(a, b)], words[(b, c)]
        for n1, g1 in groups[(a, b)].items():
            for n2, g2 in groups[(b, c)].items():
                if n1 + n2 > N:
                    continue
                for i in g1:
                    o1, l1 = w1[i]
                    for j in g2:
                        o2, l2 = w2[j]
                        merged = C.compose_basis(o1[-2], b, o2[1], l1[-1], l2[0])
                        if not merged:
                            continue
                        out: dict = {}
                        alpha.emit(o1[:-1] + o2[1:], l1[:-1], merged, l2[1:], out, 1)
                        if out:
                            table[(i, j)] = {ia[w]: v for w, v in out.items()}
        comp[(a, b, c)] = table
    units = {}
    for a in obs:
        ia = index[(a, a)]
        units[a] = {ia[((a, a), (k,))]: v for k, v in C.unit(a).items()}
    Q = DgCategory(F, obs, homs, comp, units, name or f"{C.name}/<{','.join(map(obj_str, kill))}>")
    Q.truncation = WordTruncation(words, N)
    notices = []
    if kill and not _has_zero_object(C):
        notices.append(NO_ZERO_OBJECT)
    bounds = C.degree_bounds()
    if not kill:
        guaranteed = window
    elif bounds is None or bounds[1] <= 0:
        guaranteed = (max(lo, -N + 1), hi)
    else:
        guaranteed = None
        notices.append("the input has homs in positive degrees; word truncation gives no exactness guarantee")
    Q.report = QuotientReport(kill, N, guaranteed, notices)
    return Q


def canonical_functor(C: DgCategory, Q: DgCategory) -> DgFunctor:
    """C -> C/<X>: every morphism goes to its length-0 word."""
    maps = {}
    for a, b in itertools.product(C.objects, repeat=2):
        idx = {w: k for k, w in enumerate(Q.truncation.words[(a, b)])}
        maps[(a, b)] = [{idx[((a, b), (i,))]: 1} for i in range(C.hom(a, b).dim)]
    return DgFunctor(C, Q, {x: x for x in C.objects}, maps, name=f"can_{Q.name}")


# cohomology of truncated homs


def stable_image_dim(big: Complex, prefix: int, n: int) -> int:
    """dim of the image of H^n(sub) -> H^n(big), sub spanned by the first ``prefix`` basis vectors.

    Word-length filtrations have no exactness guarantee once the base has
    positive degrees; the image in a longer truncation is what survives.
    """
    F = big.field
    cols = [i for i in big.indices(n) if i < prefix]
    cocycles = [{cols[t]: v for t, v in kv.items()} for kv in kernel_of(F, [big.d[i] for i in cols])]
    bounds = [big.d[i] for i in big.indices(n - 1) if big.d[i]]
    return rank_of(F, bounds + cocycles) - big._rank_d(n - 1)


def _prefix(words, N: int) -> int:
    return sum(1 for _, letters in words if len(letters) - 1 <= N)


# localization


@dataclass
class Localization:
    category: DgCategory  # full subcategory of the quotient on the original objects
    quotient: DgCategory
    cells: DgCategory  # module category of representables and cones
    functor: DgFunctor  # C -> category
    window: tuple[int, int]
    dims: dict  # (x, y) -> {n: dim} inside the window
    stabilized: bool
    notices: list[str]


def _cone_module(C: DgCategory, Cop: DgCategory, x: Obj, y: Obj, s: Vec, name: str):
    from .derived import build_cell_module, free_cell, sphere_cell

    first = build_cell_module(C, [free_cell(C.field, y, 0)], name, Cop)
    # re-express s in the basis g.C(x, y) of the free cell at x
    pos = {b: t for t, (g, b) in enumerate(first.semifree.layout()[x])}
    attach = {pos[i]: v for i, v in s.items()}
    plan = [free_cell(C.field, y, 0), sphere_cell(C.field, x, 0, attach)]
    return build_cell_module(C, plan, name, Cop).module


def yoneda_functor(C: DgCategory, cells: DgCategory, Cop: DgCategory) -> DgFunctor:
    """x -> h_x, a -> (m -> (-1)^{|a||m|} m a)."""
    hc = cells.hom_data
    maps = {}
    for x, y in itertools.product(C.objects, repeat=2):
        H = hc[(x, y)]
        M, N = H.source, H.target
        ims = []
        for a in range(C.hom(x, y).dim):
            da = C.hom(x, y).degrees[a]
            images = {}
            for z in C.objects:
                Mz = M(z)
                images[z] = [
                    {k: sign(da * Mz.degrees[m]) * v for k, v in C.compose_basis(z, x, y, m, a).items()}
                    for m in range(Mz.dim)
                ]
            ims.append(H.coords(ModuleMap(M, N, images, da)))
        maps[(x, y)] = ims
    return DgFunctor(C, cells, {x: x for x in C.objects}, maps, name="yoneda")


def localization(
    C: DgCategory,
    S: Sequence[tuple[Obj, Obj, Vec]],
    window: tuple[int, int] = (-6, 0),
    extra: int = 2,
) -> Localization:
    """L_S(C): contract the cones of S among the cell modules of C.

    Words carry at most N = -window[0] contractions.  H^n is reported as the
    image of the length-N cohomology in the length-(N + extra) cohomology; the
    run is flagged stabilized when length N + extra - 1 already gives the same
    numbers.
    """
    lo, hi = window
    if lo > 0 or hi < 0:
        raise WindowError(f"window [{lo}, {hi}] must contain degree 0")
    for k, (x, y, s) in enumerate(S):
        h = C.hom(x, y)
        if any(h.degrees[i] != 0 for i in s):
            raise ValueError(f"class {k} is not in degree 0")
        if h.apply_d(s):
            raise ValueError(f"class {k} is not a cocycle")
    Cop = opposite(C)
    mods = [yoneda_right(C, x, Cop) for x in C.objects]
    names = list(C.objects)
    cone_names = []
    for k, (x, y, s) in enumerate(S):
        nm = f"cone{k}"
        while nm in names:
            nm += "'"
        mods.append(_cone_module(C, Cop, x, y, s, nm))
        names.append(nm)
        cone_names.append(nm)
    cells = module_category(mods, names, name=f"cells({C.name})")
    yon = yoneda_functor(C, cells, Cop)
    N = -lo
    big = N + extra
    alpha = _Alphabet(cells, tuple(cone_names), True)
    words, homs = _word_homs(cells, tuple(cone_names), big, itertools.product(C.objects, repeat=2), alpha)
    degrees = range(lo + 1, hi + 1)
    dims = {}
    stable = True
    for k, h in homs.items():
        p = _prefix(words[k], N)
        dims[k] = {n: stable_image_dim(h, p, n) for n in degrees}
        if extra > 1:
            # the same image inside one contraction fewer
            p1 = _prefix(words[k], big - 1)
            sub = Complex(h.field, h.degrees[:p1], h.d[:p1], check=False)
            if any(stable_image_dim(sub, p, n) != dims[k][n] for n in degrees):
                stable = False
    Qn = drinfeld_quotient(cells, cone_names, window, limit=N, objects=C.objects, normalized=True)
    L = Qn.full_subcategory(C.objects, name=f"L({C.name})")
    L.truncation = Qn.truncation
    can = canonical_functor(cells.full_subcategory(C.objects), Qn)
    to_l = yon.then(can)
    functor = DgFunctor(C, L, to_l.obj_map, to_l.maps, name=f"loc_{C.name}")
    # the quotient's own notices describe the ambient word model; the numbers
    # above are stable images, so only a failed stabilization is worth reporting
    notices = [] if stable else [f"H^n differs between {big - 1} and {big} contractions; widen the window"]
    return Localization(L, Qn, cells, functor, (lo + 1, hi), dims, stable, notices)


def inverse_witness(h: H0Category, x: Obj, y: Obj, u_rep: Vec) -> IsoWitness | None:
    """A verified inverse of the class of the cocycle ``u_rep`` in [D], if any.

    A right inverse of an invertible class is its inverse, so one linear
    solve for u.v = 1_x and a verification of both composites decide it.
    """
    F = h.dg.field
    u = h.class_of(x, y, u_rep)
    n = h.dim(y, x)
    images = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        images.append({k: t for k, t in enumerate(h.compose(x, y, x, u, e)) if t})
    sol = solve_in_span(F, images, {k: t for k, t in enumerate(h.unit_class(x)) if t})
    if sol is None:
        return None
    v = [F.norm(sol.get(j, 0)) for j in range(n)]
    w = IsoWitness(x, y, u, v, dict(u_rep), h.rep(y, x, v))
    return w if verify_iso_witness(h, w) else None


def localization_witnesses(S: Sequence[tuple[Obj, Obj, Vec]], D: DgCategory, f: DgFunctor) -> list[IsoWitness | None]:
    h = H0Category(D)
    out = []
    for x, y, s in S:
        u = f.apply(x, y, s)
        if D.hom(f(x), f(y)).apply_d(u):
            out.append(None)
        else:
            out.append(inverse_witness(h, f(x), f(y), u))
    return out


def check_localization_property(
    C: DgCategory,
    S: Sequence[tuple[Obj, Obj, Vec]],
    D: DgCategory,
    f: DgFunctor,
) -> bool:
    """True iff [f] sends every class of S to an isomorphism of [D].

    The inverse is found by a linear solve, so no seed is involved.
    """
    if f.source is not C and not f.source.structurally_equal(C):
        raise ValueError("functor source differs from C")
    return all(w is not None for w in localization_witnesses(S, D, f))
