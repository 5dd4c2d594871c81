"""Generators and independent oracles shared by the test modules.

The oracles go through sympy's dense exact linear algebra, never through
dgforge.linalg, so they catch errors in the sparse elimination code.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import sympy

from dgforge.complexes import Complex
from dgforge.dgcat import DgCategory
from dgforge.linalg import Field
from dgforge.presentation import CategoryBuilder, algebra_category

Q = Field.rationals()


# dense oracles


def dense(F: Field, vectors, n: int) -> sympy.Matrix:
    """Columns of a sympy matrix from sparse vectors."""
    rows = [[0] * len(vectors) for _ in range(n)]
    for j, v in enumerate(vectors):
        for i, c in v.items():
            rows[i][j] = sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
    return sympy.Matrix(n, len(vectors), lambda i, j: rows[i][j])


def oracle_rank(F: Field, vectors, n: int) -> int:
    if not vectors or not n:
        return 0
    M = dense(F, vectors, n)
    return _rank_mod_p(M, F.p) if F.p else M.rank()


def _rank_mod_p(M: sympy.Matrix, p: int) -> int:
    rows = [[int(M[i, j]) % p for j in range(M.cols)] for i in range(M.rows)]
    r = 0
    for c in range(M.cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def oracle_cohomology_dim(c: Complex, n: int) -> int:
    """dim ker d_n - rank d_{n-1}, from dense matrices."""
    F = c.field
    here = c.indices(n)
    if not here:
        return 0
    below = c.indices(n - 1)
    pos = {g: k for k, g in enumerate(here)}
    d_out = [c.d[g] for g in here]
    # d_n as columns over the degree n+1 basis
    up = c.indices(n + 1)
    upos = {g: k for k, g in enumerate(up)}
    cols = [{upos[t]: v for t, v in col.items()} for col in d_out]
    rank_n = oracle_rank(F, cols, len(up))
    cols_in = [{pos[t]: v for t, v in c.d[g].items()} for g in below]
    rank_in = oracle_rank(F, cols_in, len(here))
    return len(here) - rank_n - rank_in


# random complexes


def random_complex(rng: random.Random, F: Field = Q, lo: int = -2, hi: int = 2, max_dim: int = 3) -> Complex:
    """A bounded complex with random dimensions; each d_n lands in ker d_{n+1}."""
    degrees = list(range(lo, hi + 1))
    dims = {n: rng.randint(0, max_dim) for n in degrees}
    basis = []
    for n in degrees:
        basis += [n] * dims[n]
    offs, k = {}, 0
    for n in degrees:
        offs[n] = k
        k += dims[n]
    d = [{} for _ in basis]
    # go from the top: choose d_n with image inside ker d_{n+1}
    for n in reversed(degrees[:-1]):
        tgt = n + 1
        kernel = _kernel_vectors(F, d, offs[tgt], dims[tgt])
        if not kernel:
            continue
        for i in range(dims[n]):
            col = {}
            for kv in kernel:
                c = F(rng.randint(-2, 2))
                if c:
                    for t, v in kv.items():
                        col[t] = F.norm(col.get(t, 0) + c * v)
            d[offs[n] + i] = {t: v for t, v in col.items() if v}
    return Complex(F, basis, d)


def _kernel_vectors(F: Field, d, off: int, dim: int):
    from dgforge.linalg import kernel_of

    images = [d[off + i] for i in range(dim)]
    return [{off + i: v for i, v in kv.items()} for kv in kernel_of(F, images)]


# random categories


def random_path_category(rng: random.Random, F: Field = Q, objects: int = 2, arrows: int = 3, max_len: int = 2) -> DgCategory:
    """Paths of length <= max_len in a random quiver with graded arrows, longer paths set to zero."""
    objs = [f"o{i}" for i in range(objects)]
    arr = []
    for k in range(arrows):
        s, t = rng.choice(objs), rng.choice(objs)
        arr.append((f"a{k}", s, t, rng.randint(-2, 1)))
    paths = [((), o, o) for o in objs]
    frontier = [((a,), s, t) for a, s, t, _ in arr]
    while frontier:
        paths += frontier
        nxt = []
        for p, s, t in frontier:
            if len(p) >= max_len:
                continue
            for a, s2, t2, _ in arr:
                if s2 == t:
                    nxt.append((p + (a,), s, t2))
        frontier = nxt
    deg = {a: g for a, _, _, g in arr}
    b = CategoryBuilder(F, objs, "paths")

    def name(p, s):
        return "e_" + s if not p else ".".join(p)

    for p, s, t in paths:
        b.gen(s, t, name(p, s), sum(deg[a] for a in p))
    for (p, s, t), (q, s2, t2) in itertools.product(paths, repeat=2):
        if t != s2:
            continue
        r = p + q
        if len(r) > max_len:
            continue
        b.comp(name(p, s), name(q, s2), {name(r, s): 1})
    for o in objs:
        b.unit(o, "e_" + o)
    return b.build()


def truncated_polynomial(F: Field, n: int, degree: int = 0, name: str | None = None) -> DgCategory:
    """B(k[x]/x^n) with |x| = degree (n = 2 when degree is odd)."""
    if degree % 2 and n > 2:
        raise ValueError("odd generators square to zero")
    basis = ["1"] + [f"x{i}" for i in range(1, n)]
    nm = {0: "1", **{i: f"x{i}" for i in range(1, n)}}
    prod = {(nm[i], nm[j]): {nm[i + j]: 1} for i in range(n) for j in range(n) if i + j < n}
    degs = {nm[i]: i * degree for i in range(1, n)}
    return algebra_category(F, basis, prod, "1", degrees=degs, name=name or f"k[x]/x^{n}")


def acyclic_epsilon(F: Field = Q) -> DgCategory:
    """B(k<e>/e^2) with |e| = -1 and de = 1: an acyclic dg-algebra."""
    prod = {("1", "1"): {"1": 1}, ("1", "e"): {"e": 1}, ("e", "1"): {"e": 1}}
    return algebra_category(F, ["1", "e"], prod, "1", degrees={"e": -1}, d={"e": {"1": 1}}, name="acyclic")


def exterior_dg(F: Field = Q) -> DgCategory:
    """k[e, u]/(e^2, u^2), |e| = -1, |u| = 0, de = u: a dg-algebra with a nonzero differential."""
    basis = ["1", "e", "u", "eu"]
    deg = {"e": -1, "eu": -1}

    def mul(a, b):
        ea, ua = "e" in a, "u" in a
        eb, ub = "e" in b, "u" in b
        if (ea and eb) or (ua and ub):
            return None
        return ("e" if ea or eb else "") + ("u" if ua or ub else "") or "1"

    prod = {}
    for a in basis:
        for b in basis:
            r = mul(a if a != "1" else "", b if b != "1" else "")
            if r:
                prod[(a, b)] = {r: 1}
    return algebra_category(F, basis, prod, "1", degrees=deg, d={"e": {"u": 1}}, name="exterior_dg")


# Hochschild cohomology of k[x]/x^2 from its periodic resolution


def _mult_matrices(C):
    """Left and right multiplication by x on A = End(*), as column lists."""
    o = "*"
    h = C.hom(o, o)
    x = h.labels.index("x")
    left = [C.compose_basis(o, o, o, x, j) for j in range(h.dim)]
    right = [C.compose_basis(o, o, o, j, x) for j in range(h.dim)]
    return h.dim, left, right


def oracle_hh_dual(C, n):
    """HH^n(k[x]/x^2) from ... -> A^e -(x(x)1 + 1(x)x)-> A^e -(x(x)1 - 1(x)x)-> A^e -> A.

    Applying Hom_{A^e}(-, A) leaves A in every degree with maps a -> xa - ax
    (out of even degrees) and a -> xa + ax (out of odd degrees).
    """
    F = C.field
    dim, left, right = _mult_matrices(C)
    minus = [{k: F.norm(v) for k, v in _sub(F, left[j], right[j]).items() if F.norm(v)} for j in range(dim)]
    plus = [{k: F.norm(v) for k, v in _add(F, left[j], right[j]).items() if F.norm(v)} for j in range(dim)]
    out_map = minus if n % 2 == 0 else plus
    in_map = None if n == 0 else (plus if n % 2 == 0 else minus)
    r_out = oracle_rank(F, out_map, dim)
    r_in = oracle_rank(F, in_map, dim) if in_map else 0
    return dim - r_out - r_in


def _add(F, a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def _sub(F, a, b):
    return _add(F, a, {k: -v for k, v in b.items()})
