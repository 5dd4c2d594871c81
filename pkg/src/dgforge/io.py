"""Line-oriented text documents for categories, modules, functors, bimodules and plans.

A document is a header of ``key: value`` lines followed by ``[table]``
sections of ``entry: value`` lines.  Blank lines and lines starting with
``#`` are ignored.  Linear combinations read ``2*a - 1/2*b`` (``0`` for the
empty sum); a bare name means coefficient 1.  Documents point at each other
by path (relative to the referring file) or by bundled library name.

Example::

    format: dgforge/1
    kind: category
    name: i_k
    field: Q
    objects: 0 1

    [generators]
    1_0: 0 -> 0 degree 0
    ...
"""

from __future__ import annotations

import hashlib
import itertools
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Hashable, Iterable, Sequence

from .complexes import Complex, ComplexError
from .derived import CellStep, build_cell_module, free_cell, sphere_cell
from .dgcat import DgCategory, DgFunctor, obj_str, opposite, validate_dgcat, validate_functor
from .linalg import Field, Vec
from .modules import DgBimodule, DgModule, validate_module

Obj = Hashable
FORMAT = "dgforge/1"
KINDS = ("category", "module", "functor", "bimodule", "plan")


class DocumentError(ValueError):
    """A malformed or invalid document, located by file, table and entry."""

    def __init__(self, source: str, table: str | None, entry: str | None, message: str, line: int | None = None):
        self.source, self.table, self.entry, self.line = source, table, entry, line
        self.message = message
        where = source if line is None else f"{source}:{line}"
        if table:
            where += f": [{table}]"
        if entry:
            where += f" {entry}"
        super().__init__(f"{where}: {message}")


# raw syntax


@dataclass
class Entry:
    key: str
    value: str
    line: int


@dataclass
class RawDocument:
    source: str
    header: dict[str, Entry]
    tables: dict[str, list[Entry]]

    def get(self, key: str, required: bool = True) -> str | None:
        e = self.header.get(key)
        if e is None:
            if required:
                raise DocumentError(self.source, None, key, "missing header field")
            return None
        return e.value

    def table(self, name: str) -> list[Entry]:
        return self.tables.get(name, [])

    def error(self, table: str | None, entry: Entry | str | None, message: str) -> DocumentError:
        if isinstance(entry, Entry):
            return DocumentError(self.source, table, entry.key, message, entry.line)
        return DocumentError(self.source, table, entry, message)


def parse_raw(text: str, source: str = "<string>") -> RawDocument:
    header: dict[str, Entry] = {}
    tables: dict[str, list[Entry]] = {}
    current: list[Entry] | None = None
    cname = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            cname = line[1:-1].strip()
            if cname in tables:
                raise DocumentError(source, cname, None, "table declared twice", n)
            current = tables[cname] = []
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise DocumentError(source, cname, line, "expected 'key: value'", n)
        e = Entry(key.strip(), value.strip(), n)
        if current is None:
            if e.key in header:
                raise DocumentError(source, None, e.key, "header field repeated", n)
            header[e.key] = e
        else:
            current.append(e)
    doc = RawDocument(source, header, tables)
    fmt = doc.get("format")
    if fmt != FORMAT:
        raise doc.error(None, "format", f"unsupported format {fmt!r}, expected {FORMAT}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise doc.error(None, "kind", f"unknown kind {kind!r}")
    return doc


# scalars, objects and combinations

_TERM = re.compile(r"^([+-]?\d+(?:/\d+)?)\*(.+)$")
_NUMBER = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def format_scalar(F: Field, c) -> str:
    if F.p:
        return str(int(c) % F.p)
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_combo(F: Field, v: Vec, names: Sequence[str]) -> str:
    terms = [(k, c) for k, c in sorted(v.items()) if F.norm(c)]
    if not terms:
        return "0"
    out = []
    for n, (k, c) in enumerate(terms):
        if not F.p and Fraction(c) < 0 and n:
            out.append(f"- {format_scalar(F, -c)}*{names[k]}")
        else:
            out.append(("+ " if n else "") + f"{format_scalar(F, c)}*{names[k]}")
    return " ".join(out)


def parse_combo(F: Field, text: str, lookup: Callable[[str], int]) -> Vec:
    """Parse a combination; ``lookup`` maps a name to an index or raises KeyError."""
    text = text.strip()
    if text == "0":
        return {}
    toks = text.split()
    out: Vec = {}
    sgn = 1
    expect_term = True
    for t in toks:
        if not expect_term:
            if t not in ("+", "-"):
                raise ValueError(f"expected '+' or '-' before {t!r}")
            sgn = 1 if t == "+" else -1
            expect_term = True
            continue
        m = _TERM.match(t)
        if m:
            coef, name = F(m.group(1)), m.group(2)
        else:
            coef, name = F(1), t
        try:
            k = lookup(name)
        except KeyError:
            raise ValueError(f"unknown name {name!r}") from None
        out[k] = F.norm(out.get(k, 0) + sgn * coef)
        sgn = 1
        expect_term = False
    if expect_term:
        raise ValueError("dangling operator")
    return {k: c for k, c in out.items() if c}


def format_object(x: Obj) -> str:
    return obj_str(x)


def parse_object(text: str) -> Obj:
    """``(a,b)`` reads as a tuple, anything else as a string."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        return text
    parts, depth, cur = [], 0, ""
    for ch in text[1:-1]:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    parts.append(cur)
    return tuple(parse_object(p) for p in parts)


def _valid_name(s: str) -> bool:
    """Names may be numeric; they must not read as ``0``, an operator or a scaled term."""
    if not s or s == "0" or s[0] in "+-#[" or ":" in s or _TERM.match(s):
        return False
    return not any(ch.isspace() for ch in s)


def unique_names(labels: Iterable[str]) -> list[str]:
    """Labels made into valid, pairwise distinct names (stable, deterministic)."""
    labels = list(labels)
    seen: dict[str, int] = {}
    for lab in labels:
        seen[lab] = seen.get(lab, 0) + 1
    out, used = [], set()
    for k, lab in enumerate(labels):
        name = re.sub(r"\s+", "_", lab).replace(":", "_")
        if not _valid_name(name):
            name = "g_" + name
        if seen[lab] > 1 or name in used:
            name = f"{name}#{k}"
            while name in used:
                name += "'"
        used.add(name)
        out.append(name)
    return out


def _parse_int(doc: RawDocument, table: str, e: Entry, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise doc.error(table, e, f"expected an integer, got {text!r}") from None


# references


class Library:
    """Resolves document references: file paths first, then bundled names."""

    def __init__(self, bundled: dict[str, Callable[[], str]] | None = None):
        if bundled is None:
            from .library import bundled_documents

            bundled = bundled_documents()
        self.bundled = bundled
        self._cache: dict[str, object] = {}
        self._refs: dict[int, tuple[object, str, str]] = {}

    def key(self, ref: str, base_dir: Path | None = None) -> tuple[str, str | Path]:
        candidates = []
        p = Path(ref)
        if base_dir is not None and not p.is_absolute():
            candidates.append(base_dir / p)
        candidates.append(p)
        for c in candidates:
            if c.is_file():
                return str(c.resolve()), c
            if c.with_suffix(".dg").is_file():
                return str(c.with_suffix(".dg").resolve()), c.with_suffix(".dg")
        name = p.name[:-3] if p.name.endswith(".dg") else p.name
        if name in self.bundled and (len(p.parts) == 1 or p.parts[-2] == "examples"):
            return f"bundled:{name}", name
        raise FileNotFoundError(ref)

    def text(self, ref: str, base_dir: Path | None = None) -> tuple[str, str, str]:
        """(cache key, source label, text)."""
        key, where = self.key(ref, base_dir)
        if isinstance(where, Path):
            return key, str(where), where.read_text(encoding="utf-8")
        return key, f"examples/{where}", self.bundled[where]()

    def load(self, ref: str, base_dir: Path | None = None, source: str | None = None):
        try:
            key, label, text = self.text(ref, base_dir)
        except FileNotFoundError:
            raise DocumentError(source or ref, None, None, f"cannot resolve reference {ref!r}") from None
        if key not in self._cache:
            where = None if key.startswith("bundled:") else Path(key).parent
            obj = parse_document(text, label, self, where)
            canon = key[len("bundled:"):] if where is None else os.path.relpath(key)
            self._cache[key] = obj
            self._refs[id(obj)] = (obj, canon, digest(text))
        return self._cache[key]

    def ref_of(self, obj) -> str | None:
        """The reference a loaded object can be found under again."""
        hit = self._refs.get(id(obj))
        return hit[1] if hit and hit[0] is obj else None

    def digest_of(self, obj) -> str | None:
        hit = self._refs.get(id(obj))
        return hit[2] if hit and hit[0] is obj else None

    def parse(self, text: str, source: str, base_dir: Path | None = None):
        return parse_document(text, source, self, base_dir)


def _resolve(doc: RawDocument, lib: Library, field: str, base_dir: Path | None, want: type):
    ref = doc.get(field)
    obj = lib.load(ref, base_dir, doc.source)
    if not isinstance(obj, want):
        raise doc.error(None, field, f"{ref!r} is not a {want.__name__}")
    return obj


# categories


def _parse_field(doc: RawDocument) -> Field:
    try:
        return Field.parse(doc.get("field"))
    except ValueError as exc:
        raise doc.error(None, "field", str(exc)) from None


def _generators(doc: RawDocument, table: str, arity: int):
    """Entries ``name: obj [obj] -> ... degree n`` as (name, objects, degree, entry)."""
    out = []
    seen = set()
    for e in doc.table(table):
        if not _valid_name(e.key):
            raise doc.error(table, e, "invalid generator name")
        if e.key in seen:
            raise doc.error(table, e, "generator declared twice")
        seen.add(e.key)
        toks = e.value.replace("->", " ").split()
        if len(toks) != arity + 2 or toks[-2] != "degree":
            raise doc.error(table, e, "expected objects followed by 'degree N'")
        out.append((e.key, tuple(parse_object(t) for t in toks[:arity]), _parse_int(doc, table, e, toks[-1]), e))
    return out


def _parse_category(doc: RawDocument) -> DgCategory:
    F = _parse_field(doc)
    name = doc.get("name")
    objects = [parse_object(t) for t in doc.get("objects").split()]
    if len(set(objects)) != len(objects):
        raise doc.error(None, "objects", "repeated object")
    order: dict = {(x, y): [] for x in objects for y in objects}
    where: dict[str, tuple] = {}
    degree: dict[str, int] = {}
    for g, (x, y), deg, e in _generators(doc, "generators", 2):
        if x not in objects or y not in objects:
            raise doc.error("generators", e, "unknown object")
        where[g] = (x, y, len(order[(x, y)]))
        order[(x, y)].append(g)
        degree[g] = deg

    def lookup_in(x, y):
        def f(n):
            if n not in where:
                raise KeyError(n)
            if where[n][:2] != (x, y):
                raise ValueError(f"{n!r} is not in hom({obj_str(x)},{obj_str(y)})")
            return where[n][2]
        return f

    def combo(table, e, x, y):
        try:
            return parse_combo(F, e.value, lookup_in(x, y))
        except ValueError as exc:
            raise doc.error(table, e, str(exc)) from None

    diffs: dict = {}
    dent = {e.key: e for e in doc.table("differential")}
    for e in doc.table("differential"):
        if e.key not in where:
            raise doc.error("differential", e, "unknown generator")
        x, y, _ = where[e.key]
        diffs[e.key] = combo("differential", e, x, y)
        for k in diffs[e.key]:
            if degree[order[(x, y)][k]] != degree[e.key] + 1:
                raise doc.error("differential", e, "differential must raise the degree by one")
    homs = {}
    for (x, y), names in order.items():
        d = [diffs.get(n, {}) for n in names]
        c = Complex(F, [degree[n] for n in names], d, names, check=False)
        for k, n in enumerate(names):
            if c.apply_d(c.d[k]):
                raise doc.error("differential", dent.get(n, n), "d^2 != 0 on this generator")
        homs[(x, y)] = c
    comp: dict = {}
    for e in doc.table("composition"):
        parts = e.key.split()
        if len(parts) != 2 or any(p not in where for p in parts):
            raise doc.error("composition", e, "expected two known generators")
        (x, y, i), (y2, z, j) = where[parts[0]], where[parts[1]]
        if y != y2:
            raise doc.error("composition", e, "generators are not composable")
        v = combo("composition", e, x, z)
        if v:
            comp.setdefault((x, y, z), {})[(i, j)] = v
    units = {}
    for e in doc.table("units"):
        x = parse_object(e.key)
        if x not in objects:
            raise doc.error("units", e, "unknown object")
        units[x] = combo("units", e, x, x)
    for x in objects:
        if x not in units:
            raise doc.error("units", obj_str(x), "unit missing")
    C = DgCategory(F, objects, homs, comp, units, name)
    rep = validate_dgcat(C)
    if not rep.ok:
        raise doc.error(None, None, "axioms fail: " + "; ".join(rep.violations[:3]))
    return C


def _category_names(C: DgCategory) -> dict:
    pairs = list(itertools.product(C.objects, repeat=2))
    labels = [lab for x, y in pairs for lab in C.hom(x, y).labels]
    names = iter(unique_names(labels))
    return {(x, y): [next(names) for _ in C.hom(x, y).labels] for x, y in pairs}


def serialize_category(C: DgCategory) -> str:
    F = C.field
    names = _category_names(C)
    pairs = list(itertools.product(C.objects, repeat=2))
    lines = [
        f"format: {FORMAT}",
        "kind: category",
        f"name: {C.name}",
        f"field: {F}",
        "objects: " + " ".join(format_object(x) for x in C.objects),
        "",
        "[generators]",
    ]
    for x, y in pairs:
        h = C.hom(x, y)
        for k, n in enumerate(names[(x, y)]):
            lines.append(f"{n}: {format_object(x)} -> {format_object(y)} degree {h.degrees[k]}")
    lines += ["", "[differential]"]
    for x, y in pairs:
        h = C.hom(x, y)
        for k, n in enumerate(names[(x, y)]):
            if h.d[k]:
                lines.append(f"{n}: {format_combo(F, h.d[k], names[(x, y)])}")
    lines += ["", "[composition]"]
    for x, y, z in itertools.product(C.objects, repeat=3):
        for (i, j), r in sorted(C.comp.get((x, y, z), {}).items()):
            if r:
                lines.append(f"{names[(x, y)][i]} {names[(y, z)][j]}: {format_combo(F, r, names[(x, z)])}")
    lines += ["", "[units]"]
    for x in C.objects:
        lines.append(f"{format_object(x)}: {format_combo(F, C.unit(x), names[(x, x)])}")
    return "\n".join(lines) + "\n"


# modules


def _module_names(values: dict) -> dict:
    keys = list(values)
    labels = [lab for k in keys for lab in values[k].labels]
    it = iter(unique_names(labels))
    return {k: [next(it) for _ in values[k].labels] for k in keys}


def _parse_values(doc: RawDocument, F: Field, keys: Sequence, arity: int):
    """Generators of a module or bimodule: values per key, name -> (key, index)."""
    order: dict = {k: [] for k in keys}
    degree: dict[str, int] = {}
    where: dict[str, tuple] = {}
    for g, objs, deg, e in _generators(doc, "generators", arity):
        key = objs[0] if arity == 1 else objs
        if key not in order:
            raise doc.error("generators", e, "unknown object")
        where[g] = (key, len(order[key]))
        order[key].append(g)
        degree[g] = deg

    def lookup_at(key):
        def f(n):
            if n not in where:
                raise KeyError(n)
            if where[n][0] != key:
                raise ValueError(f"{n!r} does not live at {obj_str(key)}")
            return where[n][1]
        return f

    diffs = {}
    dent = {e.key: e for e in doc.table("differential")}
    for e in doc.table("differential"):
        if e.key not in where:
            raise doc.error("differential", e, "unknown generator")
        key = where[e.key][0]
        try:
            diffs[e.key] = parse_combo(F, e.value, lookup_at(key))
        except ValueError as exc:
            raise doc.error("differential", e, str(exc)) from None
        for k in diffs[e.key]:
            if degree[order[key][k]] != degree[e.key] + 1:
                raise doc.error("differential", e, "differential must raise the degree by one")
    values = {}
    for key, names in order.items():
        c = Complex(F, [degree[n] for n in names], [diffs.get(n, {}) for n in names], names, check=False)
        for k, n in enumerate(names):
            if c.apply_d(c.d[k]):
                raise doc.error("differential", dent.get(n, n), "d^2 != 0 on this generator")
        values[key] = c
    return values, where, lookup_at


def _check_module(doc: RawDocument, M: DgModule):
    rep = validate_module(M)
    if not rep.ok:
        raise doc.error(None, None, "module axioms fail: " + "; ".join(rep.violations[:3]))


def _base_names(B: DgCategory) -> dict:
    """name -> (x, y, index) over the basis of every hom of B."""
    names = _category_names(B)
    return {n: (x, y, k) for (x, y), ns in names.items() for k, n in enumerate(ns)}


def _parse_module(doc: RawDocument, lib: Library, base_dir: Path | None) -> DgModule:
    C = _resolve(doc, lib, "base", base_dir, DgCategory)
    side = doc.get("side")
    if side not in ("left", "right"):
        raise doc.error(None, "side", "side must be 'left' or 'right'")
    B = C if side == "left" else _opposite_of(C)
    F = B.field
    values, where, lookup_at = _parse_values(doc, F, B.objects, 1)
    bnames = _base_names(B)
    action: dict = {}
    for e in doc.table("action"):
        parts = e.key.split()
        if len(parts) != 2 or parts[0] not in where or parts[1] not in bnames:
            raise doc.error("action", e, "expected a generator and a base basis element")
        x, m = where[parts[0]]
        x2, y, a = bnames[parts[1]]
        if x2 != x:
            raise doc.error("action", e, "base element does not start where the generator lives")
        try:
            v = parse_combo(F, e.value, lookup_at(y))
        except ValueError as exc:
            raise doc.error("action", e, str(exc)) from None
        if v:
            action.setdefault((x, y), {})[(m, a)] = v
    M = DgModule(B, values, action, doc.get("name"))
    M.side = side
    M.category = C
    _check_module(doc, M)
    return M


_OPS: dict = {}


def _opposite_of(C: DgCategory) -> DgCategory:
    """One shared opposite per category, so modules over it can be combined."""
    hit = _OPS.get(id(C))
    if hit is None or hit[0] is not C:
        hit = (C, opposite(C))
        _OPS[id(C)] = hit
    return hit[1]


def serialize_module(M: DgModule, base_ref: str | None = None, side: str | None = None) -> str:
    side = side or getattr(M, "side", "left")
    B = M.base
    F = M.field
    if base_ref is None:
        C = getattr(M, "category", None)
        base_ref = C.name if C is not None else (B.name[:-3] if side == "right" and B.name.endswith("^op") else B.name)
    names = _module_names(M.values)
    bnames = _category_names(B)
    lines = [
        f"format: {FORMAT}",
        "kind: module",
        f"name: {M.name}",
        f"base: {base_ref}",
        f"side: {side}",
        "",
        "[generators]",
    ]
    for x in B.objects:
        for k, n in enumerate(names[x]):
            lines.append(f"{n}: {format_object(x)} degree {M(x).degrees[k]}")
    lines += ["", "[differential]"]
    for x in B.objects:
        for k, n in enumerate(names[x]):
            if M(x).d[k]:
                lines.append(f"{n}: {format_combo(F, M(x).d[k], names[x])}")
    lines += ["", "[action]"]
    for x, y in itertools.product(B.objects, repeat=2):
        for (m, a), r in sorted(M.action.get((x, y), {}).items()):
            if r:
                lines.append(f"{names[x][m]} {bnames[(x, y)][a]}: {format_combo(F, r, names[y])}")
    return "\n".join(lines) + "\n"


# functors


def _parse_functor(doc: RawDocument, lib: Library, base_dir: Path | None) -> DgFunctor:
    C = _resolve(doc, lib, "source", base_dir, DgCategory)
    D = _resolve(doc, lib, "target", base_dir, DgCategory)
    F = C.field
    obj_map = {}
    for e in doc.table("objects"):
        x, y = parse_object(e.key), parse_object(e.value)
        if x not in C.objects or y not in D.objects:
            raise doc.error("objects", e, "unknown object")
        obj_map[x] = y
    for x in C.objects:
        if x not in obj_map:
            raise doc.error("objects", obj_str(x), "object not mapped")
    cn, dn = _base_names(C), _category_names(D)
    maps = {(x, y): [{} for _ in range(C.hom(x, y).dim)] for x in C.objects for y in C.objects}
    for e in doc.table("maps"):
        if e.key not in cn:
            raise doc.error("maps", e, "unknown source basis element")
        x, y, i = cn[e.key]
        idx = {n: k for k, n in enumerate(dn[(obj_map[x], obj_map[y])])}
        try:
            maps[(x, y)][i] = parse_combo(F, e.value, idx.__getitem__)
        except ValueError as exc:
            raise doc.error("maps", e, f"{exc} (target hom({obj_str(obj_map[x])},{obj_str(obj_map[y])}))") from None
    f = DgFunctor(C, D, obj_map, maps, doc.get("name"))
    rep = validate_functor(f)
    if not rep.ok:
        raise doc.error(None, None, "functor axioms fail: " + "; ".join(rep.violations[:3]))
    return f


def serialize_functor(f: DgFunctor, source_ref: str | None = None, target_ref: str | None = None) -> str:
    C, D = f.source, f.target
    F = C.field
    cn, dn = _category_names(C), _category_names(D)
    lines = [
        f"format: {FORMAT}",
        "kind: functor",
        f"name: {f.name}",
        f"source: {source_ref or C.name}",
        f"target: {target_ref or D.name}",
        "",
        "[objects]",
    ]
    for x in C.objects:
        lines.append(f"{format_object(x)}: {format_object(f(x))}")
    lines += ["", "[maps]"]
    for x, y in itertools.product(C.objects, repeat=2):
        for i, v in enumerate(f.maps[(x, y)]):
            if v:
                lines.append(f"{cn[(x, y)][i]}: {format_combo(F, v, dn[(f(x), f(y))])}")
    return "\n".join(lines) + "\n"


# bimodules


def _parse_bimodule(doc: RawDocument, lib: Library, base_dir: Path | None) -> DgBimodule:
    C = _resolve(doc, lib, "left", base_dir, DgCategory)
    D = _resolve(doc, lib, "right", base_dir, DgCategory)
    F = C.field
    keys = list(itertools.product(C.objects, D.objects))
    values, where, lookup_at = _parse_values(doc, F, keys, 2)
    cn, dn = _base_names(C), _base_names(D)
    posts: dict = {}
    pres: dict = {}
    for table, store in (("post", posts), ("pre", pres)):
        for e in doc.table(table):
            parts = e.key.split()
            if table == "post":
                ok = len(parts) == 2 and parts[0] in where and parts[1] in cn
            else:
                ok = len(parts) == 2 and parts[1] in where and parts[0] in dn
            if not ok:
                raise doc.error(table, e, "expected a generator and a basis element in the right order")
            if table == "post":
                (x, y), m = where[parts[0]]
                x0, x2, a = cn[parts[1]]
                if x0 != x:
                    raise doc.error(table, e, "morphism does not start at the generator's left object")
                target = (x2, y)
                store[(x, y, x2, m, a)] = (e, target)
            else:
                (x, y), m = where[parts[1]]
                y2, y0, b = dn[parts[0]]
                if y0 != y:
                    raise doc.error(table, e, "morphism does not end at the generator's right object")
                target = (x, y2)
                store[(y2, x, y, b, m)] = (e, target)
    parsed: dict = {}
    for table, store in (("post", posts), ("pre", pres)):
        for key, (e, target) in store.items():
            try:
                parsed[(table, key)] = parse_combo(F, e.value, lookup_at(target))
            except ValueError as exc:
                raise doc.error(table, e, str(exc)) from None

    def post(x, y, x2, m, a):
        return parsed.get(("post", (x, y, x2, m, a)), {})

    def pre(y2, x, y, b, m):
        return parsed.get(("pre", (y2, x, y, b, m)), {})

    # units act trivially unless listed
    def post_u(x, y, x2, m, a):
        if ("post", (x, y, x2, m, a)) in parsed:
            return parsed[("post", (x, y, x2, m, a))]
        return _unit_action(C, x, x2, a, m)

    def pre_u(y2, x, y, b, m):
        if ("pre", (y2, x, y, b, m)) in parsed:
            return parsed[("pre", (y2, x, y, b, m))]
        return _unit_action(D, y, y2, b, m)

    B = DgBimodule.from_paths(C, D, values, post_u, pre_u, doc.get("name"))
    _check_module(doc, B)
    return B


def _unit_action(C: DgCategory, x: Obj, x2: Obj, a: int, m: int) -> Vec:
    """m acted on by a basis element a, when a is (a multiple of) the unit."""
    if x != x2:
        return {}
    u = C.unit(x)
    if set(u) != {a}:
        return {}
    return {m: C.field.inv(u[a])}


def serialize_bimodule(B: DgBimodule, left_ref: str | None = None, right_ref: str | None = None) -> str:
    C, D = B.left, B.right
    F = B.field
    keys = list(itertools.product(C.objects, D.objects))
    names = _module_names({k: B.at(*k) for k in keys})
    cn, dn = _category_names(C), _category_names(D)
    lines = [
        f"format: {FORMAT}",
        "kind: bimodule",
        f"name: {B.name}",
        f"left: {left_ref or C.name}",
        f"right: {right_ref or D.name}",
        "",
        "[generators]",
    ]
    for x, y in keys:
        for k, n in enumerate(names[(x, y)]):
            lines.append(f"{n}: {format_object(x)} {format_object(y)} degree {B.at(x, y).degrees[k]}")
    lines += ["", "[differential]"]
    for x, y in keys:
        c = B.at(x, y)
        for k, n in enumerate(names[(x, y)]):
            if c.d[k]:
                lines.append(f"{n}: {format_combo(F, c.d[k], names[(x, y)])}")
    lines += ["", "[post]"]
    for x, y in keys:
        for x2 in C.objects:
            for m in range(B.at(x, y).dim):
                for a in range(C.hom(x, x2).dim):
                    r = B.post(x, y, x2, {m: 1}, {a: 1})
                    if r != _unit_action(C, x, x2, a, m):
                        lines.append(f"{names[(x, y)][m]} {cn[(x, x2)][a]}: {format_combo(F, r, names[(x2, y)])}")
    lines += ["", "[pre]"]
    for x, y in keys:
        for y2 in D.objects:
            for m in range(B.at(x, y).dim):
                for b in range(D.hom(y2, y).dim):
                    r = B.pre(y2, x, y, {b: 1}, {m: 1})
                    if r != _unit_action(D, y, y2, b, m):
                        lines.append(f"{dn[(y2, y)][b]} {names[(x, y)][m]}: {format_combo(F, r, names[(x, y2)])}")
    return "\n".join(lines) + "\n"


# cell plans


@dataclass
class Plan:
    name: str
    category: DgCategory
    steps: list[CellStep]
    specs: list[tuple]  # (kind, obj, degree, attach text) for re-serialization

    def build(self) -> DgModule:
        M = build_cell_module(self.category, self.steps, self.name, _opposite_of(self.category)).module
        M.side = "right"
        M.category = self.category
        return M


def _parse_plan(doc: RawDocument, lib: Library, base_dir: Path | None) -> Plan:
    C = _resolve(doc, lib, "base", base_dir, DgCategory)
    F = C.field
    Cop = _opposite_of(C)
    steps: list[CellStep] = []
    specs = []
    for e in doc.table("cells"):
        head, _, attach = e.value.partition(" attach ")
        toks = head.split()
        if len(toks) != 4 or toks[0] not in ("free", "sphere") or toks[2] != "degree":
            raise doc.error("cells", e, "expected 'free X degree N' or 'sphere X degree N attach COMBO'")
        kind, x, deg = toks[0], parse_object(toks[1]), _parse_int(doc, "cells", e, toks[3])
        if x not in C.objects:
            raise doc.error("cells", e, "unknown object")
        if kind == "free":
            if attach:
                raise doc.error("cells", e, "a free cell has no attaching map")
            steps.append(free_cell(F, x, deg))
            specs.append((kind, x, deg, None))
            continue
        current = build_cell_module(C, steps, "tmp", Cop).module
        idx = {n: k for k, n in enumerate(current(x).labels)}
        try:
            v = parse_combo(F, attach, idx.__getitem__)
        except ValueError as exc:
            raise doc.error("cells", e, str(exc)) from None
        steps.append(sphere_cell(F, x, deg, v))
        specs.append((kind, x, deg, attach.strip()))
        try:
            build_cell_module(C, steps, "tmp", Cop)
        except ComplexError as exc:
            raise doc.error("cells", e, str(exc)) from None
    return Plan(doc.get("name"), C, steps, specs)


def serialize_plan(P: Plan, base_ref: str | None = None) -> str:
    lines = [
        f"format: {FORMAT}",
        "kind: plan",
        f"name: {P.name}",
        f"base: {base_ref or P.category.name}",
        "",
        "[cells]",
    ]
    for k, (kind, x, deg, attach) in enumerate(P.specs):
        tail = f" attach {attach}" if attach is not None else ""
        lines.append(f"c{k}: {kind} {format_object(x)} degree {deg}{tail}")
    return "\n".join(lines) + "\n"


# entry points


def parse_document(text: str, source: str = "<string>", lib: Library | None = None, base_dir: Path | None = None):
    doc = parse_raw(text, source)
    lib = lib or Library()
    kind = doc.get("kind")
    try:
        if kind == "category":
            return _parse_category(doc)
        if kind == "module":
            return _parse_module(doc, lib, base_dir)
        if kind == "functor":
            return _parse_functor(doc, lib, base_dir)
        if kind == "bimodule":
            return _parse_bimodule(doc, lib, base_dir)
        return _parse_plan(doc, lib, base_dir)
    except ComplexError as exc:
        raise doc.error(None, None, str(exc)) from None


def serialize(obj, **refs) -> str:
    if isinstance(obj, DgCategory):
        return serialize_category(obj)
    if isinstance(obj, DgBimodule):
        return serialize_bimodule(obj, **refs)
    if isinstance(obj, DgModule):
        return serialize_module(obj, **refs)
    if isinstance(obj, DgFunctor):
        return serialize_functor(obj, **refs)
    if isinstance(obj, Plan):
        return serialize_plan(obj, **refs)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
