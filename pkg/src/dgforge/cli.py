"""Command-line front end.  Every command is a thin wrapper over a library call.

Exit status: 0 on success, 2 when an input fails validation, 3 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import os
import sys
from fractions import Fraction
from typing import Sequence

from . import io as dio
from .derived import (
    derived_tensor,
    hochschild,
    map_homotopy_endo,
    map_homotopy_unit,
    picard_verify,
    rhom,
    tensor_over,
)
from .dgcat import (
    DgCategory,
    DgFunctor,
    H0Category,
    find_iso,
    obj_str,
    opposite,
    opposite_functor,
    tensor_cat,
    validate_dgcat,
    validate_functor,
    verify_iso_witness,
)
from .modules import (
    DgBimodule,
    DgModule,
    induct_along,
    phi,
    qr_search,
    restrict_along,
    validate_module,
    verify_qr_witness,
)
from .quotient import WindowError, check_localization_property, drinfeld_quotient, localization

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_seed() -> int:
    raw = os.environ.get("DGFORGE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DGFORGE_SEED must be an integer, got {raw!r}") from None


# formatting


def fmt_dims(dims: dict) -> str:
    if not dims:
        return "(none)"
    return " ".join(f"H^{n}={d}" for n, d in sorted(dims.items()))


def fmt_coords(coords: Sequence) -> str:
    return "[" + ", ".join(str(Fraction(c)) if not isinstance(c, int) else str(c) for c in coords) + "]"


def fmt_bound(b: Fraction) -> str:
    if b == 0:
        return "0"
    if b.numerator == 1:
        return f"1/{b.denominator}" if b.denominator < 10**12 else f"< 1e-{len(str(b.denominator)) - 1}"
    return f"{float(b):.3e}"


class Report:
    def __init__(self, argv: Sequence[str]):
        self.lines = ["command: dgforge " + " ".join(argv)]

    def add(self, key: str, value: object = None) -> None:
        self.lines.append(key if value is None else f"{key}: {value}")

    def input(self, lib: dio.Library, ref: str, obj) -> None:
        self.add(f"input {ref}", f"{type(obj).__name__} {obj.name} sha256:{lib.digest_of(obj)}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def as_comments(self) -> str:
        return "".join(f"# {ln}\n" for ln in self.lines)


# loading


def load(lib: dio.Library, ref: str, want: type | tuple = object):
    try:
        lib.key(ref)
    except FileNotFoundError:
        raise UsageError(f"no document or bundled example named {ref!r}") from None
    obj = lib.load(ref)
    if not isinstance(obj, want):
        names = want.__name__ if isinstance(want, type) else " or ".join(t.__name__ for t in want)
        raise UsageError(f"{ref} is a {type(obj).__name__}, expected {names}")
    return obj


def parse_object(C: DgCategory, text: str):
    x = dio.parse_object(text)
    if x not in C.objects:
        raise UsageError(f"{text!r} is not an object of {C.name}")
    return x


def parse_class(C: DgCategory, text: str):
    """A combination of basis names of one hom of C, as (x, y, vector)."""
    names = dio._base_names(C)
    used = []

    def lookup(n):
        if n not in names:
            raise KeyError(n)
        used.append(names[n][:2])
        return names[n][2]

    try:
        v = dio.parse_combo(C.field, text, lookup)
    except ValueError as exc:
        raise UsageError(f"bad class {text!r}: {exc}") from None
    pairs = set(used)
    if len(pairs) != 1:
        raise UsageError(f"class {text!r} must lie in a single hom")
    x, y = pairs.pop()
    return x, y, v


def window_of(lo: int) -> tuple[int, int]:
    if lo > 0:
        raise UsageError("--window takes the lowest degree, which must be <= 0")
    return (lo, 0)


def side_of(M: DgModule) -> str:
    return getattr(M, "side", "left")


def mark(M: DgModule, C: DgCategory, side: str) -> DgModule:
    M.side, M.category = side, C
    return M


# commands


def cmd_validate(a, lib, rep):
    obj = load(lib, a.document)
    rep.input(lib, a.document, obj)
    if isinstance(obj, DgCategory):
        v = validate_dgcat(obj)
    elif isinstance(obj, DgFunctor):
        v = validate_functor(obj)
    elif isinstance(obj, dio.Plan):
        v = validate_module(obj.build())
    else:
        v = validate_module(obj)
    rep.add("result", "pass" if v.ok else "FAIL")
    rep.add("checks", v.checked)
    for msg in v.violations[:50]:
        rep.add("violation", msg)
    return EXIT_OK if v.ok else EXIT_INVALID


def cmd_h0(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    h = H0Category(C)
    for x, y in itertools.product(C.objects, repeat=2):
        rep.add(f"dim [C]({obj_str(x)},{obj_str(y)})", h.dim(x, y))
    for x in C.objects:
        rep.add(f"unit class {obj_str(x)}", fmt_coords(h.unit_class(x)))
    for x, y, z in itertools.product(C.objects, repeat=3):
        for (i, j), r in sorted(h.structure_constants(x, y, z).items()):
            if any(r):
                rep.add(f"compose {obj_str(x)}->{obj_str(y)}->{obj_str(z)} ({i},{j})", fmt_coords(r))
    return EXIT_OK


def cmd_cohomology(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    if a.hom:
        pairs = [(parse_object(C, a.hom[0]), parse_object(C, a.hom[1]))]
    else:
        pairs = list(itertools.product(C.objects, repeat=2))
    for x, y in pairs:
        h = C.hom(x, y)
        dims = {n: h.cohomology_dim(n) for n in h.support}
        rep.add(f"hom({obj_str(x)},{obj_str(y)})", fmt_dims(dims))
    return EXIT_OK


def emit_document(rep: Report, text: str) -> str:
    return rep.as_comments() + text


def cmd_tensor_cat(a, lib, rep):
    A = load(lib, a.first, DgCategory)
    B = load(lib, a.second, DgCategory)
    rep.input(lib, a.first, A)
    rep.input(lib, a.second, B)
    return EXIT_OK, emit_document(rep, dio.serialize(tensor_cat(A, B)))


def cmd_op(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    return EXIT_OK, emit_document(rep, dio.serialize(opposite(C)))


def cmd_phi(a, lib, rep):
    f = load(lib, a.functor, DgFunctor)
    rep.input(lib, a.functor, f)
    B = phi(f, f"phi({f.name})")
    text = dio.serialize(B, left_ref=lib.ref_of(f.source), right_ref=lib.ref_of(f.target))
    return EXIT_OK, emit_document(rep, text)


def cmd_restrict(a, lib, rep):
    f = load(lib, a.functor, DgFunctor)
    M = load(lib, a.module, DgModule)
    rep.input(lib, a.functor, f)
    rep.input(lib, a.module, M)
    if isinstance(M, DgBimodule) or M.category is not f.target:
        raise UsageError("the module must be a module over the functor's target")
    if side_of(M) == "left":
        out = restrict_along(f, M)
    else:
        out = restrict_along(opposite_functor(f, dio._opposite_of(f.source), M.base), M)
    mark(out, f.source, side_of(M))
    return EXIT_OK, emit_document(rep, dio.serialize(out, base_ref=lib.ref_of(f.source)))


def cmd_induct(a, lib, rep):
    f = load(lib, a.functor, DgFunctor)
    M = load(lib, a.module, DgModule)
    rep.input(lib, a.functor, f)
    rep.input(lib, a.module, M)
    if isinstance(M, DgBimodule) or M.category is not f.source:
        raise UsageError("the module must be a module over the functor's source")
    if side_of(M) == "left":
        out = induct_along(f, M)
    else:
        out = induct_along(opposite_functor(f, M.base, dio._opposite_of(f.target)), M)
    mark(out, f.target, side_of(M))
    return EXIT_OK, emit_document(rep, dio.serialize(out, base_ref=lib.ref_of(f.target)))


def cmd_qr_test(a, lib, rep):
    F = load(lib, a.bimodule, DgBimodule)
    rep.input(lib, a.bimodule, F)
    rep.add("seed", a.seed)
    rep.add("trials", a.trials)
    res = qr_search(F, a.seed, a.trials)
    if res.witness is None:
        rep.add("result", "no witness found")
        rep.add("failed column", obj_str(res.failed_column))
        rep.add("failure probability bound", fmt_bound(res.failure_bound))
        for n in res.notes:
            rep.add("note", n)
        return EXIT_OK
    w = res.witness
    rep.add("result", "quasi-representable")
    for x in F.left.objects:
        cw = w.columns[x]
        rep.add(f"column {obj_str(x)}", f"h_{obj_str(cw.y)} via class {fmt_coords(cw.coords)}")
    rep.add("verified", "yes" if verify_qr_witness(F, w) else "NO")
    return EXIT_OK


def cmd_iso(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    x, y = parse_object(C, a.x), parse_object(C, a.y)
    rep.add("seed", a.seed)
    rep.add("trials", a.trials)
    h = H0Category(C)
    res = find_iso(C, x, y, a.seed, a.trials, h)
    if res.witness is None:
        rep.add("result", "no isomorphism found")
        rep.add("search", "exhaustive" if res.exhaustive else "sampled")
        rep.add("failure probability bound", fmt_bound(res.failure_bound))
        return EXIT_OK
    w = res.witness
    rep.add("result", "isomorphic")
    rep.add(f"u in [C]({obj_str(x)},{obj_str(y)})", fmt_coords(w.u))
    rep.add(f"v in [C]({obj_str(y)},{obj_str(x)})", fmt_coords(w.v))
    rep.add("verified", "yes" if verify_iso_witness(h, w) else "NO")
    return EXIT_OK


def report_truncation(rep: Report, tr) -> None:
    rep.add("truncation", tr.describe())
    for n in tr.notes:
        rep.add("note", n)


def cmd_rhom(a, lib, rep):
    M = load(lib, a.source, DgModule)
    N = load(lib, a.target, DgModule)
    rep.input(lib, a.source, M)
    rep.input(lib, a.target, N)
    if M.base is not N.base:
        raise UsageError("the two modules live over different categories")
    res = rhom(M, N, a.bar_length, stabilize=True)
    report_truncation(rep, res.report)
    rep.add("RHom", fmt_dims(res.dims()))
    return EXIT_OK


def cmd_tensor(a, lib, rep):
    E = load(lib, a.first, DgBimodule)
    F = load(lib, a.second, DgBimodule)
    rep.input(lib, a.first, E)
    rep.input(lib, a.second, F)
    if E.right is not F.left:
        raise UsageError("the middle categories differ")
    if a.strict:
        T = tensor_over(E, F)
        rep.add("mode", "strict")
        for (x, w), c in T.values.items():
            rep.add(f"({obj_str(x)},{obj_str(w)})", fmt_dims({n: c.cohomology_dim(n) for n in c.support}))
        return EXIT_OK
    res = derived_tensor(E, F, a.bar_length, stabilize=True)
    rep.add("mode", "derived")
    report_truncation(rep, res.report)
    for (x, w), dims in res.dims().items():
        rep.add(f"({obj_str(x)},{obj_str(w)})", fmt_dims(dims))
    return EXIT_OK


def cmd_hh(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    res = hochschild(C, a.max_degree, a.bar_length, stabilize=True)
    report_truncation(rep, res.report)
    for i in range(0, a.max_degree + 1):
        rep.add(f"HH^{i}", res.dims.get(i, "outside window"))
    return EXIT_OK


def cmd_map_homotopy(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    x = parse_object(C, a.object)
    if a.i < 1:
        raise UsageError("--i must be >= 1")
    res = map_homotopy_unit(C, x, a.i)
    rep.add("i", a.i)
    if res.dimension is not None:
        rep.add("dimension", res.dimension)
    else:
        rep.add("endomorphism algebra dimension", res.end_algebra_dim)
    rep.add("description", res.description)
    return EXIT_OK


def cmd_map_homotopy_endo(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    if a.i < 1:
        raise UsageError("--i must be >= 1")
    res = map_homotopy_endo(C, a.i)
    deg = 1 - a.i if a.i >= 2 else 0
    report_truncation(rep, res.report)
    rep.add("i", a.i)
    rep.add(f"dimension (HH^{deg})", res.dims.get(deg, "outside window"))
    return EXIT_OK


def cmd_picard(a, lib, rep):
    A = load(lib, a.category, DgCategory)
    P = load(lib, a.first, DgBimodule)
    Q = load(lib, a.second, DgBimodule)
    for ref, obj in ((a.category, A), (a.first, P), (a.second, Q)):
        rep.input(lib, ref, obj)
    if len(A.objects) != 1:
        raise UsageError("picard-verify needs a one-object category")
    for B in (P, Q):
        if B.left is not A or B.right is not A:
            raise UsageError(f"{B.name} is not a bimodule over {A.name}")
    rep.add("seed", a.seed)
    rep.add("trials", a.trials)
    res = picard_verify(A, P, Q, a.bar_length, a.seed, a.trials)
    for side, chk in (("P (x) Q", res.left), ("Q (x) P", res.right)):
        w = "empty" if chk.window is None else f"[{chk.window[0]}, {chk.window[1]}]"
        rep.add(f"{side} window", w)
        rep.add(f"{side} dims", fmt_dims(chk.dims))
        rep.add(f"{side} quasi-iso to diagonal", "found" if chk.found else f"not found ({chk.note})")
    rep.add("result", "invertible pair verified" if res.verified else "not verified")
    return EXIT_OK


def dims_in(C: DgCategory, x, y, window) -> dict:
    h = C.hom(x, y)
    return {n: h.cohomology_dim(n) for n in range(window[0], window[1] + 1)}


def cmd_quotient(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    kill = [parse_object(C, t) for t in a.kill]
    Q = drinfeld_quotient(C, kill, window_of(a.window))
    r = Q.report
    rep.add("killed", " ".join(obj_str(x) for x in r.kill) or "(none)")
    rep.add("contractions per word", r.limit)
    rep.add("guaranteed window", "none" if r.window is None else f"[{r.window[0]}, {r.window[1]}]")
    for n in r.notices:
        rep.add("notice", n)
    if a.validate:
        v = validate_dgcat(Q)
        rep.add("axioms", "pass" if v.ok else "FAIL")
    win = r.window or window_of(a.window)
    for x, y in itertools.product(Q.objects, repeat=2):
        rep.add(f"hom({obj_str(x)},{obj_str(y)})", fmt_dims(dims_in(Q, x, y, win)))
    return EXIT_OK


def cmd_localize(a, lib, rep):
    C = load(lib, a.category, DgCategory)
    rep.input(lib, a.category, C)
    S = [parse_class(C, t) for t in a.invert]
    L = localization(C, S, window_of(a.window))
    for (x, y, v), t in zip(S, a.invert):
        rep.add("inverted", f"{t} in hom({obj_str(x)},{obj_str(y)})")
    rep.add("window", f"[{L.window[0]}, {L.window[1]}]")
    rep.add("stabilized", "yes" if L.stabilized else "no")
    for n in L.notices:
        rep.add("notice", n)
    for x, y in itertools.product(C.objects, repeat=2):
        rep.add(f"hom({obj_str(x)},{obj_str(y)})", fmt_dims(L.dims[(x, y)]))
    ok = check_localization_property(C, S, L.category, L.functor)
    rep.add("classes become invertible", "yes" if ok else "no")
    return EXIT_OK


def cmd_cell_build(a, lib, rep):
    P = load(lib, a.plan, dio.Plan)
    rep.input(lib, a.plan, P)
    M = P.build()
    for x in M.base.objects:
        rep.add(f"H({obj_str(x)})", fmt_dims({n: M(x).cohomology_dim(n) for n in M(x).support}))
    return EXIT_OK, emit_document(rep, dio.serialize(M, base_ref=lib.ref_of(P.category), side="right"))


def cmd_examples(a, lib, rep):
    if a.name:
        load(lib, a.name)
        return EXIT_OK, lib.text(a.name)[2]
    out = []
    for name in lib.bundled:
        kind = next(ln for ln in lib.bundled[name]().splitlines() if ln.startswith("kind:"))[5:].strip()
        out.append(f"{name}\t{kind}")
    return EXIT_OK, "\n".join(out) + "\n"


# parser


def build_parser() -> Parser:
    p = Parser(prog="dgforge", description="Exact computations with finite dg-categories.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    def command(name, fn, help):
        s = sub.add_parser(name, help=help, description=help)
        s.set_defaults(fn=fn)
        return s

    def randomized(s):
        s.add_argument("--seed", type=int, default=None, help="random seed (default: $DGFORGE_SEED or 0)")
        s.add_argument("--trials", type=int, default=64, help="number of random trials (default 64)")

    s = command("validate", cmd_validate, "check every axiom of a document")
    s.add_argument("document")
    s = command("h0", cmd_h0, "the homotopy category [C]")
    s.add_argument("category")
    s = command("cohomology", cmd_cohomology, "cohomology of hom complexes")
    s.add_argument("category")
    s.add_argument("--hom", nargs=2, metavar=("X", "Y"))
    s = command("tensor-cat", cmd_tensor_cat, "the tensor product of two categories, as a document")
    s.add_argument("first")
    s.add_argument("second")
    s = command("op", cmd_op, "the opposite category, as a document")
    s.add_argument("category")
    s = command("phi", cmd_phi, "the bimodule of a functor, as a document")
    s.add_argument("functor")
    s = command("restrict", cmd_restrict, "restriction of a module along a functor")
    s.add_argument("functor")
    s.add_argument("module")
    s = command("induct", cmd_induct, "induction of a module along a functor")
    s.add_argument("functor")
    s.add_argument("module")
    s = command("qr-test", cmd_qr_test, "search for a right quasi-representability witness")
    s.add_argument("bimodule")
    randomized(s)
    s = command("iso", cmd_iso, "search for an isomorphism in [C]")
    s.add_argument("category")
    s.add_argument("x")
    s.add_argument("y")
    randomized(s)
    s = command("rhom", cmd_rhom, "derived morphisms between two modules")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--bar-length", type=int, default=5)
    s = command("tensor", cmd_tensor, "tensor product of bimodules over the middle category")
    s.add_argument("first")
    s.add_argument("second")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--strict", action="store_true")
    g.add_argument("--derived", action="store_true")
    s.add_argument("--bar-length", type=int, default=5)
    s = command("hh", cmd_hh, "Hochschild cohomology dimensions")
    s.add_argument("category")
    s.add_argument("--max-degree", type=int, default=3)
    s.add_argument("--bar-length", type=int, default=None)
    s = command("map-homotopy", cmd_map_homotopy, "homotopy groups of the mapping space from the unit category")
    s.add_argument("category")
    s.add_argument("--object", required=True)
    s.add_argument("--i", type=int, required=True)
    s = command("map-homotopy-endo", cmd_map_homotopy_endo, "homotopy groups at the identity of the endomorphism space")
    s.add_argument("category")
    s.add_argument("--i", type=int, required=True)
    s = command("picard-verify", cmd_picard, "check that two bimodules are inverse under derived tensor")
    s.add_argument("category")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--bar-length", type=int, default=5)
    randomized(s)
    s = command("quotient", cmd_quotient, "kill objects by adjoining contractions")
    s.add_argument("category")
    s.add_argument("--kill", nargs="*", default=[], metavar="X")
    s.add_argument("--window", type=int, default=-6, metavar="W", help="lowest degree of the window [W, 0]")
    s.add_argument("--validate", action="store_true", help="also re-check the axioms of the quotient")
    s = command("localize", cmd_localize, "invert degree-0 classes")
    s.add_argument("category")
    s.add_argument("--invert", action="append", default=[], metavar="CLASSREF",
                   help="a combination of basis names of one hom, e.g. 'f' or '2*u'")
    s.add_argument("--window", type=int, default=-6, metavar="W", help="lowest degree of the window [W, 0]")
    s = command("cell-build", cmd_cell_build, "build a cell module from a plan, as a document")
    s.add_argument("plan")
    s = command("examples", cmd_examples, "list bundled documents, or print one")
    s.add_argument("name", nargs="?")
    return p


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Report(argv)
    lib = dio.Library()
    try:
        if hasattr(a, "seed") and a.seed is None:
            a.seed = default_seed()
        if hasattr(a, "bar_length") and a.bar_length is not None and a.bar_length < 1:
            raise UsageError("--bar-length must be positive")
        if hasattr(a, "trials") and a.trials < 1:
            raise UsageError("--trials must be positive")
        out = a.fn(a, lib, rep)
    except dio.DocumentError as exc:
        print(f"dgforge: invalid document: {exc}", file=stderr)
        return EXIT_INVALID
    except (UsageError, WindowError, ValueError) as exc:
        print(f"dgforge: error: {exc}", file=stderr)
        return EXIT_USAGE
    if isinstance(out, tuple):
        code, text = out
    else:
        code, text = out, rep.text()
    stdout.write(text)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
