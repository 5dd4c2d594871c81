"""The bundled example library (categories, functors, bimodules)."""

from __future__ import annotations

from .dgcat import DgCategory, DgFunctor
from .linalg import Field
from .presentation import CategoryBuilder, FunctorBuilder, algebra_category, matrix_algebra

Q = Field.rationals()


def unit_category(field: Field = Q) -> DgCategory:
    """The dg-category with one object and k as its endomorphisms."""
    return algebra_category(field, ["1"], {("1", "1"): {"1": 1}}, "1", name="unit")


def i_k(field: Field = Q) -> DgCategory:
    """Two objects 0, 1 and one free arrow f: 0 -> 1."""
    b = CategoryBuilder(field, ["0", "1"], "i_k")
    b.gen("0", "0", "1_0").gen("1", "1", "1_1").gen("0", "1", "f")
    b.comp("1_0", "1_0", {"1_0": 1}).comp("1_1", "1_1", {"1_1": 1})
    b.comp("1_0", "f", {"f": 1}).comp("f", "1_1", {"f": 1})
    b.unit("0", "1_0").unit("1", "1_1")
    return b.build()


def dual_numbers(field: Field = Q) -> DgCategory:
    """B(k[x]/x^2)."""
    prod = {("1", "1"): {"1": 1}, ("1", "x"): {"x": 1}, ("x", "1"): {"x": 1}}
    return algebra_category(field, ["1", "x"], prod, "1", name="dual_numbers")


def m2(field: Field = Q) -> DgCategory:
    """B(M_2(k))."""
    return matrix_algebra(unit_category(field), 2, name="m2")


def m2_dual(field: Field = Q) -> DgCategory:
    """B(M_2(k[x]/x^2))."""
    return matrix_algebra(dual_numbers(field), 2, name="m2_dual")


def a2_path(field: Field = Q) -> DgCategory:
    """B(kA_2): path algebra of the quiver 0 -> 1 (idempotents e0, e1, arrow a)."""
    prod = {
        ("e0", "e0"): {"e0": 1},
        ("e1", "e1"): {"e1": 1},
        ("e0", "a"): {"a": 1},
        ("a", "e1"): {"a": 1},
    }
    return algebra_category(field, ["e0", "e1", "a"], prod, {"e0": 1, "e1": 1}, name="a2_path")


def theta(field: Field = Q) -> DgCategory:
    """B(k<t>/t^2) with |t| = -1 and dt = 0."""
    prod = {("1", "1"): {"1": 1}, ("1", "t"): {"t": 1}, ("t", "1"): {"t": 1}}
    return algebra_category(field, ["1", "t"], prod, "1", degrees={"t": -1}, name="theta")


def two_iso_objects(field: Field = Q) -> DgCategory:
    """Objects x, y with every hom equal to k and composition multiplication."""
    b = CategoryBuilder(field, ["x", "y"], "two_iso_objects")
    names = {("x", "x"): "1x", ("y", "y"): "1y", ("x", "y"): "u", ("y", "x"): "v"}
    for (s, t), n in names.items():
        b.gen(s, t, n)
    for (s, t), n in names.items():
        for (t2, r), m in names.items():
            if t == t2:
                b.comp(n, m, {names[(s, r)]: 1})
    b.unit("x", "1x").unit("y", "1y")
    return b.build()


def two_orthogonal_objects(field: Field = Q) -> DgCategory:
    """Objects x, y with End = k and no maps between them."""
    b = CategoryBuilder(field, ["x", "y"], "two_orthogonal_objects")
    b.gen("x", "x", "1x").gen("y", "y", "1y")
    b.comp("1x", "1x", {"1x": 1}).comp("1y", "1y", {"1y": 1})
    b.unit("x", "1x").unit("y", "1y")
    return b.build()


CATEGORIES = {
    "unit": unit_category,
    "i_k": i_k,
    "dual_numbers": dual_numbers,
    "m2": m2,
    "m2_dual": m2_dual,
    "a2_path": a2_path,
    "theta": theta,
    "two_iso_objects": two_iso_objects,
    "two_orthogonal_objects": two_orthogonal_objects,
}


def category(name: str, field: Field = Q) -> DgCategory:
    return CATEGORIES[name](field)


# functors


def i_k_to_two_iso(field: Field = Q) -> DgFunctor:
    return (
        FunctorBuilder(i_k(field), two_iso_objects(field), "i_k_to_two_iso")
        .obj("0", "x").obj("1", "y")
        .map("1_0", {"1x": 1}).map("1_1", {"1y": 1}).map("f", {"u": 1})
        .build()
    )


def two_iso_to_unit(field: Field = Q) -> DgFunctor:
    U = unit_category(field)
    b = FunctorBuilder(two_iso_objects(field), U, "two_iso_to_unit").obj("x", "*").obj("y", "*")
    for n in ("1x", "1y", "u", "v"):
        b.map(n, {"1": 1})
    return b.build()


def unit_to_dual(field: Field = Q) -> DgFunctor:
    return FunctorBuilder(unit_category(field), dual_numbers(field), "unit_to_dual").obj("*", "*").map("1", {"1": 1}).build()


def dual_augmentation(field: Field = Q) -> DgFunctor:
    """k[x]/x^2 -> k, x -> 0."""
    return FunctorBuilder(dual_numbers(field), unit_category(field), "dual_augmentation").obj("*", "*").map("1", {"1": 1}).build()


def dual_sign_twist(field: Field = Q) -> DgFunctor:
    """The automorphism x -> -x of k[x]/x^2."""
    D = dual_numbers(field)
    return FunctorBuilder(D, D, "dual_sign_twist").obj("*", "*").map("1", {"1": 1}).map("x", {"x": -1}).build()


def unit_into_two_iso(field: Field = Q) -> DgFunctor:
    return FunctorBuilder(unit_category(field), two_iso_objects(field), "unit_into_two_iso").obj("*", "x").map("1", {"1x": 1}).build()


def unit_into_orthogonal(field: Field = Q) -> DgFunctor:
    return (
        FunctorBuilder(unit_category(field), two_orthogonal_objects(field), "unit_into_orthogonal")
        .obj("*", "x").map("1", {"1x": 1}).build()
    )


def i_k_collapse(field: Field = Q) -> DgFunctor:
    b = FunctorBuilder(i_k(field), unit_category(field), "i_k_collapse").obj("0", "*").obj("1", "*")
    for n in ("1_0", "1_1", "f"):
        b.map(n, {"1": 1})
    return b.build()


FUNCTORS = {
    "i_k_to_two_iso": i_k_to_two_iso,
    "two_iso_to_unit": two_iso_to_unit,
    "unit_to_dual": unit_to_dual,
    "dual_augmentation": dual_augmentation,
    "dual_sign_twist": dual_sign_twist,
    "unit_into_two_iso": unit_into_two_iso,
    "unit_into_orthogonal": unit_into_orthogonal,
    "i_k_collapse": i_k_collapse,
}

# composable pairs (f, g) for the bimodule-composition check
COMPOSABLE_PAIRS = [
    ("i_k_to_two_iso", "two_iso_to_unit"),
    ("unit_to_dual", "dual_augmentation"),
    ("unit_to_dual", "dual_sign_twist"),
]


def functor(name: str, field: Field = Q) -> DgFunctor:
    return FUNCTORS[name](field)


# classes to invert, as (x, y, basis label) triples, for the localization check
LOCALIZATION_SETS = {
    "i_k": [("0", "1", "f")],
    "two_iso_objects": [("x", "y", "u")],
    "unit": [],
    "unit_identity": [("*", "*", "1")],
    "two_orthogonal_objects": [("x", "x", "1x")],
    "theta": [("*", "*", "1")],
}


def localization_set(key: str, field: Field = Q) -> tuple[DgCategory, list]:
    """The category and the classes of a LOCALIZATION_SETS entry, as basis vectors."""
    C = category("unit" if key == "unit_identity" else key, field)
    return C, [(x, y, {C.hom(x, y).labels.index(lab): 1}) for x, y, lab in LOCALIZATION_SETS[key]]
