"""Bundled documents, addressable by name (or ``examples/NAME``) from the CLI."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

from . import examples as E
from .derived import build_cell_module, free_cell, sphere_cell
from .dgcat import obj_str
from .modules import diagonal, phi, representable_bimodule, yoneda_right

# (base category, cells) with cells as (kind, object, degree, attach label or None)
PLANS = {
    "cone_i_k_f": ("i_k", [("free", "1", 0, None), ("sphere", "0", 0, "f")]),
    "cone_two_iso_u": ("two_iso_objects", [("free", "y", 0, None), ("sphere", "x", 0, "u")]),
    "dual_koszul": ("dual_numbers", [("free", "*", 0, None), ("sphere", "*", 0, "x")]),
}


def _plan_text(name: str) -> str:
    from .io import FORMAT

    base, cells = PLANS[name]
    C = E.category(base)
    steps = []
    lines = [f"format: {FORMAT}", "kind: plan", f"name: {name}", f"base: {base}", "", "[cells]"]
    for k, (kind, x, deg, hom_label) in enumerate(cells):
        if kind == "free":
            steps.append(free_cell(C.field, x, deg))
            lines.append(f"c{k}: free {x} degree {deg}")
            continue
        # the attaching element is named after its materialized label in M(x)
        M = build_cell_module(C, steps).module
        label = next(lab for lab in M(x).labels if lab.endswith("." + hom_label))
        idx = M(x).labels.index(label)
        steps.append(sphere_cell(C.field, x, deg, {idx: 1}))
        lines.append(f"c{k}: sphere {x} degree {deg} attach {label}")
    return "\n".join(lines) + "\n"


def _documents() -> dict[str, Callable[[], str]]:
    from .io import serialize

    docs: dict[str, Callable[[], str]] = {}
    for name in E.CATEGORIES:
        docs[name] = lambda name=name: serialize(E.category(name))
    for name in E.FUNCTORS:
        docs[name] = lambda name=name: serialize(E.functor(name))
        docs[f"phi_{name}"] = lambda name=name: _phi_text(name)
    for name in E.CATEGORIES:
        docs[f"diag_{name}"] = lambda name=name: _diag_text(name)
        C = E.category(name)
        for x in C.objects:
            tag = f"{name}_{_tag(x)}"
            docs[f"h_{tag}"] = lambda name=name, x=x: _yoneda_text(name, x)
            docs[f"rep_{tag}"] = lambda name=name, x=x: _rep_text(name, x)
    for name in PLANS:
        docs[name] = lambda name=name: _plan_text(name)
    return docs


def _phi_text(name: str) -> str:
    from .io import serialize

    f = E.functor(name)
    return serialize(phi(f, f"phi_{name}"), left_ref=f.source.name, right_ref=f.target.name)


def _diag_text(name: str) -> str:
    from .io import serialize

    D = diagonal(E.category(name))
    D.name = f"diag_{name}"
    return serialize(D, left_ref=name, right_ref=name)


def _yoneda_text(name: str, x) -> str:
    from .io import serialize

    M = yoneda_right(E.category(name), x)
    M.name = f"h_{name}_{_tag(x)}"
    return serialize(M, base_ref=name, side="right")


def _rep_text(name: str, x) -> str:
    from .io import serialize

    B = representable_bimodule(E.unit_category(), E.category(name), x, f"rep_{name}_{_tag(x)}")
    return serialize(B, left_ref="unit", right_ref=name)


@lru_cache(maxsize=None)
def _cached(name: str) -> str:
    return bundled_documents_raw()[name]()


@lru_cache(maxsize=1)
def bundled_documents_raw() -> dict[str, Callable[[], str]]:
    return _documents()


def bundled_documents() -> dict[str, Callable[[], str]]:
    """name -> text thunk; texts are generated once and cached."""
    return {n: (lambda n=n: _cached(n)) for n in bundled_documents_raw()}


def _tag(x) -> str:
    s = obj_str(x)
    return "pt" if s == "*" else s
