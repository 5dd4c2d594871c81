import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from dgforge import examples as E
from dgforge.complexes import Complex
from dgforge.dgcat import (
    DgCategory,
    DgFunctor,
    H0Category,
    find_iso,
    iso_in_h0,
    is_quasi_equivalence,
    is_quasi_essentially_surjective,
    is_quasi_fully_faithful,
    opposite,
    quasi_fully_faithful_report,
    tensor_cat,
    validate_dgcat,
    validate_functor,
    verify_iso_witness,
)
from dgforge.linalg import Field
from support import acyclic_epsilon, exterior_dg, random_path_category, truncated_polynomial

Q = Field.rationals()
F3 = Field.prime(3)
seeds = st.integers(0, 10**6)


def test_bundled_examples_validate():
    for name in E.CATEGORIES:
        assert validate_dgcat(E.category(name)).ok, name
    for name in E.FUNCTORS:
        assert validate_functor(E.functor(name)).ok, name


def test_helper_categories_validate():
    for C in (acyclic_epsilon(), exterior_dg(), truncated_polynomial(Q, 3), truncated_polynomial(F3, 2, degree=-1)):
        rep = validate_dgcat(C)
        assert rep.ok, rep.summary()


def test_corrupted_composition_names_the_triple():
    C = truncated_polynomial(Q, 3)
    o = "*"
    # x1 * x2 = x2 while x2 * x1 stays 0: (x1 x1) x1 = 0 but x1 (x1 x1) = x2
    C.comp[(o, o, o)][(1, 2)] = {2: 1}
    rep = validate_dgcat(C)
    assert not rep.ok
    assert any(v.startswith("associativity: (x1, x1, x1)") for v in rep.violations)


def test_broken_leibniz_and_units_are_reported():
    C = exterior_dg()
    o = "*"
    # e * 1 = 0 breaks the right unit law and Leibniz at (e, 1)
    C.comp[(o, o, o)].pop((1, 0))
    rep = validate_dgcat(C)
    assert any(v.startswith("right unit: e") for v in rep.violations)
    assert any(v.startswith("Leibniz: (e, 1)") for v in rep.violations)


def test_validation_never_raises_on_bad_differential():
    C = E.dual_numbers()
    h = C.hom("*", "*")
    # x -> x is not a degree +1 map; the report records it instead of throwing
    C.homs[("*", "*")] = Complex(Q, h.degrees, [{}, {1: 1}], h.labels, check=False)
    rep = validate_dgcat(C)
    assert not rep.ok and rep.violations[0].startswith("d^2/degree")


# opposite


def test_opposite_of_unit_is_unit():
    U = E.unit_category()
    assert opposite(U).structurally_equal(U)


def test_opposite_of_commutative_algebra_is_itself():
    for C in (E.dual_numbers(), truncated_polynomial(Q, 4)):
        assert opposite(C).structurally_equal(C)


def test_opposite_sign():
    C = exterior_dg()
    Cop = opposite(C)
    assert validate_dgcat(Cop).ok
    o = "*"
    # |e||u| = 0, so e * u in C^op is u * e in C with no sign
    assert Cop.compose_basis(o, o, o, 1, 2) == C.compose_basis(o, o, o, 2, 1)


def test_opposite_of_odd_products_picks_up_a_sign():
    # search for a quiver with two composable odd arrows so the Koszul sign shows up
    for seed in range(200):
        C = random_path_category(random.Random(seed), objects=1, arrows=2, max_len=2)
        h = C.hom("o0", "o0")
        odd = [i for i in range(h.dim) if h.degrees[i] % 2]
        pairs = [(i, j) for i in odd for j in odd if C.compose_basis("o0", "o0", "o0", j, i)]
        if pairs:
            break
    i, j = pairs[0]
    Cop = opposite(C)
    assert Cop.compose_basis("o0", "o0", "o0", i, j) == {k: -v for k, v in C.compose_basis("o0", "o0", "o0", j, i).items()}


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_opposite_twice_is_identity(seed):
    C = random_path_category(random.Random(seed))
    assert validate_dgcat(C).ok
    Cop = opposite(C)
    assert validate_dgcat(Cop).ok
    assert opposite(Cop).structurally_equal(C)


# tensor


def test_unit_tensor_is_identity_up_to_renaming():
    U = E.unit_category()
    for name in ("a2_path", "theta", "two_iso_objects", "i_k"):
        C = E.category(name)
        T = tensor_cat(U, C).rename_objects({("*", x): x for x in C.objects})
        assert T.structurally_equal(C), name


def test_dual_tensor_dual_end_dimension():
    D = E.dual_numbers()
    T = tensor_cat(D, D)
    h = T.hom(("*", "*"), ("*", "*"))
    assert sum(1 for n in h.degrees if n == 0) == 4
    assert validate_dgcat(T).ok


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_tensor_of_random_categories_validates(seed):
    rng = random.Random(seed)
    C = random_path_category(rng, objects=2, arrows=2, max_len=2)
    D = random_path_category(rng, objects=1, arrows=2, max_len=2)
    rep = validate_dgcat(tensor_cat(C, D))
    assert rep.ok, rep.summary()


def test_tensor_with_a_differential_validates():
    T = tensor_cat(exterior_dg(), E.theta())
    assert validate_dgcat(T).ok


# h0


def test_h0_of_degree_zero_category_is_itself():
    for name in ("a2_path", "m2", "dual_numbers", "two_iso_objects"):
        C = E.category(name)
        h = H0Category(C)
        for x, y in itertools.product(C.objects, repeat=2):
            assert h.dim(x, y) == C.hom(x, y).dim
        for x, y, z in itertools.product(C.objects, repeat=3):
            for (i, j), row in h.structure_constants(x, y, z).items():
                # canonical representatives are the basis vectors themselves
                want = C.compose(x, y, z, h.rep(x, y, [int(k == i) for k in range(h.dim(x, y))]),
                                 h.rep(y, z, [int(k == j) for k in range(h.dim(y, z))]))
                assert h.rep(x, z, row) == want


def test_h0_of_acyclic_algebra_is_zero():
    assert H0Category(acyclic_epsilon()).dim("*", "*") == 0


def test_h0_of_i_k():
    h = H0Category(E.i_k())
    assert h.dims() == {("0", "0"): 1, ("0", "1"): 1, ("1", "0"): 0, ("1", "1"): 1}


def test_h0_of_exterior_dg():
    # H^0 = k.1 + k.u / k.u = k; u = de is a coboundary
    assert H0Category(exterior_dg()).dim("*", "*") == 1


def perturbed_constants(C, h, x, y, z, rng):
    """Structure constants recomputed on representatives shifted by random coboundaries."""
    F = C.field

    def shifted(a, b, coords):
        v = dict(h.rep(a, b, coords))
        hom = C.hom(a, b)
        for g in hom.indices(-1):
            F.axpy(v, F(rng.randint(-3, 3)), hom.d[g])
        return v

    out = {}
    for i in range(h.dim(x, y)):
        for j in range(h.dim(y, z)):
            u = shifted(x, y, [int(k == i) for k in range(h.dim(x, y))])
            v = shifted(y, z, [int(k == j) for k in range(h.dim(y, z))])
            out[(i, j)] = h.class_of(x, z, C.compose(x, y, z, u, v))
    return out


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_h0_composition_is_independent_of_representatives(seed):
    rng = random.Random(seed)
    for C in (exterior_dg(), tensor_cat(exterior_dg(), E.two_iso_objects()), tensor_cat(exterior_dg(), E.i_k())):
        h = H0Category(C)
        for x, y, z in itertools.product(C.objects, repeat=3):
            assert perturbed_constants(C, h, x, y, z, rng) == h.structure_constants(x, y, z)


def test_h0_composition_is_associative_and_unital():
    C = tensor_cat(exterior_dg(), E.a2_path())
    h = H0Category(C)
    (o,) = C.objects
    n = h.dim(o, o)
    basis = [[int(k == i) for k in range(n)] for i in range(n)]
    for a, b, c in itertools.product(basis, repeat=3):
        assert h.compose(o, o, o, h.compose(o, o, o, a, b), c) == h.compose(o, o, o, a, h.compose(o, o, o, b, c))
    one = h.unit_class(o)
    for a in basis:
        assert h.compose(o, o, o, one, a) == a == h.compose(o, o, o, a, one)


# isomorphisms in [C]


def test_iso_of_an_object_with_itself():
    C = E.dual_numbers()
    w = iso_in_h0(C, "*", "*")
    assert w is not None and w.u == w.v == H0Category(C).unit_class("*")


def test_iso_between_two_isomorphic_objects():
    w = iso_in_h0(E.two_iso_objects(), "x", "y")
    assert (w.u, w.v) == ([1], [1])
    assert verify_iso_witness(H0Category(E.two_iso_objects()), w)


def test_no_iso_without_maps():
    s = find_iso(E.two_orthogonal_objects(), "x", "y")
    assert not s.found and s.exhaustive
    assert iso_in_h0(E.i_k(), "0", "1") is None


def test_iso_found_away_from_the_all_ones_guess():
    # hom((*,x),(*,y)) is 4-dimensional; witnesses must verify for every seed
    C = tensor_cat(E.m2(), E.two_iso_objects())
    for seed in range(5):
        w = iso_in_h0(C, ("*", "x"), ("*", "y"), seed=seed)
        assert w is not None and verify_iso_witness(H0Category(C), w)


def test_iso_search_over_small_prime_is_exhaustive():
    C = E.two_iso_objects(F3)
    s = find_iso(C, "x", "y")
    assert s.found and s.failure_bound == 0


def test_forged_witness_is_rejected():
    C = E.two_iso_objects()
    h = H0Category(C)
    w = iso_in_h0(C, "x", "y")
    w.v = [2]
    assert not verify_iso_witness(h, w)


# quasi-equivalences


def test_quasi_fully_faithful_examples():
    C = E.two_iso_objects()
    assert is_quasi_fully_faithful(DgFunctor.identity(C))
    sub = C.full_subcategory(["y"])
    assert is_quasi_fully_faithful(DgFunctor.inclusion(sub, C))
    f = E.i_k_collapse()
    assert not is_quasi_fully_faithful(f)
    bad = [(p.x, p.y) for p in quasi_fully_faithful_report(f) if not p.quasi_iso]
    assert bad == [("1", "0")]


def test_quasi_essentially_surjective_examples():
    assert is_quasi_essentially_surjective(DgFunctor.identity(E.a2_path()))
    assert is_quasi_essentially_surjective(E.unit_into_two_iso())
    assert not is_quasi_essentially_surjective(E.unit_into_orthogonal())


def test_quasi_equivalence_examples():
    assert is_quasi_equivalence(DgFunctor.identity(E.i_k()))
    assert is_quasi_equivalence(E.unit_into_two_iso())
    assert is_quasi_equivalence(E.two_iso_to_unit())
    assert is_quasi_equivalence(E.unit_into_two_iso().then(E.two_iso_to_unit()))
    assert not is_quasi_equivalence(E.unit_into_orthogonal())
    assert not is_quasi_equivalence(E.i_k_collapse())
    assert not is_quasi_equivalence(E.dual_augmentation())
    assert is_quasi_equivalence(E.dual_sign_twist())


def test_augmentation_of_exterior_dg_is_not_a_quasi_equivalence():
    # H^0 matches (u = de dies) but the cocycle eu survives in degree -1
    C = exterior_dg()
    U = E.unit_category()
    f = DgFunctor(C, U, {"*": "*"}, {("*", "*"): [{0: 1}, {}, {}, {}]}, "augment")
    assert validate_functor(f).ok
    assert C.hom("*", "*").cohomology_dim(-1) == 1
    assert H0Category(C).dim("*", "*") == 1
    assert not is_quasi_equivalence(f)


def test_categories_with_no_objects():
    C = DgCategory(Q, [], {}, {}, {}, "empty")
    assert validate_dgcat(C).ok
    assert H0Category(C).dims() == {}
