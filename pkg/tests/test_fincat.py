import itertools

import numpy as np
import pytest

from hyperdoc.fincat import (FinCategory, ProductError, StructuralError, from_tables, hom_set,
                             kleisli_reader, nary_product, tuple_, validate_category)
from hyperdoc.fixtures import single_object_category, thin_category
from hyperdoc.sets import finset_category, function_category


@pytest.fixture(scope="module")
def S():
    return finset_category([("*",), (0, 1)])


def test_subsets_base_sizes(S):
    cat = S.cat
    assert cat.objects == ("1", "2", "2x2")
    # |hom(A, B)| = |B| ** |A|, summed over the 3 x 3 pairs
    sizes = [1, 2, 4]
    assert len(cat.morphisms) == sum(b ** a for a in sizes for b in sizes) == 301
    for a, b in itertools.product(range(3), repeat=2):
        assert len(cat.hom(a, b)) == sizes[b] ** sizes[a]


def test_subsets_base_validates(S):
    assert validate_category(S.cat).ok


def test_composition_is_function_composition(S):
    cat, fn = S.cat, S.fn
    rng = np.random.default_rng(0)
    for _ in range(300):
        f = int(rng.integers(len(cat.morphisms)))
        gs = cat.hom(int(cat.cod[f]), int(rng.integers(3)))
        g = int(gs[rng.integers(len(gs))])
        h = cat.compose(g, f)
        assert list(fn[h]) == [fn[g][x] for x in fn[f]]


def test_tuple_is_the_unique_pairing(S):
    cat = S.cat
    for (a, b), (p, p1, p2) in cat.products.items():
        for z in range(3):
            for f in cat.hom(z, a).tolist():
                for g in cat.hom(z, b).tolist():
                    hits = [h for h in cat.hom(z, p).tolist()
                            if cat.compose(p1, h) == f and cat.compose(p2, h) == g]
                    assert hits == [cat.tuple(f, g)]


def test_products_are_partial(S):
    cat = S.cat
    big = cat.obj("2x2")
    assert not cat.has_product(big, cat.obj("2"))
    with pytest.raises(ProductError):
        cat.product(big, big)


def test_unknown_names_raise(S):
    with pytest.raises(StructuralError):
        S.cat.obj("3")
    with pytest.raises(StructuralError):
        S.cat.mor("nope")


def test_hom_set_and_tuple_names(S):
    cat = S.cat
    assert hom_set(cat, "1", "2") == ["1>2:0", "1>2:1"]
    assert tuple_(cat, "2>2:01", "2>2:01") == cat.morphisms[cat.diagonal(cat.obj("2"))]


def test_associator_is_iso(S):
    cat = S.cat
    one, two = cat.obj("1"), cat.obj("2")
    f = cat.associator(two, one, two)
    assert cat.is_iso(f) is not None


def test_kleisli_counts(S):
    K = kleisli_reader(S.cat, "2")
    # kept objects: 1 and 2 (2 x 2x2 is not chosen); arrows are 2xA -> B
    assert K.category.objects == ("1", "2")
    assert len(K.category.morphisms) == 1 + 4 + 1 + 16
    assert validate_category(K.category).ok
    assert K.constant is not None


def test_kleisli_of_terminal_is_a_copy(S):
    K = kleisli_reader(S.cat, "1")
    assert len(K.category.objects) == 3
    assert len(K.category.morphisms) == 301


def test_broken_composition_is_reported(S):
    cat = S.cat
    comp = cat.comp.copy()
    f, g = cat.mor("1>2:0"), cat.mor("2>2:10")
    comp[g, f] = cat.mor("1>2:0")     # should be 1>2:1
    bad = FinCategory(cat.objects, cat.morphisms, cat.dom, cat.cod, comp, cat.ident, cat.terminal,
                      cat.bang, cat.products, name="bad")
    rep = validate_category(bad)
    assert not rep.ok


def test_point_category():
    c = single_object_category()
    assert validate_category(c).ok
    assert c.product(0, 0) == (0, 0, 0)


def test_thin_category_products_are_meets():
    c = thin_category(["a", "b", "top", "bot"], {"a": {"top"}, "b": {"top"}, "bot": {"a", "b"}}, "top")
    assert validate_category(c).ok
    assert c.objects[c.product(c.obj("a"), c.obj("b"))[0]] == "bot"


def test_from_tables_rejects_bad_identity():
    with pytest.raises(StructuralError):
        from_tables(["x"], {"i": ("x", "x")}, {("i", "i"): "i"}, {"x": "j"}, "x", {"x": "i"}, {})


def test_nary_product(S):
    cat = S.cat
    one, two = cat.obj("1"), cat.obj("2")
    p, projs = nary_product(cat, [two, one, two])
    assert cat.objects[p] == "2x2"
    assert len(projs) == 3


def test_function_category_sizes():
    S = function_category({"1": ("*",), "3": (0, 1, 2)}, "1", {("1", "1"): ("1", [0], [0])})
    assert len(S.cat.hom(S.cat.obj("3"), S.cat.obj("3"))) == 27
    assert validate_category(S.cat).ok
