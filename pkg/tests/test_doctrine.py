import numpy as np
import pytest

from hyperdoc import fixtures
from hyperdoc.cli import FIXTURES
from hyperdoc.doctrine import (LAYERS, DoctrineMorphism, MissingWitness, TwoCell,
                               check_2cell, check_elementary_derived, check_epsilon_operator,
                               check_morphism, check_rich, check_structure, closure,
                               compose_morphisms, consistency_predicates, consistency_status,
                               identity_2cell, identity_morphism, is_isomorphism, replay)
from hyperdoc.mutations import MUTATIONS, mutants
from hyperdoc.sets import finset_category


def test_closure_orders_and_adds_prerequisites():
    assert closure(["boolean"]) == ["functorial", "primary", "bounded", "implicational", "joins",
                                    "heyting", "boolean"]
    with pytest.raises(ValueError):
        closure(["nope"])


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixtures_satisfy_declared_layers(name):
    P = FIXTURES[name]()
    rep = check_structure(P)
    assert rep.ok, rep.summary()


def test_subsets_all_layers(subsets):
    rep = check_structure(subsets, LAYERS)
    assert rep.ok
    assert set(rep.layers) == set(LAYERS)


def test_subsets_fiber_sizes(subsets):
    assert [len(f) for f in subsets.fibers] == [2, 4, 16]
    assert len(subsets.reind) == 301


def test_subsets_delta_values(subsets):
    d = {subsets.base.objects[a]: subsets.fibers[subsets.base.product(a, a)[0]].elements[v]
         for a, v in subsets.delta.items()}
    assert d == {"1": "{*}", "2": "{(0,0),(1,1)}"}


def test_subsets_quantifiers_are_image_and_dual_image():
    S = finset_category([("*",), (0, 1)])
    P = fixtures.subsets_doctrine(S)
    cat = S.cat
    for (c, b), (p, p1, _) in cat.products.items():
        pr = S.fn[p1]
        nc = S.size(c)
        for x in range(1 << len(pr)):
            members = [i for i in range(len(pr)) if x >> i & 1]
            image = {int(pr[i]) for i in members}
            univ = {j for j in range(nc) if all(x >> i & 1 for i in range(len(pr)) if pr[i] == j)}
            assert P.exists_[(c, b)][x] == sum(1 << j for j in image)
            assert P.forall_[(c, b)][x] == sum(1 << j for j in univ)


def test_reindexing_is_preimage(subsets):
    S = finset_category([("*",), (0, 1)])
    cat = S.cat
    for f in range(len(cat.morphisms)):
        fn = S.fn[f]
        R = subsets.R(f)
        for y in range(len(R)):
            pre = sum(1 << i for i in range(len(fn)) if y >> int(fn[i]) & 1)
            assert R[y] == pre


def test_mutation_set_is_fully_killed(subsets):
    found = mutants(subsets)
    assert set(found) == set(MUTATIONS)
    for name, Q in found.items():
        rep = check_structure(Q, subsets.layers)
        cx = rep.counterexamples()
        assert cx, name
        assert all(replay(Q, c) for c in cx), name
        assert not any(replay(subsets, c) for c in cx), name


def test_limit_caps_counterexamples(subsets):
    Q = mutants(subsets)["meet"]
    rep = check_structure(Q, ["primary"], limit=3)
    assert 0 < len(rep.counterexamples()) <= 3 * len(rep.layers)


def test_missing_witness_raises():
    P = fixtures.gen_antichain_fixture()
    with pytest.raises(MissingWitness):
        check_structure(P, ["primary"])


def test_constructor_rejects_bad_tables(subsets):
    reind = list(subsets.reind)
    reind[0] = np.array([0, 5])
    with pytest.raises(Exception):
        subsets.replace(reind=tuple(reind))


@pytest.mark.parametrize("name", [n for n in sorted(FIXTURES)
                                  if "elementary" in FIXTURES[n]().layers])
def test_elementary_derived_facts(name):
    assert check_elementary_derived(FIXTURES[name]()).ok


def test_identity_and_composite_morphisms(subsets):
    i = identity_morphism(subsets)
    assert check_morphism(i, LAYERS, strict=True).ok
    assert is_isomorphism(compose_morphisms(i, i))


def test_broken_component_is_caught(subsets):
    i = identity_morphism(subsets)
    comp = list(i.comp)
    c = comp[1].copy()
    c[[1, 2]] = c[[2, 1]]
    comp[1] = c
    bad = DoctrineMorphism(subsets, subsets, i.F_obj, i.F_mor, tuple(comp), i.preserved_layers)
    rep = check_morphism(bad, LAYERS)
    assert not rep.ok
    assert "functorial" in rep.failed_layers()


def test_identity_2cell(subsets):
    assert check_2cell(identity_2cell(identity_morphism(subsets))).ok


def test_bad_2cell(chain):
    i = identity_morphism(chain)
    assert check_2cell(TwoCell(i, i, np.array([0]))).ok
    # a component that goes down violates F <= R(theta) G
    low = DoctrineMorphism(chain, chain, i.F_obj, i.F_mor, (np.array([0, 0, 2]),), i.preserved_layers)
    assert check_2cell(TwoCell(low, i, np.array([0]))).ok
    assert not check_2cell(TwoCell(i, low, np.array([0]))).ok


def test_rich(subsets, thin):
    assert check_rich(subsets).rich
    rep = check_rich(thin)
    assert not rep.rich
    assert {thin.base.objects[a] for a, _ in rep.failures} == {"e"}


def test_epsilon_operator_agrees_with_richness(subsets, thin):
    for P in (subsets, thin):
        assert check_epsilon_operator(P)["rich_agrees"]


@pytest.mark.parametrize("name,status", [("subsets", "two_valued"), ("chain", "two_valued"),
                                         ("thin", "two_valued"), ("cube", "two_valued"),
                                         ("antichain", "consistent"), ("trivial", "inconsistent")])
def test_consistency_status(name, status):
    P = FIXTURES[name]()
    assert consistency_status(P) == status


def test_bounded_predicates_agree(any_fixture):
    pr = consistency_predicates(any_fixture)
    if "top_not_le_bottom" in pr:
        assert len({pr["consistent"], pr["two_valued"], pr["nontrivial"], pr["top_not_le_bottom"]}) == 1
