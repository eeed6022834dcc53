"""Randomized law checks on small generated structures."""
import dataclasses

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from hyperdoc import fixtures
from hyperdoc.constructions import add_axiom, add_constant, double_negation_fragment
from hyperdoc.doctrine import check_morphism, check_structure, replay
from hyperdoc.io import parse_doctrine, serialize_doctrine
from hyperdoc.order import (FinPoset, classify_filter, derive_lattice_ops, enumerate_filters,
                            generated_filter, is_filter, lattice_law_violations, poset_reflection,
                            transitive_closure)

SET = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def dags(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    L = np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            L[i, j] = draw(st.booleans())
    return FinPoset(tuple(str(i) for i in range(n)), transitive_closure(L))


@st.composite
def preorders(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    R = np.array(bits, dtype=bool).reshape(n, n) | np.eye(n, dtype=bool)
    return transitive_closure(R)


@st.composite
def kripke(draw):
    """Random thin fixture: objects e <= t, worlds split between them."""
    nw = draw(st.integers(1, 3))
    worlds = [f"w{i}" for i in range(nw)]
    k = draw(st.integers(1, nw))
    return fixtures.kripke_doctrine(worlds, {"t": set(worlds), "e": set(worlds[:k])}, {"e": {"t"}})


@SET
@given(dags())
def test_derived_witnesses_satisfy_their_laws(p):
    assert lattice_law_violations(derive_lattice_ops(p)) == {}


@SET
@given(preorders())
def test_reflection_is_monotone_and_reflecting(R):
    r = poset_reflection([str(i) for i in range(len(R))], R)
    q = r.quotient
    assert (r.poset.leq[np.ix_(q, q)] == R).all()


@SET
@given(st.integers(1, 4), st.data())
def test_boolean_filters(n, data):
    p = fixtures.powerset_poset([f"a{i}" for i in range(n)])
    L = fixtures.powerset_ops(p, n)
    fs = enumerate_filters(L)
    assert len(fs) == 1 << n
    for F in fs:
        c = classify_filter(L, F)
        assert c["ultra_iff_maximal"]
    gens = data.draw(st.sets(st.integers(0, (1 << n) - 1), max_size=3))
    G = generated_filter(L, gens)
    assert is_filter(L, G.members)
    # least: contained in every filter holding the generators
    assert all(G.members <= F.members for F in fs if set(gens) <= F.members)


@SET
@given(st.integers(2, 7))
def test_chains_are_heyting_with_unique_ultrafilter(n):
    p = FinPoset.chain(tuple(str(i) for i in range(n)))
    L = derive_lattice_ops(p)
    assert lattice_law_violations(L) == {}
    ultra = [F for F in enumerate_filters(L) if classify_filter(L, F)["ultra"]]
    assert [sorted(F.members) for F in ultra] == [list(range(1, n))]


@SET
@given(kripke())
def test_kripke_doctrines(P):
    assert check_structure(P).ok
    assert serialize_doctrine(parse_doctrine(serialize_doctrine(P))) == serialize_doctrine(P)
    for X in range(len(P.base.objects)):
        PX, m = add_constant(P, X)
        assert check_structure(PX).ok and check_morphism(m, P.layers).ok
    N, m = double_negation_fragment(P)
    assert check_structure(N, ["boolean"]).ok


@SET
@given(kripke(), st.data())
def test_random_axioms(P, data):
    t = P.base.terminal
    phi = data.draw(st.integers(0, len(P.fibers[t]) - 1))
    Q, m = add_axiom(P, phi)
    assert check_structure(Q).ok
    assert check_morphism(m, P.layers).ok
    assert int(m.comp[t][phi]) == Q.ops[t].top


@SET
@given(st.data())
def test_random_meet_mutation_is_caught_exactly(data):
    P = fixtures.gen_bool_point(3)
    x = data.draw(st.integers(0, 7))
    y = data.draw(st.integers(0, 7))
    v = data.draw(st.integers(0, 7))
    meet = P.ops[0].meet.copy()
    meet[x, y] = v
    Q = P.replace(ops=(dataclasses.replace(P.ops[0], meet=meet),))
    rep = check_structure(Q, ["primary"])
    if v == (x & y):
        assert rep.ok
    else:
        assert not rep.ok
        assert all(replay(Q, c) for c in rep.counterexamples())
