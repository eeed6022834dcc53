import numpy as np
import pytest

from hyperdoc import fixtures
from hyperdoc.cli import FIXTURES
from hyperdoc.constructions import (AxiomNotSatisfied, ConstructionError, DiagramError,
                                    FiniteDirectedDiagram, add_axiom, add_constant,
                                    axiom_mediator_candidates, chain_diagram, colimit_mediator,
                                    constant_equations, directed_colimit, double_negation_fragment,
                                    henkin_postcondition, henkin_saturate, henkin_step, invert,
                                    mediate_axiom, mediate_constant, mediator_candidates,
                                    morphisms_equal, restrict, saturation_coverage, validate_diagram)
from hyperdoc.diagrams import SHIPPED
from hyperdoc.doctrine import (MissingWitness, check_elementary_derived, check_morphism,
                               check_structure, compose_morphisms, consistency_status,
                               identity_morphism, is_isomorphism)
from hyperdoc.model import quotient_by_filter
from hyperdoc.order import generated_filter

NAMES = sorted(FIXTURES)


def constant_cases(P):
    cat = P.base
    for X in range(len(cat.objects)):
        PX, m = add_constant(P, X)
        yield X, PX, m


# -- adding a constant -------------------------------------------------------------

@pytest.mark.parametrize("name", NAMES)
def test_add_constant_is_a_doctrine_morphism(name):
    P = FIXTURES[name]()
    for X, PX, m in constant_cases(P):
        assert check_structure(PX).ok, (name, X)
        assert check_morphism(m, P.layers).ok, (name, X)


def test_add_constant_counts(subsets):
    PX, m = add_constant(subsets, "2")
    assert PX.base.objects == ("1", "2")
    assert len(PX.base.morphisms) == 22
    assert [len(f) for f in PX.fibers] == [4, 16]
    assert m.src.meta["restricted_from"] is subsets
    assert PX.base.morphisms[PX.meta["constant"]] == "2>2:01/1"


def test_constant_of_terminal_sort_is_iso(subsets):
    _, m = add_constant(subsets, "1")
    assert m.src is subsets
    assert is_isomorphism(m)
    assert morphisms_equal(compose_morphisms(invert(m), m), identity_morphism(subsets))


def test_constant_on_sort_without_square(subsets):
    PX, _ = add_constant(subsets, "2x2")
    assert PX.meta["constant"] is None
    assert PX.base.objects == ("1",)


def test_constant_mediator_evaluates_generic_element(subsets):
    PX, m = add_constant(subsets, "2")
    H = mediate_constant(PX, m, identity_morphism(subsets), "1>2:0")
    i = PX.base.obj("1")
    got = [subsets.fibers[int(H.F_obj[i])].elements[v] for v in H.comp[i]]
    # a subset of 2 x 1 is sent to its fiber over 0
    assert got == ["{}", "{*}", "{}", "{*}"]


@pytest.mark.parametrize("name", NAMES)
def test_constant_mediators_unique(name):
    P = FIXTURES[name]()
    for X, PX, m in constant_cases(P):
        if PX.meta["constant"] is None:
            continue
        for Y in range(len(P.base.objects)):
            PY, G = add_constant(P, Y)
            if G.src is not P:
                continue
            rc = PY.base
            for c in rc.hom(rc.terminal, int(G.F_obj[X])).tolist():
                H = mediate_constant(PX, m, G, c)
                assert check_morphism(H, H.preserved_layers).ok
                assert constant_equations(PX, m, G, c, H)
                cands = mediator_candidates(PX, m, G, c)
                assert len(cands) == 1 and morphisms_equal(cands[0], H)


def test_self_mediator_is_identity(thin):
    for X in range(2):
        QX, m = add_constant(thin, X)
        if QX.meta["constant"] is None or m.src is not thin:
            continue
        H = mediate_constant(QX, m, m, QX.meta["constant"])
        assert morphisms_equal(H, identity_morphism(QX))


def test_mediator_rejects_wrong_constant(subsets):
    PX, m = add_constant(subsets, "2")
    with pytest.raises(ConstructionError):
        mediate_constant(PX, m, identity_morphism(subsets), "1>1:0")


# -- adding an axiom -------------------------------------------------------------------

@pytest.mark.parametrize("name", [n for n in NAMES if "primary" in FIXTURES[n]().layers])
def test_add_axiom_is_a_doctrine_morphism(name):
    P = FIXTURES[name]()
    for phi in P.fibers[P.base.terminal].elements:
        Pp, m = add_axiom(P, phi)
        assert check_structure(Pp).ok
        assert check_morphism(m, P.layers).ok
        t = Pp.base.terminal
        assert int(m.comp[t][P.fibers[t].el(phi)]) == Pp.ops[t].top


def test_axiom_fibers_are_downsets(cube):
    Q, m = add_axiom(cube, "{x}")
    assert Q.fibers[0].elements == ("{}", "{x}")
    assert list(m.comp[0]) == [0, 1, 0, 1]


def test_true_axiom_changes_nothing(subsets):
    Q, m = add_axiom(subsets, "{*}")
    assert is_isomorphism(m)


def test_false_axiom_collapses(subsets):
    Q, _ = add_axiom(subsets, "{}")
    assert all(len(f) == 1 for f in Q.fibers)
    assert consistency_status(Q) == "inconsistent"


@pytest.mark.parametrize("name", [n for n in NAMES if "bounded" in FIXTURES[n]().layers])
def test_axiom_mediators_unique(name):
    P = FIXTURES[name]()
    t = P.base.terminal
    for phi in P.fibers[t].elements:
        Pp, m = add_axiom(P, phi)
        qp = quotient_by_filter(P, generated_filter(P.ops[t], [P.fibers[t].el(phi)]))
        for G in (m, qp.q):
            H = mediate_axiom(Pp, m, G)
            assert check_morphism(H, H.preserved_layers).ok
            assert morphisms_equal(compose_morphisms(H, m), G)
            cands = axiom_mediator_candidates(Pp, m, G)
            assert len(cands) == 1 and morphisms_equal(cands[0], H)


def test_axiom_mediator_needs_the_axiom(subsets):
    Pb, mb = add_axiom(subsets, "{}")
    with pytest.raises(AxiomNotSatisfied):
        mediate_axiom(Pb, mb, identity_morphism(subsets))


# -- double negation ----------------------------------------------------------------------

def test_double_negation_of_chain(chain):
    N, m = double_negation_fragment(chain)
    f, o = N.fibers[0], N.ops[0]
    assert f.elements == ("0", "1")
    assert m.comp[0].tolist() == [0, 1, 1]   # 0 -> 0, 1/2 -> 1, 1 -> 1
    neg = chain.ops[0].neg_table
    assert chain.fibers[0].elements[neg[1]] == "0" and chain.fibers[0].elements[neg[0]] == "1"
    assert f.elements[o.neg(0)] == "1"


@pytest.mark.parametrize("name", [n for n in NAMES if "implicational" in FIXTURES[n]().layers
                                  and "bounded" in FIXTURES[n]().layers])
def test_double_negation_is_boolean(name):
    N, m = double_negation_fragment(FIXTURES[name]())
    assert check_structure(N, ["boolean"]).ok
    assert check_structure(N).ok
    assert check_morphism(m).ok


def test_double_negation_needs_implication():
    with pytest.raises(MissingWitness):
        double_negation_fragment(fixtures.gen_antichain_fixture())


# -- Henkin steps -------------------------------------------------------------------------

def test_henkin_step_values(subsets):
    P2, m, st = henkin_step(subsets, "2", "{1}")
    assert st.psi == "{1}"
    assert st.constant == "2>2:01/1"
    assert consistency_status(P2) == "two_valued"
    assert check_structure(P2).ok
    assert check_morphism(m, subsets.layers).ok
    B = m.src.base.obj("2")
    assert henkin_postcondition(P2, m, B, m.src.fibers[B].el("{1}"), P2.meta["constant"]) == (True, True)


def test_henkin_postcondition_every_shipped_pair(subsets):
    cat = subsets.base
    for B in ("1", "2"):
        b = cat.obj(B)
        for phi in subsets.fibers[b].elements:
            P2, m, _ = henkin_step(subsets, B, phi)
            bs = m.src.base.obj(B)
            assert henkin_postcondition(P2, m, bs, m.src.fibers[bs].el(phi), P2.meta["constant"]) == (True, True)


def test_henkin_step_needs_square(subsets):
    with pytest.raises(ConstructionError):
        henkin_step(subsets, "2x2", 0)


def test_saturate_thin(thin):
    S, m, tr = henkin_saturate(thin, "all")
    assert len(tr.steps) == 6 and not tr.dropped and not tr.truncated
    cov = saturation_coverage(thin, S, m, tr)
    assert len(cov) == 6 and all(v is not None for v in cov.values())
    assert check_structure(S).ok
    assert check_morphism(m, thin.layers).ok
    assert sorted(tr.labels()) == [("e", 0), ("e", 1), ("t", 0), ("t", 1), ("t", 2), ("t", 3)]


def test_saturate_subsets_drops_lost_sort(subsets):
    S, m, tr = henkin_saturate(subsets, "all")
    assert len(tr.steps) == 3
    assert len(tr.dropped) == 19
    cov = saturation_coverage(subsets, S, m, tr)
    assert sum(v is not None for v in cov.values()) == 6
    assert all(v is not None for k, v in cov.items() if k[0] in S.base.objects)
    assert all(k[0] == "2x2" for k, v in cov.items() if v is None)
    assert check_morphism(m, subsets.layers).ok


def test_saturate_budget(thin):
    _, _, tr = henkin_saturate(thin, "all", budget=2)
    assert len(tr.steps) == 2 and tr.truncated
    _, _, tr = henkin_saturate(thin, "all", per_object_budget={"e": 1})
    assert [s.sort for s in tr.steps].count("e") == 1


def test_saturate_explicit_targets(thin):
    _, _, tr = henkin_saturate(thin, [("t", "{u}")])
    assert [(s.sort, s.phi) for s in tr.steps] == [("t", "{u}")]


# -- restriction and diagrams -----------------------------------------------------------------

def test_restrict_keeps_full_subcategory(subsets):
    Q, obj_old, mor_old = restrict(subsets, [0, 1])
    assert Q.base.objects == ("1", "2")
    assert len(Q.base.morphisms) == 1 + 2 + 1 + 4
    assert check_structure(Q).ok


@pytest.mark.parametrize("key", sorted(SHIPPED))
def test_shipped_colimits(key):
    d = SHIPPED[key]()
    assert validate_diagram(d) == []
    col = directed_colimit(d)
    mx = d.maximum()
    assert is_isomorphism(col.cocone[mx])
    assert check_structure(col.doctrine).ok
    for i in range(len(d.nodes)):
        leg = col.cocone[i]
        assert check_morphism(leg, leg.preserved_layers).ok
        for j in range(len(d.nodes)):
            if d.leq[i, j]:
                assert morphisms_equal(compose_morphisms(col.cocone[j], d.edges[(i, j)]), leg)
    # the cocone into the maximum node mediates to the inverse of its leg
    med = colimit_mediator(col, {i: d.edges[(i, mx)] for i in range(len(d.nodes))})
    assert morphisms_equal(compose_morphisms(med, col.cocone[mx]), identity_morphism(d.nodes[mx]))


def test_colimit_sizes():
    col = directed_colimit(SHIPPED["axiom-chain"]())
    assert [len(f) for f in col.doctrine.fibers] == [2]
    # the diamond's axiom is top, so nothing collapses
    col = directed_colimit(SHIPPED["diamond"]())
    assert [len(f) for f in col.doctrine.fibers] == [4]


def test_invalid_diagrams(cube):
    Q, ma = add_axiom(cube, "{x}")
    d = FiniteDirectedDiagram([cube, Q], np.array([[1, 1], [0, 1]], bool), {(0, 0): identity_morphism(cube)})
    assert any("missing edge" in e for e in validate_diagram(d))
    d = FiniteDirectedDiagram([cube, cube], np.eye(2, dtype=bool),
                              {(0, 0): identity_morphism(cube), (1, 1): identity_morphism(cube)})
    assert any("upper bound" in e for e in validate_diagram(d))
    with pytest.raises(DiagramError):
        directed_colimit(d)


def test_chain_diagram_rejects_gaps(cube):
    _, a = add_axiom(cube, "{x}")
    _, b = add_axiom(cube, "{y}")
    with pytest.raises(DiagramError):
        chain_diagram([a, b])


def test_mediator_rejects_incompatible_cocone():
    d = SHIPPED["axiom-chain"]()
    col = directed_colimit(d)
    bad = {i: col.cocone[i] for i in range(len(d.nodes))}
    bad[0] = identity_morphism(d.nodes[0])
    with pytest.raises(DiagramError):
        colimit_mediator(col, bad)


@pytest.mark.parametrize("name", [n for n in NAMES if "elementary" in FIXTURES[n]().layers])
def test_constructions_keep_derived_equality_facts(name):
    P = FIXTURES[name]()
    for _, PX, _ in constant_cases(P):
        assert check_elementary_derived(PX).ok
