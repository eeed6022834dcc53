"""Shipped finite directed diagrams of doctrines, for colimit tests and demos."""
from __future__ import annotations

import numpy as np

from .constructions import (FiniteDirectedDiagram, add_axiom, add_constant, chain_diagram,
                            henkin_step, invert)
from .doctrine import compose_morphisms, identity_morphism
from .fixtures import gen_bool_point, gen_subset_doctrine, gen_thin_fixture


def one_node() -> FiniteDirectedDiagram:
    T = gen_thin_fixture()
    return FiniteDirectedDiagram([T], np.ones((1, 1), bool), {(0, 0): identity_morphism(T)}, "one-node")


def henkin_chain() -> FiniteDirectedDiagram:
    """Two Henkin steps on the thin fixture: a witness at ``e``, then at ``t``."""
    T = gen_thin_fixture()
    _, m1, _ = henkin_step(T, "e", "{u}")
    _, m2, _ = henkin_step(m1.dst, "t", "{u}")
    return chain_diagram([m1, m2], "henkin-chain")


def _cycle_edges(nodes, fwd):
    back = invert(fwd)
    return {(0, 0): identity_morphism(nodes[0]), (1, 1): identity_morphism(nodes[1]),
            (0, 1): fwd, (1, 0): back}


def two_cycle() -> FiniteDirectedDiagram:
    """The subsets doctrine and its copy with a constant of sort ``1``, each above the other."""
    S = gen_subset_doctrine()
    _, m = add_constant(S, "1")
    return FiniteDirectedDiagram([S, m.dst], np.ones((2, 2), bool), _cycle_edges([S, m.dst], m), "two-cycle")


def diamond() -> FiniteDirectedDiagram:
    """``B -> Q, B -> Q, Q -> Q`` with the same axiom morphism on both sides."""
    B = gen_bool_point()
    Q, ma = add_axiom(B, "{x,y}")
    nodes = [B, Q, Q, Q]
    leq = np.array([[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]], bool)
    idQ = identity_morphism(Q)
    edges = {(0, 0): identity_morphism(B), (1, 1): idQ, (2, 2): idQ, (3, 3): idQ,
             (0, 1): ma, (0, 2): ma, (0, 3): ma, (1, 3): idQ, (2, 3): idQ}
    return FiniteDirectedDiagram(nodes, leq, edges, "diamond")


def axiom_chain() -> FiniteDirectedDiagram:
    """Three axioms in a row on the eight-element Boolean point."""
    B = gen_bool_point(3)
    _, n1 = add_axiom(B, "{x,y,z}")
    _, n2 = add_axiom(n1.dst, "{x,y}")
    _, n3 = add_axiom(n2.dst, "{x}")
    return chain_diagram([n1, n2, n3], "axiom-chain")


def chain_into_cycle() -> FiniteDirectedDiagram:
    """``B -> Q`` followed by a top 2-cycle ``Q <-> Q[t]``."""
    B = gen_bool_point()
    _, a = add_axiom(B, "{x,y}")
    Q = a.dst
    _, c = add_constant(Q, "t")
    Qt, ci = c.dst, invert(c)
    nodes = [B, Q, Qt]
    leq = np.array([[1, 1, 1], [0, 1, 1], [0, 1, 1]], bool)
    edges = {(0, 0): identity_morphism(B), (1, 1): identity_morphism(Q), (2, 2): identity_morphism(Qt),
             (0, 1): a, (0, 2): compose_morphisms(c, a), (1, 2): c, (2, 1): ci}
    return FiniteDirectedDiagram(nodes, leq, edges, "chain-into-cycle")


SHIPPED = {
    "one-node": one_node,
    "henkin-chain": henkin_chain,
    "two-cycle": two_cycle,
    "diamond": diamond,
    "axiom-chain": axiom_chain,
    "chain-into-cycle": chain_into_cycle,
}
