"""
Checking laws on a small doctrine
=================================

Subsets of finite sets, with preimage as substitution, form the basic
example.  We build it, check every layer, then break one table and look at
what the checker reports.
"""

from hyperdoc import fixtures
from hyperdoc.doctrine import LAYERS, check_structure, describe, replay
from hyperdoc.mutations import mutants

P = fixtures.gen_subset_doctrine()
print(P)
print("objects:", P.base.objects, "arrows:", len(P.base.morphisms))

# every layer, all tables, exhaustively
rep = check_structure(P, LAYERS)
print(rep.summary())

# the fibered equality over 2 is the diagonal of 2 x 2
two = P.base.obj("2")
sq = P.base.product(two, two)[0]
print("delta_2 =", P.fibers[sq].elements[P.delta[two]])

###############################################################################
# Break a meet table entry and the checker points at it.

Q = mutants(P)["meet"]
bad = check_structure(Q, ["primary"], limit=3)
for cx in bad.counterexamples():
    print(describe(Q, cx), "fails again on replay:", replay(Q, cx))

###############################################################################
# The whole shipped mutation set.

for name, M in mutants(P).items():
    n = len(check_structure(M, LAYERS).counterexamples())
    print(f"{name:16s} {n:4d} counterexamples")
