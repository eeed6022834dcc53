"""
Colimits of finite directed diagrams
====================================

A finite directed index has a maximum node (possibly inside a cycle), so
the colimit is that node up to isomorphism.  The construction does not know
this: it glues classes of objects, arrows and elements and we compare.
"""

from hyperdoc.constructions import colimit_mediator, directed_colimit, morphisms_equal
from hyperdoc.diagrams import SHIPPED
from hyperdoc.doctrine import compose_morphisms, identity_morphism, is_isomorphism

for name, build in SHIPPED.items():
    d = build()
    col = directed_colimit(d)
    mx = d.maximum()
    print(f"{name:18s} nodes={len(d.nodes)} max={mx} "
          f"fibers={[len(f) for f in col.doctrine.fibers]} iso={is_isomorphism(col.cocone[mx])}")

###############################################################################
# The cocone of arrows into the maximum node gives the inverse leg.

d = SHIPPED["two-cycle"]()
col = directed_colimit(d)
mx = d.maximum()
med = colimit_mediator(col, {i: d.edges[(i, mx)] for i in range(len(d.nodes))})
print(morphisms_equal(compose_morphisms(med, col.cocone[mx]), identity_morphism(d.nodes[mx])))
