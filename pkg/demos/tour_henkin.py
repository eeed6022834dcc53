"""
From a theory to a model
========================

A Henkin step adds a constant and an axiom saying the constant witnesses an
existential.  Saturating, choosing an ultrafilter and quotienting gives a
model in finite sets.
"""

from hyperdoc import fixtures
from hyperdoc.constructions import henkin_saturate, henkin_step, saturation_coverage
from hyperdoc.doctrine import check_rich, consistency_status
from hyperdoc.model import henkin_model_pipeline, model_preservation

# The thin fixture has an object e with no global point, so it is not rich.
T = fixtures.gen_thin_fixture()
print("rich?", check_rich(T).rich, "failures:", check_rich(T).failures)

# one step: a witness for {u} at sort e
T1, m, step = henkin_step(T, "e", "{u}")
print(step)
print("status after the step:", consistency_status(T1))

###############################################################################
# Saturate over every element.

S, m, trace = henkin_saturate(T, "all")
print(len(trace.steps), "steps;", "dropped:", trace.dropped)
cov = saturation_coverage(T, S, m, trace)
for k, w in cov.items():
    print(k, "->", w)

###############################################################################
# The whole pipeline.

M, tr = henkin_model_pipeline(T)
print("ultrafilter:", tr.filter)
print("carriers:", M.carrier)
print("failed laws:", {k: v for k, v in model_preservation(M).items() if v})

###############################################################################
# Subsets of {0, 1} are already rich: skip saturation, keep equality.

P = fixtures.gen_subset_doctrine()
M, tr = henkin_model_pipeline(P, budget=0, elementary=True)
print(M.carrier["2"], M.holds("2", "{1}"))
