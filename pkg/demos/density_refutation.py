"""
Density and a refuted diamond
=============================

Under the pair 1:2 every edge must also be a two-step path, so a formula
that demands a successor with p while forbidding p two steps away has no
model.  Under 2:3 the same formula is satisfiable.
"""

from quasidense import KLSpec, SearchBound, decide, enumerate_models, model_to_json, parse

phi = parse("<>p & [][]~p")

# the decision procedure: tableau, then filtration, then an independent check
for spec in ("1:2", "2:3"):
    verdict = decide(phi, KLSpec.parse(spec))
    print(spec, type(verdict).__name__)

# brute force agrees on small frames
print(enumerate_models(phi, KLSpec.parse("1:2"), SearchBound(4)))

# the 2:3 model: a single edge has no two-step paths, so density is vacuous
verdict = decide(phi, KLSpec.parse("2:3"))
print(model_to_json(verdict.model))
print(verdict.report.as_dict())
