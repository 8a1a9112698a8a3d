"""
Path filtration versus label filtration
=======================================

Two branches below the root end in worlds that agree on every relevant
formula, yet their parents differ on p.  Identifying worlds by their own
label would merge them; comparing the labels along the whole shortest path
keeps them apart.
"""

from quasidense import KLSpec, PointedModel, parse, satisfies
from quasidense.filtration import (
    build_filtrated, check_truth_lemma, path_signature, restrict,
)
from quasidense.kripke import model_to_dot

phi = parse("<>(p & <>q) & <>(~p & <>q)")

model = PointedModel.build(
    ["s", "a", "b", "c", "d"],
    [("s", "a"), ("s", "b"), ("a", "c"), ("b", "d")],
    {"p": {"a"}, "q": {"c", "d"}},
    "s",
)

# c and d carry the same restricted label ...
print("r(c) =", restrict(model, phi, "c").key())
print("r(d) =", restrict(model, phi, "d").key())

# ... but their signatures differ at the parent position
for w in ("c", "d"):
    print(w, path_signature(model, phi, w).key())

fm = build_filtrated(model, phi, KLSpec.of((1, 2)))
print(len(fm), "classes")
for c in fm.classes:
    print(" ", c.name, c.members)

# the quotient still satisfies phi, and agrees with the original world by world
print("root satisfies phi:", satisfies(fm.pm.model, fm.pm.root, phi))
print("truth-lemma counterexamples:", check_truth_lemma(fm))

print(model_to_dot(fm.pm, "filtrated"))
