import json

import pytest
from hypothesis import assume, given

from quasidense.filtration import (
    SINK, PathSignature, RestrictedLabel, build_filtrated, check_equivalence,
    check_exist_pred, check_exists_path, check_notes, check_qd_frame, check_truth_lemma,
    check_universal_property, equiv, path_signature, restrict, signature_or_sink, size_bound,
)
from quasidense.formula import And, Atom, Not, TargetFormula, parse
from quasidense.kripke import (
    AmbiguousShortestPath, KLSpec, PointedModel, UnreachableWorld, depths, model_to_dot,
    model_to_json, satisfies, shortest_path,
)
from quasidense.tableau import Open, saturate

from conftest import kl_specs, random_models, shallow_formulas

p, q = Atom("p"), Atom("q")
KL12 = KLSpec.of((1, 2))
WORKED = parse("<>(p & <>q) & <>(~p & <>q)")


def pm(worlds, edges, val, root="s"):
    return PointedModel.build(worlds, edges, val, root)


def worked_model():
    return pm(["s", "a", "b", "c", "d"], [("s", "a"), ("s", "b"), ("a", "c"), ("b", "d")],
              {"p": {"a"}, "q": {"c", "d"}})


class TestRestrict:
    def test_beyond_horizon_is_empty(self):
        m = pm(["s", "a"], [("s", "a")], {"p": {"a"}})
        assert restrict(m, p, "a") == RestrictedLabel(frozenset())

    def test_root_atom(self):
        m = pm(["s"], [], {"p": {"s"}})
        assert restrict(m, p, "s").formulas == {p}

    def test_depth_one(self):
        phi = parse("<>(p & q)")
        m = pm(["s", "x"], [("s", "x")], {"p": {"x"}})
        assert restrict(m, phi, "x").formulas == {p, Not(q), Not(And(p, q)), Not(Not(p))}

    def test_literal_layers_change_the_label(self):
        phi = TargetFormula(parse("<>(p & q)"), literal=True)
        m = pm(["s", "x"], [("s", "x")], {"p": {"x"}})
        assert restrict(m, phi, "x").formulas == {Not(And(p, q))}

    def test_ambiguity_propagates(self):
        m = pm(["s", "a", "b", "c"], [("s", "a"), ("s", "b"), ("a", "c"), ("b", "c")], {})
        with pytest.raises(AmbiguousShortestPath):
            restrict(m, parse("[][]p"), "c")

    @given(random_models(), shallow_formulas())
    def test_members_are_true_layer_formulas(self, m, f):
        t = TargetFormula(f)
        d = depths(m)
        for x in d:
            try:
                shortest_path(m, x)
            except AmbiguousShortestPath:
                continue
            lab = restrict(m, t, x).formulas
            assert lab == {g for g in t.layer(d[x]) if satisfies(m.model, x, g)}


class TestSignatures:
    def test_root(self):
        m = pm(["s"], [], {"p": {"s"}})
        sig = path_signature(m, p, "s")
        assert sig == PathSignature((restrict(m, p, "s"),))

    def test_chain(self):
        phi = parse("<>p")
        m = pm(["s", "a"], [("s", "a")], {"p": {"a"}})
        sig = path_signature(m, phi, "a")
        assert sig.labels == (restrict(m, phi, "s"), restrict(m, phi, "a"))
        assert p in sig.labels[1]

    def test_parents_discriminate(self):
        m = worked_model()
        assert restrict(m, WORKED, "c") == restrict(m, WORKED, "d")
        sc, sd = path_signature(m, WORKED, "c"), path_signature(m, WORKED, "d")
        assert sc != sd
        assert not equiv(sc, sd)

    def test_equiv(self):
        m = worked_model()
        sc = path_signature(m, WORKED, "c")
        assert equiv(SINK, SINK)
        assert equiv(sc, path_signature(m, WORKED, "c"))
        assert not equiv(sc, SINK) and not equiv(SINK, sc)

    def test_sink_signature(self):
        m = pm(["s", "a", "b"], [("s", "a"), ("a", "b")], {})
        assert signature_or_sink(m, parse("<>p"), "b") is SINK
        assert signature_or_sink(m, parse("<>p"), "a") is not SINK


class TestBuild:
    def test_single_world(self):
        fm = build_filtrated(pm(["s"], [], {"p": {"s"}}), p, KL12)
        assert len(fm) == 1
        assert fm.pm.frame.rel == frozenset()
        assert fm.pm.model.valuation["p"] == {fm.pm.root}

    def test_worked_example_is_strictly_finer(self):
        m = worked_model()
        fm = build_filtrated(m, WORKED, KL12)
        assert len(fm) == 5
        assert fm.class_of["c"] != fm.class_of["d"]
        assert satisfies(fm.pm.model, fm.pm.root, WORKED)
        assert not check_truth_lemma(fm)

    def test_sink_edges(self):
        m = pm(["s", "a", "b", "c"], [("s", "a"), ("a", "b"), ("b", "c")], {"p": {"a"}})
        fm = build_filtrated(m, parse("<>p"), KL12)
        sink = fm.sink
        assert sink is not None and set(sink.members) == {"b", "c"}
        assert (fm.class_of["a"], "sink") in fm.pm.frame.rel
        assert ("sink", "sink") in fm.pm.frame.rel

    def test_no_sink_without_deep_worlds(self):
        fm = build_filtrated(worked_model(), WORKED, KL12)
        assert fm.sink is None
        assert all(x != y for x, y in fm.pm.frame.rel)

    def test_atoms_outside_closure_are_empty(self):
        m = pm(["s"], [], {"p": {"s"}, "r": {"s"}})
        fm = build_filtrated(m, p, KL12)
        assert "r" not in fm.pm.model.valuation

    def test_preconditions_name_the_world(self):
        diamond = pm(["s", "a", "b", "c"], [("s", "a"), ("s", "b"), ("a", "c"), ("b", "c")], {})
        with pytest.raises(AmbiguousShortestPath) as info:
            build_filtrated(diamond, parse("[][]p"), KL12)
        assert info.value.world == "c"
        island = pm(["s", "z"], [], {})
        with pytest.raises(UnreachableWorld) as info:
            build_filtrated(island, p, KL12)
        assert info.value.world == "z"

    def test_ambiguity_beyond_horizon_is_harmless(self):
        diamond = pm(["s", "a", "b", "c"], [("s", "a"), ("s", "b"), ("a", "c"), ("b", "c")], {})
        fm = build_filtrated(diamond, parse("[]p"), KL12)
        assert fm.class_of["c"] == "sink"

    def test_deterministic_names(self):
        a = build_filtrated(worked_model(), WORKED, KL12)
        b = build_filtrated(worked_model(), WORKED, KL12)
        assert model_to_json(a.pm) == model_to_json(b.pm)
        assert all(c.name.startswith("c") and len(c.name) == 11 for c in a.classes)

    def test_exports(self):
        fm = build_filtrated(worked_model(), WORKED, KL12)
        doc = json.loads(model_to_json(fm.pm))
        assert len(doc["worlds"]) == 5 and doc["root"] == fm.class_of["s"]
        assert model_to_dot(fm.pm).count("->") == 4

    def test_size_bound(self):
        assert size_bound(p) == 2
        assert size_bound(parse("[]p")) == 1 + 16 + 1


class TestStructuralLemmas:
    def test_exist_pred_fails_for_non_tree_predecessors(self):
        # b -> c joins two worlds of depth 2; d is equivalent to c but has no
        # predecessor equivalent to b
        m = pm(["s", "a", "e", "b", "c", "d"],
               [("s", "a"), ("s", "e"), ("e", "b"), ("a", "c"), ("a", "d"), ("b", "c")],
               {"p": {"e"}})
        fm = build_filtrated(m, parse("[][]q & <>p"), KL12)
        assert fm.class_of["c"] == fm.class_of["d"]
        assert ("b", "c", "d") in check_exist_pred(fm)

    def test_exists_path_on_worked_example(self):
        fm = build_filtrated(worked_model(), WORKED, KL12)
        assert not check_exists_path(fm, 4)


def _open(f, kl):
    res = saturate(f, kl)
    assume(isinstance(res, Open))
    return build_filtrated(res.prefix.pm, TargetFormula(f), kl)


class TestOnPrefixes:
    @given(shallow_formulas(), kl_specs)
    def test_lemmas(self, f, kl):
        fm = _open(f, kl)
        assert not check_equivalence(fm)
        assert not check_notes(fm)
        assert not check_truth_lemma(fm)
        assert not check_universal_property(fm)
        assert not check_exists_path(fm, 4)
        assert check_qd_frame(fm, kl)
        assert len(fm) <= size_bound(f)
        assert satisfies(fm.pm.model, fm.pm.root, f)

    @given(shallow_formulas(), kl_specs)
    def test_valuation_every_member_equals_some_member(self, f, kl):
        fm = _open(f, kl)
        src = fm.source.model.valuation
        for c in fm.classes:
            if c.is_sink:
                continue
            layer = fm.target.layer(c.depth)
            for a in fm.pm.model.valuation:
                if Atom(a) in layer:
                    held = [m in src.get(a, ()) for m in c.members]
                    assert all(held) == any(held)

    @given(shallow_formulas(), kl_specs)
    def test_exist_pred_along_shortest_paths(self, f, kl):
        # the case covered by the usual argument: x is the shortest-path parent of y
        fm = _open(f, kl)
        src = fm.source
        d = depths(src)
        bad = {(x, y) for x, y, _ in check_exist_pred(fm)}
        for x, y in bad:
            assert not (d[y] == d[x] + 1 and shortest_path(src, y)[-2] == x)


class TestOnRandomModels:
    @given(random_models(6), shallow_formulas())
    def test_truth_lemma_with_unique_paths(self, m, f):
        assume(not m.unreachable())
        try:
            fm = build_filtrated(m, f)
        except AmbiguousShortestPath:
            assume(False)
        assert not check_equivalence(fm)
        assert not check_notes(fm)
        assert not check_truth_lemma(fm)
        assert not check_universal_property(fm)
