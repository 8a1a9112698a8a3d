import pytest
from hypothesis import given, strategies as st

from quasidense.formula import FALSE, TRUE, Atom, Box, Diamond
from quasidense.kripke import (
    AmbiguousShortestPath, Frame, KLSpec, ModelFormatError, PointedModel, UnreachableWorld,
    check_model, compose_power, depth_delta, is_acyclic, is_kl_frame, kl_violation,
    model_from_json, model_to_dot, model_to_json, satisfies, shortest_path,
)

from conftest import formulas, random_models

p = Atom("p")


def frame(edges, worlds=None):
    ws = worlds or sorted({w for e in edges for w in e})
    return Frame(tuple(ws), frozenset(edges))


def pointed(edges, val=None, root="s", worlds=None):
    ws = worlds or sorted({root} | {w for e in edges for w in e})
    return PointedModel.build(ws, edges, val or {}, root)


class TestKLSpec:
    def test_parse(self):
        kl = KLSpec.parse("1:2,2:5")
        assert kl.pairs == ((1, 2), (2, 5))
        assert kl.max_power == 5
        assert str(kl) == "1:2,2:5"

    @pytest.mark.parametrize("text", ["2:1", "1:1", "0:2", "1:2,1:2", "12", "a:b", ""])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            KLSpec.parse(text)

    def test_empty(self):
        with pytest.raises(ValueError):
            KLSpec(())


class TestPowers:
    def test_chain(self):
        assert compose_power(frame([("a", "b"), ("b", "c")]), 2) == {("a", "c")}

    def test_zero_is_identity(self):
        f = frame([("a", "b")])
        assert compose_power(f, 0) == {("a", "a"), ("b", "b")}

    def test_loop(self):
        assert compose_power(frame([("a", "a")]), 5) == {("a", "a")}

    @given(random_models(), st.integers(0, 4))
    def test_against_naive(self, pm, n):
        rel = {(w, w) for w in pm.worlds}
        for _ in range(n):
            rel = {(x, z) for x, y in rel for y2, z in pm.frame.rel if y == y2}
        assert compose_power(pm.frame, n) == rel


class TestFrameConditions:
    def test_loop_is_dense(self):
        assert is_kl_frame(frame([("a", "a")]), KLSpec.of((1, 2)))

    def test_single_edge_is_not(self):
        assert not is_kl_frame(frame([("a", "b")]), KLSpec.of((1, 2)))
        assert kl_violation(frame([("a", "b")]), KLSpec.of((1, 2))) == (1, 2, "a", "b")

    def test_triangle_is_not(self):
        f = frame([("a", "b"), ("a", "m"), ("m", "b")])
        assert not is_kl_frame(f, KLSpec.of((1, 2)))

    @given(random_models(4), st.sampled_from([KLSpec.of((1, 2)), KLSpec.of((2, 3)),
                                              KLSpec.of((1, 3), (2, 4))]))
    def test_against_naive_inclusion(self, pm, kl):
        expect = all(compose_power(pm.frame, k) <= compose_power(pm.frame, l) for k, l in kl.pairs)
        assert is_kl_frame(pm.frame, kl) == expect
        assert (kl_violation(pm.frame, kl) is None) == expect

    def test_acyclic(self):
        assert is_acyclic(frame([("a", "b"), ("b", "c")]))
        assert not is_acyclic(frame([("a", "a")]))
        assert not is_acyclic(frame([("a", "b"), ("b", "c"), ("c", "a")]))


class TestPaths:
    def test_direct_edge_wins(self):
        pm = pointed([("s", "a"), ("a", "b"), ("s", "b")])
        assert depth_delta(pm, "b") == 1
        assert depth_delta(pm, "s") == 0

    def test_chain(self):
        pm = pointed([("s", "a"), ("a", "b"), ("b", "c")])
        assert depth_delta(pm, "c") == 3
        assert shortest_path(pm, "b") == ("s", "a", "b")
        assert shortest_path(pm, "s") == ("s",)

    def test_ambiguous(self):
        pm = pointed([("s", "a"), ("a", "c"), ("s", "b"), ("b", "c")])
        with pytest.raises(AmbiguousShortestPath) as info:
            shortest_path(pm, "c")
        assert info.value.world == "c"

    def test_unreachable(self):
        pm = pointed([("s", "a")], worlds=["s", "a", "z"])
        with pytest.raises(UnreachableWorld):
            depth_delta(pm, "z")
        assert pm.unreachable() == ["z"]


class TestSatisfaction:
    def test_diamond_witness(self):
        pm = pointed([("a", "b")], {"p": {"b"}}, root="a")
        assert satisfies(pm.model, "a", Diamond(p))

    def test_vacuous_box(self):
        pm = pointed([], root="a")
        assert satisfies(pm.model, "a", Box(FALSE))

    def test_box_refuted(self):
        pm = pointed([("a", "b"), ("a", "c")], {"p": {"b"}}, root="a")
        assert not satisfies(pm.model, "a", Box(p))

    @given(random_models(), formulas(max_leaves=10))
    def test_against_recursive_definition(self, pm, f):
        model = pm.model

        def sat(x, g):
            name = type(g).__name__
            if name == "Atom":
                return x in model.valuation.get(g.name, ())
            if g is FALSE:
                return False
            if name == "Not":
                return not sat(x, g.child)
            if name == "And":
                return sat(x, g.left) and sat(x, g.right)
            return all(sat(y, g.child) for y in pm.frame.successors(x))

        for x in pm.worlds:
            assert satisfies(model, x, f) == sat(x, f)


class TestCertificates:
    def test_reflexive_point(self):
        pm = pointed([("s", "s")], {"p": {"s"}})
        assert check_model(pm, Diamond(p), KLSpec.of((1, 2))).ok

    def test_non_dense(self):
        rep = check_model(pointed([("s", "a")]), Diamond(TRUE), KLSpec.of((1, 2)))
        assert not rep.kl_frame_ok and rep.root_satisfies_phi and not rep.ok
        assert rep.as_dict()["kl_violation"] == {"k": 1, "l": 2, "from": "s", "to": "a"}


class TestInterchange:
    def test_canonical_text(self):
        pm = pointed([("s", "a"), ("s", "s")], {"p": {"a"}, "q": set()}, worlds=["s", "a"])
        assert model_to_json(pm) == (
            '{\n  "worlds": [\n    "s",\n    "a"\n  ],\n  "root": "s",\n'
            '  "edges": [\n    [\n      "s",\n      "s"\n    ],\n    [\n      "s",\n'
            '      "a"\n    ]\n  ],\n  "valuation": {\n    "p": [\n      "a"\n    ]\n  }\n}\n')

    @given(random_models())
    def test_round_trip_is_bit_exact(self, pm):
        text = model_to_json(pm)
        back = model_from_json(text)
        assert model_to_json(back) == text
        assert back.frame.rel == pm.frame.rel and back.root == pm.root

    @pytest.mark.parametrize("text", [
        "not json", "[]", '{"worlds": []}',
        '{"worlds": ["a"], "root": "b", "edges": [], "valuation": {}}',
        '{"worlds": ["a"], "root": "a", "edges": [["a"]], "valuation": {}}',
        '{"worlds": ["a"], "root": "a", "edges": [["a", "z"]], "valuation": {}}',
        '{"worlds": ["a"], "root": "a", "edges": [], "valuation": {"p": "a"}}',
        '{"worlds": [1], "root": "a", "edges": [], "valuation": {}}',
    ])
    def test_rejects_malformed(self, text):
        with pytest.raises(ModelFormatError):
            model_from_json(text)

    def test_dot(self):
        dot = model_to_dot(pointed([("s", "a")], {"p": {"a"}}))
        assert dot.startswith('digraph "model" {')
        assert '"s" -> "a";' in dot
        assert 'label="a\\np"' in dot
        assert '"s" [shape=doublecircle' in dot
