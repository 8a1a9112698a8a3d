from hypothesis import HealthCheck, settings, strategies as st

from quasidense.formula import FALSE, And, Atom, Box, Not
from quasidense.kripke import KLSpec, PointedModel

settings.register_profile("default", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SUITE_KL = [KLSpec.parse(s) for s in ("1:2", "1:3", "2:3", "1:2,2:4")]


def formulas(atoms=("p", "q"), max_leaves=12):
    leaves = st.sampled_from([FALSE] + [Atom(a) for a in atoms])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            sub.map(Not),
            sub.map(Box),
            st.tuples(sub, sub).map(lambda t: And(*t)),
        ),
        max_leaves=max_leaves,
    )


def shallow_formulas(max_depth=2, max_leaves=8):
    return formulas(max_leaves=max_leaves).filter(lambda f: f.depth <= max_depth)


kl_specs = st.sampled_from(SUITE_KL)


@st.composite
def random_models(draw, max_worlds=5):
    n = draw(st.integers(1, max_worlds))
    ws = [f"w{i}" for i in range(n)]
    edges = draw(st.sets(st.tuples(st.sampled_from(ws), st.sampled_from(ws))))
    val = {a: draw(st.sets(st.sampled_from(ws))) for a in ("p", "q")}
    return PointedModel.build(ws, sorted(edges), val, ws[0])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
