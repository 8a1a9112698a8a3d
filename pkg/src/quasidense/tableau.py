"""Labelled tableau for K plus density pairs, with path-signature blocking.

A branch is a finite graph of world labels.  Worlds are numbered in creation
order; world 0 is the root.  Every non-root world is created as the child of
one existing world, so its depth (distance from the root) and its unique
shortest path are fixed at creation.  Later edges into a world only come from
worlds at least as deep, which keeps those shortest paths unique.

Blocking.  A world is identified by the pair (parent, initial label), which
unrolls to the sequence of initial labels along its shortest path: a path
signature over the labels the rules impose at creation time.  A rule that
would create a fresh child whose signature already exists reuses the existing
world instead.  Children of worlds at the modal-depth horizon are all sent to
one sink world carrying a self-loop and no formulas.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

from .formula import And, Atom, Box, Formula, Not, FALSE, TargetFormula, box_minus
from .kripke import KLSpec, PointedModel

__all__ = [
    "Blocking", "TableauConfig", "Branch", "CanonicalPrefix",
    "Open", "Closed", "ResourceLimit", "SaturationResult",
    "NoApplicableRule", "ResourceLimitExceeded",
    "initial_branch", "expand", "apply_structural", "find_unwitnessed_chain",
    "is_closed", "saturate",
]


class Blocking(str, Enum):
    NONE = "none"
    PATH_SIGNATURE = "path_signature"


@dataclass(frozen=True)
class TableauConfig:
    max_worlds: int = 512
    max_steps: int = 200_000
    blocking: Blocking = Blocking.PATH_SIGNATURE
    # Rule instances are served from FIFO queues in the order: decomposition
    # and box propagation, disjunctions, diamonds, then density chains.
    fairness: str = "round-robin"
    trace: Callable[[str], None] | None = None

    def __post_init__(self):
        if self.max_worlds < 1 or self.max_steps < 1:
            raise ValueError("tableau limits must be positive")
        if self.fairness != "round-robin":
            raise ValueError(f"unknown fairness schedule {self.fairness!r}")
        object.__setattr__(self, "blocking", Blocking(self.blocking))


class NoApplicableRule(Exception):
    """The branch is saturated."""


class ResourceLimitExceeded(Exception):
    pass


def _det_closure(fs) -> set[Formula]:
    """Closure under the non-branching propositional rules."""
    out = set()
    todo = list(fs)
    while todo:
        f = todo.pop()
        if f in out:
            continue
        out.add(f)
        if isinstance(f, And):
            todo += (f.left, f.right)
        elif isinstance(f, Not) and isinstance(f.child, Not):
            todo.append(f.child.child)
    return out


class Branch:
    """One tableau branch.  Rule applications mutate the branch in place;
    :meth:`copy` is used when a disjunction splits it."""

    __slots__ = ("target", "kl", "blocking", "max_worlds", "labels", "succ",
                 "depth", "parent", "init", "origin", "children", "sink",
                 "det", "disj", "dia", "processed", "why", "closed", "trace")

    def __init__(self, target: TargetFormula, kl: KLSpec, config: TableauConfig):
        self.target = target
        self.kl = kl
        self.blocking = config.blocking
        self.max_worlds = config.max_worlds
        self.trace = config.trace
        self.labels: list[set[Formula]] = []
        self.succ: list[set[int]] = []
        self.depth: list[int] = []
        self.parent: list[int] = []
        self.init: list[frozenset[Formula]] = []
        self.origin: list[str] = []
        self.children: dict[tuple[int, frozenset], int] = {}
        self.sink: int | None = None
        self.det: deque = deque()
        self.disj: deque = deque()
        self.dia: deque = deque()
        self.processed: set = set()
        self.why: dict[tuple[int, Formula], str] = {}
        self.closed: tuple[int, Formula] | None = None

    def copy(self) -> Branch:
        b = object.__new__(Branch)
        b.target, b.kl, b.blocking, b.max_worlds, b.trace = (
            self.target, self.kl, self.blocking, self.max_worlds, self.trace)
        b.labels = [set(s) for s in self.labels]
        b.succ = [set(s) for s in self.succ]
        b.depth = list(self.depth)
        b.parent = list(self.parent)
        b.init = list(self.init)
        b.origin = list(self.origin)
        b.children = dict(self.children)
        b.sink = self.sink
        b.det = deque(self.det)
        b.disj = deque(self.disj)
        b.dia = deque(self.dia)
        b.processed = set(self.processed)
        b.why = dict(self.why)
        b.closed = self.closed
        return b

    # -- views --------------------------------------------------------------

    @property
    def n_worlds(self) -> int:
        return len(self.labels)

    def labelled_formulas(self) -> set[tuple[int, Formula]]:
        return {(w, f) for w, fs in enumerate(self.labels) for f in fs}

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u, vs in enumerate(self.succ) for v in vs}

    def signature(self, w: int) -> tuple[frozenset[Formula], ...]:
        """Initial labels along the shortest path of ``w``."""
        sig = []
        while w >= 0:
            sig.append(self.init[w])
            w = self.parent[w]
        return tuple(reversed(sig))

    # -- primitive mutations ------------------------------------------------

    def _log(self, rule: str, where: str, f: Formula | None = None):
        if self.trace is not None:
            self.trace(f"{rule}\t{where}\t{'' if f is None else f}")

    def new_world(self, parent: int, init: frozenset[Formula], origin: str) -> int:
        if len(self.labels) >= self.max_worlds:
            raise ResourceLimitExceeded(f"more than {self.max_worlds} worlds")
        w = len(self.labels)
        self.labels.append(set())
        self.succ.append(set())
        self.depth.append(0 if parent < 0 else self.depth[parent] + 1)
        self.parent.append(parent)
        self.init.append(init)
        self.origin.append(origin)
        if parent >= 0:
            self.children[(parent, init)] = w
        return w

    def add(self, w: int, f: Formula, rule: str) -> bool:
        labels = self.labels[w]
        if f in labels:
            return False
        labels.add(f)
        self.why[(w, f)] = rule
        if f is FALSE or (f.child in labels if isinstance(f, Not) else Not(f) in labels):
            if self.closed is None:
                self.closed = (w, f)
            return True
        if isinstance(f, And):
            self.det.append(("and", w, f))
        elif isinstance(f, Box):
            for v in self.succ[w]:
                self.det.append(("box", w, f, v))
        elif isinstance(f, Not):
            c = f.child
            if isinstance(c, Not):
                self.det.append(("not-not", w, f))
            elif isinstance(c, And):
                self.disj.append(("or", w, f))
            elif isinstance(c, Box):
                self.dia.append(("diamond", w, f))
        return True

    def add_edge(self, u: int, v: int) -> bool:
        if v in self.succ[u]:
            return False
        self.succ[u].add(v)
        for f in self.labels[u]:
            if isinstance(f, Box):
                self.det.append(("box", u, f, v))
        return True

    def child(self, w: int, init: frozenset[Formula], origin: str) -> tuple[int, bool]:
        """World for a would-be-fresh successor of ``w``; returns (world, fresh)."""
        if self.blocking is Blocking.PATH_SIGNATURE:
            if self.depth[w] >= self.target.depth:
                # formulas at the horizon carry no modalities
                assert not init, "obligations beyond the modal-depth horizon"
                if self.sink is None:
                    self.sink = self.new_world(w, frozenset(), "sink")
                    self.succ[self.sink].add(self.sink)
                    self._log("sink", f"w{self.sink}")
                    return self.sink, True
                return self.sink, False
            existing = self.children.get((w, init))
            if existing is not None:
                self._log("block", f"w{w}->w{existing}")
                return existing, False
        return self.new_world(w, init, origin), True


def initial_branch(target: TargetFormula, kl: KLSpec, config: TableauConfig | None = None) -> Branch:
    b = Branch(target, kl, config or TableauConfig())
    b.new_world(-1, frozenset([target.phi]), "root")
    b.add(0, target.phi, "input")
    return b


def is_closed(branch: Branch) -> bool:
    """True iff some world carries falsum or a formula together with its negation."""
    for fs in branch.labels:
        if FALSE in fs:
            return True
        for f in fs:
            if isinstance(f, Not) and f.child in fs:
                return True
    return False


# -- density chains ---------------------------------------------------------

def _masks(branch: Branch) -> list[int]:
    return [sum(1 << v for v in vs) for vs in branch.succ]


def _step(masks: list[int], frontier: list[int], allowed: int) -> list[int]:
    out = []
    for m in frontier:
        r = 0
        while m:
            low = m & -m
            r |= masks[low.bit_length() - 1]
            m ^= low
        out.append(r & allowed)
    return out


def find_unwitnessed_chain(branch: Branch) -> tuple[tuple[int, int], tuple[int, ...]] | None:
    """First chain ``x0 R x1 ... R xk`` avoiding the sink whose endpoints are
    not yet joined by a path of length ``l``, for some pair ``(k, l)``.

    Chains through the sink are skipped: its self-loop pads any such chain
    to every longer length.
    """
    masks = _masks(branch)
    n = len(masks)
    everything = (1 << n) - 1
    no_sink = everything if branch.sink is None else everything & ~(1 << branch.sink)
    for k, l in branch.kl.pairs:
        reach_k = [(1 << x) & no_sink for x in range(n)]
        for _ in range(k):
            reach_k = _step(masks, reach_k, no_sink)
        reach_l = [1 << x for x in range(n)]
        for _ in range(l):
            reach_l = _step(masks, reach_l, everything)
        for x in range(n):
            missing = reach_k[x] & ~reach_l[x]
            if missing:
                y = (missing & -missing).bit_length() - 1
                return (k, l), _some_chain(masks, x, y, k, no_sink)
    return None


def _some_chain(masks, x, y, k, allowed) -> tuple[int, ...]:
    def go(cur, left):
        if left == 0:
            return (cur,) if cur == y else None
        m = masks[cur] & allowed
        while m:
            low = m & -m
            nxt = low.bit_length() - 1
            rest = go(nxt, left - 1)
            if rest is not None:
                return (cur,) + rest
            m ^= low
        return None
    chain = go(x, k)
    assert chain is not None
    return chain


def apply_structural(branch: Branch, pair: tuple[int, int], chain: tuple[int, ...],
                     config: TableauConfig | None = None) -> Branch:
    """Add a path of length ``l`` from the first to the last world of a
    ``k``-chain through ``l - 1`` successor worlds (fresh unless blocked).

    Each processed ``(pair, chain)`` instance fires once.
    """
    k, l = pair
    if len(chain) != k + 1:
        raise ValueError("chain length does not match the pair")
    if (pair, chain) in branch.processed:
        return branch
    branch.processed.add((pair, chain))
    branch._log(f"density {k}:{l}", "->".join(f"w{w}" for w in chain))
    prev = chain[0]
    view = branch.labels[prev]
    for _ in range(l - 1):
        init = box_minus(view)
        nxt, fresh = branch.child(prev, init, "intermediate")
        branch.add_edge(prev, nxt)
        if fresh:
            for f in init:
                branch.add(nxt, f, "box")
            view = _det_closure(init)
        else:
            view = branch.labels[nxt]
        prev = nxt
    branch.add_edge(prev, chain[-1])
    return branch


# -- rule application -------------------------------------------------------

def expand(branch: Branch, config: TableauConfig | None = None) -> list[Branch]:
    """Apply the next applicable rule instance.

    Returns the resulting branches (two for a disjunction split).  The input
    branch object is reused as the first result.  Raises
    :class:`NoApplicableRule` when the branch is saturated.
    """
    b = branch
    while b.det:
        item = b.det.popleft()
        rule, w, f = item[0], item[1], item[2]
        if rule == "and":
            changed = b.add(w, f.left, "and") | b.add(w, f.right, "and")
        elif rule == "not-not":
            changed = b.add(w, f.child.child, "not-not")
        else:
            v = item[3]
            changed = b.add(v, f.child, "box")
            w = v
        if changed:
            b._log(rule, f"w{w}", f)
            return [b]
    while b.disj:
        _, w, f = b.disj.popleft()
        na, nb = Not(f.child.left), Not(f.child.right)
        labels = b.labels[w]
        if na in labels or nb in labels:
            continue
        other = b.copy()
        b.add(w, na, "or")
        other.add(w, nb, "or")
        b._log("or", f"w{w}", f)
        return [b, other]
    while b.dia:
        _, w, f = b.dia.popleft()
        body = Not(f.child.child)
        init = box_minus(b.labels[w]) | {body}
        v, fresh = b.child(w, init, "witness")
        b.add_edge(w, v)
        for g in init:
            b.add(v, g, "diamond" if g is body else "box")
        b._log("diamond", f"w{w}->w{v}", f)
        return [b]
    found = find_unwitnessed_chain(b)
    if found is None:
        raise NoApplicableRule
    apply_structural(b, *found)
    return [b]


# -- saturation -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CanonicalPrefix:
    """Finite structure read off an open saturated branch."""

    pm: PointedModel
    labels: dict[str, frozenset[Formula]]
    depth: dict[str, int]
    parent: dict[str, str | None]
    origin: dict[str, str]
    sink: str | None

    @property
    def n_worlds(self) -> int:
        return len(self.pm.worlds)


@dataclass(frozen=True, eq=False)
class Open:
    prefix: CanonicalPrefix
    branch: Branch
    steps: int


@dataclass(frozen=True)
class Closed:
    steps: int
    branches: int


@dataclass(frozen=True)
class ResourceLimit:
    reason: str
    steps: int


SaturationResult = Union[Open, Closed, ResourceLimit]


def prefix_of(branch: Branch) -> CanonicalPrefix:
    names = [f"w{i}" for i in range(branch.n_worlds)]
    edges = [(names[u], names[v]) for u, vs in enumerate(branch.succ) for v in sorted(vs)]
    valuation: dict[str, set[str]] = {}
    for w, fs in enumerate(branch.labels):
        for f in fs:
            if isinstance(f, Atom):
                valuation.setdefault(f.name, set()).add(names[w])
    for a in _atom_names(branch.target.phi):
        valuation.setdefault(a, set())
    pm = PointedModel.build(names, edges, valuation, names[0])
    return CanonicalPrefix(
        pm=pm,
        labels={names[w]: frozenset(fs) for w, fs in enumerate(branch.labels)},
        depth={names[w]: d for w, d in enumerate(branch.depth)},
        parent={names[w]: (names[p] if p >= 0 else None) for w, p in enumerate(branch.parent)},
        origin={names[w]: o for w, o in enumerate(branch.origin)},
        sink=None if branch.sink is None else names[branch.sink],
    )


def _atom_names(phi: Formula) -> list[str]:
    return sorted({g.name for g in phi.subformulas() if isinstance(g, Atom)})


def saturate(target: TargetFormula | Formula, kl: KLSpec,
             config: TableauConfig | None = None) -> SaturationResult:
    """Depth-first exploration of the disjunction choices.

    Returns :class:`Open` for the first open saturated branch, :class:`Closed`
    when every branch closes, or :class:`ResourceLimit` when a budget runs out.
    """
    config = config or TableauConfig()
    if isinstance(target, Formula):
        target = TargetFormula(target)
    stack = [initial_branch(target, kl, config)]
    steps = 0
    explored = 0
    while stack:
        b = stack.pop()
        explored += 1
        while b.closed is None:
            try:
                out = expand(b, config)
            except NoApplicableRule:
                return Open(prefix_of(b), b, steps)
            except ResourceLimitExceeded as exc:
                return ResourceLimit(str(exc), steps)
            steps += 1
            if steps > config.max_steps:
                return ResourceLimit(f"more than {config.max_steps} rule applications", steps)
            if len(out) > 1:
                stack.append(out[1])
            b = out[0]
    return Closed(steps, explored)
