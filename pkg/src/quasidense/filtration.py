"""Path filtration: quotient a pointed model by equality of restricted labels
along shortest paths, and executable checks of the transfer properties.

Two worlds are equivalent when both lie beyond the modal-depth horizon of the
target formula (they collapse into one sink class), or when the sequences of
restricted labels along their shortest paths from the root coincide.  This is
finer than identifying worlds by their own label alone.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .formula import Atom, Formula, TargetFormula, box_minus, sort_formulas
from .kripke import (
    KLSpec, PointedModel, UnreachableWorld,
    _shortest_path_table, _walk_back, extension, is_kl_frame,
)

__all__ = [
    "RestrictedLabel", "PathSignature", "SINK", "EquivClass", "FiltratedModel",
    "restrict", "path_signature", "signature_or_sink", "equiv", "build_filtrated",
    "size_bound", "check_truth_lemma", "check_universal_property",
    "check_exist_pred", "check_exists_path", "check_qd_frame", "check_equivalence",
    "check_notes",
]


@dataclass(frozen=True)
class RestrictedLabel:
    formulas: frozenset[Formula]

    def key(self) -> str:
        return "{" + ", ".join(map(str, sort_formulas(self.formulas))) + "}"

    def __len__(self):
        return len(self.formulas)

    def __contains__(self, f):
        return f in self.formulas


@dataclass(frozen=True)
class PathSignature:
    labels: tuple[RestrictedLabel, ...]

    def key(self) -> str:
        return " . ".join(lab.key() for lab in self.labels)


class _Sink:
    __slots__ = ()

    def __repr__(self):
        return "SINK"

    def key(self) -> str:
        return "sink"


SINK = _Sink()
Signature = Union[PathSignature, _Sink]


class _Labeller:
    """Restricted labels of every reachable world, sharing one evaluation."""

    def __init__(self, pm: PointedModel, target: TargetFormula):
        self.pm = pm
        self.target = target
        self.depth, self.preds = _shortest_path_table(pm)
        self.memo: dict = {}
        self.index = pm.frame.index
        self._labels: dict[str, RestrictedLabel] = {}

    def delta(self, x: str) -> int:
        d = self.depth.get(x)
        if d is None:
            raise UnreachableWorld(x)
        return d

    def label(self, x: str) -> RestrictedLabel:
        lab = self._labels.get(x)
        if lab is None:
            layer = self.target.layer(self.delta(x))
            bit = 1 << self.index[x]
            model = self.pm.model
            lab = RestrictedLabel(frozenset(
                f for f in layer if extension(model, f, self.memo) & bit))
            self._labels[x] = lab
        return lab

    def path(self, x: str) -> tuple[str, ...]:
        self.delta(x)
        return _walk_back(self.depth, self.preds, x)

    def signature(self, x: str) -> PathSignature:
        return PathSignature(tuple(self.label(w) for w in self.path(x)))

    def signature_or_sink(self, x: str) -> Signature:
        if self.delta(x) > self.target.depth:
            return SINK
        return self.signature(x)


def _target(target: TargetFormula | Formula) -> TargetFormula:
    return target if isinstance(target, TargetFormula) else TargetFormula(target)


def restrict(pm: PointedModel, target: TargetFormula | Formula, x: str) -> RestrictedLabel:
    """Members of the depth-``Δ(x)`` closure layer that hold at ``x``."""
    lab = _Labeller(pm, _target(target))
    lab.path(x)
    return lab.label(x)


def path_signature(pm: PointedModel, target: TargetFormula | Formula, x: str) -> PathSignature:
    return _Labeller(pm, _target(target)).signature(x)


def signature_or_sink(pm: PointedModel, target: TargetFormula | Formula, x: str) -> Signature:
    return _Labeller(pm, _target(target)).signature_or_sink(x)


def equiv(a: Signature, b: Signature) -> bool:
    if a is SINK or b is SINK:
        return a is b
    return a.labels == b.labels


# -- the quotient -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EquivClass:
    name: str
    signature: Signature
    members: tuple[str, ...]

    @property
    def is_sink(self) -> bool:
        return self.signature is SINK

    @property
    def depth(self) -> int | None:
        return None if self.is_sink else len(self.signature.labels) - 1


@dataclass(frozen=True, eq=False)
class FiltratedModel:
    pm: PointedModel
    classes: tuple[EquivClass, ...]
    class_of: dict[str, str]
    source: PointedModel
    target: TargetFormula

    @property
    def sink(self) -> EquivClass | None:
        for c in self.classes:
            if c.is_sink:
                return c
        return None

    def cls(self, name: str) -> EquivClass:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.classes)


def _class_name(sig: Signature) -> str:
    if sig is SINK:
        return "sink"
    return "c" + hashlib.sha1(sig.key().encode()).hexdigest()[:10]


def build_filtrated(pm: PointedModel, target: TargetFormula | Formula,
                    kl: KLSpec | None = None) -> FiltratedModel:
    """Quotient ``pm`` by path-signature equivalence.

    Classes are related when some members are; the sink class, when
    inhabited, gets a self-loop.  An atom of the target's closure holds at a
    class when it holds at every member; other atoms hold nowhere.  ``kl`` is
    accepted for interface symmetry and not consulted: the construction does
    not depend on it.

    Every world must be reachable, and every world within the modal-depth
    horizon must have a unique shortest path; violations raise
    :class:`~quasidense.kripke.UnreachableWorld` or
    :class:`~quasidense.kripke.AmbiguousShortestPath` naming the world.
    """
    target = _target(target)
    lab = _Labeller(pm, target)
    for w in pm.worlds:
        lab.delta(w)
    sigs = {w: lab.signature_or_sink(w) for w in pm.worlds}

    # classes ordered by depth, then by first member in model order
    order = sorted(pm.worlds, key=lambda w: (lab.depth[w], pm.frame.index[w]))
    members: dict[str, list[str]] = {}
    sig_of: dict[str, Signature] = {}
    class_of: dict[str, str] = {}
    for w in order:
        name = _class_name(sigs[w])
        if name in sig_of and not equiv(sig_of[name], sigs[w]):
            raise RuntimeError("signature hash collision")
        sig_of.setdefault(name, sigs[w])
        members.setdefault(name, []).append(w)
        class_of[w] = name
    if "sink" in members:
        # the sink class goes last
        members["sink"] = members.pop("sink")

    edges = {(class_of[x], class_of[y]) for x, y in pm.frame.rel}
    if "sink" in members:
        edges.add(("sink", "sink"))

    closure_atoms = sorted({f.name for f in target.closure if isinstance(f, Atom)})
    valuation = {}
    for a in closure_atoms:
        holds = pm.model.valuation.get(a, frozenset())
        valuation[a] = {c for c, ms in members.items() if all(m in holds for m in ms)}

    classes = tuple(EquivClass(c, sig_of[c], tuple(ms)) for c, ms in members.items())
    quotient = PointedModel.build([c.name for c in classes], sorted(edges), valuation,
                                  class_of[pm.root])
    return FiltratedModel(quotient, classes, class_of, pm, target)


def size_bound(target: TargetFormula | Formula) -> int:
    """Number of possible signatures of length at most ``d + 1`` plus the sink."""
    target = _target(target)
    per_label = 2 ** len(target.closure)
    return sum(per_label ** i for i in range(target.depth + 1)) + 1


# -- executable transfer properties --------------------------------------------
# Each check returns a list of counterexamples; an empty list means it holds.

def check_equivalence(fm: FiltratedModel, worlds: Iterable[str] | None = None) -> list:
    """Reflexivity, symmetry and transitivity of the signature equivalence."""
    lab = _Labeller(fm.source, fm.target)
    ws = list(worlds if worlds is not None else fm.source.worlds)
    sig = {w: lab.signature_or_sink(w) for w in ws}
    bad = [("reflexive", x) for x in ws if not equiv(sig[x], sig[x])]
    for x, y in itertools.product(ws, repeat=2):
        if equiv(sig[x], sig[y]) != equiv(sig[y], sig[x]):
            bad.append(("symmetric", x, y))
    for x, y, z in itertools.product(ws, repeat=3):
        if equiv(sig[x], sig[y]) and equiv(sig[y], sig[z]) and not equiv(sig[x], sig[z]):
            bad.append(("transitive", x, y, z))
    return bad


def check_notes(fm: FiltratedModel) -> list:
    """Equivalent worlds share their label, their depth (unless both labels
    are empty), and the classes of all their shortest-path ancestors."""
    lab = _Labeller(fm.source, fm.target)
    bad = []
    for c in fm.classes:
        for x, y in itertools.combinations(c.members, 2):
            if lab.label(x) != lab.label(y):
                bad.append(("label", x, y))
            if lab.label(x).formulas and lab.delta(x) != lab.delta(y):
                bad.append(("depth", x, y))
            if not c.is_sink:
                px, py = lab.path(x), lab.path(y)
                if len(px) != len(py) or any(fm.class_of[a] != fm.class_of[b] for a, b in zip(px, py)):
                    bad.append(("ancestors", x, y))
    return bad


def check_truth_lemma(fm: FiltratedModel) -> list[tuple[str, Formula]]:
    """Worlds within the horizon agree with their class on every formula of
    their closure layer."""
    src, q = fm.source, fm.pm
    lab = _Labeller(src, fm.target)
    memo_src: dict = {}
    memo_q: dict = {}
    bad = []
    for x in src.worlds:
        d = lab.delta(x)
        if d > fm.target.depth:
            continue
        bx = 1 << src.frame.index[x]
        bc = 1 << q.frame.index[fm.class_of[x]]
        for f in fm.target.layer(d):
            a = bool(extension(src.model, f, memo_src) & bx)
            b = bool(extension(q.model, f, memo_q) & bc)
            if a != b:
                bad.append((x, f))
    return bad


def check_universal_property(fm: FiltratedModel) -> list[tuple[str, str, Formula]]:
    """Related classes: box bodies of any member's label lie in the label of
    every member of the successor class."""
    lab = _Labeller(fm.source, fm.target)
    members = {c.name: c.members for c in fm.classes}
    bad = []
    for cx, cy in fm.pm.frame.rel:
        for x in members[cx]:
            need = box_minus(lab.label(x).formulas)
            for y in members[cy]:
                for f in need - lab.label(y).formulas:
                    bad.append((x, y, f))
    return bad


def check_exist_pred(fm: FiltratedModel) -> list[tuple[str, str, str]]:
    """For every edge ``x -> y`` with ``y`` inside the horizon and every
    ``y2`` equivalent to ``y``, some ``x2`` equivalent to ``x`` has an edge
    to ``y2``."""
    src = fm.source
    lab = _Labeller(src, fm.target)
    members = {c.name: c.members for c in fm.classes}
    rel = src.frame.rel
    preds_of: dict[str, set[str]] = {}
    for a, b in rel:
        preds_of.setdefault(b, set()).add(a)
    bad = []
    for x, y in sorted(rel):
        if lab.delta(y) > fm.target.depth:
            continue
        cx = fm.class_of[x]
        for y2 in members[fm.class_of[y]]:
            if not any(fm.class_of[x2] == cx for x2 in preds_of.get(y2, ())):
                bad.append((x, y, y2))
    return bad


def check_exists_path(fm: FiltratedModel, max_k: int = 3) -> list[tuple[int, str, str]]:
    """Every ``k``-path between classes avoiding the sink class is realised
    by a ``k``-path between some of their members, for ``1 <= k <= max_k``."""
    q = fm.pm
    names = [c.name for c in fm.classes]
    ci = {n: i for i, n in enumerate(names)}
    keep = np.array([not c.is_sink for c in fm.classes])
    qa = q.frame.matrix[np.ix_([q.frame.index[n] for n in names], [q.frame.index[n] for n in names])]
    qa = qa & keep[:, None] & keep[None, :]

    src = fm.source
    member = np.zeros((len(names), len(src.worlds)), dtype=bool)
    for w in src.worlds:
        member[ci[fm.class_of[w]], src.frame.index[w]] = True
    bad = []
    qk = np.eye(len(names), dtype=bool)
    for k in range(1, max_k + 1):
        qk = qk @ qa
        rk = src.frame.power_matrix(k)
        image = (member.astype(np.int32) @ rk.astype(np.int32) @ member.T.astype(np.int32)) > 0
        for i, j in np.argwhere(qk & ~image):
            bad.append((k, names[i], names[j]))
    return bad


def check_qd_frame(fm: FiltratedModel, kl: KLSpec) -> bool:
    return is_kl_frame(fm.pm.frame, kl)
