"""Finite Kripke frames and models, relation powers and satisfaction."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .formula import And, Atom, Box, Formula, Not, FALSE

__all__ = [
    "KLSpec", "Frame", "Model", "PointedModel", "CertificateReport",
    "AmbiguousShortestPath", "UnreachableWorld", "ModelFormatError",
    "compose_power", "is_kl_frame", "is_acyclic", "depth_delta", "depths",
    "shortest_path", "satisfies", "extension", "check_model",
    "model_to_json", "model_from_json", "model_to_dot",
]


class AmbiguousShortestPath(ValueError):
    def __init__(self, world, paths=()):
        super().__init__(f"world {world!r} has more than one shortest path from the root")
        self.world = world
        self.paths = tuple(paths)


class UnreachableWorld(ValueError):
    def __init__(self, world):
        super().__init__(f"world {world!r} is not reachable from the root")
        self.world = world


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class KLSpec:
    """Density pairs ``(k, l)`` with ``1 <= k < l``: every ``k``-step
    connection must also be realisable in exactly ``l`` steps."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(k), int(l)) for k, l in self.pairs)
        if not pairs:
            raise ValueError("a KL specification needs at least one pair")
        for k, l in pairs:
            if not 1 <= k < l:
                raise ValueError(f"pair ({k},{l}) violates 1 <= k < l")
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate pairs in KL specification")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def parse(cls, text: str) -> KLSpec:
        """Parse the ``k:l,k:l`` notation, e.g. ``"1:2,2:5"``."""
        pairs = []
        for item in text.split(","):
            item = item.strip()
            k, sep, l = item.partition(":")
            if not sep or not k.strip().isdigit() or not l.strip().isdigit():
                raise ValueError(f"malformed KL pair {item!r} (expected k:l)")
            pairs.append((int(k), int(l)))
        return cls(tuple(pairs))

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> KLSpec:
        return cls(tuple(pairs))

    @property
    def max_power(self) -> int:
        return max(l for _, l in self.pairs)

    def __str__(self) -> str:
        return ",".join(f"{k}:{l}" for k, l in self.pairs)


@dataclass(frozen=True, eq=False)
class Frame:
    worlds: tuple[str, ...]
    rel: frozenset[tuple[str, str]]

    def __post_init__(self):
        worlds = tuple(self.worlds)
        if not worlds:
            raise ValueError("a frame needs at least one world")
        if len(set(worlds)) != len(worlds):
            raise ValueError("duplicate world names")
        rel = frozenset((a, b) for a, b in self.rel)
        known = set(worlds)
        for a, b in rel:
            if a not in known or b not in known:
                raise ValueError(f"edge ({a!r}, {b!r}) mentions an unknown world")
        object.__setattr__(self, "worlds", worlds)
        object.__setattr__(self, "rel", rel)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return set(self.worlds) == set(other.worlds) and self.rel == other.rel

    def __hash__(self):
        return hash((frozenset(self.worlds), self.rel))

    @cached_property
    def index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.worlds)}

    @cached_property
    def matrix(self) -> np.ndarray:
        n = len(self.worlds)
        a = np.zeros((n, n), dtype=bool)
        for x, y in self.rel:
            a[self.index[x], self.index[y]] = True
        a.flags.writeable = False
        return a

    @cached_property
    def succ_masks(self) -> tuple[int, ...]:
        """Successor sets as bitmasks over world indices."""
        masks = [0] * len(self.worlds)
        for x, y in self.rel:
            masks[self.index[x]] |= 1 << self.index[y]
        return tuple(masks)

    def successors(self, x: str) -> list[str]:
        m = self.succ_masks[self.index[x]]
        return [w for i, w in enumerate(self.worlds) if m >> i & 1]

    def power_matrix(self, n: int) -> np.ndarray:
        """Boolean matrix of the ``n``-fold composition of the relation."""
        if n < 0:
            raise ValueError("power must be non-negative")
        cache = self.__dict__.setdefault("_powers", {})
        if n not in cache:
            if n == 0:
                p = np.eye(len(self.worlds), dtype=bool)
            else:
                prev = self.power_matrix(n - 1)
                p = prev @ self.matrix
            p.flags.writeable = False
            cache[n] = p
        return cache[n]


@dataclass(frozen=True, eq=False)
class Model:
    frame: Frame
    valuation: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.frame.worlds)
        val = {}
        for atom, ws in self.valuation.items():
            ws = frozenset(ws)
            if not ws <= known:
                raise ValueError(f"valuation of {atom!r} mentions unknown worlds")
            val[atom] = ws
        object.__setattr__(self, "valuation", val)

    @property
    def worlds(self) -> tuple[str, ...]:
        return self.frame.worlds

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        strip = lambda v: {a: w for a, w in v.items() if w}
        return self.frame == other.frame and strip(self.valuation) == strip(other.valuation)

    def __hash__(self):
        return hash(self.frame)

    @cached_property
    def atom_masks(self) -> dict[str, int]:
        idx = self.frame.index
        return {a: sum(1 << idx[w] for w in ws) for a, ws in self.valuation.items()}


@dataclass(frozen=True, eq=False)
class PointedModel:
    model: Model
    root: str

    def __post_init__(self):
        if self.root not in self.model.frame.index:
            raise ValueError(f"root {self.root!r} is not a world of the model")

    @classmethod
    def build(cls, worlds: Sequence[str], edges: Iterable[tuple[str, str]],
              valuation: Mapping[str, Iterable[str]] | None = None,
              root: str | None = None) -> PointedModel:
        """Convenience constructor; the root defaults to the first world."""
        frame = Frame(tuple(worlds), frozenset(map(tuple, edges)))
        model = Model(frame, {a: frozenset(ws) for a, ws in (valuation or {}).items()})
        return cls(model, frame.worlds[0] if root is None else root)

    @property
    def frame(self) -> Frame:
        return self.model.frame

    @property
    def worlds(self) -> tuple[str, ...]:
        return self.model.frame.worlds

    def __eq__(self, other):
        if not isinstance(other, PointedModel):
            return NotImplemented
        return self.root == other.root and self.model == other.model

    def __hash__(self):
        return hash((self.root, self.model))

    def unreachable(self) -> list[str]:
        d = depths(self)
        return [w for w in self.worlds if w not in d]


# -- relation algebra -------------------------------------------------------

def _pairs_of(frame: Frame, m: np.ndarray) -> frozenset[tuple[str, str]]:
    ws = frame.worlds
    return frozenset((ws[i], ws[j]) for i, j in zip(*np.nonzero(m)))


def compose_power(frame: Frame, n: int) -> frozenset[tuple[str, str]]:
    return _pairs_of(frame, frame.power_matrix(n))


def is_kl_frame(frame: Frame, kl: KLSpec) -> bool:
    return kl_violation(frame, kl) is None


def kl_violation(frame: Frame, kl: KLSpec) -> tuple[int, int, str, str] | None:
    """First ``(k, l, x, y)`` with ``x R^k y`` but not ``x R^l y``."""
    for k, l in kl.pairs:
        bad = frame.power_matrix(k) & ~frame.power_matrix(l)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            return k, l, frame.worlds[i], frame.worlds[j]
    return None


def is_acyclic(frame: Frame) -> bool:
    """Kahn's algorithm; self-loops count as cycles."""
    n = len(frame.worlds)
    succ = frame.succ_masks
    indeg = [0] * n
    for m in succ:
        for j in range(n):
            if m >> j & 1:
                indeg[j] += 1
    ready = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while ready:
        i = ready.pop()
        seen += 1
        for j in range(n):
            if succ[i] >> j & 1:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
    return seen == n


def depths(pm: PointedModel) -> dict[str, int]:
    """Breadth-first distances from the root (unreachable worlds omitted)."""
    frame = pm.frame
    out = {pm.root: 0}
    queue = deque([pm.root])
    while queue:
        x = queue.popleft()
        for y in frame.successors(x):
            if y not in out:
                out[y] = out[x] + 1
                queue.append(y)
    return out


def depth_delta(pm: PointedModel, x: str) -> int:
    d = depths(pm).get(x)
    if d is None:
        raise UnreachableWorld(x)
    return d


def _shortest_path_table(pm: PointedModel) -> tuple[dict[str, int], dict[str, list[str]]]:
    """Depths plus, per world, every predecessor lying on a shortest path."""
    d = depths(pm)
    preds: dict[str, list[str]] = {w: [] for w in d}
    for x, y in pm.frame.rel:
        if x in d and y in d and d[y] == d[x] + 1:
            preds[y].append(x)
    return d, preds


def shortest_path(pm: PointedModel, x: str) -> tuple[str, ...]:
    d, preds = _shortest_path_table(pm)
    return _walk_back(d, preds, x)


def _walk_back(d, preds, x) -> tuple[str, ...]:
    if x not in d:
        raise UnreachableWorld(x)
    path = [x]
    cur = x
    while d[cur] > 0:
        ps = preds[cur]
        if len(ps) != 1:
            raise AmbiguousShortestPath(x)
        cur = ps[0]
        path.append(cur)
    return tuple(reversed(path))


def shortest_paths(pm: PointedModel, worlds: Iterable[str] | None = None) -> dict[str, tuple[str, ...]]:
    """Shortest paths for many worlds at once; raises on the first ambiguity."""
    d, preds = _shortest_path_table(pm)
    return {x: _walk_back(d, preds, x) for x in (worlds if worlds is not None else d)}


# -- satisfaction -----------------------------------------------------------

def extension(model: Model, phi: Formula, memo: dict | None = None) -> int:
    """Bitmask (over world indices) of the worlds where ``phi`` holds."""
    if memo is None:
        memo = {}
    frame = model.frame
    full = (1 << len(frame.worlds)) - 1
    succ = frame.succ_masks
    atoms = model.atom_masks

    def ext(f: Formula) -> int:
        r = memo.get(f)
        if r is not None:
            return r
        if isinstance(f, Atom):
            r = atoms.get(f.name, 0)
        elif f is FALSE:
            r = 0
        elif isinstance(f, Not):
            r = full & ~ext(f.child)
        elif isinstance(f, And):
            r = ext(f.left) & ext(f.right)
        elif isinstance(f, Box):
            inner = ext(f.child)
            r = 0
            for i, m in enumerate(succ):
                if m & ~inner == 0:
                    r |= 1 << i
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f] = r
        return r

    return ext(phi)


def satisfies(model: Model | PointedModel, x: str, phi: Formula) -> bool:
    if isinstance(model, PointedModel):
        model = model.model
    return bool(extension(model, phi) >> model.frame.index[x] & 1)


# -- certificates -----------------------------------------------------------

@dataclass(frozen=True)
class CertificateReport:
    kl_frame_ok: bool
    root_satisfies_phi: bool
    kl_violation: tuple[int, int, str, str] | None = None

    @property
    def ok(self) -> bool:
        return self.kl_frame_ok and self.root_satisfies_phi

    def as_dict(self) -> dict:
        d = {"ok": self.ok, "kl_frame_ok": self.kl_frame_ok,
             "root_satisfies_phi": self.root_satisfies_phi}
        if self.kl_violation is not None:
            k, l, x, y = self.kl_violation
            d["kl_violation"] = {"k": k, "l": l, "from": x, "to": y}
        return d


def check_model(pm: PointedModel, phi: Formula, kl: KLSpec) -> CertificateReport:
    """Re-check a claimed model: density of its frame and truth of ``phi`` at the root."""
    bad = kl_violation(pm.frame, kl)
    return CertificateReport(
        kl_frame_ok=bad is None,
        root_satisfies_phi=satisfies(pm.model, pm.root, phi),
        kl_violation=bad,
    )


# -- interchange ------------------------------------------------------------

def model_to_json(pm: PointedModel) -> str:
    """Canonical JSON text: worlds in model order, edges sorted by that order,
    atoms sorted by name with their worlds in model order."""
    frame = pm.frame
    idx = frame.index
    edges = sorted(frame.rel, key=lambda e: (idx[e[0]], idx[e[1]]))
    val = {a: sorted(ws, key=idx.__getitem__)
           for a, ws in sorted(pm.model.valuation.items()) if ws}
    doc = {
        "worlds": list(frame.worlds),
        "root": pm.root,
        "edges": [list(e) for e in edges],
        "valuation": val,
    }
    return json.dumps(doc, indent=2) + "\n"


def model_from_json(text: str) -> PointedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    missing = {"worlds", "root", "edges", "valuation"} - doc.keys()
    if missing:
        raise ModelFormatError(f"missing keys: {', '.join(sorted(missing))}")
    worlds, root, edges, val = doc["worlds"], doc["root"], doc["edges"], doc["valuation"]
    if not isinstance(worlds, list) or not all(isinstance(w, str) for w in worlds):
        raise ModelFormatError("'worlds' must be an array of strings")
    if not isinstance(root, str):
        raise ModelFormatError("'root' must be a string")
    if not isinstance(edges, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(isinstance(w, str) for w in e)
            for e in edges):
        raise ModelFormatError("'edges' must be an array of [from, to] pairs")
    if not isinstance(val, dict) or not all(
            isinstance(ws, list) and all(isinstance(w, str) for w in ws) for ws in val.values()):
        raise ModelFormatError("'valuation' must map atoms to arrays of worlds")
    try:
        return PointedModel.build(worlds, [tuple(e) for e in edges], val, root)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc


def model_to_dot(pm: PointedModel, name: str = "model") -> str:
    """GraphViz rendering; worlds are labelled with their true atoms."""
    lines = [f'digraph "{name}" {{', "\trankdir=LR;"]
    for w in pm.worlds:
        true_atoms = sorted(a for a, ws in pm.model.valuation.items() if w in ws)
        label = w + (("\\n" + ",".join(true_atoms)) if true_atoms else "")
        shape = "doublecircle" if w == pm.root else "circle"
        lines.append(f'\t"{w}" [shape={shape}, label="{label}"];')
    idx = pm.frame.index
    for x, y in sorted(pm.frame.rel, key=lambda e: (idx[e[0]], idx[e[1]])):
        lines.append(f'\t"{x}" -> "{y}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
