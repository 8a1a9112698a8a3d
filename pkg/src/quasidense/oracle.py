"""Brute-force ground truth: exhaustive small-model search and formula corpora.

Models are enumerated by world count, then by edge set (as the integer whose
bit ``i*n + j`` encodes the edge ``i -> j``), then by valuation (the integer
whose bit ``a*n + x`` says atom number ``a`` holds at world ``x``, atoms in
sorted order).  The root is always world 0 and every world must be reachable
from it; frames that are isomorphic under a permutation fixing the root are
represented only by their smallest edge set.

For speed, one formula is evaluated on all frames of a given size at once,
with the valuations packed as bits of 64-bit words.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .formula import And, Atom, Box, Formula, Not, FALSE, atoms as atoms_of
from .kripke import KLSpec, PointedModel

__all__ = [
    "SearchBound", "Found", "NoneUpTo", "enumerate_models", "dense_frames",
    "generate_corpus", "corpus_count", "MAX_ORACLE_WORLDS", "MAX_CORPUS",
]

MAX_ORACLE_WORLDS = 4
MAX_CORPUS = 2_000_000
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class SearchBound:
    max_worlds: int = 4
    atoms: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be at least 1")
        if self.max_worlds > MAX_ORACLE_WORLDS:
            raise ValueError(f"exhaustive search is limited to {MAX_ORACLE_WORLDS} worlds")


@dataclass(frozen=True, eq=False)
class Found:
    model: PointedModel
    worlds: int


@dataclass(frozen=True)
class NoneUpTo:
    bound: int


@lru_cache(maxsize=None)
def dense_frames(n: int, kl: KLSpec) -> np.ndarray:
    """Adjacency matrices (F, n, n) of the rooted, density-respecting frames
    on ``n`` worlds, one per isomorphism class, in increasing edge-set order."""
    if not 1 <= n <= MAX_ORACLE_WORLDS:
        raise ValueError(f"frame size must be between 1 and {MAX_ORACLE_WORLDS}")
    e = n * n
    masks = np.arange(1 << e, dtype=np.int64)
    adj = ((masks[:, None] >> np.arange(e)) & 1).astype(bool).reshape(-1, n, n)

    reach = np.zeros((len(masks), 1, n), dtype=bool)
    reach[:, 0, 0] = True
    for _ in range(n):
        reach = reach | (reach @ adj)
    keep = reach.all(axis=(1, 2))

    powers = {1: adj}
    for p in range(2, kl.max_power + 1):
        powers[p] = powers[p - 1] @ adj
    for k, l in kl.pairs:
        keep &= ~(powers[k] & ~powers[l]).any(axis=(1, 2))

    weights = (np.int64(1) << np.arange(e, dtype=np.int64)).reshape(n, n)
    for perm in itertools.permutations(range(1, n)):
        p = (0,) + perm
        permuted = adj[:, p][:, :, p]
        keep &= (permuted * weights).sum(axis=(1, 2)) >= masks
    frames = adj[keep]
    frames.flags.writeable = False
    return frames


@lru_cache(maxsize=None)
def _atom_patterns(n: int, n_atoms: int) -> tuple[np.ndarray, np.ndarray]:
    """Per (atom, world): the valuations where the atom holds, as uint64 words;
    plus the mask of valid valuation bits."""
    total = 1 << (n_atoms * n)
    words = max(1, total // 64)
    v = np.arange(words * 64, dtype=np.int64)
    pats = np.zeros((max(n_atoms, 1), n, words), dtype=np.uint64)
    for a in range(n_atoms):
        for x in range(n):
            bits = ((v >> (a * n + x)) & 1).astype(np.uint8)
            pats[a, x] = np.packbits(bits, bitorder="little").view(np.uint64)
    valid = np.packbits((v < total).astype(np.uint8), bitorder="little").view(np.uint64)
    return pats, valid


def _evaluate(phi: Formula, frames: np.ndarray, names: list[str]) -> np.ndarray:
    """Truth of ``phi`` as (F, n, words) bitsets over valuations."""
    n_frames, n, _ = frames.shape
    pats, _ = _atom_patterns(n, len(names))
    index = {a: i for i, a in enumerate(names)}
    words = pats.shape[2]
    shape = (n_frames, n, words)
    memo: dict[Formula, np.ndarray] = {}

    def ev(f):
        r = memo.get(f)
        if r is not None:
            return r
        if isinstance(f, Atom):
            r = np.broadcast_to(pats[index[f.name]], shape)
        elif f is FALSE:
            r = np.zeros(shape, dtype=np.uint64)
        elif isinstance(f, Not):
            r = ~ev(f.child)
        elif isinstance(f, And):
            r = ev(f.left) & ev(f.right)
        elif isinstance(f, Box):
            inner = ev(f.child)
            r = np.empty(shape, dtype=np.uint64)
            for x in range(n):
                acc = np.full((n_frames, words), _ALL, dtype=np.uint64)
                for y in range(n):
                    acc &= np.where(frames[:, x, y, None], inner[:, y], _ALL)
                r[:, x] = acc
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f] = r
        return r

    return ev(phi)


def _decode(adj: np.ndarray, v: int, names: list[str]) -> PointedModel:
    n = adj.shape[0]
    worlds = [f"w{i}" for i in range(n)]
    edges = [(worlds[i], worlds[j]) for i in range(n) for j in range(n) if adj[i, j]]
    valuation = {a: {worlds[x] for x in range(n) if v >> (i * n + x) & 1}
                 for i, a in enumerate(names)}
    return PointedModel.build(worlds, edges, valuation, worlds[0])


def enumerate_models(phi: Formula, kl: KLSpec, bound: SearchBound | None = None) -> Union[Found, NoneUpTo]:
    """First pointed model (in the documented order) of at most
    ``bound.max_worlds`` worlds whose frame respects ``kl`` and whose root
    satisfies ``phi``."""
    bound = bound or SearchBound()
    names = list(bound.atoms) if bound.atoms is not None else atoms_of(phi)
    for n in range(1, bound.max_worlds + 1):
        frames = dense_frames(n, kl)
        if not len(frames):
            continue
        truth = _evaluate(phi, frames, names)
        _, valid = _atom_patterns(n, len(names))
        root = truth[:, 0, :] & valid
        hits = np.flatnonzero(root.any(axis=1))
        if len(hits):
            f = hits[0]
            row = root[f]
            w = int(np.flatnonzero(row)[0])
            word = int(row[w])
            v = w * 64 + ((word & -word).bit_length() - 1)
            return Found(_decode(frames[f], v, names), n)
    return NoneUpTo(bound.max_worlds)


# -- corpus -------------------------------------------------------------------

def corpus_count(n_atoms: int, max_depth: int, max_size: int) -> int:
    """Number of formulas :func:`generate_corpus` would return."""
    @lru_cache(maxsize=None)
    def c(size, depth):
        if size == 1:
            return n_atoms + 1
        t = c(size - 1, depth)
        if depth > 0:
            t += c(size - 1, depth - 1)
        for a in range(1, size - 1):
            t += c(a, depth) * c(size - 1 - a, depth)
        return t
    return sum(c(s, max_depth) for s in range(1, max_size + 1))


def generate_corpus(atoms: list[str], max_depth: int, max_size: int) -> list[Formula]:
    """All primitive formulas over ``atoms`` with modal depth at most
    ``max_depth`` and at most ``max_size`` nodes.

    Ordered by size, then by modal depth; within those, leaves (falsum, then
    atoms), negations, boxes, then conjunctions by left-operand size.  Refuses
    bounds producing more than ``MAX_CORPUS`` formulas.
    """
    if max_depth < 0 or max_size < 1:
        raise ValueError("need max_depth >= 0 and max_size >= 1")
    if len(set(atoms)) != len(atoms):
        raise ValueError("duplicate atoms")
    total = corpus_count(len(atoms), max_depth, max_size)
    if total > MAX_CORPUS:
        raise ValueError(f"corpus of {total} formulas exceeds the cutoff of {MAX_CORPUS}")
    # by_size[s][d]: formulas of exactly size s and modal depth exactly d
    by_size: list[list[list[Formula]]] = [[]]
    by_size.append([[FALSE] + [Atom(a) for a in atoms]] + [[] for _ in range(max_depth)])
    for s in range(2, max_size + 1):
        layer = [[] for _ in range(max_depth + 1)]
        for d in range(max_depth + 1):
            layer[d].extend(Not(f) for f in by_size[s - 1][d])
        for d in range(max_depth):
            layer[d + 1].extend(Box(f) for f in by_size[s - 1][d])
        for a in range(1, s - 1):
            b = s - 1 - a
            for da in range(max_depth + 1):
                for db in range(max_depth + 1):
                    target = layer[max(da, db)]
                    for left in by_size[a][da]:
                        for right in by_size[b][db]:
                            target.append(And(left, right))
        by_size.append(layer)
    out = []
    for s in range(1, max_size + 1):
        for d in range(max_depth + 1):
            out.extend(by_size[s][d])
    return out
