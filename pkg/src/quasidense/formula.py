"""Modal formulas over atoms, falsum, negation, conjunction and box.

Derived connectives (``true``, ``|``, ``->``, ``<>``) exist only at the
parsing boundary; every :class:`Formula` value is built from the five
primitives.  Nodes are hash-consed, so structurally equal formulas are the
same object and comparison is by identity.

>>> parse("<>p") is Not(Box(Not(Atom("p"))))
True
>>> str(parse("p -> q"))
'p -> q'
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator

__all__ = [
    "Formula", "Atom", "Bottom", "Not", "And", "Box",
    "FALSE", "TRUE", "Or", "Implies", "Diamond",
    "ParseError", "parse",
    "modal_depth", "size", "size_set", "depth_set", "atoms",
    "box_minus", "sf_closure", "sf_neg", "sf_neg_i", "TargetFormula",
    "sort_formulas",
]

_TABLE: dict[tuple, "Formula"] = {}


class Formula:
    """Base class of the primitive formula nodes."""

    __slots__ = ("_hash", "size", "depth", "_str")

    def __reduce__(self):
        return (type(self), self._args())

    def _args(self) -> tuple:
        raise NotImplementedError

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other

    def __ne__(self, other: object) -> bool:
        return self is not other

    def __str__(self) -> str:
        s = self._str
        if s is None:
            s = self._str = _show(self, 0)
        return s

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join(map(repr, self._args()))})"

    # operator sugar for building formulas in Python code
    def __invert__(self) -> Formula:
        return Not(self)

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __rshift__(self, other: Formula) -> Formula:
        return Implies(self, other)

    def subformulas(self) -> Iterator[Formula]:
        """Yield every node of the tree, children before parents."""
        raise NotImplementedError


def _stable_hash(cls, args) -> int:
    # independent of PYTHONHASHSEED so that set iteration order is reproducible
    if cls is Atom:
        return zlib.crc32(args[0].encode())
    return hash((_TAGS[cls],) + tuple(a._hash for a in args))


def _intern(cls, args, size, depth):
    key = (cls, args)
    node = _TABLE.get(key)
    if node is None:
        node = object.__new__(cls)
        node._hash = _stable_hash(cls, args)
        node.size = size
        node.depth = depth
        node._str = None
        _TABLE[key] = node
    return node


class Atom(Formula):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        node = _TABLE.get((cls, (name,)))
        if node is None:
            node = _intern(cls, (name,), 1, 0)
            node.name = name
        return node

    def _args(self):
        return (self.name,)

    def subformulas(self):
        yield self


class Bottom(Formula):
    __slots__ = ()

    def __new__(cls):
        return _intern(cls, (), 1, 0)

    def _args(self):
        return ()

    def __repr__(self):
        return "Bottom()"

    def subformulas(self):
        yield self


class Not(Formula):
    __slots__ = ("child",)

    def __new__(cls, child: Formula):
        node = _TABLE.get((cls, (child,)))
        if node is None:
            node = _intern(cls, (child,), child.size + 1, child.depth)
            node.child = child
        return node

    def _args(self):
        return (self.child,)

    def subformulas(self):
        yield from self.child.subformulas()
        yield self


class And(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left: Formula, right: Formula):
        node = _TABLE.get((cls, (left, right)))
        if node is None:
            node = _intern(cls, (left, right), left.size + right.size + 1,
                           max(left.depth, right.depth))
            node.left = left
            node.right = right
        return node

    def _args(self):
        return (self.left, self.right)

    def subformulas(self):
        yield from self.left.subformulas()
        yield from self.right.subformulas()
        yield self


class Box(Formula):
    __slots__ = ("child",)

    def __new__(cls, child: Formula):
        node = _TABLE.get((cls, (child,)))
        if node is None:
            node = _intern(cls, (child,), child.size + 1, child.depth + 1)
            node.child = child
        return node

    def _args(self):
        return (self.child,)

    def subformulas(self):
        yield from self.child.subformulas()
        yield self


_TAGS = {Bottom: 0, Not: 1, And: 2, Box: 3}

FALSE = Bottom()
TRUE = Not(FALSE)


def Or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def Implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def Diamond(a: Formula) -> Formula:
    return Not(Box(Not(a)))


# -- printing ---------------------------------------------------------------

# binding strength: prefix 4, & 3, | 2, -> 1
def _show(f: Formula, ctx: int) -> str:
    text, prec = _show_prec(f)
    return f"({text})" if prec < ctx else text


def _show_prec(f: Formula) -> tuple[str, int]:
    if isinstance(f, Atom):
        return f.name, 5
    if f is FALSE:
        return "false", 5
    if isinstance(f, Box):
        return "[]" + _show(f.child, 4), 4
    if isinstance(f, And):
        return f"{_show(f.left, 3)} & {_show(f.right, 4)}", 3
    # Not
    c = f.child
    if c is FALSE:
        return "true", 5
    if isinstance(c, Box) and isinstance(c.child, Not):
        return "<>" + _show(c.child.child, 4), 4
    if isinstance(c, And):
        if isinstance(c.left, Not) and isinstance(c.right, Not):
            return f"{_show(c.left.child, 2)} | {_show(c.right.child, 3)}", 2
        if isinstance(c.right, Not):
            return f"{_show(c.left, 2)} -> {_show(c.right.child, 1)}", 1
    return "~" + _show(c, 4), 4


def sort_formulas(fs: Iterable[Formula]) -> list[Formula]:
    """Deterministic ordering: by size, then printed form."""
    return sorted(fs, key=lambda f: (f.size, str(f)))


# -- parsing ----------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(?P<op>->|<>|\[\]|[~&|()])|(?P<name>[a-z][a-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unknown token {text[pos]!r}", pos)
        tokens.append((m.group("op") or m.group("name"), m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self) -> tuple[str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str):
        tok, pos = self.tokens[self.i]
        raise ParseError(message + (f", found {tok!r}" if tok else ", found end of input"), pos)

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "[]":
            self.take()
            return Box(self.unary())
        if tok == "<>":
            self.take()
            return Diamond(self.unary())
        if tok == "(":
            self.take()
            f = self.implication()
            if self.peek() != ")":
                self.error("expected ')'")
            self.take()
            return f
        if tok == "false":
            self.take()
            return FALSE
        if tok == "true":
            self.take()
            return TRUE
        if tok and tok[0].isalpha():
            self.take()
            return Atom(tok)
        self.error("expected a formula")


def parse(text: str) -> Formula:
    """Parse the ASCII concrete syntax into a primitive-form formula.

    Atoms match ``[a-z][a-z0-9_]*``; ``false``/``true`` are constants; prefix
    operators ``~``, ``[]``, ``<>`` bind tightest, then ``&``, then ``|``,
    then the right-associative ``->``.
    """
    p = _Parser(text)
    f = p.implication()
    if p.peek() != "":
        p.error("unexpected trailing input")
    return f


# -- measures ---------------------------------------------------------------

def modal_depth(phi: Formula) -> int:
    return phi.depth


def size(phi: Formula) -> int:
    return phi.size


def size_set(s: Iterable[Formula]) -> int:
    return sum(f.size for f in s)


def depth_set(s: Iterable[Formula]) -> int:
    """Modal depth of a set; 0 for the empty set."""
    return max((f.depth for f in s), default=0)


def atoms(phi: Formula | Iterable[Formula]) -> list[str]:
    """Atom names occurring in ``phi`` (a formula or a set), sorted."""
    fs = [phi] if isinstance(phi, Formula) else phi
    return sorted({g.name for f in fs for g in f.subformulas() if isinstance(g, Atom)})


def box_minus(s: Iterable[Formula]) -> frozenset[Formula]:
    return frozenset(f.child for f in s if isinstance(f, Box))


def sf_closure(s: Iterable[Formula]) -> frozenset[Formula]:
    """Least superset of ``s`` closed under the subformula rules.

    The rules: conjunctions yield both conjuncts, a negated conjunction yields
    both negated conjuncts, ``~f`` yields ``f``, ``[]f`` yields ``f`` and
    ``~[]f`` yields ``~f``.  Each member contributes at most three new
    formulas, so the result has at most ``3 * size_set(s)`` elements.
    """
    out: set[Formula] = set()
    todo = list(s)
    while todo:
        f = todo.pop()
        if f in out:
            continue
        out.add(f)
        if isinstance(f, And):
            todo += (f.left, f.right)
        elif isinstance(f, Box):
            todo.append(f.child)
        elif isinstance(f, Not):
            c = f.child
            todo.append(c)
            if isinstance(c, And):
                todo += (Not(c.left), Not(c.right))
            elif isinstance(c, Box):
                todo.append(Not(c.child))
    return frozenset(out)


def sf_neg(s: Iterable[Formula]) -> frozenset[Formula]:
    sf = sf_closure(s)
    return sf | frozenset(Not(f) for f in sf)


def _literal_layer_step(universe: frozenset[Formula], layer: frozenset[Formula]) -> frozenset[Formula]:
    return frozenset(f for f in universe if Box(f) in layer)


def _closed_layer_step(universe: frozenset[Formula], layer: frozenset[Formula]) -> frozenset[Formula]:
    return sf_neg(box_minus(layer))


@dataclass(frozen=True, eq=False)
class TargetFormula:
    """The formula under test together with its depth-indexed closure layers.

    ``layers[i]`` is the set of closure formulas that can matter at a world
    ``i`` steps from the root.  By default a layer is the negation-closed
    subformula closure of the box bodies of the previous layer, which keeps
    every layer closed under boolean subformulas.  With ``literal=True`` the
    layers keep only members ``f`` of the top closure with ``[]f`` in the
    previous layer, without re-closing; that reading drops boolean
    subformulas of box bodies (for ``[](p & q)`` the first layer is
    ``{p & q}`` alone).
    """

    phi: Formula
    literal: bool = False
    depth: int = field(init=False)
    closure: frozenset[Formula] = field(init=False)
    layers: tuple[frozenset[Formula], ...] = field(init=False)

    def __post_init__(self):
        closure = sf_neg([self.phi])
        step = _literal_layer_step if self.literal else _closed_layer_step
        layers = [closure]
        while True:
            nxt = step(closure, layers[-1])
            if not nxt:
                break
            layers.append(nxt)
        set_ = object.__setattr__
        set_(self, "depth", self.phi.depth)
        set_(self, "closure", closure)
        set_(self, "layers", tuple(layers))

    def layer(self, i: int) -> frozenset[Formula]:
        if i < 0:
            raise ValueError("layer index must be non-negative")
        return self.layers[i] if i < len(self.layers) else frozenset()


def sf_neg_i(target: TargetFormula | Formula, i: int, literal: bool = False) -> frozenset[Formula]:
    """Closure formulas of depth ``i`` for the target formula."""
    if isinstance(target, Formula):
        target = TargetFormula(target, literal=literal)
    elif target.literal != literal:
        target = TargetFormula(target.phi, literal=literal)
    return target.layer(i)
