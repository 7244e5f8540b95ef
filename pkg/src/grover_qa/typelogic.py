"""Categorial type formulas and application-only derivations.

Types are built from the primitives ``n``, ``s`` and ``w`` with right
division ``B/A``, left division ``A\\B`` and product ``A*B``.  Derivations
use the two application rules only::

    B/A , A    =>  B      (ApplyRight)
    A   , A\\B  =>  B      (ApplyLeft)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

PRIMITIVES = ("n", "s", "w")


class TypeSyntaxError(ValueError):
    """Malformed type formula; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Primitive:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Over:
    """``result/argument``: looks for its argument to the right."""

    result: "SyntacticType"
    argument: "SyntacticType"

    def __str__(self) -> str:
        return f"{_wrap(self.result)}/{_wrap(self.argument)}"


@dataclass(frozen=True)
class Under:
    """``argument\\result``: looks for its argument to the left."""

    argument: "SyntacticType"
    result: "SyntacticType"

    def __str__(self) -> str:
        return f"{_wrap(self.argument)}\\{_wrap(self.result)}"


@dataclass(frozen=True)
class Product:
    left: "SyntacticType"
    right: "SyntacticType"

    def __str__(self) -> str:
        return f"{_wrap(self.left)}*{_wrap(self.right)}"


SyntacticType = Union[Primitive, Over, Under, Product]

N = Primitive("n")
S = Primitive("s")
W = Primitive("w")


def _wrap(t: SyntacticType) -> str:
    return str(t) if isinstance(t, Primitive) else f"({t})"


# -- parsing -----------------------------------------------------------------
#
#   product := division ('*' division)*
#   division := atom (('/' | '\') atom)*        left-associative
#   atom := primitive | '(' product ')'


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.data = text.encode("utf-8")
        self.pos = 0  # byte offset

    def peek(self) -> str | None:
        self._skip_ws()
        if self.pos >= len(self.data):
            return None
        # whole character for messages; only ASCII is ever accepted
        return self.data[self.pos:self.pos + 4].decode("utf-8", "replace")[0]

    def _skip_ws(self) -> None:
        while self.pos < len(self.data) and self.data[self.pos] in b" \t\r\n":
            self.pos += 1

    def parse(self) -> SyntacticType:
        if not self.text.strip():
            raise TypeSyntaxError("empty type formula", 0)
        t = self.product()
        if self.peek() is not None:
            raise TypeSyntaxError(f"unexpected {self.peek()!r}", self.pos)
        return t

    def product(self) -> SyntacticType:
        left = self.division()
        while self.peek() == "*":
            self.pos += 1
            left = Product(left, self.division())
        return left

    def division(self) -> SyntacticType:
        left = self.atom()
        while self.peek() in ("/", "\\"):
            op = self.peek()
            self.pos += 1
            right = self.atom()
            left = Over(left, right) if op == "/" else Under(left, right)
        return left

    def atom(self) -> SyntacticType:
        c = self.peek()
        if c is None:
            raise TypeSyntaxError("unexpected end of formula", self.pos)
        if c == "(":
            self.pos += 1
            inner = self.product()
            if self.peek() != ")":
                raise TypeSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return inner
        if c.isascii() and c.isalpha():
            start = self.pos
            while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isalnum():
                self.pos += 1
            name = self.data[start:self.pos].decode("utf-8")
            if name not in PRIMITIVES:
                raise TypeSyntaxError(f"unknown primitive {name!r}", start)
            return Primitive(name)
        raise TypeSyntaxError(f"unexpected {c!r}", self.pos)


def parse_type(text: str) -> SyntacticType:
    """Parse a formula such as ``(n\\n)/n`` into a type tree.

    ``/`` and ``\\`` share one precedence level and associate to the left;
    ``*`` binds more loosely than both.
    """
    return _Parser(text).parse()


# -- derivations ---------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    index: int
    type: SyntacticType

    @property
    def span(self) -> tuple[int, int]:
        return (self.index, self.index + 1)


@dataclass(frozen=True)
class ApplyRight:
    """``left : B/A`` applied to ``right : A``."""

    left: "Derivation"
    right: "Derivation"
    type: SyntacticType

    @property
    def span(self) -> tuple[int, int]:
        return (self.left.span[0], self.right.span[1])

    @property
    def functor(self) -> "Derivation":
        return self.left

    @property
    def argument(self) -> "Derivation":
        return self.right


@dataclass(frozen=True)
class ApplyLeft:
    """``right : A\\B`` applied to ``left : A``."""

    left: "Derivation"
    right: "Derivation"
    type: SyntacticType

    @property
    def span(self) -> tuple[int, int]:
        return (self.left.span[0], self.right.span[1])

    @property
    def functor(self) -> "Derivation":
        return self.right

    @property
    def argument(self) -> "Derivation":
        return self.left


Derivation = Union[Leaf, ApplyRight, ApplyLeft]


def combine(left: Derivation, right: Derivation) -> Derivation | None:
    """Apply whichever rule fits ``left`` followed by ``right``, if any."""
    lt, rt = left.type, right.type
    if isinstance(lt, Over) and lt.argument == rt:
        return ApplyRight(left, right, lt.result)
    if isinstance(rt, Under) and rt.argument == lt:
        return ApplyLeft(left, right, rt.result)
    return None


def _yields(lt: SyntacticType, rt: SyntacticType, target: SyntacticType) -> bool:
    if isinstance(lt, Over) and lt.argument == rt and lt.result == target:
        return True
    return isinstance(rt, Under) and rt.argument == lt and rt.result == target


def derive(types: Sequence[SyntacticType], goal: SyntacticType) -> list[Derivation]:
    """All distinct derivations of ``goal`` from ``types``, in a fixed order.

    A CYK pass first records which types each span can reach; trees are then
    rebuilt top-down only through spans that can actually contribute.  The
    order is by root split point, then recursively left and right subtree
    orderings, so ``(0 (1 (2 3)))`` precedes ``((0 1) (2 3))``.
    """
    types = tuple(types)
    if not types:
        raise ValueError("need at least one type")
    k = len(types)

    reach: dict[tuple[int, int], set[SyntacticType]] = {}
    for i, t in enumerate(types):
        reach[(i, i + 1)] = {t}
    for width in range(2, k + 1):
        for i in range(0, k - width + 1):
            j = i + width
            found: set[SyntacticType] = set()
            for m in range(i + 1, j):
                for lt in reach[(i, m)]:
                    for rt in reach[(m, j)]:
                        if isinstance(lt, Over) and lt.argument == rt:
                            found.add(lt.result)
                        if isinstance(rt, Under) and rt.argument == lt:
                            found.add(rt.result)
            reach[(i, j)] = found

    @lru_cache(maxsize=None)
    def trees(i: int, j: int, target: SyntacticType) -> tuple[Derivation, ...]:
        if target not in reach[(i, j)]:
            return ()
        if j - i == 1:
            return (Leaf(i, types[i]),)
        out = []
        for m in range(i + 1, j):
            for lt in sorted(reach[(i, m)], key=str):
                for rt in sorted(reach[(m, j)], key=str):
                    if not _yields(lt, rt, target):
                        continue
                    for ltree in trees(i, m, lt):
                        for rtree in trees(m, j, rt):
                            node = combine(ltree, rtree)
                            if node is not None and node.type == target:
                                out.append(node)
        return tuple(out)

    result: list[Derivation] = []
    seen: set[str] = set()
    for tree in trees(0, k, goal):
        sig = derivation_signature(tree)
        if sig not in seen:
            seen.add(sig)
            result.append(tree)
    return result


def derivation_signature(d: Derivation) -> str:
    """Bracketed word indices, e.g. ``((0 1) (2 3))``."""
    if isinstance(d, Leaf):
        return str(d.index)
    return f"({derivation_signature(d.left)} {derivation_signature(d.right)})"


def leaves(d: Derivation) -> Iterator[Leaf]:
    if isinstance(d, Leaf):
        yield d
    else:
        yield from leaves(d.left)
        yield from leaves(d.right)


def postorder(d: Derivation) -> Iterator[Derivation]:
    if not isinstance(d, Leaf):
        yield from postorder(d.left)
        yield from postorder(d.right)
    yield d


def type_checks(d: Derivation) -> bool:
    """Re-verify every internal node bottom-up."""
    if isinstance(d, Leaf):
        return True
    if not (type_checks(d.left) and type_checks(d.right)):
        return False
    node = combine(d.left, d.right)
    return node is not None and type(node) is type(d) and node.type == d.type
