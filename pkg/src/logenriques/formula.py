"""A small condition language over the pools T1, T2, T3 of an extraction set.

Grammar (keywords are case sensitive)::

    expr    := conj ("or" conj)*
    conj    := unary ("and" unary)*
    unary   := "not" unary | "(" expr ")" | atom
    atom    := "true" | "false"
             | ("nonempty" | "empty") "(" POOL ")"
             | "member" "(" INT "," POOL ")"
             | ("subset" | "meets") "(" SET "," POOL ")"
             | ("size" | "min" | "max") "(" POOL ")" OP INT
             | POOL ("=" | "!=") SET
    SET     := "{" [INT ("," INT)*] "}"
    OP      := "=" | "==" | "!=" | "<" | "<=" | ">" | ">="

``min`` and ``max`` of an empty pool make the comparison false.
"""

from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

__all__ = ["FormulaError", "Expr", "parse_formula", "Pools"]

Pools = Mapping[str, frozenset]

_POOL_NAMES = ("T1", "T2", "T3")
_OPS: dict[str, Callable[[int, int], bool]] = {
    "=": operator.eq,
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<word>[A-Za-z_][A-Za-z_0-9]*)|(?P<op><=|>=|==|!=|[=<>])|(?P<punct>[(){},]))")


class FormulaError(ValueError):
    """Malformed condition text or a reference to something the case lacks."""


@dataclass(frozen=True)
class Expr:
    """Parsed condition: an AST node ``(tag, *args)`` plus the text it came from."""

    node: tuple
    source: str

    def __call__(self, pools: Pools) -> bool:
        return _eval(self.node, pools)

    def atoms(self) -> Iterator[tuple]:
        yield from _atoms(self.node)

    def pools_used(self) -> set[str]:
        return {a[1] for a in self.atoms() if len(a) > 1 and a[1] in _POOL_NAMES}

    def labels_used(self) -> set[int]:
        out: set[int] = set()
        for a in self.atoms():
            for x in a[2:]:
                if isinstance(x, frozenset):
                    out |= x
            if a[0] == "member":
                out.add(a[2])
        return out

    def __str__(self) -> str:
        return self.source


def _atoms(node: tuple) -> Iterator[tuple]:
    if node[0] in ("and", "or"):
        for child in node[1:]:
            yield from _atoms(child)
    elif node[0] == "not":
        yield from _atoms(node[1])
    else:
        yield node


def _eval(node: tuple, pools: Pools) -> bool:
    tag = node[0]
    if tag == "and":
        return all(_eval(c, pools) for c in node[1:])
    if tag == "or":
        return any(_eval(c, pools) for c in node[1:])
    if tag == "not":
        return not _eval(node[1], pools)
    if tag == "const":
        return node[1]
    pool = pools[node[1]]
    if tag == "nonempty":
        return bool(pool)
    if tag == "empty":
        return not pool
    if tag == "member":
        return node[2] in pool
    if tag == "subset":
        return node[2] <= pool
    if tag == "meets":
        return bool(node[2] & pool)
    if tag == "eqset":
        return pool == node[2]
    if tag == "neset":
        return pool != node[2]
    if tag in ("size", "min", "max"):
        op, n = node[2], node[3]
        if tag == "size":
            value = len(pool)
        elif not pool:
            return False
        else:
            value = min(pool) if tag == "min" else max(pool)
        return _OPS[op](value, n)
    raise FormulaError(f"unknown node {tag!r}")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"unexpected character at offset {pos} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def error(self, msg: str) -> FormulaError:
        got = self.tokens[self.i][1] if self.i < len(self.tokens) else "end of input"
        return FormulaError(f"{msg} (got {got!r}) in {self.text!r}")

    def peek(self) -> str | None:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def take(self, expected: str | None = None, kind: str | None = None) -> str:
        if self.i >= len(self.tokens):
            raise self.error(f"expected {expected or kind}")
        k, v = self.tokens[self.i]
        if (expected is not None and v != expected) or (kind is not None and k != kind):
            raise self.error(f"expected {expected or kind}")
        self.i += 1
        return v

    def parse(self) -> tuple:
        if not self.tokens:
            raise FormulaError("empty condition")
        node = self.expr()
        if self.i != len(self.tokens):
            raise self.error("trailing input")
        return node

    def expr(self) -> tuple:
        parts = [self.conj()]
        while self.peek() == "or":
            self.take("or")
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", *parts)

    def conj(self) -> tuple:
        parts = [self.unary()]
        while self.peek() == "and":
            self.take("and")
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", *parts)

    def unary(self) -> tuple:
        tok = self.peek()
        if tok == "not":
            self.take()
            return ("not", self.unary())
        if tok == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        return self.atom()

    def pool(self) -> str:
        name = self.take(kind="word")
        if name not in _POOL_NAMES:
            self.i -= 1
            raise self.error("expected a pool name T1, T2 or T3")
        return name

    def integer(self) -> int:
        return int(self.take(kind="int"))

    def label_set(self) -> frozenset:
        self.take("{")
        items = []
        if self.peek() != "}":
            items.append(self.integer())
            while self.peek() == ",":
                self.take(",")
                items.append(self.integer())
        self.take("}")
        return frozenset(items)

    def atom(self) -> tuple:
        word = self.take(kind="word")
        if word in ("true", "false"):
            return ("const", word == "true")
        if word in ("nonempty", "empty"):
            self.take("(")
            p = self.pool()
            self.take(")")
            return (word, p)
        if word == "member":
            self.take("(")
            n = self.integer()
            self.take(",")
            p = self.pool()
            self.take(")")
            return ("member", p, n)
        if word in ("subset", "meets"):
            self.take("(")
            s = self.label_set()
            self.take(",")
            p = self.pool()
            self.take(")")
            return (word, p, s)
        if word in ("size", "min", "max"):
            self.take("(")
            p = self.pool()
            self.take(")")
            op = self.take(kind="op")
            return (word, p, op, self.integer())
        if word in _POOL_NAMES:
            op = self.take(kind="op")
            if op not in ("=", "==", "!="):
                self.i -= 1
                raise self.error("a pool compares to a set with = or !=")
            return ("neset" if op == "!=" else "eqset", word, self.label_set())
        self.i -= 1
        raise self.error("unknown atom")


def parse_formula(text: str) -> Expr:
    if not isinstance(text, str):
        raise FormulaError(f"condition must be a string, not {type(text).__name__}")
    return Expr(_Parser(text).parse(), text)
