"""Propositional formulas over atoms p1..pm: parser, evaluator, compiler to
truth tables, and the DNF weight bound.

Concrete syntax: atoms "p<k>"; operators "!", "&", "|", "^", "->", "<->";
precedence ! > & > | > ^ > -> > <-> with "->" right-associative and the other
binary operators left-associative; parentheses are free.  Truth values are 0/1
at the API boundary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .boolfn import BooleanFunction


@dataclass(frozen=True)
class Atom:
    index: int


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of & | ^ -> <->
    left: "Formula"
    right: "Formula"


Formula = Atom | Not | BinOp


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN = re.compile(r"\s*(p\d+|<->|->|[!&|^()])")

# binding strength, loosest first
_LEVELS = ["<->", "->", "^", "|", "&"]
_PREC = {op: i for i, op in enumerate(_LEVELS)}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaSyntaxError(
                f"unexpected character {stripped[0]!r}", len(text) - len(stripped)
            )
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append((None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, m: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.m = m

    def peek(self):
        return self.tokens[self.i][0]

    def pos(self):
        return self.tokens[self.i][1]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        node = self.binary(0)
        if self.peek() is not None:
            raise FormulaSyntaxError(f"unexpected token {self.peek()!r}", self.pos())
        return node

    def binary(self, level: int) -> Formula:
        if level == len(_LEVELS):
            return self.unary()
        op = _LEVELS[level]
        node = self.binary(level + 1)
        if op == "->":
            # right-associative
            if self.peek() == op:
                self.take()
                return BinOp(op, node, self.binary(level))
            return node
        while self.peek() == op:
            self.take()
            node = BinOp(op, node, self.binary(level + 1))
        return node

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok, pos = self.take()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of formula", pos)
        if tok == "(":
            node = self.binary(0)
            nxt, npos = self.take()
            if nxt != ")":
                raise FormulaSyntaxError("expected ')'", npos)
            return node
        if tok.startswith("p"):
            k = int(tok[1:])
            if not 1 <= k <= self.m:
                raise FormulaSyntaxError(f"atom p{k} exceeds declared m = {self.m}", pos)
            return Atom(k)
        raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)


def parse(text: str, m: int) -> Formula:
    return _Parser(text, m).parse()


def _prec_of(node: Formula) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    return len(_LEVELS)  # atoms and ! bind tightest


def unparse(node: Formula) -> str:
    """Minimal-parenthesis text that re-parses to an identical tree."""
    if isinstance(node, Atom):
        return f"p{node.index}"
    if isinstance(node, Not):
        inner = unparse(node.operand)
        if isinstance(node.operand, BinOp):
            inner = f"({inner})"
        return f"!{inner}"
    lp, rp = _prec_of(node.left), _prec_of(node.right)
    me = _PREC[node.op]
    left = unparse(node.left)
    right = unparse(node.right)
    if node.op == "->":
        # right-associative: parenthesize a left child at the same level
        if lp <= me:
            left = f"({left})"
        if rp < me:
            right = f"({right})"
    else:
        if lp < me:
            left = f"({left})"
        if rp <= me:
            right = f"({right})"
    return f"{left} {node.op} {right}"


def evaluate(formula: Formula, assignment) -> int:
    """Recursive truth evaluation; assignment is a sequence of 0/1 for p1..pm."""
    vals = [bool(v) for v in assignment]

    def go(node) -> bool:
        if isinstance(node, Atom):
            return vals[node.index - 1]
        if isinstance(node, Not):
            return not go(node.operand)
        a = go(node.left)
        if node.op == "&":
            return a and go(node.right)
        if node.op == "|":
            return a or go(node.right)
        b = go(node.right)
        if node.op == "^":
            return a != b
        if node.op == "->":
            return (not a) or b
        return a == b  # <->

    return int(go(formula))


def compile_formula(formula: Formula, m: int) -> BooleanFunction:
    """Truth table of the formula over all 2^m assignments."""
    idx = np.arange(1 << m)
    cols = {t: ((idx >> (m - t)) & 1).astype(bool) for t in range(1, m + 1)}

    def go(node) -> np.ndarray:
        if isinstance(node, Atom):
            if node.index > m:
                raise ValueError(f"atom p{node.index} exceeds m = {m}")
            return cols[node.index]
        if isinstance(node, Not):
            return ~go(node.operand)
        a, b = go(node.left), go(node.right)
        if node.op == "&":
            return a & b
        if node.op == "|":
            return a | b
        if node.op == "^":
            return a ^ b
        if node.op == "->":
            return ~a | b
        return ~(a ^ b)  # <->

    return BooleanFunction(m, go(formula).astype(np.uint8))


def tautologically_equivalent(f1, f2, m: int) -> bool:
    """Same truth value on every assignment; accepts trees or source text."""
    if isinstance(f1, str):
        f1 = parse(f1, m)
    if isinstance(f2, str):
        f2 = parse(f2, m)
    return compile_formula(f1, m) == compile_formula(f2, m)


def expand_derived(node: Formula) -> Formula:
    """Rewrite ->, <->, ^ into their defining !/&/| expansions."""
    if isinstance(node, Atom):
        return node
    if isinstance(node, Not):
        return Not(expand_derived(node.operand))
    a = expand_derived(node.left)
    b = expand_derived(node.right)
    if node.op == "->":
        return BinOp("|", Not(a), b)
    if node.op == "<->":
        return BinOp("|", BinOp("&", a, b), BinOp("&", Not(a), Not(b)))
    if node.op == "^":
        return BinOp("|", BinOp("&", a, Not(b)), BinOp("&", Not(a), b))
    return BinOp(node.op, a, b)


def _literal_atom(node: Formula) -> int | None:
    if isinstance(node, Atom):
        return node.index
    if isinstance(node, Not) and isinstance(node.operand, Atom):
        return node.operand.index
    return None


def _conjunction_atoms(node: Formula) -> set[int] | None:
    lit = _literal_atom(node)
    if lit is not None:
        return {lit}
    if isinstance(node, BinOp) and node.op == "&":
        left = _conjunction_atoms(node.left)
        right = _conjunction_atoms(node.right)
        if left is None or right is None:
            return None
        return left | right
    return None


def dnf_weight_bound(formula: Formula | str, m: int) -> int:
    """For a syntactic DNF with t terms, the bound t * 2^(m - k_min) where
    k_min counts distinct atoms in the shortest conjunction term.  The true
    weight of the compiled formula never exceeds it."""
    if isinstance(formula, str):
        formula = parse(formula, m)
    terms: list[Formula] = []

    def split_or(node):
        if isinstance(node, BinOp) and node.op == "|":
            split_or(node.left)
            split_or(node.right)
        else:
            terms.append(node)

    split_or(formula)
    k_min = None
    for term in terms:
        atoms = _conjunction_atoms(term)
        if atoms is None:
            raise ValueError(
                "not in DNF: each term must be a conjunction of literals"
            )
        k_min = len(atoms) if k_min is None else min(k_min, len(atoms))
    return len(terms) * (1 << (m - k_min))
