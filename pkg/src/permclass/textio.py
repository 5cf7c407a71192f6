"""Text format for trees and forests.

Grammar (whitespace separates tokens and is otherwise ignored)::

    packed    := "." | "(" "*" packed packed+ ")"
               | "(" "g" PERM "[" SLOT ("," SLOT)* "]" packed+ ")"
    SLOT      := "L" | "P" INT                 # leaf slot, or direct sum of size INT
    canonical := "." | "(" "+" canonical canonical+ ")"
               | "(" "-" canonical canonical+ ")"
               | "(" "s" PERM canonical+ ")"     # simple node, one child per entry
    forest    := "{" packed* "}"
    shape     := "." | "(" shape+ ")"             # undecorated plane tree
    PERM      := DIGITS (only when n <= 9) | INT ("," INT)+

Examples: ``(* . (g 2413 [L,P2,L,L] . . . . .))`` and ``(- (+ . .) .)``.
"""
from __future__ import annotations

import re

from .errors import InvalidInputError
from .perm import Permutation
from .trees import STAR, CanonicalTree, DecoratedForest, Gadget, PackedTree, PlaneTree

_TOKEN = re.compile(r"[()\[\]{}]|[^\s()\[\]{}]+")


def _perm_text(p: Permutation) -> str:
    return p.text(compact=True) if len(p) <= 9 else ",".join(map(str, p.values))


def _parse_perm(tok: str) -> Permutation:
    return Permutation.parse(tok)


def tree_to_text(tree: PlaneTree) -> str:
    out = []
    D = tree.decorations
    stack: list = [0]
    while stack:
        item = stack.pop()
        if item == ")":
            out.append(")")
            continue
        v = item
        if tree.degrees[v] == 0:
            out.append(".")
            continue
        dec = D[v]
        if dec is None:
            head = "("
        elif dec == STAR:
            head = "(*"
        elif isinstance(dec, Gadget):
            slots = ",".join("L" if m == 1 else f"P{m}" for m in dec.slots)
            head = f"(g {_perm_text(dec.root)} [{slots}]"
        elif dec.is_increasing():
            head = "(+"
        elif dec.is_decreasing():
            head = "(-"
        else:
            head = f"(s {_perm_text(dec)}"
        out.append(head)
        stack.append(")")
        stack.extend(reversed(tree.children(v)))
    text = " ".join(out)
    return text.replace("( ", "(").replace(" )", ")")


def forest_to_text(forest: DecoratedForest) -> str:
    return "{" + " ".join(tree_to_text(t) for t in forest.trees) + "}"


class _Parser:
    def __init__(self, text: str):
        self.toks = _TOKEN.findall(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None:
            raise InvalidInputError("unexpected end of tree text")
        if expect is not None and tok != expect:
            raise InvalidInputError(f"expected {expect!r}, got {tok!r} at token {self.pos}")
        self.pos += 1
        return tok

    def done(self):
        if self.peek() is not None:
            raise InvalidInputError(f"trailing text at token {self.pos}: {self.peek()!r}")

    def node(self, mode, degrees, decs):
        tok = self.take()
        if tok == ".":
            degrees.append(0)
            decs.append(None)
            return
        if tok != "(":
            raise InvalidInputError(f"expected '(' or '.', got {tok!r}")
        head = self.peek()
        me = len(degrees)
        degrees.append(0)
        decs.append(None)
        if mode == "shape":
            dec = None
        elif mode == "packed" and head == "*":
            self.take()
            dec = STAR
        elif mode == "packed" and head == "g":
            self.take()
            root = _parse_perm(self.take())
            self.take("[")
            words = []
            while self.peek() != "]":
                words.append(self.take())
            self.take("]")
            slots = []
            for w in ",".join(words).split(","):
                w = w.strip()
                if not w:
                    continue
                if w == "L":
                    slots.append(1)
                elif w.startswith("P") and w[1:].isdigit() and int(w[1:]) >= 2:
                    slots.append(int(w[1:]))
                else:
                    raise InvalidInputError(f"bad slot {w!r}")
            dec = Gadget(root, tuple(slots))
        elif mode == "canonical" and head in ("+", "-"):
            self.take()
            dec = head
        elif mode == "canonical" and head == "s":
            self.take()
            dec = _parse_perm(self.take())
        else:
            raise InvalidInputError(f"unexpected node head {head!r} for a {mode} tree")
        k = 0
        while self.peek() != ")":
            if self.peek() is None:
                raise InvalidInputError("unbalanced parentheses")
            self.node(mode, degrees, decs)
            k += 1
        self.take(")")
        degrees[me] = k
        if dec == "+":
            dec = Permutation.identity(k)
        elif dec == "-":
            dec = Permutation.decreasing(k)
        decs[me] = dec


def _parse_one(text: str, mode: str):
    p = _Parser(text)
    degrees, decs = [], []
    p.node(mode, degrees, decs)
    p.done()
    return degrees, decs


def parse_packed(text: str) -> PackedTree:
    return PackedTree(*_parse_one(text, "packed"))


def parse_canonical(text: str) -> CanonicalTree:
    return CanonicalTree(*_parse_one(text, "canonical"))


def parse_shape(text: str) -> PlaneTree:
    degrees, _ = _parse_one(text, "shape")
    return PlaneTree(degrees)


def parse_forest(text: str) -> DecoratedForest:
    p = _Parser(text)
    p.take("{")
    trees = []
    while p.peek() != "}":
        if p.peek() is None:
            raise InvalidInputError("unterminated forest")
        degrees, decs = [], []
        p.node("packed", degrees, decs)
        trees.append(PackedTree(degrees, decs))
    p.take("}")
    p.done()
    return DecoratedForest(tuple(trees))
