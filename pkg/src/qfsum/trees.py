"""Labeled ordered trees and a reader for Penn-style bracketed parses."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

_BRACKET_TOKEN = re.compile(r"\(|\)|[^\s()]+")


@dataclass(frozen=True)
class ParseTree:
    """A node of a constituency (or semantic) tree.

    A node without children is a leaf (a word). A node with exactly one
    leaf child is a pre-terminal.
    """

    label: str
    children: tuple["ParseTree", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_preterminal(self) -> bool:
        return len(self.children) == 1 and self.children[0].is_leaf

    @property
    def production(self) -> tuple[str, tuple[str, ...]] | None:
        if self.is_leaf:
            return None
        return self.label, tuple(c.label for c in self.children)

    def nodes(self) -> Iterator["ParseTree"]:
        """Pre-order traversal over every node, leaves included."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def internal_nodes(self) -> list["ParseTree"]:
        return [n for n in self.nodes() if not n.is_leaf]

    def preterminals(self) -> list[tuple[str, str]]:
        """(tag, word) pairs in surface order."""
        return [(n.label, n.children[0].label) for n in self.nodes() if n.is_preterminal]

    def leaves(self) -> list[str]:
        return [n.label for n in self.nodes() if n.is_leaf]

    def __str__(self) -> str:
        if self.is_leaf:
            return self.label
        return "(" + " ".join([self.label] + [str(c) for c in self.children]) + ")"


def leaf(label: str) -> ParseTree:
    return ParseTree(label)


def node(label: str, *children: ParseTree | str) -> ParseTree:
    """Build a node; string children become leaves."""
    return ParseTree(label, tuple(ParseTree(c) if isinstance(c, str) else c for c in children))


def parse_bracketed(text: str) -> ParseTree:
    """Read one bracketed tree such as ``(S (NP (DT the) (NN cat)) (VP (VBD sat)))``.

    An unlabeled wrapper ``( (S ...) )`` around a single tree is dropped.
    """
    tokens = _BRACKET_TOKEN.findall(text)
    if not tokens:
        raise ValueError("empty tree string")
    pos = 0

    def read() -> ParseTree:
        nonlocal pos
        tok = tokens[pos]
        if tok != "(":
            pos += 1
            return ParseTree(tok)
        pos += 1
        label = ""
        if pos < len(tokens) and tokens[pos] not in ("(", ")"):
            label = tokens[pos]
            pos += 1
        children = []
        while pos < len(tokens) and tokens[pos] != ")":
            children.append(read())
        if pos >= len(tokens):
            raise ValueError(f"unbalanced brackets in tree: {text!r}")
        pos += 1
        return ParseTree(label, tuple(children))

    tree = read()
    if pos != len(tokens):
        raise ValueError(f"trailing material after tree: {text!r}")
    while not tree.label and len(tree.children) == 1 and not tree.children[0].is_leaf:
        tree = tree.children[0]
    if not tree.label:
        tree = ParseTree("ROOT", tree.children)
    return tree
