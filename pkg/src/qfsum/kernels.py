"""Convolution tree kernels over parse trees and SLOT-augmented semantic trees."""
from __future__ import annotations

import logging
from typing import Callable, Sequence

from .corpus import RoleFrame, Sentence, pos_class
from .trees import ParseTree, leaf, node

log = logging.getLogger(__name__)

SLOT_ORDER = ("ARG0", "ARG1", "ARG2", "ARG3", "ARG4", "ARGM", "TARGET")
SLOT_ARITY = len(SLOT_ORDER)
ST_LABEL = "ST"
SLOT_LABEL = "SLOT"
NULL = "null"
WILDCARD = "*"
_HEAD_PRIORITY = ("n", "v", "a", "r")


class KernelConfigError(ValueError):
    """Semantic trees with different slot layouts were compared."""


def _node_pair_delta(sstk: bool, memoize: bool = True) -> Callable[[ParseTree, ParseTree], int]:
    memo: dict[tuple[int, int], int] = {}

    def delta(a: ParseTree, b: ParseTree) -> int:
        if a.is_leaf or b.is_leaf:
            return 0
        if sstk and ((a.is_preterminal and a.children[0].label == NULL)
                     or (b.is_preterminal and b.children[0].label == NULL)):
            return 0
        if a.production != b.production:
            return 0
        if a.is_preterminal:
            return 1
        key = (id(a), id(b))
        if memoize and key in memo:
            return memo[key]
        value = 1
        for ca, cb in zip(a.children, b.children):
            value *= 1 + delta(ca, cb)
        if sstk:
            value -= 1
        if memoize:
            memo[key] = value
        return value

    return delta


def _kernel(t1: ParseTree, t2: ParseTree, sstk: bool, memoize: bool) -> int:
    delta = _node_pair_delta(sstk, memoize)
    by_production: dict[tuple, list[ParseTree]] = {}
    for n2 in t2.internal_nodes():
        by_production.setdefault(n2.production, []).append(n2)
    total = 0
    for n1 in t1.internal_nodes():
        for n2 in by_production.get(n1.production, ()):
            total += delta(n1, n2)
    return total


def tree_kernel(t1: ParseTree, t2: ParseTree, *, memoize: bool = True) -> int:
    """Number of common tree fragments, counted with multiplicity."""
    return _kernel(t1, t2, sstk=False, memoize=memoize)


def node_delta(n1: ParseTree, n2: ParseTree, *, sstk: bool = False) -> int:
    """Common fragments rooted at exactly this pair of nodes."""
    return _node_pair_delta(sstk)(n1, n2)


def _check_slot_layout(t: ParseTree) -> None:
    for n in t.nodes():
        if n.label == ST_LABEL and not n.is_leaf and len(n.children) != SLOT_ARITY:
            raise KernelConfigError(f"semantic tree node has {len(n.children)} slots, expected {SLOT_ARITY}")


def sstk(st1: ParseTree, st2: ParseTree, *, memoize: bool = True) -> int:
    """Shallow semantic tree kernel: null slots never match and every
    internal-node product drops the all-children-absent term."""
    if st1.label == ST_LABEL and st2.label == ST_LABEL and len(st1.children) != len(st2.children):
        raise KernelConfigError(
            f"slot arity mismatch: {len(st1.children)} vs {len(st2.children)}"
        )
    _check_slot_layout(st1)
    _check_slot_layout(st2)
    return _kernel(st1, st2, sstk=True, memoize=memoize)


def syntactic_feature(sentence_tree: ParseTree, query_trees: Sequence[ParseTree],
                      kernel: Callable[[ParseTree, ParseTree], float] = tree_kernel) -> float:
    """Mean kernel value between the sentence tree and each query sentence tree."""
    if not query_trees:
        raise ValueError("at least one query tree is required")
    return sum(kernel(q, sentence_tree) for q in query_trees) / len(query_trees)


def semantic_feature(sentence_sts: Sequence[ParseTree], query_sts: Sequence[ParseTree],
                     kernel: Callable[[ParseTree, ParseTree], float] = sstk) -> float:
    """For each query ST the best match among the sentence STs, averaged."""
    if not sentence_sts or not query_sts:
        return 0.0
    return sum(max(kernel(q, s) for s in sentence_sts) for q in query_sts) / len(query_sts)


# --- semantic tree construction ---------------------------------------------

def slot_of(label: str) -> str | None:
    label = label.upper()
    if label in ("TARGET", "V", "REL"):
        return "TARGET"
    if label.startswith("ARGM"):
        return "ARGM"
    if label in SLOT_ORDER:
        return label
    return None


def make_slot_tree(fillers: dict[str, tuple[str, ParseTree | str]] | None = None) -> ParseTree:
    """Build ``(ST (SLOT ...) x 7)`` from ``{slot: (argument label, head or nested ST)}``.

    Empty slots become ``(SLOT null)``.
    """
    fillers = fillers or {}
    for slot in fillers:
        if slot not in SLOT_ORDER:
            raise KernelConfigError(f"unknown slot {slot!r}")
    slots = []
    for slot in SLOT_ORDER:
        if slot not in fillers:
            slots.append(node(SLOT_LABEL, NULL))
            continue
        label, content = fillers[slot]
        slots.append(node(SLOT_LABEL, node(label, content)))
    return ParseTree(ST_LABEL, tuple(slots))


def semantic_head(sentence: Sentence, span: tuple[int, int]) -> int:
    """Token index of the span's head: first noun, else verb, adjective, adverb, else first word."""
    lo, hi = span
    classes = [pos_class(sentence.tokens[i].pos) for i in range(lo, hi + 1)]
    for wanted in _HEAD_PRIORITY:
        for offset, cls in enumerate(classes):
            if cls == wanted:
                return lo + offset
    return lo


def _contains(outer: tuple[int, int], inner: tuple[int, int]) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1] and outer != inner


def _extent(frame: RoleFrame) -> int:
    spans = [frame.predicate, *(s for _, s in frame.args)]
    return max(s[1] for s in spans) - min(s[0] for s in spans)


def build_semantic_trees(sentence: Sentence, *, wildcard: bool = False) -> list[ParseTree]:
    """One slot tree per role frame; an argument that strictly contains another
    frame's predicate embeds that frame's tree (innermost frame wins)."""
    frames: list[RoleFrame] = []
    seen = set()
    for f in sentence.role_frames or ():
        key = (f.predicate, tuple(sorted(f.args)))
        if key not in seen:
            seen.add(key)
            frames.append(f)

    def word(idx: int) -> str:
        return WILDCARD if wildcard else sentence.tokens[idx].stem

    def build(fi: int, active: frozenset[int]) -> ParseTree:
        frame = frames[fi]
        chosen: dict[str, tuple[str, tuple[int, int]]] = {}
        for label, span in sorted(frame.args, key=lambda a: (a[0], a[1])):
            slot = slot_of(label)
            if slot is None or slot == "TARGET" or slot in chosen:
                continue
            chosen[slot] = (label.upper(), span)
        fillers: dict[str, tuple[str, ParseTree | str]] = {
            "TARGET": ("TARGET", word(semantic_head(sentence, frame.predicate)))
        }
        for slot, (label, span) in chosen.items():
            inner = [gi for gi, g in enumerate(frames)
                     if gi != fi and gi not in active and _contains(span, g.predicate)]
            if inner:
                gi = min(inner, key=lambda g: (_extent(frames[g]), frames[g].predicate))
                fillers[slot] = (label, build(gi, active | {gi}))
            else:
                fillers[slot] = (label, word(semantic_head(sentence, span)))
        return make_slot_tree(fillers)

    return [build(i, frozenset({i})) for i in range(len(frames))]


def plain_semantic_tree(sentence: Sentence, frame: RoleFrame) -> ParseTree:
    """Slot-less semantic tree: argument labels hang directly off the root."""
    kids = []
    for label, span in sorted([("TARGET", frame.predicate), *frame.args], key=lambda a: a[1][0]):
        kids.append(node(label.upper(), sentence.tokens[semantic_head(sentence, span)].stem))
    return ParseTree(ST_LABEL, tuple(kids))


__all__ = [
    "KernelConfigError", "NULL", "SLOT_ARITY", "SLOT_ORDER", "WILDCARD", "build_semantic_trees",
    "leaf", "make_slot_tree", "node", "node_delta", "plain_semantic_tree", "semantic_feature",
    "semantic_head", "sstk", "syntactic_feature", "tree_kernel",
]
