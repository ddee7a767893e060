"""Basic Elements derived from dependency triples, likelihood-ratio ranking,
query-filtered sentence scores and the BE overlap ratio used for redundancy."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import DEFAULT_STOPWORDS, Sentence, stem

BEKey = tuple[str, "str | None", "str | None"]


@dataclass(frozen=True)
class BasicElement:
    head: str
    modifier: str | None = None
    relation: str | None = None
    lr_score: float = 0.0

    @property
    def key(self) -> BEKey:
        return self.head, self.modifier, self.relation

    @property
    def is_single(self) -> bool:
        return self.modifier is None

    def words(self) -> tuple[str, ...]:
        return (self.head,) if self.modifier is None else (self.head, self.modifier)

    def __str__(self) -> str:
        if self.is_single:
            return self.head
        return f"{self.head}|{self.modifier}|{self.relation}"


def _sort_key(be: BasicElement) -> tuple:
    return (-be.lr_score, be.head, be.modifier or "", be.relation or "")


def _content_head(word: str, sentence: Sentence, stopwords: frozenset[str]) -> str | None:
    w = word.lower()
    st = stem(w)
    if w in stopwords or st in stopwords:
        return None
    for tok in sentence.tokens:
        if tok.stem == st:
            return st if tok.is_content else None
    return st


def extract_bes(sentence: Sentence, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[BasicElement]:
    """One triple BE per dependency with a content-word head, then one
    single-item BE per distinct content head."""
    triples, heads = [], []
    for t in sentence.dep_triples or ():
        head = _content_head(t.head, sentence, stopwords)
        if head is None:
            continue
        triples.append(BasicElement(head, stem(t.modifier), t.relation))
        if head not in heads:
            heads.append(head)
    return triples + [BasicElement(h) for h in heads]


def log_likelihood_ratio(k11: int, k12: int, k21: int, k22: int) -> float:
    """Dunning's G^2 for a 2x2 contingency table (rows: head, columns: modifier)."""
    n = k11 + k12 + k21 + k22
    if n == 0:
        return 0.0
    rows = (k11 + k12, k21 + k22)
    cols = (k11 + k21, k12 + k22)
    g2 = 0.0
    for obs, r, c in ((k11, 0, 0), (k12, 0, 1), (k21, 1, 0), (k22, 1, 1)):
        if obs:
            g2 += obs * math.log(obs * n / (rows[r] * cols[c]))
    return max(0.0, 2.0 * g2)


def rank_bes(cluster_bes: Iterable[BasicElement]) -> list[BasicElement]:
    """Score every BE of the pooled multiset and sort by descending score
    (ties lexicographic). Pairs get G^2 of head/modifier co-occurrence;
    single items get their head's share of all BE heads."""
    pool = list(cluster_bes)
    pairs = [be for be in pool if not be.is_single]
    n_pairs = len(pairs)
    pair_counts = Counter((be.head, be.modifier) for be in pairs)
    head_counts = Counter(be.head for be in pairs)
    mod_counts = Counter(be.modifier for be in pairs)
    all_heads = Counter(be.head for be in pool)
    scored = []
    for be in pool:
        if be.is_single:
            score = all_heads[be.head] / len(pool)
        else:
            k11 = pair_counts[(be.head, be.modifier)]
            k12 = head_counts[be.head] - k11
            k21 = mod_counts[be.modifier] - k11
            k22 = n_pairs - k11 - k12 - k21
            score = log_likelihood_ratio(k11, k12, k21, k22)
        scored.append(replace(be, lr_score=score))
    scored.sort(key=_sort_key)
    return scored


def score_table(ranked: Iterable[BasicElement]) -> dict[BEKey, float]:
    return {be.key: be.lr_score for be in ranked}


def sentence_be_score(sentence_bes: Iterable[BasicElement], ranked: Sequence[BasicElement] | dict,
                      qrw: Iterable[str]) -> float:
    """Sum of query-related BE scores over the sentence's distinct BE count."""
    table = ranked if isinstance(ranked, dict) else score_table(ranked)
    keys = {be.key: be for be in sentence_bes}
    if not keys:
        return 0.0
    qrw = set(qrw)
    total = sum(table.get(k, 0.0) for k, be in keys.items() if qrw.intersection(be.words()))
    return total / len(keys)


def overlap_ratio(candidate: Iterable[BEKey], summary: Iterable[BEKey]) -> float:
    cand = set(candidate)
    if not cand:
        return 0.0
    return len(cand & set(summary)) / len(cand)


def be_overlap_ratio(candidate: Sentence, summary_so_far: Sequence[Sentence],
                     stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> float:
    """Share of the candidate's BEs already present in the summary."""
    summary_keys = {be.key for s in summary_so_far for be in extract_bes(s, stopwords)}
    return overlap_ratio((be.key for be in extract_bes(candidate, stopwords)), summary_keys)


def write_be_dump(path: str | Path, ranked: Iterable[BasicElement]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        seen = set()
        for be in ranked:
            if be.key in seen:
                continue
            seen.add(be.key)
            fh.write(f"{be.head}\t{be.modifier or ''}\t{be.relation or ''}\t{be.lr_score!r}\n")
