"""Lexical, lexical-semantic and thesaurus-based sentence/query overlap measures.

Sequence measures (n-gram, LCS, WLCS, skip-bigram) operate on stem
sequences and are lifted to pools by taking the maximum over every
(sentence variant, query variant) pair.
"""
from __future__ import annotations

import json
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus import DEFAULT_STOPWORDS, Lexicon, Sentence, expand_stems, stem

Seq = Sequence[str]
Pool = Sequence[Seq]


def pool_max(measure: Callable[[Seq, Seq], float], sentence_pool: Pool, query_pool: Pool) -> float:
    best = 0.0
    for s in sentence_pool:
        for q in query_pool:
            best = max(best, measure(s, q))
    return best


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


# --- n-grams ----------------------------------------------------------------

def ngrams(seq: Seq, n: int) -> Counter:
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


def ngram_overlap(s: Seq, q: Seq, n: int) -> float:
    """Clipped n-gram matches over the sentence's n-gram count."""
    s_grams = ngrams(s, n)
    total = sum(s_grams.values())
    if not total:
        return 0.0
    matches = sum((s_grams & ngrams(q, n)).values())
    return matches / total


def ngram_score(sentence_pool: Pool, query_pool: Pool, n: int) -> float:
    if n < 2:
        raise ValueError("n-gram pool score is defined for n >= 2; use unigram_score for n = 1")
    return pool_max(lambda s, q: ngram_overlap(s, q, n), sentence_pool, query_pool)


def unigram_score(sentence: Sentence, qrw: Iterable[str]) -> float:
    """Share of the sentence's distinct content words found among the query-related words."""
    content = set(sentence.content_stems)
    return _ratio(len(content & set(qrw)), len(content))


# --- LCS / WLCS -------------------------------------------------------------

def lcs_length(a: Seq, b: Seq) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def lcs_fmeasure(s: Seq, q: Seq, alpha: float = 0.5) -> float:
    """(1 - alpha) * LCS/len(q) + alpha * LCS/len(s)."""
    if not s or not q:
        return 0.0
    lcs = lcs_length(s, q)
    return (1 - alpha) * lcs / len(q) + alpha * lcs / len(s)


def weighted_lcs(a: Seq, b: Seq, weight: float = 1.2) -> float:
    """WLCS dynamic program rewarding runs of consecutive matches with f(k) = k**weight."""
    m, n = len(a), len(b)
    c = [[0.0] * (n + 1) for _ in range(m + 1)]
    run = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                k = run[i - 1][j - 1]
                c[i][j] = c[i - 1][j - 1] + (k + 1) ** weight - k ** weight
                run[i][j] = k + 1
            elif c[i - 1][j] > c[i][j - 1]:
                c[i][j] = c[i - 1][j]
            else:
                c[i][j] = c[i][j - 1]
    return c[m][n]


def wlcs_fmeasure(s: Seq, q: Seq, weight: float = 1.2, alpha: float = 0.5) -> float:
    if weight < 1:
        raise ValueError("WLCS weight exponent must be >= 1")
    if not s or not q:
        return 0.0
    w = weighted_lcs(s, q, weight)
    inv = 1.0 / weight
    recall = (w / len(s) ** weight) ** inv
    precision = (w / len(q) ** weight) ** inv
    return (1 - alpha) * precision + alpha * recall


# --- skip-bigrams -----------------------------------------------------------

def skip_bigrams(seq: Seq, d_skip: int | None = None) -> Counter:
    """Ordered word pairs with at most ``d_skip`` words between them (None = any gap)."""
    if d_skip is None:
        return Counter((seq[i], seq[j]) for i, j in combinations(range(len(seq)), 2))
    return Counter(
        (seq[i], seq[j])
        for i in range(len(seq))
        for j in range(i + 1, min(len(seq), i + d_skip + 2))
    )


def skip_bigram_counts(s: Seq, q: Seq, d_skip: int | None = None) -> tuple[int, int, int]:
    """(matches, sentence skip-bigrams, query skip-bigrams)."""
    sb, qb = skip_bigrams(s, d_skip), skip_bigrams(q, d_skip)
    return sum((sb & qb).values()), sum(sb.values()), sum(qb.values())


def skip_bigram_fmeasure(s: Seq, q: Seq, d_skip: int | None = 4, alpha: float = 0.5) -> float:
    matches, total_s, total_q = skip_bigram_counts(s, q, d_skip)
    return (1 - alpha) * _ratio(matches, total_q) + alpha * _ratio(matches, total_s)


# --- head words -------------------------------------------------------------

def head_words(sentence: Sentence, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> frozenset[str]:
    """Distinct stemmed content words found in head position of a dependency triple."""
    if not sentence.dep_triples:
        return frozenset()
    content = set(sentence.content_stems)
    stems_in_sentence = set(sentence.stems)
    heads = set()
    for t in sentence.dep_triples:
        word = t.head.lower()
        st = stem(word)
        if word in stopwords or st in stopwords:
            continue
        if st in stems_in_sentence and st not in content:
            continue
        heads.add(st)
    return frozenset(heads)


def related_words(words: Iterable[str], lexicon: Lexicon) -> set[str]:
    """Synonyms, hypernyms and hyponyms of the given words."""
    out: set[str] = set()
    for w in words:
        e = lexicon.lookup(w)
        out |= expand_stems(e.synonyms) | expand_stems(e.hypernyms) | expand_stems(e.hyponyms)
    return out


def head_scores(sentence_heads: Iterable[str], query_heads: Iterable[str], lexicon: Lexicon) -> tuple[float, float]:
    s_heads, q_heads = set(sentence_heads), set(query_heads)
    if not s_heads:
        return 0.0, 0.0
    exact = len(s_heads & q_heads) / len(s_heads)
    s_rel = related_words(s_heads, lexicon)
    q_rel = related_words(q_heads, lexicon)
    return exact, _ratio(len(s_rel & q_rel), len(s_rel))


# --- lexical-semantic overlap -----------------------------------------------

LEXSEM_KINDS = ("synonym", "hypernym_hyponym", "gloss")


def expansion_set(kind: str, sentence: Sentence, lexicon: Lexicon) -> set[str]:
    out: set[str] = set()
    for tok in sentence.tokens:
        if not tok.is_content:
            continue
        entry = lexicon.entry_for(tok)
        if kind == "synonym":
            out |= expand_stems(entry.synonyms)
        elif not lexicon.is_noun(tok):
            continue
        elif kind == "hypernym_hyponym":
            out |= expand_stems(entry.hypernyms) | expand_stems(entry.hyponyms)
        elif kind == "gloss":
            out |= expand_stems(entry.gloss)
        else:
            raise ValueError(f"unknown lexical-semantic kind {kind!r}")
    return out


def lexsem_overlap(kind: str, sentence: Sentence, qrw: Iterable[str], lexicon: Lexicon) -> float:
    if kind not in LEXSEM_KINDS:
        raise ValueError(f"unknown lexical-semantic kind {kind!r}")
    expansion = expansion_set(kind, sentence, lexicon)
    return _ratio(len(expansion & set(qrw)), len(expansion))


# --- thesaurus similarity ---------------------------------------------------

class Thesaurus:
    """Word -> sense clusters of (similar word, similarity) pairs."""

    def __init__(self, entries: dict[str, list[list[tuple[str, float]]]] | None = None):
        self._by_word: dict[str, list[list[tuple[str, float]]]] = {}
        self._by_stem: dict[str, list[list[tuple[str, float]]]] = {}
        for word, clusters in (entries or {}).items():
            self.add(word, clusters)

    def add(self, word: str, clusters: list[list[tuple[str, float]]]) -> None:
        clusters = [c for c in clusters if c]
        self._by_word[word.lower()] = clusters
        self._by_stem.setdefault(stem(word), clusters)

    def clusters(self, word: str) -> list[list[tuple[str, float]]]:
        key = word.lower()
        return self._by_word.get(key) or self._by_stem.get(stem(key)) or []

    def __len__(self) -> int:
        return len(self._by_word)

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "Thesaurus":
        th = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    th.add(rec["word"], [[(m["w"], float(m.get("score", 0.0))) for m in c] for c in rec["clusters"]])
        return th


def select_cluster(clusters: Sequence[Sequence[tuple[str, float]]], qrw: Iterable[str]) -> int | None:
    """Index of the cluster sharing the most words with ``qrw``; first one on ties."""
    if not clusters:
        return None
    qrw = set(qrw)
    overlaps = [len(expand_stems(w for w, _ in c) & qrw) for c in clusters]
    return overlaps.index(max(overlaps))


def query_clusters(query: Sequence[Sentence], qrw: Iterable[str], thesaurus: Thesaurus) -> frozenset[str]:
    """Union of the selected sense cluster of every query content word."""
    qrw = frozenset(qrw)
    bag: set[str] = set()
    for sentence in query:
        for tok in sentence.tokens:
            if not tok.is_content:
                continue
            clusters = thesaurus.clusters(tok.surface)
            idx = select_cluster(clusters, qrw)
            if idx is not None:
                bag |= expand_stems(w for w, _ in clusters[idx])
    return frozenset(bag)


def thesaurus_similarity(sentence: Sentence, chosen: Iterable[str]) -> float:
    words = set(sentence.content_stems)
    return _ratio(len(words & set(chosen)), len(words))
