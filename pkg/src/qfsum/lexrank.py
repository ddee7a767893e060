"""Topic-sensitive LexRank: query relevance mixed with IDF-weighted cosine
similarity in a Markov chain whose stationary distribution scores sentences."""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Sentence

log = logging.getLogger(__name__)

Terms = Sequence[str]


def terms_of(x: Sentence | Terms) -> tuple[str, ...]:
    """Content stems of a sentence; plain term sequences pass through."""
    if isinstance(x, Sentence):
        return x.content_stems
    return tuple(x)


@dataclass(frozen=True)
class IdfTable:
    idf: dict[str, float]
    n_sentences: int

    def __getitem__(self, word: str) -> float:
        return self.idf.get(word, 0.0)


@dataclass(frozen=True)
class CentralityVector:
    ids: tuple
    p: np.ndarray
    converged: bool
    iterations: int
    residual: float

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.p.tolist()))


def compute_idf(sentences: Sequence[Sentence | Terms]) -> IdfTable:
    """idf_w = ln((N + 1) / (0.5 + sf_w)) with sf_w the number of sentences containing w."""
    if not sentences:
        raise ValueError("IDF needs at least one sentence")
    sf: Counter = Counter()
    for s in sentences:
        sf.update(set(terms_of(s)))
    n = len(sentences)
    return IdfTable({w: math.log((n + 1) / (0.5 + c)) for w, c in sf.items()}, n)


def relevance(s: Sentence | Terms, q: Sentence | Terms | Sequence[Sentence], idf: IdfTable) -> float:
    """Sum over query words of ln(tf_s + 1) * ln(tf_q + 1) * idf."""
    tf_s = Counter(terms_of(s))
    tf_q = Counter(_query_terms(q))
    return sum(math.log(tf_s[w] + 1) * math.log(c + 1) * idf[w] for w, c in tf_q.items())


def _query_terms(q) -> tuple[str, ...]:
    if isinstance(q, Sentence):
        return q.content_stems
    q = list(q)
    if q and isinstance(q[0], Sentence):
        return tuple(w for s in q for w in s.content_stems)
    return tuple(q)


def cosine_sim(x: Sentence | Terms, y: Sentence | Terms, idf: IdfTable) -> float:
    tx, ty = Counter(terms_of(x)), Counter(terms_of(y))
    num = sum(c * ty[w] * idf[w] ** 2 for w, c in tx.items() if w in ty)
    nx = math.sqrt(sum((c * idf[w]) ** 2 for w, c in tx.items()))
    ny = math.sqrt(sum((c * idf[w]) ** 2 for w, c in ty.items()))
    if nx == 0 or ny == 0:
        return 0.0
    return min(1.0, num / (nx * ny))


def _row_normalize(m: np.ndarray) -> np.ndarray:
    out = m.astype(float).copy()
    sums = out.sum(axis=1)
    dangling = sums <= 0
    out[dangling] = 1.0
    sums[dangling] = out.shape[1]
    return out / sums[:, None]


def transition_matrix(rel: np.ndarray, sim: np.ndarray, d: float) -> np.ndarray:
    """Q = d*A + (1 - d)*B with every row of A the normalized relevance vector
    and B the row-normalized similarity matrix."""
    if not 0.0 <= d <= 1.0:
        raise ValueError("bias d must lie in [0, 1]")
    n = len(rel)
    a = _row_normalize(np.tile(np.asarray(rel, dtype=float), (n, 1)))
    b = _row_normalize(np.asarray(sim, dtype=float))
    return d * a + (1 - d) * b


def power_method(q: np.ndarray, eps: float = 1e-8, max_iter: int = 1000) -> tuple[np.ndarray, bool, int, float]:
    """Iterate p <- Q^T p from the uniform vector until ||Q^T p - p||_1 <= eps."""
    n = q.shape[0]
    p = np.full(n, 1.0 / n)
    qt = q.T
    residual = math.inf
    for it in range(max_iter + 1):
        nxt = qt @ p
        residual = float(np.abs(nxt - p).sum())
        if residual <= eps:
            return p, True, it, residual
        if it == max_iter:
            break
        p = nxt / nxt.sum()
    log.warning("power method stopped after %d iterations (residual %.3g)", max_iter, residual)
    return p, False, max_iter, residual


def similarity_matrix(sentences: Sequence[Sentence | Terms], idf: IdfTable) -> np.ndarray:
    n = len(sentences)
    sim = np.eye(n)
    terms = [terms_of(s) for s in sentences]
    for i in range(n):
        if not any(idf[w] for w in terms[i]):
            sim[i, i] = 0.0
        for j in range(i + 1, n):
            sim[i, j] = sim[j, i] = cosine_sim(terms[i], terms[j], idf)
    return sim


def lexrank_scores(sentences: Sequence[Sentence], query: Sequence[Sentence] | Terms,
                   d: float = 0.7, eps: float = 1e-8, max_iter: int = 1000,
                   matrix_dump: str | Path | None = None) -> CentralityVector:
    idf = compute_idf(sentences)
    rel = np.array([relevance(s, query, idf) for s in sentences])
    sim = similarity_matrix(sentences, idf)
    q = transition_matrix(rel, sim, d)
    if matrix_dump is not None:
        np.savetxt(matrix_dump, q, delimiter="\t", fmt="%.17g")
    p, converged, iters, residual = power_method(q, eps, max_iter)
    ids = tuple(s.id if isinstance(s, Sentence) else i for i, s in enumerate(sentences))
    return CentralityVector(ids, p, converged, iters, residual)
