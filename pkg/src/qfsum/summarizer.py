"""Pipeline orchestration: featurize a cluster, rank its sentences with one of
the three rankers, filter redundancy by BE overlap and assemble a summary
within the word budget."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Sequence

import numpy as np

from . import be as be_mod
from . import kernels, lexsim
from .corpus import DEFAULT_STOPWORDS, Cluster, Lexicon, Sentence, build_pool, query_related_words
from .lexrank import lexrank_scores
from .rankers import (FEATURE_NAMES, N_FEATURES, SystemVariant, em_fit, em_select_and_rank,
                      kmeans_scores, normalize_features, rank_order, score_sentences, tune_weights)
from .rouge import RougeConfig, metric_score

log = logging.getLogger(__name__)

RANKERS = ("weights", "kmeans", "em")


class MissingAnnotationError(ValueError):
    """A system variant needs an annotation layer the cluster does not provide."""


@dataclass
class Resources:
    lexicon: Lexicon = field(default_factory=Lexicon)
    dep_thesaurus: lexsim.Thesaurus | None = None
    prox_thesaurus: lexsim.Thesaurus | None = None
    stopwords: frozenset[str] = DEFAULT_STOPWORDS


@dataclass
class PipelineConfig:
    system: str = "ALL"
    ranker: str = "weights"
    k: int = 2
    seed: int = 0
    step: float = 0.01
    init_weight: float = 0.5
    max_climb: float = 1.0
    tol: float = 1e-6
    max_iter: int = 200
    em_restarts: int = 0
    d: float = 0.7
    eps: float = 1e-8
    lexrank_max_iter: int = 1000
    redundancy: float = 0.7
    budget: int = 250
    d_skip: int | None = 4
    wlcs_weight: float = 1.2
    feedback_metric: str = "ROUGE-2"

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def updated(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# --- annotation requirements --------------------------------------------------

_FEATURE_NEEDS = {
    "head_exact": "dep", "head_related": "dep", "be_score": "dep",
    "syntactic_tk": "parse", "semantic_sstk": "srl",
}


def required_annotations(variant: SystemVariant | str) -> set[str]:
    v = SystemVariant.get(variant) if isinstance(variant, str) else variant
    return {_FEATURE_NEEDS[f] for f in v.active if f in _FEATURE_NEEDS}


def _has(sentence: Sentence, layer: str) -> bool:
    if layer == "parse":
        return sentence.parse_tree is not None
    if layer == "dep":
        return sentence.dep_triples is not None
    return sentence.role_frames is not None


_FILE_KEYS = {"parse": "parse_file", "dep": "dep_file", "srl": "srl_file"}


def check_annotations(cluster: Cluster, variant: SystemVariant | str) -> None:
    v = SystemVariant.get(variant) if isinstance(variant, str) else variant
    for layer in sorted(required_annotations(v)):
        key = _FILE_KEYS[layer]
        if not any(_has(q, layer) for q in cluster.query):
            raise MissingAnnotationError(
                f"variant {v.name} needs {layer} annotations for the query of topic "
                f"{cluster.topic_id} (manifest key query_{key})")
        for doc in cluster.documents:
            if not all(_has(s, layer) for s in doc.sentences):
                raise MissingAnnotationError(
                    f"variant {v.name} needs {layer} annotations for document {doc.doc_id} "
                    f"(manifest key {key}: {doc.files.get(key, 'missing')})")


# --- featurization --------------------------------------------------------------

@dataclass
class FeatureMatrix:
    sentences: list[Sentence]
    raw: np.ndarray
    unavailable: tuple[str, ...] = ()

    @property
    def ids(self) -> list[str]:
        return [f"{s.doc_id}:{s.ordinal}" for s in self.sentences]

    @property
    def normalized(self) -> np.ndarray:
        return normalize_features(self.raw)


def featurize(cluster: Cluster, resources: Resources | None = None, cfg: PipelineConfig | None = None) -> FeatureMatrix:
    """Raw 18-column feature matrix in canonical order. Columns whose
    annotation layer is absent are zero and listed in ``unavailable``."""
    res = resources or Resources()
    cfg = cfg or PipelineConfig()
    lex, sw = res.lexicon, res.stopwords
    sentences = cluster.sentences
    query = list(cluster.query)
    qrw = query_related_words(query, lex, sw)
    qpool = [seq for q in query for seq in build_pool(q, lex)]

    has_dep = all(s.dep_triples is not None for s in sentences) and any(q.dep_triples is not None for q in query)
    has_parse = all(s.parse_tree is not None for s in sentences) and any(q.parse_tree is not None for q in query)
    has_srl = all(s.role_frames is not None for s in sentences) and any(q.role_frames is not None for q in query)
    unavailable = [f for f, layer in _FEATURE_NEEDS.items()
                   if not {"dep": has_dep, "parse": has_parse, "srl": has_srl}[layer]]

    if has_dep:
        q_heads = set().union(*(lexsim.head_words(q, sw) for q in query))
        sentence_bes = [be_mod.extract_bes(s, sw) for s in sentences]
        table = be_mod.score_table(be_mod.rank_bes(b for bes in sentence_bes for b in bes))
    if has_parse:
        q_trees = [q.parse_tree for q in query if q.parse_tree is not None]
    if has_srl:
        q_sts = [t for q in query for t in kernels.build_semantic_trees(q)]
    dep_bag = lexsim.query_clusters(query, qrw, res.dep_thesaurus) if res.dep_thesaurus else frozenset()
    prox_bag = lexsim.query_clusters(query, qrw, res.prox_thesaurus) if res.prox_thesaurus else frozenset()
    centrality = lexrank_scores(sentences, query, cfg.d, cfg.eps, cfg.lexrank_max_iter).p

    raw = np.zeros((len(sentences), N_FEATURES))
    col = {f: i for i, f in enumerate(FEATURE_NAMES)}
    for i, s in enumerate(sentences):
        spool = build_pool(s, lex)
        row = raw[i]
        row[col["ngram1"]] = lexsim.unigram_score(s, qrw)
        for n in (2, 3, 4):
            row[col[f"ngram{n}"]] = lexsim.ngram_score(spool, qpool, n)
        row[col["lcs"]] = lexsim.pool_max(lexsim.lcs_fmeasure, spool, qpool)
        row[col["wlcs"]] = lexsim.pool_max(lambda a, b: lexsim.wlcs_fmeasure(a, b, cfg.wlcs_weight), spool, qpool)
        row[col["skip_bigram"]] = lexsim.pool_max(
            lambda a, b: lexsim.skip_bigram_fmeasure(a, b, cfg.d_skip), spool, qpool)
        if has_dep:
            exact, related = lexsim.head_scores(lexsim.head_words(s, sw), q_heads, lex)
            row[col["head_exact"]] = exact
            row[col["head_related"]] = related
            row[col["be_score"]] = be_mod.sentence_be_score(sentence_bes[i], table, qrw)
        for kind in lexsim.LEXSEM_KINDS:
            row[col[kind]] = lexsim.lexsem_overlap(kind, s, qrw, lex)
        row[col["dep_sim"]] = lexsim.thesaurus_similarity(s, dep_bag)
        row[col["prox_sim"]] = lexsim.thesaurus_similarity(s, prox_bag)
        row[col["lexrank"]] = centrality[i]
        if has_parse:
            row[col["syntactic_tk"]] = kernels.syntactic_feature(s.parse_tree, q_trees)
        if has_srl:
            row[col["semantic_sstk"]] = kernels.semantic_feature(kernels.build_semantic_trees(s), q_sts)
    return FeatureMatrix(sentences, raw, tuple(unavailable))


# --- summary assembly -------------------------------------------------------------

@dataclass
class SummaryDraft:
    sentences: list[Sentence] = field(default_factory=list)
    texts: list[str] = field(default_factory=list)
    word_count: int = 0
    threshold: float = 0.7
    budget: int = 250
    admitted_ratios: list[float] = field(default_factory=list)
    rejected: list[tuple[tuple[str, int], float]] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n".join(self.texts) + ("\n" if self.texts else "")

    def _append(self, sentence: Sentence) -> bool:
        """Add a sentence, truncating it to the remaining budget. Returns
        False once the budget is exhausted."""
        remaining = self.budget - self.word_count
        if remaining <= 0:
            return False
        words = sentence.text.split()[:remaining]
        self.sentences.append(sentence)
        self.texts.append(" ".join(words))
        self.word_count += len(words)
        return self.word_count < self.budget


def rank_and_filter(ranked: Sequence[Sentence], threshold: float = 0.7, budget: int = 250,
                    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
                    be_keys: Callable[[Sentence], frozenset] | None = None) -> SummaryDraft:
    """Greedy admission in rank order: a sentence enters when its BE overlap
    ratio against the sentences already admitted is at most ``threshold``."""
    draft = SummaryDraft(threshold=threshold, budget=budget)
    if not ranked:
        log.warning("no ranked sentences: empty summary")
        return draft
    keys_of = be_keys or (lambda s: frozenset(b.key for b in be_mod.extract_bes(s, stopwords)))
    summary_keys: set = set()
    for s in ranked:
        if draft.word_count >= budget:
            break
        keys = keys_of(s)
        ratio = be_mod.overlap_ratio(keys, summary_keys)
        if ratio > threshold:
            draft.rejected.append((s.id, ratio))
            continue
        draft.admitted_ratios.append(ratio)
        summary_keys |= keys
        if not draft._append(s):
            break
    return draft


def baseline_summary(cluster: Cluster, budget: int = 250) -> SummaryDraft:
    """Leading sentences of the most recent document, continuing into older ones."""
    if not cluster.documents:
        raise ValueError("empty cluster")
    draft = SummaryDraft(threshold=1.0, budget=budget)
    for doc in cluster.by_recency():
        for s in doc.sentences:
            if not draft._append(s):
                return draft
    return draft


def recency_tiebreak(cluster: Cluster, sentences: Sequence[Sentence]) -> list[tuple[int, int]]:
    rank = cluster.recency_rank()
    return [(rank[s.doc_id], s.ordinal) for s in sentences]


def _cluster_space(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Active feature columns with zero-variance columns removed."""
    sub = x[:, mask]
    keep = sub.std(axis=0) > 0
    if not keep.any():
        return sub[:, :1]
    return sub[:, keep]


def ranked_indices(features: FeatureMatrix, cluster: Cluster, weights: np.ndarray, cfg: PipelineConfig) -> list[int]:
    variant = SystemVariant.get(cfg.system)
    x = features.normalized
    tiebreak = recency_tiebreak(cluster, features.sentences)
    linear = score_sentences(x, weights, variant)
    if cfg.ranker == "weights":
        return rank_order(linear.tolist(), tiebreak)
    space = _cluster_space(x, variant.mask)
    k = min(cfg.k, len(space))
    if cfg.ranker == "kmeans":
        post, _ = kmeans_scores(space, k, cfg.seed)
        return rank_order(post.tolist(), tiebreak)
    if cfg.ranker == "em":
        fit = em_fit(space, k, seed=cfg.seed, tol=cfg.tol, max_iter=cfg.max_iter, restarts=cfg.em_restarts)
        relevant = em_select_and_rank(fit, x, weights, variant.mask, tiebreak=tiebreak)
        chosen = set(relevant)
        rest = [i for i in rank_order(linear.tolist(), tiebreak) if i not in chosen]
        return relevant + rest
    raise ValueError(f"unknown ranker {cfg.ranker!r}; expected one of {RANKERS}")


def run_system(cluster: Cluster, cfg: PipelineConfig | None = None, weights: np.ndarray | None = None,
               resources: Resources | None = None, features: FeatureMatrix | None = None) -> SummaryDraft:
    cfg = cfg or PipelineConfig()
    res = resources or Resources()
    variant = SystemVariant.get(cfg.system)
    if variant.name == "BASE":
        return baseline_summary(cluster, cfg.budget)
    check_annotations(cluster, variant)
    fm = features if features is not None else featurize(cluster, res, cfg)
    w = np.full(N_FEATURES, cfg.init_weight) if weights is None else np.asarray(weights, dtype=float)
    order = ranked_indices(fm, cluster, w, cfg)
    return rank_and_filter([fm.sentences[i] for i in order], cfg.redundancy, cfg.budget, res.stopwords)


# --- tuning -----------------------------------------------------------------------

@dataclass
class TrainingTopic:
    cluster: Cluster
    features: FeatureMatrix
    references: list[str]
    be_keys: dict = field(default_factory=dict)


def prepare_training(clusters: Sequence[Cluster], references: dict[str, list[str]],
                     resources: Resources | None = None, cfg: PipelineConfig | None = None) -> list[TrainingTopic]:
    res = resources or Resources()
    cfg = cfg or PipelineConfig()
    topics = []
    for c in clusters:
        if c.topic_id not in references:
            raise ValueError(f"no reference summaries for topic {c.topic_id}")
        check_annotations(c, cfg.system)
        fm = featurize(c, res, cfg)
        keys = {s.id: frozenset(b.key for b in be_mod.extract_bes(s, res.stopwords)) for s in fm.sentences}
        topics.append(TrainingTopic(c, fm, list(references[c.topic_id]), keys))
    return topics


def make_feedback(topics: Sequence[TrainingTopic], cfg: PipelineConfig,
                  rouge_cfg: RougeConfig = RougeConfig()) -> Callable[[np.ndarray], float]:
    """Mean F-score of ``cfg.feedback_metric`` over training topics for the
    linear ranker at the given weights."""
    wcfg = replace(cfg, ranker="weights")

    def feedback(w: np.ndarray) -> float:
        vals = []
        for t in topics:
            order = ranked_indices(t.features, t.cluster, w, wcfg)
            draft = rank_and_filter([t.features.sentences[i] for i in order], cfg.redundancy, cfg.budget,
                                    be_keys=lambda s, keys=t.be_keys: keys[s.id])
            vals.append(metric_score(draft.text, t.references, cfg.feedback_metric, rouge_cfg).f_score)
        return float(np.mean(vals))

    return feedback


def tune(clusters: Sequence[Cluster], references: dict[str, list[str]], cfg: PipelineConfig | None = None,
         resources: Resources | None = None, rouge_cfg: RougeConfig = RougeConfig()):
    cfg = cfg or PipelineConfig()
    topics = prepare_training(clusters, references, resources, cfg)
    feedback = make_feedback(topics, cfg, rouge_cfg)
    return tune_weights(feedback, step=cfg.step, init=cfg.init_weight,
                        active=SystemVariant.get(cfg.system).mask, max_climb=cfg.max_climb)


__all__ = [
    "FeatureMatrix", "MissingAnnotationError", "PipelineConfig", "Resources", "SummaryDraft",
    "TrainingTopic", "baseline_summary", "check_annotations", "featurize", "make_feedback",
    "prepare_training", "rank_and_filter", "ranked_indices", "required_annotations", "run_system", "tune",
]
