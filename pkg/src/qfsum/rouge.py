"""Summary-level ROUGE (N, L, W, SU) with multi-reference averaging and
percentile bootstrap confidence intervals."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import stem
from .lexsim import lcs_length, ngrams, skip_bigrams, weighted_lcs

log = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class RougeConfig:
    max_n: int = 4
    wlcs_weight: float = 1.2
    length_limit_words: int = 250
    skip_gap: int | None = None
    include_unigrams_in_su: bool = True
    stemming: bool = True
    keep_stopwords: bool = True
    bootstrap_samples: int = 1000
    confidence: float = 0.95
    alpha: float = 0.5
    seed: int = 0
    stopwords: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def from_json(cls, path: str | Path) -> "RougeConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__ and k != "stopwords"}
        return cls(**known)


@dataclass(frozen=True)
class Score:
    recall: float
    precision: float
    f_score: float


def preprocess(text: str, cfg: RougeConfig = RougeConfig()) -> list[str]:
    """Truncate to the word limit, lowercase, keep alphanumeric runs, stem."""
    words = text.split()
    if cfg.length_limit_words:
        words = words[:cfg.length_limit_words]
    tokens = _WORD_RE.findall(" ".join(words).lower())
    if not cfg.keep_stopwords:
        tokens = [t for t in tokens if t not in cfg.stopwords]
    if cfg.stemming:
        tokens = [stem(t) for t in tokens]
    return tokens


def f_measure(recall: float, precision: float, alpha: float = 0.5) -> float:
    if recall <= 0 or precision <= 0:
        return 0.0
    return 1.0 / (alpha / precision + (1 - alpha) / recall)


def _score(hits: float, ref_total: float, cand_total: float, alpha: float) -> Score:
    r = hits / ref_total if ref_total else 0.0
    p = hits / cand_total if cand_total else 0.0
    return Score(r, p, f_measure(r, p, alpha))


def _average(scores: Sequence[Score]) -> Score:
    n = len(scores)
    return Score(sum(s.recall for s in scores) / n, sum(s.precision for s in scores) / n,
                 sum(s.f_score for s in scores) / n)


def _prepare(candidate: str, references: Sequence[str], cfg: RougeConfig) -> tuple[list[str], list[list[str]]]:
    if not references:
        raise ValueError("at least one reference summary is required")
    return preprocess(candidate, cfg), [preprocess(r, cfg) for r in references]


def _ngram_pair(c: list[str], r: list[str], n: int, alpha: float) -> Score:
    cg, rg = ngrams(c, n), ngrams(r, n)
    return _score(sum((cg & rg).values()), sum(rg.values()), sum(cg.values()), alpha)


def rouge_n(candidate: str, references: Sequence[str], n: int = 1, cfg: RougeConfig = RougeConfig()) -> Score:
    c, refs = _prepare(candidate, references, cfg)
    return _average([_ngram_pair(c, r, n, cfg.alpha) for r in refs])


def _lcs_pair(c: list[str], r: list[str], alpha: float) -> Score:
    return _score(lcs_length(c, r), len(r), len(c), alpha)


def rouge_l(candidate: str, references: Sequence[str], cfg: RougeConfig = RougeConfig()) -> Score:
    c, refs = _prepare(candidate, references, cfg)
    return _average([_lcs_pair(c, r, cfg.alpha) for r in refs])


def _wlcs_pair(c: list[str], r: list[str], weight: float, alpha: float) -> Score:
    if not c or not r:
        return Score(0.0, 0.0, 0.0)
    w = weighted_lcs(c, r, weight)
    inv = 1.0 / weight
    rec = (w / len(r) ** weight) ** inv
    prec = (w / len(c) ** weight) ** inv
    return Score(rec, prec, f_measure(rec, prec, alpha))


def rouge_w(candidate: str, references: Sequence[str], cfg: RougeConfig = RougeConfig()) -> Score:
    c, refs = _prepare(candidate, references, cfg)
    return _average([_wlcs_pair(c, r, cfg.wlcs_weight, cfg.alpha) for r in refs])


def _su_units(tokens: list[str], cfg: RougeConfig):
    units = skip_bigrams(tokens, cfg.skip_gap)
    if cfg.include_unigrams_in_su:
        units = units + ngrams(tokens, 1)
    return units


def su_counts(c: list[str], r: list[str], cfg: RougeConfig = RougeConfig()) -> tuple[int, int, int]:
    """(matches, reference units, candidate units) of the pooled skip-bigram/unigram bag."""
    cu, ru = _su_units(c, cfg), _su_units(r, cfg)
    return sum((cu & ru).values()), sum(ru.values()), sum(cu.values())


def _su_pair(c: list[str], r: list[str], cfg: RougeConfig) -> Score:
    hits, rt, ct = su_counts(c, r, cfg)
    return _score(hits, rt, ct, cfg.alpha)


def rouge_su(candidate: str, references: Sequence[str], cfg: RougeConfig = RougeConfig()) -> Score:
    c, refs = _prepare(candidate, references, cfg)
    return _average([_su_pair(c, r, cfg) for r in refs])


def metric_names(cfg: RougeConfig = RougeConfig()) -> tuple[str, ...]:
    return tuple(f"ROUGE-{n}" for n in range(1, cfg.max_n + 1)) + ("ROUGE-L", "ROUGE-W", "ROUGE-SU")


def all_metrics(candidate: str, references: Sequence[str], cfg: RougeConfig = RougeConfig()) -> dict[str, Score]:
    c, refs = _prepare(candidate, references, cfg)
    out = {f"ROUGE-{n}": _average([_ngram_pair(c, r, n, cfg.alpha) for r in refs])
           for n in range(1, cfg.max_n + 1)}
    out["ROUGE-L"] = _average([_lcs_pair(c, r, cfg.alpha) for r in refs])
    out["ROUGE-W"] = _average([_wlcs_pair(c, r, cfg.wlcs_weight, cfg.alpha) for r in refs])
    out["ROUGE-SU"] = _average([_su_pair(c, r, cfg) for r in refs])
    return out


def metric_score(candidate: str, references: Sequence[str], metric: str,
                 cfg: RougeConfig = RougeConfig()) -> Score:
    """One named metric ("ROUGE-2", "ROUGE-L", ...) without computing the others."""
    c, refs = _prepare(candidate, references, cfg)
    name = metric.upper()
    if name == "ROUGE-L":
        pair = lambda r: _lcs_pair(c, r, cfg.alpha)
    elif name == "ROUGE-W":
        pair = lambda r: _wlcs_pair(c, r, cfg.wlcs_weight, cfg.alpha)
    elif name == "ROUGE-SU":
        pair = lambda r: _su_pair(c, r, cfg)
    elif name.startswith("ROUGE-") and name[6:].isdigit():
        n = int(name[6:])
        pair = lambda r: _ngram_pair(c, r, n, cfg.alpha)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return _average([pair(r) for r in refs])


def bootstrap_ci(scores: Sequence[float], samples: int = 1000, confidence: float = 0.95,
                 seed: int = 0) -> tuple[float, float, bool]:
    """Percentile interval of the mean over topics resampled with replacement.

    Returns (lower, upper, degenerate). The interval is widened when needed
    so it always contains the point estimate.
    """
    x = np.asarray(scores, dtype=float)
    if x.size == 0:
        raise ValueError("no topic scores")
    point = float(x.mean())
    if x.size < 2:
        log.warning("single topic: bootstrap interval is degenerate")
        return point, point, True
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(samples, x.size))
    means = x[idx].mean(axis=1)
    tail = (1 - confidence) / 2
    lo, hi = np.quantile(means, [tail, 1 - tail])
    return min(float(lo), point), max(float(hi), point), False


@dataclass
class MetricReport:
    recall: float
    precision: float
    f_score: float
    recall_ci: tuple[float, float]
    precision_ci: tuple[float, float]
    f_score_ci: tuple[float, float]


@dataclass
class RougeReport:
    metrics: dict[str, MetricReport]
    per_topic: dict[str, dict[str, Score]]
    degenerate_ci: bool = False

    def to_json(self) -> str:
        return json.dumps({
            "metrics": {k: asdict(v) for k, v in self.metrics.items()},
            "per_topic": {t: {m: asdict(s) for m, s in ms.items()} for t, ms in self.per_topic.items()},
            "degenerate_ci": self.degenerate_ci,
        }, indent=2, sort_keys=True)


def evaluate(candidates: dict[str, str], references: dict[str, Sequence[str]],
             cfg: RougeConfig = RougeConfig()) -> RougeReport:
    """Score every topic that has both a candidate and references, then
    aggregate with bootstrap intervals."""
    topics = sorted(set(candidates) & set(references))
    if not topics:
        raise ValueError("no topic has both a candidate and references")
    per_topic = {t: all_metrics(candidates[t], references[t], cfg) for t in topics}
    metrics = {}
    degenerate = False
    for name in metric_names(cfg):
        vals = {}
        for part in ("recall", "precision", "f_score"):
            series = [getattr(per_topic[t][name], part) for t in topics]
            lo, hi, deg = bootstrap_ci(series, cfg.bootstrap_samples, cfg.confidence, cfg.seed)
            degenerate |= deg
            vals[part] = float(np.mean(series))
            vals[part + "_ci"] = (lo, hi)
        metrics[name] = MetricReport(**vals)
    return RougeReport(metrics, per_topic, degenerate)


def read_summary_dirs(candidates_dir: str | Path, references_dir: str | Path) -> tuple[dict[str, str], dict[str, list[str]]]:
    """Candidates as ``<topic>.txt``; references as ``<topic>/<ref-id>.txt``."""
    cands = {p.stem: p.read_text(encoding="utf-8") for p in sorted(Path(candidates_dir).glob("*.txt"))}
    refs: dict[str, list[str]] = {}
    for topic_dir in sorted(p for p in Path(references_dir).iterdir() if p.is_dir()):
        texts = [p.read_text(encoding="utf-8") for p in sorted(topic_dir.glob("*.txt"))]
        if texts:
            refs[topic_dir.name] = texts
    return cands, refs


def summary_rouge(candidate_texts: Iterable[str], reference_sets: Iterable[Sequence[str]],
                  metric: str = "ROUGE-2", cfg: RougeConfig = RougeConfig()) -> float:
    """Mean F-score of one metric over paired topics; used as tuning feedback."""
    vals = [metric_score(c, refs, metric, cfg).f_score for c, refs in zip(candidate_texts, reference_sets)]
    return float(np.mean(vals)) if vals else 0.0
