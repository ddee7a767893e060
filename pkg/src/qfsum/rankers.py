"""Sentence rankers over feature vectors: weighted linear scoring with a
coordinate hill-climbing tuner, K-means with Gaussian Bayes posteriors, and an
EM Gaussian mixture seeded by K-means."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)

FEATURE_NAMES: tuple[str, ...] = (
    "ngram1", "ngram2", "ngram3", "ngram4", "lcs", "wlcs", "skip_bigram",
    "head_exact", "head_related", "be_score",
    "synonym", "hypernym_hyponym", "gloss", "dep_sim", "prox_sim",
    "lexrank", "syntactic_tk", "semantic_sstk",
)
N_FEATURES = len(FEATURE_NAMES)

_LEX = FEATURE_NAMES[:10]
_LEXSEM = FEATURE_NAMES[10:15]

VARIANT_FEATURES: dict[str, tuple[str, ...]] = {
    "LEX": _LEX,
    "LEXSEM": _LEXSEM,
    "SYN": ("syntactic_tk",),
    "COS": ("lexrank",),
    "SYS1": tuple(f for f in FEATURE_NAMES if f not in ("syntactic_tk", "semantic_sstk")),
    "SYS2": tuple(f for f in FEATURE_NAMES if f != "semantic_sstk"),
    "ALL": FEATURE_NAMES,
    "BASE": (),
}

GUARD = 1e-9
JITTER = 1e-6


@dataclass(frozen=True)
class SystemVariant:
    name: str
    mask: np.ndarray

    @classmethod
    def get(cls, name: str) -> "SystemVariant":
        key = name.upper()
        if key not in VARIANT_FEATURES:
            raise ValueError(f"unknown system variant {name!r}; expected one of {sorted(VARIANT_FEATURES)}")
        active = set(VARIANT_FEATURES[key])
        return cls(key, np.array([f in active for f in FEATURE_NAMES]))

    @property
    def active(self) -> tuple[str, ...]:
        return tuple(f for f, on in zip(FEATURE_NAMES, self.mask) if on)


def variant_mask(name: str) -> np.ndarray:
    return SystemVariant.get(name).mask


# --- linear scoring -----------------------------------------------------------

def normalize_features(raw: np.ndarray) -> np.ndarray:
    """Divide every column by its maximum over the cluster; all-zero columns stay zero."""
    x = np.asarray(raw, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("need a non-empty (sentences x features) matrix")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError("features must be finite and non-negative")
    col_max = x.max(axis=0)
    safe = np.where(col_max > 0, col_max, 1.0)
    return x / safe


def score_sentences(features: np.ndarray, weights: np.ndarray, mask: np.ndarray | SystemVariant | None = None) -> np.ndarray:
    """x_i . w with inactive features zeroed."""
    x = np.asarray(features, dtype=float)
    w = np.asarray(weights, dtype=float)
    if mask is not None:
        m = mask.mask if isinstance(mask, SystemVariant) else np.asarray(mask, dtype=bool)
        w = np.where(m, w, 0.0)
    return x @ w


def rank_order(scores: Sequence[float], tiebreak: Sequence[tuple] | None = None) -> list[int]:
    """Indices by descending score; ties resolved by ``tiebreak`` keys ascending
    (callers pass (-date ordinal, sentence ordinal) for the recency rule)."""
    idx = range(len(scores))
    if tiebreak is None:
        return sorted(idx, key=lambda i: (-scores[i], i))
    return sorted(idx, key=lambda i: (-scores[i], tiebreak[i], i))


# --- local search -------------------------------------------------------------

@dataclass
class TuningResult:
    weights: np.ndarray
    score: float
    initial_score: float
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    evaluations: int = 0
    steps: int = 0


class NonFiniteFeedback(RuntimeError):
    pass


def tune_weights(feedback: Callable[[np.ndarray], float], *, step: float = 0.01, init: float = 0.5,
                 n_features: int = N_FEATURES, active: np.ndarray | None = None,
                 max_climb: float = 1.0) -> TuningResult:
    """Single pass of coordinate hill climbing: w_i grows by ``step`` while the
    feedback does not decrease; on exit w_i is restored to its best value.

    ``max_climb`` bounds the total increase of one coordinate so a flat
    feedback surface still terminates after ``max_climb / step`` evaluations.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    w = np.full(n_features, float(init))
    coords = range(n_features) if active is None else np.flatnonzero(active)
    max_steps = int(round(max_climb / step))

    def evaluate(vec: np.ndarray) -> float:
        value = float(feedback(vec.copy()))
        if not math.isfinite(value):
            raise NonFiniteFeedback(f"feedback returned {value} at weights {vec.tolist()}")
        return value

    initial = evaluate(w)
    result = TuningResult(w, initial, initial, evaluations=1)
    best = initial
    for i in coords:
        start = w[i]
        rg1, prev, climbed = -math.inf, w[i], 0
        while True:
            # the first evaluation of a coordinate is the current best vector
            if climbed == 0:
                rg2 = best
            else:
                rg2 = evaluate(w)
                result.evaluations += 1
            if rg1 > rg2:
                break
            prev, rg1 = w[i], rg2
            result.trace.append((int(i), float(w[i]), rg2))
            if climbed >= max_steps:
                break
            climbed += 1
            result.steps += 1
            w[i] = start + climbed * step
        w[i] = prev
        best = rg1
    result.weights = w
    result.score = best
    return result


# --- Gaussian densities ---------------------------------------------------------

class SingularCovarianceError(np.linalg.LinAlgError):
    pass


def _cholesky_guarded(sigma: np.ndarray, name: str = "component") -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError(f"{name}: covariance is not positive definite") from exc
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    if not half_logdet > math.log(GUARD):
        raise SingularCovarianceError(f"{name}: sqrt(det(covariance)) = {math.exp(half_logdet):.3g} <= {GUARD}")
    return chol


def passes_guard(sigma: np.ndarray) -> bool:
    try:
        _cholesky_guarded(sigma)
    except SingularCovarianceError:
        return False
    return True


def gaussian_logpdf(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray, name: str = "component") -> np.ndarray:
    """Log multivariate normal density for one point or a row-stacked batch."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mu = np.asarray(mu, dtype=float)
    chol = _cholesky_guarded(np.atleast_2d(sigma), name)
    d = mu.size
    z = np.linalg.solve(chol, (x - mu).T)
    maha = np.sum(z * z, axis=0)
    half_logdet = np.sum(np.log(np.diag(chol)))
    return -0.5 * maha - half_logdet - 0.5 * d * math.log(2 * math.pi)


def gaussian_pdf(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray, name: str = "component"):
    out = np.exp(gaussian_logpdf(x, mu, sigma, name))
    return float(out[0]) if np.ndim(x) <= 1 and np.asarray(mu).size == np.size(x) else out


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def unbiased_covariance(points: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """Sum of outer products of deviations from ``mean`` divided by N - 1."""
    dev = np.asarray(points, dtype=float) - mean
    return dev.T @ dev / (len(dev) - 1)


def safe_covariance(points: np.ndarray, mean: np.ndarray, name: str = "component") -> tuple[np.ndarray, str]:
    """Covariance passing the guard: the unbiased estimate, else with diagonal
    jitter, else the identity. Returns the matrix and which fallback was used."""
    d = np.asarray(mean).size
    if len(points) < 2:
        return np.eye(d), "identity"
    cov = unbiased_covariance(points, mean)
    if passes_guard(cov):
        return cov, "estimate"
    jittered = cov + JITTER * np.eye(d)
    if passes_guard(jittered):
        log.info("%s: covariance regularized with diagonal jitter", name)
        return jittered, "jitter"
    log.warning("%s: covariance singular after jitter, using identity", name)
    return np.eye(d), "identity"


# --- K-means --------------------------------------------------------------------

@dataclass
class KMeansResult:
    labels: np.ndarray
    means: np.ndarray
    init_indices: tuple[int, ...]
    inertia: list[float]
    iterations: int
    converged: bool

    @property
    def k(self) -> int:
        return len(self.means)


def _inertia(x: np.ndarray, means: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((x - means[labels]) ** 2))


def _sq_dists(x: np.ndarray, means: np.ndarray) -> np.ndarray:
    return np.sum((x[:, None, :] - means[None, :, :]) ** 2, axis=2)


def kmeans(points: np.ndarray, k: int = 2, seed: int = 0, max_iter: int = 1000) -> KMeansResult:
    """Lloyd iterations with squared Euclidean distance from K seeded distinct points."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("kmeans needs a non-empty 2-D array")
    if k < 1 or k > len(x):
        raise ValueError(f"K={k} must lie in [1, {len(x)}]")
    distinct = np.unique(x, axis=0)
    if len(distinct) < k:
        log.warning("only %d distinct points; reducing K from %d", len(distinct), k)
        k = len(distinct)
    rng = np.random.default_rng(seed)
    init: list[int] = []
    for i in rng.permutation(len(x)):
        if not any(np.array_equal(x[i], x[j]) for j in init):
            init.append(int(i))
        if len(init) == k:
            break
    means = x[init].copy()
    labels = np.argmin(_sq_dists(x, means), axis=1)
    history = [_inertia(x, means, labels)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(k):
            members = x[labels == j]
            if len(members):
                means[j] = members.mean(axis=0)
            else:
                far = int(np.argmax(np.sum((x - means[labels]) ** 2, axis=1)))
                means[j] = x[far]
                labels[far] = j
        new_labels = np.argmin(_sq_dists(x, means), axis=1)
        history.append(_inertia(x, means, new_labels))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    return KMeansResult(labels, means, tuple(init), history, it, converged)


def relevant_component(means: np.ndarray) -> int:
    """Component whose mean vector has the largest average entry; ties -> lowest index."""
    avg = np.asarray(means, dtype=float).mean(axis=1)
    best = int(np.argmax(avg))
    if np.sum(np.isclose(avg, avg[best], rtol=0, atol=1e-12)) > 1:
        log.info("tie in component mean-of-means; choosing component %d", best)
    return best


def posteriors(x: np.ndarray, means: np.ndarray, covs: Sequence[np.ndarray], priors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bayes posteriors P(q_k | x) and per-point log marginal likelihood."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    logp = np.column_stack([
        gaussian_logpdf(x, means[k], covs[k], name=f"component {k}") + math.log(priors[k])
        for k in range(len(means))
    ])
    log_marg = _logsumexp(logp, axis=1)
    return np.exp(logp - log_marg[:, None]), log_marg


def kmeans_scores(points: np.ndarray, k: int = 2, seed: int = 0,
                  result: KMeansResult | None = None) -> tuple[np.ndarray, KMeansResult]:
    """Posterior of the relevant cluster for every point, with equal priors and
    per-cluster unbiased covariances."""
    x = np.asarray(points, dtype=float)
    km = result if result is not None else kmeans(x, k, seed)
    if km.k == 1:
        return np.ones(len(x)), km
    covs = [safe_covariance(x[km.labels == j], km.means[j], f"cluster {j}")[0] for j in range(km.k)]
    post, _ = posteriors(x, km.means, covs, np.full(km.k, 1.0 / km.k))
    return post[:, relevant_component(km.means)], km


# --- EM ---------------------------------------------------------------------------

@dataclass
class GaussianComponent:
    mean: np.ndarray
    covariance: np.ndarray
    prior: float


@dataclass
class EMResult:
    components: list[GaussianComponent]
    responsibilities: np.ndarray
    log_likelihoods: list[float]
    guard_skips: int
    iterations: int
    converged: bool

    @property
    def log_likelihood(self) -> float:
        return self.log_likelihoods[-1]


class NonFiniteLikelihood(RuntimeError):
    pass


def _em_run(x: np.ndarray, means: np.ndarray, covs: list[np.ndarray], tol: float, max_iter: int) -> EMResult:
    n, _ = x.shape
    k = len(means)
    priors = np.full(k, 1.0 / k)
    means = means.copy()
    resp, log_marg = posteriors(x, means, covs, priors)
    lls = [float(np.sum(log_marg))]
    skips = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nk = resp.sum(axis=0)
        for j in range(k):
            if nk[j] <= 0:
                continue
            means[j] = resp[:, j] @ x / nk[j]
            dev = x - means[j]
            cov = (resp[:, j, None] * dev).T @ dev / nk[j]
            cov = 0.5 * (cov + cov.T)
            if passes_guard(cov):
                covs[j] = cov
            else:
                skips += 1
        priors = nk / n
        resp, log_marg = posteriors(x, means, covs, priors)
        ll = float(np.sum(log_marg))
        if not math.isfinite(ll):
            raise NonFiniteLikelihood(f"log-likelihood became {ll} at iteration {it}")
        prev = lls[-1]
        lls.append(ll)
        if (ll - prev) < tol * abs(prev):
            converged = True
            break
    comps = [GaussianComponent(means[j].copy(), covs[j].copy(), float(priors[j])) for j in range(k)]
    return EMResult(comps, resp, lls, skips, it, converged)


def em_fit(points: np.ndarray, k: int = 2, *, init_means: np.ndarray | None = None, seed: int = 0,
           tol: float = 1e-6, max_iter: int = 200, restarts: int = 0) -> EMResult:
    """Gaussian mixture EM. Means start from K-means (or ``init_means``),
    covariances from the unbiased estimate on that partition, priors 1/K.
    A covariance update that fails the determinant guard is skipped."""
    x = np.asarray(points, dtype=float)
    if k > len(x):
        raise ValueError(f"K={k} exceeds the number of points ({len(x)})")
    if init_means is None:
        km = kmeans(x, k, seed)
        means, labels = km.means, km.labels
    else:
        means = np.asarray(init_means, dtype=float)
        labels = np.argmin(_sq_dists(x, means), axis=1)
    covs = [safe_covariance(x[labels == j], means[j], f"component {j}")[0] for j in range(len(means))]
    best = _em_run(x, means, covs, tol, max_iter)
    if restarts:
        rng = np.random.default_rng(seed)
        for r in range(restarts):
            idx = rng.choice(len(x), size=len(means), replace=False)
            lab = np.argmin(_sq_dists(x, x[idx]), axis=1)
            rc = [safe_covariance(x[lab == j], x[idx][j], f"component {j}")[0] for j in range(len(idx))]
            cand = _em_run(x, x[idx], rc, tol, max_iter)
            if cand.log_likelihood > best.log_likelihood:
                best = cand
    return best


def em_select_and_rank(result: EMResult, features: np.ndarray, weights: np.ndarray,
                       mask: np.ndarray | None = None, threshold: float = 0.5,
                       tiebreak: Sequence[tuple] | None = None) -> list[int]:
    """Indices of sentences with relevant-component posterior above ``threshold``,
    ranked by the linear score."""
    means = np.array([c.mean for c in result.components])
    scores = score_sentences(features, weights, mask)
    if len(means) > 1 and np.allclose(means[0], means[1:]):
        log.warning("EM components are identical; every sentence is treated as relevant")
        keep = list(range(len(scores)))
    else:
        r = relevant_component(means)
        keep = [i for i in range(len(scores)) if result.responsibilities[i, r] > threshold]
    order = rank_order(scores, tiebreak)
    kept = set(keep)
    return [i for i in order if i in kept]


# --- I/O -----------------------------------------------------------------------

def save_weights(path: str | Path, weights: Sequence[float]) -> None:
    w = dict(zip(FEATURE_NAMES, (float(v) for v in weights)))
    Path(path).write_text(json.dumps(w, indent=2) + "\n", encoding="utf-8")


def load_weights(path: str | Path) -> np.ndarray:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = set(data) - set(FEATURE_NAMES)
    if unknown:
        raise ValueError(f"unknown feature names in weights file: {sorted(unknown)}")
    return np.array([float(data.get(f, 0.0)) for f in FEATURE_NAMES])


def write_features_tsv(path: str | Path, ids: Sequence[str], matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sentence_id\t" + "\t".join(FEATURE_NAMES) + "\n")
        for sid, row in zip(ids, np.asarray(matrix, dtype=float)):
            fh.write(sid + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def read_features_tsv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header[1:]) != FEATURE_NAMES:
            raise ValueError("feature TSV header does not match the canonical feature order")
        ids, rows = [], []
        for line in fh:
            if line.strip():
                parts = line.rstrip("\n").split("\t")
                ids.append(parts[0])
                rows.append([float(v) for v in parts[1:]])
    return ids, np.array(rows).reshape(len(rows), N_FEATURES)
