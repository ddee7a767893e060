"""Acceptance gate: one test per criterion, each at its stated tolerance and
time limit. A PASS/FAIL line per criterion is printed in the terminal summary."""
import math
import time

import numpy as np

from oracles import (
    count_nodes, dominant_left_eigenvector, enumerated_kernel, random_slot_tree, random_tree,
    scripted_bayes, scripted_lloyd,
)
from qfsum.cli import main
from qfsum.corpus import load_cluster, tokenize_and_stem
from qfsum.kernels import make_slot_tree, node_delta, sstk, tree_kernel
from qfsum.lexrank import power_method, transition_matrix
from qfsum.lexsim import lcs_fmeasure, skip_bigram_counts, skip_bigram_fmeasure, skip_bigrams
from qfsum.rankers import (
    FEATURE_NAMES, SystemVariant, em_fit, kmeans, posteriors, safe_covariance,
)
from qfsum.rouge import RougeConfig, all_metrics, bootstrap_ci, evaluate, rouge_n
from qfsum.summarizer import PipelineConfig, featurize, prepare_training, make_feedback, run_system, tune
from qfsum.trees import ParseTree, node
from synth import reference_summary, write_cluster


def stems(text):
    return tokenize_and_stem(text).stems


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


S1 = "John shot the thief"


class TestAcceptance:
    def test_criterion_01_lcs_toy_values(self):
        with Timer() as t:
            assert lcs_fmeasure(stems(S1), stems("John shoot the thief"), alpha=0.5) == 0.75
            assert lcs_fmeasure(stems(S1), stems("the thief shot John"), alpha=0.5) == 0.5
        assert t.elapsed < 1.0

    def test_criterion_02_skip_bigram_toy_values(self):
        with Timer() as t:
            others = {"John shoot the thief": (3, 0.5), "the thief shoot John": (1, 1 / 6),
                      "the thief shot John": (1, 1 / 6), "the thief John shot": (2, 1 / 3)}
            assert sum(skip_bigrams(stems(S1)).values()) == 6
            for text, (matches, value) in others.items():
                assert sum(skip_bigrams(stems(text)).values()) == 6
                assert skip_bigram_counts(stems(S1), stems(text)) == (matches, 6, 6)
                f = skip_bigram_fmeasure(stems(S1), stems(text), d_skip=None)
                assert math.isclose(f, value, rel_tol=0, abs_tol=1e-15)
        assert t.elapsed < 1.0

    def test_criterion_03_tree_kernel_oracle(self):
        rng = np.random.default_rng(2024)
        with Timer() as t:
            for _ in range(500):
                a, b = random_tree(rng, 12), random_tree(rng, 12)
                assert count_nodes(a) <= 12 and count_nodes(b) <= 12
                k = tree_kernel(a, b)
                assert isinstance(k, int)
                assert k == enumerated_kernel(a, b)
        assert t.elapsed < 30.0

    def test_criterion_04_sstk_contract(self):
        rng = np.random.default_rng(4048)
        with Timer() as t:
            empty = make_slot_tree()
            assert sstk(empty, empty) == 0
            for _ in range(200):
                a, b = random_slot_tree(rng), random_slot_tree(rng)
                assert sstk(a, b) == enumerated_kernel(a, b, sstk=True)
            # same predicate, different argument sets: plain roots have different
            # productions, slot roots share the fixed seven-slot production
            plain1 = ParseTree("ST", (node("ARG0", "all"), node("TARGET", "use"), node("ARG1", "franc"),
                                      node("ARG2", "currency")))
            plain2 = ParseTree("ST", (node("ARG0", "vatican"), node("TARGET", "use"), node("ARG1", "lira")))
            slot1 = make_slot_tree({"ARG0": ("ARG0", "all"), "TARGET": ("TARGET", "use"),
                                    "ARG1": ("ARG1", "franc"), "ARG2": ("ARG2", "currency")})
            slot2 = make_slot_tree({"ARG0": ("ARG0", "vatican"), "TARGET": ("TARGET", "use"),
                                    "ARG1": ("ARG1", "lira")})
            assert node_delta(plain1, plain2) == 0
            assert node_delta(slot1, slot2, sstk=True) > 0
            assert sstk(slot1, slot2) > 0
        assert t.elapsed < 30.0

    def test_criterion_05_lexrank(self):
        rng = np.random.default_rng(5)
        with Timer() as t:
            for _ in range(20):
                n = int(rng.integers(2, 20))
                rel = rng.random(n) + 0.01
                sim = rng.random((n, n))
                sim = (sim + sim.T) / 2
                p, converged, _, _ = power_method(transition_matrix(rel, sim, 1.0), eps=1e-8)
                assert converged
                assert np.abs(p - rel / rel.sum()).max() <= 1e-9
                for d in (0.0, 0.3, 0.7):
                    q = transition_matrix(rel, sim, d)
                    p, converged, _, _ = power_method(q, eps=1e-8)
                    assert converged and np.abs(q.T @ p - p).sum() <= 1e-8
            q = transition_matrix(np.array([0.2, 1.0, 0.5]),
                                  np.array([[1.0, 0.3, 0.0], [0.3, 1.0, 0.6], [0.0, 0.6, 1.0]]), 0.4)
            p, _, _, _ = power_method(q, eps=1e-12)
            assert np.abs(p - dominant_left_eigenvector(q)).max() <= 1e-8
        assert t.elapsed < 5.0

    def test_criterion_06_em(self):
        with Timer() as t:
            for seed in range(200):
                rng = np.random.default_rng(seed)
                x = rng.random((int(rng.integers(10, 40)), 2))
                lls = em_fit(x, 2, seed=seed).log_likelihoods
                assert all(np.isfinite(lls))
                assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))
            for seed in range(50):
                rng = np.random.default_rng(10_000 + seed)
                tt = rng.random(int(rng.integers(6, 30)))
                slope, icpt = rng.normal(size=2)
                x = np.column_stack([tt, slope * tt + icpt])
                res = em_fit(x, 2, seed=seed)
                assert all(np.isfinite(res.log_likelihoods))
                assert np.all(np.isfinite(res.responsibilities))
                for c in res.components:
                    assert np.all(np.isfinite(c.mean)) and np.all(np.isfinite(c.covariance))
        assert t.elapsed < 60.0

    def test_criterion_07_kmeans(self):
        for seed in range(200):
            rng = np.random.default_rng(seed)
            x = rng.random((int(rng.integers(10, 40)), 2))
            k = int(rng.integers(2, 5))
            km = kmeans(x, k, seed=seed)
            assert km.converged
            assert all(b <= a + 1e-12 for a, b in zip(km.inertia, km.inertia[1:]))
            labels, _, wss = scripted_lloyd(x, km.init_indices)
            assert km.labels.tolist() == labels and math.isclose(km.inertia[-1], wss, abs_tol=1e-9)
            covs = [safe_covariance(x[km.labels == j], km.means[j])[0] for j in range(km.k)]
            priors = np.full(km.k, 1.0 / km.k)
            post, _ = posteriors(x, km.means, covs, priors)
            assert np.abs(post.sum(axis=1) - 1).max() <= 1e-12
            oracle = scripted_bayes(x, list(km.means), covs, list(priors))
            assert np.abs(post - oracle).max() <= 1e-9

    def test_criterion_08_local_search(self, tmp_path):
        clusters, refs = [], {}
        for i in range(5):
            synth = write_cluster(tmp_path / f"T{i}", seed=100 + i, topic_id=f"T{i}")
            c = load_cluster(synth.manifest)
            clusters.append(c)
            refs[c.topic_id] = [reference_summary(synth)]
        step, max_climb = 0.01, 1.0
        cfg = PipelineConfig(step=step, max_climb=max_climb)
        result = tune(clusters, refs, cfg)
        assert result.score >= result.initial_score
        feedback = make_feedback(prepare_training(clusters, refs, cfg=cfg), cfg)
        assert feedback(result.weights) == result.score
        accepted = [value for _, _, value in result.trace]
        assert all(b >= a for a, b in zip(accepted, accepted[1:]))
        assert result.steps <= round(18 * max_climb / step)

    def test_criterion_09_rouge(self):
        s = rouge_n("the cat sat", ["the cat slept"], 1)
        assert s.recall == 2 / 3 and s.precision == 2 / 3
        assert all_metrics("a b c", ["a b c"])["ROUGE-L"].f_score == 1.0
        rng = np.random.default_rng(9)
        vocab = ["euro", "bank", "rate", "trade", "growth", "market", "policy", "crisis"]
        cand = list(rng.choice(vocab, 300))
        ref = " ".join(rng.choice(vocab, 300))
        base = all_metrics(" ".join(cand), [ref])
        for replacement in ("zzz", "euro", "bank"):
            mutated = cand.copy()
            mutated[250] = replacement
            assert all_metrics(" ".join(mutated), [ref]) == base
        scores = rng.random(30)
        a, b = bootstrap_ci(scores, seed=3), bootstrap_ci(scores, seed=3)
        assert a == b
        assert a[0] <= scores.mean() <= a[1]
        cands = {f"T{i}": " ".join(rng.choice(vocab, 40)) for i in range(6)}
        refs = {t: [" ".join(rng.choice(vocab, 40))] for t in cands}
        r1 = evaluate(cands, refs, RougeConfig(seed=1))
        r2 = evaluate(cands, refs, RougeConfig(seed=1))
        assert r1.to_json() == r2.to_json()
        for m in r1.metrics.values():
            for part in ("recall", "precision", "f_score"):
                lo, hi = getattr(m, part + "_ci")
                assert lo <= getattr(m, part) <= hi

    def test_criterion_10_planted_end_to_end(self, planted):
        with Timer() as t:
            cluster = load_cluster(planted.manifest)
            assert len(cluster.documents) == 3 and len(cluster.sentences) == 30
            draft = run_system(cluster, PipelineConfig(system="ALL", ranker="weights"))
            base = run_system(cluster, PipelineConfig(system="BASE"))
        assert t.elapsed < 10.0
        assert len(planted.planted & {s.text for s in draft.sentences}) >= 4
        assert draft.word_count <= 250 and len(draft.text.split()) <= 250
        assert all(r <= 0.7 for r in draft.admitted_ratios)
        lead = " ".join(" ".join(planted.texts[planted.most_recent]).split()[:250])
        assert " ".join(base.texts) == lead

    def test_criterion_11_feature_inventory(self, planted):
        fm = featurize(load_cluster(planted.manifest))
        assert fm.raw.shape[1] == 18 and len(FEATURE_NAMES) == 18
        assert FEATURE_NAMES == (
            "ngram1", "ngram2", "ngram3", "ngram4", "lcs", "wlcs", "skip_bigram",
            "head_exact", "head_related", "be_score",
            "synonym", "hypernym_hyponym", "gloss", "dep_sim", "prox_sim",
            "lexrank", "syntactic_tk", "semantic_sstk")
        counts = {name: int(SystemVariant.get(name).mask.sum())
                  for name in ("LEX", "LEXSEM", "SYN", "COS", "SYS1", "SYS2", "ALL")}
        assert counts == {"LEX": 10, "LEXSEM": 5, "SYN": 1, "COS": 1, "SYS1": 16, "SYS2": 17, "ALL": 18}

    def test_criterion_12_determinism(self, tmp_path):
        train = [write_cluster(tmp_path / "data" / f"T{i}", seed=200 + i, topic_id=f"T{i}") for i in range(2)]
        refs = tmp_path / "data" / "refs"
        for i, c in enumerate(train):
            (refs / f"T{i}").mkdir(parents=True)
            (refs / f"T{i}" / "A.txt").write_text(reference_summary(c))
        manifests = [str(c.manifest) for c in train]

        def run(out):
            main(["featurize", "--manifest", manifests[0], "--out", str(out / "features.tsv")])
            main(["tune", "--train-manifests", *manifests, "--references", str(refs),
                  "--max-climb", "0.03", "--seed", "7", "--out", str(out / "weights.json")])
            for ranker in ("weights", "kmeans", "em"):
                main(["summarize", "--manifest", *manifests, "--weights", str(out / "weights.json"),
                      "--ranker", ranker, "--seed", "7", "--out", str(out / ranker)])

        run(tmp_path / "a")
        run(tmp_path / "b")
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        assert len(files) == 2 + 3 * 2
        for rel in files:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel
