import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfsum.rouge import (
    RougeConfig, all_metrics, bootstrap_ci, evaluate, f_measure, metric_names, metric_score, preprocess,
    read_summary_dirs, rouge_l, rouge_n, rouge_su, rouge_w, su_counts, summary_rouge,
)

VOCAB = ["euro", "bank", "rate", "trade", "growth", "market", "policy", "crisis", "price", "fund"]
TEXTS = st.lists(st.sampled_from(VOCAB), min_size=1, max_size=30).map(" ".join)


def long_text(seed, n=300):
    rng = np.random.default_rng(seed)
    return " ".join(rng.choice(VOCAB, size=n))


class TestPreprocess:
    def test_lowercase_stem_keep_stopwords(self):
        assert preprocess("The Banks, rated!") == ["the", "bank", "rate"]

    def test_truncation(self):
        words = [f"w{i}" for i in range(260)]
        assert len(preprocess(" ".join(words))) == 250

    def test_stopword_removal_optional(self):
        cfg = RougeConfig(keep_stopwords=False, stopwords=frozenset({"the"}))
        assert preprocess("the bank", cfg) == ["bank"]


class TestNgram:
    def test_two_of_three(self):
        s = rouge_n("the cat sat", ["the cat slept"], 1)
        assert s.recall == pytest.approx(2 / 3) and s.precision == pytest.approx(2 / 3)

    def test_identical_and_disjoint(self):
        text = "the euro rose against the dollar"
        for score in all_metrics(text, [text]).values():
            assert score.recall == pytest.approx(1.0) and score.precision == pytest.approx(1.0)
            assert score.f_score == pytest.approx(1.0)
        for score in all_metrics("apples oranges pears", ["euro dollar yen"]).values():
            assert score.f_score == 0.0

    def test_n_longer_than_candidate(self):
        s = rouge_n("euro", ["euro bank rate"], 2)
        assert s.recall == 0 and s.precision == 0

    def test_mean_over_references(self):
        s = rouge_n("a b", ["a b", "c d"], 1)
        assert s.recall == pytest.approx(0.5)

    def test_empty_references(self):
        with pytest.raises(ValueError):
            rouge_n("a", [], 1)

    def test_f_measure_harmonic(self):
        assert f_measure(0.5, 1.0) == pytest.approx(2 / 3)
        assert f_measure(0.0, 1.0) == 0.0


class TestLcsAndSkip:
    def test_reversal_recall(self):
        words = ["euro", "bank", "rate", "trade", "growth"]
        s = rouge_l(" ".join(reversed(words)), [" ".join(words)])
        assert s.recall == pytest.approx(1 / 5)

    def test_skip_unigram_pool(self):
        c = preprocess("John shot the thief")
        r = preprocess("John shoot the thief")
        cfg = RougeConfig(include_unigrams_in_su=False)
        assert su_counts(c, r, cfg)[0] == 3
        assert su_counts(c, r)[0] == 3 + 3

    def test_weighted_prefers_runs(self):
        ref = "a b c d e f g"
        assert rouge_w("a b c d h i k", [ref]).f_score > rouge_w("a h b k c i d", [ref]).f_score

    @settings(max_examples=200, deadline=None)
    @given(TEXTS, TEXTS)
    def test_lcs_bounded_by_unigram(self, cand, ref):
        l, u = rouge_l(cand, [ref]), rouge_n(cand, [ref], 1)
        assert l.recall <= u.recall + 1e-12
        assert l.precision <= u.precision + 1e-12
        assert l.f_score <= u.f_score + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(TEXTS, TEXTS)
    def test_scores_in_range(self, cand, ref):
        for score in all_metrics(cand, [ref]).values():
            for v in (score.recall, score.precision, score.f_score):
                assert 0.0 <= v <= 1.0 + 1e-12

    def test_metric_score_matches_all(self):
        cand, refs = long_text(1, 80), [long_text(2, 90), long_text(3, 70)]
        every = all_metrics(cand, refs)
        for name in metric_names():
            assert metric_score(cand, refs, name) == every[name]
        with pytest.raises(ValueError):
            metric_score(cand, refs, "BLEU")


class TestTruncation:
    @pytest.mark.parametrize("position", [250, 251, 299])
    def test_words_past_limit_inert(self, position):
        cand, ref = long_text(0), long_text(1)
        words = cand.split()
        words[position] = "zzzmutated"
        assert all_metrics(" ".join(words), [ref]) == all_metrics(cand, [ref])
        ref_words = ref.split()
        ref_words[position] = "zzzmutated"
        assert all_metrics(cand, [" ".join(ref_words)]) == all_metrics(cand, [ref])

    def test_word_250_matters(self):
        cand, ref = long_text(0), long_text(1)
        words = cand.split()
        words[249] = "zzzmutated"
        assert all_metrics(" ".join(words), [ref]) != all_metrics(cand, [ref])


class TestBootstrap:
    def test_deterministic(self):
        scores = np.random.default_rng(0).random(20)
        assert bootstrap_ci(scores, seed=7) == bootstrap_ci(scores, seed=7)

    def test_constant(self):
        assert bootstrap_ci([0.3] * 10)[:2] == pytest.approx((0.3, 0.3))

    def test_binary_strictly_inside(self):
        lo, hi, deg = bootstrap_ci([0, 1] * 25)
        assert 0 < lo < 0.5 < hi < 1 and not deg

    def test_single_topic_degenerate(self):
        assert bootstrap_ci([0.4]) == (0.4, 0.4, True)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=2, max_size=15), st.integers(0, 1000))
    def test_brackets_point(self, scores, seed):
        lo, hi, _ = bootstrap_ci(scores, samples=200, seed=seed)
        assert lo <= float(np.mean(scores)) <= hi


class TestEvaluate:
    def test_report(self, tmp_path):
        cands = {"T1": "the euro rose", "T2": "bank rates fell"}
        refs = {"T1": ["the euro rose sharply"], "T2": ["rates fell", "the bank cut rates"]}
        report = evaluate(cands, refs)
        assert set(report.metrics) == set(metric_names())
        r1 = report.metrics["ROUGE-1"]
        assert r1.f_score_ci[0] <= r1.f_score <= r1.f_score_ci[1]
        assert not report.degenerate_ci
        data = json.loads(report.to_json())
        assert data["per_topic"]["T1"]["ROUGE-1"]["recall"] == pytest.approx(0.75)

    def test_single_topic_flagged(self):
        assert evaluate({"T": "a b"}, {"T": ["a b"]}).degenerate_ci

    def test_no_overlapping_topics(self):
        with pytest.raises(ValueError):
            evaluate({"A": "x"}, {"B": ["x"]})

    def test_read_dirs(self, tmp_path):
        (tmp_path / "c").mkdir()
        (tmp_path / "c" / "T1.txt").write_text("euro")
        (tmp_path / "r" / "T1").mkdir(parents=True)
        (tmp_path / "r" / "T1" / "A.txt").write_text("euro bank")
        cands, refs = read_summary_dirs(tmp_path / "c", tmp_path / "r")
        assert cands == {"T1": "euro"} and refs == {"T1": ["euro bank"]}

    def test_summary_feedback(self):
        value = summary_rouge(["euro bank", "rate"], [["euro bank"], ["trade"]], "ROUGE-1")
        assert value == pytest.approx(0.5)
        assert rouge_su("euro bank", ["euro bank"]).f_score == pytest.approx(1.0)
