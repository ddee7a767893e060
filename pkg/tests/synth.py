"""Synthetic annotated clusters with planted query-relevant sentences.

Every sentence is a chain of clauses "the ADJ NOUN VERB the ADJ NOUN in the
NOUN" joined by "and", with a consistent constituency parse, dependency
triples and role frames, so every annotation layer can be produced exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

QUERY_NOUNS = ["currency", "trade", "inflation", "growth", "euro", "economy", "bank", "exports"]
QUERY_ADJS = ["european", "economic", "monetary", "single", "financial", "commercial"]
QUERY_VERBS = ["affected", "boosted", "raised", "reduced", "stabilized", "weakened"]

FILLER_NOUNS = [
    "river", "farmer", "painting", "museum", "storm", "village", "guitar", "novel", "coach",
    "garden", "recipe", "mountain", "harbor", "violin", "festival", "glacier", "poet", "tractor",
    "orchard", "lighthouse", "sculpture", "canyon", "bakery", "choir", "meadow", "falcon",
    "lantern", "island", "quilt", "wagon", "carpet", "pottery", "forest", "bridge", "castle",
]
FILLER_ADJS = [
    "quiet", "ancient", "green", "famous", "rusty", "gentle", "wooden", "colorful", "sleepy",
    "rocky", "fragrant", "hollow", "silver", "curious", "muddy", "bright", "frozen", "tiny",
]
FILLER_VERBS = [
    "visited", "painted", "cooked", "played", "built", "climbed", "repaired", "carried",
    "planted", "sang", "crossed", "decorated", "watched", "polished", "guarded", "sketched",
]


@dataclass(frozen=True)
class Clause:
    adj1: str
    noun1: str
    verb: str
    adj2: str
    noun2: str
    noun3: str

    def words(self) -> list[tuple[str, str]]:
        return [("the", "DT"), (self.adj1, "JJ"), (self.noun1, "NN"), (self.verb, "VBD"),
                ("the", "DT"), (self.adj2, "JJ"), (self.noun2, "NN"), ("in", "IN"),
                ("the", "DT"), (self.noun3, "NN")]

    def tree(self) -> str:
        return (f"(S (NP (DT the) (JJ {self.adj1}) (NN {self.noun1})) (VP (VBD {self.verb}) "
                f"(NP (DT the) (JJ {self.adj2}) (NN {self.noun2})) "
                f"(PP (IN in) (NP (DT the) (NN {self.noun3})))))")

    def deps(self) -> list[tuple[str, str, str]]:
        return [(self.verb, self.noun1, "nsubj"), (self.verb, self.noun2, "dobj"),
                (self.noun1, self.adj1, "amod"), (self.noun2, self.adj2, "amod"),
                (self.verb, self.noun3, "prep_in")]

    def frame(self, offset: int) -> dict:
        return {"predicate": [offset + 3, offset + 3],
                "args": [{"label": "ARG0", "span": [offset, offset + 2]},
                         {"label": "ARG1", "span": [offset + 4, offset + 6]},
                         {"label": "ARGM-LOC", "span": [offset + 7, offset + 9]}]}


@dataclass(frozen=True)
class SynthSentence:
    clauses: tuple[Clause, ...]

    @property
    def text(self) -> str:
        parts = [" ".join(w for w, _ in c.words()) for c in self.clauses]
        return " and ".join(parts) + " ."

    @property
    def parse(self) -> str:
        inner = " (CC and) ".join(c.tree() for c in self.clauses)
        return f"(ROOT (S {inner} (. .)))"

    @property
    def deps(self) -> str:
        return ";;".join("\t".join(t) for c in self.clauses for t in c.deps())

    @property
    def srl(self) -> str:
        frames, offset = [], 0
        for c in self.clauses:
            frames.append(c.frame(offset))
            offset += len(c.words()) + 1
        return json.dumps(frames)


def _clause(rng: np.random.Generator, nouns, adjs, verbs) -> Clause:
    n = rng.choice(nouns, size=3, replace=False)
    a = rng.choice(adjs, size=2, replace=False)
    return Clause(str(a[0]), str(n[0]), str(rng.choice(verbs)), str(a[1]), str(n[1]), str(n[2]))


def planted_sentence(rng: np.random.Generator) -> SynthSentence:
    """Query vocabulary in the subject, object and verb of every clause;
    filler words elsewhere keep the BEs of different plants apart."""
    clauses = []
    for _ in range(3):
        clauses.append(Clause(str(rng.choice(QUERY_ADJS)), str(rng.choice(QUERY_NOUNS)),
                              str(rng.choice(QUERY_VERBS)), str(rng.choice(FILLER_ADJS)),
                              str(rng.choice(QUERY_NOUNS)), str(rng.choice(FILLER_NOUNS))))
    return SynthSentence(tuple(clauses))


def filler_sentence(rng: np.random.Generator) -> SynthSentence:
    return SynthSentence(tuple(_clause(rng, FILLER_NOUNS, FILLER_ADJS, FILLER_VERBS) for _ in range(3)))


QUERY = SynthSentence((
    Clause("european", "currency", "affected", "economic", "trade", "economy"),
    Clause("monetary", "bank", "raised", "financial", "inflation", "euro"),
))

DATES = ("2005-01-03", "2005-02-10", "2005-03-15")


@dataclass
class SynthCluster:
    manifest: Path
    planted: set[str]
    most_recent: str
    texts: dict[str, list[str]]


def write_cluster(root: Path, seed: int = 0, topic_id: str = "T01", n_docs: int = 3,
                  per_doc: int = 10, n_planted: int = 5, annotate: bool = True) -> SynthCluster:
    """Write a cluster manifest plus text/parse/dep/srl files under ``root``.

    Plants go to random positions other than a document's first sentence so
    the recency lead and the query-focused summary differ.
    """
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    slots = [(d, i) for d in range(n_docs) for i in range(1, per_doc)]
    chosen = {slots[j] for j in rng.choice(len(slots), size=n_planted, replace=False)}
    planted: set[str] = set()
    docs, texts = [], {}
    for d in range(n_docs):
        doc_id = f"{topic_id}_D{d}"
        sentences = []
        for i in range(per_doc):
            s = planted_sentence(rng) if (d, i) in chosen else filler_sentence(rng)
            if (d, i) in chosen:
                planted.add(s.text)
            sentences.append(s)
        texts[doc_id] = [s.text for s in sentences]
        rec = {"id": doc_id, "date": DATES[d % len(DATES)], "text_file": f"{doc_id}.txt"}
        (root / f"{doc_id}.txt").write_text("\n".join(s.text for s in sentences) + "\n", encoding="utf-8")
        if annotate:
            for key, ext, attr in (("parse_file", "parse", "parse"), ("dep_file", "dep", "deps"),
                                   ("srl_file", "srl", "srl")):
                (root / f"{doc_id}.{ext}").write_text(
                    "\n".join(getattr(s, attr) for s in sentences) + "\n", encoding="utf-8")
                rec[key] = f"{doc_id}.{ext}"
        docs.append(rec)
    manifest = {"topic_id": topic_id, "query": [QUERY.text], "documents": docs}
    if annotate:
        for key, ext, attr in (("query_parse_file", "parse", "parse"), ("query_dep_file", "dep", "deps"),
                               ("query_srl_file", "srl", "srl")):
            (root / f"query.{ext}").write_text(getattr(QUERY, attr) + "\n", encoding="utf-8")
            manifest[key] = f"query.{ext}"
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    most_recent = max(docs, key=lambda r: (r["date"], r["id"]))["id"]
    return SynthCluster(path, planted, most_recent, texts)


def reference_summary(cluster: SynthCluster) -> str:
    """A model summary built from the planted sentences."""
    return "\n".join(sorted(cluster.planted))
