"""Document clusters, tokenization, stemming and lexical resources.

A cluster is described by a JSON manifest::

    {"topic_id": "D0701",
     "query": ["Describe steps taken ...", "Include predictions ..."],
     "query_parse_file": "query.parse",        # optional, aligned with query
     "query_dep_file": "query.dep",            # optional
     "query_srl_file": "query.srl",            # optional
     "documents": [{"id": "APW1", "date": "1998-05-02", "text_file": "APW1.txt",
                    "parse_file": "APW1.parse", "dep_file": "APW1.dep",
                    "srl_file": "APW1.srl"}]}

Paths are resolved relative to the manifest. Text files hold one sentence
per line; annotation files are line-aligned with them.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from nltk.stem.porter import PorterStemmer

from .trees import ParseTree, parse_bracketed

log = logging.getLogger(__name__)

TOKEN_RE = re.compile(r"\w+(?:[-'’.]\w+)*")
CONTENT_TAG_PREFIXES = ("NN", "VB", "JJ", "RB")
_MULTIWORD_SPLIT = re.compile(r"[_\s]+")
QUERY_DOC_ID = "__query__"

_porter = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


class DegenerateSentence(ValueError):
    """Raised when a line has no tokens left after tokenization."""


class AnnotationError(ValueError):
    """Raised for malformed or misaligned annotation files."""


@lru_cache(maxsize=None)
def stem(word: str) -> str:
    """Porter stem, iterated to a fixed point so that stemming is idempotent."""
    current = word.lower()
    for _ in range(10):
        nxt = _porter.stem(current)
        if not nxt or nxt == current:
            break
        current = nxt
    return current


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a one-word-per-line stopword file; the bundled list by default."""
    if path is None:
        text = resources.files("qfsum").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


DEFAULT_STOPWORDS = load_stopwords()


def pos_class(tag: str | None) -> str | None:
    """Map a Penn tag or a lexicon POS code onto one of n/v/a/r."""
    if not tag:
        return None
    t = tag.upper()
    if t.startswith("NN") or t in ("N", "NOUN"):
        return "n"
    if t.startswith("VB") or t in ("V", "VERB"):
        return "v"
    if t.startswith("JJ") or t in ("A", "S", "ADJ", "ADJECTIVE"):
        return "a"
    if t.startswith("RB") or t in ("R", "ADV", "ADVERB"):
        return "r"
    return None


@dataclass(frozen=True)
class Token:
    surface: str
    stem: str
    is_content: bool
    pos: str | None = None


@dataclass(frozen=True)
class DepTriple:
    head: str
    modifier: str
    relation: str

    def __post_init__(self):
        if not (self.head and self.modifier and self.relation):
            raise AnnotationError(f"dependency triple has an empty field: {self}")


@dataclass(frozen=True)
class RoleFrame:
    """One predicate-argument structure; spans are inclusive token indices."""

    predicate: tuple[int, int]
    args: tuple[tuple[str, tuple[int, int]], ...] = ()


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    ordinal: int
    text: str
    tokens: tuple[Token, ...]
    parse_tree: ParseTree | None = None
    dep_triples: tuple[DepTriple, ...] | None = None
    role_frames: tuple[RoleFrame, ...] | None = None

    @property
    def id(self) -> tuple[str, int]:
        return self.doc_id, self.ordinal

    @property
    def stems(self) -> tuple[str, ...]:
        return tuple(t.stem for t in self.tokens)

    @property
    def content_stems(self) -> tuple[str, ...]:
        return tuple(t.stem for t in self.tokens if t.is_content)

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass(frozen=True)
class Document:
    doc_id: str
    date: datetime
    sentences: tuple[Sentence, ...]
    has_parse: bool = False
    has_deps: bool = False
    has_srl: bool = False
    files: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Cluster:
    topic_id: str
    query: tuple[Sentence, ...]
    documents: tuple[Document, ...]
    query_files: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.query:
            raise ValueError(f"cluster {self.topic_id}: query has no sentences")
        if not self.documents:
            raise ValueError(f"cluster {self.topic_id}: no documents")

    @property
    def sentences(self) -> list[Sentence]:
        return [s for d in self.documents for s in d.sentences]

    def by_recency(self) -> list[Document]:
        """Most recent first; equal dates fall back to ascending doc id."""
        by_id = sorted(self.documents, key=lambda d: d.doc_id)
        return sorted(by_id, key=lambda d: d.date, reverse=True)

    def recency_rank(self) -> dict[str, int]:
        return {d.doc_id: i for i, d in enumerate(self.by_recency())}


# --- tokenization -----------------------------------------------------------

def _is_punct_tag(tag: str) -> bool:
    return not any(ch.isalpha() for ch in tag) or tag in ("-LRB-", "-RRB-", "-NONE-", "HYPH", "NFP")


def _align_tags(surfaces: Sequence[str], tree: ParseTree) -> list[str | None]:
    """Give each token the tag of the parse leaf covering its first character.

    Both sides are reduced to a stream of token characters, so differing
    token boundaries (``Europe's`` vs ``Europe 's``) still line up.
    """
    owner: list[str] = []
    for tag, word in tree.preterminals():
        if _is_punct_tag(tag):
            continue
        for piece in TOKEN_RE.findall(word.lower()):
            owner.extend([tag] * len(piece))
    tags: list[str | None] = []
    offset = 0
    for s in surfaces:
        tags.append(owner[offset] if offset < len(owner) else None)
        offset += len(s)
    return tags


def tokenize_and_stem(
    raw_sentence: str,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    *,
    doc_id: str = "",
    ordinal: int = 0,
    parse_tree: ParseTree | None = None,
    dep_triples: Sequence[DepTriple] | None = None,
    role_frames: Sequence[RoleFrame] | None = None,
) -> Sentence:
    """Tokenize on whitespace/punctuation, lowercase, stem, and mark content words.

    Tags come from ``parse_tree`` when given; without one every non-stopword
    is a content word.
    """
    surfaces = TOKEN_RE.findall(raw_sentence.lower())
    if not surfaces:
        raise DegenerateSentence(f"no tokens in {raw_sentence!r}")
    tags = _align_tags(surfaces, parse_tree) if parse_tree is not None else [None] * len(surfaces)
    tokens = []
    for surface, tag in zip(surfaces, tags):
        st = stem(surface) or surface
        content = surface not in stopwords and st not in stopwords
        if content and tag is not None:
            content = tag.upper().startswith(CONTENT_TAG_PREFIXES)
        tokens.append(Token(surface, st, content, tag))
    if role_frames is not None:
        for frame in role_frames:
            for lo, hi in [frame.predicate, *(span for _, span in frame.args)]:
                if not 0 <= lo <= hi < len(tokens):
                    raise AnnotationError(
                        f"{doc_id}:{ordinal}: span {(lo, hi)} outside {len(tokens)} tokens"
                    )
    return Sentence(
        doc_id,
        ordinal,
        raw_sentence.strip(),
        tuple(tokens),
        parse_tree,
        tuple(dep_triples) if dep_triples is not None else None,
        tuple(role_frames) if role_frames is not None else None,
    )


# --- lexicon ----------------------------------------------------------------

@dataclass(frozen=True)
class LexEntry:
    pos: str | None = None
    synonyms: tuple[str, ...] = ()
    hypernyms: tuple[str, ...] = ()
    hyponyms: tuple[str, ...] = ()
    gloss: tuple[str, ...] = ()


EMPTY_ENTRY = LexEntry()


class Lexicon:
    """Word -> first-sense relations. Missing words yield an empty entry."""

    def __init__(self, entries: Iterable[tuple[str, LexEntry]] = ()):
        self._by_word: dict[str, list[LexEntry]] = {}
        self._by_stem: dict[str, list[LexEntry]] = {}
        for word, entry in entries:
            self.add(word, entry)

    def add(self, word: str, entry: LexEntry) -> None:
        key = word.lower()
        self._by_word.setdefault(key, []).append(entry)
        self._by_stem.setdefault(stem(key), []).append(entry)

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_word.values())

    def lookup(self, word: str, pos: str | None = None) -> LexEntry:
        key = word.lower()
        candidates = self._by_word.get(key) or self._by_stem.get(stem(key)) or []
        if not candidates:
            return EMPTY_ENTRY
        wanted = pos_class(pos)
        if wanted is not None:
            for entry in candidates:
                if pos_class(entry.pos) == wanted:
                    return entry
        return candidates[0]

    def entry_for(self, token: Token) -> LexEntry:
        return self.lookup(token.surface, token.pos)

    def is_noun(self, token: Token) -> bool:
        if token.pos is not None:
            return pos_class(token.pos) == "n"
        return pos_class(self.lookup(token.surface).pos) == "n"

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "Lexicon":
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    lex.add(
                        rec["word"],
                        LexEntry(
                            rec.get("pos"),
                            tuple(rec.get("synonyms", ())),
                            tuple(rec.get("hypernyms", ())),
                            tuple(rec.get("hyponyms", ())),
                            tuple(rec.get("gloss", ())),
                        ),
                    )
                except (KeyError, json.JSONDecodeError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad lexicon record") from exc
        return lex


def expand_stems(words: Iterable[str], stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> set[str]:
    """Stem lexicon words, splitting multi-word items and dropping stopwords."""
    out = set()
    for w in words:
        for part in _MULTIWORD_SPLIT.split(w.lower()):
            for piece in TOKEN_RE.findall(part):
                if piece not in stopwords:
                    st = stem(piece)
                    if st and st not in stopwords:
                        out.add(st)
    return out


def phrase_stems(phrase: str) -> tuple[str, ...]:
    """Stem every word of a (possibly multi-word) lexicon item, stopwords kept."""
    return tuple(stem(p) for p in TOKEN_RE.findall(_MULTIWORD_SPLIT.sub(" ", phrase.lower())))


def query_related_words(
    query: Sequence[Sentence],
    lexicon: Lexicon,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> frozenset[str]:
    """Query content words plus first-sense synonyms, and for nouns their
    hypernyms, hyponyms and gloss content words; all stemmed."""
    words: set[str] = set()
    for sentence in query:
        for tok in sentence.tokens:
            if not tok.is_content:
                continue
            words.add(tok.stem)
            entry = lexicon.entry_for(tok)
            words |= expand_stems(entry.synonyms, stopwords)
            if lexicon.is_noun(tok):
                words |= expand_stems(entry.hypernyms, stopwords)
                words |= expand_stems(entry.hyponyms, stopwords)
                words |= expand_stems(entry.gloss, stopwords)
    return frozenset(words)


def build_pool(sentence: Sentence, lexicon: Lexicon) -> list[tuple[str, ...]]:
    """The stem sequence plus one variant per content word that has a synonym,
    with that single word replaced by its first synonym."""
    base = sentence.stems
    pool = [base]
    for i, tok in enumerate(sentence.tokens):
        if not tok.is_content:
            continue
        for syn in lexicon.entry_for(tok).synonyms:
            replacement = phrase_stems(syn)
            if replacement and replacement != (tok.stem,):
                pool.append(base[:i] + replacement + base[i + 1:])
                break
    return pool


# --- annotation files -------------------------------------------------------

def _read_lines(path: Path) -> list[str]:
    return path.read_text(encoding="utf-8").splitlines()


def parse_dep_line(line: str) -> tuple[DepTriple, ...]:
    triples = []
    for chunk in line.split(";;"):
        if not chunk.strip():
            continue
        parts = chunk.strip("\n").split("\t")
        parts = [p.strip() for p in parts]
        if len(parts) != 3:
            raise AnnotationError(f"expected head<TAB>modifier<TAB>relation, got {chunk!r}")
        triples.append(DepTriple(*parts))
    return tuple(triples)


def parse_srl_line(line: str) -> tuple[RoleFrame, ...]:
    if not line.strip():
        return ()
    frames = []
    for rec in json.loads(line):
        pred = tuple(rec["predicate"])
        args = tuple((a["label"], tuple(a["span"])) for a in rec.get("args", ()))
        frames.append(RoleFrame((int(pred[0]), int(pred[1])),
                                tuple((lab, (int(s[0]), int(s[1]))) for lab, s in args)))
    return tuple(frames)


def _aligned(path: Path | None, n: int, what: str) -> list[str] | None:
    if path is None:
        return None
    lines = _read_lines(path)
    if len(lines) < n:
        raise AnnotationError(f"{path}: {what} has {len(lines)} lines, text has {n}")
    return lines


def load_sentences(
    lines: Sequence[str],
    doc_id: str,
    stopwords: frozenset[str],
    parse_path: Path | None = None,
    dep_path: Path | None = None,
    srl_path: Path | None = None,
) -> tuple[Sentence, ...]:
    parses = _aligned(parse_path, len(lines), "parse file")
    deps = _aligned(dep_path, len(lines), "dependency file")
    srls = _aligned(srl_path, len(lines), "SRL file")
    out = []
    for i, text in enumerate(lines):
        if not text.strip():
            continue
        tree = parse_bracketed(parses[i]) if parses is not None and parses[i].strip() else None
        triples = parse_dep_line(deps[i]) if deps is not None else None
        frames = parse_srl_line(srls[i]) if srls is not None else None
        try:
            out.append(tokenize_and_stem(
                text, stopwords, doc_id=doc_id, ordinal=len(out),
                parse_tree=tree, dep_triples=triples, role_frames=frames,
            ))
        except DegenerateSentence:
            log.debug("skipping degenerate line %d of %s", i, doc_id)
    return tuple(out)


def load_cluster(manifest: str | Path, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> Cluster:
    manifest = Path(manifest)
    data = json.loads(manifest.read_text(encoding="utf-8"))
    root = manifest.parent

    def opt(rec: Mapping, key: str) -> Path | None:
        return root / rec[key] if rec.get(key) else None

    query = load_sentences(
        list(data["query"]), QUERY_DOC_ID, stopwords,
        opt(data, "query_parse_file"), opt(data, "query_dep_file"), opt(data, "query_srl_file"),
    )
    query_files = {k: data[k] for k in ("query_parse_file", "query_dep_file", "query_srl_file") if data.get(k)}
    docs = []
    for rec in data["documents"]:
        text_path = root / rec["text_file"]
        sentences = load_sentences(
            _read_lines(text_path), rec["id"], stopwords,
            opt(rec, "parse_file"), opt(rec, "dep_file"), opt(rec, "srl_file"),
        )
        docs.append(Document(
            rec["id"],
            datetime.fromisoformat(rec["date"]),
            sentences,
            has_parse=bool(rec.get("parse_file")),
            has_deps=bool(rec.get("dep_file")),
            has_srl=bool(rec.get("srl_file")),
            files={k: rec[k] for k in ("text_file", "parse_file", "dep_file", "srl_file") if rec.get(k)},
        ))
    return Cluster(data["topic_id"], query, tuple(docs), query_files)
