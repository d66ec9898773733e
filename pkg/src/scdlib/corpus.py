"""Corpus representation: tokenization, vocabulary, influence values, ingestion.

A corpus is a set of documents, each a sequence of sentences over a shared
vocabulary.  Every sentence carries a globally unique window id that is never
reused, even after a sentence has been deleted.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import EmptyDocument, ParseError, UnknownWord

_SENTENCE_SPLIT = re.compile(r"[.!?]+")
_TOKEN = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace. No stemming."""
    return [t.lower() for t in _TOKEN.findall(text)]


def split_sentences(text: str) -> list[list[str]]:
    """Split on terminal punctuation and tokenize each non-empty chunk."""
    out = []
    for chunk in _SENTENCE_SPLIT.split(text):
        tokens = tokenize(chunk)
        if tokens:
            out.append(tokens)
    return out


class Vocabulary:
    """Ordered, append-only list of distinct words with a word -> column index."""

    def __init__(self, words=()):
        self.words: list[str] = []
        self._index: dict[str, int] = {}
        for w in words:
            self.add(w)

    def add(self, word: str) -> int:
        idx = self._index.get(word)
        if idx is None:
            idx = len(self.words)
            self.words.append(word)
            self._index[word] = idx
        return idx

    def index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWord(f"word not in vocabulary: {word!r}") from None

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self.words)


@dataclass
class Sentence:
    window_id: int
    doc_id: str
    position: int  # 1-based index within the document
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Document:
    doc_id: str
    sentences: list[Sentence] = field(default_factory=list)


@dataclass(frozen=True)
class InfluenceProfile:
    """Positional word weighting: constant, linear (center-peaked), or binomial."""

    kind: str = "constant"

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "binomial"):
            raise ValueError(f"unknown influence kind: {self.kind!r}")


CONSTANT = InfluenceProfile("constant")


def influence(profile: InfluenceProfile, sentence: Sentence, position: int) -> float:
    """Influence value of the word at `position`; always positive.

    Linear and binomial profiles peak at the sentence center and are scaled so
    the maximum positional weight is 1.0.
    """
    n = len(sentence.tokens)
    if position < 0 or position >= n:
        raise IndexError(f"position {position} out of range for sentence of length {n}")
    if profile.kind == "constant":
        return 1.0
    if profile.kind == "linear":
        c = (n - 1) / 2
        raw = [(c + 1 - abs(p - c)) / (c + 1) for p in range(n)]
    else:  # binomial
        raw = [float(math.comb(n - 1, p)) for p in range(n)]
    return raw[position] / max(raw)


def vectorize(sentence: Sentence, profile: InfluenceProfile, vocab: Vocabulary) -> dict[str, float]:
    """Sparse word vector of a sentence: word -> summed influence values."""
    vec: dict[str, float] = {}
    for pos, word in enumerate(sentence.tokens):
        if word not in vocab:
            raise UnknownWord(f"word not in vocabulary: {word!r}")
        vec[word] = vec.get(word, 0.0) + influence(profile, sentence, pos)
    return vec


class Corpus:
    """A set of documents plus the shared vocabulary and window-id registry."""

    def __init__(self):
        self.documents: dict[str, Document] = {}
        self.vocabulary = Vocabulary()
        self._windows: dict[int, Sentence] = {}
        self._next_window_id = 1

    # -- ingestion ----------------------------------------------------------

    def ingest_plaintext(self, text: str, doc_id: str) -> Document:
        """Split `text` into sentences, extend the vocabulary, add a document."""
        if doc_id in self.documents:
            raise ValueError(f"duplicate document id: {doc_id!r}")
        if not text or not text.strip():
            raise EmptyDocument(f"document {doc_id!r} is empty")
        token_lists = split_sentences(text)
        if not token_lists:
            raise EmptyDocument(f"document {doc_id!r} yields no tokens")
        doc = Document(doc_id)
        for pos, tokens in enumerate(token_lists, start=1):
            for w in tokens:
                self.vocabulary.add(w)
            sent = Sentence(self._next_window_id, doc_id, pos, tuple(tokens))
            self._next_window_id += 1
            doc.sentences.append(sent)
            self._windows[sent.window_id] = sent
        self.documents[doc_id] = doc
        return doc

    # -- lookup -------------------------------------------------------------

    def sentence(self, window_id: int) -> Sentence:
        try:
            return self._windows[window_id]
        except KeyError:
            from .errors import UnknownSentence

            raise UnknownSentence(f"no sentence with window id {window_id}") from None

    def has_window(self, window_id: int) -> bool:
        return window_id in self._windows

    def sentences(self):
        for doc in self.documents.values():
            yield from doc.sentences

    @property
    def sentence_count(self) -> int:
        return len(self._windows)

    # -- mutation (used by FrESH only) --------------------------------------

    def remove_sentence(self, window_id: int) -> Sentence:
        """Delete a sentence and renumber the remaining positions in its document."""
        sent = self.sentence(window_id)
        doc = self.documents[sent.doc_id]
        doc.sentences.remove(sent)
        for pos, s in enumerate(doc.sentences, start=1):
            s.position = pos
        del self._windows[window_id]
        return sent

    # -- digests ------------------------------------------------------------

    def content(self) -> dict:
        return {
            "vocabulary": list(self.vocabulary.words),
            "nextWindowId": self._next_window_id,
            "documents": [
                {
                    "docId": doc.doc_id,
                    "sentences": [
                        {"windowId": s.window_id, "position": s.position, "tokens": list(s.tokens)}
                        for s in doc.sentences
                    ],
                }
                for doc in self.documents.values()
            ],
        }

    def digest(self) -> str:
        blob = json.dumps(self.content(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @classmethod
    def from_content(cls, content: dict) -> "Corpus":
        corpus = cls()
        for w in content["vocabulary"]:
            corpus.vocabulary.add(w)
        for d in content["documents"]:
            doc = Document(d["docId"])
            for s in d["sentences"]:
                sent = Sentence(s["windowId"], d["docId"], s["position"], tuple(s["tokens"]))
                doc.sentences.append(sent)
                corpus._windows[sent.window_id] = sent
            corpus.documents[doc.doc_id] = doc
        corpus._next_window_id = content["nextWindowId"]
        return corpus


DEFAULT_XML_CONFIG = {
    "norm_tag": "norm",
    "id_tag": "enbez",
    "paragraph_tag": "P",
}


def load_xml_config(path) -> dict:
    """Read the key-value ingestion config (JSON object); missing keys default."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    merged = dict(DEFAULT_XML_CONFIG)
    merged.update(cfg)
    return merged


def ingest_xml_law(xml_file, config: dict | None = None) -> Corpus:
    """Build a corpus from a statute XML file: one document per law paragraph.

    Norm elements without any paragraph text (section headings etc.) are
    skipped.  Tag names are configurable, see DEFAULT_XML_CONFIG.
    """
    cfg = dict(DEFAULT_XML_CONFIG)
    if config:
        cfg.update(config)
    try:
        tree = ET.parse(xml_file)
    except ET.ParseError as exc:
        raise ParseError(f"{xml_file}: {exc}") from exc
    corpus = Corpus()
    seq = 0
    for norm in tree.getroot().iter(cfg["norm_tag"]):
        seq += 1
        id_el = norm.find(f".//{cfg['id_tag']}")
        doc_id = id_el.text.strip() if id_el is not None and id_el.text else f"norm-{seq}"
        parts = ["".join(p.itertext()) for p in norm.iter(cfg["paragraph_tag"])]
        text = " ".join(t for t in parts if t and t.strip())
        if not text.strip():
            continue
        if doc_id in corpus.documents:
            doc_id = f"{doc_id}#{seq}"
        corpus.ingest_plaintext(text, doc_id)
    return corpus
