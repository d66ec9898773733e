import math

import pytest

from scdlib.corpus import (
    CONSTANT,
    Corpus,
    InfluenceProfile,
    influence,
    ingest_xml_law,
    vectorize,
)
from scdlib.errors import EmptyDocument, ParseError, UnknownWord


def make_sentence(*tokens, corpus=None):
    c = corpus or Corpus()
    doc = c.ingest_plaintext(" ".join(tokens) + ".", "doc")
    return doc.sentences[0], c


class TestIngestPlaintext:
    def test_two_sentences(self):
        c = Corpus()
        doc = c.ingest_plaintext("Hello world. Bye!", "d1")
        assert [s.tokens for s in doc.sentences] == [("hello", "world"), ("bye",)]
        assert [s.position for s in doc.sentences] == [1, 2]

    def test_empty_text_rejected(self):
        with pytest.raises(EmptyDocument):
            Corpus().ingest_plaintext("", "d1")

    def test_punctuation_only_rejected(self):
        with pytest.raises(EmptyDocument):
            Corpus().ingest_plaintext("...!?", "d1")

    def test_window_ids_strictly_increase(self):
        c = Corpus()
        c.ingest_plaintext("One. Two. Three.", "a")
        c.ingest_plaintext("Four. Five.", "b")
        wids = [s.window_id for s in c.sentences()]
        assert wids == sorted(wids)
        assert len(set(wids)) == len(wids)

    def test_deterministic_tokenization(self):
        text = "Der Käufer zahlt den Preis. Die Sache wird übergeben!"
        c1, c2 = Corpus(), Corpus()
        c1.ingest_plaintext(text, "d")
        c2.ingest_plaintext(text, "d")
        assert [s.tokens for s in c1.sentences()] == [s.tokens for s in c2.sentences()]
        assert c1.vocabulary.words == c2.vocabulary.words

    def test_vocabulary_round_trip(self):
        c = Corpus()
        c.ingest_plaintext("alpha beta gamma. beta delta.", "d")
        for i, w in enumerate(c.vocabulary.words):
            assert c.vocabulary.index(w) == i

    def test_duplicate_doc_id(self):
        c = Corpus()
        c.ingest_plaintext("One.", "d")
        with pytest.raises(ValueError):
            c.ingest_plaintext("Two.", "d")


class TestInfluence:
    def test_constant(self):
        s, _ = make_sentence("a", "b", "c")
        assert [influence(CONSTANT, s, p) for p in range(3)] == [1.0, 1.0, 1.0]

    def test_linear_center_peaked(self):
        s, _ = make_sentence("a", "b", "c")
        linear = InfluenceProfile("linear")
        weights = [influence(linear, s, p) for p in range(3)]
        assert weights == [0.5, 1.0, 0.5]

    def test_binomial_single_token(self):
        s, _ = make_sentence("a")
        assert influence(InfluenceProfile("binomial"), s, 0) == 1.0

    def test_max_weight_is_one(self):
        for kind in ("linear", "binomial"):
            for n in range(1, 8):
                s, _ = make_sentence(*[f"w{i}" for i in range(n)])
                ws = [influence(InfluenceProfile(kind), s, p) for p in range(n)]
                assert max(ws) == 1.0
                assert all(w > 0 for w in ws)

    def test_out_of_range(self):
        s, _ = make_sentence("a", "b")
        with pytest.raises(IndexError):
            influence(CONSTANT, s, 2)


class TestVectorize:
    def test_accumulation(self):
        s, c = make_sentence("a", "b", "a")
        assert vectorize(s, CONSTANT, c.vocabulary) == {"a": 2.0, "b": 1.0}

    def test_one_hot(self):
        s, c = make_sentence("a")
        assert vectorize(s, CONSTANT, c.vocabulary) == {"a": 1.0}

    def test_linear_weights(self):
        s, c = make_sentence("a", "b", "c")
        vec = vectorize(s, InfluenceProfile("linear"), c.vocabulary)
        assert vec == {"a": 0.5, "b": 1.0, "c": 0.5}

    def test_unknown_token(self):
        s, c = make_sentence("a")
        other = Corpus()
        other.ingest_plaintext("b.", "d")
        with pytest.raises(UnknownWord):
            vectorize(s, CONSTANT, other.vocabulary)

    def test_l1_norm_equals_influence_sum(self):
        for kind in ("constant", "linear", "binomial"):
            profile = InfluenceProfile(kind)
            s, c = make_sentence("a", "b", "a", "c", "b")
            vec = vectorize(s, profile, c.vocabulary)
            expected = sum(influence(profile, s, p) for p in range(len(s)))
            assert math.isclose(sum(vec.values()), expected)


SAMPLE_XML = """<?xml version="1.0" encoding="UTF-8"?>
<dokumente>
  <norm><metadaten><enbez>Heading</enbez></metadaten></norm>
  <norm>
    <metadaten><enbez>§ 1</enbez></metadaten>
    <textdaten><text><Content>
      <P>Die Rechtsfähigkeit des Menschen beginnt mit der Geburt.</P>
    </Content></text></textdaten>
  </norm>
  <norm>
    <metadaten><enbez>§ 2</enbez></metadaten>
    <textdaten><text><Content>
      <P>Die Volljährigkeit tritt ein. Mit achtzehn Jahren!</P>
    </Content></text></textdaten>
  </norm>
</dokumente>
"""


class TestIngestXml:
    def test_sample_statute(self, tmp_path):
        path = tmp_path / "law.xml"
        path.write_text(SAMPLE_XML, encoding="utf-8")
        corpus = ingest_xml_law(path)
        assert set(corpus.documents) == {"§ 1", "§ 2"}
        assert len(corpus.documents["§ 1"].sentences) == 1
        assert len(corpus.documents["§ 2"].sentences) == 2

    def test_single_norm_single_sentence(self, tmp_path):
        xml = (
            "<dokumente><norm><metadaten><enbez>§ 9</enbez></metadaten>"
            "<textdaten><text><Content><P>Ein Satz.</P></Content></text></textdaten>"
            "</norm></dokumente>"
        )
        path = tmp_path / "one.xml"
        path.write_text(xml, encoding="utf-8")
        corpus = ingest_xml_law(path)
        assert len(corpus.documents) == 1
        assert corpus.sentence_count == 1

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.xml"
        path.write_text(SAMPLE_XML[: len(SAMPLE_XML) // 2], encoding="utf-8")
        with pytest.raises(ParseError):
            ingest_xml_law(path)
