import copy
from fractions import Fraction

import pytest

from scdlib.corpus import Corpus
from scdlib.errors import NotAssociated, UnknownScd, UnknownSentence
from scdlib.model import (
    TARGET_LABEL,
    TARGET_SCD,
    TARGET_SENTENCE,
    AdditionalData,
    FactoredRelation,
    Scd,
    ScdModel,
    check_consistency,
    estimate_sem,
    rebuild_row,
    serialize_model,
)
from scdlib.updates import (
    LABEL_HINT,
    disassemble,
    fresh_remove_sentence,
    propagate,
    reassign,
    refresh,
    shift_relations,
)
from scdlib.usem import MergeConfig, estimate_usem


def build_model(text, groups, relations=(), labels=None):
    """Model over one document; groups = tuples of 0-based sentence indices."""
    corpus = Corpus()
    corpus.ingest_plaintext(text, "doc")
    wids = [s.window_id for s in corpus.sentences()]
    scds = {}
    for i, group in enumerate(groups, start=1):
        label = labels[i - 1] if labels else f"scd{i}"
        scds[i] = Scd(i, AdditionalData(label=label), {wids[j] for j in group})
    for frm, kind, to, factor in relations:
        scds[frm].data.relations.add(
            FactoredRelation(Fraction(factor), kind, TARGET_SCD, to)
        )
    matrix = estimate_sem(corpus, scds.values())
    model = ScdModel(
        corpus=corpus, matrix=matrix, scds=scds, next_scd_id=len(groups) + 1
    )
    return model, wids


class TestFresh:
    def test_exact_inverse_of_add(self):
        model, wids = build_model("a b. c d. e f.", [(0, 1, 2)])
        before = {w: dict(r) for w, r in model.matrix.rows.items()}
        doc = model.corpus.ingest_plaintext("g h.", "extra")
        wid = doc.sentences[0].window_id
        model.scds[1].referenced_windows.add(wid)
        rebuild_row(model, 1)
        fresh_remove_sentence(model, wid)
        assert model.matrix.rows == before

    def test_singleton_scd_removed(self):
        model, wids = build_model("a b. c d.", [(0,), (1,)])
        fresh_remove_sentence(model, wids[0])
        assert 1 not in model.scds
        assert 1 not in model.matrix.rows
        assert not model.corpus.has_window(wids[0])
        check_consistency(model)

    def test_row_matches_rebuild_oracle(self):
        model, wids = build_model("a b. b c. c d.", [(0, 1, 2)])
        fresh_remove_sentence(model, wids[1])
        stored = dict(model.matrix.rows[1])
        rebuild_row(model, 1)
        assert model.matrix.rows[1] == stored

    def test_relations_to_removed_scd_dropped(self):
        model, wids = build_model(
            "a b. c d.", [(0,), (1,)], relations=[(2, "similar", 1, 1)]
        )
        fresh_remove_sentence(model, wids[0])
        assert not model.scds[2].data.relations

    def test_unknown_window(self):
        model, _ = build_model("a b.", [(0,)])
        with pytest.raises(UnknownSentence):
            fresh_remove_sentence(model, 999)

    def test_version_incremented(self):
        model, wids = build_model("a b. c d.", [(0,), (1,)])
        v = model.version
        fresh_remove_sentence(model, wids[0])
        assert model.version == v + 1


class TestShiftRelations:
    def test_worked_factors_s3(self):
        model, wids = build_model(
            "a b. c d. e f.", [(0, 1, 2)], relations=[(1, "homonym", 1, 1)]
        )
        bundles = shift_relations(model, 1, wids[2])
        by_wid = {b.window_id: b for b in bundles}
        removed = by_wid[wids[2]]
        assert removed.label is None
        assert removed.relations[0].factor == Fraction(1, 3)
        for wid in wids[:2]:
            b = by_wid[wid]
            assert b.label == (Fraction(1), "scd1")
            assert b.relations[0].factor == Fraction(2, 3)

    def test_degenerate_single_sentence(self):
        model, wids = build_model("a b.", [(0,)], relations=[(1, "r", 1, 1)])
        bundles = shift_relations(model, 1, wids[0])
        assert len(bundles) == 1
        assert bundles[0].label is None
        assert bundles[0].relations[0].factor == Fraction(1)

    def test_existing_factor_multiplied(self):
        model, wids = build_model(
            "a b. c d. e f. g h.",
            [(0, 1, 2, 3)],
            relations=[(1, "r", 1, Fraction(1, 2))],
        )
        bundles = shift_relations(model, 1, wids[0])
        correct = next(b for b in bundles if b.window_id == wids[1])
        assert correct.relations[0].factor == Fraction(3, 4) * Fraction(1, 2)

    def test_factor_identity(self):
        for s in range(1, 21):
            assert Fraction(1, s) + Fraction(s - 1, s) == 1

    def test_not_associated(self):
        model, wids = build_model("a b. c d.", [(0,), (1,)])
        with pytest.raises(NotAssociated):
            shift_relations(model, 1, wids[1])


class TestDisassemble:
    def test_row_and_scd_removed_corpus_untouched(self):
        model, wids = build_model("a b. c d. e f. g h. i j.", [(0,), (1,), (2,), (3,), (4,)])
        n_sentences = model.corpus.sentence_count
        disassemble(model, 3)
        assert 3 not in model.scds
        assert 3 not in model.matrix.rows
        assert len(model.matrix.rows) == 4
        assert model.corpus.sentence_count == n_sentences

    def test_inbound_relations_retargeted(self):
        model, wids = build_model(
            "a b. c d. e f. g h.", [(0, 1, 2), (3,)], relations=[(2, "r", 1, 1)]
        )
        disassemble(model, 1)
        rels = model.scds[2].data.relations
        assert len(rels) == 3
        assert {r.target for r in rels} == set(wids[:3])
        assert all(r.target_type == TARGET_SENTENCE and r.factor == 1 for r in rels)

    def test_no_inbound_relations(self):
        model, wids = build_model("a b. c d.", [(0,), (1,)])
        disassemble(model, 1)
        assert not model.scds[2].data.relations

    def test_unknown_scd(self):
        model, _ = build_model("a b.", [(0,)])
        with pytest.raises(UnknownScd):
            disassemble(model, 9)


class TestReassign:
    def test_removed_sentence_joins_nearest_existing(self):
        # SCD 1 = {a-ish}, SCD 2 = {x-ish}; remove the x-like sentence from 1.
        model, wids = build_model("a b. x y. x x y y.", [(0, 1), (2,)])
        bundles = shift_relations(model, 1, wids[1])
        disassemble(model, 1)
        model, records = reassign(model, bundles, wids[1])
        owner = model.scd_of_window(wids[1])
        assert owner == 2
        rec = next(r for r in records if r.window_id == wids[1])
        assert not rec.created
        check_consistency(model)

    def test_mutual_peers_form_new_scd(self):
        # Two correct sentences share words only with each other.
        model, wids = build_model(
            "p q. p p q. z z. m n.", [(0, 1, 2), (3,)]
        )
        bundles = shift_relations(model, 1, wids[2])
        disassemble(model, 1)
        model, records = reassign(model, bundles, wids[2])
        owner_a = model.scd_of_window(wids[0])
        owner_b = model.scd_of_window(wids[1])
        assert owner_a == owner_b
        assert owner_a not in (1, 2)  # newly composed
        created = {r.scd_id for r in records if r.created}
        assert owner_a in created
        check_consistency(model)

    def test_identical_to_existing_row_joins_it(self):
        model, wids = build_model("a b. a b. z z.", [(0,), (1, 2)])
        bundles = shift_relations(model, 2, wids[2])
        disassemble(model, 2)
        model, records = reassign(model, bundles, wids[2])
        # The correct sentence (identical to SCD 1's sole sentence) joins SCD 1.
        assert model.scd_of_window(wids[1]) == 1

    def test_brute_force_on_toy_model(self):
        # 3-SCD model: verify each reassignment against exhaustive similarity.
        from scdlib.model import cosine_similarity
        from scdlib.corpus import vectorize, CONSTANT

        model, wids = build_model(
            "a b c. a b. x y. x y z. m n. m n o.", [(0, 1), (2, 3), (4, 5)]
        )
        ref = copy.deepcopy(model)
        bundles = shift_relations(model, 1, wids[1])
        disassemble(model, 1)
        model, records = reassign(model, bundles, wids[1])
        # Oracle: with the disassembled rows gone, each sentence's best row.
        vocab = ref.corpus.vocabulary
        for wid in (wids[1], wids[0]):
            vec = vectorize(ref.corpus.sentence(wid), CONSTANT, vocab)
            sims = {
                sid: cosine_similarity(vec, ref.matrix.rows[sid]) for sid in (2, 3)
            }
            best = max(sorted(sims), key=lambda s: (sims[s], -s))
            assert model.scd_of_window(wid) == best


class TestPropagate:
    def test_new_scd_takes_bundles_and_surrogate_label(self):
        model, wids = build_model(
            "p q. p p q. z z. m n.", [(0, 1, 2), (3,)],
            relations=[(1, "rel", 2, Fraction(1))],
        )
        bundles = shift_relations(model, 1, wids[2])
        disassemble(model, 1)
        model, records = reassign(model, bundles, wids[2])
        propagate(model, records)
        new_id = model.scd_of_window(wids[0])
        scd = model.scds[new_id]
        factors = {r.factor for r in scd.data.relations if r.kind == "rel"}
        assert factors == {Fraction(2, 3)}
        hints = [r for r in scd.data.relations if r.kind == LABEL_HINT]
        assert hints and all(r.target_type == TARGET_LABEL for r in hints)
        assert scd.data.label  # surrogate label assigned

    def test_existing_scd_factor_scaling(self):
        # SCD 2 has 4 sentences and gains 2 carrying factor 2/3 -> 2/9.
        model, wids = build_model(
            "p q r. p q. p r. q r. x y. x x y. z w.",
            [(4, 5, 6), (0, 1, 2, 3)],
            relations=[(1, "rel", 2, 1)],
        )
        # Remove the z/w sentence from SCD 1; the two x/y sentences carry
        # factor 2/3 and should land in a new SCD; craft instead a direct
        # propagate call to pin the x/(S+x) arithmetic.
        from scdlib.model import SentenceBundle
        from scdlib.updates import ReassignmentRecord

        bundle = SentenceBundle(
            wids[0], None, [FactoredRelation(Fraction(2, 3), "rel", TARGET_SCD, 1)]
        )
        # Pretend SCD 2 already gained wids[4] and wids[5] (x = 2 over S = 4).
        target = model.scds[2]
        for wid in (wids[4], wids[5]):
            target.referenced_windows.add(wid)
        rebuild_row(model, 2)
        records = [
            ReassignmentRecord(2, wids[4], bundle, created=False),
            ReassignmentRecord(
                2,
                wids[5],
                SentenceBundle(
                    wids[5], None, [FactoredRelation(Fraction(2, 3), "rel", TARGET_SCD, 1)]
                ),
                created=False,
            ),
        ]
        propagate(model, records)
        factors = {r.factor for r in model.scds[2].data.relations if r.kind == "rel"}
        assert Fraction(2, 9) in factors

    def test_empty_bundle_changes_nothing(self):
        model, wids = build_model("a b. c d.", [(0,), (1,)])
        from scdlib.model import SentenceBundle
        from scdlib.updates import ReassignmentRecord

        model.scds[1].referenced_windows.add(wids[1])
        del model.scds[2]
        model.matrix.delete_row(2)
        rebuild_row(model, 1)
        before = model.scds[1].data.copy()
        propagate(
            model,
            [ReassignmentRecord(1, wids[1], SentenceBundle(wids[1]), created=False)],
        )
        assert model.scds[1].data.label == before.label
        assert model.scds[1].data.relations == before.relations


class TestRefresh:
    def test_postconditions(self):
        model, wids = build_model(
            "a b. a b c. x y. x y z. x z.",
            [(0, 1), (2, 3, 4)],
            relations=[(2, "homonym", 1, 1), (1, "similar", 2, 1)],
        )
        corpus_digest = model.corpus.digest()
        original_kinds = {r.kind for r in model.scds[2].data.relations}
        refresh(model, wids[2], 2)
        assert model.corpus.digest() == corpus_digest
        owner = model.scd_of_window(wids[2])
        assert owner is not None and owner != 2 or 2 not in model.scds
        check_consistency(model)
        reachable = {
            r.kind
            for scd in model.scds.values()
            for r in scd.data.relations
        } | {
            r.kind
            for b in model.sentence_data.values()
            for r in b.relations
        }
        assert original_kinds <= reachable

    def test_wrongly_placed_sentence_moves_to_other_scd(self):
        model, wids = build_model(
            "a b. a b c. a c. x y.", [(0, 1, 3), (2,)]
        )
        refresh(model, wids[3], 1)
        # The x/y sentence leaves SCD 1; it must join a pre-existing SCD.
        assert model.scd_of_window(wids[3]) == 2
        check_consistency(model)

    def test_lookup_when_scd_omitted(self):
        model, wids = build_model("a b. a c. x y. x z.", [(0, 1), (2, 3)])
        refresh(model, wids[0])
        check_consistency(model)

    def test_not_associated(self):
        model, wids = build_model("a b. c d. e f.", [(0,), (1,)])
        with pytest.raises(NotAssociated):
            refresh(model, wids[2])

    def test_version_and_snapshot_round_trip(self):
        model, wids = build_model("a b. a c. x y. x z.", [(0, 1), (2, 3)])
        blob = serialize_model(model)
        v = model.version
        refresh(model, wids[1], 1)
        assert model.version == v + 1
        from scdlib.model import deserialize_model

        restored = deserialize_model(blob)
        assert serialize_model(restored) == blob

    def test_usem_model_refresh_keeps_invariants(self):
        corpus = Corpus()
        corpus.ingest_plaintext(
        	"a b. a c. b c. x y. x z. y z. m n. m o. n o.", "doc"
        )
        model = estimate_usem(corpus, MergeConfig(3))
        wid = next(iter(model.scds[min(model.scds)].referenced_windows))
        refresh(model, wid)
        check_consistency(model)
        covered = sorted(
            w for s in model.scds.values() for w in s.referenced_windows
        )
        assert covered == sorted(s.window_id for s in corpus.sentences())
