"""Incremental model updates.

`fresh_remove_sentence` deletes a sentence entirely (corpus, SCD, matrix) by
inverting the supervised estimator's accumulation.  `refresh` repairs a faulty
sentence-SCD association in four steps: shift relations onto the sentences,
disassemble the SCD, reassign every sentence to the best fitting SCD, and
propagate the preserved relations back with adjusted factors.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction

from .corpus import vectorize
from .errors import InternalInconsistency, NoCandidate, NotAssociated, UnknownSentence
from .model import (
    TARGET_LABEL,
    TARGET_SCD,
    TARGET_SENTENCE,
    AdditionalData,
    FactoredRelation,
    Scd,
    ScdModel,
    SentenceBundle,
    cosine_similarity,
    most_similar_row,
    rebuild_row,
)
from .usem import DEFAULT_LABEL_WORDS, label_surrogate

log = logging.getLogger(__name__)


@dataclass
class ReassignmentRecord:
    """One sentence placed into a (possibly new) SCD during the reassign step."""

    scd_id: int
    window_id: int
    bundle: SentenceBundle
    created: bool  # SCD was newly composed during this reassign run


# ---------------------------------------------------------------------------
# FrESH


def fresh_remove_sentence(model: ScdModel, window_id: int) -> ScdModel:
    """Delete a sentence from corpus, its SCD, and the matrix (inverse of SEM).

    If the owning SCD ends up referencing no sentences it is removed entirely,
    together with relations of other SCDs that targeted it.
    """
    if not model.corpus.has_window(window_id):
        raise UnknownSentence(f"no sentence with window id {window_id}")
    sentence = model.corpus.sentence(window_id)
    owner = model.scd_of_window(window_id)
    if owner is not None:
        scd = model.scd(owner)
        model.matrix.subtract_from_row(owner, vectorize(sentence, model.profile, model.corpus.vocabulary))
        scd.referenced_windows.discard(window_id)
        if not scd.referenced_windows:
            del model.scds[owner]
            model.matrix.delete_row(owner)
            _drop_relations_to(model, TARGET_SCD, owner)
    model.corpus.remove_sentence(window_id)
    model.sentence_data.pop(window_id, None)
    _drop_relations_to(model, TARGET_SENTENCE, window_id)
    model.version += 1
    return model


def _drop_relations_to(model: ScdModel, target_type: str, target) -> None:
    for scd in model.scds.values():
        scd.data.relations = {
            r
            for r in scd.data.relations
            if not (r.target_type == target_type and r.target == target)
        }
    for bundle in model.sentence_data.values():
        bundle.relations = [
            r
            for r in bundle.relations
            if not (r.target_type == target_type and r.target == target)
        ]


# ---------------------------------------------------------------------------
# ReFrESH step 1: shift relations to sentences


def shift_relations(model: ScdModel, t: int, remove_id: int) -> list[SentenceBundle]:
    """Shift the SCD's label and relations onto its sentences with factors.

    The removed sentence gets factor 1/S and no label; each correct sentence
    gets factor (S-1)/S plus the label with factor 1.  Existing relation
    factors are multiplied in.
    """
    scd = model.scd(t)
    if remove_id not in scd.referenced_windows:
        raise NotAssociated(f"window {remove_id} is not referenced by SCD {t}")
    s = len(scd.referenced_windows)
    f_r = Fraction(1, s)
    f_c = Fraction(s - 1, s)
    bundles = []
    for wid in sorted(scd.referenced_windows):
        if wid == remove_id:
            factor, label = f_r, None
        else:
            factor, label = f_c, (Fraction(1), scd.data.label) if scd.data.label else None
        relations = [r.scaled(factor) for r in sorted(scd.data.relations, key=_relation_key)]
        bundles.append(SentenceBundle(wid, label, relations))
    return bundles


def _relation_key(r: FactoredRelation):
    return (r.kind, r.target_type, str(r.target), r.factor)


# ---------------------------------------------------------------------------
# ReFrESH step 2: disassemble


def disassemble(model: ScdModel, t: int) -> ScdModel:
    """Remove the SCD and its row; retarget inbound relations to its sentences."""
    scd = model.scd(t)
    former = sorted(scd.referenced_windows)
    del model.scds[t]
    model.matrix.delete_row(t)
    for other in model.scds.values():
        inbound = {r for r in other.data.relations if r.target_type == TARGET_SCD and r.target == t}
        if inbound:
            other.data.relations -= inbound
            for r in inbound:
                for wid in former:
                    other.data.relations.add(
                        FactoredRelation(r.factor, r.kind, TARGET_SENTENCE, wid)
                    )
    return model


# ---------------------------------------------------------------------------
# ReFrESH step 3: reassign


def reassign(
    model: ScdModel,
    preserved: list[SentenceBundle],
    remove_id: int,
) -> tuple[ScdModel, list[ReassignmentRecord]]:
    """Reassign every disassembled sentence to an existing or new SCD.

    The removed sentence joins its most similar existing SCD first; it never
    seeds a new SCD.  Each remaining sentence joins an existing SCD if a matrix
    row is strictly more similar than every unassigned peer sentence, else it
    forms a new two-sentence SCD with its most similar peer.
    """
    by_wid = {b.window_id: b for b in preserved}
    if remove_id not in by_wid:
        raise InternalInconsistency(f"removed window {remove_id} missing from preserved set")
    vocab = model.corpus.vocabulary
    vec = {
        wid: vectorize(model.corpus.sentence(wid), model.profile, vocab) for wid in by_wid
    }
    records: list[ReassignmentRecord] = []

    def join(scd_id: int, wid: int, created: bool) -> None:
        model.scds[scd_id].referenced_windows.add(wid)
        model.matrix.add_to_row(scd_id, vec[wid])
        records.append(ReassignmentRecord(scd_id, wid, by_wid[wid], created))

    def new_scd(wid_a: int, wid_b: int | None) -> int:
        sid = model.new_scd_id()
        windows = {wid_a} if wid_b is None else {wid_a, wid_b}
        model.scds[sid] = Scd(sid, AdditionalData(), set())
        model.matrix.rows[sid] = {}
        for wid in sorted(windows):
            join(sid, wid, created=True)
        return sid

    correct = sorted(w for w in by_wid if w != remove_id)

    if not model.matrix.rows:
        # Degenerate single-SCD model: the matrix is empty after disassembly,
        # so sentences are grouped by pure peer-merging and the removed
        # sentence joins the most similar formed SCD last.
        unassigned = list(correct)
        while unassigned:
            wid = unassigned.pop(0)
            if unassigned:
                peer = _best_peer(wid, unassigned, vec)
                unassigned.remove(peer)
                new_scd(wid, peer)
            else:
                try:
                    j, _ = most_similar_row(vec[wid], model.matrix)
                    join(j, wid, created=False)
                except NoCandidate:
                    new_scd(wid, None)
        if not model.matrix.rows:
            raise NoCandidate(
                "cannot reassign the removed sentence: the model holds no other SCD"
            )
        log.warning("degenerate single-SCD model: reassigned by pure peer-merging")
        j, _ = most_similar_row(vec[remove_id], model.matrix)
        join(j, remove_id, created=False)
    else:
        j, _ = most_similar_row(vec[remove_id], model.matrix)
        join(j, remove_id, created=False)
        unassigned = list(correct)
        while unassigned:
            wid = unassigned.pop(0)
            row_id, row_sim = most_similar_row(vec[wid], model.matrix)
            peer = _best_peer(wid, unassigned, vec) if unassigned else None
            peer_sim = cosine_similarity(vec[wid], vec[peer]) if peer is not None else -1.0
            if peer is None or row_sim > peer_sim:
                join(row_id, wid, created=False)
            else:
                unassigned.remove(peer)
                new_scd(wid, peer)

    for sid in sorted({r.scd_id for r in records}):
        rebuild_row(model, sid)
    return model, records


def _best_peer(wid: int, candidates: list[int], vec) -> int:
    best, best_sim = None, -1.0
    for other in candidates:
        sim = cosine_similarity(vec[wid], vec[other])
        if sim > best_sim:
            best, best_sim = other, sim
    return best


# ---------------------------------------------------------------------------
# ReFrESH step 4: propagate


LABEL_HINT = "label-hint"


def propagate(model: ScdModel, records: list[ReassignmentRecord]) -> ScdModel:
    """Propagate preserved relations from the sentences back to their new SCDs.

    Newly composed SCDs take over the bundles verbatim and get a surrogate
    label.  Pre-existing SCDs that gained x sentences over their prior S take
    each incoming factor multiplied by x/(S+x); their own label is unchanged.
    The bundles also stay stored on the sentences.
    """
    by_scd: dict[int, list[ReassignmentRecord]] = {}
    for rec in records:
        by_scd.setdefault(rec.scd_id, []).append(rec)
        model.sentence_data[rec.window_id] = rec.bundle

    for scd_id in sorted(by_scd):
        recs = by_scd[scd_id]
        if scd_id not in model.scds:
            raise InternalInconsistency(f"reassignment record targets vanished SCD {scd_id}")
        scd = model.scds[scd_id]
        if recs[0].created:
            for rec in recs:
                scd.data.relations |= set(rec.bundle.relations)
                if rec.bundle.label:
                    lf, ltext = rec.bundle.label
                    scd.data.relations.add(FactoredRelation(lf, LABEL_HINT, TARGET_LABEL, ltext))
            scd.data.label = label_surrogate(
                model.matrix.row(scd_id), DEFAULT_LABEL_WORDS, model.corpus.vocabulary
            )
            scd.data.label_factor = Fraction(1)
        else:
            x = len(recs)
            s_prior = len(scd.referenced_windows) - x
            if s_prior < 1:
                raise InternalInconsistency(
                    f"SCD {scd_id} gained {x} sentences but holds only "
                    f"{len(scd.referenced_windows)}"
                )
            mult = Fraction(x, s_prior + x)
            for rec in recs:
                for rel in rec.bundle.relations:
                    scd.data.relations.add(rel.scaled(mult))
                if rec.bundle.label:
                    lf, ltext = rec.bundle.label
                    scd.data.relations.add(
                        FactoredRelation(lf * mult, LABEL_HINT, TARGET_LABEL, ltext)
                    )
    return model


# ---------------------------------------------------------------------------
# the complete update


def refresh(model: ScdModel, remove_id: int, t: int | None = None) -> ScdModel:
    """Remove a faulty sentence-SCD association, preserving all relations.

    Runs the four steps in order.  The corpus itself is never changed; the
    removed sentence ends up associated with a pre-existing SCD.
    """
    if not model.corpus.has_window(remove_id):
        raise UnknownSentence(f"no sentence with window id {remove_id}")
    if t is None:
        t = model.scd_of_window(remove_id)
        if t is None:
            raise NotAssociated(f"window {remove_id} is associated with no SCD")
    preserved = shift_relations(model, t, remove_id)
    disassemble(model, t)
    model, records = reassign(model, preserved, remove_id)
    propagate(model, records)
    model.version += 1
    receiving = next(r.scd_id for r in records if r.window_id == remove_id)
    created = sorted({r.scd_id for r in records if r.created})
    log.info(
        "%s",
        json.dumps(
            {
                "op": "refresh",
                "version": model.version,
                "removedWindowId": remove_id,
                "receivingScdId": receiving,
                "createdScdIds": created,
            }
        ),
    )
    return model
