"""The SCD-based information-retrieval agent.

Answers queries against the model, perceives explicit and implicit feedback
events, aggregates implicit feedback in response/select counters, and applies
the counter-driven enhancement pass.  Every model version is snapshotted so the
user can revert updates.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .corpus import split_sentences
from .errors import (
    ConfigError,
    EmptyModel,
    EmptyQuery,
    InternalInconsistency,
    UnknownScd,
    UnknownSentence,
    UnknownVersion,
)
from .model import (
    TARGET_SCD,
    AdditionalData,
    FactoredRelation,
    Scd,
    ScdModel,
    cosine_similarity,
    deserialize_model,
    model_digest,
    serialize_model,
    vectorize,
)
from .updates import fresh_remove_sentence, refresh
from .usem import DEFAULT_LABEL_WORDS, MergeConfig, estimate_usem, label_surrogate

log = logging.getLogger(__name__)

DEFAULT_THETA_REFRESH = 10
DEFAULT_THETA_FRESH = 100

FEEDBACK_KINDS = (
    "FaultySentence",
    "FaultyAssociation",
    "RevertChanges",
    "NewQuery",
    "SelectScd",
    "SelectSentence",
    "AddData",
)


@dataclass(frozen=True)
class Query:
    text: str
    top_k: int = 5

    def __post_init__(self):
        if self.top_k < 1:
            raise ConfigError("topK must be >= 1")


@dataclass
class ResponseEntry:
    scd_id: int
    label: str | None
    score: float
    sentences: list[dict]  # {"windowId": ..., "docId": ..., "text": ...}
    related: list[dict]  # {"scdId": ..., "kind": ..., "factor": ...}


@dataclass
class IrResponse:
    response_id: int
    entries: list[ResponseEntry]

    def to_json(self) -> dict:
        return {
            "responseId": self.response_id,
            "entries": [
                {
                    "scdId": e.scd_id,
                    "label": e.label,
                    "score": e.score,
                    "sentences": e.sentences,
                    "related": e.related,
                }
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class FeedbackEvent:
    kind: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FEEDBACK_KINDS:
            raise ConfigError(f"unknown feedback kind: {self.kind!r}")


class CounterStore:
    """Per-item response and select counters for SCDs and sentences."""

    def __init__(self):
        self._counts: dict[tuple[str, int], list[int]] = {}
        self._lock = threading.Lock()

    def _entry(self, key):
        return self._counts.setdefault(key, [0, 0])

    def response(self, kind: str, item_id: int) -> None:
        with self._lock:
            self._entry((kind, item_id))[0] += 1

    def select(self, kind: str, item_id: int) -> None:
        # A select without a prior tracked response also counts as a response.
        with self._lock:
            entry = self._entry((kind, item_id))
            if entry[0] == 0:
                entry[0] += 1
            entry[1] += 1

    def get(self, kind: str, item_id: int) -> tuple[int, int]:
        rc, sc = self._counts.get((kind, item_id), (0, 0))
        return rc, sc

    def reset(self, kind: str, item_id: int) -> None:
        with self._lock:
            self._counts.pop((kind, item_id), None)

    def as_dict(self) -> dict:
        return {
            f"{kind}:{item_id}": {"rc": rc, "sc": sc}
            for (kind, item_id), (rc, sc) in sorted(self._counts.items())
        }


@dataclass
class Snapshot:
    version: int
    blob: bytes
    timestamp: float


# ---------------------------------------------------------------------------
# query answering


def answer_query(
    model: ScdModel,
    query: Query,
    counters: CounterStore | None = None,
    response_id: int = 0,
    allow_zero: bool = False,
) -> IrResponse:
    """Rank SCDs by cosine similarity to the vectorized query text."""
    if not model.scds:
        raise EmptyModel("the model holds no SCDs")
    vec: dict[str, float] = {}
    for tokens in split_sentences(query.text):
        for w in tokens:
            if w in model.corpus.vocabulary:
                vec[w] = vec.get(w, 0.0) + 1.0
    if not vec and not allow_zero:
        raise EmptyQuery("query contains no known words")
    scored = sorted(
        ((cosine_similarity(vec, row), sid) for sid, row in model.matrix.rows.items()),
        key=lambda t: (-t[0], t[1]),
    )
    entries = []
    for score, sid in scored[: query.top_k]:
        scd = model.scds[sid]
        sentences = [
            {
                "windowId": wid,
                "docId": model.corpus.sentence(wid).doc_id,
                "text": " ".join(model.corpus.sentence(wid).tokens),
            }
            for wid in sorted(scd.referenced_windows)
        ]
        related = [
            {"scdId": r.target, "kind": r.kind, "factor": str(r.factor)}
            for r in sorted(scd.data.relations, key=lambda r: (str(r.target), r.kind))
            if r.target_type == TARGET_SCD
        ]
        entries.append(ResponseEntry(sid, scd.data.label, score, sentences, related))
    response = IrResponse(response_id, entries)
    if counters is not None:
        for e in response.entries:
            counters.response("scd", e.scd_id)
            for s in e.sentences:
                counters.response("sentence", s["windowId"])
    return response


# ---------------------------------------------------------------------------
# implicit feedback incorporation


def enhance_scds(
    model: ScdModel,
    counters: CounterStore,
    theta_refresh: int = DEFAULT_THETA_REFRESH,
    theta_fresh: int = DEFAULT_THETA_FRESH,
) -> list[dict]:
    """Counter-driven pruning pass; returns a log of applied updates.

    Iterates documents, then SCDs, then referenced sentences.  The reassign
    check fires when the SCD and the sentence were responded often enough and
    half the probability of randomly selecting one referenced sentence exceeds
    the sentence's observed select rate.  The delete check fires when the
    sentence was responded at least theta_fresh times with a select rate below
    1/theta_fresh.
    """
    if theta_refresh < 1 or theta_fresh < 1:
        raise ConfigError("thresholds must be >= 1")
    applied = []
    for doc_id in list(model.corpus.documents):
        doc_windows = {s.window_id for s in model.corpus.documents[doc_id].sentences}
        scd_ids = sorted(
            sid for sid, scd in model.scds.items() if scd.referenced_windows & doc_windows
        )
        for sid in scd_ids:
            if sid not in model.scds:
                continue
            for wid in sorted(model.scds[sid].referenced_windows & doc_windows):
                if sid not in model.scds or wid not in model.scds[sid].referenced_windows:
                    continue
                rc_t, sc_t = counters.get("scd", sid)
                rc_s, sc_s = counters.get("sentence", wid)
                s_count = len(model.scds[sid].referenced_windows)
                if rc_t >= theta_refresh and rc_s >= theta_refresh:
                    if Fraction(sc_t, rc_t) * Fraction(1, 2 * s_count) > Fraction(sc_s, rc_s):
                        refresh(model, wid, sid)
                        counters.reset("scd", sid)
                        counters.reset("sentence", wid)
                        applied.append({"op": "refresh", "windowId": wid, "scdId": sid})
                        rc_s, sc_s = counters.get("sentence", wid)
                if rc_s >= theta_fresh and Fraction(1, theta_fresh) > Fraction(sc_s, rc_s):
                    fresh_remove_sentence(model, wid)
                    counters.reset("sentence", wid)
                    applied.append({"op": "fresh", "windowId": wid, "scdId": sid})
    return applied


# ---------------------------------------------------------------------------
# the agent


class ScdAgent:
    """Single-user agent: one model, one counter store, serialized mutations."""

    def __init__(
        self,
        model: ScdModel,
        theta_refresh: int = DEFAULT_THETA_REFRESH,
        theta_fresh: int = DEFAULT_THETA_FRESH,
        snapshot_dir: str | Path | None = None,
        add_data_target_ratio: float = 0.5,
    ):
        self.model = model
        self.counters = CounterStore()
        self.theta_refresh = theta_refresh
        self.theta_fresh = theta_fresh
        self.add_data_target_ratio = add_data_target_ratio
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        self.snapshots: dict[int, Snapshot] = {}
        self._response_seq = 0
        self._lock = threading.Lock()
        self.model.version = 0
        self._take_snapshot()

    # -- versioning ---------------------------------------------------------

    def _take_snapshot(self) -> Snapshot:
        snap = Snapshot(self.model.version, serialize_model(self.model), time.time())
        self.snapshots[snap.version] = snap
        if self.snapshot_dir:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
            path = self.snapshot_dir / f"model-v{snap.version:06d}.json"
            path.write_bytes(snap.blob)
        return snap

    def versions(self) -> list[int]:
        return sorted(self.snapshots)

    def digest(self) -> str:
        return model_digest(self.model)

    def restore(self, version: int | None = None) -> ScdModel:
        """Replace the live model with a stored version; creates a new version."""
        with self._lock:
            if version is None:
                candidates = [v for v in self.snapshots if v < self.model.version]
                if not candidates:
                    raise UnknownVersion("no previous version to restore")
                version = max(candidates)
            if version not in self.snapshots:
                raise UnknownVersion(f"no snapshot for version {version}")
            new_version = self.model.version + 1
            self.model = deserialize_model(self.snapshots[version].blob, version=new_version)
            self._take_snapshot()
            return self.model

    def _mutate(self, fn):
        with self._lock:
            before = self.model.version
            result = fn(self.model)
            if self.model.version == before:
                self.model.version = before + 1
            self._take_snapshot()
            return result

    # -- perception ---------------------------------------------------------

    def answer(self, query: Query, allow_zero: bool = False) -> IrResponse:
        self._response_seq += 1
        return answer_query(
            self.model, query, self.counters, self._response_seq, allow_zero=allow_zero
        )

    def perceive(self, event: FeedbackEvent) -> ScdModel:
        p = event.payload
        kind = event.kind
        if kind == "FaultySentence":
            self._mutate(lambda m: fresh_remove_sentence(m, p["windowId"]))
        elif kind == "FaultyAssociation":
            self._mutate(lambda m: refresh(m, p["windowId"], p.get("scdId")))
        elif kind == "RevertChanges":
            self.restore(p.get("version"))
        elif kind == "NewQuery":
            pass  # too vague: no counters are updated
        elif kind == "SelectScd":
            if p["scdId"] not in self.model.scds:
                raise UnknownScd(f"no SCD with id {p['scdId']}")
            self.counters.select("scd", p["scdId"])
        elif kind == "SelectSentence":
            wid = p["windowId"]
            if not self.model.corpus.has_window(wid):
                raise UnknownSentence(f"no sentence with window id {wid}")
            self.counters.select("sentence", wid)
            owner = self.model.scd_of_window(wid)
            if owner is not None:
                self.counters.select("scd", owner)
        elif kind == "AddData":
            self._mutate(lambda m: self._add_data(m, p))
        return self.model

    def enhance(self, theta_refresh: int | None = None, theta_fresh: int | None = None) -> list[dict]:
        return self._mutate(
            lambda m: enhance_scds(
                m,
                self.counters,
                theta_refresh or self.theta_refresh,
                theta_fresh or self.theta_fresh,
            )
        )

    # -- AddData ------------------------------------------------------------

    def _add_data(self, model: ScdModel, payload: dict) -> ScdModel:
        new_windows: list[int] = []
        for doc in payload.get("documents", []):
            d = model.corpus.ingest_plaintext(doc["text"], doc["docId"])
            new_windows.extend(s.window_id for s in d.sentences)
        if new_windows:
            self._estimate_new_scds(model, new_windows)
        for spec in payload.get("scds", []):
            self._add_manual_scd(model, spec)
        for rel in payload.get("relations", []):
            self._add_manual_relation(model, rel)
        return model

    def _estimate_new_scds(self, model: ScdModel, new_windows: list[int]) -> None:
        """Group new sentences with the unsupervised estimator and graft them in."""
        from .corpus import Corpus

        sub = Corpus()
        sub.vocabulary = model.corpus.vocabulary
        text_by_doc: dict[str, list[int]] = {}
        for wid in new_windows:
            text_by_doc.setdefault(model.corpus.sentence(wid).doc_id, []).append(wid)
        # Build a lightweight sub-corpus that reuses the live sentences.
        for doc_id, wids in text_by_doc.items():
            from .corpus import Document

            doc = Document(doc_id)
            for wid in wids:
                sent = model.corpus.sentence(wid)
                doc.sentences.append(sent)
                sub._windows[wid] = sent
            sub.documents[doc_id] = doc
        sub._next_window_id = model.corpus._next_window_id
        k = max(1, round(len(new_windows) * self.add_data_target_ratio))
        sub_model = estimate_usem(sub, MergeConfig(k), model.profile)
        for scd in sorted(sub_model.scds.values(), key=lambda s: s.scd_id):
            sid = model.new_scd_id()
            model.scds[sid] = Scd(sid, scd.data.copy(), set(scd.referenced_windows))
            model.matrix.rows[sid] = dict(sub_model.matrix.rows[scd.scd_id])

    def _add_manual_scd(self, model: ScdModel, spec: dict) -> None:
        windows = set(spec["windows"])
        for wid in windows:
            if not model.corpus.has_window(wid):
                raise UnknownSentence(f"no sentence with window id {wid}")
            owner = model.scd_of_window(wid)
            if owner is not None:
                raise InternalInconsistency(
                    f"window {wid} is already associated with SCD {owner}"
                )
        sid = model.new_scd_id()
        model.scds[sid] = Scd(sid, AdditionalData(label=spec.get("label")), set())
        model.matrix.rows[sid] = {}
        for wid in sorted(windows):
            model.scds[sid].referenced_windows.add(wid)
            model.matrix.add_to_row(
                sid, vectorize(model.corpus.sentence(wid), model.profile, model.corpus.vocabulary)
            )
        if not spec.get("label"):
            model.scds[sid].data.label = label_surrogate(
                model.matrix.rows[sid], DEFAULT_LABEL_WORDS, model.corpus.vocabulary
            )

    def _add_manual_relation(self, model: ScdModel, rel: dict) -> None:
        for key in ("fromScd", "toScd"):
            if rel[key] not in model.scds:
                raise UnknownScd(f"no SCD with id {rel[key]}")
        model.scds[rel["fromScd"]].data.relations.add(
            FactoredRelation(
                Fraction(rel.get("factor", 1)), rel["kind"], TARGET_SCD, rel["toScd"]
            )
        )

    # -- introspection ------------------------------------------------------

    def scd_info(self, scd_id: int) -> dict:
        scd = self.model.scd(scd_id)
        rc, sc = self.counters.get("scd", scd_id)
        return {
            "scdId": scd_id,
            "label": scd.data.label,
            "labelFactor": str(scd.data.label_factor),
            "relations": [r.to_json() for r in sorted(scd.data.relations, key=lambda r: r.to_json())],
            "windows": sorted(scd.referenced_windows),
            "responseCount": rc,
            "selectCount": sc,
        }

    def sentence_info(self, window_id: int) -> dict:
        sent = self.model.corpus.sentence(window_id)
        rc, sc = self.counters.get("sentence", window_id)
        return {
            "windowId": window_id,
            "docId": sent.doc_id,
            "position": sent.position,
            "text": " ".join(sent.tokens),
            "scdId": self.model.scd_of_window(window_id),
            "responseCount": rc,
            "selectCount": sc,
        }
