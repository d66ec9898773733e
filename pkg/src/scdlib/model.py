"""SCD data structures, the supervised matrix estimator, and similarity primitives.

The SCD matrix is stored sparsely: one word -> weight map per SCD.  Preservation
factors are exact rationals so that factor identities (e.g. 1/S + (S-1)/S = 1)
hold without floating-point slack.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .corpus import CONSTANT, Corpus, InfluenceProfile, vectorize
from .errors import (
    DanglingReference,
    DegenerateRow,
    InternalInconsistency,
    NoCandidate,
    UnknownScd,
)

# Relation targets: another SCD, a sentence (window id), or a label hint text.
TARGET_SCD = "scd"
TARGET_SENTENCE = "sentence"
TARGET_LABEL = "label"


def _frac(value) -> Fraction:
    f = Fraction(value)
    if not 0 < f <= 1:
        raise ValueError(f"factor must be in (0, 1], got {f}")
    return f


@dataclass(frozen=True)
class FactoredRelation:
    """A relation carrying an uncertainty factor in (0, 1].

    `target` is an SCD id or window id (int) for scd/sentence targets, or the
    hinted label text (str) for label targets.
    """

    factor: Fraction
    kind: str
    target_type: str
    target: int | str

    def __post_init__(self):
        object.__setattr__(self, "factor", _frac(self.factor))
        if self.target_type not in (TARGET_SCD, TARGET_SENTENCE, TARGET_LABEL):
            raise ValueError(f"bad target type: {self.target_type!r}")

    def scaled(self, factor) -> "FactoredRelation":
        return replace(self, factor=self.factor * Fraction(factor))

    def to_json(self) -> list:
        return [str(self.factor), self.kind, self.target_type, self.target]

    @classmethod
    def from_json(cls, item) -> "FactoredRelation":
        return cls(Fraction(item[0]), item[1], item[2], item[3])


@dataclass
class AdditionalData:
    """The additional data of an SCD: an optional factored label and relations."""

    label: str | None = None
    label_factor: Fraction = Fraction(1)
    relations: set[FactoredRelation] = field(default_factory=set)

    def is_empty(self) -> bool:
        return self.label is None and not self.relations

    def copy(self) -> "AdditionalData":
        return AdditionalData(self.label, self.label_factor, set(self.relations))


@dataclass
class Scd:
    scd_id: int
    data: AdditionalData = field(default_factory=AdditionalData)
    referenced_windows: set[int] = field(default_factory=set)


class ScdMatrix:
    """Sparse K x L nonnegative matrix: one row (word -> weight) per SCD."""

    def __init__(self, vocabulary):
        self.vocabulary = vocabulary
        self.rows: dict[int, dict[str, float]] = {}

    def row(self, scd_id: int) -> dict[str, float]:
        try:
            return self.rows[scd_id]
        except KeyError:
            raise UnknownScd(f"no matrix row for SCD {scd_id}") from None

    def add_to_row(self, scd_id: int, vec: dict[str, float]) -> None:
        row = self.rows.setdefault(scd_id, {})
        for w, v in vec.items():
            row[w] = row.get(w, 0.0) + v

    def subtract_from_row(self, scd_id: int, vec: dict[str, float]) -> None:
        row = self.row(scd_id)
        for w, v in vec.items():
            nv = row.get(w, 0.0) - v
            if nv == 0.0:
                row.pop(w, None)
            else:
                row[w] = nv

    def delete_row(self, scd_id: int) -> None:
        self.rows.pop(scd_id, None)


@dataclass
class ScdModel:
    """The triple (corpus, matrix, SCD set) transformed by every update."""

    corpus: Corpus
    matrix: ScdMatrix
    scds: dict[int, Scd]
    profile: InfluenceProfile = CONSTANT
    version: int = 0
    next_scd_id: int = 1
    # Relation bundles shifted onto sentences by ReFrESH; kept indefinitely.
    sentence_data: dict[int, "SentenceBundle"] = field(default_factory=dict)

    def scd(self, scd_id: int) -> Scd:
        try:
            return self.scds[scd_id]
        except KeyError:
            raise UnknownScd(f"no SCD with id {scd_id}") from None

    def scd_of_window(self, window_id: int) -> int | None:
        for scd in self.scds.values():
            if window_id in scd.referenced_windows:
                return scd.scd_id
        return None

    def new_scd_id(self) -> int:
        sid = self.next_scd_id
        self.next_scd_id += 1
        return sid


@dataclass
class SentenceBundle:
    """Label/relations preserved on a single sentence (ReFrESH step 1 output)."""

    window_id: int
    label: tuple[Fraction, str] | None = None
    relations: list[FactoredRelation] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "windowId": self.window_id,
            "label": [str(self.label[0]), self.label[1]] if self.label else None,
            "relations": sorted((r.to_json() for r in self.relations)),
        }

    @classmethod
    def from_json(cls, obj) -> "SentenceBundle":
        label = obj["label"]
        return cls(
            obj["windowId"],
            (Fraction(label[0]), label[1]) if label else None,
            [FactoredRelation.from_json(r) for r in obj["relations"]],
        )


# ---------------------------------------------------------------------------
# estimation and similarity


def estimate_sem(corpus: Corpus, annotations, profile: InfluenceProfile = CONSTANT) -> ScdMatrix:
    """Supervised estimator: accumulate influence-weighted word counts per SCD."""
    matrix = ScdMatrix(corpus.vocabulary)
    for scd in annotations:
        for wid in sorted(scd.referenced_windows):
            if not corpus.has_window(wid):
                raise DanglingReference(f"SCD {scd.scd_id} references missing window {wid}")
            matrix.add_to_row(scd.scd_id, vectorize(corpus.sentence(wid), profile, corpus.vocabulary))
    return matrix


def normalize_rows(matrix: ScdMatrix) -> ScdMatrix:
    """Row-stochastic copy of the matrix; the original stays unmodified."""
    out = ScdMatrix(matrix.vocabulary)
    for scd_id, row in matrix.rows.items():
        total = sum(row.values())
        if total <= 0:
            raise DegenerateRow(f"row {scd_id} sums to {total}")
        out.rows[scd_id] = {w: v / total for w, v in row.items()}
    return out


def cosine_similarity(u: dict[str, float], v: dict[str, float]) -> float:
    """Cosine of two sparse nonnegative vectors; 0 if either has zero norm."""
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if len(u) > len(v):
        u, v = v, u
    dot = sum(x * v[w] for w, x in u.items() if w in v)
    return dot / (nu * nv)


def most_similar_row(vec, matrix: ScdMatrix, exclude=None) -> tuple[int, float]:
    """Row id maximizing cosine similarity to `vec`; ties go to the smallest id."""
    best_id, best_sim = None, -1.0
    for scd_id in sorted(matrix.rows):
        if exclude and scd_id in exclude:
            continue
        sim = cosine_similarity(vec, matrix.rows[scd_id])
        if sim > best_sim:
            best_id, best_sim = scd_id, sim
    if best_id is None:
        raise NoCandidate("no candidate rows after exclusion")
    return best_id, best_sim


def rebuild_row(model: ScdModel, scd_id: int) -> dict[str, float]:
    """Recompute a row from scratch over the SCD's current referenced windows."""
    scd = model.scd(scd_id)
    fresh: dict[str, float] = {}
    for wid in sorted(scd.referenced_windows):
        for w, v in vectorize(model.corpus.sentence(wid), model.profile, model.corpus.vocabulary).items():
            fresh[w] = fresh.get(w, 0.0) + v
    model.matrix.rows[scd_id] = fresh
    return fresh


def check_consistency(model: ScdModel, tol: float = 1e-9) -> None:
    """Assert row = sum of vectorized referenced sentences for every SCD."""
    if set(model.matrix.rows) != set(model.scds):
        raise InternalInconsistency(
            f"row ids {sorted(model.matrix.rows)} != scd ids {sorted(model.scds)}"
        )
    for scd in model.scds.values():
        if not scd.referenced_windows:
            raise InternalInconsistency(f"SCD {scd.scd_id} references no sentences")
        expected: dict[str, float] = {}
        for wid in scd.referenced_windows:
            if not model.corpus.has_window(wid):
                raise InternalInconsistency(f"SCD {scd.scd_id} references missing window {wid}")
            for w, v in vectorize(model.corpus.sentence(wid), model.profile, model.corpus.vocabulary).items():
                expected[w] = expected.get(w, 0.0) + v
        row = model.matrix.rows.get(scd.scd_id, {})
        keys = set(expected) | set(row)
        for w in keys:
            if abs(expected.get(w, 0.0) - row.get(w, 0.0)) > tol:
                raise InternalInconsistency(
                    f"SCD {scd.scd_id} row mismatch at {w!r}: "
                    f"{row.get(w, 0.0)} != {expected.get(w, 0.0)}"
                )
    seen: dict[int, int] = {}
    for scd in model.scds.values():
        for wid in scd.referenced_windows:
            if wid in seen:
                raise InternalInconsistency(
                    f"window {wid} referenced by SCDs {seen[wid]} and {scd.scd_id}"
                )
            seen[wid] = scd.scd_id


# ---------------------------------------------------------------------------
# serialization

FORMAT = "scd-model/1"


def model_content(model: ScdModel) -> dict:
    """Canonical content dict of a model; excludes the runtime version counter."""
    return {
        "format": FORMAT,
        "influence": {"kind": model.profile.kind},
        "corpus": model.corpus.content(),
        "nextScdId": model.next_scd_id,
        "scds": [
            {
                "scdId": scd.scd_id,
                "label": [str(scd.data.label_factor), scd.data.label] if scd.data.label else None,
                "relations": sorted(r.to_json() for r in scd.data.relations),
                "windows": sorted(scd.referenced_windows),
            }
            for scd in sorted(model.scds.values(), key=lambda s: s.scd_id)
        ],
        "rows": {str(sid): row for sid, row in model.matrix.rows.items()},
        "sentenceData": {str(wid): b.to_json() for wid, b in model.sentence_data.items()},
    }


def serialize_model(model: ScdModel) -> bytes:
    return json.dumps(
        model_content(model), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def model_digest(model: ScdModel) -> str:
    return hashlib.sha256(serialize_model(model)).hexdigest()


def deserialize_model(blob: bytes, version: int = 0) -> ScdModel:
    obj = json.loads(blob.decode("utf-8"))
    if obj.get("format") != FORMAT:
        raise ValueError(f"unsupported model format: {obj.get('format')!r}")
    corpus = Corpus.from_content(obj["corpus"])
    profile = InfluenceProfile(obj["influence"]["kind"])
    matrix = ScdMatrix(corpus.vocabulary)
    for sid, row in obj["rows"].items():
        matrix.rows[int(sid)] = dict(row)
    scds = {}
    for s in obj["scds"]:
        label = s["label"]
        data = AdditionalData(
            label=label[1] if label else None,
            label_factor=Fraction(label[0]) if label else Fraction(1),
            relations={FactoredRelation.from_json(r) for r in s["relations"]},
        )
        scds[s["scdId"]] = Scd(s["scdId"], data, set(s["windows"]))
    sentence_data = {
        int(wid): SentenceBundle.from_json(b) for wid, b in obj["sentenceData"].items()
    }
    return ScdModel(
        corpus=corpus,
        matrix=matrix,
        scds=scds,
        profile=profile,
        version=version,
        next_scd_id=obj["nextScdId"],
        sentence_data=sentence_data,
    )
