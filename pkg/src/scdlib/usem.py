"""Unsupervised model estimation by greedy merging of per-sentence SCDs.

Starts with one SCD per sentence and repeatedly merges the two most
cosine-similar SCDs until the target SCD count is reached.  An optional set of
faulty sentence pairs is force-merged immediately after initialization, before
any greedy step, so the bias propagates into later merges.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .corpus import CONSTANT, Corpus, InfluenceProfile, vectorize
from .errors import ConfigError, DegenerateRow, UnknownScd
from .model import AdditionalData, Scd, ScdMatrix, ScdModel

DEFAULT_LABEL_WORDS = 3


@dataclass(frozen=True)
class MergeConfig:
    target_scd_count: int
    faulty_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.target_scd_count < 1:
            raise ConfigError("target SCD count must be >= 1")
        seen = set()
        for a, b in self.faulty_pairs:
            for wid in (a, b):
                if wid in seen:
                    raise ConfigError(f"window {wid} appears in more than one faulty pair")
                seen.add(wid)


def label_surrogate(row: dict[str, float], n: int, vocab) -> str:
    """Concatenate the n highest-weight words, ties broken by vocabulary order."""
    if n < 1:
        raise ConfigError("label length must be >= 1")
    if not row or all(v == 0.0 for v in row.values()):
        raise DegenerateRow("cannot label an all-zero row")
    ranked = sorted(row, key=lambda w: (-row[w], vocab.index(w)))
    return " ".join(ranked[:n])


def merge_scds(model: ScdModel, a: int, b: int) -> int:
    """Merge SCD b into SCD a (the smaller id survives); returns the survivor."""
    if a == b:
        raise ConfigError("cannot merge an SCD with itself")
    keep, drop = (a, b) if a < b else (b, a)
    scd_keep = model.scd(keep)
    scd_drop = model.scd(drop)
    scd_keep.referenced_windows |= scd_drop.referenced_windows
    model.matrix.add_to_row(keep, model.matrix.row(drop))
    scd_keep.data.relations |= scd_drop.data.relations
    scd_keep.data.label = label_surrogate(
        model.matrix.row(keep), DEFAULT_LABEL_WORDS, model.corpus.vocabulary
    )
    scd_keep.data.label_factor = Fraction(1)
    del model.scds[drop]
    model.matrix.delete_row(drop)
    return keep


class _SimilarityCache:
    """Dense cosine-similarity cache over the active SCD rows."""

    def __init__(self, model: ScdModel, scd_ids: list[int]):
        vocab = model.corpus.vocabulary
        self.index = {sid: i for i, sid in enumerate(scd_ids)}
        self.ids = list(scd_ids)
        self.active = np.ones(len(scd_ids), dtype=bool)
        self.vectors = np.zeros((len(scd_ids), len(vocab)))
        for sid, i in self.index.items():
            for w, v in model.matrix.row(sid).items():
                self.vectors[i, vocab.index(w)] = v
        norms = np.linalg.norm(self.vectors, axis=1)
        norms[norms == 0] = 1.0
        unit = self.vectors / norms[:, None]
        self.sim = unit @ unit.T
        np.fill_diagonal(self.sim, -np.inf)

    def merge(self, keep: int, drop: int) -> None:
        i, j = self.index[keep], self.index[drop]
        self.vectors[i] += self.vectors[j]
        self.active[j] = False
        self.sim[j, :] = -np.inf
        self.sim[:, j] = -np.inf
        norms = np.linalg.norm(self.vectors, axis=1)
        norms[norms == 0] = 1.0
        sims = (self.vectors @ self.vectors[i]) / (norms * norms[i])
        sims[~self.active] = -np.inf
        sims[i] = -np.inf
        self.sim[i, :] = sims
        self.sim[:, i] = sims

    def best_pair(self) -> tuple[int, int]:
        """Most similar active pair; ties resolved by smallest (id, id)."""
        best = self.sim.max()
        rows, cols = np.where(self.sim == best)
        pairs = {
            (self.ids[i], self.ids[j]) if self.ids[i] < self.ids[j] else (self.ids[j], self.ids[i])
            for i, j in zip(rows.tolist(), cols.tolist())
        }
        return min(pairs)


def estimate_usem(
    corpus: Corpus,
    config: MergeConfig,
    profile: InfluenceProfile = CONSTANT,
) -> ScdModel:
    """Build an SCD model by greedy agglomerative merging down to the target count."""
    sentences = list(corpus.sentences())
    if not sentences:
        raise ConfigError("corpus has no sentences")
    if config.target_scd_count > len(sentences):
        raise ConfigError(
            f"target SCD count {config.target_scd_count} exceeds "
            f"sentence count {len(sentences)}"
        )

    model = ScdModel(corpus=corpus, matrix=ScdMatrix(corpus.vocabulary), scds={}, profile=profile)
    window_to_scd: dict[int, int] = {}
    for sent in sentences:
        sid = model.new_scd_id()
        model.scds[sid] = Scd(sid, AdditionalData(), {sent.window_id})
        model.matrix.rows[sid] = vectorize(sent, profile, corpus.vocabulary)
        window_to_scd[sent.window_id] = sid

    cache = _SimilarityCache(model, sorted(model.scds))

    def do_merge(a: int, b: int) -> None:
        keep, drop = (a, b) if a < b else (b, a)
        merge_scds(model, keep, drop)
        cache.merge(keep, drop)

    for a_wid, b_wid in config.faulty_pairs:
        if a_wid not in window_to_scd or b_wid not in window_to_scd:
            raise UnknownScd(f"faulty pair ({a_wid}, {b_wid}) references unknown windows")
        do_merge(window_to_scd[a_wid], window_to_scd[b_wid])

    while len(model.scds) > config.target_scd_count:
        do_merge(*cache.best_pair())

    for scd in model.scds.values():
        scd.data.label = label_surrogate(
            model.matrix.row(scd.scd_id), DEFAULT_LABEL_WORDS, corpus.vocabulary
        )
        scd.data.label_factor = Fraction(1)
    return model
