"""Evaluation harness: faulty-pair injection, Hellinger metrics, and the
faulty/refreshed/baseline model-comparison workflow.
"""

from __future__ import annotations

import copy
import logging
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import CONSTANT, Corpus, InfluenceProfile, vectorize
from .errors import AlignmentError, NotADistribution, PairingExhausted
from .model import ScdModel, cosine_similarity, normalize_rows
from .updates import refresh
from .usem import MergeConfig, estimate_usem

log = logging.getLogger(__name__)

EPSILON = 1e-9
DEFAULT_DISSIMILARITY_CAP = 0.1
DEFAULT_FAULTY_FRACTION = 0.125


# ---------------------------------------------------------------------------
# faulty pair selection


def choose_faulty_pairs(
    corpus: Corpus,
    fraction: float = DEFAULT_FAULTY_FRACTION,
    seed: int = 0,
    cap: float = DEFAULT_DISSIMILARITY_CAP,
    profile: InfluenceProfile = CONSTANT,
) -> list[tuple[int, int]]:
    """Deterministically pick disjoint sentence pairs that share no concept.

    Returns floor(fraction * |sentences| / 2) pairs whose cosine similarity is
    below `cap`; raises PairingExhausted (carrying the achieved count) when not
    enough dissimilar pairs exist.
    """
    sentences = list(corpus.sentences())
    target = int(fraction * len(sentences)) // 2
    if target < 1:
        raise PairingExhausted(
            f"fraction {fraction} of {len(sentences)} sentences yields no pairs"
        )
    vecs = {s.window_id: vectorize(s, profile, corpus.vocabulary) for s in sentences}
    rng = random.Random(seed)
    pool = sorted(vecs)
    rng.shuffle(pool)
    pairs: list[tuple[int, int]] = []
    while pool and len(pairs) < target:
        a = pool.pop(0)
        partner = None
        for b in pool:
            if cosine_similarity(vecs[a], vecs[b]) < cap:
                partner = b
                break
        if partner is not None:
            pool.remove(partner)
            pairs.append((a, partner))
    if len(pairs) < target:
        raise PairingExhausted(
            f"only {len(pairs)} of {target} dissimilar pairs found", achieved=len(pairs)
        )
    return pairs


# ---------------------------------------------------------------------------
# Hellinger metrics


def hellinger_row(p, q) -> float:
    """Hellinger distance between two discrete probability distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise NotADistribution(f"shape mismatch: {p.shape} vs {q.shape}")
    for name, vec in (("p", p), ("q", q)):
        if (vec < 0).any():
            raise NotADistribution(f"{name} has negative entries")
        if abs(vec.sum() - 1.0) > 1e-9:
            raise NotADistribution(f"{name} sums to {vec.sum()}, not 1")
    return float(np.sqrt(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2)) / np.sqrt(2))


def align_models(a: ScdModel, b: ScdModel) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Window-aligned normalized row matrices for two models over one corpus.

    Row i of each output is the normalized row of the SCD containing window i
    (ordered by window id).  Windows missing from either model are skipped and
    returned as the third element.
    """
    map_a = {wid: sid for sid, scd in a.scds.items() for wid in scd.referenced_windows}
    map_b = {wid: sid for sid, scd in b.scds.items() for wid in scd.referenced_windows}
    common = sorted(set(map_a) & set(map_b))
    skipped = sorted(set(map_a) ^ set(map_b))
    if not common:
        raise AlignmentError("the models share no window ids")
    norm_a = normalize_rows(a.matrix)
    norm_b = normalize_rows(b.matrix)
    vocab_a = {w: i for i, w in enumerate(a.corpus.vocabulary.words)}
    vocab_b = {w: i for i, w in enumerate(b.corpus.vocabulary.words)}
    if vocab_a.keys() != vocab_b.keys():
        raise AlignmentError("the models use different vocabularies")
    mat_a = np.zeros((len(common), len(vocab_a)))
    mat_b = np.zeros((len(common), len(vocab_a)))
    for i, wid in enumerate(common):
        for w, v in norm_a.rows[map_a[wid]].items():
            mat_a[i, vocab_a[w]] = v
        for w, v in norm_b.rows[map_b[wid]].items():
            mat_b[i, vocab_a[w]] = v
    if skipped:
        log.info("alignment skipped %d windows absent from one model", len(skipped))
    return mat_a, mat_b, skipped


def distance_vector(a: ScdModel, b: ScdModel) -> np.ndarray:
    mat_a, mat_b, _ = align_models(a, b)
    return np.array([hellinger_row(mat_a[i], mat_b[i]) for i in range(mat_a.shape[0])])


def metric_proportion_diff(h: np.ndarray, epsilon: float = EPSILON) -> float:
    """Proportion of rows whose distance exceeds epsilon."""
    h = np.asarray(h, dtype=float)
    if h.size == 0:
        return 0.0
    return float((h > epsilon).sum() / h.size)


def metric_avg_distance(h: np.ndarray, epsilon: float = EPSILON) -> float:
    """Mean distance over the rows exceeding epsilon; 0 when none do."""
    h = np.asarray(h, dtype=float)
    nonzero = h[h > epsilon]
    if nonzero.size == 0:
        return 0.0
    return float(nonzero.mean())


# ---------------------------------------------------------------------------
# the workflow


@dataclass
class WorkflowResult:
    k: int
    faulty: ScdModel
    refreshed: ScdModel
    baseline: ScdModel
    metrics: dict[str, float]
    skipped_pairs: list[tuple[int, int]] = field(default_factory=list)
    runtime_seconds: float = 0.0


def run_workflow(
    corpus: Corpus,
    k: int,
    fraction: float = DEFAULT_FAULTY_FRACTION,
    seed: int = 0,
    cap: float = DEFAULT_DISSIMILARITY_CAP,
    profile: InfluenceProfile = CONSTANT,
) -> WorkflowResult:
    """Build faulty, refreshed, and baseline models and compare them.

    The faulty model is built with the chosen pairs force-merged; the refreshed
    model removes the second member of each pair from its shared SCD; the
    baseline is a plain greedy run with the same target count.
    """
    start = time.monotonic()
    if fraction > 0:
        pairs = choose_faulty_pairs(corpus, fraction, seed, cap, profile)
    else:
        pairs = []
    faulty = estimate_usem(corpus, MergeConfig(k, tuple(pairs)), profile)

    refreshed = copy.deepcopy(faulty)
    skipped = []
    for a, b in pairs:
        scd_a = refreshed.scd_of_window(a)
        scd_b = refreshed.scd_of_window(b)
        if scd_a is None or scd_a != scd_b:
            skipped.append((a, b))
            log.info("pair (%d, %d) no longer shares an SCD; skipping", a, b)
            continue
        refresh(refreshed, b, scd_b)

    baseline = estimate_usem(corpus, MergeConfig(k), profile)

    h_fb = distance_vector(faulty, baseline)
    h_fr = distance_vector(faulty, refreshed)
    h_rb = distance_vector(refreshed, baseline)
    metrics = {
        "K": k,
        "pd_fb": metric_proportion_diff(h_fb),
        "pd_fr": metric_proportion_diff(h_fr),
        "pd_rb": metric_proportion_diff(h_rb),
        "avg_fb": metric_avg_distance(h_fb),
        "avg_fr": metric_avg_distance(h_fr),
        "avg_rb": metric_avg_distance(h_rb),
    }
    runtime = time.monotonic() - start
    log.info("workflow K=%d finished in %.2fs (runtime is logged, never asserted)", k, runtime)
    return WorkflowResult(k, faulty, refreshed, baseline, metrics, skipped, runtime)


# ---------------------------------------------------------------------------
# synthetic corpus


def synthetic_corpus(
    n_topics: int = 3,
    sentences_per_topic: int = 40,
    words_per_topic: int = 12,
    seed: int = 7,
) -> Corpus:
    """Deterministic corpus of word-disjoint topics for desk-scale evaluation."""
    rng = random.Random(seed)
    corpus = Corpus()
    for topic in range(n_topics):
        words = [f"t{topic}w{i}" for i in range(words_per_topic)]
        sentences = []
        for _ in range(sentences_per_topic):
            n = rng.randint(4, 8)
            sentences.append(" ".join(rng.choice(words) for _ in range(n)))
        corpus.ingest_plaintext(". ".join(sentences) + ".", f"topic-{topic}")
    return corpus
