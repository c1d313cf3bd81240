"""Retrieval evaluation: average precision, CMC curves, and the seeded
multi-shot trial protocol.

A gallery item is relevant to a query iff their person labels match.
Queries with no relevant gallery item are excluded from the averages and
counted in the report. Camera-based junk filtering (same person seen by the
same camera) is available behind a flag and off by default, since the two
modalities normally come from disjoint cameras.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import pairwise_l2, self_distances
from .pipeline import run_variant
from .types import EmbeddingSet, SimParams, ValidationError


@dataclass(frozen=True)
class EvalReport:
    """Aggregated metrics over one or more trials.

    map is the mean of per_query_ap over the included queries (excluded
    queries hold NaN). cmc[r] is the fraction of included queries whose
    first relevant item appears within rank r + 1, averaged over trials.
    """

    map: float
    cmc: np.ndarray
    per_query_ap: np.ndarray
    trials: int
    seed: int
    excluded: int


def average_precision(ranking: np.ndarray, relevance: np.ndarray) -> float:
    """Mean of precision-at-rank over the relevant items' rank positions.

    ranking is a gallery permutation, best first; relevance a boolean per
    gallery index. Requires at least one relevant item.
    """
    hits = np.asarray(relevance, dtype=bool)[np.asarray(ranking)]
    n_rel = int(hits.sum())
    if n_rel == 0:
        raise ValidationError("average_precision: no relevant gallery item")
    positions = np.flatnonzero(hits) + 1  # 1-based ranks of the relevant items
    precision_at = np.cumsum(hits)[positions - 1] / positions
    return float(precision_at.sum() / n_rel)


def cmc_curve(
    rankings: np.ndarray, relevance: np.ndarray, max_rank: int
) -> np.ndarray:
    """Cumulative matching characteristic over the included queries.

    cmc[r] = fraction of queries whose first relevant item appears at rank
    <= r + 1. Queries with no relevant item are excluded.
    """
    rankings = np.atleast_2d(np.asarray(rankings))
    relevance = np.atleast_2d(np.asarray(relevance, dtype=bool))
    n_q, n_g = rankings.shape
    if max_rank < 1 or max_rank > n_g:
        raise ValidationError(f"max_rank={max_rank} out of range for gallery of {n_g}")
    first_hits = []
    for i in range(n_q):
        hits = np.flatnonzero(relevance[i][rankings[i]])
        if hits.size:
            first_hits.append(hits[0] + 1)
    if not first_hits:
        raise ValidationError("cmc_curve: no query has a relevant gallery item")
    first = np.asarray(first_hits)
    ranks = np.arange(1, max_rank + 1)
    return (first[None, :] <= ranks[:, None]).mean(axis=1)


def evaluate_rankings(
    rankings: np.ndarray, relevance: np.ndarray, max_rank: int
) -> tuple[np.ndarray, np.ndarray]:
    """Single-trial per-query AP (NaN where excluded) and CMC curve."""
    rankings = np.atleast_2d(np.asarray(rankings))
    relevance = np.atleast_2d(np.asarray(relevance, dtype=bool))
    ap = np.full(rankings.shape[0], np.nan)
    for i in range(rankings.shape[0]):
        if relevance[i].any():
            ap[i] = average_precision(rankings[i], relevance[i])
    cmc = cmc_curve(rankings, relevance, max_rank)
    return ap, cmc


def relevance_matrix(query_persons: np.ndarray, gallery_persons: np.ndarray) -> np.ndarray:
    return np.asarray(query_persons)[:, None] == np.asarray(gallery_persons)[None, :]


def _strip_junk(
    rankings: np.ndarray, relevance: np.ndarray, q_set: EmbeddingSet, g_set: EmbeddingSet
) -> tuple[list[np.ndarray], np.ndarray]:
    """Remove same-person same-camera gallery items from each query's view."""
    g_cam = np.array([-1 if s.camera is None else s.camera for s in g_set.samples])
    g_per = g_set.persons
    stripped = []
    relevance = relevance.copy()
    for i, s in enumerate(q_set.samples):
        cam = -1 if s.camera is None else s.camera
        junk = (g_per == s.person) & (g_cam == cam) & (cam != -1)
        stripped.append(rankings[i][~junk[rankings[i]]])
        relevance[i] &= ~junk
    return stripped, relevance


def multi_shot_trials(
    query: EmbeddingSet,
    gallery: EmbeddingSet,
    params: SimParams,
    *,
    variant: str = "sim",
    trials: int = 10,
    shot: int = 10,
    seed: int = 0,
    max_rank: int = 20,
    camera_filter: bool = False,
    full_gallery: bool = False,
    normalize_sgr: bool = False,
) -> EvalReport:
    """Repeatedly sample a per-identity gallery, re-rank, and average metrics.

    Each trial draws shot images per gallery identity (all of them when an
    identity has fewer) with its own child of the master seed; numpy's
    SeedSequence spawning keeps the per-trial streams reproducible across
    platforms and independent of any parallelism. full_gallery skips the
    sampling and evaluates every gallery image once.
    """
    if trials < 1:
        raise ValidationError("trials must be positive")
    if shot < 1 and not full_gallery:
        raise ValidationError("shot must be positive")
    if full_gallery:
        trials = 1
    persons = gallery.persons
    unique_persons = np.unique(persons)
    children = np.random.SeedSequence(seed).spawn(trials)
    ap_trials = []
    cmc_trials = []
    for t in range(trials):
        if full_gallery:
            sub = gallery
        else:
            rng = np.random.default_rng(children[t])
            chosen = []
            for person in unique_persons:
                pool = np.flatnonzero(persons == person)
                take = min(shot, pool.size)
                chosen.append(rng.choice(pool, size=take, replace=False))
            sub = gallery.subset(np.sort(np.concatenate(chosen)))
        if len(sub) == 0:
            raise ValidationError("empty gallery after sampling")
        dqg = pairwise_l2(query, sub)
        dgg = self_distances(sub)
        result = run_variant(dqg, dgg, params, variant)
        relevance = relevance_matrix(query.persons, sub.persons)
        rank = min(max_rank, len(sub))
        if camera_filter:
            stripped, relevance = _strip_junk(result.rankings, relevance, query, sub)
            ap = np.full(len(query), np.nan)
            first_hits = []
            for i, r in enumerate(stripped):
                if relevance[i].any():
                    ap[i] = average_precision(r, relevance[i])
                    first_hits.append(np.flatnonzero(relevance[i][r])[0] + 1)
            if not first_hits:
                raise ValidationError("no query has a relevant gallery item")
            first = np.asarray(first_hits)
            cmc = (first[None, :] <= np.arange(1, rank + 1)[:, None]).mean(axis=1)
        else:
            ap, cmc = evaluate_rankings(result.rankings, relevance, rank)
        ap_trials.append(ap)
        cmc_trials.append(cmc)
    ap_stack = np.vstack(ap_trials)
    counted = ~np.isnan(ap_stack)
    counts = counted.sum(axis=0)
    sums = np.where(counted, ap_stack, 0.0).sum(axis=0)
    per_query = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    valid = counts > 0
    if not valid.any():
        raise ValidationError("no query has a relevant gallery item")
    cmc = np.vstack(cmc_trials).mean(axis=0)
    cmc.flags.writeable = False
    per_query.flags.writeable = False
    return EvalReport(
        map=float(per_query[valid].mean()),
        cmc=cmc,
        per_query_ap=per_query,
        trials=trials,
        seed=seed,
        excluded=int((~valid).sum()),
    )
