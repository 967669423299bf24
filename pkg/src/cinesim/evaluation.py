"""Recommendation-ranking evaluation against a ground-truth similarity matrix.

Per query movie, the model's first and second recommendations are looked up
in the ground-truth ranking; reports carry the median positions and top-10
percentages for both, mirroring the four-column evaluation layout.  Paired
rank differences between two models are tested with the Wilcoxon
signed-rank test (exact null distribution for small n).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .metadata import MovieMetadata
from .similarity import SimilarityMatrix, cosine_matrix


class AllZeroDifferencesWarning(UserWarning):
    """Every paired rank difference is zero; p = 1 sentinel returned."""


@dataclass
class EvalReport:
    model: str
    n_queries: int
    median_rank_1st: float
    top10_pct_1st: float
    median_rank_2nd: float
    top10_pct_2nd: float
    ranks_1st: np.ndarray = field(repr=False, default=None)
    ranks_2nd: np.ndarray = field(repr=False, default=None)
    wilcoxon: dict | None = None

    def as_dict(self) -> dict:
        out = {
            "model": self.model,
            "n_queries": self.n_queries,
            "median_rank_1st": self.median_rank_1st,
            "top10_pct_1st": self.top10_pct_1st,
            "median_rank_2nd": self.median_rank_2nd,
            "top10_pct_2nd": self.top10_pct_2nd,
        }
        if self.wilcoxon is not None:
            out["wilcoxon"] = self.wilcoxon
        return out


def ground_truth_from_tags(tag_matrix: np.ndarray, doc_ids: list[str]) -> SimilarityMatrix:
    """Cosine similarity of per-movie tag relevance rows."""
    return cosine_matrix(tag_matrix, doc_ids, modality="ground-truth")


# --------------------------------------------------------------------------
# Ranks and recommendations
# --------------------------------------------------------------------------

def gt_rank(query: int, candidate: int, gt_values: np.ndarray) -> int:
    """Competition rank: 1 + number of strictly more similar candidates."""
    if query == candidate:
        raise ValueError("candidate must differ from query")
    row = gt_values[query]
    others = np.delete(np.arange(row.size), query)
    return 1 + int(np.sum(row[others] > row[candidate]))


def gt_rank_matrix(gt_values: np.ndarray) -> np.ndarray:
    """rank[q, c] for all pairs; the diagonal is a placeholder 0."""
    n = gt_values.shape[0]
    ranks = np.zeros((n, n), dtype=np.int64)
    for q in range(n):
        row = gt_values[q]
        mask = np.ones(n, dtype=bool)
        mask[q] = False
        vals = row[mask]
        ranks[q, mask] = 1 + (vals[None, :] > vals[:, None]).sum(axis=1)
    return ranks


def _id_rank(doc_ids: list[str]) -> np.ndarray:
    return np.argsort(np.argsort(doc_ids))


def recommendation_order(model: SimilarityMatrix) -> np.ndarray:
    """Per-query candidate indices, most similar first, self excluded.

    Ties are broken by ascending movie_id; row q lists the other N-1 movies.
    """
    values = model.values.copy()
    np.fill_diagonal(values, -np.inf)
    id_rank = _id_rank(model.doc_ids)
    order = np.lexsort((np.broadcast_to(id_rank, values.shape), -values), axis=1)
    return order[:, :-1]  # self sorts last


def recommend(model: SimilarityMatrix, query: str, n: int) -> list[str]:
    """Top-n movie_ids for one query movie."""
    idx = model.doc_ids.index(query)
    if n > model.n - 1:
        raise ValueError(f"n must be at most {model.n - 1}")
    order = recommendation_order(model)
    return [model.doc_ids[c] for c in order[idx, :n]]


def ranking_table(model: SimilarityMatrix, gt: SimilarityMatrix) -> list[dict]:
    """Per query: ordered candidates with model rank and ground-truth rank."""
    if model.doc_ids != gt.doc_ids:
        raise ValueError("model and ground truth must share doc_ids and order")
    order = recommendation_order(model)
    gt_ranks = gt_rank_matrix(gt.values)
    table = []
    for q, movie_id in enumerate(model.doc_ids):
        table.append(
            {
                "query": movie_id,
                "candidates": [
                    {
                        "movie_id": model.doc_ids[c],
                        "model_rank": r + 1,
                        "gt_rank": int(gt_ranks[q, c]),
                    }
                    for r, c in enumerate(order[q])
                ],
            }
        )
    return table


def evaluate(model: SimilarityMatrix, gt: SimilarityMatrix, top_cutoff: int = 10) -> EvalReport:
    """Median rank and top-10 percentage of the 1st and 2nd recommendations.

    Medians interpolate (average the middle two) for an even query count.
    """
    if model.doc_ids != gt.doc_ids:
        raise ValueError("model and ground truth must share doc_ids and order")
    if model.n < 3:
        raise ValueError("evaluation needs at least 3 movies")
    order = recommendation_order(model)
    gt_ranks = gt_rank_matrix(gt.values)
    queries = np.arange(model.n)
    ranks_1st = gt_ranks[queries, order[:, 0]]
    ranks_2nd = gt_ranks[queries, order[:, 1]]
    return EvalReport(
        model=model.modality,
        n_queries=model.n,
        median_rank_1st=float(np.median(ranks_1st)),
        top10_pct_1st=float(100.0 * np.mean(ranks_1st <= top_cutoff)),
        median_rank_2nd=float(np.median(ranks_2nd)),
        top10_pct_2nd=float(100.0 * np.mean(ranks_2nd <= top_cutoff)),
        ranks_1st=ranks_1st,
        ranks_2nd=ranks_2nd,
    )


def format_report_table(reports: list[EvalReport]) -> str:
    """The four-measure text table, one row per model."""
    headers = (
        "Model",
        "Median Ranking 1st Rec",
        "Top 10% of 1st Rec",
        "Median Ranking 2nd Rec",
        "Top 10% of 2nd Rec",
    )
    rows = [
        (
            r.model,
            f"{r.median_rank_1st:g}",
            f"{r.top10_pct_1st:.1f}",
            f"{r.median_rank_2nd:g}",
            f"{r.top10_pct_2nd:.1f}",
        )
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    def fmt(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths))
    lines = [fmt(headers), "-+-".join("-" * w for w in widths)]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Wilcoxon signed-rank test
# --------------------------------------------------------------------------

def _signed_ranks(differences: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks of |d| (ties shared) and the signs, zeros removed."""
    nonzero = differences[differences != 0]
    magnitudes = np.abs(nonzero)
    order = np.argsort(magnitudes, kind="stable")
    ranks = np.empty(len(magnitudes))
    sorted_mags = magnitudes[order]
    i = 0
    while i < len(sorted_mags):
        j = i
        while j + 1 < len(sorted_mags) and sorted_mags[j + 1] == sorted_mags[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # average rank of the tie run
        i = j + 1
    return ranks, np.sign(nonzero)


def _exact_lower_tail(scaled_ranks: np.ndarray, scaled_w: int) -> float:
    """P(W <= w) over all 2^n sign assignments, by subset-sum counting."""
    total = int(scaled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in scaled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    return float(counts[: scaled_w + 1].sum() / 2 ** len(scaled_ranks))


def wilcoxon_signed_rank(
    ranks_a: np.ndarray, ranks_b: np.ndarray, mode: str = "auto", exact_limit: int = 25
) -> dict:
    """Paired one-sided test of "model A ranks lower (better) than model B".

    Zero differences are dropped; tied absolute differences share average
    ranks.  W = min(W+, W-); the one-sided p is the lower tail of the rank
    sum favoring B (exact for n <= exact_limit, otherwise a tie-corrected
    normal approximation with continuity correction).
    """
    if mode not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown mode {mode!r}")
    a = np.asarray(ranks_a, dtype=np.float64)
    b = np.asarray(ranks_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")

    d = b - a  # positive difference = A ranked lower = A better
    if np.all(d == 0):
        warnings.warn(
            "all paired differences are zero; returning p = 1",
            AllZeroDifferencesWarning,
        )
        return {"n": 0, "W": 0.0, "z": 0.0, "p_one_sided": 1.0}

    ranks, signs = _signed_ranks(d)
    n = len(ranks)
    w_plus = float(ranks[signs > 0].sum())
    w_minus = float(ranks[signs < 0].sum())
    w = min(w_plus, w_minus)

    mean = n * (n + 1) / 4.0
    tie_sizes = np.unique(ranks, return_counts=True)[1]
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - float(
        ((tie_sizes**3 - tie_sizes) / 48.0).sum()
    )
    sd = np.sqrt(variance) if variance > 0 else 1.0
    z = (w_minus - mean + 0.5) / sd

    use_exact = mode == "exact" or (mode == "auto" and n <= exact_limit)
    if use_exact:
        scaled = np.rint(2 * ranks).astype(np.int64)  # average ranks are multiples of 1/2
        p = _exact_lower_tail(scaled, int(round(2 * w_minus)))
    else:
        p = float(norm.cdf(z))
    p = min(max(p, np.nextafter(0, 1)), 1.0)
    return {"n": n, "W": w, "z": float(z), "p_one_sided": p}


# --------------------------------------------------------------------------
# Genre / director differentiation
# --------------------------------------------------------------------------

def group_differentiation(
    model: SimilarityMatrix,
    metadata: list[MovieMetadata],
    group_by: str = "genre",
    n_recs: int = 2,
    min_population: int = 4,
) -> dict[str, dict]:
    """Average same-group fraction among each movie's top recommendations.

    Groups with fewer than min_population movies are flagged low_support.
    """
    if group_by not in ("genre", "director"):
        raise ValueError("group_by must be 'genre' or 'director'")
    by_id = {m.movie_id: m for m in metadata}
    labels: dict[str, set[str]] = {}
    for movie_id in model.doc_ids:
        meta = by_id.get(movie_id)
        labels[movie_id] = set(meta.normalized(group_by)) if meta else set()

    order = recommendation_order(model)
    top = order[:, :n_recs]

    groups: dict[str, list[float]] = {}
    for q, movie_id in enumerate(model.doc_ids):
        recs = [model.doc_ids[c] for c in top[q]]
        for group in labels[movie_id]:
            shared = sum(1 for r in recs if group in labels[r]) / len(recs)
            groups.setdefault(group, []).append(shared)

    return {
        group: {
            "ratio": float(np.mean(fractions)),
            "n_movies": len(fractions),
            "low_support": len(fractions) < min_population,
        }
        for group, fractions in sorted(groups.items())
    }
