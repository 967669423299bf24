"""Cosine similarity matrices and their weighted fusion.

Each modality's feature matrix becomes an N x N cosine-similarity matrix;
fusion is the convex combination of those matrices with weights fitted
against the ground truth's recommendation rankings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionMismatchError(ValueError):
    """Matrices disagree on movies or order."""


class WeightCountMismatchError(ValueError):
    """Weight vector length differs from the matrix count."""


@dataclass
class SimilarityMatrix:
    values: np.ndarray        # N x N, symmetric
    doc_ids: list[str]
    modality: str = ""

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def check(self, atol: float = 1e-12) -> None:
        v = self.values
        if v.shape[0] != v.shape[1] or v.shape[0] != len(self.doc_ids):
            raise DimensionMismatchError("similarity matrix must be square over doc_ids")
        if np.abs(v - v.T).max() >= atol:
            raise ValueError("similarity matrix is not symmetric")


@dataclass
class FusionWeights:
    modalities: list[str]
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if np.any(self.weights < 0):
            raise ValueError("fusion weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"fusion weights must sum to 1, got {self.weights.sum()!r}")

    def as_dict(self) -> dict[str, float]:
        return {m: float(w) for m, w in zip(self.modalities, self.weights)}


def cosine_matrix(features: np.ndarray, doc_ids: list[str], modality: str = "") -> SimilarityMatrix:
    """Pairwise cosine similarity of feature rows.

    Zero-norm rows get similarity 0 against everything, themselves included,
    so the diagonal is exactly 1 where the row vector is nonzero and 0
    elsewhere.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise ValueError("need an N x D feature matrix with N >= 2")
    if features.shape[0] != len(doc_ids):
        raise DimensionMismatchError("doc_ids length must equal the number of rows")

    norms = np.linalg.norm(features, axis=1)
    nonzero = norms > 0
    unit = np.zeros_like(features)
    unit[nonzero] = features[nonzero] / norms[nonzero, None]
    values = unit @ unit.T
    values = (values + values.T) / 2.0
    values = np.clip(values, -1.0, 1.0)
    values[np.diag_indices_from(values)] = np.where(nonzero, 1.0, 0.0)
    return SimilarityMatrix(values=values, doc_ids=list(doc_ids), modality=modality)


def fuse(matrices: list[SimilarityMatrix], weights: FusionWeights) -> SimilarityMatrix:
    """Weighted average of aligned similarity matrices."""
    if len(matrices) != len(weights.weights):
        raise WeightCountMismatchError(
            f"{len(weights.weights)} weights for {len(matrices)} matrices"
        )
    reference = matrices[0].doc_ids
    for m in matrices:
        if m.doc_ids != reference:
            raise DimensionMismatchError("matrices must share doc_ids and order")
    values = np.zeros_like(matrices[0].values)
    for w, m in zip(weights.weights, matrices):
        values += w * m.values
    return SimilarityMatrix(values=values, doc_ids=list(reference), modality="fused")


# --------------------------------------------------------------------------
# Weight fitting
# --------------------------------------------------------------------------

@dataclass
class WeightSearchReport:
    method: str
    seed: int
    n_evaluated: int
    objective: tuple[float, float, float]
    weights: dict[str, float]
    baselines: dict[str, tuple[float, float, float]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "n_evaluated": self.n_evaluated,
            "objective": {
                "median_rank_1st": self.objective[0],
                "top10_pct_1st": -self.objective[1],
                "median_rank_2nd": self.objective[2],
            },
            "weights": self.weights,
            "baselines": {
                name: {
                    "median_rank_1st": obj[0],
                    "top10_pct_1st": -obj[1],
                    "median_rank_2nd": obj[2],
                }
                for name, obj in self.baselines.items()
            },
        }


def _rank_objective(
    stacked: np.ndarray,
    weights: np.ndarray,
    gt_ranks: np.ndarray,
    id_rank: np.ndarray,
) -> tuple[float, float, float]:
    """(median rank of 1st rec, -top10% of 1st, median rank of 2nd)."""
    fused = np.tensordot(weights, stacked, axes=1)
    np.fill_diagonal(fused, -np.inf)  # self excluded from recommendations
    order = np.lexsort((np.broadcast_to(id_rank, fused.shape), -fused), axis=1)
    first = order[:, 0]
    second = order[:, 1]
    queries = np.arange(fused.shape[0])
    ranks1 = gt_ranks[queries, first]
    ranks2 = gt_ranks[queries, second]
    return (
        float(np.median(ranks1)),
        -float(100.0 * np.mean(ranks1 <= 10)),
        float(np.median(ranks2)),
    )


def _simplex_grid(step: float) -> list[np.ndarray]:
    n = round(1.0 / step)
    return [np.array([i / n, 1.0 - i / n]) for i in range(n + 1)]


def fit_weights(
    matrices: list[SimilarityMatrix],
    ground_truth: SimilarityMatrix,
    grid_step: float = 0.01,
    n_samples: int = 10_000,
    seed: int = 42,
    refine: bool = True,
) -> tuple[FusionWeights, WeightSearchReport]:
    """Search the weight simplex for the best recommendation rankings.

    The objective is lexicographic: minimize the median ground-truth rank
    of the first recommendation, then maximize its top-10 percentage, then
    minimize the median rank of the second recommendation.  Two modalities
    are searched exhaustively at grid_step; three or more use n_samples
    seeded random simplex points plus coordinate refinement.  Vertex and
    uniform weight vectors are always evaluated, so the returned objective
    is never worse than any of them.  Deterministic for a fixed seed.
    """
    if len(matrices) < 2:
        raise ValueError("fit_weights needs at least two matrices")
    reference = matrices[0].doc_ids
    for m in matrices:
        if m.doc_ids != reference:
            raise DimensionMismatchError("matrices must share doc_ids and order")
    if ground_truth.doc_ids != reference:
        raise DimensionMismatchError("ground truth must share doc_ids and order")

    from .evaluation import gt_rank_matrix  # local import to avoid a cycle

    n_mod = len(matrices)
    stacked = np.stack([m.values for m in matrices])
    gt_ranks = gt_rank_matrix(ground_truth.values)
    id_rank = np.argsort(np.argsort(reference))  # lexicographic tie-break order

    def objective(w: np.ndarray) -> tuple[float, float, float]:
        return _rank_objective(stacked, w, gt_ranks, id_rank)

    evaluated = 0
    best_w: np.ndarray | None = None
    best_obj: tuple[float, float, float] | None = None

    def consider(w: np.ndarray) -> None:
        nonlocal evaluated, best_w, best_obj
        evaluated += 1
        obj = objective(w)
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_w = w.copy()

    baselines: dict[str, tuple[float, float, float]] = {}
    for i, m in enumerate(matrices):
        vertex = np.zeros(n_mod)
        vertex[i] = 1.0
        baselines[m.modality or f"matrix{i}"] = objective(vertex)
        consider(vertex)
    uniform = np.full(n_mod, 1.0 / n_mod)
    baselines["uniform"] = objective(uniform)
    consider(uniform)

    if n_mod == 2:
        method = "grid"
        for w in _simplex_grid(grid_step):
            consider(w)
    else:
        method = "random-simplex"
        rng = np.random.default_rng(seed)
        for w in rng.dirichlet(np.ones(n_mod), size=n_samples):
            consider(w)

    if refine:
        method += "+refine"
        for step in (0.1, 0.05, 0.02, 0.01):
            improved = True
            while improved:
                improved = False
                for i in range(n_mod):
                    for delta in (step, -step):
                        trial = best_w.copy()
                        trial[i] = max(trial[i] + delta, 0.0)
                        total = trial.sum()
                        if total <= 0:
                            continue
                        trial /= total
                        previous = best_obj
                        consider(trial)
                        if best_obj < previous:
                            improved = True

    modalities = [m.modality or f"matrix{i}" for i, m in enumerate(matrices)]
    weights = FusionWeights(modalities=modalities, weights=best_w)
    report = WeightSearchReport(
        method=method,
        seed=seed,
        n_evaluated=evaluated,
        objective=best_obj,
        weights=weights.as_dict(),
        baselines=baselines,
    )
    return weights, report
