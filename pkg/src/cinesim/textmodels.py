"""Per-movie text representations: tf-idf weighting, LSI concepts, LDA topics.

tf-idf uses the base-2 log inverse document frequency.  LSI is a truncated
SVD of the tf-idf matrix with documents mapped to U*Sigma (inner-product
preserving).  LDA is inferred by collapsed Gibbs sampling with Minka
fixed-point updates of the Dirichlet hyperparameters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import svds
from scipy.special import gammaln, psi

from .subtitles import BowMatrix, Vocabulary


class RankDeficientWarning(UserWarning):
    """Fewer nonzero singular values than requested concepts."""


@dataclass
class TfIdfMatrix:
    weights: sparse.csr_matrix    # n_docs x n_terms
    vocabulary: Vocabulary
    doc_ids: list[str]


@dataclass
class LsiModel:
    n_concepts: int
    term_concepts: np.ndarray     # V x T, orthonormal columns
    singular_values: np.ndarray   # T, non-increasing
    doc_embedding: np.ndarray     # N x T  (U * Sigma)
    vocabulary: Vocabulary
    doc_ids: list[str]


@dataclass
class LdaModel:
    n_topics: int
    alpha: np.ndarray             # K, document-topic prior
    eta: float                    # scalar topic-word prior
    topic_word: np.ndarray        # K x V, rows sum to 1
    doc_topic: np.ndarray         # N x K, rows sum to 1
    assignments: list[np.ndarray] # per-document token topic ids
    token_words: list[np.ndarray] # per-document word ids, aligned with assignments
    n_dk: np.ndarray              # N x K
    n_kw: np.ndarray              # K x V
    n_k: np.ndarray               # K
    vocabulary: Vocabulary
    doc_ids: list[str]
    seed: int
    sweeps: int
    burn_in: int
    log_likelihood: list[tuple[int, float]] = field(default_factory=list)


@dataclass
class TextFeatureMatrix:
    kind: str                     # tfidf | lsi | lda
    matrix: np.ndarray            # N x D dense
    doc_ids: list[str]


# --------------------------------------------------------------------------
# tf-idf
# --------------------------------------------------------------------------

def tfidf(bow: BowMatrix, vocabulary: Vocabulary) -> TfIdfMatrix:
    """weight(i, d) = tf_{i,d} * log2(N / n_i)."""
    if bow.n_docs == 0 or bow.n_terms == 0:
        raise ValueError("tfidf requires a nonempty bag-of-words matrix")
    idf = np.log2(bow.n_docs / vocabulary.doc_freq.astype(np.float64))
    weights = bow.counts.astype(np.float64).multiply(sparse.csr_matrix(idf)).tocsr()
    return TfIdfMatrix(weights=weights, vocabulary=vocabulary, doc_ids=list(bow.doc_ids))


# --------------------------------------------------------------------------
# LSI
# --------------------------------------------------------------------------

def _svd_sign_fix(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # deterministic sign: largest-|.| term coefficient of each concept positive
    for j in range(vt.shape[0]):
        pivot = np.argmax(np.abs(vt[j]))
        if vt[j, pivot] < 0:
            vt[j] *= -1
            u[:, j] *= -1
    return u, vt


def fit_lsi(weights: TfIdfMatrix | BowMatrix, n_concepts: int = 55) -> LsiModel:
    """Truncated rank-T SVD of the (tf-idf) document-term matrix.

    Accepts a BowMatrix for the raw-count variant.  If the matrix has fewer
    than T nonzero singular values the model keeps the available rank and a
    RankDeficientWarning is emitted.
    """
    if isinstance(weights, BowMatrix):
        matrix = weights.counts.astype(np.float64).tocsr()
        vocabulary = None
        doc_ids = list(weights.doc_ids)
    else:
        matrix = weights.weights
        vocabulary = weights.vocabulary
        doc_ids = list(weights.doc_ids)

    n_docs, n_terms = matrix.shape
    max_rank = min(n_docs, n_terms)
    if not 1 <= n_concepts <= max_rank:
        raise ValueError(f"n_concepts must be in [1, {max_rank}], got {n_concepts}")

    if n_concepts < max_rank:
        # fixed ARPACK starting vector: runs must be bit-reproducible
        v0 = np.random.default_rng(0).uniform(-1.0, 1.0, size=max_rank)
        try:
            u, s, vt = svds(matrix, k=n_concepts, tol=0, solver="arpack", v0=v0)
        except Exception:  # degenerate input (e.g. zero matrix): dense fallback
            u, s, vt = np.linalg.svd(matrix.toarray(), full_matrices=False)
            u, s, vt = u[:, :n_concepts], s[:n_concepts], vt[:n_concepts]
        order = np.argsort(s)[::-1]
        u, s, vt = u[:, order], s[order], vt[order]
    else:
        u, s, vt = np.linalg.svd(matrix.toarray(), full_matrices=False)
        u, s, vt = u[:, :n_concepts], s[:n_concepts], vt[:n_concepts]

    cutoff = s[0] * max(n_docs, n_terms) * np.finfo(np.float64).eps if s.size else 0.0
    rank = int(np.sum(s > cutoff))
    if rank < n_concepts:
        warnings.warn(
            f"matrix rank {rank} is below the requested {n_concepts} concepts; "
            "keeping the available rank",
            RankDeficientWarning,
        )
        u, s, vt = u[:, :rank], s[:rank], vt[:rank]

    u, vt = _svd_sign_fix(u, vt)
    return LsiModel(
        n_concepts=len(s),
        term_concepts=np.ascontiguousarray(vt.T),
        singular_values=s,
        doc_embedding=u * s,
        vocabulary=vocabulary,
        doc_ids=doc_ids,
    )


# --------------------------------------------------------------------------
# LDA by collapsed Gibbs sampling
# --------------------------------------------------------------------------

@dataclass
class GibbsState:
    """Internal sampler state exposed to the on_sweep inspection hook."""

    z: np.ndarray            # topic id per token
    token_docs: np.ndarray   # document index per token
    token_words: np.ndarray  # word index per token
    n_dk: np.ndarray
    n_kw: np.ndarray
    n_k: np.ndarray
    alpha: np.ndarray
    eta: float


def _expand_tokens(bow: BowMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Flatten counts into one (doc, word) entry per token, term-ordered."""
    coo = bow.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    docs = np.repeat(coo.row[order], coo.data[order])
    words = np.repeat(coo.col[order], coo.data[order])
    return docs.astype(np.int64), words.astype(np.int64)


def _count_from_assignments(
    z: np.ndarray, docs: np.ndarray, words: np.ndarray, n_docs: int, k: int, v: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_dk = np.zeros((n_docs, k), dtype=np.float64)
    n_wk = np.zeros((v, k), dtype=np.float64)
    np.add.at(n_dk, (docs, z), 1.0)
    np.add.at(n_wk, (words, z), 1.0)
    return n_dk, n_wk, n_wk.sum(axis=0)


def _numpy_sweep(z, docs, words, n_dk, n_wk, n_k, alpha, eta, eta_v, us):
    k = n_k.shape[0]
    for i in range(z.shape[0]):
        d = docs[i]
        w = words[i]
        old = z[i]
        nd = n_dk[d]
        nw = n_wk[w]
        nd[old] -= 1.0
        nw[old] -= 1.0
        n_k[old] -= 1.0
        p = (nd + alpha) * (nw + eta) / (n_k + eta_v)
        cp = np.cumsum(p)
        new = int(np.searchsorted(cp, us[i] * cp[-1], side="right"))
        if new == k:
            new = k - 1
        z[i] = new
        nd[new] += 1.0
        nw[new] += 1.0
        n_k[new] += 1.0


try:  # compiled sweep; falls back to the numpy loop without numba
    from numba import njit

    @njit(cache=True)
    def _jit_sweep(z, docs, words, n_dk, n_wk, n_k, alpha, eta, eta_v, us):  # pragma: no cover
        k = n_k.shape[0]
        cumulative = np.empty(k)
        for i in range(z.shape[0]):
            d = docs[i]
            w = words[i]
            old = z[i]
            n_dk[d, old] -= 1.0
            n_wk[w, old] -= 1.0
            n_k[old] -= 1.0
            total = 0.0
            for j in range(k):
                total += (n_dk[d, j] + alpha[j]) * (n_wk[w, j] + eta) / (n_k[j] + eta_v)
                cumulative[j] = total
            r = us[i] * total
            new = 0
            while new < k - 1 and cumulative[new] <= r:
                new += 1
            z[i] = new
            n_dk[d, new] += 1.0
            n_wk[w, new] += 1.0
            n_k[new] += 1.0

except ImportError:  # pragma: no cover
    _jit_sweep = None


def _minka_alpha(alpha: np.ndarray, n_dk: np.ndarray, iters: int = 10) -> np.ndarray:
    n_d = n_dk.sum(axis=1)
    n_docs = n_dk.shape[0]
    for _ in range(iters):
        alpha_sum = alpha.sum()
        num = psi(n_dk + alpha).sum(axis=0) - n_docs * psi(alpha)
        den = (psi(n_d + alpha_sum) - psi(alpha_sum)).sum()
        if den <= 0:
            break
        new = np.maximum(alpha * num / den, 1e-8)
        if np.max(np.abs(new - alpha)) < 1e-6:
            alpha = new
            break
        alpha = new
    return alpha


def _minka_eta(eta: float, n_kw: np.ndarray, iters: int = 10) -> float:
    k, v = n_kw.shape
    n_k = n_kw.sum(axis=1)
    for _ in range(iters):
        num = psi(n_kw + eta).sum() - k * v * psi(eta)
        den = v * (psi(n_k + v * eta).sum() - k * psi(v * eta))
        if den <= 0:
            break
        new = max(float(eta * num / den), 1e-8)
        if abs(new - eta) < 1e-8:
            eta = new
            break
        eta = new
    return eta


def collapsed_log_likelihood(
    n_dk: np.ndarray, n_kw: np.ndarray, n_k: np.ndarray, alpha: np.ndarray, eta: float
) -> float:
    """log P(w, z | alpha, eta) with theta and beta integrated out."""
    k, v = n_kw.shape
    alpha_sum = alpha.sum()
    n_d = n_dk.sum(axis=1)
    ll = k * (gammaln(v * eta) - v * gammaln(eta))
    ll += gammaln(n_kw + eta).sum() - gammaln(n_k + v * eta).sum()
    ll += n_dk.shape[0] * (gammaln(alpha_sum) - gammaln(alpha).sum())
    ll += gammaln(n_dk + alpha).sum() - gammaln(n_d + alpha_sum).sum()
    return float(ll)


def fit_lda(
    bow: BowMatrix,
    vocabulary: Vocabulary,
    n_topics: int = 55,
    sweeps: int = 1000,
    burn_in: int = 100,
    seed: int = 42,
    optimize_hyperparameters: bool = True,
    optimize_every: int = 20,
    likelihood_every: int = 10,
    average_samples: bool = False,
    on_sweep: Callable[[int, GibbsState], None] | None = None,
) -> LdaModel:
    """Collapsed Gibbs sampling for LDA.

    Each sweep resamples every token's topic from
    P(z=k) proportional to (n_dk + alpha_k) * (n_kw + eta) / (n_k + V*eta),
    all counts excluding the current token.  alpha (asymmetric) and eta
    (symmetric scalar) are refreshed by Minka's fixed point every
    optimize_every sweeps after burn-in.  Results are bit-reproducible for
    a fixed seed.
    """
    if n_topics < 1:
        raise ValueError("n_topics must be at least 1")
    if not sweeps > burn_in >= 0:
        raise ValueError(f"need sweeps > burn_in >= 0, got {sweeps}/{burn_in}")

    n_docs, n_terms = bow.counts.shape
    docs, words = _expand_tokens(bow)
    n_tokens = docs.size
    k = n_topics

    rng = np.random.default_rng(seed)
    z = rng.integers(0, k, size=n_tokens)
    n_dk, n_wk, n_k = _count_from_assignments(z, docs, words, n_docs, k, n_terms)

    alpha = np.full(k, 50.0 / k)
    eta = 0.01
    log_likelihood: list[tuple[int, float]] = []
    theta_acc = np.zeros((n_docs, k))
    beta_acc = np.zeros((k, n_terms))
    n_averaged = 0

    sweep_kernel = _jit_sweep if _jit_sweep is not None else _numpy_sweep
    for sweep in range(sweeps):
        us = rng.random(n_tokens)
        sweep_kernel(z, docs, words, n_dk, n_wk, n_k, alpha, eta, eta * n_terms, us)

        done = sweep + 1
        if (
            optimize_hyperparameters
            and done > burn_in
            and (done - burn_in) % optimize_every == 0
        ):
            alpha = _minka_alpha(alpha, n_dk)
            eta = _minka_eta(eta, n_wk.T)
        if done % likelihood_every == 0:
            log_likelihood.append(
                (done, collapsed_log_likelihood(n_dk, n_wk.T, n_k, alpha, eta))
            )
        if average_samples and done > burn_in and done % likelihood_every == 0:
            theta_acc += _theta(n_dk, alpha)
            beta_acc += _beta(n_wk.T, n_k, eta)
            n_averaged += 1
        if on_sweep is not None:
            on_sweep(done, GibbsState(z, docs, words, n_dk, n_wk.T, n_k, alpha, eta))

    if average_samples and n_averaged > 0:
        theta = theta_acc / n_averaged
        beta = beta_acc / n_averaged
    else:
        theta = _theta(n_dk, alpha)
        beta = _beta(n_wk.T, n_k, eta)

    assignments = [z[docs == d].copy() for d in range(n_docs)]
    token_words = [words[docs == d].copy() for d in range(n_docs)]
    return LdaModel(
        n_topics=k,
        alpha=alpha,
        eta=float(eta),
        topic_word=beta,
        doc_topic=theta,
        assignments=assignments,
        token_words=token_words,
        n_dk=n_dk,
        n_kw=np.ascontiguousarray(n_wk.T),
        n_k=n_k,
        vocabulary=vocabulary,
        doc_ids=list(bow.doc_ids),
        seed=seed,
        sweeps=sweeps,
        burn_in=burn_in,
        log_likelihood=log_likelihood,
    )


def _theta(n_dk: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    num = n_dk + alpha
    return num / num.sum(axis=1, keepdims=True)


def _beta(n_kw: np.ndarray, n_k: np.ndarray, eta: float) -> np.ndarray:
    num = n_kw + eta
    return num / (n_k + eta * n_kw.shape[1])[:, None]


def recount_assignments(model: LdaModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recompute the counter triple from the stored assignments (full scan)."""
    n_docs = len(model.doc_ids)
    k = model.n_topics
    v = model.n_kw.shape[1]
    n_dk = np.zeros((n_docs, k))
    n_kw = np.zeros((k, v))
    for d in range(n_docs):
        for topic, w in zip(model.assignments[d], model.token_words[d]):
            n_dk[d, topic] += 1
            n_kw[topic, w] += 1
    return n_dk, n_kw, n_kw.sum(axis=1)


# --------------------------------------------------------------------------
# Projections and inspection
# --------------------------------------------------------------------------

def project(model: TfIdfMatrix | LsiModel | LdaModel) -> TextFeatureMatrix:
    """Per-movie feature matrix for a fitted text model."""
    if isinstance(model, TfIdfMatrix):
        return TextFeatureMatrix("tfidf", model.weights.toarray(), list(model.doc_ids))
    if isinstance(model, LsiModel):
        return TextFeatureMatrix("lsi", model.doc_embedding.copy(), list(model.doc_ids))
    if isinstance(model, LdaModel):
        return TextFeatureMatrix("lda", model.doc_topic.copy(), list(model.doc_ids))
    raise TypeError(f"cannot project {type(model).__name__}")


def top_terms(model: LdaModel | LsiModel, index: int, n: int) -> list[tuple[str, float]]:
    """The n heaviest terms of a topic (LDA) or concept (LSI), descending.

    Ties are broken by term index; n larger than the vocabulary returns
    every term.
    """
    if isinstance(model, LdaModel):
        weights = model.topic_word[index]
    else:
        weights = np.abs(model.term_concepts[:, index])
    terms = model.vocabulary.terms
    order = np.argsort(-weights, kind="stable")[: min(n, weights.size)]
    return [(terms[i], float(weights[i])) for i in order]
