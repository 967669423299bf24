"""On-disk artifact formats: CSV/TSV/JSON intermediates and model bundles.

Everything is written deterministically (sorted keys, repr floats) so that
re-running a stage with identical inputs and configuration produces
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .similarity import FusionWeights, SimilarityMatrix, WeightSearchReport
from .subtitles import BowMatrix, Vocabulary
from .textmodels import LdaModel, LsiModel

from scipy import sparse


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _fmt(value: float) -> str:
    return repr(float(value))


# --------------------------------------------------------------------------
# Bag of words
# --------------------------------------------------------------------------

def write_vocabulary_tsv(path: Path, vocabulary: Vocabulary) -> None:
    lines = ["term\tindex\tdoc_freq\tcollection_freq"]
    for term, index in sorted(vocabulary.term_to_index.items(), key=lambda kv: kv[1]):
        lines.append(
            f"{term}\t{index}\t{vocabulary.doc_freq[index]}\t{vocabulary.collection_freq[index]}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_vocabulary_tsv(path: Path) -> Vocabulary:
    lines = path.read_text(encoding="utf-8").splitlines()[1:]
    term_to_index: dict[str, int] = {}
    doc_freq = []
    collection_freq = []
    for line in lines:
        term, index, df, cf = line.split("\t")
        term_to_index[term] = int(index)
        doc_freq.append(int(df))
        collection_freq.append(int(cf))
    return Vocabulary(
        term_to_index=term_to_index,
        doc_freq=np.array(doc_freq, dtype=np.int64),
        collection_freq=np.array(collection_freq, dtype=np.int64),
    )


def write_bow_csv(path: Path, doc_ids_path: Path, bow: BowMatrix) -> None:
    coo = bow.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = ["doc_index,term_index,count"]
    lines.extend(
        f"{coo.row[i]},{coo.col[i]},{coo.data[i]}" for i in order
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    doc_ids_path.write_text(json.dumps(bow.doc_ids, indent=2) + "\n", encoding="utf-8")


def read_bow_csv(path: Path, doc_ids_path: Path, n_terms: int) -> BowMatrix:
    doc_ids = json.loads(doc_ids_path.read_text(encoding="utf-8"))
    rows, cols, vals = [], [], []
    for line in path.read_text(encoding="utf-8").splitlines()[1:]:
        r, c, v = line.split(",")
        rows.append(int(r))
        cols.append(int(c))
        vals.append(int(v))
    counts = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(doc_ids), n_terms), dtype=np.int64
    )
    return BowMatrix(counts=counts, doc_ids=doc_ids)


# --------------------------------------------------------------------------
# Feature matrices
# --------------------------------------------------------------------------

def write_features_csv(path: Path, doc_ids: list[str], matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    lines = ["movie_id," + ",".join(f"f{j}" for j in range(matrix.shape[1]))]
    for movie_id, row in zip(doc_ids, matrix):
        lines.append(movie_id + "," + ",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_features_csv(path: Path) -> tuple[list[str], np.ndarray]:
    lines = path.read_text(encoding="utf-8").splitlines()
    doc_ids = []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        doc_ids.append(cells[0])
        rows.append([float(v) for v in cells[1:]])
    return doc_ids, np.array(rows, dtype=np.float64)


# --------------------------------------------------------------------------
# Similarity matrices
# --------------------------------------------------------------------------

def write_similarity_csv(path: Path, sim: SimilarityMatrix) -> None:
    lines = ["movie_id," + ",".join(sim.doc_ids)]
    for movie_id, row in zip(sim.doc_ids, sim.values):
        lines.append(movie_id + "," + ",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_similarity_csv(path: Path, modality: str = "") -> SimilarityMatrix:
    lines = path.read_text(encoding="utf-8").splitlines()
    doc_ids = lines[0].split(",")[1:]
    values = np.array(
        [[float(v) for v in line.split(",")[1:]] for line in lines[1:]], dtype=np.float64
    )
    return SimilarityMatrix(values=values, doc_ids=doc_ids, modality=modality)


# --------------------------------------------------------------------------
# Model bundles: JSON header + flat row-major float64 binary
# --------------------------------------------------------------------------

def write_model_bundle(header_path: Path, lsi_or_lda: LsiModel | LdaModel) -> None:
    bin_path = header_path.with_suffix(".bin")
    if isinstance(lsi_or_lda, LsiModel):
        matrices = {
            "term_concepts": lsi_or_lda.term_concepts,
            "singular_values": lsi_or_lda.singular_values.reshape(1, -1),
            "doc_embedding": lsi_or_lda.doc_embedding,
        }
        header = {
            "kind": "lsi",
            "dims": {"n_concepts": lsi_or_lda.n_concepts},
            "doc_ids": lsi_or_lda.doc_ids,
        }
    else:
        matrices = {
            "topic_word": lsi_or_lda.topic_word,
            "doc_topic": lsi_or_lda.doc_topic,
            "alpha": lsi_or_lda.alpha.reshape(1, -1),
        }
        header = {
            "kind": "lda",
            "dims": {"n_topics": lsi_or_lda.n_topics},
            "seed": lsi_or_lda.seed,
            "sweeps": lsi_or_lda.sweeps,
            "burn_in": lsi_or_lda.burn_in,
            "eta": lsi_or_lda.eta,
            "doc_ids": lsi_or_lda.doc_ids,
        }
    layout = []
    offset = 0
    blobs = []
    for name, matrix in matrices.items():
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        layout.append(
            {"name": name, "rows": matrix.shape[0], "cols": matrix.shape[1], "offset": offset}
        )
        offset += matrix.size * 8
        blobs.append(matrix.tobytes())
    header["matrices"] = layout
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    bin_path.write_bytes(b"".join(blobs))


def read_model_bundle(header_path: Path) -> dict:
    header = json.loads(header_path.read_text(encoding="utf-8"))
    raw = header_path.with_suffix(".bin").read_bytes()
    out = dict(header)
    out["arrays"] = {}
    for entry in header["matrices"]:
        count = entry["rows"] * entry["cols"]
        array = np.frombuffer(raw, dtype=np.float64, count=count, offset=entry["offset"])
        out["arrays"][entry["name"]] = array.reshape(entry["rows"], entry["cols"]).copy()
    return out


# --------------------------------------------------------------------------
# Weights, reports, ground truth
# --------------------------------------------------------------------------

def write_weights_json(path: Path, weights: FusionWeights, report: WeightSearchReport) -> None:
    payload = {"weights": weights.as_dict(), "search": report.as_dict()}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_weights_json(path: Path) -> FusionWeights:
    payload = json.loads(path.read_text(encoding="utf-8"))
    modalities = sorted(payload["weights"])
    return FusionWeights(
        modalities=modalities,
        weights=np.array([payload["weights"][m] for m in modalities]),
    )


def read_ground_truth_csv(path: Path) -> tuple[str, list[str], np.ndarray]:
    """Detect a precomputed N x N matrix vs a tag-relevance matrix.

    Returns ("similarity" | "tags", doc_ids, values).
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")[1:]
    doc_ids = []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        doc_ids.append(cells[0])
        rows.append([float(v) for v in cells[1:]])
    values = np.array(rows, dtype=np.float64)
    if len(header) == len(doc_ids) and header == doc_ids:
        return "similarity", doc_ids, values
    return "tags", doc_ids, values
