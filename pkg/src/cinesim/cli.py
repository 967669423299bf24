"""Pipeline orchestration: per-stage subcommands over a dataset manifest.

Each stage reads upstream artifacts from the output directory, fails fast
when they are missing, and writes its own artifacts plus a meta file
carrying the configuration hash and input hashes.  Re-running a stage with
identical inputs and configuration produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import artifacts, audio, evaluation, graph as graphmod, metadata as metamod
from .config import PipelineConfig
from .similarity import SimilarityMatrix, cosine_matrix, fit_weights, fuse
from .subtitles import (
    RuleLemmatizer,
    build_bow,
    default_stopwords,
    load_stopwords,
    parse_srt,
    tokenize_and_lemmatize,
)
from .textmodels import TfIdfMatrix, fit_lda, fit_lsi, project, tfidf
from .visual import Frame, ShotThresholds, aggregate, extract_frame_features, preprocess, read_ppm

logger = logging.getLogger("cinesim")

STAGES = (
    "ingest-text",
    "train-tfidf",
    "train-lsi",
    "train-lda",
    "visual",
    "audio",
    "metadata",
    "similarity",
    "fit-weights",
    "fuse",
    "evaluate",
    "graph",
)

DEPENDENCIES: dict[str, list[str]] = {
    "ingest-text": [],
    "train-tfidf": ["ingest-text"],
    "train-lsi": ["ingest-text", "train-tfidf"],
    "train-lda": ["ingest-text"],
    "visual": [],
    "audio": [],
    "metadata": [],
    "similarity": [],
    "fit-weights": ["similarity"],
    "fuse": ["similarity", "fit-weights"],
    "evaluate": ["similarity"],
    "graph": ["similarity"],
}

FEATURE_FILES = {
    "text": ("text", "tfidf.features.csv"),
    "lsi": ("text", "lsi.features.csv"),
    "lda": ("text", "lda.features.csv"),
    "video": ("visual", "video.features.csv"),
    "audio": ("audio", "audio.features.csv"),
    "music": ("audio", "music.features.csv"),
    "metadata": ("metadata", "metadata.features.csv"),
}


class ConfigInvalidError(ValueError):
    """Manifest or configuration cannot drive the requested stage."""


class MissingDependencyError(RuntimeError):
    """An upstream stage has not produced its artifacts."""


@dataclass
class MovieEntry:
    movie_id: str
    title: str
    rating: float = 0.0
    subtitle_path: Path | None = None
    frames_dir: Path | None = None
    faces_path: Path | None = None
    audio_labels_path: Path | None = None
    metadata: dict | None = None


@dataclass
class DatasetManifest:
    movies: list[MovieEntry]
    stopword_paths: list[Path] = field(default_factory=list)
    gt_path: Path | None = None
    base_dir: Path = Path(".")


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    payload = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent

    def resolve(p):
        return (base / p) if p is not None else None

    movies = []
    seen = set()
    for entry in payload.get("movies", []):
        movie_id = entry["movie_id"]
        if movie_id in seen:
            raise ConfigInvalidError(f"duplicate movie_id {movie_id!r} in manifest")
        seen.add(movie_id)
        meta = entry.get("metadata")
        if meta is None and entry.get("metadata_path"):
            meta = json.loads(resolve(entry["metadata_path"]).read_text(encoding="utf-8"))
        movies.append(
            MovieEntry(
                movie_id=movie_id,
                title=entry.get("title", movie_id),
                rating=float(entry.get("rating", 0.0)),
                subtitle_path=resolve(entry.get("subtitle_path")),
                frames_dir=resolve(entry.get("frames_dir")),
                faces_path=resolve(entry.get("faces_path")),
                audio_labels_path=resolve(entry.get("audio_labels_path")),
                metadata=meta,
            )
        )
    if not movies:
        raise ConfigInvalidError("manifest lists no movies")
    return DatasetManifest(
        movies=movies,
        stopword_paths=[resolve(p) for p in payload.get("stopword_paths", [])],
        gt_path=resolve(payload.get("gt_path")),
        base_dir=base,
    )


# --------------------------------------------------------------------------
# Meta files and dependency checks
# --------------------------------------------------------------------------

def _meta_path(out_dir: Path, stage: str) -> Path:
    return out_dir / "meta" / f"{stage}.meta.json"


def _write_meta(out_dir: Path, stage: str, config: PipelineConfig,
                inputs: list[Path], outputs: list[Path]) -> None:
    meta = {
        "stage": stage,
        "config_hash": config.config_hash(),
        "inputs": {
            str(p.relative_to(out_dir) if p.is_relative_to(out_dir) else p): artifacts.sha256_file(p)
            for p in sorted(inputs)
        },
        "outputs": sorted(str(p.relative_to(out_dir)) for p in outputs),
    }
    path = _meta_path(out_dir, stage)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _require_stages(out_dir: Path, stage: str, needed: list[str]) -> None:
    missing = [s for s in needed if not _meta_path(out_dir, s).exists()]
    if missing:
        raise MissingDependencyError(
            f"stage {stage!r} requires artifacts from: {', '.join(missing)} "
            f"(run those stages first)"
        )


def _stage_config_hash(out_dir: Path, stage: str) -> str:
    return json.loads(_meta_path(out_dir, stage).read_text(encoding="utf-8"))["config_hash"]


# --------------------------------------------------------------------------
# Stage implementations
# --------------------------------------------------------------------------

def _stopwords(manifest: DatasetManifest) -> set[str]:
    if manifest.stopword_paths:
        return load_stopwords(*manifest.stopword_paths)
    return default_stopwords()


def stage_ingest_text(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    movies = [m for m in manifest.movies if m.subtitle_path]
    if not movies:
        raise ConfigInvalidError("no movie in the manifest has a subtitle_path")
    stopwords = _stopwords(manifest)
    lemmatizer = RuleLemmatizer()
    streams = []
    for movie in movies:
        doc = parse_srt(movie.subtitle_path.read_bytes(), movie_id=movie.movie_id)
        streams.append(tokenize_and_lemmatize(doc, stopwords, lemmatizer))
    vocabulary, bow = build_bow(
        streams,
        min_collection_freq=config.min_collection_freq,
        max_doc_ratio=config.max_doc_ratio,
    )
    text_dir = out_dir / "text"
    text_dir.mkdir(parents=True, exist_ok=True)
    vocab_path = text_dir / "vocabulary.tsv"
    bow_path = text_dir / "bow.csv"
    ids_path = text_dir / "doc_ids.json"
    artifacts.write_vocabulary_tsv(vocab_path, vocabulary)
    artifacts.write_bow_csv(bow_path, ids_path, bow)
    inputs = [m.subtitle_path for m in movies] + [p for p in manifest.stopword_paths]
    _write_meta(out_dir, "ingest-text", config, inputs, [vocab_path, bow_path, ids_path])
    return [vocab_path, bow_path, ids_path]


def _read_bow(out_dir: Path):
    text_dir = out_dir / "text"
    vocabulary = artifacts.read_vocabulary_tsv(text_dir / "vocabulary.tsv")
    bow = artifacts.read_bow_csv(
        text_dir / "bow.csv", text_dir / "doc_ids.json", n_terms=len(vocabulary)
    )
    return vocabulary, bow


def stage_train_tfidf(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "train-tfidf", DEPENDENCIES["train-tfidf"])
    vocabulary, bow = _read_bow(out_dir)
    model = tfidf(bow, vocabulary)
    features = project(model)
    path = out_dir / "text" / "tfidf.features.csv"
    artifacts.write_features_csv(path, features.doc_ids, features.matrix)
    inputs = [out_dir / "text" / "vocabulary.tsv", out_dir / "text" / "bow.csv"]
    _write_meta(out_dir, "train-tfidf", config, inputs, [path])
    return [path]


def stage_train_lsi(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "train-lsi", DEPENDENCIES["train-lsi"])
    vocabulary, bow = _read_bow(out_dir)
    if config.lsi_on_counts:
        source = bow
    else:
        doc_ids, matrix = artifacts.read_features_csv(out_dir / "text" / "tfidf.features.csv")
        from scipy import sparse

        source = TfIdfMatrix(sparse.csr_matrix(matrix), vocabulary, doc_ids)
    max_rank = min(bow.n_docs, bow.n_terms)
    n_concepts = config.lsi_concepts
    if n_concepts > max_rank:
        logger.warning(
            "lsi_concepts=%d exceeds min(N, V)=%d; clamping", n_concepts, max_rank
        )
        n_concepts = max_rank
    model = fit_lsi(source, n_concepts=n_concepts)
    features = project(model)
    csv_path = out_dir / "text" / "lsi.features.csv"
    bundle_path = out_dir / "text" / "lsi.model.json"
    artifacts.write_features_csv(csv_path, features.doc_ids, features.matrix)
    artifacts.write_model_bundle(bundle_path, model)
    inputs = [out_dir / "text" / "bow.csv", out_dir / "text" / "tfidf.features.csv"]
    outputs = [csv_path, bundle_path, bundle_path.with_suffix(".bin")]
    _write_meta(out_dir, "train-lsi", config, inputs, outputs)
    return outputs


def stage_train_lda(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "train-lda", DEPENDENCIES["train-lda"])
    vocabulary, bow = _read_bow(out_dir)
    model = fit_lda(
        bow,
        vocabulary,
        n_topics=config.lda_topics,
        sweeps=config.lda_sweeps,
        burn_in=config.lda_burn_in,
        seed=config.seed,
    )
    features = project(model)
    csv_path = out_dir / "text" / "lda.features.csv"
    bundle_path = out_dir / "text" / "lda.model.json"
    artifacts.write_features_csv(csv_path, features.doc_ids, features.matrix)
    artifacts.write_model_bundle(bundle_path, model)
    inputs = [out_dir / "text" / "bow.csv", out_dir / "text" / "vocabulary.tsv"]
    outputs = [csv_path, bundle_path, bundle_path.with_suffix(".bin")]
    _write_meta(out_dir, "train-lda", config, inputs, outputs)
    return outputs


def _load_movie_frames(movie: MovieEntry, config: PipelineConfig) -> tuple[list[Frame], list, float]:
    frames_manifest = json.loads(
        (movie.frames_dir / "manifest.json").read_text(encoding="utf-8")
    )
    n_frames = int(frames_manifest["frame_count"])
    fps = float(frames_manifest.get("fps_sampled", config.fps_sampled))
    frames = []
    for i in range(1, n_frames + 1):
        rgb = read_ppm(movie.frames_dir / f"frame_{i:06d}.ppm")
        frames.append(preprocess(rgb, target_width=config.target_width, timestamp_s=(i - 1) / fps))
    faces_path = movie.faces_path or (movie.frames_dir / "faces.json")
    if movie.faces_path is not None and not faces_path.exists():
        raise FileNotFoundError(f"declared faces sidecar missing: {faces_path}")
    if faces_path.exists():
        boxes = [
            [tuple(box) for box in per_frame]
            for per_frame in json.loads(faces_path.read_text(encoding="utf-8"))
        ]
    else:
        boxes = [[] for _ in frames]
    return frames, boxes, fps


def stage_visual(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    movies = [m for m in manifest.movies if m.frames_dir]
    if not movies:
        raise ConfigInvalidError("no movie in the manifest has a frames_dir")
    thresholds = ShotThresholds(
        pixel_change_fraction=config.shot_pixel_change_fraction,
        mean_flow_magnitude=config.shot_mean_flow,
        hist_l1_distance=config.shot_hist_l1,
        merge_window_s=config.shot_merge_window_s,
    )
    visual_dir = out_dir / "visual"
    visual_dir.mkdir(parents=True, exist_ok=True)
    doc_ids = []
    vectors = []
    inputs: list[Path] = []
    outputs: list[Path] = []
    for movie in movies:
        frames, boxes, fps = _load_movie_frames(movie, config)
        rows = extract_frame_features(
            frames,
            boxes,
            fps=fps,
            flow_grid=config.flow_grid,
            flow_levels=config.flow_levels,
            flow_window=config.flow_window,
            flow_iters=config.flow_iters,
            flow_eps=config.flow_eps,
            shot_thresholds=thresholds,
        )
        doc_ids.append(movie.movie_id)
        vectors.append(aggregate(rows))
        inputs.append(movie.frames_dir / "manifest.json")
        if config.store_frame_features:
            frames_dir = visual_dir / "frames"
            frames_dir.mkdir(exist_ok=True)
            debug_path = frames_dir / f"{movie.movie_id}.csv"
            artifacts.write_features_csv(
                debug_path, [f"frame{i:06d}" for i in range(1, len(rows) + 1)], rows
            )
            outputs.append(debug_path)
    path = visual_dir / "video.features.csv"
    artifacts.write_features_csv(path, doc_ids, np.array(vectors))
    outputs.insert(0, path)
    _write_meta(out_dir, "visual", config, inputs, outputs)
    return outputs


def stage_audio(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    movies = [m for m in manifest.movies if m.audio_labels_path]
    if not movies:
        raise ConfigInvalidError("no movie in the manifest has an audio_labels_path")
    doc_ids, event_rows, genre_rows = [], [], []
    for movie in movies:
        labels = audio.load_labels(movie.audio_labels_path)
        events, genres = audio.aggregate_labels(labels)
        doc_ids.append(movie.movie_id)
        event_rows.append(events)
        genre_rows.append(genres)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    audio_path = audio_dir / "audio.features.csv"
    music_path = audio_dir / "music.features.csv"
    artifacts.write_features_csv(audio_path, doc_ids, np.array(event_rows))
    artifacts.write_features_csv(music_path, doc_ids, np.array(genre_rows))
    inputs = [m.audio_labels_path for m in movies]
    _write_meta(out_dir, "audio", config, inputs, [audio_path, music_path])
    return [audio_path, music_path]


def _manifest_metadata(manifest: DatasetManifest) -> list[metamod.MovieMetadata]:
    records = []
    for movie in manifest.movies:
        if movie.metadata is None:
            continue
        records.append(
            metamod.MovieMetadata(
                movie_id=movie.movie_id,
                title=movie.title,
                actors=list(movie.metadata.get("actors", [])),
                directors=list(movie.metadata.get("directors", [])),
                genres=list(movie.metadata.get("genres", [])),
                rating=movie.rating,
            )
        )
    return records


def stage_metadata(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    records = _manifest_metadata(manifest)
    if not records:
        raise ConfigInvalidError("no movie in the manifest has metadata")
    index = metamod.build_index(records)
    matrix = metamod.vectorize(records, index)
    meta_dir = out_dir / "metadata"
    meta_dir.mkdir(parents=True, exist_ok=True)
    features_path = meta_dir / "metadata.features.csv"
    index_path = meta_dir / "tag_index.tsv"
    artifacts.write_features_csv(features_path, [r.movie_id for r in records], matrix.astype(float))
    lines = ["kind\ttag\tcolumn"]
    lines.extend(f"{kind}\t{tag}\t{col}" for (kind, tag), col in sorted(index.column.items(), key=lambda kv: kv[1]))
    index_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_meta(out_dir, "metadata", config, [], [features_path, index_path])
    return [features_path, index_path]


def _available_feature_files(out_dir: Path) -> dict[str, Path]:
    found = {}
    for modality, (sub, name) in FEATURE_FILES.items():
        path = out_dir / sub / name
        if path.exists():
            found[modality] = path
    return found


def stage_similarity(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    feature_files = _available_feature_files(out_dir)
    if not feature_files:
        raise MissingDependencyError(
            "stage 'similarity' requires at least one feature artifact; "
            "run ingest-text/train-*, visual, audio or metadata first"
        )
    sim_dir = out_dir / "similarity"
    sim_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for modality, path in sorted(feature_files.items()):
        doc_ids, matrix = artifacts.read_features_csv(path)
        sim = cosine_matrix(matrix, doc_ids, modality=modality)
        out_path = sim_dir / f"{modality}.sim.csv"
        artifacts.write_similarity_csv(out_path, sim)
        outputs.append(out_path)
    _write_meta(out_dir, "similarity", config, list(feature_files.values()), outputs)
    return outputs


def _load_similarities(out_dir: Path, include_fused: bool = False) -> dict[str, SimilarityMatrix]:
    sims = {}
    for path in sorted((out_dir / "similarity").glob("*.sim.csv")):
        modality = path.name[: -len(".sim.csv")]
        if modality == "fused" and not include_fused:
            continue
        sims[modality] = artifacts.read_similarity_csv(path, modality=modality)
    return sims


def _load_ground_truth(manifest: DatasetManifest) -> SimilarityMatrix:
    if manifest.gt_path is None:
        raise ConfigInvalidError("manifest has no gt_path")
    kind, doc_ids, values = artifacts.read_ground_truth_csv(manifest.gt_path)
    if kind == "similarity":
        return SimilarityMatrix(values=values, doc_ids=doc_ids, modality="ground-truth")
    return evaluation.ground_truth_from_tags(values, doc_ids)


def _align(matrices: list[SimilarityMatrix], order: list[str]) -> list[SimilarityMatrix]:
    """Restrict every matrix to the shared movie set, in a common order."""
    common = set(order)
    for m in matrices:
        common &= set(m.doc_ids)
    if len(common) < 3:
        raise ConfigInvalidError(
            f"only {len(common)} movies shared across matrices; need at least 3"
        )
    kept = [movie_id for movie_id in order if movie_id in common]
    aligned = []
    for m in matrices:
        idx = [m.doc_ids.index(movie_id) for movie_id in kept]
        aligned.append(
            SimilarityMatrix(m.values[np.ix_(idx, idx)], kept, modality=m.modality)
        )
    return aligned


def stage_fit_weights(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "fit-weights", DEPENDENCIES["fit-weights"])
    sims = _load_similarities(out_dir)
    if len(sims) < 2:
        raise MissingDependencyError(
            "stage 'fit-weights' requires at least two similarity matrices"
        )
    gt = _load_ground_truth(manifest)
    order = [m.movie_id for m in manifest.movies]
    aligned = _align(list(sims.values()) + [gt], order)
    matrices, gt_aligned = aligned[:-1], aligned[-1]
    weights, report = fit_weights(
        matrices,
        gt_aligned,
        grid_step=config.fusion_grid_step,
        n_samples=config.fusion_samples,
        seed=config.seed,
    )
    fusion_dir = out_dir / "fusion"
    fusion_dir.mkdir(parents=True, exist_ok=True)
    path = fusion_dir / "weights.json"
    artifacts.write_weights_json(path, weights, report)
    inputs = [out_dir / "similarity" / f"{m}.sim.csv" for m in sorted(sims)]
    _write_meta(out_dir, "fit-weights", config, inputs + [manifest.gt_path], [path])
    return [path]


def stage_fuse(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "fuse", DEPENDENCIES["fuse"])
    weights = artifacts.read_weights_json(out_dir / "fusion" / "weights.json")
    sims = _load_similarities(out_dir)
    missing = [m for m in weights.modalities if m not in sims]
    if missing:
        raise MissingDependencyError(f"fuse is missing similarity matrices for: {missing}")
    order = [m.movie_id for m in manifest.movies]
    aligned = _align([sims[m] for m in weights.modalities], order)
    fused = fuse(aligned, weights)
    path = out_dir / "similarity" / "fused.sim.csv"
    artifacts.write_similarity_csv(path, fused)
    inputs = [out_dir / "fusion" / "weights.json"]
    _write_meta(out_dir, "fuse", config, inputs, [path])
    return [path]


def stage_evaluate(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "evaluate", DEPENDENCIES["evaluate"])
    expected_hash = config.config_hash()
    for stage in ("similarity", "fuse", "fit-weights"):
        if _meta_path(out_dir, stage).exists():
            found = _stage_config_hash(out_dir, stage)
            if found != expected_hash:
                raise ConfigInvalidError(
                    f"stage {stage!r} artifacts were produced with config hash "
                    f"{found}, current config hashes to {expected_hash}; "
                    "re-run the pipeline with one configuration"
                )
    sims = _load_similarities(out_dir, include_fused=True)
    gt = _load_ground_truth(manifest)
    order = [m.movie_id for m in manifest.movies]
    reports = {}
    for modality in sorted(sims):
        model, gt_aligned = _align([sims[modality], gt], order)
        reports[modality] = evaluation.evaluate(model, gt_aligned, top_cutoff=config.eval_top_cutoff)
    if "fused" in reports and "metadata" in reports:
        fused_report = reports["fused"]
        meta_report = reports["metadata"]
        if len(fused_report.ranks_1st) == len(meta_report.ranks_1st):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fused_report.wilcoxon = evaluation.wilcoxon_signed_rank(
                    fused_report.ranks_1st, meta_report.ranks_1st
                )
    eval_dir = out_dir / "evaluation"
    eval_dir.mkdir(parents=True, exist_ok=True)
    json_path = eval_dir / "report.json"
    text_path = eval_dir / "report.txt"
    payload = {name: report.as_dict() for name, report in sorted(reports.items())}
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    text_path.write_text(
        evaluation.format_report_table([reports[name] for name in sorted(reports)]) + "\n",
        encoding="utf-8",
    )
    outputs = [json_path, text_path]

    records = _manifest_metadata(manifest)
    if records:
        differentiation = {
            modality: {
                group_by: evaluation.group_differentiation(
                    _align([sims[modality]], order)[0],
                    records,
                    group_by=group_by,
                    n_recs=config.eval_n_recs,
                    min_population=config.eval_min_group,
                )
                for group_by in ("genre", "director")
            }
            for modality in sorted(sims)
        }
        diff_path = eval_dir / "differentiation.json"
        diff_path.write_text(
            json.dumps(differentiation, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        outputs.append(diff_path)

    inputs = sorted((out_dir / "similarity").glob("*.sim.csv")) + [manifest.gt_path]
    _write_meta(out_dir, "evaluate", config, inputs, outputs)
    return outputs


def stage_graph(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[Path]:
    _require_stages(out_dir, "graph", DEPENDENCIES["graph"])
    sims = _load_similarities(out_dir, include_fused=True)
    records = _manifest_metadata(manifest)
    graphs_dir = out_dir / "graphs"
    graphs_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for modality in sorted(sims):
        movie_graph = graphmod.build_graph(
            sims[modality],
            records,
            k=config.graph_neighbors,
            min_weight=config.graph_min_weight,
        )
        if movie_graph.edges:
            assignment = graphmod.louvain(
                movie_graph, resolution=config.graph_resolution, seed=config.seed
            )
        else:
            assignment = graphmod.singleton_assignment(movie_graph)
        path = graphs_dir / f"{modality}.json"
        path.write_text(graphmod.export_json(movie_graph, assignment), encoding="utf-8")
        outputs.append(path)
    index_path = graphs_dir / "models.json"
    index_path.write_text(
        json.dumps({"models": sorted(sims)}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    outputs.append(index_path)
    inputs = sorted((out_dir / "similarity").glob("*.sim.csv"))
    _write_meta(out_dir, "graph", config, inputs, outputs)
    return outputs


STAGE_FUNCTIONS = {
    "ingest-text": stage_ingest_text,
    "train-tfidf": stage_train_tfidf,
    "train-lsi": stage_train_lsi,
    "train-lda": stage_train_lda,
    "visual": stage_visual,
    "audio": stage_audio,
    "metadata": stage_metadata,
    "similarity": stage_similarity,
    "fit-weights": stage_fit_weights,
    "fuse": stage_fuse,
    "evaluate": stage_evaluate,
    "graph": stage_graph,
}


def run_stage(stage: str, manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> dict:
    if stage not in STAGE_FUNCTIONS:
        raise ConfigInvalidError(f"unknown stage {stage!r}")
    started = time.monotonic()
    outputs = STAGE_FUNCTIONS[stage](manifest, config, out_dir)
    return {
        "stage": stage,
        "status": "ok",
        "config_hash": config.config_hash(),
        "outputs": [str(p) for p in outputs],
        "elapsed_s": round(time.monotonic() - started, 3),
    }


def run_all(manifest: DatasetManifest, config: PipelineConfig, out_dir: Path) -> list[dict]:
    """Run every stage whose inputs exist, in dependency order.

    Stages for missing modalities are skipped with a notice; fusion and
    evaluation are restricted to the matrices that were produced.
    """
    summaries = []
    has_subs = any(m.subtitle_path for m in manifest.movies)
    has_frames = any(m.frames_dir for m in manifest.movies)
    has_audio = any(m.audio_labels_path for m in manifest.movies)
    has_meta = any(m.metadata for m in manifest.movies)
    has_gt = manifest.gt_path is not None
    # text yields three matrices (tfidf/lsi/lda), audio two, the rest one each
    n_matrices = 3 * has_subs + has_frames + 2 * has_audio + has_meta
    can_fuse = has_gt and n_matrices >= 2

    plan: list[tuple[str, bool, str]] = [
        ("ingest-text", has_subs, "no subtitles in manifest"),
        ("train-tfidf", has_subs, "no subtitles in manifest"),
        ("train-lsi", has_subs, "no subtitles in manifest"),
        ("train-lda", has_subs, "no subtitles in manifest"),
        ("visual", has_frames, "no frame dumps in manifest"),
        ("audio", has_audio, "no audio labels in manifest"),
        ("metadata", has_meta, "no metadata in manifest"),
        ("similarity", True, ""),
        ("fit-weights", can_fuse, "need gt_path and two similarity matrices"),
        ("fuse", can_fuse, "need gt_path and two similarity matrices"),
        ("evaluate", has_gt, "no gt_path in manifest"),
        ("graph", True, ""),
    ]
    for stage, wanted, reason in plan:
        if not wanted:
            logger.info("skipping stage %s: %s", stage, reason)
            summaries.append({"stage": stage, "status": "skipped", "reason": reason})
            continue
        summaries.append(run_stage(stage, manifest, config, out_dir))
    return summaries


# --------------------------------------------------------------------------
# Command line
# --------------------------------------------------------------------------

def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"--set expects KEY=VALUE, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.replace("-", "_")
    types = {f.name: f.type for f in fields(PipelineConfig)}
    if key not in types:
        raise argparse.ArgumentTypeError(f"unknown config key {key!r}")
    kind = types[key]
    if kind in ("bool", bool):
        value: object = raw.lower() in ("1", "true", "yes")
    elif kind in ("int", int):
        value = int(raw)
    elif kind in ("float", float):
        value = float(raw)
    else:
        value = raw
    return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cinesim",
        description="Multimodal movie similarity pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES + ("run-all",):
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        p.add_argument("--manifest", required=True, help="dataset manifest JSON")
        p.add_argument("--out-dir", required=True, help="artifact output directory")
        p.add_argument("--config", help="pipeline config JSON (defaults otherwise)")
        p.add_argument("--seed", type=int, help="override the pipeline seed")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            type=_parse_override,
            default=[],
            metavar="KEY=VALUE",
            help="override any config field (repeatable)",
        )
        p.add_argument("--json", action="store_true", help="print summaries as JSON")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
        overrides = dict(args.overrides)
        if args.seed is not None:
            overrides["seed"] = args.seed
        config = config.with_overrides(overrides)
        manifest = load_manifest(args.manifest)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "run-all":
            summaries = run_all(manifest, config, out_dir)
        else:
            summaries = [run_stage(args.command, manifest, config, out_dir)]
    except MissingDependencyError as exc:
        logger.error("dependency error: %s", exc)
        return 2
    except (ConfigInvalidError, ValueError, OSError, KeyError) as exc:
        logger.error("error: %s", exc)
        return 1
    for summary in summaries:
        if args.json:
            print(json.dumps(summary, sort_keys=True))
        else:
            status = summary["status"]
            extra = f" ({summary.get('reason', '')})" if status == "skipped" else ""
            print(f"{summary['stage']}: {status}{extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
