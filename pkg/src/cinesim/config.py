"""Pipeline configuration: every tunable with its default, hashed for provenance."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass
class PipelineConfig:
    # subtitle corpus
    min_collection_freq: int = 5
    max_doc_ratio: float = 0.5
    # text models
    lsi_concepts: int = 55
    lsi_on_counts: bool = False
    lda_topics: int = 55
    lda_sweeps: int = 1000
    lda_burn_in: int = 100
    # visual features
    target_width: int = 500
    fps_sampled: float = 2.0
    flow_grid: int = 16
    flow_levels: int = 3
    flow_window: int = 11
    flow_iters: int = 10
    flow_eps: float = 0.01
    shot_pixel_change_fraction: float = 0.45
    shot_mean_flow: float = 6.0
    shot_hist_l1: float = 0.6
    shot_merge_window_s: float = 0.5
    store_frame_features: bool = False
    # fusion
    fusion_grid_step: float = 0.01
    fusion_samples: int = 10000
    # evaluation
    eval_top_cutoff: int = 10
    eval_n_recs: int = 2
    eval_min_group: int = 4
    # graph export
    graph_neighbors: int = 3
    graph_min_weight: float = 0.0
    graph_resolution: float = 1.0
    # every stochastic stage draws from this seed
    seed: int = 42

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**payload)

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        payload = asdict(self)
        payload.update({k: v for k, v in overrides.items() if v is not None})
        return PipelineConfig(**payload)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]
