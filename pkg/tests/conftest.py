"""Shared fixtures: a small synthetic movie dataset with every modality."""

import json
from pathlib import Path

import numpy as np
import pytest

from cinesim.visual import write_ppm

THEMES = {
    0: {
        "words": ["ship", "captain", "ocean", "storm", "sail", "harbor", "voyage", "tide"],
        "color": (200, 60, 40),
        "genre": "Adventure",
        "director": "R. Marlow",
        "music": ("rock", "electronic"),
    },
    1: {
        "words": ["castle", "queen", "sword", "knight", "crown", "banner", "siege", "throne"],
        "color": (50, 170, 70),
        "genre": "History",
        "director": "I. Navarre",
        "music": ("classical", "classical"),
    },
    2: {
        "words": ["engine", "signal", "orbit", "rocket", "module", "cosmos", "station", "probe"],
        "color": (40, 80, 210),
        "genre": "Sci-Fi",
        "director": "T. Okafor",
        "music": ("electronic", "rap"),
    },
}

FILLERS = ["movie", "story", "scene", "night", "people"]
ACTOR_POOL = [f"Actor {chr(65 + i)}" for i in range(9)]


def _write_subtitle(path: Path, rng: np.random.Generator, theme: dict) -> None:
    blocks = []
    for cue in range(40):
        start = cue * 2500
        end = start + 2000
        words = list(rng.choice(theme["words"], size=4)) + list(rng.choice(FILLERS, size=2))
        rng.shuffle(words)
        text = " ".join(words).capitalize() + "."
        h, rem = divmod(start, 3600_000)
        m, rem = divmod(rem, 60_000)
        s, ms = divmod(rem, 1000)
        h2, rem2 = divmod(end, 3600_000)
        m2, rem2 = divmod(rem2, 60_000)
        s2, ms2 = divmod(rem2, 1000)
        blocks.append(
            f"{cue + 1}\n"
            f"{h:02d}:{m:02d}:{s:02d},{ms:03d} --> {h2:02d}:{m2:02d}:{s2:02d},{ms2:03d}\n"
            f"{text}\n"
        )
    path.write_text("\n".join(blocks), encoding="utf-8")


def _write_frames(frames_dir: Path, rng: np.random.Generator, theme: dict, n_frames: int = 6) -> None:
    frames_dir.mkdir(parents=True, exist_ok=True)
    base_color = np.array(theme["color"], dtype=float)
    alt_color = base_color[::-1].copy()
    h, w = 48, 64
    for i in range(n_frames):
        color = base_color if i < n_frames // 2 else alt_color  # one hard cut
        noise = rng.normal(0, 12, size=(h, w, 3))
        rgb = np.clip(color[None, None, :] + noise, 0, 255).astype(np.uint8)
        write_ppm(frames_dir / f"frame_{i + 1:06d}.ppm", rgb)
    (frames_dir / "manifest.json").write_text(
        json.dumps(
            {
                "movie_id": frames_dir.name,
                "fps_sampled": 2,
                "duration_s": n_frames / 2,
                "frame_count": n_frames,
            }
        ),
        encoding="utf-8",
    )
    boxes = [[] for _ in range(n_frames)]
    boxes[0] = [[4, 4, 10, 12]]
    (frames_dir / "faces.json").write_text(json.dumps(boxes), encoding="utf-8")


def _write_audio_labels(path: Path, rng: np.random.Generator, theme: dict) -> None:
    segments = []
    genres = theme["music"]
    for i in range(30):
        if i % 3 == 0:
            segments.append({"i": i, "event": "music", "genre": genres[i % len(genres)]})
        elif i % 7 == 0:
            segments.append({"i": i, "event": "gunshots-explosions"})
        else:
            segments.append({"i": i, "event": "speech"})
    path.write_text(json.dumps({"movie_id": path.parent.name, "segments": segments}))


def build_synthetic_dataset(root: Path, n_movies: int = 12, seed: int = 0) -> Path:
    """Write a full multi-modality dataset and return the manifest path."""
    rng = np.random.default_rng(seed)
    movies = []
    gt_rows = []
    for m in range(n_movies):
        theme_id = m % 3
        theme = THEMES[theme_id]
        movie_id = f"mv{m:03d}"
        movie_dir = root / movie_id
        movie_dir.mkdir(parents=True, exist_ok=True)
        _write_subtitle(movie_dir / "subs.srt", rng, theme)
        _write_frames(movie_dir / "frames", rng, theme)
        _write_audio_labels(movie_dir / "labels.json", rng, theme)
        actors = sorted(
            set(
                [ACTOR_POOL[theme_id * 3 + (m // 3) % 3]]
                + [ACTOR_POOL[int(rng.integers(0, len(ACTOR_POOL)))]]
            )
        )
        movies.append(
            {
                "movie_id": movie_id,
                "title": f"Movie {m}",
                "rating": float(np.round(6.5 + rng.uniform(0, 2.5), 1)),
                "subtitle_path": f"{movie_id}/subs.srt",
                "frames_dir": f"{movie_id}/frames",
                "audio_labels_path": f"{movie_id}/labels.json",
                "metadata": {
                    "actors": actors,
                    "directors": [theme["director"]],
                    "genres": [theme["genre"]],
                },
            }
        )
        # tag relevance: strong theme block plus light noise
        tags = rng.uniform(0, 0.15, size=9)
        tags[theme_id * 3 : theme_id * 3 + 3] += rng.uniform(0.6, 1.0, size=3)
        gt_rows.append(tags)

    header = "movie_id," + ",".join(f"tag{j}" for j in range(9))
    lines = [header]
    for movie, tags in zip(movies, gt_rows):
        lines.append(movie["movie_id"] + "," + ",".join(repr(float(v)) for v in tags))
    (root / "gt.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    manifest = {"movies": movies, "gt_path": "gt.csv"}
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest_path


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("dataset")
    return build_synthetic_dataset(root)
