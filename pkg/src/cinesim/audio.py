"""Audio-event and music-genre proportion vectors from 2-second segment labels.

Classifier inference is an ingestion boundary: label sequences arrive as
JSON and are reduced to one 8-dim event vector and one 8-dim genre vector
per movie.  Movies without music segments keep an all-zero genre vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EVENT_CLASSES = (
    "music",
    "speech",
    "env-low-energy",
    "env-abrupt",
    "env-constant-high",
    "gunshots-explosions",
    "fights",
    "screams",
)

GENRE_CLASSES = (
    "jazz",
    "classical",
    "country",
    "blues",
    "electronic",
    "rap",
    "reggae",
    "rock",
)

SEGMENT_SECONDS = 2.0

_EVENT_INDEX = {name: i for i, name in enumerate(EVENT_CLASSES)}
_GENRE_INDEX = {name: i for i, name in enumerate(GENRE_CLASSES)}


class UnknownLabelError(ValueError):
    """A segment carries a label outside the fixed class sets."""


class EmptySequenceError(ValueError):
    """A movie arrived with no labeled segments."""


@dataclass(frozen=True)
class Segment:
    index: int
    event: str
    genre: str | None = None


@dataclass
class SegmentLabels:
    movie_id: str
    segments: list[Segment]


def load_labels(path: str | Path) -> SegmentLabels:
    """Read a labels.json file: {movie_id, segments: [{i, event, genre?}]}."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    segments = [
        Segment(index=int(entry["i"]), event=entry["event"], genre=entry.get("genre"))
        for entry in payload["segments"]
    ]
    return SegmentLabels(movie_id=payload["movie_id"], segments=segments)


def aggregate_labels(labels: SegmentLabels) -> tuple[np.ndarray, np.ndarray]:
    """(event proportions over all segments, genre proportions over music ones).

    Raises UnknownLabelError on any label outside the class sets and
    EmptySequenceError when no segments are present.  Segments must carry a
    genre exactly when their event is "music".
    """
    if not labels.segments:
        raise EmptySequenceError(f"movie {labels.movie_id!r} has no labeled segments")

    event_counts = np.zeros(len(EVENT_CLASSES))
    genre_counts = np.zeros(len(GENRE_CLASSES))
    for segment in labels.segments:
        event_idx = _EVENT_INDEX.get(segment.event)
        if event_idx is None:
            raise UnknownLabelError(
                f"movie {labels.movie_id!r} segment {segment.index}: "
                f"unknown event class {segment.event!r}"
            )
        event_counts[event_idx] += 1
        if segment.event == "music":
            if segment.genre is None:
                raise UnknownLabelError(
                    f"movie {labels.movie_id!r} segment {segment.index}: "
                    "music segment without a genre"
                )
            genre_idx = _GENRE_INDEX.get(segment.genre)
            if genre_idx is None:
                raise UnknownLabelError(
                    f"movie {labels.movie_id!r} segment {segment.index}: "
                    f"unknown genre class {segment.genre!r}"
                )
            genre_counts[genre_idx] += 1
        elif segment.genre is not None:
            raise UnknownLabelError(
                f"movie {labels.movie_id!r} segment {segment.index}: "
                f"genre on non-music event {segment.event!r}"
            )

    events = event_counts / event_counts.sum()
    music_total = genre_counts.sum()
    genres = genre_counts / music_total if music_total > 0 else genre_counts
    return events, genres
