"""Binary categorical vectors over the union of actors, directors and genres."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TAG_KINDS = ("actor", "director", "genre")


class UnknownTagError(KeyError):
    """A movie carries a tag absent from the index (strict mode)."""


@dataclass
class MovieMetadata:
    movie_id: str
    title: str
    actors: list[str] = field(default_factory=list)
    directors: list[str] = field(default_factory=list)
    genres: list[str] = field(default_factory=list)
    rating: float = 0.0

    def normalized(self, kind: str) -> list[str]:
        """Deduplicated, trimmed, case-normalized tags of one kind."""
        raw = {"actor": self.actors, "director": self.directors, "genre": self.genres}[kind]
        seen: dict[str, None] = {}
        for value in raw:
            key = value.strip().lower()
            if key:
                seen.setdefault(key, None)
        return list(seen)


@dataclass
class TagIndex:
    column: dict[tuple[str, str], int]   # (kind, normalized tag) -> column

    def __len__(self) -> int:
        return len(self.column)

    @property
    def tags(self) -> list[tuple[str, str]]:
        out: list[tuple[str, str] | None] = [None] * len(self.column)
        for key, idx in self.column.items():
            out[idx] = key
        return out  # type: ignore[return-value]


def load_metadata(path: str | Path) -> list[MovieMetadata]:
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        MovieMetadata(
            movie_id=r["movie_id"],
            title=r.get("title", r["movie_id"]),
            actors=list(r.get("actors", [])),
            directors=list(r.get("directors", [])),
            genres=list(r.get("genres", [])),
            rating=float(r.get("rating", 0.0)),
        )
        for r in records
    ]


def build_index(metadata: list[MovieMetadata]) -> TagIndex:
    """Stable tag ordering: by kind, then lexicographic within kind."""
    if not metadata:
        raise ValueError("build_index requires at least one movie")
    keys: set[tuple[str, str]] = set()
    for movie in metadata:
        for kind in TAG_KINDS:
            keys.update((kind, tag) for tag in movie.normalized(kind))
    ordered = sorted(keys, key=lambda k: (TAG_KINDS.index(k[0]), k[1]))
    return TagIndex(column={key: i for i, key in enumerate(ordered)})


def vectorize(
    metadata: list[MovieMetadata], index: TagIndex, strict: bool = True
) -> np.ndarray:
    """The n_movies x n_tags binary membership matrix.

    Unknown tags raise UnknownTagError in strict mode and are skipped with
    a warning otherwise.
    """
    matrix = np.zeros((len(metadata), len(index)), dtype=np.int8)
    for row, movie in enumerate(metadata):
        for kind in TAG_KINDS:
            for tag in movie.normalized(kind):
                col = index.column.get((kind, tag))
                if col is None:
                    if strict:
                        raise UnknownTagError(
                            f"movie {movie.movie_id!r}: {kind} {tag!r} not in index"
                        )
                    warnings.warn(
                        f"movie {movie.movie_id!r}: ignoring unknown {kind} {tag!r}"
                    )
                    continue
                matrix[row, col] = 1
    return matrix
