import math

import numpy as np
import pytest

from cinesim.metadata import (
    MovieMetadata,
    UnknownTagError,
    build_index,
    load_metadata,
    vectorize,
)


def movie(mid, actors=(), directors=(), genres=(), rating=7.0):
    return MovieMetadata(
        movie_id=mid,
        title=mid.upper(),
        actors=list(actors),
        directors=list(directors),
        genres=list(genres),
        rating=rating,
    )


class TestBuildIndex:
    def test_shared_actor_union_count(self):
        a = movie("a", actors=["X", "Y"], directors=["D1"], genres=["g1", "g2"])  # 5 tags
        b = movie("b", actors=["X", "Z"], directors=["D2"], genres=["g3", "g4"])  # 5 tags
        index = build_index([a, b])
        assert len(index) == 9  # X,Y,Z + D1,D2 + g1..g4

    def test_one_shared_actor_eleven_columns(self):
        # two movies with 6 tags each sharing exactly one actor: 11 unique columns
        a = movie("a", actors=["s", "p"], directors=["d1"], genres=["g1", "g2", "g3"])
        b = movie("b", actors=["s", "q"], directors=["d2"], genres=["g4", "g5", "g6"])
        assert len(build_index([a, b])) == 11

    def test_single_movie(self):
        m = movie("a", actors=["x"], directors=["d"], genres=["g"])
        assert len(build_index([m])) == 3

    def test_idempotent(self):
        movies = [movie("a", actors=["x"], genres=["g"]), movie("b", directors=["d"])]
        assert build_index(movies).column == build_index(movies).column

    def test_ordering_kind_then_lexicographic(self):
        m = movie("a", actors=["zeta", "alpha"], directors=["mid"], genres=["beta"])
        index = build_index([m])
        assert index.tags == [
            ("actor", "alpha"),
            ("actor", "zeta"),
            ("director", "mid"),
            ("genre", "beta"),
        ]

    def test_case_and_whitespace_normalized(self):
        a = movie("a", actors=["John Ford "])
        b = movie("b", actors=["john ford"])
        assert len(build_index([a, b])) == 1


class TestVectorize:
    def test_zero_tag_movie(self):
        movies = [movie("a", actors=["x"]), movie("b")]
        index = build_index(movies)
        matrix = vectorize(movies, index)
        assert np.all(matrix[1] == 0)

    def test_identical_movies_identical_rows(self):
        movies = [
            movie("a", actors=["x"], genres=["g"]),
            movie("b", actors=["x"], genres=["g"]),
        ]
        matrix = vectorize(movies, build_index(movies))
        assert np.array_equal(matrix[0], matrix[1])

    def test_five_movie_fixture_matches_enumeration(self):
        movies = [
            movie("m1", actors=["a1", "a2"], directors=["d1"], genres=["drama"]),
            movie("m2", actors=["a2"], directors=["d1"], genres=["drama", "crime"]),
            movie("m3", actors=["a3"], directors=["d2"], genres=["comedy"]),
            movie("m4", actors=["a1", "a3"], directors=["d2"], genres=["drama"]),
            movie("m5", actors=[], directors=["d3"], genres=["crime", "comedy"]),
        ]
        index = build_index(movies)
        matrix = vectorize(movies, index)
        # hand enumeration per movie
        by_tag = {tag: col for tag, col in index.column.items()}
        expected = np.zeros_like(matrix)
        rows = {
            0: [("actor", "a1"), ("actor", "a2"), ("director", "d1"), ("genre", "drama")],
            1: [("actor", "a2"), ("director", "d1"), ("genre", "drama"), ("genre", "crime")],
            2: [("actor", "a3"), ("director", "d2"), ("genre", "comedy")],
            3: [("actor", "a1"), ("actor", "a3"), ("director", "d2"), ("genre", "drama")],
            4: [("director", "d3"), ("genre", "crime"), ("genre", "comedy")],
        }
        for row, tags in rows.items():
            for tag in tags:
                expected[row, by_tag[tag]] = 1
        assert np.array_equal(matrix, expected)

    def test_row_sums_count_tags(self):
        movies = [
            movie("m1", actors=["a", "a", "A "], directors=["d"], genres=["g1", "g2"]),
        ]
        matrix = vectorize(movies, build_index(movies))
        # "a" deduplicates with "A ": 1 actor + 1 director + 2 genres
        assert matrix.sum() == 4

    def test_unknown_tag_strict(self):
        known = [movie("a", actors=["x"])]
        index = build_index(known)
        stranger = [movie("b", actors=["y"])]
        with pytest.raises(UnknownTagError):
            vectorize(stranger, index)

    def test_unknown_tag_lenient_warns(self):
        known = [movie("a", actors=["x"])]
        index = build_index(known)
        stranger = [movie("b", actors=["x", "y"])]
        with pytest.warns(UserWarning):
            matrix = vectorize(stranger, index, strict=False)
        assert matrix.sum() == 1

    def test_cosine_equals_set_formula(self):
        movies = [
            movie("m1", actors=["a1", "a2"], directors=["d1"], genres=["g1"]),
            movie("m2", actors=["a2", "a3"], directors=["d1"], genres=["g2"]),
            movie("m3", actors=["a4"], directors=["d2"], genres=["g1", "g2"]),
        ]
        matrix = vectorize(movies, build_index(movies)).astype(float)
        tag_sets = [
            {("actor", t) for t in m.normalized("actor")}
            | {("director", t) for t in m.normalized("director")}
            | {("genre", t) for t in m.normalized("genre")}
            for m in movies
        ]
        for i in range(3):
            for j in range(3):
                cosine = matrix[i] @ matrix[j] / (
                    np.linalg.norm(matrix[i]) * np.linalg.norm(matrix[j])
                )
                shared = len(tag_sets[i] & tag_sets[j])
                expected = shared / math.sqrt(len(tag_sets[i]) * len(tag_sets[j]))
                assert cosine == pytest.approx(expected, abs=1e-12)


class TestLoadMetadata:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "metadata.json"
        path.write_text(
            '[{"movie_id": "tt1", "title": "T", "actors": ["A"], '
            '"directors": ["D"], "genres": ["G"], "rating": 8.3}]'
        )
        movies = load_metadata(path)
        assert movies[0].movie_id == "tt1"
        assert movies[0].rating == 8.3
        assert movies[0].normalized("actor") == ["a"]
