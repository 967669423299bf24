import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cinesim.audio import (
    EVENT_CLASSES,
    EmptySequenceError,
    GENRE_CLASSES,
    Segment,
    SegmentLabels,
    UnknownLabelError,
    aggregate_labels,
    load_labels,
)


def labels_of(events, genres=None):
    genres = genres or {}
    segments = [
        Segment(index=i, event=e, genre=genres.get(i)) for i, e in enumerate(events)
    ]
    return SegmentLabels("m", segments)


class TestAggregateLabels:
    def test_all_speech(self):
        events, genres = aggregate_labels(labels_of(["speech"] * 10))
        assert events.tolist() == [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        assert np.all(genres == 0.0)

    def test_mixed_music_and_speech_direct_count(self):
        labels = labels_of(
            ["music", "music", "music", "music"] + ["speech"] * 6,
            genres={0: "rock", 1: "rock", 2: "electronic", 3: "classical"},
        )
        events, genres = aggregate_labels(labels)
        assert events[0] == pytest.approx(0.4)   # music proportion
        assert events[1] == pytest.approx(0.6)   # speech proportion
        expected = [0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.0, 0.5]
        assert genres.tolist() == pytest.approx(expected)

    def test_electronic_heavy_score(self):
        # a movie whose music is mostly electronic concentrates genre mass there
        labels = labels_of(
            ["music"] * 8 + ["speech"] * 2,
            genres={i: ("electronic" if i < 7 else "rock") for i in range(8)},
        )
        _, genres = aggregate_labels(labels)
        assert genres[GENRE_CLASSES.index("electronic")] == pytest.approx(7 / 8)
        assert np.argmax(genres) == GENRE_CLASSES.index("electronic")

    def test_empty_sequence(self):
        with pytest.raises(EmptySequenceError):
            aggregate_labels(SegmentLabels("m", []))

    def test_unknown_event_fatal(self):
        with pytest.raises(UnknownLabelError):
            aggregate_labels(labels_of(["talking"]))

    def test_unknown_genre_fatal(self):
        with pytest.raises(UnknownLabelError):
            aggregate_labels(labels_of(["music"], genres={0: "polka"}))

    def test_music_requires_genre(self):
        with pytest.raises(UnknownLabelError):
            aggregate_labels(labels_of(["music"]))

    def test_genre_only_on_music(self):
        with pytest.raises(UnknownLabelError):
            aggregate_labels(labels_of(["speech"], genres={0: "rock"}))

    def test_vectors_sum_to_one(self):
        labels = labels_of(
            ["music", "screams", "fights", "music"], genres={0: "jazz", 3: "blues"}
        )
        events, genres = aggregate_labels(labels)
        assert events.sum() == pytest.approx(1.0, abs=1e-9)
        assert genres.sum() == pytest.approx(1.0, abs=1e-9)

    @given(
        st.lists(st.sampled_from([e for e in EVENT_CLASSES if e != "music"]), min_size=1, max_size=40),
        st.randoms(),
    )
    def test_event_vector_permutation_equivariant(self, events, rand):
        base, _ = aggregate_labels(labels_of(events))
        shuffled = list(events)
        rand.shuffle(shuffled)
        permuted, _ = aggregate_labels(labels_of(shuffled))
        assert np.allclose(base, permuted)

    def test_concatenation_is_count_weighted_average(self):
        a = ["speech"] * 3 + ["screams"]
        b = ["env-abrupt"] * 6
        ea, _ = aggregate_labels(labels_of(a))
        eb, _ = aggregate_labels(labels_of(b))
        eab, _ = aggregate_labels(labels_of(a + b))
        combined = (len(a) * ea + len(b) * eb) / (len(a) + len(b))
        assert np.allclose(eab, combined)

    def test_genre_vector_ignores_non_music(self):
        music = labels_of(["music", "music"], genres={0: "rap", 1: "reggae"})
        _, genres_before = aggregate_labels(music)
        padded = labels_of(
            ["music", "music"] + ["speech"] * 25, genres={0: "rap", 1: "reggae"}
        )
        _, genres_after = aggregate_labels(padded)
        assert np.array_equal(genres_before, genres_after)


class TestLoadLabels:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "labels.json"
        payload = {
            "movie_id": "tt001",
            "segments": [
                {"i": 0, "event": "music", "genre": "rock"},
                {"i": 1, "event": "speech"},
            ],
        }
        path.write_text(json.dumps(payload))
        labels = load_labels(path)
        assert labels.movie_id == "tt001"
        assert labels.segments[0] == Segment(0, "music", "rock")
        assert labels.segments[1] == Segment(1, "speech", None)
