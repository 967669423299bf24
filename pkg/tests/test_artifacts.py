import numpy as np
from scipy import sparse

from cinesim.artifacts import (
    read_bow_csv,
    read_features_csv,
    read_ground_truth_csv,
    read_model_bundle,
    read_similarity_csv,
    read_vocabulary_tsv,
    read_weights_json,
    write_bow_csv,
    write_features_csv,
    write_model_bundle,
    write_similarity_csv,
    write_vocabulary_tsv,
    write_weights_json,
)
from cinesim.similarity import FusionWeights, SimilarityMatrix, fit_weights
from cinesim.subtitles import TokenStream, build_bow
from cinesim.textmodels import fit_lda, fit_lsi, tfidf


def toy_corpus():
    streams = [
        TokenStream("a", ["ship", "sea", "ship", "storm", "wave"]),
        TokenStream("b", ["sea", "storm", "storm", "wave"]),
        TokenStream("c", ["ship", "sea", "captain", "wave"]),
        TokenStream("d", ["captain", "ship", "wave", "storm"]),
    ]
    return build_bow(streams, min_collection_freq=2, max_doc_ratio=1.0)


class TestBowRoundTrip:
    def test_vocabulary_tsv(self, tmp_path):
        vocab, _ = toy_corpus()
        path = tmp_path / "vocab.tsv"
        write_vocabulary_tsv(path, vocab)
        loaded = read_vocabulary_tsv(path)
        assert loaded.term_to_index == vocab.term_to_index
        assert np.array_equal(loaded.doc_freq, vocab.doc_freq)
        assert np.array_equal(loaded.collection_freq, vocab.collection_freq)

    def test_bow_csv(self, tmp_path):
        vocab, bow = toy_corpus()
        write_bow_csv(tmp_path / "bow.csv", tmp_path / "ids.json", bow)
        loaded = read_bow_csv(tmp_path / "bow.csv", tmp_path / "ids.json", len(vocab))
        assert loaded.doc_ids == bow.doc_ids
        assert (loaded.counts != bow.counts).nnz == 0


class TestMatrixRoundTrips:
    def test_features_csv(self, tmp_path):
        rng = np.random.default_rng(1)
        matrix = rng.normal(size=(4, 7))
        write_features_csv(tmp_path / "f.csv", ["a", "b", "c", "d"], matrix)
        ids, loaded = read_features_csv(tmp_path / "f.csv")
        assert ids == ["a", "b", "c", "d"]
        assert np.array_equal(loaded, matrix)  # repr floats round-trip exactly

    def test_similarity_csv(self, tmp_path):
        rng = np.random.default_rng(2)
        values = rng.uniform(size=(5, 5))
        values = (values + values.T) / 2
        np.fill_diagonal(values, 1.0)
        sim = SimilarityMatrix(values, [f"m{i}" for i in range(5)], "test")
        write_similarity_csv(tmp_path / "s.csv", sim)
        loaded = read_similarity_csv(tmp_path / "s.csv", modality="test")
        assert loaded.doc_ids == sim.doc_ids
        assert np.array_equal(loaded.values, sim.values)

    def test_ground_truth_detection(self, tmp_path):
        square = tmp_path / "sq.csv"
        square.write_text("movie_id,a,b\na,1.0,0.5\nb,0.5,1.0\n")
        kind, ids, values = read_ground_truth_csv(square)
        assert kind == "similarity"
        tags = tmp_path / "tags.csv"
        tags.write_text("movie_id,funny,dark\na,0.9,0.1\nb,0.2,0.8\nc,0.5,0.5\n")
        kind, ids, values = read_ground_truth_csv(tags)
        assert kind == "tags"
        assert values.shape == (3, 2)


class TestModelBundles:
    def test_lsi_bundle(self, tmp_path):
        vocab, bow = toy_corpus()
        model = fit_lsi(tfidf(bow, vocab), n_concepts=2)
        write_model_bundle(tmp_path / "lsi.model.json", model)
        bundle = read_model_bundle(tmp_path / "lsi.model.json")
        assert bundle["kind"] == "lsi"
        assert np.array_equal(bundle["arrays"]["doc_embedding"], model.doc_embedding)
        assert np.array_equal(
            bundle["arrays"]["singular_values"].ravel(), model.singular_values
        )
        assert np.array_equal(bundle["arrays"]["term_concepts"], model.term_concepts)

    def test_lda_bundle(self, tmp_path):
        vocab, bow = toy_corpus()
        model = fit_lda(bow, vocab, n_topics=2, sweeps=10, burn_in=2, seed=0)
        write_model_bundle(tmp_path / "lda.model.json", model)
        bundle = read_model_bundle(tmp_path / "lda.model.json")
        assert bundle["kind"] == "lda"
        assert bundle["seed"] == 0
        assert bundle["sweeps"] == 10
        assert np.array_equal(bundle["arrays"]["topic_word"], model.topic_word)
        assert np.array_equal(bundle["arrays"]["doc_topic"], model.doc_topic)
        assert np.array_equal(bundle["arrays"]["alpha"].ravel(), model.alpha)
        assert bundle["eta"] == model.eta


class TestWeights:
    def test_weights_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        def sym(n):
            m = rng.uniform(size=(n, n))
            m = (m + m.T) / 2
            np.fill_diagonal(m, 1.0)
            return m
        ids = [f"m{i}" for i in range(6)]
        matrices = [SimilarityMatrix(sym(6), ids, m) for m in ("alpha", "beta")]
        gt = SimilarityMatrix(sym(6), ids, "gt")
        weights, report = fit_weights(matrices, gt)
        write_weights_json(tmp_path / "w.json", weights, report)
        loaded = read_weights_json(tmp_path / "w.json")
        assert loaded.as_dict() == weights.as_dict()
        assert isinstance(loaded, FusionWeights)
