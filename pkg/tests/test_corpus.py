import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from textclf.corpus import (
    EmptyVocabularyError,
    LabeledDataset,
    StratificationError,
    build_vocabulary,
    decode_ids,
    encode_document,
    generate_synthetic_corpus,
    save_fold_assignment,
    stratified_holdout,
    stratified_kfold,
    zipf_fit,
)
from textclf.pipeline import TokenizedDocument


def docs_from(rows, labels=None):
    labels = labels or [None] * len(rows)
    return [
        TokenizedDocument(str(i), tuple(r), label)
        for i, (r, label) in enumerate(zip(rows, labels))
    ]


class TestVocabulary:
    def test_frequency_sorted_ids(self):
        vocab = build_vocabulary(docs_from([["a", "b"], ["a"]]), 1)
        assert vocab.token_to_id == {"a": 1, "b": 2}
        assert vocab.corpus_frequency[1] == 2
        assert vocab.document_frequency[1] == 2

    def test_empty_vocabulary_error(self):
        with pytest.raises(EmptyVocabularyError):
            build_vocabulary(docs_from([["a"]]), 2)

    def test_lexicographic_tie_break(self):
        vocab = build_vocabulary(docs_from([["b", "a"]]), 1)
        assert vocab.token_to_id == {"a": 1, "b": 2}

    def test_ids_are_dense_from_one(self):
        vocab = build_vocabulary(docs_from([["c", "b", "a", "c"]]), 1)
        assert sorted(vocab.id_to_token) == list(range(1, len(vocab) + 1))

    def test_min_df_filters(self):
        vocab = build_vocabulary(docs_from([["a", "b"], ["a"], ["a"]]), 2)
        assert "b" not in vocab
        assert "a" in vocab


class TestEncodeDocument:
    def test_padding(self):
        vocab = build_vocabulary(docs_from([["a", "b", "c"]]), 1)
        ids = encode_document(["a", "b", "c"], vocab, 5)
        assert ids.tolist() == [1, 2, 3, 0, 0]

    def test_truncates_to_first_max_len(self):
        vocab = build_vocabulary(docs_from([["w"]]), 1)
        ids = encode_document(["w"] * 120, vocab, 100)
        assert ids.tolist() == [1] * 100

    def test_unknown_tokens_dropped(self):
        vocab = build_vocabulary(docs_from([["a"]]), 1)
        assert encode_document(["x", "y"], vocab, 3).tolist() == [0, 0, 0]

    def test_max_len_validated(self):
        vocab = build_vocabulary(docs_from([["a"]]), 1)
        with pytest.raises(ValueError):
            encode_document(["a"], vocab, 0)

    @given(st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=0, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_encode_decode_roundtrip(self, tokens):
        vocab = build_vocabulary(docs_from([["a", "b", "c", "d"]]), 1)
        ids = encode_document(tokens, vocab, 8)
        assert decode_ids(ids, vocab) == tokens


class TestStratifiedKfold:
    def _dataset(self, counts):
        rows, labels = [], []
        for cls, n in counts.items():
            for _ in range(n):
                rows.append(["t"])
                labels.append(cls)
        return LabeledDataset(docs_from(rows, labels))

    def test_balanced_folds(self):
        ds = self._dataset({"x": 50, "y": 50})
        fa = stratified_kfold(ds, 5, seed=0)
        for fold in range(5):
            idx = fa.indices_of(fold)
            labels = [ds.documents[i].label for i in idx]
            assert labels.count("x") == 10 and labels.count("y") == 10

    def test_small_class_rejected(self):
        ds = self._dataset({"x": 3, "y": 10})
        with pytest.raises(StratificationError, match="'x'"):
            stratified_kfold(ds, 5, seed=0)

    def test_deterministic(self):
        ds = self._dataset({"x": 13, "y": 9})
        a = stratified_kfold(ds, 3, seed=7)
        b = stratified_kfold(ds, 3, seed=7)
        assert np.array_equal(a.folds, b.folds)

    def test_partition_properties(self):
        ds = self._dataset({"x": 13, "y": 9, "z": 11})
        fa = stratified_kfold(ds, 4, seed=1)
        assert set(fa.folds.tolist()) <= set(range(4))
        assert len(fa.folds) == len(ds.documents)
        union = np.concatenate([fa.indices_of(f) for f in range(4)])
        assert sorted(union.tolist()) == list(range(len(ds.documents)))
        for cls in ds.classes:
            counts = [
                sum(1 for i in fa.indices_of(f) if ds.documents[i].label == cls)
                for f in range(4)
            ]
            assert max(counts) - min(counts) <= 1

    def test_csv_export(self, tmp_path):
        ds = self._dataset({"x": 4, "y": 4})
        fa = stratified_kfold(ds, 2, seed=0)
        path = tmp_path / "folds.csv"
        save_fold_assignment(fa, ds, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "doc_id,fold"
        assert len(lines) == 9


class TestStratifiedHoldout:
    def test_proportions(self):
        rows = [["t"]] * 100
        labels = ["a"] * 60 + ["b"] * 40
        ds = LabeledDataset(docs_from(rows, labels))
        train, test = stratified_holdout(ds, 0.2, seed=0)
        assert len(test) == 20 and len(train) == 80
        test_labels = [ds.documents[i].label for i in test]
        assert test_labels.count("a") == 12 and test_labels.count("b") == 8

    def test_disjoint_and_complete(self):
        ds = LabeledDataset(docs_from([["t"]] * 30, ["a", "b", "c"] * 10))
        train, test = stratified_holdout(ds, 0.25, seed=3)
        assert set(train) | set(test) == set(range(30))
        assert not set(train) & set(test)


class TestZipfFit:
    def test_inverse_rank_frequencies(self):
        vocab = build_vocabulary(
            docs_from([["a"] * 100 + ["b"] * 50 + ["c"] * 33 + ["d"] * 25]), 1
        )
        slope, intercept, r2 = zipf_fit(vocab)
        ranks = np.log([1, 2, 3, 4])
        freqs = np.log([100, 50, 33, 25])
        assert abs(slope - oracles.leastsq_slope(ranks, freqs)) < 1e-12
        assert abs(slope + 1.0) < 0.02
        assert r2 > 0.99

    def test_flat_frequencies_zero_slope(self):
        vocab = build_vocabulary(docs_from([["a", "b", "c"]]), 1)
        slope, _, _ = zipf_fit(vocab)
        assert slope == 0.0

    def test_too_small_vocab(self):
        vocab = build_vocabulary(docs_from([["a", "b"]]), 1)
        with pytest.raises(ValueError):
            zipf_fit(vocab)

    def test_generated_corpus_slope(self):
        ds = generate_synthetic_corpus(1, 200, 1000, 0, 1000, zipf_exponent=1.0, seed=5)
        vocab = build_vocabulary(ds.documents, 1)
        slope, _, _ = zipf_fit(vocab)
        assert -1.1 <= slope <= -0.9


class TestSyntheticCorpus:
    def test_counts(self):
        ds = generate_synthetic_corpus(2, 10, 5, 2, 7, seed=0)
        assert len(ds.documents) == 20
        assert len(ds.classes) == 2
        assert all(len(d.tokens) == 7 for d in ds.documents)

    def test_disjoint_private_vocabularies(self):
        ds = generate_synthetic_corpus(3, 5, 10, 0, 30, seed=1)
        seen = {}
        for doc in ds.documents:
            for token in doc.tokens:
                seen.setdefault(token, set()).add(doc.label)
        assert all(len(classes) == 1 for classes in seen.values())

    def test_shared_pool_crosses_classes(self):
        ds = generate_synthetic_corpus(2, 40, 3, 3, 20, zipf_exponent=0.5, seed=2)
        shared_tokens = {t for t in set().union(*[set(d.tokens) for d in ds.documents])
                         if t.startswith("sh")}
        assert shared_tokens
        for token in shared_tokens:
            classes = {d.label for d in ds.documents if token in d.tokens}
            assert len(classes) == 2

    def test_deterministic(self):
        a = generate_synthetic_corpus(2, 4, 6, 2, 9, seed=9)
        b = generate_synthetic_corpus(2, 4, 6, 2, 9, seed=9)
        assert [d.tokens for d in a.documents] == [d.tokens for d in b.documents]

    def test_validates_counts(self):
        with pytest.raises(ValueError):
            generate_synthetic_corpus(0, 1, 1, 0, 1)


class TestLabeledDataset:
    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            LabeledDataset(docs_from([["a"]], ["x"]), classes=["y"])

    def test_duplicate_classes_rejected(self):
        with pytest.raises(ValueError):
            LabeledDataset(docs_from([["a"]], ["x"]), classes=["x", "x"])

    def test_classes_inferred_sorted(self):
        ds = LabeledDataset(docs_from([["a"], ["b"]], ["z", "m"]))
        assert ds.classes == ["m", "z"]
