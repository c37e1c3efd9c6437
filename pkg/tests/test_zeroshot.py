import numpy as np
import pytest

from priorfit.dataio import CaptionSet, EmbeddingDataset
from priorfit.errors import ConfigError
from priorfit.zeroshot import assign, predicted_histogram


def _captions(emb, values, task="regression"):
    emb = np.asarray(emb, dtype=np.float64)
    return CaptionSet(
        embeddings=emb,
        values=np.asarray(values, dtype=np.float64),
        names=[f"c{i}" for i in range(emb.shape[0])],
        task=task,
    )


def test_assign_orthonormal_case():
    dataset = EmbeddingDataset(embeddings=np.array([[1.0, 0.0]]))
    captions = _captions([[1.0, 0.0], [0.0, 1.0]], [5.0, 9.0])
    result = assign(dataset, captions)
    assert result.hard_labels[0] == 5.0
    assert result.assigned_index[0] == 0


def test_assign_tie_breaks_to_lowest_index():
    # equidistant from both captions
    dataset = EmbeddingDataset(embeddings=np.array([[1.0, 1.0]]) / np.sqrt(2))
    captions = _captions([[1.0, 0.0], [0.0, 1.0]], [5.0, 9.0])
    result = assign(dataset, captions)
    assert result.assigned_index[0] == 0


def test_assign_matches_bruteforce_argmax(rng):
    emb = rng.normal(size=(20, 8))
    emb /= np.linalg.norm(emb, axis=1, keepdims=True)
    cap = rng.normal(size=(5, 8))
    cap /= np.linalg.norm(cap, axis=1, keepdims=True)
    dataset = EmbeddingDataset(embeddings=emb)
    captions = _captions(cap, np.arange(5.0) * 2 + 1)
    result = assign(dataset, captions, keep_similarity=True)
    for i in range(20):
        best, best_j = -np.inf, -1
        for j in range(5):
            score = float(np.dot(emb[i], cap[j]))
            if score > best:
                best, best_j = score, j
        assert result.assigned_index[i] == best_j
        assert result.hard_labels[i] == captions.values[best_j]
        assert np.isclose(result.similarity[i, best_j], best)


def test_assign_invariant_to_row_rescaling(rng):
    # scaling a raw embedding row does not change the argmax after load-time
    # normalization
    emb = rng.normal(size=(10, 4))
    cap = rng.normal(size=(3, 4))
    cap /= np.linalg.norm(cap, axis=1, keepdims=True)
    unit = emb / np.linalg.norm(emb, axis=1, keepdims=True)
    scaled = emb * rng.uniform(0.1, 10.0, size=(10, 1))
    scaled_unit = scaled / np.linalg.norm(scaled, axis=1, keepdims=True)
    captions = _captions(cap, [1.0, 2.0, 3.0])
    a = assign(EmbeddingDataset(embeddings=unit), captions)
    b = assign(EmbeddingDataset(embeddings=scaled_unit), captions)
    assert np.array_equal(a.assigned_index, b.assigned_index)


def test_assign_dimension_mismatch():
    dataset = EmbeddingDataset(embeddings=np.eye(3))
    captions = _captions(np.eye(4), [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ConfigError):
        assign(dataset, captions)


def test_histogram_degenerate():
    dataset = EmbeddingDataset(embeddings=np.tile([0.0, 1.0], (7, 1)))
    captions = _captions([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0], [-1.0, 0.0]], [1, 2, 3, 4])
    result = assign(dataset, captions)
    hist = predicted_histogram(result, captions)
    np.testing.assert_allclose(hist, [0.0, 0.0, 1.0, 0.0])


def test_histogram_counting():
    from priorfit.zeroshot import ZeroShotResult

    captions = _captions(np.eye(4), [1, 2, 3, 4])
    result = ZeroShotResult(
        hard_labels=np.array([1.0, 1.0, 2.0, 4.0]),
        assigned_index=np.array([0, 0, 1, 3]),
    )
    np.testing.assert_allclose(predicted_histogram(result, captions), [0.5, 0.25, 0.0, 0.25])


def test_histogram_invariant_to_row_order(rng):
    emb = rng.normal(size=(30, 6))
    emb /= np.linalg.norm(emb, axis=1, keepdims=True)
    cap = rng.normal(size=(4, 6))
    cap /= np.linalg.norm(cap, axis=1, keepdims=True)
    captions = _captions(cap, [1, 2, 3, 4])
    h1 = predicted_histogram(assign(EmbeddingDataset(embeddings=emb), captions), captions)
    perm = rng.permutation(30)
    h2 = predicted_histogram(assign(EmbeddingDataset(embeddings=emb[perm]), captions), captions)
    np.testing.assert_allclose(h1, h2)
