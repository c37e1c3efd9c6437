"""Zero-shot labeling: nearest-caption assignment on unit-norm embeddings.

Rows are unit-norm after loading, so cosine similarity is a plain dot
product and any positive rescaling of the stored vectors is irrelevant to
the argmax.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class ZeroShotResult:
    """Per-sample nearest caption: index, its label value, optional scores."""

    hard_labels: np.ndarray
    assigned_index: np.ndarray
    similarity: np.ndarray | None = None


def assign(dataset, captions, keep_similarity=False):
    """Assign every sample to its most similar caption.

    Ties break toward the lowest caption index. The result is fixed for
    the lifetime of a training run: hard labels are computed once and used
    as immutable targets.
    """
    if dataset.d != captions.d:
        raise ConfigError(
            f"embedding dimension {dataset.d} does not match caption dimension {captions.d}"
        )
    if captions.m < 1:
        raise ConfigError("caption set is empty")
    similarity = dataset.embeddings @ captions.embeddings.T
    assigned = np.argmax(similarity, axis=1)
    return ZeroShotResult(
        hard_labels=captions.values[assigned],
        assigned_index=assigned,
        similarity=similarity if keep_similarity else None,
    )


def predicted_histogram(result, captions):
    """Fraction of samples assigned to each caption (sums to 1)."""
    counts = np.bincount(result.assigned_index, minlength=captions.m)
    return counts / result.assigned_index.size
