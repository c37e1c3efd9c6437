"""Loss terms and their exact gradients with respect to the predictions.

Every loss returns a ``LossValue`` carrying the scalar and the gradient
with respect to its prediction argument (per-sample predictions for the
regression losses, the full probability matrix for the classification
losses). All values are averaged over the batch so the combination weight
is independent of batch size.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError

LOG_EPS = 1e-8
ROW_SUM_TOL = 1e-6


@dataclass
class LossValue:
    value: float
    grad: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise NumericalError(f"non-finite loss value {self.value!r}")


def wasserstein_1d(pred, prior_samples):
    """Optimal-transport distance between two equal-size 1-D samples.

    Both sets are sorted ascending and matched pairwise; the value is the
    mean absolute difference of the matched pairs, which for scalars is
    the minimum over all pairings. The gradient routes each pair's sign
    back through the (frozen) sort permutation; sign(0) = 0.
    """
    pred = np.asarray(pred, dtype=np.float64)
    prior_samples = np.asarray(prior_samples, dtype=np.float64)
    if pred.shape != prior_samples.shape or pred.ndim != 1 or pred.size == 0:
        raise ConfigError(
            f"wasserstein_1d needs two equal-length non-empty 1-D arrays, "
            f"got shapes {pred.shape} and {prior_samples.shape}"
        )
    if not (np.isfinite(pred).all() and np.isfinite(prior_samples).all()):
        raise NumericalError("wasserstein_1d inputs contain non-finite values")
    b = pred.size
    order = np.argsort(pred, kind="stable")
    total, signs = kernels.sorted_pairwise_l1(pred[order], np.sort(prior_samples, kind="stable"))
    grad = np.empty(b)
    grad[order] = signs / b
    return LossValue(value=total / b, grad=grad)


def kl_batch(pred_probs, prior_probs):
    """KL divergence from the batch-pooled prediction to the prior.

    The batch's rows are averaged into one distribution y, and the value
    is sum_c y_c * ln((y_c + eps) / (prior_c + eps)). The gradient flows
    through the batch mean, so every row receives 1/B of the pooled
    gradient.
    """
    pred_probs = np.asarray(pred_probs, dtype=np.float64)
    prior_probs = np.asarray(prior_probs, dtype=np.float64)
    if pred_probs.ndim != 2 or pred_probs.shape[0] == 0:
        raise ConfigError(f"pred_probs must be a non-empty B x m matrix, got shape {pred_probs.shape}")
    if prior_probs.shape != (pred_probs.shape[1],):
        raise ConfigError(
            f"prior has {prior_probs.shape} entries for {pred_probs.shape[1]} classes"
        )
    row_sums = pred_probs.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        raise ConfigError(f"prediction row {worst} sums to {row_sums[worst]!r}, not 1")
    if abs(float(prior_probs.sum()) - 1.0) > ROW_SUM_TOL:
        raise ConfigError(f"prior probabilities sum to {prior_probs.sum()!r}, not 1")
    b = pred_probs.shape[0]
    pooled = pred_probs.mean(axis=0)
    ratio = np.log(pooled + LOG_EPS) - np.log(prior_probs + LOG_EPS)
    value = float(np.dot(pooled, ratio))
    grad_pooled = ratio + pooled / (pooled + LOG_EPS)
    grad = np.tile(grad_pooled / b, (b, 1))
    return LossValue(value=value, grad=grad)


def l1_labels(pred, hard_labels):
    """Mean absolute deviation from the fixed zero-shot labels."""
    pred = np.asarray(pred, dtype=np.float64)
    hard_labels = np.asarray(hard_labels, dtype=np.float64)
    if pred.shape != hard_labels.shape or pred.ndim != 1 or pred.size == 0:
        raise ConfigError(
            f"l1_labels needs two equal-length non-empty 1-D arrays, "
            f"got shapes {pred.shape} and {hard_labels.shape}"
        )
    diff = pred - hard_labels
    b = pred.size
    return LossValue(value=float(np.abs(diff).mean()), grad=np.sign(diff) / b)


def cross_entropy_labels(pred_probs, hard_index):
    """Mean negative log-probability of the fixed zero-shot class."""
    pred_probs = np.asarray(pred_probs, dtype=np.float64)
    hard_index = np.asarray(hard_index)
    if pred_probs.ndim != 2 or pred_probs.shape[0] == 0:
        raise ConfigError(f"pred_probs must be a non-empty B x m matrix, got shape {pred_probs.shape}")
    b, m = pred_probs.shape
    if hard_index.shape != (b,):
        raise ConfigError(f"hard_index shape {hard_index.shape} does not match batch size {b}")
    if not np.issubdtype(hard_index.dtype, np.integer):
        hard_index = hard_index.astype(np.int64)
    if np.any(hard_index < 0) or np.any(hard_index >= m):
        raise ConfigError(f"class index out of range [0, {m})")
    row_sums = pred_probs.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        raise ConfigError(f"prediction row {worst} sums to {row_sums[worst]!r}, not 1")
    rows = np.arange(b)
    picked = pred_probs[rows, hard_index]
    value = float(-np.log(picked + LOG_EPS).mean())
    grad = np.zeros_like(pred_probs)
    grad[rows, hard_index] = -1.0 / (b * (picked + LOG_EPS))
    return LossValue(value=value, grad=grad)


def combined(prior_loss, labels_loss, alpha):
    """Total objective: prior term plus alpha times the labels term."""
    if alpha < 0.0:
        raise ConfigError(f"alpha must be >= 0, got {alpha}")
    if prior_loss.grad.shape != labels_loss.grad.shape:
        raise ConfigError(
            f"gradient shapes differ: {prior_loss.grad.shape} vs {labels_loss.grad.shape}"
        )
    return LossValue(
        value=prior_loss.value + alpha * labels_loss.value,
        grad=prior_loss.grad + alpha * labels_loss.grad,
    )
