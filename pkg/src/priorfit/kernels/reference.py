"""Reference (pure numpy) implementations of the hot kernels.

These define the semantics; the compiled extension in ``_core.pyx`` is a
drop-in replacement for speed. All kernels take and return float64 arrays
and are deterministic.
"""

import numpy as np


def relu(pre):
    """Elementwise max(pre, 0)."""
    return np.maximum(pre, 0.0)


def relu_grad(pre, grad_out):
    """Backprop through relu: pass gradient where pre > 0."""
    return np.where(pre > 0.0, grad_out, 0.0)


def softmax_rows(logits):
    """Row-wise softmax, shifted by the row max for stability."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def softmax_grad_rows(probs, grad_probs):
    """Backprop through a row softmax.

    Given p = softmax(z) and dL/dp, returns dL/dz = p * (g - sum(g * p)).
    """
    inner = (grad_probs * probs).sum(axis=1, keepdims=True)
    return probs * (grad_probs - inner)


def sorted_pairwise_l1(a_sorted, b_sorted):
    """Sum of |a - b| over aligned entries plus the elementwise signs.

    Both inputs must already be sorted ascending. Returns (total, signs)
    where signs[i] = sign(a_sorted[i] - b_sorted[i]) with sign(0) = 0.
    """
    diff = a_sorted - b_sorted
    return float(np.abs(diff).sum()), np.sign(diff)


def adam_update(param, grad, m, v, t, lr, beta1, beta2, eps, weight_decay):
    """One fused Adam step with bias correction, mutating all state in place.

    Decoupled weight decay (lr * weight_decay * param) is subtracted after
    the Adam term. ``t`` is the already-incremented step counter (t >= 1).
    """
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)
    if weight_decay != 0.0:
        param -= lr * weight_decay * param


def l2_normalize_rows(x):
    """Scale every row of x to unit L2 norm. Returns (normalized, norms)."""
    norms = np.sqrt((x * x).sum(axis=1))
    return x / norms[:, None], norms
