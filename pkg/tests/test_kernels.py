"""Backend kernels: reference semantics, and compiled/reference agreement."""

import numpy as np
import pytest

from priorfit.kernels import BACKEND, reference

try:
    from priorfit.kernels import _core
except ImportError:
    _core = None

BACKENDS = [reference] if _core is None else [reference, _core]


def _ids(mod):
    return "compiled" if mod is not reference else "reference"


@pytest.mark.parametrize("impl", BACKENDS, ids=_ids)
def test_relu_and_grad(impl):
    pre = np.array([[-1.0, 0.0, 2.5], [3.0, -0.5, 0.0]])
    out = impl.relu(pre)
    assert np.array_equal(out, np.array([[0.0, 0.0, 2.5], [3.0, 0.0, 0.0]]))
    grad = impl.relu_grad(pre, np.ones_like(pre))
    assert np.array_equal(grad, np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]))


@pytest.mark.parametrize("impl", BACKENDS, ids=_ids)
def test_softmax_rows_normalized_and_stable(impl):
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(8, 5)) * 50.0  # large values: needs the shift
    probs = impl.softmax_rows(logits)
    assert np.all(probs > 0.0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    # invariant to adding a constant per row
    shifted = impl.softmax_rows(logits + 123.0)
    np.testing.assert_allclose(shifted, probs, rtol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=_ids)
def test_sorted_pairwise_l1(impl):
    total, signs = impl.sorted_pairwise_l1(np.array([1.0, 3.0]), np.array([2.0, 4.0]))
    assert total == 2.0
    assert np.array_equal(signs, np.array([-1.0, -1.0]))
    total, signs = impl.sorted_pairwise_l1(np.array([5.0]), np.array([5.0]))
    assert total == 0.0 and signs[0] == 0.0


@pytest.mark.parametrize("impl", BACKENDS, ids=_ids)
def test_adam_update_first_step(impl):
    p = np.array([0.0])
    m = np.zeros(1)
    v = np.zeros(1)
    impl.adam_update(p, np.array([1.0]), m, v, 1, 1e-3, 0.9, 0.999, 1e-8, 0.0)
    assert np.isclose(p[0], -1e-3, rtol=1e-6)


@pytest.mark.parametrize("impl", BACKENDS, ids=_ids)
def test_l2_normalize_rows(impl):
    x = np.array([[3.0, 0.0, 4.0], [0.0, 2.0, 0.0]])
    normalized, norms = impl.l2_normalize_rows(x)
    np.testing.assert_allclose(norms, [5.0, 2.0])
    np.testing.assert_allclose((normalized**2).sum(axis=1), 1.0, atol=1e-15)


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
def test_backends_agree():
    rng = np.random.default_rng(7)
    pre = rng.normal(size=(32, 17))
    grad = rng.normal(size=(32, 17))
    assert np.array_equal(reference.relu(pre), _core.relu(pre))
    assert np.array_equal(reference.relu_grad(pre, grad), _core.relu_grad(pre, grad))

    logits = rng.normal(size=(16, 9)) * 3.0
    probs_ref = reference.softmax_rows(logits)
    probs_core = _core.softmax_rows(logits)
    np.testing.assert_allclose(probs_core, probs_ref, rtol=1e-13, atol=1e-16)
    gp = rng.normal(size=(16, 9))
    np.testing.assert_allclose(
        _core.softmax_grad_rows(probs_core, gp),
        reference.softmax_grad_rows(probs_ref, gp),
        rtol=1e-12,
        atol=1e-16,
    )

    a = np.sort(rng.normal(size=50))
    b = np.sort(rng.normal(size=50))
    t_ref, s_ref = reference.sorted_pairwise_l1(a, b)
    t_core, s_core = _core.sorted_pairwise_l1(a, b)
    assert np.isclose(t_ref, t_core, rtol=1e-14)
    assert np.array_equal(s_ref, s_core)


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
def test_adam_bitwise_identical_across_backends():
    rng = np.random.default_rng(11)
    shape = (13, 7)
    p1 = rng.normal(size=shape)
    p2 = p1.copy()
    m1, v1 = np.zeros(shape), np.zeros(shape)
    m2, v2 = np.zeros(shape), np.zeros(shape)
    for t in range(1, 6):
        g = rng.normal(size=shape)
        reference.adam_update(p1, g, m1, v1, t, 1e-3, 0.9, 0.999, 1e-8, 1e-4)
        _core.adam_update(p2, g, m2, v2, t, 1e-3, 0.9, 0.999, 1e-8, 1e-4)
    assert np.array_equal(p1, p2)
    assert np.array_equal(m1, m2)
    assert np.array_equal(v1, v2)


def test_selected_backend_exposed():
    assert BACKEND in ("compiled", "reference")
