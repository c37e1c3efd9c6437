import numpy as np
import pytest

from priorfit.adapter import (
    HEAD_CLASSIFICATION,
    HEAD_REGRESSION,
    AdamState,
    LrSchedule,
    adam_step,
    backward,
    forward,
    init_adam_state,
    init_adapter,
    load_adapter,
    lr_at,
    save_adapter,
)
from priorfit.errors import ConfigError, DataError, NumericalError


def _loss_through_adapter(adapter, batch, grad_like):
    """Scalar loss sum(out * grad_like), whose output gradient is grad_like."""
    out, _ = forward(adapter, batch)
    return float((out * grad_like).sum())


# -------------------------------------------------------------------- forward


def test_forward_zero_weights_regression():
    adapter = init_adapter([4, 3, 1], HEAD_REGRESSION, seed=0)
    for w in adapter.weights:
        w[:] = 0.0
    out, _ = forward(adapter, np.ones((5, 4)))
    assert np.array_equal(out, np.zeros((5, 1)))


def test_forward_zero_weights_classification_uniform():
    adapter = init_adapter([4, 3, 6], HEAD_CLASSIFICATION, seed=0)
    for w in adapter.weights:
        w[:] = 0.0
    out, _ = forward(adapter, np.ones((5, 4)))
    np.testing.assert_allclose(out, np.full((5, 6), 1.0 / 6.0))


def test_forward_rowwise(rng):
    adapter = init_adapter([6, 8, 3], HEAD_CLASSIFICATION, seed=1)
    batch = rng.normal(size=(10, 6))
    out, _ = forward(adapter, batch)
    perm = rng.permutation(10)
    out_perm, _ = forward(adapter, batch[perm])
    np.testing.assert_allclose(out_perm, out[perm], atol=1e-15)
    np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-6)


def test_forward_dimension_mismatch():
    adapter = init_adapter([6, 8, 3], HEAD_CLASSIFICATION, seed=1)
    with pytest.raises(ConfigError):
        forward(adapter, np.zeros((4, 5)))


# ------------------------------------------------------------------- backward


def test_backward_zero_grad_gives_zero():
    adapter = init_adapter([5, 7, 2], HEAD_CLASSIFICATION, seed=2)
    batch = np.random.default_rng(0).normal(size=(6, 5))
    _, cache = forward(adapter, batch)
    grads = backward(adapter, cache, np.zeros((6, 2)))
    assert all(np.array_equal(g, np.zeros_like(g)) for g in grads)


def test_backward_single_linear_layer_closed_form(rng):
    adapter = init_adapter([4, 1], HEAD_REGRESSION, seed=3)
    batch = rng.normal(size=(8, 4))
    _, cache = forward(adapter, batch)
    # loss = mean of outputs -> dL/dout = 1/B; dL/dW = column mean of inputs
    grads = backward(adapter, cache, np.full((8, 1), 1.0 / 8.0))
    np.testing.assert_allclose(grads[0][:, 0], batch.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(grads[1], [1.0], atol=1e-15)


@pytest.mark.parametrize("head,out_dim", [(HEAD_REGRESSION, 1), (HEAD_CLASSIFICATION, 4)])
def test_backward_matches_finite_differences(head, out_dim, rng):
    # 100 random (adapter, batch) instances across both heads
    for trial in range(50):
        dims = [3, 5, out_dim]
        adapter = init_adapter(dims, head, seed=trial)
        batch = rng.normal(size=(4, 3))
        grad_like = rng.normal(size=(4, out_dim))
        _, cache = forward(adapter, batch)
        grads = backward(adapter, cache, grad_like)
        params = adapter.parameters()
        for p_idx, param in enumerate(params):
            numeric = np.zeros_like(param)
            flat_num = numeric.reshape(-1)
            flat_p = param.reshape(-1)
            for i in range(param.size):
                orig = flat_p[i]
                flat_p[i] = orig + 1e-5
                up = _loss_through_adapter(adapter, batch, grad_like)
                flat_p[i] = orig - 1e-5
                down = _loss_through_adapter(adapter, batch, grad_like)
                flat_p[i] = orig
                flat_num[i] = (up - down) / 2e-5
            np.testing.assert_allclose(
                grads[p_idx], numeric, rtol=1e-4, atol=1e-7,
                err_msg=f"trial {trial} param {p_idx}",
            )


def test_backward_stale_cache_rejected(rng):
    adapter = init_adapter([4, 6, 2], HEAD_CLASSIFICATION, seed=0)
    batch = rng.normal(size=(5, 4))
    _, cache = forward(adapter, batch)
    with pytest.raises(ConfigError):
        backward(adapter, None, np.zeros((5, 2)))
    with pytest.raises(ConfigError):
        backward(adapter, cache, np.zeros((6, 2)))  # wrong batch size


# ----------------------------------------------------------------------- adam


def test_adam_first_step_hand_value():
    adapter = init_adapter([1, 1], HEAD_REGRESSION, seed=0)
    adapter.weights[0][:] = 0.0
    adapter.biases[0][:] = 0.0
    state = init_adam_state(adapter, lr=1e-3)
    grads = [np.array([[1.0]]), np.array([0.0])]
    adam_step(adapter, state, grads)
    # m_hat = v_hat = 1 after bias correction; step = -lr / (1 + eps)
    assert np.isclose(adapter.weights[0][0, 0], -1e-3, rtol=1e-6)
    assert state.t == 1


def test_adam_zero_gradient_no_decay_leaves_parameters(rng):
    adapter = init_adapter([3, 4, 1], HEAD_REGRESSION, seed=1)
    before = [p.copy() for p in adapter.parameters()]
    state = init_adam_state(adapter, lr=1e-3, weight_decay=0.0)
    zero = [np.zeros_like(p) for p in adapter.parameters()]
    for _ in range(3):
        adam_step(adapter, state, zero)
    for prev, now in zip(before, adapter.parameters()):
        assert np.array_equal(prev, now)


def test_adam_matches_reference_reimplementation(rng):
    adapter = init_adapter([3, 5, 2], HEAD_CLASSIFICATION, seed=4)
    mirror = [p.copy() for p in adapter.parameters()]
    m = [np.zeros_like(p) for p in mirror]
    v = [np.zeros_like(p) for p in mirror]
    state = init_adam_state(adapter, lr=2e-3, weight_decay=1e-4)
    beta1, beta2, eps, wd, lr = 0.9, 0.999, 1e-8, 1e-4, 2e-3
    for t in range(1, 8):
        grads = [rng.normal(size=p.shape) for p in mirror]
        adam_step(adapter, state, grads)
        for i, g in enumerate(grads):
            m[i] = beta1 * m[i] + (1 - beta1) * g
            v[i] = beta2 * v[i] + (1 - beta2) * g * g
            m_hat = m[i] / (1 - beta1**t)
            v_hat = v[i] / (1 - beta2**t)
            mirror[i] = mirror[i] - lr * m_hat / (np.sqrt(v_hat) + eps)
            mirror[i] = mirror[i] - lr * wd * mirror[i]
    for ours, ref in zip(adapter.parameters(), mirror):
        np.testing.assert_allclose(ours, ref, atol=1e-12)


def test_adam_vanishing_lr_freezes_parameters(rng):
    adapter = init_adapter([3, 4, 1], HEAD_REGRESSION, seed=2)
    before = [p.copy() for p in adapter.parameters()]
    state = init_adam_state(adapter, lr=1e-13, weight_decay=1e-4)
    grads = [rng.normal(size=p.shape) for p in adapter.parameters()]
    adam_step(adapter, state, grads)
    for prev, now in zip(before, adapter.parameters()):
        # movement bounded by lr * (1 + decay * |param|)
        assert np.max(np.abs(now - prev)) < 1e-12


def test_adam_rejects_nan_gradient():
    adapter = init_adapter([2, 1], HEAD_REGRESSION, seed=0)
    state = init_adam_state(adapter, lr=1e-3)
    bad = [np.array([[np.nan], [0.0]]), np.array([0.0])]
    with pytest.raises(NumericalError):
        adam_step(adapter, state, bad)


def test_adam_lr_validation():
    adapter = init_adapter([2, 1], HEAD_REGRESSION, seed=0)
    with pytest.raises(ConfigError):
        init_adam_state(adapter, lr=0.0)


# ------------------------------------------------------------------- schedule


def test_lr_schedule_values():
    schedule = LrSchedule()
    assert lr_at(schedule, 0) == 1e-3
    assert np.isclose(lr_at(schedule, 10), 3e-4)
    assert np.isclose(lr_at(schedule, 25), 9e-5)
    imagenet = LrSchedule(period=1)
    assert np.isclose(lr_at(imagenet, 2), 1e-3 * 0.09)
    with pytest.raises(ConfigError):
        lr_at(schedule, -1)


# ----------------------------------------------------------------------- init


def test_init_deterministic():
    a = init_adapter([4, 8, 1], HEAD_REGRESSION, seed=7, output_bias=33.0)
    b = init_adapter([4, 8, 1], HEAD_REGRESSION, seed=7, output_bias=33.0)
    for pa, pb in zip(a.parameters(), b.parameters()):
        assert np.array_equal(pa, pb)


def test_init_regression_bias_is_prior_mean():
    adapter = init_adapter([4, 8, 1], HEAD_REGRESSION, seed=0, output_bias=42.5)
    assert adapter.biases[-1][0] == 42.5
    assert np.array_equal(adapter.biases[0], np.zeros(8))


def test_init_weight_magnitudes_bounded():
    adapter = init_adapter([4, 8, 2], HEAD_CLASSIFICATION, seed=0)
    for w, (fan_in, fan_out) in zip(adapter.weights, [(4, 8), (8, 2)]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.max(np.abs(w)) <= limit


def test_init_validation():
    with pytest.raises(ConfigError):
        init_adapter([4], HEAD_REGRESSION, seed=0)
    with pytest.raises(ConfigError):
        init_adapter([4, 0, 1], HEAD_REGRESSION, seed=0)
    with pytest.raises(ConfigError):
        init_adapter([4, 8, 3], HEAD_REGRESSION, seed=0)
    with pytest.raises(ConfigError):
        init_adapter([4, 8, 3], "ranking", seed=0)


# ----------------------------------------------------------------- model file


def test_model_file_roundtrip_bit_exact(tmp_path):
    adapter = init_adapter([16, 256, 1], HEAD_REGRESSION, seed=9, output_bias=40.0)
    path = tmp_path / "model.pfad"
    save_adapter(adapter, path)
    loaded = load_adapter(path)
    assert loaded.head == HEAD_REGRESSION
    assert loaded.dims == adapter.dims
    for ours, theirs in zip(adapter.parameters(), loaded.parameters()):
        assert np.array_equal(ours, theirs)
    save_adapter(loaded, tmp_path / "again.pfad")
    assert (tmp_path / "again.pfad").read_bytes() == path.read_bytes()


def test_model_file_bad_magic(tmp_path):
    path = tmp_path / "model.pfad"
    path.write_bytes(b"XXXX" + b"\x00" * 16)
    with pytest.raises(DataError, match="magic"):
        load_adapter(path)
