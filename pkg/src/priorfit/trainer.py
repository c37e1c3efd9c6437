"""Training loop: batching, prior sampling, loss combination, accumulation.

Each update balances two pulls: the distribution of adapter outputs is
driven toward the prior (1-D optimal transport for regression, pooled KL
for classification) while an anchoring term keeps individual outputs near
the fixed zero-shot labels. Regression draws a fresh set of prior labels
for every batch; classification may pool predictions over k batches
before each optimizer step so the pooled histogram is estimated from a
large effective batch.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import losses
from .adapter import (
    HEAD_CLASSIFICATION,
    HEAD_REGRESSION,
    LrSchedule,
    adam_step,
    backward,
    forward,
    init_adam_state,
    init_adapter,
    lr_at,
)
from .dataio import TASK_CLASSIFICATION, TASK_REGRESSION
from .errors import ConfigError, NumericalError
from .priors import histogram_on_support, mass_on_support
from .zeroshot import predicted_histogram


@dataclass
class TrainConfig:
    task: str = TASK_REGRESSION
    alpha: float = 1.0
    epochs: int = 70
    batch_size: int = 128
    accumulate_batches: int = 1
    warmup_epochs: int = 0
    base_lr: float = 1e-3
    lr_decay: float = 0.3
    lr_decay_period: int = 10
    weight_decay: float = 1e-4
    hidden: tuple = (256,)
    seed: int = 0

    def __post_init__(self):
        if self.task not in (TASK_REGRESSION, TASK_CLASSIFICATION):
            raise ConfigError(f"unknown task {self.task!r}")
        if self.alpha < 0.0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        for name in ("epochs", "batch_size", "accumulate_batches", "lr_decay_period"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.warmup_epochs < 0:
            raise ConfigError(f"warmup_epochs must be >= 0, got {self.warmup_epochs}")
        if self.base_lr <= 0.0:
            raise ConfigError(f"base_lr must be positive, got {self.base_lr}")
        if not self.hidden or any(int(h) < 1 for h in self.hidden):
            raise ConfigError(f"hidden layer sizes must be positive, got {self.hidden!r}")

    def schedule(self):
        return LrSchedule(base_lr=self.base_lr, decay=self.lr_decay, period=self.lr_decay_period)

    def to_dict(self):
        return {
            "task": self.task,
            "alpha": self.alpha,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "accumulate_batches": self.accumulate_batches,
            "warmup_epochs": self.warmup_epochs,
            "base_lr": self.base_lr,
            "lr_decay": self.lr_decay,
            "lr_decay_period": self.lr_decay_period,
            "weight_decay": self.weight_decay,
            "hidden": list(self.hidden),
            "seed": self.seed,
        }


@dataclass
class TrainReport:
    task: str
    epochs: list = field(default_factory=list)
    warmup: list = field(default_factory=list)
    final_predictions: np.ndarray | None = None
    histogram: np.ndarray | None = None
    prior_pmf: np.ndarray | None = None
    wall_clock_seconds: float = 0.0

    def to_dict(self):
        return {
            "task": self.task,
            "epochs": self.epochs,
            "warmup": self.warmup,
            "final_predictions": [float(x) for x in self.final_predictions],
            "histogram": [float(x) for x in self.histogram],
            "prior_pmf": [float(x) for x in self.prior_pmf],
            "wall_clock_seconds": self.wall_clock_seconds,
        }


def _validate_inputs(dataset, captions, prior, zs, config):
    if dataset.n == 0:
        raise ConfigError("cannot train on an empty dataset")
    if dataset.d != captions.d:
        raise ConfigError(
            f"embedding dimension {dataset.d} does not match caption dimension {captions.d}"
        )
    if captions.task != config.task:
        raise ConfigError(f"caption set is for task {captions.task!r}, config says {config.task!r}")
    if zs.hard_labels.shape[0] != dataset.n or zs.assigned_index.shape[0] != dataset.n:
        raise ConfigError("zero-shot result does not match the dataset")
    if config.batch_size > dataset.n:
        raise ConfigError(
            f"batch size {config.batch_size} exceeds dataset size {dataset.n}"
        )
    if config.task == TASK_CLASSIFICATION:
        # raises if the categorical prior's support differs from the captions
        prior.pmf_on_support(captions.values)


def _zero_loss_like(grad_shape):
    return losses.LossValue(value=0.0, grad=np.zeros(grad_shape))


def _regression_update(adapter, batch_x, batch_hard, prior, prior_rng, alpha, include_prior, k):
    out, cache = forward(adapter, batch_x)
    preds = out[:, 0]
    labels_loss = losses.l1_labels(preds, batch_hard)
    if include_prior:
        drawn = prior.sample(preds.size, prior_rng)
        prior_loss = losses.wasserstein_1d(preds, drawn)
        total = losses.combined(prior_loss, labels_loss, alpha)
    else:
        prior_loss = _zero_loss_like(preds.shape)
        total = labels_loss
    grads = backward(adapter, cache, (total.grad / k)[:, None])
    return grads, prior_loss.value, labels_loss.value, total.value


def _classification_update(adapter, group_x, group_idx, prior_pmf, alpha, include_prior):
    """One optimizer step pooling predictions over the group's batches."""
    k = len(group_x)
    probs_list, caches = [], []
    for x in group_x:
        probs, cache = forward(adapter, x)
        probs_list.append(probs)
        caches.append(cache)
    pooled = np.concatenate(probs_list, axis=0)
    if include_prior:
        prior_loss = losses.kl_batch(pooled, prior_pmf)
    else:
        prior_loss = _zero_loss_like(pooled.shape)
    ce_losses = [losses.cross_entropy_labels(p, idx) for p, idx in zip(probs_list, group_idx)]
    labels_value = float(np.mean([ce.value for ce in ce_losses]))
    if include_prior:
        total_value = prior_loss.value + alpha * labels_value
    else:
        total_value = labels_value
    grads = None
    offset = 0
    for probs, cache, ce in zip(probs_list, caches, ce_losses):
        b = probs.shape[0]
        if include_prior:
            grad_probs = prior_loss.grad[offset : offset + b] + (alpha / k) * ce.grad
        else:
            grad_probs = ce.grad / k
        part = backward(adapter, cache, grad_probs)
        grads = part if grads is None else [g + p for g, p in zip(grads, part)]
        offset += b
    return grads, prior_loss.value, labels_value, total_value


def _run_epochs(adapter, dataset, captions, prior, zs, config, n_epochs, include_prior,
                shuffle_rng, prior_rng, history):
    x = dataset.embeddings
    if config.task == TASK_REGRESSION:
        hard = zs.hard_labels.astype(np.float64)
        prior_pmf = None
    else:
        hard = zs.assigned_index.astype(np.int64)
        prior_pmf = prior.pmf_on_support(captions.values)
    state = init_adam_state(adapter, config.base_lr, weight_decay=config.weight_decay)
    schedule = config.schedule()
    k = config.accumulate_batches
    b = config.batch_size
    n_batches = dataset.n // b
    if n_batches == 0:
        raise ConfigError("batch size leaves no full batch to train on")
    for epoch in range(n_epochs):
        state.lr = lr_at(schedule, epoch)
        perm = shuffle_rng.permutation(dataset.n)
        prior_vals, labels_vals, total_vals = [], [], []
        for start in range(0, n_batches, k):
            group = [perm[i * b : (i + 1) * b] for i in range(start, min(start + k, n_batches))]
            try:
                if config.task == TASK_REGRESSION:
                    grads = None
                    gp, gl, gt = 0.0, 0.0, 0.0
                    for rows in group:
                        part, pv, lv, tv = _regression_update(
                            adapter, x[rows], hard[rows], prior, prior_rng,
                            config.alpha, include_prior, len(group),
                        )
                        grads = part if grads is None else [g + p for g, p in zip(grads, part)]
                        gp += pv / len(group)
                        gl += lv / len(group)
                        gt += tv / len(group)
                else:
                    grads, gp, gl, gt = _classification_update(
                        adapter, [x[rows] for rows in group], [hard[rows] for rows in group],
                        prior_pmf, config.alpha, include_prior,
                    )
                adam_step(adapter, state, grads)
            except NumericalError as exc:
                raise NumericalError(
                    f"aborting at epoch {epoch}, update {start // k}: {exc}"
                ) from exc
            prior_vals.append(gp)
            labels_vals.append(gl)
            total_vals.append(gt)
        history.append(
            {
                "epoch": epoch,
                "lr": state.lr,
                "prior_loss": float(np.mean(prior_vals)),
                "labels_loss": float(np.mean(labels_vals)),
                "total_loss": float(np.mean(total_vals)),
            }
        )


def _streams(config):
    root = np.random.SeedSequence(config.seed)
    init_ss, warm_ss, shuffle_ss, prior_ss = root.spawn(4)
    return (
        init_ss,
        np.random.default_rng(warm_ss),
        np.random.default_rng(shuffle_ss),
        np.random.default_rng(prior_ss),
    )


def _fresh_adapter(dataset, captions, prior, config, init_ss):
    if config.task == TASK_REGRESSION:
        head, out = HEAD_REGRESSION, 1
        bias = prior.mean()
    else:
        head, out = HEAD_CLASSIFICATION, captions.m
        bias = 0.0
    dims = [dataset.d, *[int(h) for h in config.hidden], out]
    return init_adapter(dims, head, init_ss, output_bias=bias)


def warmup_init(dataset, captions, prior, zs, config):
    """Adapter initialized by training on the zero-shot labels alone.

    Runs ``config.warmup_epochs`` epochs with the anchoring term only (the
    prior term disabled); with zero warmup epochs the freshly initialized
    adapter is returned untouched. Used as the starting point of
    ``train``, which then re-creates its optimizer state from scratch.
    """
    _validate_inputs(dataset, captions, prior, zs, config)
    init_ss, warm_rng, _, _ = _streams(config)
    adapter = _fresh_adapter(dataset, captions, prior, config, init_ss)
    if config.warmup_epochs > 0:
        _run_epochs(
            adapter, dataset, captions, prior, zs, config, config.warmup_epochs,
            include_prior=False, shuffle_rng=warm_rng, prior_rng=None, history=[],
        )
    return adapter


def train(dataset, captions, prior, zs, config):
    """Full training run. Returns (adapter, report).

    The zero-shot result must come from the same dataset/caption pair;
    its hard labels are the fixed anchoring targets throughout. Shuffling
    is reseeded from the config seed, the final partial batch of every
    epoch is dropped, and one optimizer step is taken per
    ``accumulate_batches`` batches.
    """
    started = time.perf_counter()
    _validate_inputs(dataset, captions, prior, zs, config)
    init_ss, warm_rng, shuffle_rng, prior_rng = _streams(config)
    adapter = _fresh_adapter(dataset, captions, prior, config, init_ss)
    report = TrainReport(task=config.task)
    if config.warmup_epochs > 0:
        _run_epochs(
            adapter, dataset, captions, prior, zs, config, config.warmup_epochs,
            include_prior=False, shuffle_rng=warm_rng, prior_rng=None, history=report.warmup,
        )
    _run_epochs(
        adapter, dataset, captions, prior, zs, config, config.epochs,
        include_prior=True, shuffle_rng=shuffle_rng, prior_rng=prior_rng, history=report.epochs,
    )
    out, _ = forward(adapter, dataset.embeddings)
    if config.task == TASK_REGRESSION:
        preds = out[:, 0]
        report.final_predictions = preds
        report.histogram = histogram_on_support(preds, captions.values)
    else:
        idx = np.argmax(out, axis=1)
        report.final_predictions = captions.values[idx]
        report.histogram = np.bincount(idx, minlength=captions.m) / idx.size
    report.prior_pmf = mass_on_support(prior, captions.values)
    report.wall_clock_seconds = time.perf_counter() - started
    return adapter, report


def pooled_gradient_equivalence_check(adapter, batches, targets, grad_tol=1e-9, pool_tol=1e-12):
    """Verify that k-batch accumulation matches the concatenated batch.

    Compares (i) the accumulated anchoring-loss parameter gradients against
    the gradients of one concatenated batch and (ii) the pooled predicted
    label distribution against the concatenated batch's pooled value.
    Batches must be classification batches of equal size.
    """
    if adapter.head != HEAD_CLASSIFICATION:
        raise ConfigError("accumulation equivalence is defined for classification adapters")
    if len(batches) == 0 or len(batches) != len(targets):
        raise ConfigError("need matching, non-empty batch and target lists")
    sizes = {np.asarray(x).shape[0] for x in batches}
    if len(sizes) != 1:
        raise ConfigError(f"batches must all have the same size, got sizes {sorted(sizes)}")
    k = len(batches)
    accumulated = None
    batch_means = []
    for x, idx in zip(batches, targets):
        probs, cache = forward(adapter, x)
        batch_means.append(probs.mean(axis=0))
        ce = losses.cross_entropy_labels(probs, idx)
        part = backward(adapter, cache, ce.grad / k)
        accumulated = part if accumulated is None else [g + p for g, p in zip(accumulated, part)]
    pooled_accumulated = np.mean(batch_means, axis=0)

    concat_x = np.concatenate([np.asarray(x) for x in batches], axis=0)
    concat_idx = np.concatenate([np.asarray(t) for t in targets])
    probs_c, cache_c = forward(adapter, concat_x)
    pooled_concat = probs_c.mean(axis=0)
    ce_c = losses.cross_entropy_labels(probs_c, concat_idx)
    reference = backward(adapter, cache_c, ce_c.grad)

    grad_gap = max(
        float(np.max(np.abs(a - r))) for a, r in zip(accumulated, reference)
    )
    pool_gap = float(np.max(np.abs(pooled_accumulated - pooled_concat)))
    return grad_gap <= grad_tol and pool_gap <= pool_tol
