"""Metrics and experiment harnesses: MAE/accuracy, sweeps, plot series."""

import csv
import dataclasses
from dataclasses import dataclass

import numpy as np

from . import losses, trainer
from .adapter import HEAD_CLASSIFICATION, forward
from .dataio import TASK_REGRESSION
from .errors import ConfigError, DataError, PriorfitError
from .priors import histogram_on_support, mass_on_support

_W_SAMPLE_SEED = 20_240_915  # dedicated stream: reports comparable across runs


def mae(pred, truth):
    """Mean absolute error."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size == 0:
        raise ConfigError(
            f"mae needs two equal-length non-empty 1-D arrays, got {pred.shape} and {truth.shape}"
        )
    return float(np.abs(pred - truth).mean())


def accuracy(pred_index, truth_index):
    """Fraction of exact index matches."""
    pred_index = np.asarray(pred_index)
    truth_index = np.asarray(truth_index)
    if pred_index.shape != truth_index.shape or pred_index.ndim != 1 or pred_index.size == 0:
        raise ConfigError(
            f"accuracy needs two equal-length non-empty 1-D arrays, "
            f"got {pred_index.shape} and {truth_index.shape}"
        )
    return float(np.mean(pred_index == truth_index))


@dataclass
class EvalReport:
    metric: str  # "mae" | "accuracy"
    value: float
    n: int
    histogram: np.ndarray
    prior_pmf: np.ndarray
    w_to_prior: float

    def to_dict(self):
        return {
            "metric": self.metric,
            "value": self.value,
            "n": self.n,
            "histogram": [float(x) for x in self.histogram],
            "prior_pmf": [float(x) for x in self.prior_pmf],
            "w_to_prior": self.w_to_prior,
        }


def predict(model, dataset, captions):
    """Model predictions as label values (and indices for classification)."""
    out, _ = forward(model, dataset.embeddings)
    if model.head == HEAD_CLASSIFICATION:
        if model.out_dim != captions.m:
            raise ConfigError(
                f"model has {model.out_dim} outputs but caption set has {captions.m} classes"
            )
        idx = np.argmax(out, axis=1)
        return captions.values[idx], idx
    return out[:, 0], None


def evaluate_model(model, dataset, captions, prior):
    """Score a trained adapter on a labelled dataset."""
    if dataset.labels is None:
        raise DataError("evaluation needs a dataset with ground-truth labels")
    values, idx = predict(model, dataset, captions)
    if model.head == HEAD_CLASSIFICATION:
        metric = "accuracy"
        score = accuracy(idx, dataset.labels.astype(np.int64))
        hist = np.bincount(idx, minlength=captions.m) / idx.size
    else:
        metric = "mae"
        score = mae(values, dataset.labels)
        hist = histogram_on_support(values, captions.values)
    rng = np.random.default_rng(_W_SAMPLE_SEED)
    w = losses.wasserstein_1d(values, prior.sample(dataset.n, rng)).value
    return EvalReport(
        metric=metric,
        value=score,
        n=dataset.n,
        histogram=hist,
        prior_pmf=mass_on_support(prior, captions.values),
        w_to_prior=w,
    )


@dataclass
class SweepRow:
    label: str
    value: float | None
    error: str | None = None

    def to_dict(self):
        return {"label": self.label, "value": self.value, "error": self.error}


def _sweep_metric(model, dataset, captions, config):
    values, idx = predict(model, dataset, captions)
    if config.task == TASK_REGRESSION:
        return mae(values, dataset.labels)
    return accuracy(idx, dataset.labels.astype(np.int64))


def robustness_sweep(dataset, captions, zs, priors, config):
    """Train once per prior, reporting the metric against ground truth.

    Every cell reuses the identical config and seed so differences are
    attributable to the prior alone. Failed cells are recorded and the
    sweep continues. Rows keep the given order.
    """
    if dataset.labels is None:
        raise DataError("robustness sweep needs ground-truth labels")
    rows = []
    for label, prior in priors:
        try:
            model, _ = trainer.train(dataset, captions, prior, zs, config)
            rows.append(SweepRow(label=label, value=_sweep_metric(model, dataset, captions, config)))
        except PriorfitError as exc:
            rows.append(SweepRow(label=label, value=None, error=str(exc)))
    return rows


def alpha_sweep(dataset, captions, zs, prior, alphas, config):
    """Train once per alpha with everything else fixed."""
    if dataset.labels is None:
        raise DataError("alpha sweep needs ground-truth labels")
    rows = []
    for alpha in alphas:
        cell = dataclasses.replace(config, alpha=float(alpha))
        try:
            model, _ = trainer.train(dataset, captions, prior, zs, cell)
            rows.append(
                SweepRow(label=f"alpha={alpha:g}", value=_sweep_metric(model, dataset, captions, cell))
            )
        except PriorfitError as exc:
            rows.append(SweepRow(label=f"alpha={alpha:g}", value=None, error=str(exc)))
    return rows


@dataclass
class DistributionReport:
    """Aligned histogram series over the caption support, ready to plot."""

    support: np.ndarray
    predicted: np.ndarray
    prior: np.ndarray
    truth: np.ndarray | None = None

    def write_csv(self, fh):
        writer = csv.writer(fh)
        header = ["label", "predicted", "prior"] + (["truth"] if self.truth is not None else [])
        writer.writerow(header)
        for i, label in enumerate(self.support):
            row = [f"{label:g}", repr(float(self.predicted[i])), repr(float(self.prior[i]))]
            if self.truth is not None:
                row.append(repr(float(self.truth[i])))
            writer.writerow(row)


def distribution_report(pred_values, prior, support, truth=None):
    support = np.asarray(support, dtype=np.float64)
    return DistributionReport(
        support=support,
        predicted=histogram_on_support(pred_values, support),
        prior=mass_on_support(prior, support),
        truth=None if truth is None else histogram_on_support(truth, support),
    )


def read_distribution_csv(fh):
    """Inverse of DistributionReport.write_csv."""
    reader = csv.reader(fh)
    header = next(reader)
    columns = {name: [] for name in header}
    for row in reader:
        for name, cell in zip(header, row):
            columns[name].append(float(cell))
    support = np.asarray(columns["label"])
    return DistributionReport(
        support=support,
        predicted=np.asarray(columns["predicted"]),
        prior=np.asarray(columns["prior"]),
        truth=np.asarray(columns["truth"]) if "truth" in columns else None,
    )
