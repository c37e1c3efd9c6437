"""Synthetic embedding fixtures with known structure.

The point of these fixtures is that the zero-shot path is exercised for
real: embeddings and caption embeddings are constructed geometrically so
that nearest-caption assignment produces *systematically biased* labels,
while the ground truth stays exactly recoverable from the embedding.

Regression geometry. Each embedding row is a unit vector made of four
orthogonal blocks:

    arc block (2 dims)    encodes z_i = y*_i + noise on a circular arc;
                          caption vectors live on the same arc, placed at
                          their label value minus the bias, so the nearest
                          caption reads back z_i + bias.
    rule block (2 dims)   encodes y*_i exactly as (g, sqrt(1 - g^2)) with
                          g the label scaled to [-1, 1].
    constant dim (1)      a fixed component, so the ground truth is a
                          plain linear functional of the embedding.
    filler block          a random unit vector, inert noise dimensions.

Ground truth y* is drawn from the returned prior (a clamped Gaussian), so
the prior is the true label distribution by construction.

Classification geometry. One block holds the corrupted caption target as
a basis vector (captions live only there), a second block holds the true
cluster direction plus jitter, the rest is filler. The confusion kernel
therefore acts through caption geometry, and the true class stays
linearly separable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dataio import TASK_CLASSIFICATION, TASK_REGRESSION, CaptionSet, EmbeddingDataset
from .errors import ConfigError
from .priors import LabelPrior

# block weights (squared weights sum to 1 so rows are exactly unit norm)
_REG_ARC_W = 0.55
_REG_RULE_W = 0.55
_REG_CONST_W = 0.25
_REG_FILLER_W = math.sqrt(1.0 - _REG_ARC_W**2 - _REG_RULE_W**2 - _REG_CONST_W**2)

_CLF_CAPTION_W = 0.45
_CLF_CLUSTER_W = 0.75
_CLF_FILLER_W = math.sqrt(1.0 - _CLF_CAPTION_W**2 - _CLF_CLUSTER_W**2)
_CLF_CLUSTER_JITTER = 0.35
# non-assigned caption similarities are drawn just below the assigned one,
# so the assignment is exact but the feature is weak (like real V&L scores)
_CLF_CAPTION_AMBIGUITY = 0.95

_ARC_MARGIN = 0.1  # keep encoded angles inside (0, pi) with room to spare


@dataclass
class SynthSpec:
    task: str = TASK_REGRESSION
    n: int = 2000
    d: int = 16
    seed: int = 0
    # regression: labels on a grid [label_lo, label_hi], Gaussian prior
    label_lo: float = 1.0
    label_hi: float = 100.0
    label_step: float = 1.0
    prior_mu: float = 40.0
    prior_sigma: float = 4.0
    bias: float = 10.0
    noise: float = 2.0
    # classification: cluster count and corruption kernel
    classes: int = 10
    corruption: float = 0.2
    corruption_kind: str = "sink"  # none | uniform | sink
    sink_class: int = 0

    def __post_init__(self):
        if self.task not in (TASK_REGRESSION, TASK_CLASSIFICATION):
            raise ConfigError(f"unknown task {self.task!r}")
        if self.n < 1 or self.d < 1:
            raise ConfigError("n and d must be positive")
        if self.task == TASK_REGRESSION:
            if self.d < 6:
                raise ConfigError("regression fixtures need d >= 6")
            if not self.label_lo < self.label_hi:
                raise ConfigError("label_lo must be < label_hi")
            if self.label_step <= 0.0:
                raise ConfigError("label_step must be positive")
            if self.prior_sigma <= 0.0:
                raise ConfigError("prior_sigma must be positive")
            if self.noise < 0.0:
                raise ConfigError("noise must be >= 0")
            if self.label_lo + self.bias > self.label_hi or self.label_hi + self.bias < self.label_lo:
                raise ConfigError(
                    f"bias {self.bias} pushes every label outside the caption "
                    f"range [{self.label_lo}, {self.label_hi}]"
                )
        else:
            if self.classes < 2:
                raise ConfigError("classification fixtures need >= 2 classes")
            if self.d < 2 * self.classes + 1:
                raise ConfigError(
                    f"classification fixtures need d >= 2 * classes + 1 "
                    f"(= {2 * self.classes + 1}), got {self.d}"
                )
            if not 0.0 <= self.corruption <= 1.0:
                raise ConfigError("corruption must be in [0, 1]")
            if self.corruption_kind not in ("none", "uniform", "sink"):
                raise ConfigError(f"unknown corruption kind {self.corruption_kind!r}")
            if not 0 <= self.sink_class < self.classes:
                raise ConfigError("sink_class out of range")

    def to_dict(self):
        out = {"task": self.task, "n": self.n, "d": self.d, "seed": self.seed}
        if self.task == TASK_REGRESSION:
            out.update(
                label_lo=self.label_lo, label_hi=self.label_hi, label_step=self.label_step,
                prior_mu=self.prior_mu, prior_sigma=self.prior_sigma,
                bias=self.bias, noise=self.noise,
            )
        else:
            out.update(
                classes=self.classes, corruption=self.corruption,
                corruption_kind=self.corruption_kind, sink_class=self.sink_class,
            )
        return out


def spec_from_dict(obj):
    if not isinstance(obj, dict) or "task" not in obj:
        raise ConfigError("synth spec must be an object with a 'task' key")
    known = {f for f in SynthSpec.__dataclass_fields__}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown synth spec keys: {sorted(unknown)}")
    return SynthSpec(**obj)


def _caption_grid(spec):
    count = int(round((spec.label_hi - spec.label_lo) / spec.label_step)) + 1
    return spec.label_lo + spec.label_step * np.arange(count)


def _encoding_range(spec):
    pad = 4.0 * spec.noise + spec.label_step
    lo = min(spec.label_lo, spec.label_lo - spec.bias) - pad
    hi = max(spec.label_hi, spec.label_hi - spec.bias) + pad
    return lo, hi


def _arc_angle(values, enc_lo, enc_hi):
    span = enc_hi - enc_lo
    frac = (np.asarray(values, dtype=np.float64) - enc_lo) / span
    return _ARC_MARGIN + frac * (math.pi - 2.0 * _ARC_MARGIN)


def regression_caption_set(spec, bias=None):
    """Caption set whose geometry makes zero-shot read y* + bias.

    Separate from ``generate`` so several caption sets with different
    biases can be paired with one dataset (the prompt-ranking fixture).
    """
    if bias is None:
        bias = spec.bias
    values = _caption_grid(spec)
    enc_lo, enc_hi = _encoding_range(spec)
    theta = _arc_angle(values - bias, enc_lo, enc_hi)
    emb = np.zeros((values.size, spec.d))
    emb[:, 0] = np.cos(theta)
    emb[:, 1] = np.sin(theta)
    names = [f"label {v:g}" for v in values]
    return CaptionSet(embeddings=emb, values=values, names=names, task=TASK_REGRESSION)


def _generate_regression(spec):
    rng = np.random.default_rng(spec.seed)
    y_star = np.clip(
        rng.normal(spec.prior_mu, spec.prior_sigma, size=spec.n), spec.label_lo, spec.label_hi
    )
    z = y_star + (rng.normal(0.0, spec.noise, size=spec.n) if spec.noise > 0.0 else 0.0)
    enc_lo, enc_hi = _encoding_range(spec)
    z = np.clip(z, enc_lo, enc_hi)
    theta = _arc_angle(z, enc_lo, enc_hi)

    mid = 0.5 * (spec.label_lo + spec.label_hi)
    half = 0.5 * (spec.label_hi - spec.label_lo)
    g = (y_star - mid) / half

    emb = np.zeros((spec.n, spec.d))
    emb[:, 0] = _REG_ARC_W * np.cos(theta)
    emb[:, 1] = _REG_ARC_W * np.sin(theta)
    emb[:, 2] = _REG_RULE_W * g
    emb[:, 3] = _REG_RULE_W * np.sqrt(np.maximum(0.0, 1.0 - g * g))
    emb[:, 4] = _REG_CONST_W
    filler = rng.normal(size=(spec.n, spec.d - 5))
    filler /= np.sqrt((filler * filler).sum(axis=1))[:, None]
    emb[:, 5:] = _REG_FILLER_W * filler

    dataset = EmbeddingDataset(embeddings=emb, labels=y_star.copy())
    captions = regression_caption_set(spec)
    prior = LabelPrior.gaussian(
        spec.prior_mu, spec.prior_sigma, clamp=(spec.label_lo, spec.label_hi)
    )
    return dataset, captions, prior


def regression_rule_vector(spec):
    """Weights w with labels == embeddings @ w on the generated rows."""
    mid = 0.5 * (spec.label_lo + spec.label_hi)
    half = 0.5 * (spec.label_hi - spec.label_lo)
    w = np.zeros(spec.d)
    w[2] = half / _REG_RULE_W
    w[4] = mid / _REG_CONST_W
    return w


def _generate_classification(spec):
    rng = np.random.default_rng(spec.seed)
    k = spec.classes
    counts = np.full(k, spec.n // k)
    counts[: spec.n % k] += 1
    true_class = np.repeat(np.arange(k), counts)
    rng.shuffle(true_class)

    target = true_class.copy()
    if spec.corruption_kind != "none" and spec.corruption > 0.0:
        corrupt = rng.random(spec.n) < spec.corruption
        if spec.corruption_kind == "uniform":
            target[corrupt] = rng.integers(0, k, size=int(corrupt.sum()))
        else:
            target[corrupt] = spec.sink_class

    emb = np.zeros((spec.n, spec.d))
    block = rng.uniform(0.0, _CLF_CAPTION_AMBIGUITY, size=(spec.n, k))
    block[np.arange(spec.n), target] = 1.0
    block /= np.sqrt((block * block).sum(axis=1))[:, None]
    emb[:, :k] = _CLF_CAPTION_W * block
    cluster = rng.normal(scale=_CLF_CLUSTER_JITTER, size=(spec.n, k))
    cluster[np.arange(spec.n), true_class] += 1.0
    cluster /= np.sqrt((cluster * cluster).sum(axis=1))[:, None]
    emb[:, k : 2 * k] = _CLF_CLUSTER_W * cluster
    filler = rng.normal(size=(spec.n, spec.d - 2 * k))
    filler /= np.sqrt((filler * filler).sum(axis=1))[:, None]
    emb[:, 2 * k :] = _CLF_FILLER_W * filler

    cap_emb = np.zeros((k, spec.d))
    cap_emb[np.arange(k), np.arange(k)] = 1.0
    captions = CaptionSet(
        embeddings=cap_emb,
        values=np.arange(k, dtype=np.float64),
        names=[f"class {j}" for j in range(k)],
        task=TASK_CLASSIFICATION,
    )
    dataset = EmbeddingDataset(embeddings=emb, labels=true_class.astype(np.float64))
    prior = LabelPrior.categorical(np.arange(k, dtype=np.float64), counts / spec.n)
    return dataset, captions, prior


def generate(spec):
    """Build (dataset-with-labels, captions, true prior) for a spec."""
    if spec.task == TASK_REGRESSION:
        return _generate_regression(spec)
    return _generate_classification(spec)


def default_regression_spec(**overrides):
    """The desk-scale regression fixture used across tests and docs."""
    return SynthSpec(task=TASK_REGRESSION, **overrides)


def default_classification_spec(**overrides):
    base = dict(task=TASK_CLASSIFICATION, d=32)
    base.update(overrides)
    return SynthSpec(**base)
