"""Label-distribution priors: Gaussian or categorical over label values.

A prior is validated at construction and immutable afterwards; sampling
and density queries never raise for a successfully constructed prior.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

PROB_TOL = 1e-9


def _normal_cdf(x, mu, sigma):
    return 0.5 * (1.0 + math.erf((x - mu) / (sigma * math.sqrt(2.0))))


def _as_readonly(arr):
    out = np.asarray(arr, dtype=np.float64).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class LabelPrior:
    """Distribution over label values, either Gaussian or categorical.

    Gaussian priors may carry clamp bounds; draws outside [clamp_lo,
    clamp_hi] are clipped to the bounds (sample counts stay exact, mass
    piles up at the edges, matching bounded label spaces such as ages).
    """

    kind: str
    mu: float = 0.0
    sigma: float = 1.0
    support: np.ndarray | None = None
    probs: np.ndarray | None = None
    clamp_lo: float | None = None
    clamp_hi: float | None = None

    @staticmethod
    def gaussian(mu, sigma, clamp=None):
        if not math.isfinite(mu):
            raise ConfigError("gaussian prior: mu must be finite")
        if not (sigma > 0.0 and math.isfinite(sigma)):
            raise ConfigError(f"gaussian prior: sigma must be positive, got {sigma}")
        lo, hi = (None, None) if clamp is None else (float(clamp[0]), float(clamp[1]))
        if lo is not None and not lo < hi:
            raise ConfigError(f"gaussian prior: clamp_lo must be < clamp_hi, got [{lo}, {hi}]")
        return LabelPrior(kind="gaussian", mu=float(mu), sigma=float(sigma), clamp_lo=lo, clamp_hi=hi)

    @staticmethod
    def categorical(support, probs):
        support = _as_readonly(support)
        probs = _as_readonly(probs)
        if support.ndim != 1 or support.size == 0:
            raise ConfigError("categorical prior: support must be a non-empty 1-D sequence")
        if support.size != probs.size:
            raise ConfigError(
                f"categorical prior: support has {support.size} values but probs has {probs.size}"
            )
        if not np.all(np.diff(support) > 0.0):
            raise ConfigError("categorical prior: support values must be strictly increasing")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ConfigError("categorical prior: probabilities must lie in [0, 1]")
        if abs(float(probs.sum()) - 1.0) > PROB_TOL:
            raise ConfigError(f"categorical prior: probabilities sum to {probs.sum()!r}, not 1")
        return LabelPrior(kind="categorical", support=support, probs=probs)

    def __post_init__(self):
        if self.kind not in ("gaussian", "categorical"):
            raise ConfigError(f"unknown prior kind {self.kind!r}")

    def mean(self):
        """Mean label value (the clamp is ignored for the Gaussian case)."""
        if self.kind == "gaussian":
            return self.mu
        return float(np.dot(self.support, self.probs))

    def std(self):
        """Label standard deviation (clamp ignored for the Gaussian case)."""
        if self.kind == "gaussian":
            return self.sigma
        centered = self.support - self.mean()
        return float(np.sqrt(np.dot(self.probs, centered * centered)))

    def sample(self, count, rng):
        """Draw ``count`` i.i.d. label values using the given Generator."""
        if count < 1:
            raise ConfigError(f"sample count must be >= 1, got {count}")
        if self.kind == "gaussian":
            draws = rng.normal(self.mu, self.sigma, size=count)
            if self.clamp_lo is not None:
                np.clip(draws, self.clamp_lo, self.clamp_hi, out=draws)
            return draws
        idx = rng.choice(self.support.size, size=count, p=self.probs)
        return self.support[idx]

    def pmf_on_support(self, support):
        """Probability mass assigned to each value of ``support``.

        Values own half-open bins whose edges sit at the midpoints between
        consecutive support values; the first and last bins absorb the
        tails. A categorical prior requires an exactly matching support.
        """
        support = np.asarray(support, dtype=np.float64)
        if support.ndim != 1 or support.size == 0:
            raise ConfigError("support must be a non-empty 1-D sequence")
        if not np.all(np.diff(support) > 0.0):
            raise ConfigError("support values must be strictly increasing")
        if self.kind == "categorical":
            if support.size != self.support.size or not np.array_equal(support, self.support):
                raise DataError("support does not match the categorical prior's own support")
            return self.probs.copy()
        edges = 0.5 * (support[:-1] + support[1:])
        cdf = np.array([_normal_cdf(e, self.mu, self.sigma) for e in edges])
        masses = np.diff(np.concatenate(([0.0], cdf, [1.0])))
        total = masses.sum()
        return masses / total

    def to_dict(self):
        if self.kind == "gaussian":
            out = {"type": "gaussian", "mu": self.mu, "sigma": self.sigma}
            if self.clamp_lo is not None:
                out["clamp"] = [self.clamp_lo, self.clamp_hi]
            return out
        return {
            "type": "categorical",
            "support": self.support.tolist(),
            "probs": self.probs.tolist(),
        }


def support_edges(support):
    """Bin edges used to histogram values onto a support grid."""
    support = np.asarray(support, dtype=np.float64)
    inner = 0.5 * (support[:-1] + support[1:])
    return np.concatenate(([-np.inf], inner, [np.inf]))


def mass_on_support(prior, support):
    """Prior mass aggregated onto a support grid, for reporting.

    Unlike ``pmf_on_support`` this does not require a categorical prior to
    share the grid: each of its atoms lands in the bin owning it.
    """
    support = np.asarray(support, dtype=np.float64)
    if prior.kind == "gaussian":
        return prior.pmf_on_support(support)
    if prior.support.size == support.size and np.array_equal(prior.support, support):
        return prior.probs.copy()
    edges = support_edges(support)
    masses, _ = np.histogram(prior.support, bins=edges, weights=prior.probs)
    return masses


def histogram_on_support(values, support):
    """Fraction of ``values`` falling in each support value's bin."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ConfigError("cannot histogram an empty value list")
    edges = support_edges(support)
    counts, _ = np.histogram(values, bins=edges)
    return counts / values.size


def prior_from_dict(obj):
    """Build a prior from its JSON-object form; see ``load_prior``."""
    try:
        kind = obj["type"]
    except (TypeError, KeyError):
        raise DataError("prior object must contain a 'type' key") from None
    if kind == "gaussian":
        try:
            return LabelPrior.gaussian(obj["mu"], obj["sigma"], clamp=obj.get("clamp"))
        except KeyError as exc:
            raise DataError(f"gaussian prior is missing key {exc}") from None
    if kind == "categorical":
        try:
            return LabelPrior.categorical(obj["support"], obj["probs"])
        except KeyError as exc:
            raise DataError(f"categorical prior is missing key {exc}") from None
    raise DataError(f"unknown prior type {kind!r}")


def load_prior(path):
    """Read a prior from a UTF-8 JSON file.

    Accepted forms:
        {"type": "gaussian", "mu": 33.0, "sigma": 20.0, "clamp": [1.0, 100.0]}
        {"type": "categorical", "support": [...], "probs": [...]}
    """
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from None
    return prior_from_dict(obj)


def save_prior(prior, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(prior.to_dict(), fh, indent=2)
        fh.write("\n")
