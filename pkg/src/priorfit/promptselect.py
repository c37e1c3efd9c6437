"""Automatic prompt selection by distributional distance to the prior.

Each candidate prompt contributes one caption set; its zero-shot label
distribution over the full dataset is compared with the prior and the
candidates are ranked by that distance, smallest first. No labels are
involved at any point.
"""

from dataclasses import dataclass

import numpy as np

from . import losses, zeroshot
from .dataio import TASK_REGRESSION
from .errors import ConfigError, PriorfitError


@dataclass
class PromptCandidate:
    """A caption template (with one `[label]` slot) and its embedded captions."""

    template: str
    captions: object
    w_distance: float | None = None

    def __post_init__(self):
        if self.template.count("[label]") != 1:
            raise ConfigError(
                f"template must contain the placeholder '[label]' exactly once: {self.template!r}"
            )


@dataclass
class RankedPrompt:
    rank: int
    candidate_index: int
    template: str
    distance: float


@dataclass
class PromptRanking:
    ranked: list
    failures: list  # (candidate_index, template, reason)

    @property
    def best(self):
        return self.ranked[0]

    def to_dict(self):
        return {
            "ranking": [
                {
                    "rank": r.rank,
                    "candidate_index": r.candidate_index,
                    "template": r.template,
                    "distance": r.distance,
                }
                for r in self.ranked
            ],
            "failures": [
                {"candidate_index": i, "template": t, "error": msg}
                for i, t, msg in self.failures
            ],
        }


def rank_prompts(dataset, candidates, prior, rng):
    """Rank candidates by distance between predictions and the prior.

    Regression candidates are scored by the 1-D transport distance between
    their zero-shot labels and one shared set of n prior draws (shared so
    the comparison is paired; pass a dedicated seeded generator for
    reproducible rankings). Classification candidates are scored by the KL
    divergence between their predicted histogram and the prior's pmf.
    A candidate that fails (e.g. wrong dimension) is recorded and the
    remaining candidates are still ranked; ties keep candidate order.
    """
    if not candidates:
        raise ConfigError("need at least one candidate prompt")
    shared_draws = None
    scored, failures = [], []
    for i, cand in enumerate(candidates):
        try:
            result = zeroshot.assign(dataset, cand.captions)
            if cand.captions.task == TASK_REGRESSION:
                if shared_draws is None:
                    shared_draws = np.asarray(prior.sample(dataset.n, rng), dtype=np.float64)
                distance = losses.wasserstein_1d(result.hard_labels, shared_draws).value
            else:
                hist = zeroshot.predicted_histogram(result, cand.captions)
                pmf = prior.pmf_on_support(cand.captions.values)
                distance = losses.kl_batch(hist[None, :], pmf).value
        except PriorfitError as exc:
            failures.append((i, cand.template, str(exc)))
            continue
        cand.w_distance = distance
        scored.append((distance, i, cand.template))
    scored.sort(key=lambda item: item[0])
    ranked = [
        RankedPrompt(rank=pos, candidate_index=i, template=template, distance=dist)
        for pos, (dist, i, template) in enumerate(scored)
    ]
    if not ranked:
        raise ConfigError("every candidate failed; nothing to rank")
    return PromptRanking(ranked=ranked, failures=failures)
