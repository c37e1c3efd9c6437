import numpy as np
import pytest

from priorfit import synth, zeroshot
from priorfit.dataio import CaptionSet
from priorfit.errors import ConfigError
from priorfit.evaluate import mae
from priorfit.priors import LabelPrior
from priorfit.promptselect import PromptCandidate, rank_prompts

# measured distances on this fixture track the caption-geometry bias, so
# these biases produce a distance column ordered like {10.8, 10.6, 6.7,
# 5.3, 4.4, 4.3} with the last template winning
TEMPLATES_AND_BIASES = [
    ("a photo from my [label] birthday.", 10.83),
    ("I was [label] when they took this photo.", 10.63),
    ("[label] years old.", 6.66),
    ("this person was born [label] years ago.", 5.33),
    ("a photo of a person, he is [label] years old.", 4.38),
    ("a person of age [label].", 4.31),
]


@pytest.fixture(scope="module")
def prompt_fixture():
    spec = synth.default_regression_spec()
    dataset, _, prior = synth.generate(spec)
    candidates = [
        PromptCandidate(template=template, captions=synth.regression_caption_set(spec, bias=bias))
        for template, bias in TEMPLATES_AND_BIASES
    ]
    return spec, dataset, prior, candidates


def test_template_must_contain_placeholder_once():
    captions = synth.regression_caption_set(synth.default_regression_spec(), bias=0.0)
    with pytest.raises(ConfigError):
        PromptCandidate(template="no placeholder here", captions=captions)
    with pytest.raises(ConfigError):
        PromptCandidate(template="[label] and [label]", captions=captions)


def test_ranking_selects_lowest_distance_candidate(prompt_fixture):
    _, dataset, prior, candidates = prompt_fixture
    ranking = rank_prompts(dataset, candidates, prior, np.random.default_rng(0))
    assert ranking.best.template == "a person of age [label]."
    assert len(ranking.ranked) == 6
    assert not ranking.failures
    distances = [r.distance for r in ranking.ranked]
    assert distances == sorted(distances)
    # distance column in candidate order mirrors the engineered bias order
    # (frozen from a measurement on this deterministic fixture)
    by_candidate = sorted(ranking.ranked, key=lambda r: r.candidate_index)
    np.testing.assert_allclose(
        [r.distance for r in by_candidate],
        [10.826, 10.617, 6.651, 5.332, 4.379, 4.313],
        atol=0.02,
    )


def test_distance_rank_equals_mae_rank(prompt_fixture):
    _, dataset, prior, candidates = prompt_fixture
    ranking = rank_prompts(dataset, candidates, prior, np.random.default_rng(0))
    maes = []
    for cand in candidates:
        zs = zeroshot.assign(dataset, cand.captions)
        maes.append(mae(zs.hard_labels, dataset.labels))
    mae_rank = list(np.argsort(maes, kind="stable"))
    distance_rank = [r.candidate_index for r in ranking.ranked]
    assert distance_rank == mae_rank


def test_exact_distribution_match_ranks_first(prompt_fixture):
    spec, dataset, prior, candidates = prompt_fixture
    unbiased = PromptCandidate(
        template="age [label].", captions=synth.regression_caption_set(spec, bias=0.0)
    )
    ranking = rank_prompts(dataset, candidates + [unbiased], prior, np.random.default_rng(0))
    assert ranking.best.template == "age [label]."
    assert ranking.best.distance < 1.0


def test_exact_sample_match_scores_zero():
    # degenerate prior: every draw is the single atom, and a candidate whose
    # predictions are all that atom matches the samples exactly
    spec = synth.default_regression_spec(n=50, bias=0.0, noise=0.0,
                                         prior_mu=40.0, prior_sigma=4.0, seed=9)
    dataset, _, _ = synth.generate(spec)
    atom = LabelPrior.categorical([40.0], [1.0])
    grid = synth.regression_caption_set(spec, bias=0.0)
    single = CaptionSet(
        embeddings=grid.embeddings[39:40], values=grid.values[39:40],
        names=[grid.names[39]], task="regression",
    )
    exact = PromptCandidate(template="age [label].", captions=single)
    offset = PromptCandidate(template="years: [label].",
                             captions=synth.regression_caption_set(spec, bias=5.0))
    ranking = rank_prompts(dataset, [offset, exact], atom, np.random.default_rng(0))
    assert ranking.best.template == "age [label]."
    assert ranking.best.distance == 0.0


def test_ranking_invariant_to_candidate_order(prompt_fixture):
    _, dataset, prior, candidates = prompt_fixture
    forward_run = rank_prompts(dataset, candidates, prior, np.random.default_rng(0))
    reversed_run = rank_prompts(dataset, candidates[::-1], prior, np.random.default_rng(0))
    assert [r.template for r in forward_run.ranked] == [r.template for r in reversed_run.ranked]
    np.testing.assert_allclose(
        [r.distance for r in forward_run.ranked], [r.distance for r in reversed_run.ranked],
        atol=1e-12,
    )


def test_failed_candidate_recorded_others_ranked(prompt_fixture):
    spec, dataset, prior, candidates = prompt_fixture
    bad = PromptCandidate(
        template="broken [label].",
        captions=CaptionSet(
            embeddings=np.eye(3), values=np.array([1.0, 2.0, 3.0]),
            names=list("abc"), task="regression",
        ),
    )
    ranking = rank_prompts(dataset, [bad] + candidates, prior, np.random.default_rng(0))
    assert len(ranking.ranked) == 6
    assert len(ranking.failures) == 1
    assert ranking.failures[0][1] == "broken [label]."


def test_classification_candidates_use_kl(classification_fixture):
    spec, dataset, captions, prior, _ = classification_fixture
    good = PromptCandidate(template="a photo of a [label].", captions=captions)
    ranking = rank_prompts(dataset, [good], prior, np.random.default_rng(0))
    assert ranking.ranked[0].distance >= 0.0


def test_empty_candidate_list_rejected(prompt_fixture):
    _, dataset, prior, _ = prompt_fixture
    with pytest.raises(ConfigError):
        rank_prompts(dataset, [], prior, np.random.default_rng(0))
