import numpy as np
import pytest

from priorfit import synth, zeroshot


@pytest.fixture(scope="session")
def regression_fixture():
    """Default desk-scale regression fixture plus its zero-shot result."""
    spec = synth.default_regression_spec()
    dataset, captions, prior = synth.generate(spec)
    zs = zeroshot.assign(dataset, captions)
    return spec, dataset, captions, prior, zs


@pytest.fixture(scope="session")
def classification_fixture():
    spec = synth.default_classification_spec()
    dataset, captions, prior = synth.generate(spec)
    zs = zeroshot.assign(dataset, captions)
    return spec, dataset, captions, prior, zs


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
