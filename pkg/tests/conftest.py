import numpy as np
import pytest

from nnspeech.corpus.synthetic import generate_synthetic_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """Four rulebook utterances with their rule frames."""
    return generate_synthetic_corpus(7, 4, return_frames=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
