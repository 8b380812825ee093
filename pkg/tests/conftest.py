import pytest

from srres.corpus import CorpusSpec, full_corpus


@pytest.fixture(scope="session")
def corpus():
    """The shared sweep corpus: every small complex plus seeded random ones."""
    return full_corpus(CorpusSpec())
