import numpy as np
import pytest
from hypothesis import strategies as st

# lines recorded by the acceptance module, echoed in the terminal summary
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


def random_similarity(rng, n):
    """Symmetric, unit diagonal, entries in [0, 1]."""
    A = rng.random((n, n))
    A = np.triu(A, 1)
    A = A + A.T
    np.fill_diagonal(A, 1.0)
    return A


def mcmc_like_similarity(rng, n, draws=50):
    """Similarity built from noisy label draws around a random partition."""
    from nmfpart.similarity import build_similarity

    base = rng.integers(0, max(1, n // 3), size=n)
    rows = []
    for _ in range(draws):
        row = base.copy()
        flip = rng.random(n) < 0.2
        row[flip] = rng.integers(0, n, size=flip.sum())
        rows.append(row)
    return build_similarity(np.array(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def label_vectors(min_n=2, max_n=10, max_label=5):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.lists(st.integers(0, max_label), min_size=n, max_size=n))


@st.composite
def label_pairs(draw, min_n=2, max_n=12, max_label=5):
    n = draw(st.integers(min_n, max_n))
    a = draw(st.lists(st.integers(0, max_label), min_size=n, max_size=n))
    b = draw(st.lists(st.integers(0, max_label), min_size=n, max_size=n))
    return a, b


@st.composite
def similarity_and_partition(draw, min_n=2, max_n=9):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**31 - 1))
    labels = draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    return random_similarity(np.random.default_rng(seed), n), labels
