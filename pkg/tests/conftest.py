"""Shared fixtures: small named tournaments, the seeded corpus and fixture files."""

import logging
from pathlib import Path

import numpy as np
import pytest

from search_config import use_config
from tournament import Tournament, generate_hk, generate_random, make_tournament, random_corpus, transitive_tournament

FIXTURES = Path(__file__).parent / "fixtures"

CORPUS_SEED = 20240601


@pytest.fixture(autouse=True)
def default_settings():
    """Every test starts and ends on the repository defaults and the original root handlers."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    use_config()
    yield
    use_config()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def c3():
    return make_tournament(3, [(0, 1), (1, 2), (2, 0)])


@pytest.fixture(scope="session")
def h1():
    return generate_hk(1)


@pytest.fixture(scope="session")
def h2():
    return generate_hk(2)


@pytest.fixture(scope="session")
def h3():
    return generate_hk(3)


@pytest.fixture(scope="session")
def transitive5():
    return transitive_tournament(5)


@pytest.fixture(scope="session")
def small_corpus():
    """The 200-tournament n <= 7 corpus."""
    return random_corpus(200, CORPUS_SEED, min_n=1, max_n=7)


def lexicographic_product(outer, inner):
    """outer[inner]: vertex (i, j) is i * inner.n + j; arcs between copies follow outer."""
    b = inner.n
    between = np.kron(outer.matrix.astype(np.int8), np.ones((b, b), dtype=np.int8))
    within = np.kron(np.eye(outer.n, dtype=np.int8), inner.matrix.astype(np.int8))
    return Tournament.from_matrix((between + within).astype(bool))


def circulant(n, steps):
    """Circulant tournament on odd n: i -> i + s (mod n) for every s in steps."""
    matrix = np.zeros((n, n), dtype=bool)
    for s in steps:
        matrix[np.arange(n), (np.arange(n) + s) % n] = True
    return Tournament.from_matrix(matrix)


@pytest.fixture(scope="session")
def nonrigid_corpus(c3):
    """Seeded tournaments with nontrivial automorphisms: R[C3], C3[R] and circulants up to n = 13."""
    rng = np.random.default_rng(CORPUS_SEED)
    corpus = []
    for a in (2, 3, 4):
        for _ in range(8):
            r = generate_random(a, int(rng.integers(2 ** 32)))
            corpus.append(lexicographic_product(r, c3))
            corpus.append(lexicographic_product(c3, r))
    for n in (3, 5, 7, 9, 11, 13):
        for _ in range(5):
            steps = [s if rng.random() < 0.5 else n - s for s in range(1, n // 2 + 1)]
            corpus.append(circulant(n, steps))
    return corpus


@pytest.fixture(scope="session")
def blown_up_seven(c3):
    """Two C3 modules A -> B plus a vertex x with B -> x -> A, every vertex then replaced by C3."""
    arcs = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    arcs += [(a, b) for a in range(3) for b in range(3, 6)]
    arcs += [(b, 6) for b in range(3, 6)] + [(6, a) for a in range(3)]
    return lexicographic_product(make_tournament(7, arcs), c3)
