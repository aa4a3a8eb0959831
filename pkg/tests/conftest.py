import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chainbounds import MarkovModel


def two_state(p: float = 0.3, q: float = 0.3) -> MarkovModel:
    """P = ((1-p, p), (q, 1-q)) with f = (0, 1)."""
    return MarkovModel(("0", "1"), [[1 - p, p], [q, 1 - q]],
                       [0.0, 1.0], [0.5, 0.5])


def two_cycle() -> MarkovModel:
    """Deterministic swap chain with f(x) = x on states {-1, +1}.

    The family it generates is degenerate: every tilt returns the chain.
    """
    return MarkovModel(("-1", "1"), [[0.0, 1.0], [1.0, 0.0]],
                       [-1.0, 1.0], [0.5, 0.5])


def no_selfloop_top() -> MarkovModel:
    """P(x, .) uniform from -1, forced back from +1; f(x) = x.

    The f-argmax state has no self-loop, so the upper-tail block
    assumption fails and eigenvector ratios diverge with the tilt.
    """
    return MarkovModel(("-1", "1"), [[0.5, 0.5], [1.0, 0.0]],
                       [-1.0, 1.0], [0.5, 0.5])


def birth_death() -> MarkovModel:
    """Three-state birth-death chain P(x, y) = 1{x+y != 0}/2, f(x) = -x.

    State +1 cannot reach the f-argmax state -1 in one step, so the
    one-step reach assumption fails on the upper side.
    """
    P = [[0.5, 0.5, 0.0],
         [0.5, 0.0, 0.5],
         [0.0, 0.5, 0.5]]
    return MarkovModel(("-1", "0", "1"), P, [1.0, 0.0, -1.0],
                       [1 / 3, 1 / 3, 1 / 3])


def iid_model(p: float = 0.3) -> MarkovModel:
    """Identical rows: an IID Bernoulli(p) sequence seen through f = (0, 1)."""
    return MarkovModel(("0", "1"), [[1 - p, p], [1 - p, p]],
                       [0.0, 1.0], [0.5, 0.5])


def random_positive_model(rng: np.random.Generator, n_states: int,
                          f_span=(-1.0, 1.0)) -> MarkovModel:
    """Entrywise positive chain with a generic observable.

    Positivity makes all four assumptions hold for any f.
    """
    P = rng.uniform(0.1, 1.0, (n_states, n_states))
    P /= P.sum(axis=1, keepdims=True)
    f = rng.uniform(*f_span, n_states)
    q = rng.uniform(0.1, 1.0, n_states)
    q /= q.sum()
    labels = tuple(f"s{i}" for i in range(n_states))
    return MarkovModel(labels, P, f, q)


def random_irreducible_model(rng: np.random.Generator,
                             n_states: int) -> MarkovModel:
    """Sparse-ish irreducible chain: a cycle plus random extra edges."""
    P = np.zeros((n_states, n_states))
    for i in range(n_states):
        P[i, (i + 1) % n_states] = rng.uniform(0.2, 1.0)
        extras = rng.integers(0, n_states, size=2)
        for j in extras:
            P[i, j] += rng.uniform(0.0, 1.0)
    P /= P.sum(axis=1, keepdims=True)
    f = rng.uniform(-1.0, 1.0, n_states)
    q = np.full(n_states, 1.0 / n_states)
    labels = tuple(f"s{i}" for i in range(n_states))
    return MarkovModel(labels, P, f, q)


@pytest.fixture
def write_model(tmp_path):
    def _write(text: str, name: str = "model.yaml") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
