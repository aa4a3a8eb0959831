"""Finite-state Markov models and the graph predicates everything else uses.

A model is the triple (P, f, q) over a labeled finite state space: a row
stochastic transition matrix P, a real observable f per state, and an
initial distribution q.  Models are immutable after construction and are
validated eagerly, so downstream numerics can trust their invariants.

Model files are YAML documents (JSON is accepted too) with keys

    states: list of state labels
    P:      list of rows, each a list of transition probabilities
    f:      list of reals, one per state
    q:      optional list of reals (default: uniform)

Values are read as 64-bit floats; bit-exact round-trips of decimal
literals are not promised.
"""

from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ModelFormatError

ROW_SUM_TOL = 1e-12
PROB_SUM_TOL = 1e-12

__all__ = [
    "MarkovModel",
    "LevelSets",
    "load_model",
    "parse_model",
    "is_irreducible",
    "level_sets",
]


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Validated finite-state Markov model: labels, P, f and q.

    Arrays are coerced to read-only float64 on construction.  Every row of
    P must sum to 1 within ``ROW_SUM_TOL`` (no silent renormalization: the
    bounds computed downstream are only as valid as the input chain).
    """

    states: tuple[str, ...]
    P: np.ndarray
    f: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        P = _as_readonly(self.P, "P")
        f = _as_readonly(self.f, "f")
        q = _as_readonly(self.q, "q")
        n = len(states)
        if n < 1:
            raise ModelFormatError("model: at least one state is required")
        if P.ndim != 2 or P.shape != (n, n):
            raise ModelFormatError(
                f"model: P has shape {P.shape}, expected ({n}, {n})")
        if f.shape != (n,):
            raise ModelFormatError(
                f"model: f has length {f.shape}, expected {n}")
        if q.shape != (n,):
            raise ModelFormatError(
                f"model: q has length {q.shape}, expected {n}")
        bad = np.argwhere(P < 0.0)
        if bad.size:
            x, y = bad[0]
            raise ModelFormatError(
                f"model: P[{x}][{y}] = {P[x, y]!r} is negative")
        rows = P.sum(axis=1)
        off = np.abs(rows - 1.0)
        if off.max() > ROW_SUM_TOL:
            x = int(off.argmax())
            raise ModelFormatError(
                f"model: row {x} of P is not stochastic "
                f"(sums to {rows[x]!r}, tolerance {ROW_SUM_TOL})")
        if np.any(q < 0.0):
            x = int(np.argwhere(q < 0.0)[0])
            raise ModelFormatError(
                f"model: q[{x}] = {q[x]!r} is negative")
        if abs(q.sum() - 1.0) > PROB_SUM_TOL:
            raise ModelFormatError(
                f"model: q sums to {q.sum()!r}, not 1 "
                f"(tolerance {PROB_SUM_TOL})")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "q", q)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def negated(self) -> "MarkovModel":
        """Same chain with the observable flipped (f -> -f).

        Lower-tail questions about f are upper-tail questions about -f.
        """
        return MarkovModel(self.states, self.P, -self.f, self.q)

    def index_of(self, label: str) -> int:
        return self.states.index(str(label))


@dataclass(frozen=True)
class LevelSets:
    """Extremes of the observable and the states attaining them.

    ``a``/``b`` are the minimum/maximum of f; ``S_a``/``S_b`` the index
    sets where they are attained, under exact comparison of the stored
    floats.  Ties must be encoded exactly in the model file; a tolerance
    here would silently change the sets the assumptions are about.
    """

    a: float
    b: float
    S_a: tuple[int, ...]
    S_b: tuple[int, ...]


def _as_readonly(arr, name: str) -> np.ndarray:
    try:
        out = np.array(arr, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"model: {name} is not numeric: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ModelFormatError(f"model: {name} contains non-finite entries")
    out.setflags(write=False)
    return out


def parse_model(text: str) -> MarkovModel:
    """Parse a model document from a string.  See the module docstring."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ModelFormatError(f"model: parse failure: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model: document must be a mapping")
    missing = [k for k in ("states", "P", "f") if k not in doc]
    if missing:
        raise ModelFormatError(f"model: missing keys: {', '.join(missing)}")
    unknown = [k for k in doc if k not in ("states", "P", "f", "q")]
    if unknown:
        raise ModelFormatError(f"model: unknown keys: {', '.join(unknown)}")
    states = doc["states"]
    if not isinstance(states, (list, tuple)) or not states:
        raise ModelFormatError("model: states must be a nonempty list")
    n = len(states)
    q = doc.get("q")
    if q is None:
        q = [1.0 / n] * n
    return MarkovModel(tuple(str(s) for s in states), doc["P"], doc["f"], q)


def load_model(path) -> MarkovModel:
    """Load and validate a model file; labels keep their input order."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"model: cannot read {path}: {exc}") from exc
    return parse_model(text)


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    """Boolean vector of vertices reachable from ``start`` (incl. itself)."""
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = adj[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def is_irreducible(M: np.ndarray) -> bool:
    """True iff the positivity digraph of the square matrix M is strongly
    connected.

    Edge (x, y) exists whenever M[x, y] > 0.  A 1x1 matrix counts as
    irreducible only if its entry is positive (a lone state needs a
    self-loop to be recurrent under the matrix-power definition).
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("is_irreducible: matrix must be square")
    n = M.shape[0]
    if n == 1:
        return bool(M[0, 0] > 0.0)
    adj = M > 0.0
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def level_sets(model: MarkovModel) -> LevelSets:
    """Exact argmin/argmax sets of the observable f."""
    f = model.f
    a = float(f.min())
    b = float(f.max())
    S_a = tuple(int(i) for i in np.flatnonzero(f == a))
    S_b = tuple(int(i) for i in np.flatnonzero(f == b))
    return LevelSets(a=a, b=b, S_a=S_a, S_b=S_b)
