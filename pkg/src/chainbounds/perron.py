"""Perron-Frobenius eigentriples for nonnegative matrices.

The solver is a deterministic power iteration (all-ones start, sup-norm
normalization each step) run simultaneously for the right vector and,
on the transpose, for the left one.  Iteration happens on M + eps*I with
a small eps: matrices whose positivity digraph is periodic make plain
power iteration oscillate, and the shift cures that without changing the
eigenvectors (every eigenvalue moves by exactly eps, which breaks the
balanced |eigenvalue| ties behind the oscillation and barely perturbs
well-separated spectra).  The reported eigenvalue
comes from the two-sided Rayleigh quotient u'Mv / u'v on the original
matrix, which is accurate to roundoff once the vectors have converged and
avoids subtracting the shift back out of the estimate.

Normalization convention for a triple (rho, u, v):

    sum_x u(x) = 1        and        sum_x u(x) v(x) = 1.

The extended solver handles block matrices of the form [[A, 0], [B, 0]]
(up to a simultaneous renumbering of rows and columns) with A irreducible
and no zero row in B: rho(M) = rho(A), u is supported on the A block, and
the remaining part of v is B v_A / rho(A).
"""

from dataclasses import dataclass

import numpy as np

from . import assumptions as _assumptions
from .errors import AssumptionError, ConvergenceError, DomainError
from .model import MarkovModel, is_irreducible, level_sets

RESIDUAL_TOL = 1e-11      # times the max entry of the matrix
RHO_REL_TOL = 1e-13       # successive eigenvalue-estimate agreement
ITERATION_BUDGET = 100_000
SHIFT_FRACTION = 1e-3     # eps = SHIFT_FRACTION * max entry

__all__ = [
    "PerronTriple",
    "BlockStructure",
    "pf_irreducible",
    "pf_extended",
    "limit_matrix",
]


@dataclass(frozen=True, eq=False)
class PerronTriple:
    """Spectral radius with left/right eigenvectors in the convention above.

    ``residual`` is the max-norm eigen-residual actually achieved on the
    matrix the triple was computed from.
    """

    rho: float
    u: np.ndarray
    v: np.ndarray
    residual: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def pi(self) -> np.ndarray:
        """Stationary vector of the normalized chain: pi = u * v."""
        return self.u * self.v


@dataclass(frozen=True)
class BlockStructure:
    """Index sets describing the [[A, 0], [B, 0]] block pattern.

    ``core`` holds the rows/columns of the irreducible block A, ``fringe``
    the complement, and ``witness`` maps each fringe state to one core
    state it transitions into.
    """

    core: tuple[int, ...]
    fringe: tuple[int, ...]
    witness: dict[int, int] = None

    def __post_init__(self):
        object.__setattr__(self, "core", tuple(int(i) for i in self.core))
        object.__setattr__(self, "fringe", tuple(int(i) for i in self.fringe))
        object.__setattr__(self, "witness", dict(self.witness or {}))
        if not self.core:
            raise DomainError("perron: block structure needs a nonempty core")


def _power_vectors(M_it: np.ndarray, budget: int):
    """Run the two-sided power iteration; return (u, v, iterations) or None.

    Vectors are sup-normalized each step.  The cheap trigger is agreement
    of successive eigenvalue estimates to RHO_REL_TOL relative, but the
    decisive test is the sup-norm eigen-residual: per-step rounding keeps
    the estimates jittering at about eps/(spectral gap), which for nearly
    balanced spectra sits above RHO_REL_TOL, so the residual is also
    polled periodically.  The gate anticipates the final normalization:
    the right vector will be rescaled by sum(u)/(u.v), which can be large
    when eigenvector entries are lopsided, so the raw residual must be
    smaller by that factor.
    """
    n = M_it.shape[0]
    MT = np.ascontiguousarray(M_it.T)
    v = np.ones(n)
    u = np.ones(n)
    base_gate = 0.3 * RESIDUAL_TOL * float(M_it.max())
    rv_prev = ru_prev = np.inf
    for k in range(budget):
        w = M_it @ v
        rv = float(w.max())
        z = MT @ u
        ru = float(z.max())
        if rv <= 0.0 or ru <= 0.0 or not np.isfinite(rv) or not np.isfinite(ru):
            return None
        v = w / rv
        u = z / ru
        triggered = (abs(rv - rv_prev) <= RHO_REL_TOL * rv
                     and abs(ru - ru_prev) <= RHO_REL_TOL * ru)
        if triggered or k % 50 == 49:
            res_v = float(np.abs(M_it @ v - rv * v).max())
            res_u = float(np.abs(MT @ u - ru * u).max())
            v_rescale = float(u.sum()) / float(u @ v)
            if res_v * max(1.0, v_rescale) <= base_gate and res_u <= base_gate:
                return u, v, k + 1
        rv_prev, ru_prev = rv, ru
    return None


def _finish(M: np.ndarray, u: np.ndarray, v: np.ndarray) -> PerronTriple:
    """Apply the normalization convention and measure the residual on M."""
    denom = float(u @ v)
    rho = float(u @ (M @ v)) / denom
    if not np.isfinite(rho) or rho <= 0.0:
        raise ConvergenceError(
            f"perron: iteration produced a non-positive eigenvalue ({rho!r})")
    u = u / u.sum()
    v = v / float(u @ v)
    residual = max(
        float(np.abs(M.T @ u - rho * u).max()),
        float(np.abs(M @ v - rho * v).max()),
    )
    tol = RESIDUAL_TOL * float(M.max())
    if residual > tol:
        raise ConvergenceError(
            f"perron: eigen-residual {residual:.3e} exceeds tolerance "
            f"{tol:.3e}", residual=residual)
    if v.min() <= 0.0:
        raise ConvergenceError(
            "perron: right eigenvector lost strict positivity")
    return PerronTriple(rho=rho, u=u, v=v, residual=residual)


def pf_irreducible(M: np.ndarray, budget: int = ITERATION_BUDGET) -> PerronTriple:
    """Perron-Frobenius triple of a nonnegative irreducible square matrix.

    Irreducibility is the caller's responsibility (`is_irreducible`); the
    solver also copes with the [[A, 0], [B, 0]] pattern that arises when
    tilted matrices underflow toward their limit.  Output is deterministic
    for identical input.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("perron: matrix must be square")
    if M.min() < 0.0:
        raise ValueError("perron: matrix must be nonnegative")
    n = M.shape[0]
    if n == 1:
        rho = float(M[0, 0])
        if rho <= 0.0:
            raise DomainError("perron: 1x1 matrix with zero entry is reducible")
        return PerronTriple(rho=rho, u=np.ones(1), v=np.ones(1), residual=0.0)

    eps = SHIFT_FRACTION * float(M.max())
    res = _power_vectors(M + eps * np.eye(n), budget)
    if res is None:
        raise ConvergenceError(
            f"perron: power iteration did not converge within {budget} "
            "iterations (ill-conditioned spectrum)")
    u, v, _ = res
    return _finish(M, u, v)


def pf_extended(M: np.ndarray, structure: BlockStructure) -> PerronTriple:
    """Perron triple of a matrix with the [[A, 0], [B, 0]] block pattern.

    The core triple is computed with `pf_irreducible` on A and the fringe
    part of v is assembled as B v_A / rho(A); this is exact and better
    conditioned than iterating on M itself.  With an all-states core this
    reduces to `pf_irreducible`.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    core = list(structure.core)
    fringe = list(structure.fringe)
    if sorted(core + fringe) != list(range(n)):
        raise DomainError(
            "perron: block structure does not partition the state space")
    if fringe:
        off = M[:, fringe]
        if np.any(off != 0.0):
            x = np.argwhere(off != 0.0)[0]
            raise DomainError(
                f"perron: column {fringe[x[1]]} outside the core is not zero")
    A = M[np.ix_(core, core)]
    if not is_irreducible(A):
        raise DomainError("perron: core block is not irreducible")
    B = M[np.ix_(fringe, core)]
    if fringe and np.any((B > 0.0).sum(axis=1) == 0):
        x = int(np.flatnonzero((B > 0.0).sum(axis=1) == 0)[0])
        raise DomainError(
            f"perron: fringe state {fringe[x]} has no transition into the core")

    tri = pf_irreducible(A)
    u = np.zeros(n)
    v = np.zeros(n)
    u[core] = tri.u
    v[core] = tri.v
    if fringe:
        v[fringe] = B @ tri.v / tri.rho
    rho = tri.rho
    residual = max(
        float(np.abs(M.T @ u - rho * u).max()),
        float(np.abs(M @ v - rho * v).max()),
    )
    tol = RESIDUAL_TOL * float(M.max())
    if residual > tol:
        raise ConvergenceError(
            f"perron: assembled eigen-residual {residual:.3e} exceeds "
            f"tolerance {tol:.3e}", residual=residual)
    return PerronTriple(rho=rho, u=u, v=v, residual=residual)


def limit_matrix(model: MarkovModel, side: str = "upper"):
    """Limit of the rescaled tilted matrices and its spectral objects.

    For the upper side this keeps exactly the columns of P indexed by the
    argmax set of f and zeroes the rest; the lower side uses the argmin
    set (equivalently, the construction for -f).  Requires the side's
    positivity assumptions; returns ``(matrix, BlockStructure, PerronTriple)``.
    """
    report = _assumptions.validate(model)
    ls = level_sets(model)
    if side == "upper":
        ok = report.a1 and report.a2
        ids = ("A1", "A2")
        core = ls.S_b
    elif side == "lower":
        ok = report.a3 and report.a4
        ids = ("A3", "A4")
        core = ls.S_a
    else:
        raise DomainError(f"perron: side must be 'upper' or 'lower', got {side!r}")
    if not ok:
        bad = [v for v in report.violations if v.assumption in ids]
        raise AssumptionError(
            "perron: limit matrix requires "
            + "-".join(ids) + "; " + "; ".join(v.witness for v in bad),
            violations=bad)

    n = model.n_states
    fringe = tuple(i for i in range(n) if i not in core)
    P = model.P
    witness = {int(x): int(core[int(np.flatnonzero(P[x, list(core)] > 0.0)[0])])
               for x in fringe}
    Mbar = np.zeros_like(P)
    Mbar[:, list(core)] = P[:, list(core)]
    structure = BlockStructure(core=core, fringe=fringe, witness=witness)
    triple = pf_extended(Mbar, structure)
    return Mbar, structure, triple
