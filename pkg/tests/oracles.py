"""Independent oracles the tests check the library against.

Everything here is deliberately computed by a different route than the
library uses: closed forms, characteristic polynomials, and brute-force
path enumeration.  None of it imports chainbounds.
"""

import itertools
import math

import numpy as np


def two_state_tilted_rho(p: float, q: float, theta: float) -> float:
    """Largest root of the tilted 2-state characteristic polynomial.

    For P = ((1-p, p), (q, 1-q)) with f = (0, 1), the tilted matrix has
    char poly  lam^2 - ((1-p) + (1-q)e^t) lam + ((1-p)(1-q) - pq) e^t.
    """
    et = math.exp(theta)
    b = (1.0 - p) + (1.0 - q) * et
    c = ((1.0 - p) * (1.0 - q) - p * q) * et
    return (b + math.sqrt(b * b - 4.0 * c)) / 2.0


def chain_no_selfloop_rho(theta: float) -> float:
    """Spectral radius of the tilted chain P = ((1/2, 1/2), (1, 0)),
    f = (-1, 1): (1 + sqrt(1 + 8 e^{2 theta})) e^{-theta} / 4."""
    return (1.0 + math.sqrt(1.0 + 8.0 * math.exp(2.0 * theta))) \
        * math.exp(-theta) / 4.0


def two_cycle_right_eigvec(theta: float) -> np.ndarray:
    """Normalized right eigenvector for the tilted two-cycle with f = (-1, 1):
    v = ((1+e^t)/2, (1+e^-t)/2) under sum(u)=1, sum(u*v)=1."""
    return np.array([(1.0 + math.exp(theta)) / 2.0,
                     (1.0 + math.exp(-theta)) / 2.0])


def bernoulli_rate(mu: float, p: float) -> float:
    """Classical Chernoff rate for IID Bernoulli(p) means."""
    if mu <= 0.0 or mu >= 1.0:
        if mu in (0.0, 1.0):
            q = p if mu == 1.0 else 1.0 - p
            return -math.log(q)
        return math.inf
    return mu * math.log(mu / p) + (1.0 - mu) * math.log((1.0 - mu) / (1.0 - p))


def charpoly_spectral_radius(M: np.ndarray) -> float:
    """Spectral radius via Faddeev-LeVerrier coefficients and np.roots."""
    M = np.asarray(M, dtype=np.float64)
    s = M.shape[0]
    coeffs = np.zeros(s + 1)
    coeffs[0] = 1.0
    N = np.zeros_like(M)
    eye = np.eye(s)
    for k in range(1, s + 1):
        N = M @ N + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(M @ N) / k
    return float(np.abs(np.roots(coeffs)).max())


def enumerate_paths(model, n: int):
    """Yield (probability, [f-sum over steps 1..n]) over all length-n paths."""
    s = len(model.states)
    P, f, q = model.P, model.f, model.q
    for path in itertools.product(range(s), repeat=n + 1):
        prob = q[path[0]]
        for a, b in zip(path, path[1:]):
            prob *= P[a, b]
            if prob == 0.0:
                break
        if prob == 0.0:
            continue
        yield prob, sum(f[x] for x in path[1:])


def exact_tail_probability(model, n: int, mu: float, side: str) -> float:
    """P((1/n) sum f(X_k) >= mu) (closed event) by full path enumeration."""
    total = 0.0
    for prob, ssum in enumerate_paths(model, n):
        mean = ssum / n
        if (side == "upper" and mean >= mu) or (side == "lower" and mean <= mu):
            total += prob
    return total


def exact_scaled_log_mgf(model, theta: float, n: int) -> float:
    """(1/n) log E exp(theta * sum f(X_k)) by full path enumeration."""
    total = 0.0
    for prob, ssum in enumerate_paths(model, n):
        total += prob * math.exp(theta * ssum)
    return math.log(total) / n
