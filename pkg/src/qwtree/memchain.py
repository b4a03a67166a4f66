"""Memory-2 Markov chains on ``n`` sites.

The state is a two-index distribution ``mu[i, j]``: the probability of
being at ``j`` having arrived from ``i``.  Each site ``j`` owns a stochastic
matrix ``P_j`` with ``P_j[k, m] = p(m | j, k)``, the probability of moving
from ``j`` to ``m`` given that the walker came from ``k``.  One step maps
column ``j`` of ``mu`` (everything currently at ``j``) through ``P_j`` into
row ``j`` of the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "MemoryDistribution",
    "MemoryChain",
    "evolve_distribution",
    "persistent_cycle_chain",
    "marginal",
    "joint_lift",
    "point_mass",
]

TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MemoryDistribution:
    mu: np.ndarray

    def __post_init__(self):
        mu = _frozen(self.mu)
        if mu.ndim != 2 or mu.shape[0] != mu.shape[1] or mu.shape[0] == 0:
            raise DimensionError(f"mu must be a non-empty square matrix, got shape {mu.shape}")
        if np.any(mu < 0):
            raise ParameterError("mu has negative entries")
        if abs(mu.sum() - 1.0) > TOL:
            raise ParameterError(f"mu sums to {mu.sum()!r}, not 1")
        object.__setattr__(self, "mu", mu)

    @property
    def n_sites(self):
        return self.mu.shape[0]


def point_mass(n_sites, prev, cur):
    """Distribution concentrated on the pair ``(prev, cur)``."""
    mu = np.zeros((n_sites, n_sites))
    mu[prev, cur] = 1.0
    return MemoryDistribution(mu)


@dataclass(frozen=True)
class MemoryChain:
    layers: np.ndarray

    def __post_init__(self):
        P = _frozen(self.layers)
        if P.ndim != 3 or P.shape[0] != P.shape[1] or P.shape[1] != P.shape[2]:
            raise DimensionError(f"layers must have shape (n, n, n), got {P.shape}")
        if np.any(P < 0) or np.any(P > 1):
            raise ParameterError("transition probabilities must lie in [0, 1]")
        dev = np.max(np.abs(P.sum(axis=2) - 1.0))
        if dev > TOL:
            raise ParameterError(f"a layer row does not sum to 1 (deviation {dev:.3e})")
        object.__setattr__(self, "layers", P)

    @property
    def n_sites(self):
        return self.layers.shape[0]


def evolve_distribution(mu, chain):
    """One step: row ``j`` of the result is ``mu[:, j] @ P_j``."""
    if mu.n_sites != chain.n_sites:
        raise DimensionError(
            f"distribution has {mu.n_sites} sites but the chain has {chain.n_sites}"
        )
    # out[j, m] = sum_k mu[k, j] P_j[k, m]
    out = np.einsum("kj,jkm->jm", mu.mu, chain.layers)
    return MemoryDistribution(out)


def persistent_cycle_chain(n_sites, p):
    """Persistent walk on a cycle: keep the direction of motion with probability ``p``.

    ``P_j`` has the block ``[[1-p, 0, p], [0, 1, 0], [p, 0, 1-p]]`` on rows and
    columns ``(j-1, j, j+1)`` taken mod ``n``, and 1 on the remaining diagonal.
    Arriving from ``j-1`` means moving forward, so continuing to ``j+1`` has
    probability ``p``.
    """
    if n_sites < 3:
        raise ParameterError(f"the cycle needs at least 3 sites, got {n_sites}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    P = np.zeros((n_sites, n_sites, n_sites))
    for j in range(n_sites):
        P[j] = np.eye(n_sites)
        lo, hi = (j - 1) % n_sites, (j + 1) % n_sites
        P[j, lo, lo], P[j, lo, hi] = 1 - p, p
        P[j, hi, hi], P[j, hi, lo] = 1 - p, p
    return MemoryChain(P)


def marginal(mu):
    """Probability of currently being at each site (column sums of ``mu``)."""
    return mu.mu.sum(axis=0)


def joint_lift(chain):
    """The ``n^2 x n^2`` memoryless transition matrix on pairs.

    Pair ``(i, j)`` is flattened to ``i * n + j``; the lift sends it to
    ``(j, m)`` with probability ``P_j[i, m]``.
    """
    n = chain.n_sites
    T = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            T[i * n + j, j * n : (j + 1) * n] = chain.layers[j, i]
    return T
