"""Coinless quantum walks in the (previous, current) product basis.

A state is a sparse map from ordered node pairs ``(prev, cur)`` to complex
amplitudes.  One step swaps the pair (the interchange) and then lets the
site unitary of the new first slot act on the second slot.

Convention for reduced matrices: ``reduced[k, m]`` is the amplitude sent to
neighbor ``m`` by a component that arrived from neighbor ``k``.  In other
words the neighbor amplitudes at a site are a row vector multiplied on the
right, ``out = inp @ reduced``, the same way a row of a classical memory-2
distribution is ``c_j^T P_j``.  For the symmetric matrices of the tree walk
and the Szegedy walk the distinction is immaterial; for the line walk it
selects the sign pattern that yields the persistent coined walk.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Callable, Hashable

import numpy as np

from .errors import ConfigurationError, ParameterError

log = logging.getLogger(__name__)

NodeId = Hashable


@dataclass(frozen=True)
class SiteUnitary:
    """Unitary block of one site over its ordered neighbor list."""

    site: NodeId
    neighbors: tuple
    reduced: np.ndarray
    degenerate: bool = False
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.reduced, dtype=complex)
        k = len(self.neighbors)
        if m.shape != (k, k):
            raise ParameterError(
                f"site {self.site!r}: reduced matrix shape {m.shape} does not match {k} neighbors"
            )
        m.setflags(write=False)
        object.__setattr__(self, "neighbors", tuple(self.neighbors))
        object.__setattr__(self, "reduced", m)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.neighbors)})

    def index(self, node):
        return self._index[node]


def verify_unitary(u, tol=1e-12):
    """True when ``reduced @ reduced^H`` is the identity to ``tol`` (max-norm)."""
    m = u.reduced if isinstance(u, SiteUnitary) else np.asarray(u, dtype=complex)
    dev = m @ m.conj().T - np.eye(m.shape[0])
    return bool(np.max(np.abs(dev), initial=0.0) <= tol)


def line_unitary(site, p):
    """Persistent line walk at ``site`` over neighbors ``(site-1, site+1)``.

    ``p`` is the probability to keep the direction of motion.  The endpoints
    ``p = 0`` and ``p = 1`` give permutation matrices; they are accepted but
    flagged as degenerate.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"line_unitary needs 0 <= p <= 1, got {p}")
    c, s = np.sqrt(1.0 - p), np.sqrt(p)
    degenerate = p in (0.0, 1.0)
    if degenerate:
        log.warning("line_unitary(p=%s) is deterministic", p)
    return SiteUnitary(site, (site - 1, site + 1), np.array([[c, s], [-s, c]]), degenerate)


def szegedy_unitary(site, probs, neighbors=None, tol=1e-12):
    """Reflection ``2 sqrt(p_k p_m) - delta_km`` built from one transition row."""
    pr = np.asarray(probs, dtype=float)
    if pr.ndim != 1 or pr.size == 0 or np.any(pr < 0):
        raise ParameterError("probs must be a non-empty row of non-negative numbers")
    if abs(pr.sum() - 1.0) > tol:
        raise ParameterError(f"probs sum to {pr.sum()!r}, not 1; the reflection would not be unitary")
    v = np.sqrt(pr)
    nb = tuple(range(pr.size)) if neighbors is None else tuple(neighbors)
    return SiteUnitary(site, nb, 2.0 * np.outer(v, v) - np.eye(pr.size))


class ProductState:
    """Sparse state ``sum c_ij |i> (x) |j>`` keyed by ``(prev, cur)``."""

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        self.entries = {}
        for key, val in (entries or {}).items():
            val = complex(val)
            if not np.isfinite(val):
                raise ParameterError(f"non-finite amplitude at {key!r}")
            if val != 0:
                self.entries[tuple(key)] = val

    @classmethod
    def pure(cls, prev, cur):
        return cls({(prev, cur): 1.0})

    def __getitem__(self, pair):
        return self.entries.get(tuple(pair), 0j)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.items())

    def __eq__(self, other):
        return isinstance(other, ProductState) and self.entries == other.entries

    def __repr__(self):
        return f"ProductState({len(self.entries)} pairs, norm={self.norm():.12g})"

    def norm(self):
        if not self.entries:
            return 0.0
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.entries.values())))

    def is_normalized(self, tol=1e-10):
        return abs(self.norm() - 1.0) <= tol

    def support(self):
        return set(self.entries)


def apply_interchange(state):
    """Swap every pair ``(i, j) -> (j, i)``; amplitudes are untouched."""
    out = ProductState()
    out.entries = {(j, i): c for (i, j), c in state.entries.items()}
    return out


class InterchangeWalk:
    """Graph plus per-site unitaries.

    ``unitaries`` is any mapping ``site -> SiteUnitary``; lazily populated
    mappings are fine, which is how infinite graphs are handled.  When
    ``adjacency`` is given (a mapping or a callable ``site -> neighbors``),
    each unitary's neighbor list is checked against it on first use.
    """

    def __init__(self, unitaries: Mapping, adjacency: Mapping | Callable | None = None):
        self.unitaries = unitaries
        self.adjacency = adjacency
        self._checked = set()

    def neighbors(self, site):
        if self.adjacency is None:
            return self.unitary(site).neighbors
        if callable(self.adjacency):
            return tuple(self.adjacency(site))
        return tuple(self.adjacency[site])

    def unitary(self, site):
        try:
            u = self.unitaries[site]
        except KeyError:
            raise ConfigurationError(f"no unitary configured for site {site!r}") from None
        if self.adjacency is not None and site not in self._checked:
            if set(u.neighbors) != set(self.neighbors(site)):
                raise ConfigurationError(
                    f"unitary at site {site!r} covers {u.neighbors}, graph has {self.neighbors(site)}"
                )
            self._checked.add(site)
        return u


def step(state, walk):
    """One step ``U X`` of the interchange walk."""
    swapped = apply_interchange(state)
    # gather, for every first-slot site j, the amplitudes on its neighbors
    by_site = defaultdict(list)
    for (j, i), c in swapped.entries.items():
        by_site[j].append((i, c))
    out = defaultdict(complex)
    for j, items in by_site.items():
        u = walk.unitary(j)
        vec = np.zeros(len(u.neighbors), dtype=complex)
        for i, c in items:
            try:
                vec[u.index(i)] += c
            except KeyError:
                raise ConfigurationError(
                    f"pair ({i!r}, {j!r}) is not an edge: {i!r} is not a neighbor of {j!r}"
                ) from None
        new = vec @ u.reduced
        for m, c in zip(u.neighbors, new):
            if c != 0:
                out[(j, m)] += c
    result = ProductState()
    result.entries = {k: v for k, v in out.items() if v != 0}
    return result


def evolve(state, walk, steps):
    """Apply :func:`step` ``steps`` times and return the list of states."""
    states = [state]
    for _ in range(steps):
        state = step(state, walk)
        states.append(state)
    return states


def line_walk(p, sites=None):
    """Interchange walk on the integer line with ``line_unitary(p)`` everywhere.

    With ``sites`` (an iterable of integers) only those sites get unitaries;
    otherwise unitaries are created on demand for every integer.
    """
    if sites is None:
        return InterchangeWalk(_LazyUnitaries(lambda j: line_unitary(j, p)))
    return InterchangeWalk({j: line_unitary(j, p) for j in sites})


class _LazyUnitaries(Mapping):
    """Mapping that builds and caches unitaries on first access."""

    def __init__(self, factory, validate=None):
        self._factory = factory
        self._validate = validate
        self._cache = {}

    def __getitem__(self, site):
        try:
            return self._cache[site]
        except KeyError:
            pass
        if self._validate is not None and not self._validate(site):
            raise KeyError(site)
        u = self._factory(site)
        self._cache[site] = u
        return u

    def __iter__(self):
        return iter(self._cache)

    def __len__(self):
        return len(self._cache)
