"""The symmetric quantum walk on the semi-infinite binary tree.

Nodes use heap numbering: the root is 0, the children of ``v`` are ``2v+1``
and ``2v+2``.  Every internal node carries the symmetric 3x3 block

    (1/sqrt 3) [[1, a, a], [a, 1, a], [a, a, 1]],   a = exp(2 pi i / 3)

over its neighbors ordered (parent, left child, right child).  The root only
reflects: its unitary is the identity.  A walk started inside the subtree of
node 1 never crosses into the subtree of node 2, so the root amplitude
``H_n(t)`` is the coefficient of the pair ``(1, 0)``.

Three simulators are provided:

* :func:`simulate_tree` runs the generic interchange framework on the tree,
  pruning pairs that can no longer reach the root before ``t_max``.
* :func:`full_tree_evolution` is a vectorized, unpruned full-tree run used to
  check unitarity.
* :func:`simulate_projected` evolves the exact symmetry-lumped walk on
  ``(level, direction)`` and is the fast production path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResourceLimitError
from .interchange import InterchangeWalk, ProductState, SiteUnitary, _LazyUnitaries, step

SQRT3 = 3.0 ** 0.5
A = complex(-0.5, SQRT3 / 2)

# lumped step weights, keyed by (incoming direction, outgoing direction)
W_AWAY_BACK = 1 / SQRT3             # moving away, turn back toward the root
W_AWAY_ON = 2 * A / SQRT3           # moving away, continue away (two branches)
W_TOWARD_TURN = (1 + A) / SQRT3     # moving toward, turn away (reverse or other branch)
W_TOWARD_ON = A / SQRT3             # moving toward, continue toward the root
W_ROOT = 1.0                        # reflection at the root

TOWARD, AWAY = "toward_root", "away_from_root"

DEFAULT_MAX_PAIRS = 4_000_000


def level(v):
    return (v + 1).bit_length() - 1


def parent(v):
    if v <= 0:
        raise ParameterError("the root has no parent")
    return (v - 1) // 2


def children(v):
    return 2 * v + 1, 2 * v + 2


def leftmost(n):
    """Heap index of the leftmost node on level ``n``."""
    return (1 << n) - 1


def tree_neighbors(v):
    if v < 0:
        raise ParameterError(f"invalid node {v}")
    if v == 0:
        return (1, 2)
    return (parent(v),) + children(v)


_U_RED = np.array([[1, A, A], [A, 1, A], [A, A, 1]]) / SQRT3


def tree_unitary(j):
    """Site unitary of node ``j``: the symmetric block, or identity at the root."""
    if j == 0:
        return SiteUnitary(0, (1, 2), np.eye(2))
    return SiteUnitary(j, tree_neighbors(j), _U_RED)


def tree_walk():
    """Interchange walk on the infinite tree with lazily built unitaries."""
    return InterchangeWalk(_LazyUnitaries(tree_unitary, lambda v: v >= 0), tree_neighbors)


def initial_state(n, child="left"):
    """Pure state ``|c> (x) |v>``: at the leftmost level-``n`` node, arrived from a child."""
    if n < 1:
        raise ParameterError("initial_state needs n >= 1; the n = 0 walk is the multi-loop series")
    v = leftmost(n)
    c = children(v)[0 if child == "left" else 1]
    return ProductState.pure(c, v)


def root_amplitude(state):
    """Sum of the amplitudes on pairs ``(child, root)``."""
    return state[(1, 0)] + state[(2, 0)]


def simulate_tree(n, t_max, child="left", prune=True, max_pairs=DEFAULT_MAX_PAIRS):
    """Root amplitudes ``H_n(t)``, ``t = 0..t_max``, from the full tree walk.

    With ``prune`` set, a pair whose current node sits deeper than the number
    of remaining steps is dropped; it cannot contribute to any later root
    amplitude, so the returned values are exact.  The state size is capped at
    ``max_pairs``.
    """
    if t_max < 0:
        raise ParameterError("t_max must be non-negative")
    walk = tree_walk()
    state = initial_state(n, child)
    out = np.zeros(t_max + 1, dtype=complex)
    out[0] = root_amplitude(state)
    for t in range(1, t_max + 1):
        state = step(state, walk)
        if prune:
            horizon = t_max - t
            state.entries = {k: c for k, c in state.entries.items() if level(k[1]) <= horizon}
        if len(state) > max_pairs:
            raise ResourceLimitError(
                f"tree state holds {len(state)} pairs at t={t}, cap is {max_pairs}"
            )
        out[t] = root_amplitude(state)
    return out


def full_tree_evolution(n, t_max, child="left", max_nodes=1 << 23):
    """Unpruned full-tree run in array form.

    Each non-root node ``v`` owns two directed pairs: ``down[v]`` for
    ``(parent(v), v)`` and ``up[v]`` for ``(v, parent(v))``.  After ``t``
    steps nothing lies below level ``n + t``, so each step only touches the
    heap prefix holding levels ``0..n+t``.  Returns the root amplitudes and
    the state norm after every step.
    """
    if n < 1 or t_max < 0:
        raise ParameterError("full_tree_evolution needs n >= 1 and t_max >= 0")
    size = (1 << (n + t_max + 1)) - 1
    if size > max_nodes:
        raise ResourceLimitError(f"full tree to level {n + t_max} needs {size} nodes, cap is {max_nodes}")
    down = np.zeros(size, dtype=complex)
    up = np.zeros(size, dtype=complex)
    nd = np.zeros(size, dtype=complex)
    nu = np.zeros(size, dtype=complex)
    v0 = leftmost(n)
    # arriving at v0 from its child: the pair (child, v0) is up[child]
    up[children(v0)[0 if child == "left" else 1]] = 1.0
    roots = np.zeros(t_max + 1, dtype=complex)
    norms = np.zeros(t_max + 1)
    lp = (1 << (n + 2)) - 1
    roots[0] = up[1] + up[2]
    norms[0] = np.sqrt(np.sum(np.abs(down[:lp]) ** 2) + np.sum(np.abs(up[:lp]) ** 2))
    c_back, c_on = 1 / SQRT3, A / SQRT3
    for t in range(1, t_max + 1):
        lo = min(size, (1 << (n + t + 2)) - 1)  # extent after this step
        nd[:lo] = 0
        nu[:lo] = 0
        # (parent(v), v) -> (v, parent(v)) 1/sqrt3 and (v, child) a/sqrt3 each
        nu[1:lp] += down[1:lp] * c_back
        nd[1:lo:2] += down[: (lo - 1) // 2] * c_on
        nd[2:lo:2] += down[: (lo - 1) // 2] * c_on
        # (v, root) -> (root, v) with coefficient 1
        nd[1] += up[1]
        nd[2] += up[2]
        # (v, p), p internal -> (p, parent(p)) a, (p, v) 1, (p, sibling) a
        left, right = up[3:lp:2], up[4:lp:2]
        nu[1 : (lp - 1) // 2] += (left + right) * c_on
        nd[3:lp] += up[3:lp] * c_back
        nd[3:lp:2] += right * c_on
        nd[4:lp:2] += left * c_on
        down, nd = nd, down
        up, nu = nu, up
        lp = lo
        roots[t] = up[1] + up[2]
        norms[t] = np.sqrt(np.sum(np.abs(down[:lp]) ** 2) + np.sum(np.abs(up[:lp]) ** 2))
    return roots, norms


@dataclass
class ProjectedState:
    """Lumped amplitudes on ``(level, direction)``, stored per node.

    ``toward[l]`` collects every tree pair that arrived at level ``l`` from
    level ``l+1``; ``away[l]`` those that arrived from level ``l-1``.  An
    arrival at the root is always stored as ``toward[0]``.

    The arrays hold the lumped amplitude divided by ``2**(l/2)`` and then by
    the constant ``2**(-n0/2)`` of the starting level.  A lumped amplitude
    spread over ``2**l`` nodes grows like ``2**(l/2)``, so this rescaling is
    what keeps long runs finite; every rescaled weight has modulus at most 1.
    """

    toward: np.ndarray
    away: np.ndarray
    offset: int = 0

    # rescaled weights: a move away divides by sqrt2, a move toward multiplies
    _AWAY_BACK = W_AWAY_BACK * 2 ** 0.5
    _AWAY_ON = W_AWAY_ON / 2 ** 0.5
    _TOWARD_TURN = W_TOWARD_TURN / 2 ** 0.5
    _TOWARD_ON = W_TOWARD_ON * 2 ** 0.5
    _ROOT = W_ROOT / 2 ** 0.5

    @classmethod
    def start(cls, n, size, direction=TOWARD):
        s = cls(np.zeros(size, dtype=complex), np.zeros(size, dtype=complex), n)
        if direction == TOWARD:
            s.toward[n] = 1.0
        else:
            if n == 0:
                raise ParameterError("no away-from-root component exists at the root")
            s.away[n] = 1.0
        return s

    def lumped(self, lvl, values):
        """Undo the per-node scaling for entries at level ``lvl``."""
        return values * 2.0 ** ((lvl - self.offset) / 2)

    def root(self):
        return complex(self.lumped(0, self.toward[0]))

    def as_dict(self):
        out = {}
        for lvl in np.flatnonzero(self.toward):
            out[(int(lvl), TOWARD)] = complex(self.lumped(lvl, self.toward[lvl]))
        for lvl in np.flatnonzero(self.away):
            out[(int(lvl), AWAY)] = complex(self.lumped(lvl, self.away[lvl]))
        return out

    def step(self, absorb_root=False):
        tw, aw = self.toward, self.away
        ntw = np.zeros_like(tw)
        naw = np.zeros_like(aw)
        ntw[:-1] += tw[1:] * self._TOWARD_ON
        ntw[:-1] += aw[1:] * self._AWAY_BACK
        naw[2:] += tw[1:-1] * self._TOWARD_TURN
        naw[2:] += aw[1:-1] * self._AWAY_ON
        if not absorb_root:
            naw[1] += tw[0] * self._ROOT
        return ProjectedState(ntw, naw, self.offset)


def projected_evolution(n, t_max, direction=TOWARD, absorb_root=False):
    """Amplitude arriving at the root after each of ``t = 0..t_max`` steps.

    ``absorb_root`` removes the root arrivals after recording them, which
    turns the output into first-passage amplitudes.  Levels deeper than the
    number of remaining steps are cleared as the run proceeds.
    """
    if n < 0 or t_max < 0:
        raise ParameterError("n and t_max must be non-negative")
    size = n + t_max + 3
    state = ProjectedState.start(n, size, direction)
    out = np.zeros(t_max + 1, dtype=complex)
    out[0] = state.toward[0]
    if absorb_root and n == 0:
        state.toward[0] = 0
    for t in range(1, t_max + 1):
        state = state.step(absorb_root)
        out[t] = state.toward[0]
        if absorb_root:
            state.toward[0] = 0
        horizon = t_max - t
        state.toward[horizon + 1 :] = 0
        state.away[horizon + 1 :] = 0
    # undo the starting-level scale once, after the run
    return out * 2.0 ** (-n / 2)


def simulate_projected(n, t_max):
    """Root amplitudes ``H_n(t)`` from the lumped line walk (``n = 0`` gives ``G``)."""
    return projected_evolution(n, t_max, TOWARD)


def first_passage_projected(n, t_max):
    """First-arrival amplitudes ``h_n(t)`` at the root, from level ``n``."""
    if n < 1:
        raise ParameterError("first passage needs n >= 1")
    return projected_evolution(n, t_max, TOWARD, absorb_root=True)


def simple_loops_projected(t_max):
    """Simple root-to-root loop amplitudes ``g(t)`` by absorbing simulation."""
    if t_max < 1:
        return np.zeros(t_max + 1, dtype=complex)
    # leave the root (weight 1) and absorb on the first return
    out = np.zeros(t_max + 1, dtype=complex)
    out[1:] = projected_evolution(1, t_max - 1, AWAY, absorb_root=True) * W_ROOT
    return out


def loop_amplitude_bruteforce(t):
    """Sum of weights over all projected simple loops of ``t`` steps.

    Paths are enumerated one level move at a time; the weight of each move is
    looked up from the direction of the previous move.  ``g(0) = 0`` and odd
    lengths give zero.
    """
    if t < 0:
        raise ParameterError("t must be non-negative")
    if t == 0 or t % 2:
        return 0j

    total = 0j
    # after the forced first step the walker is at level 1 moving away
    stack = [(1, AWAY, 1, complex(W_ROOT))]
    while stack:
        lvl, direction, steps, w = stack.pop()
        remaining = t - steps
        if lvl > remaining:
            continue
        if remaining == 0:
            continue
        # move toward the root
        w_in = W_AWAY_BACK if direction == AWAY else W_TOWARD_ON
        if lvl - 1 == 0:
            if remaining == 1:
                total += w * w_in
        else:
            stack.append((lvl - 1, TOWARD, steps + 1, w * w_in))
        # move away from the root
        w_out = W_AWAY_ON if direction == AWAY else W_TOWARD_TURN
        stack.append((lvl + 1, AWAY, steps + 1, w * w_out))
    return total
