"""Classical benchmark: the lumped random walk on tree levels.

Level 0 (the root) always steps to level 1; any other level moves away from
the root with probability ``p`` and toward it with ``q = 1 - p``.  For the
symmetric walk on the binary tree ``p = 2/3``.

``p_t(n, 0)``, the probability to sit at the root at time ``t`` having
started on level ``n``, is computed two ways: by forward propagation
(:func:`chain_dp`, exact up to rounding) and by the spectral integral over
the orthogonality density of the chain (:func:`hit_probability`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericPrecisionError, ParameterError

__all__ = [
    "ChainParams",
    "TREE",
    "rho_roots",
    "spectral_density",
    "hit_probability",
    "chain_dp",
    "classical_peak",
    "decay_rate",
]


@dataclass(frozen=True)
class ChainParams:
    p: float = 2.0 / 3.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie in (0, 1), got {self.p}")
        if self.p <= self.q:
            raise ParameterError(f"the walk must drift away from the root (p > q), got p={self.p}")

    @property
    def q(self):
        return 1.0 - self.p

    @property
    def edge(self):
        """Half-width ``2 sqrt(pq)`` of the spectral support."""
        return 2.0 * np.sqrt(self.p * self.q)


TREE = ChainParams(2.0 / 3.0)


def decay_rate(params=TREE):
    """Exponential tail rate ``2 sqrt(pq)`` of ``p_t(n, 0)``."""
    return params.edge


def rho_roots(lam, params=TREE):
    """Roots ``(lam +- sqrt(lam^2 - 4pq)) / 2p`` of the characteristic equation.

    The square root is taken with non-negative imaginary part inside the
    support, so ``rho_1 = sqrt(q/p) e^{i theta}`` with ``theta`` in ``[0, pi]``.
    """
    lam = np.asarray(lam, dtype=complex)
    disc = lam * lam - 4.0 * params.p * params.q
    r = np.sqrt(disc)
    # principal sqrt of a negative real has +i; keep that branch on the support
    r = np.where((disc.imag == 0) & (disc.real < 0), 1j * np.sqrt(np.abs(disc.real)), r)
    rho1 = (lam + r) / (2.0 * params.p)
    rho2 = (lam - r) / (2.0 * params.p)
    if rho1.ndim == 0:
        return complex(rho1), complex(rho2)
    return rho1, rho2


def spectral_density(x, params=TREE):
    """Density ``sqrt(4pq - x^2) / (2 pi q (1 - x^2))`` on ``|x| < 2 sqrt(pq)``."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < params.edge
    xs = np.where(inside, x, 0.0)
    val = np.sqrt(np.maximum(4 * params.p * params.q - xs * xs, 0.0)) / (
        2 * np.pi * params.q * (1 - xs * xs)
    )
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _gauss_legendre(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def _theta_integral(n, t, params, m):
    """Gauss-Legendre rule with ``m`` nodes for the hitting integral.

    On the support put ``lam = 2 sqrt(pq) cos(theta)``.  The endpoint square
    roots then become ``sin(theta)``, the integrand is smooth on
    ``[0, pi]``, and ``lam**t`` is written as ``(2 sqrt(pq))**t cos(theta)**t``
    with the scale factor returned separately in log form.
    """
    xg, wg = _gauss_legendre(m)
    theta = 0.5 * np.pi * (xg + 1.0)
    w = 0.5 * np.pi * wg
    c = np.cos(theta)
    lam = params.edge * c
    r = np.sqrt(params.q / params.p)
    rho1 = r * np.exp(1j * theta)
    rho2 = r * np.exp(-1j * theta)
    bracket = rho2 ** n / (rho2 - lam) - rho1 ** n / (rho1 - lam)
    # d lam = -edge sin(theta) d theta, and the lam limits run theta from pi to 0
    jac = params.edge * np.sin(theta)
    vals = c ** t * bracket * jac / (2j * np.pi)
    return np.sum(w * vals)


def hit_probability(n, t, params=TREE, rtol=1e-13, max_nodes=1 << 16, return_info=False):
    """``p_t(n, 0)`` from the spectral integral.

    The rule doubles its node count until two successive estimates agree to
    ``rtol`` (relative to the larger of the estimate and the absolute scale of
    the integrand, so that exact zeros terminate).  The imaginary part of the
    complex integral must vanish to ``1e-12`` relative to that scale.

    For large ``n`` the integral is a small difference of ``O(2^{-n/2})``
    oscillating terms; prefer :func:`chain_dp` when ``n`` exceeds ~100.
    """
    if n < 0 or t < 0:
        raise ParameterError("n and t must be non-negative")
    if (t - n) % 2:
        return (0.0, {"nodes": 0, "imag": 0.0}) if return_info else 0.0
    m = 64 + 2 * int(np.sqrt(t + 1)) * 8
    scale = np.sqrt(params.q / params.p) ** n / abs(np.sqrt(params.q / params.p) - params.edge)
    prev = cur = _theta_integral(n, t, params, m)
    while True:
        m *= 2
        if m > max_nodes:
            raise NumericPrecisionError(
                f"hitting integral for n={n}, t={t} did not converge with {max_nodes} nodes "
                f"(last change {abs(cur - prev):.3e})"
            )
        cur = _theta_integral(n, t, params, m)
        if abs(cur - prev) <= rtol * max(abs(cur.real), 1e-300) or abs(cur - prev) < 1e-15 * scale:
            break
        prev = cur
    if abs(cur.imag) > 1e-12 * scale:
        raise NumericPrecisionError(f"hitting integral has imaginary residue {cur.imag:.3e}")
    value = cur.real * np.exp(t * np.log(params.edge)) if t else cur.real
    if return_info:
        return value, {"nodes": m, "imag": cur.imag}
    return value


def chain_dp(n, t_max, params=TREE, return_mass=False):
    """``p_t(n, 0)`` for ``t = 0..t_max`` by forward propagation.

    Levels ``0..n+t_max`` are kept, which is exact: mass cannot move further
    than one level per step.
    """
    if n < 0 or t_max < 0:
        raise ParameterError("n and t_max must be non-negative")
    size = n + t_max + 2
    x = np.zeros(size)
    x[n] = 1.0
    out = np.zeros(t_max + 1)
    mass = np.zeros(t_max + 1)
    out[0] = x[0]
    mass[0] = x.sum()
    p, q = params.p, params.q
    for t in range(1, t_max + 1):
        nx = np.zeros(size)
        nx[1] += x[0]
        nx[2:] += p * x[1:-1]
        nx[:-1] += q * x[1:]
        x = nx
        out[t] = x[0]
        mass[t] = x.sum()
    return (out, mass) if return_mass else out


def classical_peak(n, params=TREE, t_max=None):
    """``(t_star, p_star)``: time and value of the largest ``p_t(n, 0)``.

    Uses :func:`chain_dp`; the default horizon ``max(4n, n + 200)`` covers
    the peak, which sits near ``3n`` for the tree parameters.
    """
    if n < 0:
        raise ParameterError("n must be non-negative")
    t_max = max(4 * n, n + 200) if t_max is None else t_max
    probs = chain_dp(n, t_max, params)
    k = int(np.argmax(probs))
    return k, float(probs[k])
