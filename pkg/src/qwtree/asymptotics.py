"""Large-time asymptotics of the root amplitude by steepest descent.

After ``xi = z**2`` and the substitution ``g(xi)/xi = Omega(omega)``,
``xi = phi(omega)``, the inversion integral for ``H_n(t)`` has the exponent
``-k ln phi(omega)`` with ``k = (t - n)/2``.  ``(ln phi)'`` vanishes at the
two saddles ``omega_s = (1 +- i sqrt2)/sqrt3``, where ``|phi| = 1``.  Each
saddle gives a term ``~ (sqrt2)^n (a_s + d_s n) e^{-i lambda_s k} / k^{3/2}``.

Two generating functions are supported (see :mod:`qwtree.series`):

``"flipped"``
    ``Omega(omega) = omega``.  The two saddle terms are the whole leading
    behavior and ``|H_n|^2`` decays like ``tau^-3``.
``"walk"``
    ``Omega(omega) = 2/sqrt3 - omega``, the generating function of the
    unitary walk itself.  Here ``1 - g`` has a simple zero ``xi_p`` on the
    unit circle: a bound state at the root.  Its residue is a non-decaying
    term that is added to the saddle terms.

The leading saddle term is accurate only once ``k`` is large compared with
``n**2``; for ``n = 10`` the oscillation-averaged probability is within 5% at
``tau = 500``, for ``n = 50`` it needs ``tau`` of order ``10**4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .series import _check_form

__all__ = [
    "SaddleData",
    "BoundState",
    "phi_map",
    "log_phi_prime",
    "log_phi_second",
    "saddle_constants",
    "bound_state",
    "saddle_amplitude",
    "asymptotic_amplitude",
    "asymptotic_probability",
    "CALIBRATION_SIGN",
]

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
A = complex(-0.5, SQRT3 / 2)

_POLES = (-1 / SQRT3, 2 / SQRT3)
_ZERO = 1 / SQRT3

# Global sign of the saddle sum, fixed by matching the series coefficients
# for n = 10, tau in [100, 300] (both generating functions give -1).
CALIBRATION_SIGN = -1.0

# (P, P', Omega, Omega') per generating function, with P = Omega - sqrt3
_FORM_MAPS = {
    "flipped": (lambda w: w - SQRT3, 1.0, lambda w: w, 1.0),
    "walk": (lambda w: -w - 1 / SQRT3, -1.0, lambda w: 2 / SQRT3 - w, -1.0),
}


def phi_map(omega):
    """``a sqrt3 (omega - 1/sqrt3) / ((omega + 1/sqrt3)(omega - 2/sqrt3))``."""
    omega = complex(omega)
    for p in _POLES:
        if abs(omega - p) < 1e-15:
            raise DomainError(f"phi has a pole at omega = {p:.15g}")
    return A * SQRT3 * (omega - _ZERO) / ((omega - _POLES[0]) * (omega - _POLES[1]))


def log_phi_prime(omega):
    omega = complex(omega)
    return 1 / (omega - _ZERO) - 1 / (omega - _POLES[0]) - 1 / (omega - _POLES[1])


def log_phi_second(omega):
    omega = complex(omega)
    return -1 / (omega - _ZERO) ** 2 + 1 / (omega - _POLES[0]) ** 2 + 1 / (omega - _POLES[1]) ** 2


@dataclass(frozen=True)
class SaddleData:
    """Constants of the two-saddle asymptotic for one generating function.

    ``eta_s`` is the phase of ``P(omega_s) = sqrt2 * (-1) * e^{i eta_s}``; for
    the flipped form ``eta = (-gamma, +gamma)``.
    """

    form: str
    omega_s: tuple
    phi_s: tuple
    lambda_s: tuple
    gamma: float
    eta_s: tuple
    b_s: tuple
    a_s: tuple
    d_s: tuple

    def c(self, n):
        """``(c_1n, c_2n)`` with ``c_sn = a_s + d_s n``."""
        return tuple(a + d * n for a, d in zip(self.a_s, self.d_s))


@lru_cache(maxsize=None)
def saddle_constants(form="walk"):
    """Saddle locations, phases and the order-one constants ``a_s``, ``d_s``."""
    _check_form(form)
    P, dP, Om, dOm = _FORM_MAPS[form]
    r2 = SQRT2
    omegas = ((1 + 1j * r2) / SQRT3, (1 - 1j * r2) / SQRT3)
    phis = tuple(phi_map(w) for w in omegas)
    lambdas = (
        math.atan((9 * SQRT3 + 8 * r2) / 23),
        math.atan((9 * SQRT3 - 8 * r2) / 23) - math.pi,
    )
    gamma = math.atan(1 / r2)
    b, a_s, d_s, eta = [], [], [], []
    root_pi = math.sqrt(math.pi)
    for w, ph in zip(omegas, phis):
        bs = np.sqrt(2 / log_phi_second(w))
        D = 1 - Om(w) * ph
        b.append(complex(bs))
        a_s.append(complex(dOm * bs * ph * root_pi / D ** 2))
        d_s.append(complex(dP * bs * root_pi / (D * P(w))))
        eta.append(float(np.angle(-P(w) / r2)))
    return SaddleData(form, omegas, phis, lambdas, gamma, tuple(eta), tuple(b), tuple(a_s), tuple(d_s))


@dataclass(frozen=True)
class BoundState:
    """Simple zero ``xi_p`` of ``1 - g(xi)`` with ``|xi_p| <= 1``.

    Its contribution to ``H_n(t)`` is ``level**n * xi_p**-(k+1) / g'(xi_p)``.
    """

    xi: complex
    level: complex
    g_prime: complex

    def amplitude(self, n, k):
        return self.level ** n * self.xi ** (-(k + 1)) / self.g_prime


def _radical(u):
    return np.sqrt(1 - 2 * u / 3 + u * u)


@lru_cache(maxsize=None)
def bound_state(form="walk"):
    """The zero of ``1 - g`` in the closed unit disk, or ``None``.

    ``g`` is algebraic in ``u = a^2 xi``, so the candidates come from a
    polynomial equation; each is kept only if it lies in the disk and
    solves ``g = 1`` on the principal square-root branch.
    """
    _check_form(form)
    a2 = A * A
    if form == "walk":
        # sqrt3/(2a^2) (u - 1 + R) = 1  =>  R = c - u
        c = 1 + 2 * a2 / SQRT3
        cands = [(c * c - 1) / (2 * c - 2 / 3)]

        def g_of(u):
            return SQRT3 / (2 * a2) * (u - 1 + _radical(u))

        def dg_du(u):
            return SQRT3 / (2 * a2) * (1 + (u - 1 / 3) / _radical(u))
    else:
        # sqrt3/(2a^2) (1 + u/3 - R) = 1  =>  R = c + u/3
        c = 1 - 2 * a2 / SQRT3
        cands = list(np.roots([8 / 9, -(2 / 3) * (1 + c), 1 - c * c]))

        def g_of(u):
            return SQRT3 / (2 * a2) * (1 + u / 3 - _radical(u))

        def dg_du(u):
            return SQRT3 / (2 * a2) * (1 / 3 - (u - 1 / 3) / _radical(u))

    for u in cands:
        u = complex(u)
        if abs(u) > 1 + 1e-12 or abs(1 - g_of(u)) > 1e-10:
            continue
        xi = u / a2
        omega = g_of(u) / xi
        level = -(A / 2) * (omega - SQRT3)
        return BoundState(xi, complex(level), complex(dg_du(u) * a2))
    return None


def _tau_check(n, t):
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    tau = t - n
    if tau <= 0:
        raise DomainError(f"asymptotics need tau = t - n > 0, got tau = {tau}")
    return tau


def _prefactor(n):
    # (-a)^n / (2 pi i) * 2^-n * (sqrt2)^n * (-1)^n  =  a^n 2^{-n/2} / (2 pi i)
    return A ** n * 2.0 ** (-n / 2) / (2j * math.pi)


def _phases(sd, n, k):
    """Phase of the second saddle term and the relative phase of the first."""
    theta2 = sd.eta_s[1] * n - sd.lambda_s[1] * k
    delta = (sd.eta_s[0] - sd.eta_s[1]) * n - (sd.lambda_s[0] - sd.lambda_s[1]) * k
    return theta2, delta


def saddle_amplitude(n, t, form="walk"):
    """The two-saddle term only."""
    tau = _tau_check(n, t)
    sd = saddle_constants(form)
    k = tau / 2
    c1, c2 = sd.c(n)
    theta2, delta = _phases(sd, n, k)
    # factor out the second term's phase so that |amplitude|^2 and the
    # expanded probability see the same relative phase
    bracket = np.exp(1j * theta2) * (c1 * np.exp(1j * delta) - c2)
    return complex(CALIBRATION_SIGN * _prefactor(n) * bracket / k ** 1.5)


def asymptotic_amplitude(n, t, form="walk"):
    """Leading large-``tau`` approximation of ``H_n(t)``, ``tau = t - n``.

    Odd ``tau`` is evaluated by the same formula although the exact
    amplitude vanishes there.
    """
    amp = saddle_amplitude(n, t, form)
    bs = bound_state(form)
    if bs is not None:
        amp += bs.amplitude(n, (t - n) / 2)
    return amp


def asymptotic_probability(n, t, form="walk"):
    """``|H_n(t)|^2`` from the expanded two-saddle formula.

    ``[C^2 - 2 Re{c_1 c_2^* e^{i[(eta_1 - eta_2) n - (lambda_1 - lambda_2) k]}}]
    / (4 pi^2 2^n k^3)`` with ``C^2 = |c_1|^2 + |c_2|^2``.  For the walk form
    the bound-state modulus and its interference with the saddle terms are
    added.
    """
    tau = _tau_check(n, t)
    sd = saddle_constants(form)
    k = tau / 2
    c1, c2 = sd.c(n)
    C2 = abs(c1) ** 2 + abs(c2) ** 2
    _, delta = _phases(sd, n, k)
    cross = (c1 * np.conj(c2) * np.exp(1j * delta)).real
    prob = (C2 - 2 * cross) / (4 * math.pi ** 2 * 2.0 ** n * k ** 3)
    bs = bound_state(form)
    if bs is not None:
        B = bs.amplitude(n, k)
        prob += abs(B) ** 2 + 2 * (np.conj(B) * saddle_amplitude(n, t, form)).real
    return float(prob)
