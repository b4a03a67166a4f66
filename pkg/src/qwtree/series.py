"""Truncated power series and the generating functions of the tree walk.

Coefficients live in a numpy array.  In double precision the array is
``complex128``; passing ``dps`` (decimal digits) to the generating-function
constructors switches to an object array of :class:`mpmath.mpc` values, which
the same arithmetic handles through numpy's object-dtype paths.

The walk constant ``a = exp(2*pi*i/3)`` is built from its exact Cartesian
form ``(-1/2, sqrt(3)/2)`` rather than from a complex exponential.
"""

from __future__ import annotations

from contextlib import nullcontext
from fractions import Fraction
from math import comb

import mpmath
import numpy as np

from .errors import BranchError, ParameterError, SingularSeriesError

__all__ = [
    "PowerSeries",
    "series_mul",
    "series_sqrt",
    "series_inv",
    "FORMS",
    "walk_constants",
    "g_hat",
    "h1_hat",
    "G_hat",
    "H_hat",
    "H_hat_displayed",
    "amplitude_sequence",
    "narayana",
    "g_combinatorial",
]


def walk_constants(dps=None):
    """Return ``(a, sqrt3)`` in double precision or at ``dps`` digits."""
    if dps is None:
        s3 = 3.0 ** 0.5
        return complex(-0.5, s3 / 2), s3
    with mpmath.workdps(dps):
        s3 = mpmath.sqrt(3)
        return mpmath.mpc(mpmath.mpf(-1) / 2, s3 / 2), s3


def _zeros(n, like):
    if like.dtype == object:
        z = np.empty(n, dtype=object)
        z[:] = [mpmath.mpc(0)] * n
        return z
    return np.zeros(n, dtype=complex)


class PowerSeries:
    """Power series ``sum_t coeffs[t] z**t`` known up to ``z**order``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs)
        if c.dtype != object:
            c = c.astype(complex)
        if c.ndim != 1 or c.size == 0:
            raise ParameterError("coefficients must be a non-empty 1-d sequence")
        self.coeffs = c

    @classmethod
    def zero(cls, order, dps=None):
        if dps is None:
            return cls(np.zeros(order + 1, dtype=complex))
        c = np.empty(order + 1, dtype=object)
        c[:] = [mpmath.mpc(0)] * (order + 1)
        return cls(c)

    @classmethod
    def one(cls, order, dps=None):
        s = cls.zero(order, dps)
        s.coeffs[0] = s.coeffs[0] + 1
        return s

    @classmethod
    def monomial(cls, k, coef, order, dps=None):
        s = cls.zero(order, dps)
        if k <= order:
            s.coeffs[k] = s.coeffs[k] + coef
        return s

    @property
    def order(self):
        return self.coeffs.size - 1

    @property
    def is_mp(self):
        return self.coeffs.dtype == object

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, t):
        return self.coeffs[t]

    def __repr__(self):
        head = ", ".join(f"{complex(c):.6g}" for c in self.coeffs[:6])
        more = ", ..." if self.coeffs.size > 6 else ""
        return f"PowerSeries([{head}{more}], order={self.order})"

    def truncate(self, order):
        if order > self.order:
            raise ParameterError(f"cannot extend a series of order {self.order} to {order}")
        return PowerSeries(self.coeffs[: order + 1].copy())

    def _align(self, other):
        if isinstance(other, PowerSeries):
            m = min(self.order, other.order)
            return self.coeffs[: m + 1], other.coeffs[: m + 1]
        return None

    def __add__(self, other):
        pair = self._align(other)
        if pair is None:
            c = self.coeffs.copy()
            c[0] = c[0] + other
            return PowerSeries(c)
        return PowerSeries(pair[0] + pair[1])

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return series_mul(self, other)
        return PowerSeries(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return series_mul(self, series_inv(other))
        return PowerSeries(self.coeffs / other)

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ParameterError("series powers must be non-negative integers")
        result = PowerSeries(_zeros(self.coeffs.size, self.coeffs))
        result.coeffs[0] = result.coeffs[0] + 1
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift_down(self, k=1):
        """Divide by ``z**k``; the first ``k`` coefficients must vanish."""
        head = self.coeffs[:k]
        if any(abs(complex(c)) != 0 for c in head):
            raise ParameterError(f"series is not divisible by z**{k}")
        return PowerSeries(self.coeffs[k:].copy())

    def shift_up(self, k=1):
        """Multiply by ``z**k`` keeping the same truncation order."""
        c = _zeros(self.coeffs.size, self.coeffs)
        if k < c.size:
            c[k:] = self.coeffs[: c.size - k]
        return PowerSeries(c)

    def substitute_power(self, k, order=None):
        """Return ``f(z**k)`` truncated to ``order`` (default ``k*self.order``)."""
        order = k * self.order if order is None else order
        c = _zeros(order + 1, self.coeffs)
        src = self.coeffs[: order // k + 1]
        c[: k * (src.size - 1) + 1 : k] = src
        return PowerSeries(c)

    def to_complex(self):
        """Coefficients as a ``complex128`` array (rounding mp values)."""
        if self.is_mp:
            return np.array([complex(c) for c in self.coeffs])
        return self.coeffs.copy()


def series_mul(a, b):
    """Cauchy product truncated to the smaller of the two orders."""
    m = min(a.order, b.order)
    x, y = a.coeffs[: m + 1], b.coeffs[: m + 1]
    if x.dtype == object or y.dtype == object:
        out = _zeros(m + 1, x if x.dtype == object else y)
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            out[i:] += xi * y[: m + 1 - i]
        return PowerSeries(out)
    return PowerSeries(np.convolve(x, y)[: m + 1])


def series_sqrt(a):
    """Principal square root of a series whose constant term is 1."""
    c = a.coeffs
    if abs(complex(c[0]) - 1) > 1e-14:
        raise BranchError(f"series_sqrt needs constant term 1, got {complex(c[0])!r}")
    s = _zeros(c.size, c)
    s[0] = c[0] / c[0]
    for k in range(1, c.size):
        # s_k = (c_k - sum_{j=1}^{k-1} s_j s_{k-j}) / 2
        acc = np.dot(s[1:k], s[k - 1 : 0 : -1]) if k > 1 else 0
        s[k] = (c[k] - acc) / 2
    return PowerSeries(s)


def series_inv(a):
    """Reciprocal series ``r`` with ``a * r = 1`` up to the order of ``a``."""
    c = a.coeffs
    c0 = c[0]
    if c0 == 0:
        raise SingularSeriesError("cannot invert a series with zero constant term")
    r = _zeros(c.size, c)
    r[0] = 1 / c0
    for k in range(1, c.size):
        r[k] = -np.dot(c[1 : k + 1], r[k - 1 :: -1]) / c0
    return PowerSeries(r)


def _radicand(T, dps):
    # 1 - (2/3) (az)^2 + (az)^4, written in w = z^2
    a, _ = walk_constants(dps)
    a2 = a * a
    order_w = T // 2
    p = PowerSeries.zero(order_w, dps)
    p.coeffs[0] = p.coeffs[0] + 1
    if order_w >= 1:
        p.coeffs[1] = p.coeffs[1] - 2 * a2 / 3
    if order_w >= 2:
        p.coeffs[2] = p.coeffs[2] + a2 * a2
    return p


FORMS = ("walk", "flipped")


def _check_form(form):
    if form not in FORMS:
        raise ParameterError(f"unknown generating-function form {form!r}; choose from {FORMS}")


def g_hat(T, dps=None, form="walk"):
    """Generating function of simple root-to-root loops, to order ``z**T``.

    ``form="walk"`` (default) is the closed form whose coefficients are the
    loop amplitudes of the tree walk::

        ghat(z) = sqrt(3)/(2 a^2) * [(az)^2 - 1 + sqrt(1 - 2/3 (az)^2 + (az)^4)]

    ``form="flipped"`` is the variant with the bracket
    ``1 + (az)^2/3 - sqrt(...)``.  It shares the ``z**2`` coefficient but
    flips the sign of every coefficient from ``z**4`` on, so it does not
    describe the walk; it is kept to regenerate numbers quoted from it.

    Both are evaluated in ``w = z**2`` and spread back onto even powers.
    """
    _check_form(form)
    if T < 2:
        raise ParameterError("g_hat needs T >= 2")
    ctx = mpmath.workdps(dps) if dps else nullcontext()
    with ctx:
        a, s3 = walk_constants(dps)
        a2 = a * a
        root = series_sqrt(_radicand(T, dps))
        if form == "walk":
            inner = root - 1
            inner.coeffs[1] = inner.coeffs[1] + a2
        else:
            inner = 1 - root
            inner.coeffs[1] = inner.coeffs[1] + a2 / 3
        g_w = inner * (s3 / (2 * a2))
        g_w.coeffs[0] = g_w.coeffs[0] * 0
        return g_w.substitute_power(2, T)


def h1_hat(T, dps=None, g=None, form="walk"):
    """First-passage generating function for dropping one level.

    ``h1(z) = (a sqrt(3)/2) z - (a/2) ghat(z)/z``.
    """
    if T < 1:
        raise ParameterError("h1_hat needs T >= 1")
    ctx = mpmath.workdps(dps) if dps else nullcontext()
    with ctx:
        a, s3 = walk_constants(dps)
        g = g_hat(max(T + 1, 2), dps, form) if g is None else g
        h = g.truncate(T + 1).shift_down(1) * (-a / 2)
        h.coeffs[1] = h.coeffs[1] + a * s3 / 2
        return h


def G_hat(T, dps=None, g=None, form="walk"):
    """Root-to-root multi-loop generating function ``1/(1 - ghat)``."""
    ctx = mpmath.workdps(dps) if dps else nullcontext()
    with ctx:
        g = g_hat(max(T, 2), dps, form) if g is None else g
        return series_inv(1 - g.truncate(T) if T >= 2 else 1 - g).truncate(T)


def H_hat(n, T, dps=None, form="walk"):
    """Generating function of the root amplitude from level ``n``.

    Evaluated as ``h1_hat**n / (1 - ghat)`` with the power taken by repeated
    squaring.  ``n = 0`` gives the multi-loop series ``G``.
    """
    if n < 0:
        raise ParameterError("n must be non-negative")
    if T < n:
        raise ParameterError(f"truncation order {T} is below the first arrival time {n}")
    ctx = mpmath.workdps(dps) if dps else nullcontext()
    with ctx:
        g = g_hat(max(T + 1, 2), dps, form)
        G = G_hat(T, dps, g=g.truncate(max(T, 2)))
        if n == 0:
            return G
        return (h1_hat(T, dps, g=g) ** n) * G


def H_hat_displayed(n, T, dps=None, form="walk"):
    """Same series as :func:`H_hat`, built from ``[-a/2]^n [(ghat - sqrt3 z^2)/z]^n``."""
    if T < n:
        raise ParameterError(f"truncation order {T} is below the first arrival time {n}")
    ctx = mpmath.workdps(dps) if dps else nullcontext()
    with ctx:
        a, s3 = walk_constants(dps)
        g = g_hat(max(T + 1, 2), dps, form)
        core = g.truncate(T + 1)
        core.coeffs[2] = core.coeffs[2] - s3
        core = core.shift_down(1)
        G = G_hat(T, dps, g=g.truncate(max(T, 2)))
        return (core ** n) * ((-a / 2) ** n) * G


def amplitude_sequence(n, T, dps=None, form="walk"):
    """Root amplitudes ``H_n(t)`` for ``t = 0..T`` as a ``complex128`` array.

    With ``dps`` set, the series is carried at that many decimal digits and
    rounded to double only at the end.
    """
    return H_hat(n, T, dps, form).to_complex()


def narayana(m, k):
    """Narayana number ``N(m, k) = C(m, k) C(m, k-1) / m`` as an exact int."""
    if m < 1 or not 1 <= k <= m:
        raise ParameterError(f"narayana needs 1 <= k <= m, got m={m}, k={k}")
    num = comb(m, k) * comb(m, k - 1)
    q, r = divmod(num, m)
    assert r == 0
    return q


def g_combinatorial(t):
    """Simple-loop amplitude from the peak-count sum over Narayana numbers.

    Defined for even ``t >= 4``; ``t = 2`` and other values are handled by
    returning the direct loop weight (``1/sqrt(3)``) or zero.
    """
    a, s3 = walk_constants()
    if t == 2:
        return complex(1 / s3)
    if t < 4 or t % 2:
        return 0j
    m = (t - 2) // 2
    # integer part: sum_k (-1/2)^(k-1) N(m, k), kept exact
    total = sum(Fraction(-1, 2) ** (k - 1) * narayana(m, k) for k in range(1, m + 1))
    scale = (2 * a * a) ** (t // 2 - 1) / s3 ** (t - 1)
    return complex(scale * float(total))

