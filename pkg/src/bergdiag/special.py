"""Log-domain coefficients of the derivative series.

Two positive sequences appear everywhere in this package::

    c_n = 2**n / (2n+1)!
    w_n = 2**(2n) (n!)**2 / (2n+1)! = Gamma(1+n) Gamma(3/2) / Gamma(n+3/2)

``c_n`` multiplies ``x**(2n+1) |f^(n)(x)|**2`` and ``w_n`` is the n-th
monomial moment of the disk weight ``(1-|u|**2)**(-1/2) dA/(2 pi)``.
``(2n+1)!`` overflows a double near n = 85, so tables are kept as logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

LOG2 = math.log(2.0)
SQRT_PI = math.sqrt(math.pi)
GAMMA_3_2 = 0.5 * SQRT_PI


def _log_gamma_ratio_half(m):
    """``log Gamma(m+1/2) - log Gamma(m)`` for m >= 24 (asymptotic series)."""
    inv = 1.0 / m
    inv2 = inv * inv
    return 0.5 * np.log(m) - inv * (
        0.125 - inv2 * (1.0 / 192 - inv2 * (1.0 / 640 - inv2 * 17.0 / 14336))
    )


_ASYMPTOTIC_FROM = 24


def log_weight_w(n):
    """``log w_n``; accepts scalars or integer arrays.

    Small n use log-Gamma directly. From n = 24 on the difference of two large
    log-Gamma values would lose digits, so the ratio's asymptotic series is
    used instead (absolute error below 1e-15 there).
    """
    n = np.asarray(n, dtype=float)
    small = gammaln(1.0 + n) + math.lgamma(1.5) - gammaln(n + 1.5)
    m = np.maximum(n + 1.0, _ASYMPTOTIC_FROM)
    large = math.lgamma(1.5) - _log_gamma_ratio_half(m)
    return np.where(n < _ASYMPTOTIC_FROM, small, large)


def weight_w(n: int) -> float:
    """Return ``w_n = Gamma(1+n) Gamma(3/2) / Gamma(n+3/2)``.

    >>> weight_w(0), round(weight_w(1), 15)
    (1.0, 0.666666666666667)
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1.0
    return float(np.exp(log_weight_w(n)))


def gamma_half_integer(n: int) -> float:
    """``Gamma(n + 1/2) = (2n)! / (4**n n!) * sqrt(pi)`` via exact integers.

    The rational factor is formed with Python integers and divided once, so it
    is correctly rounded. Overflows (``OverflowError``) for n > 171.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    ratio = math.factorial(2 * n) / (4**n * math.factorial(n))
    return ratio * SQRT_PI


def asymptotic_ratio(n: int) -> float:
    """``w_n * sqrt(n+1)``; decreases from 1 towards ``Gamma(3/2) = sqrt(pi)/2``."""
    return weight_w(n) * math.sqrt(n + 1.0)


@dataclass(frozen=True)
class CoefficientTable:
    """Tables of ``log c_n`` and ``log w_n`` for ``0 <= n <= n_max``.

    Both are built from their ratio recurrences in extended precision, so
    ``c_n 2**n (n!)**2 = w_n`` holds to the rounding of the stored logs.
    """

    n_max: int
    log_c: np.ndarray = field(init=False, repr=False)
    log_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")
        # extended precision keeps the running sum accurate to ~1e-15 at n = 1e5
        k = np.arange(self.n_max, dtype=np.longdouble)
        steps = -np.log1p(np.longdouble(0.5) / (k + 1))
        log_w = np.concatenate(([0.0], np.cumsum(steps).astype(float)))
        # c_{n+1}/c_n = 2/((2n+2)(2n+3)), summed before rounding to double
        c_steps = np.log(np.longdouble(2.0) / ((2 * k + 2) * (2 * k + 3)))
        log_c = np.concatenate(([0.0], np.cumsum(c_steps).astype(float)))
        log_w.setflags(write=False)
        log_c.setflags(write=False)
        object.__setattr__(self, "log_w", log_w)
        object.__setattr__(self, "log_c", log_c)

    @property
    def w(self) -> np.ndarray:
        return np.exp(self.log_w)

    @property
    def c(self) -> np.ndarray:
        """``c_n``; underflows to 0 for large n, use ``log_c`` there."""
        return np.exp(self.log_c)


_TABLE_CACHE: dict[int, CoefficientTable] = {}


def coefficient_table(n_max: int) -> CoefficientTable:
    """Shared table covering at least ``n_max`` (grown by powers of two)."""
    size = 64
    while size < n_max:
        size *= 2
    table = _TABLE_CACHE.get(size)
    if table is None:
        table = _TABLE_CACHE[size] = CoefficientTable(size)
    return table


def weights_upto(n_max: int) -> np.ndarray:
    """Array ``w_0 .. w_{n_max}``."""
    return coefficient_table(n_max).w[: n_max + 1]
