"""Truncated power series (jets) and holomorphic test-function expressions.

A :class:`Jet` stores the monomial coefficients of ``f(center + scale*u)``::

    f(center + scale*u) = a_0 + a_1 u + ... + a_N u**N + O(u**(N+1))

so with ``scale = 1`` the coefficients are ``f^(n)(center)/n!``. A scale equal
to the radius of interest keeps the coefficients of order one at high N,
where the unscaled ones would over- or underflow.

Test functions are small immutable expression trees (:class:`FunctionExpr`)
that can be evaluated pointwise (vectorised over numpy arrays) or expanded
into a jet at any regular point. The textual form accepted by :func:`parse`
is prefix notation, e.g. ``pole 0.5+0.353553i 1`` or
``sum (poly 1 0 2) (exp 1)``; see ``docs/function-grammar.md``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import DivisionByZeroJet, InvalidFunctionSyntax, SingularityTooClose

SINGULARITY_TOL = 1e-12


@dataclass(frozen=True)
class Jet:
    """Coefficients of ``u -> f(center + scale*u)`` truncated at ``u**order``."""

    center: complex
    coeffs: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, n):
        return self.coeffs[n]

    @classmethod
    def constant(cls, value, center=0.0, order=0, scale=1.0) -> "Jet":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(center, c, scale)

    def _check(self, other: "Jet"):
        if other.center != self.center or other.scale != self.scale:
            raise ValueError("jets must share center and scale")
        return min(self.order, other.order)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.center, self.order, self.scale)

    def __add__(self, other):
        other = self._lift(other)
        n = self._check(other) + 1
        return Jet(self.center, self.coeffs[:n] + other.coeffs[:n], self.scale)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.center, -self.coeffs, self.scale)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.center, self.coeffs * complex(other), self.scale)
        n = self._check(other) + 1
        a = _trim(self.coeffs[:n])
        b = _trim(other.coeffs[:n])
        out = np.zeros(n, dtype=complex)
        prod = np.convolve(a, b)[:n]
        out[: prod.size] = prod
        return Jet(self.center, out, self.scale)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.center, self.coeffs / complex(other), self.scale)
        n = self._check(other) + 1
        den = _trim(other.coeffs[:n])
        if den[0] == 0:
            raise DivisionByZeroJet("denominator jet has zero constant term")
        # c * den = num, solved term by term; lfilter runs that recursion in C
        num = self.coeffs[:n]
        return Jet(self.center, lfilter([1.0], den, num), self.scale)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        k = int(k)
        if k < 0:
            return Jet.constant(1.0, self.center, self.order, self.scale) / self ** (-k)
        result = Jet.constant(1.0, self.center, self.order, self.scale)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, z):
        """Sum the truncated series at ``z`` (scalar or array)."""
        u = (np.asarray(z, dtype=complex) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def derivatives(self) -> np.ndarray:
        """Raw derivatives ``f^(n)(center)`` (may overflow for large orders)."""
        n = np.arange(self.coeffs.size)
        log_fact = np.array([math.lgamma(k + 1.0) for k in n])
        return self.coeffs * np.exp(log_fact - n * math.log(self.scale))

    def rescaled(self, scale: float) -> "Jet":
        """Same series expressed in ``u' = (z - center)/scale``."""
        ratio = scale / self.scale
        n = np.arange(self.coeffs.size)
        with np.errstate(under="ignore"):
            factors = np.exp(n * math.log(ratio))
        return Jet(self.center, self.coeffs * factors, scale)

    def recenter(self, new_center: complex, order: int | None = None) -> "Jet":
        """Re-expand the truncated series about ``new_center``.

        Only the truncated polynomial is shifted, so the result is exact for
        that polynomial; the top coefficients lose accuracy when the shift is
        not small compared with the scale.
        """
        tau = (complex(new_center) - self.center) / self.scale
        a = self.coeffs
        N = a.size - 1
        out_order = N if order is None else min(order, N)
        # repeated synthetic division: b_k = sum_n a_n C(n,k) tau**(n-k)
        work = a.copy()
        b = np.empty(out_order + 1, dtype=complex)
        for k in range(out_order + 1):
            for j in range(N - 1, k - 1, -1):
                work[j] += tau * work[j + 1]
            b[k] = work[k]
        return Jet(new_center, b, self.scale)


def _trim(c: np.ndarray) -> np.ndarray:
    """Drop trailing exact zeros (polynomial data) to keep products cheap."""
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c[:1]
    return c[: nz[-1] + 1]


# ---------------------------------------------------------------------------
# expressions


class FunctionExpr:
    """Immutable expression tree of a holomorphic test function."""

    def __call__(self, z):
        raise NotImplementedError

    def jet(self, center: complex, order: int, scale: float = 1.0) -> Jet:
        raise NotImplementedError

    def singularities(self) -> tuple[complex, ...]:
        return ()

    def as_polynomial(self) -> np.ndarray | None:
        """Monomial coefficients if the expression is a polynomial, else None."""
        return None

    # arithmetic sugar so tests can write Pole(2) * z + 1
    def __add__(self, other):
        return Sum((self, _wrap(other)))

    def __radd__(self, other):
        return Sum((_wrap(other), self))

    def __sub__(self, other):
        return Sum((self, Product((Constant(-1.0), _wrap(other)))))

    def __rsub__(self, other):
        return Sum((_wrap(other), Product((Constant(-1.0), self))))

    def __mul__(self, other):
        return Product((self, _wrap(other)))

    def __rmul__(self, other):
        return Product((_wrap(other), self))

    def __truediv__(self, other):
        return Quotient(self, _wrap(other))

    def __rtruediv__(self, other):
        return Quotient(_wrap(other), self)

    def __neg__(self):
        return Product((Constant(-1.0), self))

    def __pow__(self, k):
        return Power(self, int(k))


def _wrap(x) -> FunctionExpr:
    return x if isinstance(x, FunctionExpr) else Constant(complex(x))


@dataclass(frozen=True)
class Constant(FunctionExpr):
    value: complex

    def __call__(self, z):
        return np.full(np.shape(z), complex(self.value), dtype=complex)

    def jet(self, center, order, scale=1.0):
        return Jet.constant(self.value, center, order, scale)

    def as_polynomial(self):
        return np.array([self.value], dtype=complex)


@dataclass(frozen=True)
class Identity(FunctionExpr):
    def __call__(self, z):
        return np.asarray(z, dtype=complex)

    def jet(self, center, order, scale=1.0):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = center
        if order >= 1:
            c[1] = scale
        return Jet(center, c, scale)

    def as_polynomial(self):
        return np.array([0.0, 1.0], dtype=complex)


@dataclass(frozen=True)
class Polynomial(FunctionExpr):
    """``c_0 + c_1 z + ... + c_d z**d``."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def jet(self, center, order, scale=1.0):
        p = np.polynomial.Polynomial(self.coefficients)
        out = np.zeros(order + 1, dtype=complex)
        shifted = p(np.polynomial.Polynomial([center, scale])).coef
        k = min(order + 1, shifted.size)
        out[:k] = shifted[:k]
        return Jet(center, out, scale)

    def as_polynomial(self):
        return np.array(self.coefficients, dtype=complex)


@dataclass(frozen=True)
class Pole(FunctionExpr):
    """``1 / (z0 - z)**order``."""

    z0: complex
    order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "z0", complex(self.z0))
        if int(self.order) < 1:
            raise ValueError("pole order must be a positive integer")
        object.__setattr__(self, "order", int(self.order))

    def __call__(self, z):
        return 1.0 / (self.z0 - np.asarray(z, dtype=complex)) ** self.order

    def jet(self, center, order, scale=1.0):
        d = self.z0 - center
        if abs(d) < SINGULARITY_TOL:
            raise SingularityTooClose(f"center {center} is within tolerance of pole {self.z0}")
        rho = scale / d
        n = np.arange(1, order + 1)
        # a_n = C(k-1+n, n) rho**n / d**k, built as a running product
        factors = (self.order - 1 + n) / n * rho
        with np.errstate(under="ignore"):
            c = np.concatenate(([1.0 + 0j], np.cumprod(factors))) / d**self.order
        return Jet(center, c, scale)

    def singularities(self):
        return (self.z0,)


@dataclass(frozen=True)
class Exponential(FunctionExpr):
    """``exp(lam * z)``."""

    lam: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))

    def __call__(self, z):
        return np.exp(self.lam * np.asarray(z, dtype=complex))

    def jet(self, center, order, scale=1.0):
        n = np.arange(1, order + 1)
        with np.errstate(under="ignore"):
            c = np.concatenate(([1.0 + 0j], np.cumprod(self.lam * scale / n)))
        return Jet(center, c * np.exp(self.lam * center), scale)


@dataclass(frozen=True)
class Sum(FunctionExpr):
    terms: tuple

    def __call__(self, z):
        return reduce(np.add, (t(z) for t in self.terms))

    def jet(self, center, order, scale=1.0):
        return reduce(lambda a, b: a + b, (t.jet(center, order, scale) for t in self.terms))

    def singularities(self):
        return tuple(s for t in self.terms for s in t.singularities())

    def as_polynomial(self):
        polys = [t.as_polynomial() for t in self.terms]
        if any(p is None for p in polys):
            return None
        return reduce(np.polynomial.polynomial.polyadd, polys)


@dataclass(frozen=True)
class Product(FunctionExpr):
    factors: tuple

    def __call__(self, z):
        return reduce(np.multiply, (f(z) for f in self.factors))

    def jet(self, center, order, scale=1.0):
        jets = [f.jet(center, order, scale) for f in self.factors]
        return reduce(lambda a, b: a * b, jets)

    def singularities(self):
        return tuple(s for f in self.factors for s in f.singularities())

    def as_polynomial(self):
        polys = [f.as_polynomial() for f in self.factors]
        if any(p is None for p in polys):
            return None
        return reduce(np.polynomial.polynomial.polymul, polys)


@dataclass(frozen=True)
class Quotient(FunctionExpr):
    numerator: FunctionExpr
    denominator: FunctionExpr

    def __call__(self, z):
        return self.numerator(z) / self.denominator(z)

    def jet(self, center, order, scale=1.0):
        for s in _polynomial_zeros(self.denominator):
            if abs(s - center) < SINGULARITY_TOL:
                raise SingularityTooClose(f"center {center} is within tolerance of a zero of the denominator")
        return self.numerator.jet(center, order, scale) / self.denominator.jet(center, order, scale)

    def singularities(self):
        return (
            self.numerator.singularities()
            + self.denominator.singularities()
            + _polynomial_zeros(self.denominator)
        )


@dataclass(frozen=True)
class Power(FunctionExpr):
    base: FunctionExpr
    exponent: int

    def __post_init__(self):
        object.__setattr__(self, "exponent", int(self.exponent))

    def __call__(self, z):
        return self.base(z) ** self.exponent

    def jet(self, center, order, scale=1.0):
        if self.exponent < 0:
            for s in _polynomial_zeros(self.base):
                if abs(s - center) < SINGULARITY_TOL:
                    raise SingularityTooClose(f"center {center} is within tolerance of a zero of the base")
        return self.base.jet(center, order, scale) ** self.exponent

    def singularities(self):
        extra = _polynomial_zeros(self.base) if self.exponent < 0 else ()
        return self.base.singularities() + extra

    def as_polynomial(self):
        p = self.base.as_polynomial()
        if p is None or self.exponent < 0:
            return None
        return np.polynomial.polynomial.polypow(p, self.exponent)


def _polynomial_zeros(expr: FunctionExpr) -> tuple[complex, ...]:
    p = expr.as_polynomial()
    if p is None:
        return ()
    p = _trim(np.asarray(p, dtype=complex))
    if p.size <= 1:
        return ()
    return tuple(complex(r) for r in np.polynomial.polynomial.polyroots(p))


z = Identity()


def jet_eval(f: FunctionExpr, center: complex, order: int, scale: float = 1.0) -> Jet:
    """Jet of ``f`` at ``center`` truncated at ``order`` (see :class:`Jet`)."""
    if order < 0:
        raise ValueError("order must be non-negative")
    center = complex(center)
    for s in f.singularities():
        if abs(s - center) < SINGULARITY_TOL:
            raise SingularityTooClose(f"center {center} is within {SINGULARITY_TOL} of singularity {s}")
    return f.jet(center, order, scale)


def derivative(f: FunctionExpr, x: complex, n: int) -> complex:
    """``f^(n)(x)`` as ``n! * a_n``."""
    a = jet_eval(f, x, n).coeffs[n]
    return complex(a * math.factorial(n))


def distance_to_singularities(f: FunctionExpr, zs) -> np.ndarray:
    """Distance from each point to the nearest known singularity (inf if none)."""
    zs = np.asarray(zs, dtype=complex)
    sing = np.array(f.singularities(), dtype=complex)
    if sing.size == 0:
        return np.full(zs.shape, np.inf)
    return np.min(np.abs(zs[..., None] - sing), axis=-1)


# ---------------------------------------------------------------------------
# textual form

_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_NUMBER = re.compile(
    r"""^[+-]?(
        (\d+\.?\d*|\.\d+)([eE][+-]?\d+)?            # real part
        ([+-](\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?[ij])? # optional imaginary part
      | (\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?[ij]        # pure imaginary
    )$""",
    re.VERBOSE,
)


def parse_number(tok: str) -> complex:
    """Parse ``1``, ``-0.5``, ``2-3i``, ``0.5+0.353553i``, ``i`` or ``1e-3``."""
    if not _NUMBER.match(tok):
        raise InvalidFunctionSyntax(f"not a number: {tok!r}")
    t = tok.replace("i", "j")
    if t in ("j", "+j", "-j"):
        t = t.replace("j", "1j")
    try:
        return complex(t)
    except ValueError as exc:
        raise InvalidFunctionSyntax(f"not a number: {tok!r}") from exc


def parse(text: str) -> FunctionExpr:
    """Parse the prefix-notation form of a test function."""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise InvalidFunctionSyntax("empty function expression")
    expr, pos = _parse_expr(tokens, 0)
    if pos != len(tokens):
        raise InvalidFunctionSyntax(f"unexpected trailing tokens: {' '.join(tokens[pos:])}")
    return expr


def _parse_expr(tokens: Sequence[str], pos: int):
    if pos >= len(tokens):
        raise InvalidFunctionSyntax("unexpected end of expression")
    tok = tokens[pos]
    if tok == "(":
        expr, pos = _parse_form(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise InvalidFunctionSyntax("missing ')'")
        return expr, pos + 1
    if tok == ")":
        raise InvalidFunctionSyntax("unexpected ')'")
    if tok in _FORMS or tok in ("z", "x"):
        return _parse_form(tokens, pos)
    return Constant(parse_number(tok)), pos + 1


def _numbers(tokens, pos) -> tuple[list[complex], int]:
    out = []
    while pos < len(tokens) and tokens[pos] not in "()" and _NUMBER.match(tokens[pos]):
        out.append(parse_number(tokens[pos]))
        pos += 1
    return out, pos


def _subexprs(tokens, pos) -> tuple[list[FunctionExpr], int]:
    out = []
    while pos < len(tokens) and tokens[pos] != ")":
        e, pos = _parse_expr(tokens, pos)
        out.append(e)
    return out, pos


def _parse_form(tokens, pos):
    head = tokens[pos]
    pos += 1
    if head in ("z", "x"):
        return Identity(), pos
    if head not in _FORMS:
        raise InvalidFunctionSyntax(f"unknown form {head!r}")
    if head == "const":
        nums, pos = _numbers(tokens, pos)
        if len(nums) != 1:
            raise InvalidFunctionSyntax("const takes one number")
        return Constant(nums[0]), pos
    if head == "pole":
        nums, pos = _numbers(tokens, pos)
        if len(nums) not in (1, 2):
            raise InvalidFunctionSyntax("pole takes a location and an optional integer order")
        k = 1
        if len(nums) == 2:
            if nums[1].imag != 0 or nums[1].real != int(nums[1].real) or nums[1].real < 1:
                raise InvalidFunctionSyntax("pole order must be a positive integer")
            k = int(nums[1].real)
        return Pole(nums[0], k), pos
    if head == "exp":
        nums, pos = _numbers(tokens, pos)
        if len(nums) > 1:
            raise InvalidFunctionSyntax("exp takes at most one rate")
        return Exponential(nums[0] if nums else 1.0), pos
    if head == "poly":
        nums, pos = _numbers(tokens, pos)
        if not nums:
            raise InvalidFunctionSyntax("poly needs at least one coefficient")
        return Polynomial(tuple(nums)), pos
    if head in ("sum", "prod"):
        args, pos = _subexprs(tokens, pos)
        if len(args) < 2:
            raise InvalidFunctionSyntax(f"{head} needs at least two operands")
        return (Sum if head == "sum" else Product)(tuple(args)), pos
    if head == "quot":
        args, pos = _subexprs(tokens, pos)
        if len(args) != 2:
            raise InvalidFunctionSyntax("quot takes exactly two operands")
        return Quotient(args[0], args[1]), pos
    if head == "pow":
        base, pos = _parse_expr(tokens, pos)
        nums, pos = _numbers(tokens, pos)
        if len(nums) != 1 or nums[0].imag != 0 or nums[0].real != int(nums[0].real):
            raise InvalidFunctionSyntax("pow takes an expression and an integer exponent")
        return Power(base, int(nums[0].real)), pos
    raise InvalidFunctionSyntax(f"unknown form {head!r}")  # pragma: no cover


_FORMS = {"const", "pole", "exp", "poly", "sum", "prod", "quot", "pow"}


def to_text(f: FunctionExpr) -> str:
    """Inverse of :func:`parse` (up to number formatting)."""
    if isinstance(f, Constant):
        return f"const {_fmt(f.value)}"
    if isinstance(f, Identity):
        return "z"
    if isinstance(f, Polynomial):
        return "poly " + " ".join(_fmt(c) for c in f.coefficients)
    if isinstance(f, Pole):
        return f"pole {_fmt(f.z0)} {f.order}"
    if isinstance(f, Exponential):
        return f"exp {_fmt(f.lam)}"
    if isinstance(f, (Sum, Product)):
        head = "sum" if isinstance(f, Sum) else "prod"
        items = f.terms if isinstance(f, Sum) else f.factors
        return head + " " + " ".join(f"({to_text(t)})" for t in items)
    if isinstance(f, Quotient):
        return f"quot ({to_text(f.numerator)}) ({to_text(f.denominator)})"
    if isinstance(f, Power):
        return f"pow ({to_text(f.base)}) {f.exponent}"
    raise TypeError(f"cannot serialise {type(f).__name__}")


def _fmt(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"{c.real!r}{c.imag:+.17g}i"


def poles(locations: Iterable[complex], order: int = 1) -> FunctionExpr:
    """Sum of simple (or equal-order) poles."""
    return Sum(tuple(Pole(p, order) for p in locations))
