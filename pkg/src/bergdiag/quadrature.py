"""Area integrals of ``|f|**2``, the kernel line integral and the weighted disk norm.

Area integrals use one globally adaptive driver over "patches": rectangles
``[u0, u0+hu] x [v0, v0+hv]`` in the parameter plane of a map ``(u, v) -> z``.

* Convex polygons are fanned into triangles, each the image of the unit
  square under the collapsed map ``A + u (B - A) + u v (C - B)``.
* Disks use polar coordinates about the center.
* Any other domain is known only through its membership predicate and is
  covered by a quadtree over its bounding box. Cells entirely inside get the
  same tensor Gauss rule as the mapped patches; cells cut by the boundary
  are scored by 16 x 16 masked midpoint sampling.

Each pass splits the smallest set of cells holding half the current error
estimate. Totals are accumulated with ``math.fsum`` so results do not depend
on cell ordering.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .errors import EmptyIntersection, OutsideSector, SingularityInDomain, ToleranceNotReached
from .geometry import Difference, Disk, Domain, disk_roots
from .jets import Constant, FunctionExpr, Pole, Product, Sum
from .special import weights_upto

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 30
    gauss_order: int = 8
    boundary_cell_limit: float = 1e-7
    max_cells: int = 400_000
    initial_cells: int = 8

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.max_depth <= 40):
            raise ValueError("max_depth must lie in [1, 40]")
        if not (2 <= self.gauss_order <= 64):
            raise ValueError("gauss_order must lie in [2, 64]")
        if self.boundary_cell_limit <= 0:
            raise ValueError("boundary_cell_limit must be positive")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    cells_used: int
    boundary_fraction: float
    converged: bool = True


# ---------------------------------------------------------------------------
# maps from the parameter plane


class _Map:
    def __call__(self, u, v):
        """Return ``(z, jacobian)`` for parameter arrays."""
        raise NotImplementedError


class _IdentityMap(_Map):
    def __call__(self, u, v):
        return u + 1j * v, np.ones_like(u)


@dataclass(frozen=True)
class _TriangleMap(_Map):
    a: complex
    b: complex
    c: complex

    def __call__(self, u, v):
        e1 = self.b - self.a
        e2 = self.c - self.b
        det = abs((e1.conjugate() * e2).imag)
        return self.a + u * e1 + u * v * e2, u * det


@dataclass(frozen=True)
class _PolarMap(_Map):
    center: complex

    def __call__(self, u, v):
        return self.center + u * np.exp(1j * v), u


@dataclass(frozen=True)
class _LogPolarMap(_Map):
    """``u = log r``; flattens ``1/r**2`` growth about the center."""

    center: complex

    def __call__(self, u, v):
        r = np.exp(u)
        return self.center + r * np.exp(1j * v), r * r


# ---------------------------------------------------------------------------
# the adaptive driver

_GAUSS = 0
_STRADDLE = 1
_FEATURE = 2  # straddle cell whose sampling may miss part of the boundary
_SUB = 16
_CONFIDENCE = 3.0  # sampled boundary errors are reported at three standard deviations
_LATTICE = 8


def _cell_shifts(cells):
    """Deterministic pseudo-random lattice shifts in ``[0, 1)``, two pairs per cell.

    A randomly shifted lattice gives an unbiased area estimate, so boundary
    errors of different cells are independent even where a straight boundary
    crosses many identical cells.
    """
    key = cells.u0 * 127.1 + cells.v0 * 311.7 + cells.depth * 74.7 + cells.map_id * 19.3
    out = []
    for mult, add, scale in ((12.9898, 78.233, 43758.5453), (39.3468, 11.135, 24634.6345),
                             (73.156, 52.235, 35412.7731), (27.633, 93.989, 61283.4127)):
        x = np.sin(key * mult + add) * scale
        out.append(x - np.floor(x))
    return tuple(out)


def gauss_legendre01(p: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(p)
    return 0.5 * (x + 1.0), 0.5 * w


class _Cells:
    """Struct-of-arrays cell store."""

    fields = ("map_id", "u0", "v0", "hu", "hv", "depth", "status", "val", "err")

    def __init__(self, **arrays):
        for k in self.fields:
            setattr(self, k, np.asarray(arrays[k]))

    @classmethod
    def empty(cls):
        return cls(map_id=np.zeros(0, int), u0=np.zeros(0), v0=np.zeros(0), hu=np.zeros(0),
                   hv=np.zeros(0), depth=np.zeros(0, int), status=np.zeros(0, int),
                   val=np.zeros(0), err=np.zeros(0))

    def __len__(self):
        return self.u0.size

    def take(self, idx):
        return _Cells(**{k: getattr(self, k)[idx] for k in self.fields})

    @staticmethod
    def concat(parts):
        return _Cells(**{k: np.concatenate([getattr(p, k) for p in parts]) for k in _Cells.fields})


class _Integrator:
    def __init__(self, f: FunctionExpr, maps: Sequence[_Map], cfg: QuadConfig, domain: Domain | None = None):
        self.f = f
        self.maps = list(maps)
        self.cfg = cfg
        self.domain = domain
        xg, wg = gauss_legendre01(cfg.gauss_order)
        self.xg, self.wg = xg, wg
        # composite rule on the two halves, used for the error estimate
        self.xc = np.concatenate((0.5 * xg, 0.5 + 0.5 * xg))
        self.wc = np.concatenate((0.5 * wg, 0.5 * wg))
        self.evaluations = 0

    def _abs2(self, z):
        self.evaluations += z.size
        with np.errstate(all="ignore"):
            v = self.f(z)
        return (v * np.conj(v)).real

    def _tensor(self, cells, x, w):
        u = cells.u0[:, None, None] + cells.hu[:, None, None] * x[None, :, None]
        v = cells.v0[:, None, None] + cells.hv[:, None, None] * x[None, None, :]
        u, v = np.broadcast_arrays(u, v)
        total = np.zeros(len(cells))
        for m in np.unique(cells.map_id):
            sel = cells.map_id == m
            z, jac = self.maps[m](u[sel], v[sel])
            g = self._abs2(z) * jac * w[None, :, None] * w[None, None, :]
            total[sel] = g.sum(axis=(1, 2)) * cells.hu[sel] * cells.hv[sel]
        return total

    def evaluate_gauss(self, cells):
        coarse = self._tensor(cells, self.xg, self.wg)
        fine = self._tensor(cells, self.xc, self.wc)
        cells.val = fine
        cells.err = np.abs(fine - coarse)
        bad = ~np.isfinite(cells.val)
        if bad.any():
            raise SingularityInDomain("integrand is not finite inside the domain")

    def classify(self, cells):
        """Mark predicate cells inside / straddling; return mask of cells to keep."""
        # the lattice reaches one spacing past the cell: a boundary arc that
        # slips between the cell's own points still trips the outer ring
        s = np.arange(-1, _LATTICE + 2) / _LATTICE
        inside, _ = self._sample(cells, s)
        n_core = inside[:, 1:-1, 1:-1].sum(axis=(1, 2))
        all_in = inside.all(axis=(1, 2))
        feature = self._features(cells)
        cells.status = np.where(feature, _FEATURE, np.where(all_in, _GAUSS, _STRADDLE))
        return (n_core > 0) | feature | (inside.any(axis=(1, 2)) & ~all_in)

    def _sample(self, cells, s, values=False, t=None):
        """Membership (and optionally ``|f|**2 * jacobian``) on a tensor lattice.

        ``s`` (and ``t`` for the second axis, default ``s``) are unit-interval
        offsets, either shared ``(n,)`` or per cell ``(cells, n)``.
        """
        s = np.atleast_2d(s)
        t = s if t is None else np.atleast_2d(t)
        u = cells.u0[:, None, None] + cells.hu[:, None, None] * s[:, :, None]
        v = cells.v0[:, None, None] + cells.hv[:, None, None] * t[:, None, :]
        u, v = np.broadcast_arrays(u, v)
        inside = np.zeros(u.shape, dtype=bool)
        g = np.zeros(u.shape) if values else None
        for m in np.unique(cells.map_id):
            sel = cells.map_id == m
            z, jac = self.maps[m](u[sel], v[sel])
            inside[sel] = self.domain.contains(z)
            if values:
                g[sel] = self._abs2(z) * jac
        return inside, g

    def _features(self, cells):
        # small features are only known in the plane itself
        feature = np.zeros(len(cells), dtype=bool)
        plain = np.array([isinstance(self.maps[m], _IdentityMap) for m in cells.map_id], dtype=bool)
        if plain.any():
            feature[plain] = self.domain.feature_cells(cells.u0[plain], cells.v0[plain], cells.hu[plain])
        return feature

    def evaluate_straddle(self, cells):
        """Masked midpoint value plus an error estimate from independent samples.

        The value uses a shifted 16 x 16 lattice. The error estimate comes from
        a second, independently shifted 8 x 8 lattice: if it reused the value's
        samples, refining the cells with large estimates would leave behind
        cells whose values are conditioned on them, which biases the total.
        """
        su, sv, tu, tv = _cell_shifts(cells)

        def masked(n, a, b):
            k = np.arange(n)[None, :]
            return self._sample(cells, (k + a[:, None]) / n, values=True, t=(k + b[:, None]) / n)

        area = cells.hu * cells.hv
        inside, g = masked(_SUB, su, sv)
        val = np.where(inside, g, 0.0).sum(axis=(1, 2)) * area / _SUB**2
        n_est = _SUB // 2
        inside, g = masked(n_est, tu, tv)
        # samples with a 4-neighbour on the other side of the boundary
        flip_u = inside[:, 1:, :] != inside[:, :-1, :]
        flip_v = inside[:, :, 1:] != inside[:, :, :-1]
        mixed = np.zeros_like(inside)
        mixed[:, 1:, :] |= flip_u
        mixed[:, :-1, :] |= flip_u
        mixed[:, :, 1:] |= flip_v
        mixed[:, :, :-1] |= flip_v
        # a lattice twice as fine meets the boundary about twice as often
        n_mixed = 2 * mixed.sum(axis=(1, 2))
        gmax = np.where(inside, g, 0.0).max(axis=(1, 2))
        # independent-sample variance n/12, doubled: along a straight edge the
        # lattice hits come in correlated rows
        err = 2.0 * np.sqrt(n_mixed / 12.0) * area / _SUB**2 * gmax
        gall = np.where(np.isfinite(g), g, 0.0).max(axis=(1, 2))
        # the boundary slipped between the estimate samples, so whatever lies
        # across it is below the lattice resolution: still unbiased, with a
        # spread of about one value sample
        err = np.where(n_mixed == 0, area * gall / _SUB**2, err)
        err = np.where(cells.status == _FEATURE, np.maximum(err, area * gall), err)
        cells.val = val
        cells.err = err

    def evaluate(self, cells):
        if not len(cells):
            return cells
        if self.domain is not None:
            keep = self.classify(cells)
            cells = cells.take(keep)
        val = np.zeros(len(cells))
        err = np.zeros(len(cells))
        for straddle, fn in ((False, self.evaluate_gauss), (True, self.evaluate_straddle)):
            sel = (cells.status != _GAUSS) == straddle
            if sel.any():
                sub = cells.take(sel)
                fn(sub)
                val[sel], err[sel] = sub.val, sub.err
                cells.status[sel] = sub.status
        cells.val, cells.err = val, err
        return cells

    @staticmethod
    def split(cells):
        hu, hv = cells.hu / 2, cells.hv / 2
        parts = []
        for du in (0, 1):
            for dv in (0, 1):
                parts.append(_Cells(map_id=cells.map_id, u0=cells.u0 + du * hu, v0=cells.v0 + dv * hv,
                                    hu=hu, hv=hv, depth=cells.depth + 1, status=cells.status,
                                    val=np.zeros(len(cells)), err=np.zeros(len(cells))))
        return _Cells.concat(parts)

    @staticmethod
    def _mark(err, refinable):
        """Smallest set of largest contributions holding half of the total."""
        e = np.where(refinable, err, 0.0)
        order = np.argsort(-e, kind="stable")
        csum = np.cumsum(e[order])
        pick = np.zeros(err.size, dtype=bool)
        if csum.size and csum[-1] > 0:
            pick[order[: int(np.searchsorted(csum, 0.5 * csum[-1])) + 1]] = True
        return pick & refinable

    def run(self, cells) -> IntegralResult:
        """Refine until the error estimate meets the tolerance.

        Gauss and feature cells carry deterministic error bounds and add
        linearly. Boundary sampling errors of different straddle cells are
        independent, so they are combined as a root sum of squares and
        reported at three standard deviations.
        """
        cfg = self.cfg
        cells = self.evaluate(cells)
        converged = False
        while True:
            total = math.fsum(cells.val)
            sampled = cells.status == _STRADDLE
            lin = math.fsum(cells.err[~sampled])
            rss = _CONFIDENCE * math.sqrt(math.fsum(cells.err[sampled] ** 2))
            err_total = lin + rss
            tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
            if err_total <= tol:
                converged = True
                break
            refinable = cells.depth < cfg.max_depth
            if self.domain is not None:
                refinable &= (cells.status == _GAUSS) | (np.maximum(cells.hu, cells.hv) > cfg.boundary_cell_limit)
            if not refinable.any() or len(cells) > cfg.max_cells:
                break
            # cells at the size floor already exceed the tolerance: refining others cannot help
            frozen = ~refinable
            stuck = (math.fsum(cells.err[frozen & ~sampled])
                     + _CONFIDENCE * math.sqrt(math.fsum(cells.err[frozen & sampled] ** 2)))
            if stuck > tol:
                break
            pick = np.zeros(len(cells), dtype=bool)
            if lin > 0.5 * tol:
                pick |= self._mark(np.where(sampled, 0.0, cells.err), refinable)
            if rss > 0.5 * tol:
                pick |= self._mark(np.where(sampled, cells.err ** 2, 0.0), refinable)
            if not pick.any():
                pick = self._mark(cells.err, refinable)
            if not pick.any():
                break
            children = self.evaluate(self.split(cells.take(pick)))
            cells = _Cells.concat([cells.take(~pick), children])
        if not converged:
            warnings.warn(
                f"adaptive quadrature stopped with error estimate {err_total:.3g} above tolerance {tol:.3g}",
                ToleranceNotReached, stacklevel=3)
        straddle_val = math.fsum(cells.val[cells.status != _GAUSS])
        frac = straddle_val / total if total > 0 else 0.0
        return IntegralResult(total, err_total, len(cells), float(min(max(frac, 0.0), 1.0)), converged)


def _initial(map_id, u0, u1, v0, v1, nu, nv):
    us = np.linspace(u0, u1, nu + 1)[:-1]
    vs = np.linspace(v0, v1, nv + 1)[:-1]
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    n = uu.size
    return _Cells(map_id=np.full(n, map_id), u0=uu.ravel(), v0=vv.ravel(),
                  hu=np.full(n, (u1 - u0) / nu), hv=np.full(n, (v1 - v0) / nv),
                  depth=np.zeros(n, int), status=np.full(n, _GAUSS), val=np.zeros(n), err=np.zeros(n))


def _check_singularities(f: FunctionExpr, d: Domain):
    for s in f.singularities():
        ring = s + 1e-9 * max(1.0, abs(s)) * np.exp(2j * np.pi * np.arange(8) / 8)
        if d.contains(np.array([s])).any() or d.contains(ring).any():
            raise SingularityInDomain(f"singularity {s} lies in the closure of the domain")


def _quadtree_cells(box, cfg, map_id=0):
    x0, x1, y0, y1 = box
    if not all(map(math.isfinite, (x0, x1, y0, y1))):
        raise ValueError("unbounded domain: supply a truncation through the bounding box")
    H = max(x1 - x0, y1 - y0) / cfg.initial_cells
    nx = max(1, int(math.ceil((x1 - x0) / H - 1e-12)))
    ny = max(1, int(math.ceil((y1 - y0) / H - 1e-12)))
    return _initial(map_id, x0, x0 + nx * H, y0, y0 + ny * H, nx, ny)


def bergman_norm_sq(f: FunctionExpr, d: Domain, cfg: QuadConfig = QuadConfig()) -> IntegralResult:
    """Approximate ``int_d |f|**2 dA``.

    Raises:
        SingularityInDomain: a known singularity of ``f`` lies in the closure
            of ``d``; use :func:`truncated_norm_sq` to cut it out.
    """
    _check_singularities(f, d)
    poly = d.polygon()
    if poly is not None:
        maps = [_TriangleMap(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]
        cells = _Cells.concat([_initial(i, 0.0, 1.0, 0.0, 1.0, 2, 2) for i in range(len(maps))])
        return _Integrator(f, maps, cfg).run(cells)
    if isinstance(d, Disk):
        cells = _initial(0, 0.0, d.radius, 0.0, 2 * np.pi, 2, 8)
        return _Integrator(f, [_PolarMap(d.center)], cfg).run(cells)
    return _Integrator(f, [_IdentityMap()], cfg, domain=d).run(_quadtree_cells(d.bbox, cfg))


def _combine(parts: Sequence[IntegralResult]) -> IntegralResult:
    value = math.fsum(p.value for p in parts)
    bnd = math.fsum(p.value * p.boundary_fraction for p in parts)
    return IntegralResult(value, math.fsum(p.error_estimate for p in parts),
                          sum(p.cells_used for p in parts),
                          bnd / value if value > 0 else 0.0,
                          all(p.converged for p in parts))


#: an exclusion disk smaller than this gets a log-polar collar of this radius
LOG_POLAR_COLLAR = 0.1


def truncated_norm_sq(f: FunctionExpr, d: Domain, exclusion: Disk,
                      cfg: QuadConfig = QuadConfig(), collar: float | None = LOG_POLAR_COLLAR) -> IntegralResult:
    """``int |f|**2`` over ``d`` with the disk ``exclusion`` removed.

    When the exclusion radius is below ``collar`` the annulus between the two
    radii is integrated in log-polar coordinates about the exclusion center,
    where ``|f|**2 dA`` of a simple pole is a constant density; the rest of
    ``d`` goes to the plain quadtree. ``collar=None`` disables the split.
    """
    for s in f.singularities():
        if abs(s - exclusion.center) >= exclusion.radius and (
                d.contains(np.array([s])).any()):
            raise SingularityInDomain(f"singularity {s} is in the domain but outside the exclusion disk")
    if collar is None or exclusion.radius >= collar:
        return bergman_norm_sq(f, Difference(d, exclusion), cfg)
    outer = bergman_norm_sq(f, Difference(d, Disk(exclusion.center, collar)), cfg)
    box = (math.log(exclusion.radius), math.log(collar), -math.pi, math.pi)
    nu = max(1, int(math.ceil(box[1] - box[0])))
    cells = _initial(0, *box, nu, cfg.initial_cells)
    ring = Difference(d, exclusion)
    inner = _Integrator(f, [_LogPolarMap(exclusion.center)], cfg, domain=ring).run(cells)
    return _combine([outer, inner])


# ---------------------------------------------------------------------------
# tails of pole-type functions on the sector


def _pole_terms(f: FunctionExpr):
    """``[(|coefficient|, pole, order), ...]`` for sums of scaled poles, else None."""
    if isinstance(f, Pole):
        return [(1.0, f.z0, f.order)]
    if isinstance(f, Product):
        const = 1.0
        pole = None
        for g in f.factors:
            if isinstance(g, Constant):
                const *= abs(g.value)
            elif isinstance(g, Pole) and pole is None:
                pole = g
            else:
                return None
        if pole is None:
            return None
        return [(const, pole.z0, pole.order)]
    if isinstance(f, Sum):
        out = []
        for t in f.terms:
            sub = _pole_terms(t)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return None


def sector_tail_bound(f: FunctionExpr, radius: float) -> float:
    """Upper bound for ``int |f|**2`` over the sector outside ``|z| = radius``.

    Only for sums of scaled poles of order >= 2 (order-1 poles are not square
    integrable at infinity and give ``inf``). Uses
    ``|f| <= sum_k c_k / (|z| - |p_k|)**m_k`` and Cauchy-Schwarz.
    """
    terms = _pole_terms(f)
    if terms is None:
        raise TypeError("tail bound needs a sum of scaled poles")
    K = len(terms)
    total = 0.0
    for c, p, m in terms:
        rho = abs(p)
        if radius <= rho:
            return math.inf
        if m < 2:
            return math.inf
        s = radius - rho
        total += c * c * (s ** (2 - 2 * m) / (2 * m - 2) + rho * s ** (1 - 2 * m) / (2 * m - 1))
    return K * (math.pi / 2) * total


def truncation_for_tail(f: FunctionExpr, tol: float, start: float = 1.0) -> float:
    """Smallest power-of-two multiple of ``start`` whose sector tail is below ``tol``."""
    X = start
    while sector_tail_bound(f, X) > tol:
        X *= 2.0
        if X > 1e12:
            raise ValueError("tail does not fall below tolerance")
    return X


# ---------------------------------------------------------------------------
# one-dimensional pieces


def kernel_line_integral(z: complex, lower: float, upper: float) -> float:
    """``int_lower^upper 1{z in D_x} (x**2/2 - |z-x|**2)**(-1/2) dx`` in closed form.

    With ``y(x) = 2 (x - x1)/(x2 - x1) - 1`` the integrand becomes
    ``sqrt 2 / sqrt(1 - y**2)``, so the value is
    ``sqrt 2 (arcsin y(u2) - arcsin y(u1))`` for the limits clipped to the
    root interval. Over the whole interval that is ``sqrt 2 * pi`` for every z.
    """
    x1, x2 = disk_roots(z)
    if not x1 < x2:
        raise OutsideSector(f"{z} is on the boundary of the sector")
    u1, u2 = max(lower, x1), min(upper, x2)
    if not u1 < u2:
        raise EmptyIntersection(f"[{lower}, {upper}] misses the root interval ({x1}, {x2})")

    def y(x):
        return min(1.0, max(-1.0, 2.0 * (x - x1) / (x2 - x1) - 1.0))

    return SQRT2 * (math.asin(y(u2)) - math.asin(y(u1)))


def kernel_line_integral_quad(z: complex, lower: float, upper: float) -> float:
    """Numerical value of the same integral, for cross-checking.

    The substitution ``x = x1 + (x2 - x1) sin(phi)**2`` absorbs both
    inverse-square-root endpoint singularities; the integrand itself is
    evaluated from ``x**2/2 - |z - x|**2`` directly and integrated adaptively.
    """
    x1, x2 = disk_roots(z)
    u1, u2 = max(lower, x1), min(upper, x2)
    if not u1 < u2:
        raise EmptyIntersection(f"[{lower}, {upper}] misses the root interval ({x1}, {x2})")
    L = x2 - x1

    def phi_of(x):
        return math.asin(math.sqrt(min(1.0, max(0.0, (x - x1) / L))))

    def integrand(phi):
        x = x1 + L * math.sin(phi) ** 2
        h = 0.5 * x * x - abs(z - x) ** 2
        dx = 2.0 * L * math.sin(phi) * math.cos(phi)
        if h <= 0.0:
            # endpoint limit: h ~ (L/2) * L sin^2 cos^2, so the ratio is 2 sqrt 2
            return 2.0 * SQRT2
        return dx / math.sqrt(h)

    val, _ = integrate.quad(integrand, phi_of(u1), phi_of(u2), epsabs=1e-9, epsrel=1e-9, limit=200)
    return val


class WeightedNorm(NamedTuple):
    coefficient_sum: float
    quadrature: float


def weighted_disk_norm_sq(g_coeffs: Sequence[complex], radial_order: int | None = None,
                          angular_points: int | None = None) -> WeightedNorm:
    """Both sides of the weighted-disk Parseval identity for a polynomial ``g``.

    ``sum_n w_n |g_n|**2`` against
    ``int_disk |g(u)|**2 (1 - |u|**2)**(-1/2) dA(u) / (2 pi)``, the latter in
    polar coordinates with ``r = sqrt(1 - s**2)``, which turns
    ``r dr / sqrt(1 - r**2)`` into ``ds`` on ``[0, 1]``.
    """
    g = np.asarray(g_coeffs, dtype=complex)
    deg = g.size - 1
    w = weights_upto(deg)
    series = math.fsum(w * np.abs(g) ** 2)
    p = radial_order or (deg + 8)
    m = angular_points or (2 * deg + 8)
    s, ws = gauss_legendre01(p)
    theta = 2 * np.pi * np.arange(m) / m
    u = np.sqrt(1.0 - s * s)[:, None] * np.exp(1j * theta)[None, :]
    vals = np.abs(np.polynomial.polynomial.polyval(u, g)) ** 2
    # (1/2pi) * int dtheta -> mean over the periodic trapezoid nodes
    quad = float(np.sum(ws[:, None] * vals) / m)
    return WeightedNorm(series, quad)
