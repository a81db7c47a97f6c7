"""Planar domains: the sector, the square, disk covers and the ellipse-clipped pieces.

Every domain is an open set given by a vectorised membership predicate and a
bounding box. Polygons and disks also expose their exact geometry so the
quadrature module can integrate over them without a boundary error.

Conventions (all with strict inequalities):

* sector ``{x + iy : x > 0, |y| < x}``, optionally truncated to ``x < x_max``;
* square with vertices ``0, 1, 1/2 +- i/2``;
* ``D_x = D(x, x/sqrt 2)`` and, for ``a >= 1``, ``D_x^a = D(x, x a/sqrt(1+a**2))``;
* the disk union over the left half of the unit interval and its mirror
  image under ``z -> 1 - z``;
* the ellipse ``q (x - 1/2)**2 + (16 - q) y**2 < 1``;
* the ellipse-clipped union and its quarter-turn about 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidA, InvalidQ, OutsideSector
from .report import Report

SQRT2 = math.sqrt(2.0)
INF_BOX = (-math.inf, math.inf, -math.inf, math.inf)


class DiskRoots(NamedTuple):
    """Roots of ``x**2 - 4 x Re z + 2 |z|**2``; ``z`` lies in ``D_x`` iff ``x1 < x < x2``."""

    x1: float
    x2: float


def disk_roots(z: complex) -> DiskRoots:
    a, b = z.real, z.imag
    if a <= 0 or abs(b) > a:
        raise OutsideSector(f"{z} is not in the closed sector")
    t = math.sqrt(2.0 * (a * a - b * b))
    return DiskRoots(2.0 * a - t, 2.0 * a + t)


def disk_roots_array(z):
    """Vectorised roots; NaN where ``z`` is outside the closed sector."""
    z = np.asarray(z, dtype=complex)
    a, b = z.real, z.imag
    disc = 2.0 * (a * a - b * b)
    with np.errstate(invalid="ignore"):
        t = np.where((a > 0) & (disc >= 0), np.sqrt(disc), np.nan)
    return 2.0 * a - t, 2.0 * a + t


def kernel_h(z, x):
    """``x**2/2 - |z - x|**2``; positive exactly when ``z`` is in ``D_x``."""
    z = np.asarray(z, dtype=complex)
    out = 0.5 * np.asarray(x, dtype=float) ** 2 - np.abs(z - x) ** 2
    return float(out) if out.ndim == 0 else out


def rotate_quarter(z):
    """Quarter turn (counter-clockwise) about 1/2."""
    return 0.5 + 1j * (np.asarray(z, dtype=complex) - 0.5)


def unrotate_quarter(z):
    return 0.5 - 1j * (np.asarray(z, dtype=complex) - 0.5)


def _check_q(q, upper=8.0):
    if not (0.0 < q < upper):
        raise InvalidQ(f"q must lie in (0, {upper:g}), got {q}")


# ---------------------------------------------------------------------------
# domains


class Domain:
    """Open planar region: ``contains`` is pure and vectorised."""

    kind = "domain"
    bbox: tuple[float, float, float, float] = INF_BOX

    def contains(self, z) -> np.ndarray:
        raise NotImplementedError

    def __contains__(self, z) -> bool:
        return bool(self.contains(np.asarray(z, dtype=complex)))

    def polygon(self) -> np.ndarray | None:
        """Vertices of a convex polygon when the domain is one."""
        return None

    def area(self) -> float | None:
        return None

    def feature_cells(self, x0, y0, h) -> np.ndarray:
        """Mask of square cells cut by a known small boundary feature.

        Sampling-based cell classification can miss a boundary piece much
        smaller than a cell (a tiny excluded disk); domains that know such
        pieces flag the cells that meet them.
        """
        return np.zeros(np.shape(x0), dtype=bool)

    def boundary_parametrization(self):
        """``t -> z(t)`` on ``[0, 1]`` for a closed smooth boundary, or None."""
        return None


@dataclass(frozen=True)
class Sector(Domain):
    """The sector ``|Im z| < Re z``, truncated to ``Re z < x_max`` when given."""

    x_max: float | None = None
    kind = "sector"

    @property
    def bbox(self):
        if self.x_max is None:
            return (0.0, math.inf, -math.inf, math.inf)
        return (0.0, self.x_max, -self.x_max, self.x_max)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        inside = (z.real > 0) & (np.abs(z.imag) < z.real)
        if self.x_max is not None:
            inside &= z.real < self.x_max
        return inside

    def polygon(self):
        if self.x_max is None:
            return None
        X = self.x_max
        return np.array([0.0, X - 1j * X, X + 1j * X])

    def area(self):
        return math.inf if self.x_max is None else self.x_max**2


@dataclass(frozen=True)
class SquareD(Domain):
    kind = "square"
    bbox = (0.0, 1.0, -0.5, 0.5)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z.real - 0.5) + np.abs(z.imag) < 0.5

    def polygon(self):
        return np.array([0.0, 0.5 - 0.5j, 1.0, 0.5 + 0.5j])

    def area(self):
        return 0.5


@dataclass(frozen=True)
class Disk(Domain):
    center: complex
    radius: float
    kind = "disk"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def contains(self, z):
        return np.abs(np.asarray(z, dtype=complex) - self.center) < self.radius

    def area(self):
        return math.pi * self.radius**2

    def feature_cells(self, x0, y0, h):
        cx, cy = self.center.real, self.center.imag
        dx = np.maximum(np.maximum(x0 - cx, cx - (x0 + h)), 0.0)
        dy = np.maximum(np.maximum(y0 - cy, cy - (y0 + h)), 0.0)
        near = np.hypot(dx, dy)
        far = np.hypot(np.maximum(np.abs(x0 - cx), np.abs(x0 + h - cx)),
                       np.maximum(np.abs(y0 - cy), np.abs(y0 + h - cy)))
        # once the cell is no larger than the disk the lattice resolves it
        return (near < self.radius) & (far > self.radius) & (np.asarray(h) > self.radius)

    def boundary_parametrization(self):
        return lambda t: self.center + self.radius * np.exp(2j * np.pi * np.asarray(t))


def _disk_union_left(z, a=1.0):
    """Union of ``D_x^a`` over ``0 < x <= 1/2`` (``a = 1`` gives ``D_x``).

    ``|z - x| < x a/sqrt(1+a**2)`` is the quadratic
    ``x**2 - 2 s Re z x + s |z|**2 < 0`` with ``s = 1 + a**2``; its root
    interval meets ``(0, 1/2]`` iff the smaller root is below 1/2.
    """
    s = 1.0 + a * a
    re = z.real
    mod2 = re * re + z.imag * z.imag
    disc = s * s * re * re - s * mod2
    ok = (re > 0) & (disc > 0)
    with np.errstate(invalid="ignore"):
        x1 = s * re - np.sqrt(np.where(ok, disc, 0.0))
    return ok & (x1 < 0.5)


@dataclass(frozen=True)
class Omega(Domain):
    """``D_x`` for ``x <= 1/2`` together with their mirror images in ``z -> 1 - z``."""

    kind = "omega"
    bbox = (0.0, 1.0, -0.5 / SQRT2, 0.5 / SQRT2)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return _disk_union_left(z) | _disk_union_left(1.0 - z)


@dataclass(frozen=True)
class OmegaA(Domain):
    """Same construction with the wider disks ``D_x^a``, ``a >= 1``."""

    a: float = 1.0
    kind = "omega_a"

    def __post_init__(self):
        if not self.a >= 1.0:
            raise InvalidA(f"a must be >= 1, got {self.a}")

    @property
    def bbox(self):
        r = 0.5 * self.a / math.sqrt(1.0 + self.a**2)
        return (0.0, 1.0, -r, r)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return _disk_union_left(z, self.a) | _disk_union_left(1.0 - z, self.a)


@dataclass(frozen=True)
class EllipseQ(Domain):
    """``q (x-1/2)**2 + (16-q) y**2 < 1``; ``q = 8`` is the disk ``D(1/2, 1/(2 sqrt 2))``."""

    q: float = 4.0
    kind = "ellipse"

    def __post_init__(self):
        _check_q(self.q, upper=16.0)

    @property
    def bbox(self):
        rx, ry = 1.0 / math.sqrt(self.q), 1.0 / math.sqrt(16.0 - self.q)
        return (0.5 - rx, 0.5 + rx, -ry, ry)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real - 0.5, z.imag
        return self.q * x * x + (16.0 - self.q) * y * y < 1.0

    def area(self):
        return math.pi / math.sqrt(self.q * (16.0 - self.q))

    def boundary_parametrization(self):
        rx, ry = 1.0 / math.sqrt(self.q), 1.0 / math.sqrt(16.0 - self.q)
        return lambda t: 0.5 + rx * np.cos(2 * np.pi * np.asarray(t)) + 1j * ry * np.sin(2 * np.pi * np.asarray(t))


@dataclass(frozen=True)
class OmegaQ(Domain):
    """Disk union clipped to the ellipse away from the two ends.

    Points of the disk union with ``Re z < 1/4`` or ``Re z > 3/4`` are kept
    as they are; in between only those inside the ellipse. The set is
    symmetric under ``z -> 1 - z`` like the disk union itself.
    """

    q: float = 4.0
    kind = "omega_q"
    bbox = Omega.bbox

    def __post_init__(self):
        _check_q(self.q)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        ends = (z.real < 0.25) | (z.real > 0.75)
        return Omega().contains(z) & (ends | EllipseQ(self.q).contains(z))


@dataclass(frozen=True)
class OmegaQRotated(Domain):
    """Quarter turn of :class:`OmegaQ` about 1/2."""

    q: float = 4.0
    kind = "omega_q_rotated"

    def __post_init__(self):
        _check_q(self.q)

    @property
    def bbox(self):
        r = 0.5 / SQRT2
        return (0.5 - r, 0.5 + r, -0.5, 0.5)

    def contains(self, z):
        return OmegaQ(self.q).contains(unrotate_quarter(z))


@dataclass(frozen=True)
class HalfPlaneStrip(Domain):
    """Vertical strip ``lo < Re z < hi`` (either bound may be infinite)."""

    lo: float = -math.inf
    hi: float = math.inf
    kind = "strip"

    @property
    def bbox(self):
        return (self.lo, self.hi, -math.inf, math.inf)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real > self.lo) & (z.real < self.hi)


@dataclass(frozen=True)
class Union(Domain):
    parts: tuple
    kind = "union"

    @property
    def bbox(self):
        boxes = np.array([p.bbox for p in self.parts])
        return (boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max())

    def contains(self, z):
        out = self.parts[0].contains(z)
        for p in self.parts[1:]:
            out = out | p.contains(z)
        return out

    def feature_cells(self, x0, y0, h):
        return np.logical_or.reduce([p.feature_cells(x0, y0, h) for p in self.parts])


@dataclass(frozen=True)
class Intersection(Domain):
    parts: tuple
    kind = "intersection"

    @property
    def bbox(self):
        boxes = np.array([p.bbox for p in self.parts])
        return (boxes[:, 0].max(), boxes[:, 1].min(), boxes[:, 2].max(), boxes[:, 3].min())

    def contains(self, z):
        out = self.parts[0].contains(z)
        for p in self.parts[1:]:
            out = out & p.contains(z)
        return out

    def feature_cells(self, x0, y0, h):
        return np.logical_or.reduce([p.feature_cells(x0, y0, h) for p in self.parts])


@dataclass(frozen=True)
class Difference(Domain):
    """``base`` with ``hole`` removed."""

    base: Domain
    hole: Domain
    kind = "difference"

    @property
    def bbox(self):
        return self.base.bbox

    def contains(self, z):
        return self.base.contains(z) & ~self.hole.contains(z)

    def feature_cells(self, x0, y0, h):
        return self.base.feature_cells(x0, y0, h) | self.hole.feature_cells(x0, y0, h)


def membership(d: Domain, z):
    """Membership of a point (bool) or an array of points (bool array)."""
    out = d.contains(np.asarray(z, dtype=complex))
    return bool(out) if np.ndim(out) == 0 else out


DOMAINS = {
    "sector": lambda q=4.0, a=2.0, x_max=1.0: Sector(x_max),
    "square": lambda q=4.0, a=2.0, x_max=1.0: SquareD(),
    "omega": lambda q=4.0, a=2.0, x_max=1.0: Omega(),
    "omega_a": lambda q=4.0, a=2.0, x_max=1.0: OmegaA(a),
    "ellipse": lambda q=4.0, a=2.0, x_max=1.0: EllipseQ(q),
    "omega_q": lambda q=4.0, a=2.0, x_max=1.0: OmegaQ(q),
    "omega_q_rotated": lambda q=4.0, a=2.0, x_max=1.0: OmegaQRotated(q),
}


# ---------------------------------------------------------------------------
# reports


def _square_inner_distance(z):
    """Distance from points of the square to its boundary (negative outside)."""
    return (0.5 - (np.abs(z.real - 0.5) + np.abs(z.imag))) / SQRT2


def square_grid(grid_step: float, margin: float) -> np.ndarray:
    """Grid points ``(j*step, k*step)`` of the square farther than ``margin`` from its edge."""
    n = int(math.floor(1.0 / grid_step + 1e-9))
    xs = np.arange(n + 1) * grid_step
    m = int(math.floor(0.5 / grid_step + 1e-9))
    ys = np.arange(-m, m + 1) * grid_step
    zz = xs[:, None] + 1j * ys[None, :]
    zz = zz.ravel()
    return zz[_square_inner_distance(zz) > margin]


def coverage_report(q: float = 4.0, grid_step: float = 1e-3, margin: float = 1e-3,
                    max_listed: int = 50) -> Report:
    """Sampled check that the clipped union and its quarter turn cover the square.

    Also samples the plain disk union against the square, which leaves the
    regions near the corners ``1/2 +- i/2`` uncovered.
    """
    _check_q(q)
    if grid_step <= 0 or margin <= 0:
        raise ValueError("grid_step and margin must be positive")
    pts = square_grid(grid_step, margin)
    covered = OmegaQ(q).contains(pts) | OmegaQRotated(q).contains(pts)
    missing = pts[~covered]
    omega_missing = pts[~Omega().contains(pts)]
    rep = Report("coverage", params={"q": q, "grid_step": grid_step, "margin": margin})
    rep.values.update(
        points=int(pts.size),
        uncovered=int(missing.size),
        uncovered_points=[[float(p.real), float(p.imag)] for p in missing[:max_listed]],
        omega_alone_uncovered=int(omega_missing.size),
        omega_alone_example=[[float(p.real), float(p.imag)] for p in omega_missing[:5]],
        omega_alone_max_abs_imag_gap=float(np.max(np.abs(omega_missing.imag))) if omega_missing.size else 0.0,
    )
    rep.check("union_covers_square", missing.size == 0, f"{missing.size} of {pts.size} grid points uncovered")
    rep.check("omega_alone_is_smaller", omega_missing.size > 0,
              f"{omega_missing.size} grid points of the square lie outside the disk union")
    return rep


def radius_a_at_half(a: float) -> float:
    """Radius ``a / (2 sqrt(1 + a**2))`` of ``D^a_{1/2}``."""
    return a / (2.0 * math.sqrt(1.0 + a * a))


def omega_a_gap_check(a: float, samples: int = 20001) -> Report:
    """The widened union never reaches the corner ``1/2 + i/2``.

    Reports the radius at 1/2 and the topmost sampled point of the union on
    the vertical line ``Re z = 1/2``.
    """
    if not a >= 1.0:
        raise InvalidA(f"a must be >= 1, got {a}")
    r = radius_a_at_half(a)
    ys = np.linspace(0.0, 0.5, samples)
    inside = OmegaA(a).contains(0.5 + 1j * ys)
    top = float(ys[inside].max()) if inside.any() else 0.0
    rep = Report("omega_a_gap", params={"a": a})
    rep.values.update(radius_at_half=r, gap_lower_bound=0.5 - r, sampled_top=top)
    rep.check("radius_below_half", r < 0.5, f"r = {r!r}")
    rep.check("vertical_top_within_radius", top <= r + 1e-12, f"top sampled point {top} vs radius {r}")
    return rep


# ---------------------------------------------------------------------------
# boundary export


def boundary_polylines(d: Domain, resolution: int = 801) -> list[np.ndarray]:
    """Boundary components as closed complex polylines.

    Polygons and parametrised curves are exact; other domains go through
    marching squares on the membership grid of the bounding box.
    """
    poly = d.polygon()
    if poly is not None:
        return [np.append(poly, poly[0])]
    param = d.boundary_parametrization()
    if param is not None:
        return [param(np.linspace(0.0, 1.0, resolution))]
    from skimage.measure import find_contours

    x0, x1, y0, y1 = d.bbox
    pad = 0.02 * max(x1 - x0, y1 - y0)
    xs = np.linspace(x0 - pad, x1 + pad, resolution)
    ys = np.linspace(y0 - pad, y1 + pad, resolution)
    grid = d.contains(xs[:, None] + 1j * ys[None, :]).astype(float)
    out = []
    for c in find_contours(grid, 0.5):
        px = np.interp(c[:, 0], np.arange(resolution), xs)
        py = np.interp(c[:, 1], np.arange(resolution), ys)
        out.append(px + 1j * py)
    return out


def polylines_to_csv(lines: Sequence[np.ndarray]) -> str:
    """``x,y`` per vertex, one blank line between components."""
    blocks = []
    for line in lines:
        blocks.append("\n".join(f"{p.real:.10g},{p.imag:.10g}" for p in line))
    return "x,y\n" + "\n\n".join(blocks) + "\n"
