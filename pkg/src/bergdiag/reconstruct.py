"""Analytic continuation from jets on the two diagonals of the square.

Each grid point on a diagonal carries a truncated Taylor series (a chart).
A chart is trusted on a disk whose radius is the smaller of the disk about
that point inscribed in the square's corner and a shrunken root-test radius.
Charts on the same diagonal must agree where they overlap, and the two
diagonals must agree on their common germ at 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .ahs import DiagonalData, TabulatedJets, diagonal_point
from .errors import (CrossingMismatch, DegenerateJet, InconsistentOverlap, InvalidEps, OutsideAtlas,
                     SlowConvergence)
from .jets import FunctionExpr, Jet

SQRT2 = math.sqrt(2.0)
SAFETY = 0.8
OVERLAP_TOL = 1e-6
CROSSING_TOL = 1e-8
_ZERO = 1e-300


def radius_estimate(jet: Jet) -> float:
    """Root-test radius of convergence of a truncated series, in z units.

    A line is fitted to ``max(log|a_k|, n-3 <= k <= n)`` over the top half of
    the coefficients, so isolated small or zero coefficients do not pull the
    slope. A series whose upper half vanishes is treated as a
    polynomial (``inf``).

    >>> from bergdiag.jets import Pole
    >>> round(radius_estimate(Pole(2.0).jet(0.0, 64)), 6)
    2.0
    """
    a = np.abs(jet.coeffs)
    N = a.size - 1
    if N < 8:
        raise ValueError("radius estimate needs order >= 8")
    if np.all(a < _ZERO):
        raise DegenerateJet("all coefficients vanish")
    lo = N // 2
    if np.all(a[lo:] < _ZERO):
        return math.inf
    with np.errstate(divide="ignore"):
        la = np.log(np.where(a < _ZERO, 0.0, a))
    # trailing window maximum: bridges up to three consecutive zeros
    env = np.lib.stride_tricks.sliding_window_view(np.concatenate((np.full(3, -np.inf), la)), 4).max(axis=1)
    n = np.arange(lo, N + 1)
    slope = np.polyfit(n, env[lo:], 1)[0]
    return float(jet.scale * math.exp(-slope))


@dataclass(frozen=True)
class Chart:
    center: complex
    jet: Jet
    rho: float
    diagonal: str
    radius: float  # root-test estimate


@dataclass
class ExtensionAtlas:
    charts: list[Chart]
    crossing_jet: Jet | None
    overlap_discrepancy: float = 0.0
    crossing_discrepancy: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    def covering(self, z: complex) -> list[tuple[float, int]]:
        """``(|z - center|/rho, index)`` of every chart whose disk holds z, best first."""
        out = []
        for k, c in enumerate(self.charts):
            s = abs(z - c.center) / c.rho
            if s < 1.0:
                out.append((s, k))
        out.sort()
        return out


def _sum_series(chart: Chart, z: complex) -> complex:
    u = complex(z) - chart.center
    if chart.radius < math.inf and abs(u) / chart.radius >= 0.99:
        raise SlowConvergence(f"term ratio {abs(u) / chart.radius:.3f} at {z}")
    a = chart.jet.coeffs
    total = 0j
    p = 1.0 + 0j
    for n in range(a.size):
        term = a[n] * p
        total += term
        if n > 0 and abs(term) < 1e-14 * abs(total):
            break
        p *= u
    return total


def extend(atlas: ExtensionAtlas, z: complex, info: bool = False):
    """Value of the continuation at ``z`` from the best-placed chart.

    With ``info=True`` returns ``(value, details)`` where details name the
    chart used and, if a second chart covers z, the discrepancy between them.
    """
    z = complex(z)
    cover = atlas.covering(z)
    if not cover:
        raise OutsideAtlas(f"no chart covers {z}")
    best = atlas.charts[cover[0][1]]
    value = _sum_series(best, z)
    if not info:
        return value
    details = {"chart": cover[0][1], "center": best.center, "scaled_distance": cover[0][0],
               "discrepancy": math.nan}
    if len(cover) > 1:
        other = _sum_series(atlas.charts[cover[1][1]], z)
        details["discrepancy"] = abs(other - value) / max(abs(value), 1e-300)
    return value, details


def chebyshev_grid(n: int = 64) -> np.ndarray:
    """Chebyshev-Gauss points on (0, 1), dense toward both ends."""
    k = np.arange(n)
    return np.sort(0.5 * (1.0 - np.cos(np.pi * (k + 0.5) / n)))


def _diagonal_charts(src, diagonal: str, order: int, grid: np.ndarray) -> list[Chart]:
    if isinstance(src, TabulatedJets):
        t, rows = src.t, src.coeffs
    elif isinstance(src, FunctionExpr):
        t = np.asarray(grid, dtype=float)
        if np.any((t <= 0) | (t >= 1)):
            raise ValueError("grid points must lie strictly inside (0, 1)")
        rows = [src.jet(p, order).coeffs for p in diagonal_point(diagonal, t)]
    else:
        raise TypeError("diagonal source must be a FunctionExpr or TabulatedJets")
    charts = []
    for tk, p, a in zip(t, diagonal_point(diagonal, t), rows):
        jet = Jet(p, a)
        R = radius_estimate(jet)
        d = min(tk, 1.0 - tk)
        charts.append(Chart(complex(p), jet, min(SAFETY * R, d / SQRT2), diagonal, R))
    return charts


def _overlap_check(charts: list[Chart]) -> float:
    """Largest relative disagreement of neighbouring charts at their midpoints."""
    worst = 0.0
    for a, b in zip(charts, charts[1:]):
        if abs(a.center - b.center) >= 0.5 * min(a.rho, b.rho):
            continue
        mid = 0.5 * (a.center + b.center)
        va, vb = _sum_series(a, mid), _sum_series(b, mid)
        worst = max(worst, abs(va - vb) / max(abs(va), abs(vb), 1e-300))
    return worst


def _jet_at_half(charts: list[Chart], order: int) -> Jet | None:
    """Jet at 1/2 from the chart nearest to it, re-expanded if needed."""
    if not charts:
        return None
    c = min(charts, key=lambda ch: abs(ch.center - 0.5) / ch.rho)
    if abs(c.center - 0.5) >= c.rho:
        return None
    if c.center == 0.5:
        return c.jet
    return c.jet.recenter(0.5, order)


def jet_discrepancy(a: Jet, b: Jet, scale: float) -> float:
    """``max_n |a_n - b_n| s**n / max_n |a_n| s**n`` over the lower half of the orders."""
    n = min(a.order, b.order) // 2 + 1
    w = scale ** np.arange(n)
    diff = np.max(np.abs(a.coeffs[:n] - b.coeffs[:n]) * w)
    ref = max(np.max(np.abs(a.coeffs[:n]) * w), np.max(np.abs(b.coeffs[:n]) * w), 1e-300)
    return float(diff / ref)


def build_atlas(data, order: int = 64, grid=None) -> ExtensionAtlas:
    """Charts on both diagonals, checked for overlap and crossing consistency.

    Raises:
        InconsistentOverlap: neighbouring charts on one diagonal disagree by
            more than 1e-6 (relative); the data cannot be the trace of one
            holomorphic function.
        CrossingMismatch: the germs at 1/2 built from the two diagonals
            differ by more than 1e-8 (scaled coefficient comparison).
    """
    if order < 8:
        raise ValueError("order must be at least 8")
    if isinstance(data, FunctionExpr):
        data = DiagonalData.of(data)
    grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
    per_diag = {}
    overlap = 0.0
    for diagonal in ("horizontal", "vertical"):
        src = data.horizontal if diagonal == "horizontal" else data.vertical
        if src is None:
            per_diag[diagonal] = []
            continue
        charts = _diagonal_charts(data.source(diagonal), diagonal, order, grid)
        charts.sort(key=lambda c: (c.center.real, c.center.imag))
        worst = _overlap_check(charts)
        if worst > OVERLAP_TOL:
            raise InconsistentOverlap(f"{diagonal} charts disagree by {worst:.3g} at an overlap")
        overlap = max(overlap, worst)
        per_diag[diagonal] = charts

    jh = _jet_at_half(per_diag["horizontal"], order)
    jv = _jet_at_half(per_diag["vertical"], order)
    crossing, mismatch = None, math.nan
    if jh is not None and jv is not None:
        mismatch = jet_discrepancy(jh, jv, 0.25 / SQRT2)
        if mismatch > CROSSING_TOL:
            raise CrossingMismatch(f"diagonal germs at 1/2 differ by {mismatch:.3g}")
        n = min(jh.order, jv.order)
        crossing = Jet(0.5, 0.5 * (jh.coeffs[: n + 1] + jv.coeffs[: n + 1]))
    else:
        crossing = jh if jh is not None else jv

    charts = [c for c in per_diag["horizontal"] + per_diag["vertical"] if c.center != 0.5]
    if crossing is not None and any(c.center == 0.5 for c in per_diag["horizontal"] + per_diag["vertical"]):
        R = radius_estimate(crossing)
        charts.append(Chart(0.5 + 0j, crossing, min(SAFETY * R, 0.5 / SQRT2), "crossing", R))
    return ExtensionAtlas(charts, crossing, overlap, mismatch,
                          {"order": order, "charts": len(charts), "safety": SAFETY})


def taylor_remainder_bound(x0: float, eps: float, gamma_seq) -> np.ndarray:
    """Per-n bounds ``factor(n) * gamma_n`` on the squared Taylor remainder.

    ``factor(n) = eps**(2n) (2n+3)! / ((n!)**2 (x0-eps)**(2n+3) 2**(n+1))``,
    evaluated in logs. Its ratio tends to ``2 eps**2/(x0-eps)**2``, which is
    below 1 exactly when ``eps < x0/(sqrt 2 + 1)``.
    """
    if not 0.0 < eps < x0:
        raise InvalidEps(f"need 0 < eps < x0, got eps = {eps}, x0 = {x0}")
    g = np.asarray(gamma_seq, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma_seq must be non-negative")
    n = np.arange(g.size, dtype=float)
    log_factor = (2 * n * math.log(eps) + gammaln(2 * n + 4) - 2 * gammaln(n + 1)
                  - (2 * n + 3) * math.log(x0 - eps) - (n + 1) * math.log(2.0))
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(g > 0, np.exp(log_factor + np.log(np.where(g > 0, g, 1.0))), 0.0)
    return out
