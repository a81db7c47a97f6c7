"""Derivative series on the half-line and on the diagonals of the square.

For a point ``p`` with disk radius ``d / sqrt 2`` the basic quantity is the
pointwise sum

    S(p, d) = d * sum_n w_n |ghat_n|**2,    ghat_n = (d/sqrt 2)**n f^(n)(p)/n!

which is ``d`` times the weighted disk norm of ``u -> f(p + d u/sqrt 2)``.
On the half-line ``p = d = x`` and ``x * w_n |ghat_n|**2`` regroups to
``c_n x**(2n+1) |f^(n)(x)|**2``. On a diagonal of the square the point moves
along the diagonal and ``d`` is the distance to the nearer end.

The n-sum is done first at every x-node (one jet gives every n), then the
x-integral by composite Gauss-Legendre panels.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import OutsideRange, SeriesNotConverged, SingularityTooClose
from .geometry import _check_q, disk_roots
from .jets import FunctionExpr, distance_to_singularities
from .quadrature import gauss_legendre01, sector_tail_bound
from .special import coefficient_table

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AhsConfig:
    n_max: int = 2**20
    tail_ratio_window: int = 5
    tail_ratio_tol: float = 0.9
    x_quadrature_order: int = 16
    x_panels: int = 32
    tail_rel: float = 1e-10
    strict: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if not 0.0 < self.tail_ratio_tol < 1.0:
            raise ValueError("tail_ratio_tol must lie in (0, 1)")
        if self.tail_ratio_window < 1:
            raise ValueError("tail_ratio_window must be positive")
        if self.x_quadrature_order < 2 or self.x_quadrature_order % 2:
            raise ValueError("x_quadrature_order must be an even integer >= 2")
        if self.x_panels < 2:
            raise ValueError("x_panels must be at least 2")


@dataclass
class AhsResult:
    value: float
    per_n_terms: np.ndarray
    truncation_flag: bool
    n_used: int
    error_budget: float = 0.0
    nodes: list[dict] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "n_used": self.n_used, "per_n_terms": self.per_n_terms.tolist(),
                "error_budget": self.error_budget, "truncation_flag": self.truncation_flag}


# ---------------------------------------------------------------------------
# diagonal data


@dataclass(frozen=True)
class TabulatedJets:
    """Taylor coefficients ``f^(n)(p)/n!`` at points ``p`` of one diagonal.

    ``t`` parametrizes the diagonal on ``(0, 1)``: ``p = t`` on the horizontal
    one and ``p = 1/2 + i (t - 1/2)`` on the vertical one. Coefficients are the
    complex-derivative ones in both cases.
    """

    diagonal: str
    t: np.ndarray
    coeffs: np.ndarray  # shape (len(t), order + 1)

    def __post_init__(self):
        if self.diagonal not in ("horizontal", "vertical"):
            raise ValueError("diagonal must be 'horizontal' or 'vertical'")
        t = np.asarray(self.t, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != t.size:
            raise ValueError("coeffs must have one row per grid point")
        if np.any((t <= 0.0) | (t >= 1.0)):
            raise ValueError("grid points must lie strictly inside the open diagonal")
        order = np.argsort(t, kind="stable")
        object.__setattr__(self, "t", t[order])
        object.__setattr__(self, "coeffs", c[order])

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    def points(self) -> np.ndarray:
        return diagonal_point(self.diagonal, self.t)

    @classmethod
    def from_function(cls, f: FunctionExpr, diagonal: str, t, order: int) -> "TabulatedJets":
        t = np.asarray(t, dtype=float)
        pts = diagonal_point(diagonal, t)
        return cls(diagonal, t, np.array([f.jet(p, order).coeffs for p in pts]))

    def to_json(self) -> str:
        pts = [{"t": float(tk), "coeffs": [[float(c.real), float(c.imag)] for c in row]}
               for tk, row in zip(self.t, self.coeffs)]
        return json.dumps({"diagonal": self.diagonal, "points": pts}, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TabulatedJets":
        obj = json.loads(text)
        t = [p["t"] for p in obj["points"]]
        coeffs = [[complex(re, im) for re, im in p["coeffs"]] for p in obj["points"]]
        return cls(obj["diagonal"], np.array(t), np.array(coeffs))


Source = Union[FunctionExpr, TabulatedJets]


@dataclass(frozen=True)
class DiagonalData:
    """What is known on the two diagonals: a function or tabulated jets each."""

    horizontal: Source
    vertical: Source | None = None

    @classmethod
    def of(cls, f: FunctionExpr) -> "DiagonalData":
        return cls(f, f)

    def source(self, diagonal: str) -> Source:
        src = self.horizontal if diagonal == "horizontal" else self.vertical
        if src is None:
            raise ValueError(f"no data on the {diagonal} diagonal")
        if isinstance(src, TabulatedJets) and src.diagonal != diagonal:
            raise ValueError(f"jets tabulated on the {src.diagonal} diagonal supplied for the {diagonal} one")
        return src


def diagonal_point(diagonal: str, t):
    t = np.asarray(t, dtype=float)
    if diagonal == "horizontal":
        return t.astype(complex)
    if diagonal == "vertical":
        return 0.5 + 1j * (t - 0.5)
    raise ValueError("diagonal must be 'horizontal' or 'vertical'")


# ---------------------------------------------------------------------------
# the pointwise series


@dataclass(frozen=True)
class PointSum:
    value: float
    terms: np.ndarray  # w_n |ghat_n|**2, without the factor d
    converged: bool
    tail: float  # geometric estimate of the omitted terms (with factor d)
    ratio: float  # largest term ratio in the final window


def truncation_point(terms: np.ndarray, window: int, tol: float, tail_rel: float):
    """First ``m`` such that ``terms[:m]`` may be summed with a geometric tail.

    Each step ratio is the square root of the ratio to the larger of the two
    preceding terms, so series with every other coefficient zero are handled
    and monotone series keep their one-step ratio. Returns
    ``(m, tail_estimate, window_ratio)`` or None.
    """
    t = np.asarray(terms, dtype=float)
    if t.size < window + 2:
        return None
    prev = np.maximum(t[:-1], np.concatenate(([0.0], t[:-2])))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt(np.where(prev > 0, t[1:] / np.where(prev > 0, prev, 1.0),
                                 np.where(t[1:] > 0, np.inf, 0.0)))
    # ratio[k] compares term k+1 to its predecessors
    win = np.lib.stride_tricks.sliding_window_view(ratio, window).max(axis=1)
    ends = np.arange(window, ratio.size + 1)  # window ratio[k-window:k] -> sum terms[:k+1]
    r = win
    env = np.maximum(t[ends], t[ends - 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(r > 0, env * r / (1.0 - r), 0.0)
    partial = np.cumsum(t)[ends]
    ok = (r <= tol) & (tail <= tail_rel * partial)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return None
    i = hits[0]
    return int(ends[i] + 1), float(tail[i]), float(r[i])


def _initial_order(f: FunctionExpr, p: complex, rho: float, cfg: AhsConfig) -> int:
    dist = float(distance_to_singularities(f, p))
    if not math.isfinite(dist):
        return min(cfg.n_max, 64)
    r = (rho / dist) ** 2
    if r >= 1.0:
        return cfg.n_max
    need = (math.log(1.0 / cfg.tail_rel) + 12.0) / -math.log(r)
    return int(min(cfg.n_max, max(64, 1.25 * need + cfg.tail_ratio_window + 8)))


def point_sum(src: Source, p: complex, d: float, cfg: AhsConfig, row: int | None = None) -> PointSum:
    """``S(p, d)`` for a function (adaptive order) or a tabulated jet row."""
    rho = d / SQRT2
    K, tol = cfg.tail_ratio_window, cfg.tail_ratio_tol
    if isinstance(src, TabulatedJets):
        a = src.coeffs[row]
        n = np.arange(a.size)
        with np.errstate(divide="ignore"):
            log_t = 2.0 * np.log(np.abs(a)) + n * math.log(rho * rho) + coefficient_table(a.size).log_w[: a.size]
        terms = np.exp(log_t)
        hit = truncation_point(terms, K, tol, cfg.tail_rel)
        if hit is None:
            if cfg.strict:
                raise SeriesNotConverged(f"tabulated jet at {p} (order {src.order}) does not meet the tail rule")
            return PointSum(d * math.fsum(terms), terms, False, math.nan, math.nan)
        m, tail, r = hit
        return PointSum(d * math.fsum(terms[:m]), terms[:m], True, d * tail, r)

    order = _initial_order(src, p, rho, cfg)
    while True:
        try:
            ghat = src.jet(p, order, scale=rho).coeffs
        except SingularityTooClose as exc:
            raise SeriesNotConverged(str(exc)) from exc
        w = coefficient_table(order).w[: order + 1]
        terms = w * (ghat.real**2 + ghat.imag**2)
        hit = truncation_point(terms, K, tol, cfg.tail_rel)
        if hit is not None:
            m, tail, r = hit
            return PointSum(d * math.fsum(terms[:m]), terms[:m], True, d * tail, r)
        if order >= cfg.n_max:
            if cfg.strict:
                raise SeriesNotConverged(
                    f"terms at {p} (radius {rho:.3g}) do not settle below ratio {tol} within n_max = {cfg.n_max}")
            return PointSum(d * math.fsum(terms), terms, False, math.nan, math.nan)
        order = min(cfg.n_max, 4 * order)


def ghat(f: FunctionExpr, x: float, n: int) -> complex:
    """``(x/sqrt 2)**n f^(n)(x)/n!``, the n-th coefficient of f on the disk about x.

    >>> from bergdiag.jets import z
    >>> abs(ghat(z, 0.5, 1) - 0.5 / 2**0.5) < 1e-15
    True
    """
    if not x > 0:
        raise ValueError("x must be positive")
    return complex(f.jet(complex(x), n, scale=x / SQRT2).coeffs[n])


def ahs_pointwise(f: FunctionExpr, x: float, cfg: AhsConfig = AhsConfig()) -> float:
    """``x * sum_n w_n |ghat_n|**2`` at a point of the half-line."""
    if not x > 0:
        raise ValueError("x must be positive")
    return point_sum(f, complex(x), x, cfg).value


# ---------------------------------------------------------------------------
# panels


def _geometric_edges(lo: float, hi: float, n: int, toward_lo: bool) -> np.ndarray:
    """``n`` panels on [lo, hi], halving in length toward one end."""
    L = hi - lo
    inner = L * 0.5 ** np.arange(n - 1, 0, -1)  # offsets from the graded end
    offs = np.concatenate(([0.0], inner, [L]))
    return lo + offs if toward_lo else hi - offs[::-1]


def halfline_panels(x_max: float, cfg: AhsConfig) -> np.ndarray:
    return _geometric_edges(0.0, x_max, cfg.x_panels, toward_lo=True)


def diagonal_half_panels(cfg: AhsConfig) -> np.ndarray:
    """Edges on (0, 1/2): half graded toward 0, half toward 1/2."""
    m = cfg.x_panels // 2
    left = _geometric_edges(0.0, 0.25, m, toward_lo=True)
    right = _geometric_edges(0.25, 0.5, cfg.x_panels - m, toward_lo=False)
    return np.concatenate((left, right[1:]))


def panel_nodes(edges: np.ndarray, order: int):
    xg, wg = gauss_legendre01(order)
    h = np.diff(edges)
    x = (edges[:-1, None] + h[:, None] * xg[None, :]).ravel()
    w = (h[:, None] * wg[None, :]).ravel()
    return x, w


def diagonal_nodes(cfg: AhsConfig = AhsConfig()):
    """Parameters ``t`` in (0, 1) and weights of the diagonal rule, mirrored about 1/2.

    Tabulating jets at these ``t`` lets tabulated data use the Gauss rule.
    """
    x, w = panel_nodes(diagonal_half_panels(cfg), cfg.x_quadrature_order)
    t = np.concatenate((x, 1.0 - x[::-1]))
    return t, np.concatenate((w, w[::-1]))


# ---------------------------------------------------------------------------
# integrals


@dataclass
class _Node:
    t: float
    point: complex
    d: float
    weight: float


def _evaluate(src: Source, nodes: Sequence[_Node], cfg: AhsConfig, rows=None) -> list[PointSum]:
    rows = rows if rows is not None else [None] * len(nodes)

    def one(k):
        nd = nodes[k]
        return point_sum(src, nd.point, nd.d, cfg, rows[k])

    if cfg.threads > 1 and len(nodes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(one, range(len(nodes))))
    return [one(k) for k in range(len(nodes))]


def _assemble(parts: list[tuple[list[_Node], list[PointSum]]], quad_err: float, extra_err: float = 0.0,
              label: str = "") -> AhsResult:
    n_len = max((ps.terms.size for _, sums in parts for ps in sums), default=1)
    per_n = np.zeros(n_len)
    values, rows = [], []
    converged = True
    tail = 0.0
    for nodes, sums in parts:
        for nd, ps in zip(nodes, sums):
            per_n[: ps.terms.size] += nd.weight * nd.d * ps.terms
            values.append(nd.weight * ps.value)
            converged &= ps.converged
            if ps.converged:
                tail += nd.weight * ps.tail
            rows.append({"diagonal": label, "t": nd.t, "re": nd.point.real, "im": nd.point.imag, "d": nd.d,
                         "weight": nd.weight, "pointwise": ps.value, "n_used": ps.terms.size,
                         "tail_ratio": ps.ratio, "converged": ps.converged})
    nz = np.flatnonzero(per_n)
    n_used = int(nz[-1]) + 1 if nz.size else 1
    return AhsResult(math.fsum(values), per_n[:n_used], bool(converged), n_used,
                     quad_err + tail + extra_err, rows)


def _function_nodes(diagonal: str, x: np.ndarray, w: np.ndarray, side: str) -> list[_Node]:
    """Nodes at distance x from the ``side`` end of a diagonal (weights carry along)."""
    t = x if side == "low" else 1.0 - x
    pts = diagonal_point(diagonal, t)
    return [_Node(float(tk), complex(pk), float(xk), float(wk)) for tk, pk, xk, wk in zip(t, pts, x, w)]


def _diagonal_sum(src: Source, diagonal: str, cfg: AhsConfig):
    """Both halves of one diagonal; returns (parts, quadrature error estimate)."""
    if isinstance(src, TabulatedJets):
        return _tabulated_sum(src, cfg)
    edges = diagonal_half_panels(cfg)
    p = cfg.x_quadrature_order
    x, w = panel_nodes(edges, p)
    xh, wh = panel_nodes(edges, p // 2)
    parts, fine, coarse = [], 0.0, 0.0
    for side in ("low", "high"):
        nodes = _function_nodes(diagonal, x, w, side)
        sums = _evaluate(src, nodes, cfg)
        parts.append((nodes, sums))
        fine += math.fsum(nd.weight * s.value for nd, s in zip(nodes, sums))
        cnodes = _function_nodes(diagonal, xh, wh, side)
        coarse += math.fsum(nd.weight * s.value for nd, s in zip(cnodes, _evaluate(src, cnodes, cfg)))
    return parts, abs(fine - coarse)


def _tabulated_sum(src: TabulatedJets, cfg: AhsConfig):
    t = src.t
    d = np.minimum(t, 1.0 - t)
    tg, wg = diagonal_nodes(cfg)
    if t.size == tg.size and np.allclose(t, tg, rtol=0, atol=1e-14):
        w = wg
        err = math.nan  # no embedded rule on user grids
    else:
        # trapezoid with the integrand vanishing at both ends of the diagonal
        grid = np.concatenate(([0.0], t, [1.0]))
        w = 0.5 * (grid[2:] - grid[:-2])
        err = math.nan
    pts = src.points()
    nodes = [_Node(float(tk), complex(pk), float(dk), float(wk)) for tk, pk, dk, wk in zip(t, pts, d, w)]
    sums = _evaluate(src, nodes, cfg, rows=list(range(t.size)))
    return [(nodes, sums)], err


def ahs_halfline(f: FunctionExpr, x_max: float, cfg: AhsConfig = AhsConfig()) -> AhsResult:
    """``sum_n c_n int_0^x_max x**(2n+1) |f^(n)(x)|**2 dx`` via pointwise sums.

    The error budget adds the difference to the half-order Gauss rule on
    the same panels and the estimated series tails; it does not include the
    part of the half-line beyond ``x_max``.
    """
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    edges = halfline_panels(x_max, cfg)
    p = cfg.x_quadrature_order
    x, w = panel_nodes(edges, p)
    nodes = [_Node(float(xk), complex(xk), float(xk), float(wk)) for xk, wk in zip(x, w)]
    sums = _evaluate(f, nodes, cfg)
    xh, wh = panel_nodes(edges, p // 2)
    cnodes = [_Node(float(xk), complex(xk), float(xk), float(wk)) for xk, wk in zip(xh, wh)]
    coarse = math.fsum(nd.weight * s.value for nd, s in zip(cnodes, _evaluate(f, cnodes, cfg)))
    fine = math.fsum(nd.weight * s.value for nd, s in zip(nodes, sums))
    return _assemble([(nodes, sums)], abs(fine - coarse), label="halfline")


def halfline_tail_bound(f: FunctionExpr, x_max: float) -> float:
    """Bound for the half-line integral beyond ``x_max``.

    Every disk about ``x > x_max`` lies outside ``|z| = x_max (1 - 1/sqrt 2)``
    and the kernel integrates to at most 1 in x, so the omitted part is at
    most the sector norm outside that radius.
    """
    return sector_tail_bound(f, x_max * (1.0 - 1.0 / SQRT2))


def _as_data(data) -> DiagonalData:
    return data if isinstance(data, DiagonalData) else DiagonalData.of(data)


def ahs_one_diagonal(f_data, cfg: AhsConfig = AhsConfig()) -> AhsResult:
    """Interval sum over the horizontal diagonal (0, 1).

    Accepts a ``DiagonalData`` or a bare ``FunctionExpr``.
    """
    data = _as_data(f_data)
    parts, err = _diagonal_sum(data.source("horizontal"), "horizontal", cfg)
    res = _assemble(parts, 0.0 if math.isnan(err) else err, label="horizontal")
    if math.isnan(err):
        res.error_budget = math.nan
    return res


def ahs_two_diagonals(f_data, cfg: AhsConfig = AhsConfig()) -> AhsResult:
    """Sum over both diagonals; the vertical one uses complex derivatives."""
    data = _as_data(f_data)
    ph, eh = _diagonal_sum(data.source("horizontal"), "horizontal", cfg)
    pv, ev = _diagonal_sum(data.source("vertical"), "vertical", cfg)
    h = _assemble(ph, 0.0, label="horizontal")
    v = _assemble(pv, 0.0, label="vertical")
    n = max(h.per_n_terms.size, v.per_n_terms.size)
    per_n = np.zeros(n)
    per_n[: h.per_n_terms.size] += h.per_n_terms
    per_n[: v.per_n_terms.size] += v.per_n_terms
    err = eh + ev + h.error_budget + v.error_budget
    return AhsResult(math.fsum([h.value, v.value]), per_n, h.truncation_flag and v.truncation_flag,
                     n, err, h.nodes + v.nodes)


# ---------------------------------------------------------------------------
# lower-bound margin


def ellipse_point(a: float, q: float) -> complex:
    """Upper point of the ellipse boundary ``q (x-1/2)**2 + (16-q) y**2 = 1`` above ``a``."""
    _check_q(q, upper=16.0)
    b2 = (1.0 - q * (a - 0.5) ** 2) / (16.0 - q)
    if b2 < 0:
        raise OutsideRange(f"no ellipse point above a = {a}")
    return complex(a, math.sqrt(b2))


def prop2_margin(z: complex, q: float) -> float:
    """``(1/2 - x1) / sqrt(2 (a**2 - b**2))`` for ``z = a + ib``.

    The value is ``y(1/2) + 1`` where ``y`` maps the root interval of ``z``
    affinely onto [-1, 1]; positive values mean x = 1/2 lies beyond the
    left root. At ``a = 1/4`` it equals 1 identically (limit at the corner).

    Raises:
        OutsideRange: ``Re z`` outside [1/4, 1/2), z outside the closed
            sector or outside the closed ellipse for ``q``.
    """
    _check_q(q)
    z = complex(z)
    a, b = z.real, abs(z.imag)
    if not 0.25 <= a < 0.5:
        raise OutsideRange(f"Re z = {a} outside [1/4, 1/2)")
    if b > a:
        raise OutsideRange(f"{z} is outside the sector")
    if q * (a - 0.5) ** 2 + (16.0 - q) * b * b > 1.0 + 1e-12:
        raise OutsideRange(f"{z} is outside the ellipse for q = {q}")
    if a == 0.25:
        return 1.0
    t = math.sqrt(2.0 * (a * a - b * b))
    if t == 0.0:
        raise OutsideRange(f"{z} is on the sector boundary")
    x1 = disk_roots(z).x1 if b < a else 2 * a - t
    return (0.5 - x1) / t


def margin_profile(q: float, samples: int = 10_000, delta_min: float = 1e-9):
    """Margins at ellipse points with ``a`` from ``1/4 + delta_min`` to just below 1/2."""
    a = 0.25 + np.geomspace(delta_min, 0.25 - 1e-9, samples)
    a = a[a < 0.5]
    m = np.array([prop2_margin(ellipse_point(ak, q), q) for ak in a])
    return a, m
