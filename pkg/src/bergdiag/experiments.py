"""Experiment drivers: each builds a :class:`Report` with values and checks."""
from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import geometry
from .ahs import (AhsConfig, DiagonalData, ahs_halfline, ahs_one_diagonal, ahs_two_diagonals, ellipse_point,
                  halfline_tail_bound, margin_profile, prop2_margin)
from .errors import CrossingMismatch, InconsistentOverlap, OutsideAtlas, UnknownExperiment
from .geometry import Omega, OmegaQ, OmegaQRotated, Sector, SquareD, Union
from .jets import Pole, parse, to_text, z
from .quadrature import (QuadConfig, bergman_norm_sq, kernel_line_integral, kernel_line_integral_quad,
                         sector_tail_bound, truncated_norm_sq, truncation_for_tail, weighted_disk_norm_sq)
from .reconstruct import build_atlas, chebyshev_grid, extend
from .report import Report
from .special import GAMMA_3_2, asymptotic_ratio, coefficient_table, weight_w

SQRT2 = math.sqrt(2.0)
Z0 = complex(0.5, 1.0 / (2.0 * SQRT2))

#: polynomials of degree <= 4 and poles outside the closed square
FAMILY = (
    "const 1",
    "z",
    "poly -0.5 1",
    "poly 0 0 1",
    "poly 0.25 -1 1",
    "poly 0 0 0 1",
    "poly 1 -2 0 0 1",
    "pole 2 1",
    "pole -1 2",
    "pole 1+1i 1",
    "pole 0.5+1i 1",
    "pole 2 2",
)

DOMAIN_NAMES = ("sector", "square", "omega", "omega_a", "ellipse", "omega_q", "omega_q_rotated", "union")

EXPERIMENTS = ("verify-ahs", "counterexample", "equivalence", "coverage", "margin", "reconstruct",
               "domain-export", "parseval", "coefficients")


@dataclass
class ExperimentSpec:
    name: str
    function: str | None = None
    q: float = 4.0
    n_max: int = 2**20
    eps: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    xmax: float = 50.0
    step: float = 1e-3
    margin: float = 1e-3
    seed: int = 12345
    samples: int = 1000
    order: int = 64
    grid_points: int = 64
    domain: str = "omega_q"
    a: float = 2.0
    resolution: int = 801
    abs_tol: float = 1e-10
    rel_tol: float = 1e-6
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise UnknownExperiment(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")

    def params(self) -> dict:
        p = asdict(self)
        p["eps"] = list(self.eps)
        return p

    def ahs_config(self, **kw) -> AhsConfig:
        return AhsConfig(n_max=self.n_max, threads=self.threads, **kw)

    def quad_config(self, **kw) -> QuadConfig:
        base = {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol}
        base.update(kw)
        return QuadConfig(**base)


def run(spec: ExperimentSpec) -> Report:
    fn = _REGISTRY.get(spec.name)
    if fn is None:  # pragma: no cover - guarded by ExperimentSpec
        raise UnknownExperiment(spec.name)
    report = Report(spec.name, params=spec.params())
    fn(spec, report)
    return report


# ---------------------------------------------------------------------------


def verify_ahs(spec: ExperimentSpec, rep: Report) -> None:
    """Half-line series against the sector norm, truncated and then with tails."""
    f = parse(spec.function or "pole -1 2")
    cfg = spec.ahs_config()
    lhs = ahs_halfline(f, spec.xmax, cfg)
    rhs = bergman_norm_sq(f, Sector(spec.xmax), spec.quad_config())
    gap = abs(lhs.value - rhs.value) / abs(lhs.value)
    rep.values.update({"lhs": lhs.value, "rhs": rhs.value, "relative_gap": gap, "lhs_n_used": lhs.n_used,
                       "lhs_error_budget": lhs.error_budget, "rhs_error_estimate": rhs.error_estimate})
    rep.check("truncated_agreement", gap < 0.01, f"relative gap {gap:.3g} at x_max = {spec.xmax}")

    # both sides over the whole sector, truncated where the tails are provably small
    try:
        gaps = {}
        for label, tail_tol, qtol in (("loose", 1e-3, 1e-6), ("tight", 1e-6, 1e-10)):
            X = truncation_for_tail(f, tail_tol) / (1.0 - 1.0 / SQRT2)
            a = ahs_halfline(f, X, cfg).value
            b = bergman_norm_sq(f, Sector(X), QuadConfig(abs_tol=qtol, rel_tol=qtol)).value
            gaps[label] = abs(a - b)
            rep.values[f"{label}_truncation"] = X
            rep.values[f"{label}_gap"] = gaps[label]
            rep.values[f"{label}_tail_bounds"] = [halfline_tail_bound(f, X), sector_tail_bound(f, X)]
        rep.check("tightening_halves_gap", gaps["tight"] <= 0.5 * gaps["loose"],
                  f"gap {gaps['loose']:.3g} -> {gaps['tight']:.3g}")
    except TypeError:
        rep.values["tightening"] = "skipped: tail bound needs a sum of scaled poles"


def counterexample(spec: ExperimentSpec, rep: Report) -> None:
    f = Pole(Z0, 1)
    cfg = spec.ahs_config(tail_ratio_tol=0.99999, x_panels=16)
    res = ahs_one_diagonal(f, cfg)
    x = np.array([n["d"] for n in res.nodes])
    ratio = np.array([n["tail_ratio"] for n in res.nodes])
    rep.values.update({"ahs_one_diagonal": res.value, "error_budget": res.error_budget, "n_used": res.n_used,
                       "max_ratio_over_2x": float(np.max(ratio / (2 * x)))})
    rep.check("series_converges", res.truncation_flag and math.isfinite(res.value),
              f"value {res.value:.6g}, largest n {res.n_used}")
    rep.check("ratio_below_2x", bool(np.all(ratio <= 2 * x)), "term ratio at every node <= 2x")
    cfgq = spec.quad_config(rel_tol=max(spec.rel_tol, 1e-5))
    prev = -math.inf
    increasing = True
    for eps in sorted(spec.eps, reverse=True):
        r = truncated_norm_sq(f, Omega(), geometry.Disk(Z0, eps), cfgq)
        bound = 0.5 * math.pi * math.log(1.0 / (4.0 * eps))
        rep.rows.append({"eps": eps, "truncated_norm": r.value, "error_estimate": r.error_estimate,
                         "stolz_bound": bound})
        rep.check(f"stolz_bound_eps_{eps:g}", r.value - r.error_estimate >= bound,
                  f"{r.value:.6g} >= {bound:.6g}")
        increasing &= r.value - r.error_estimate > prev
        prev = r.value + r.error_estimate
    if len(spec.eps) > 1:
        rep.check("norm_increasing", increasing, "truncated norm grows as eps shrinks")


def equivalence(spec: ExperimentSpec, rep: Report) -> None:
    """One- and two-diagonal sums against the domain norms over a function family."""
    texts = [spec.function] if spec.function else list(FAMILY)
    cfg = spec.ahs_config()
    qcfg = spec.quad_config()
    ratios = []
    worst_slack = math.inf
    for text in texts:
        f = parse(text)
        one = ahs_one_diagonal(f, cfg)
        two = ahs_two_diagonals(f, cfg)
        nD = bergman_norm_sq(f, SquareD(), qcfg)
        nO = bergman_norm_sq(f, Omega(), qcfg)
        budget = one.error_budget + 2 * nO.error_estimate
        slack = 2 * nO.value - one.value
        worst_slack = min(worst_slack, slack + budget)
        ratio = two.value / nD.value
        ratios.append(ratio)
        rep.rows.append({"function": to_text(f), "one_diagonal": one.value, "two_diagonals": two.value,
                         "norm_omega": nO.value, "norm_square": nD.value, "one_diagonal_slack": slack,
                         "error_budget": budget, "ratio_two_over_square": ratio})
        rep.check(f"one_diagonal_bound[{text}]", one.value <= 2 * nO.value + budget, f"slack {slack:.3g}")
        rep.check(f"omega_in_square[{text}]", nO.value <= nD.value + nO.error_estimate + nD.error_estimate)
        if text == "const 1":
            rep.check("constant_exact", abs(two.value - 0.5) <= 1e-10 and abs(nD.value - 0.5) <= 1e-10,
                      f"two diagonals {two.value!r}, square {nD.value!r}")
    r_min, r_max = min(ratios), max(ratios)
    rep.values.update({"ratio_min": r_min, "ratio_max": r_max, "functions": len(texts),
                       "min_one_diagonal_slack_with_budget": worst_slack})
    rep.check("band_lower", r_min > 0.05, f"r_min = {r_min:.6g}")
    rep.check("band_upper", r_max <= 4 + 1e-2, f"r_max = {r_max:.6g}")


def coverage(spec: ExperimentSpec, rep: Report) -> None:
    sub = geometry.coverage_report(spec.q, spec.step, spec.margin)
    rep.values.update(sub.values)
    rep.checks.extend(sub.checks)


def margin(spec: ExperimentSpec, rep: Report) -> None:
    q = spec.q
    for delta in (1e-2, 1e-3, 1e-4, 1e-6):
        m = prop2_margin(ellipse_point(0.25 + delta, q), q)
        rep.rows.append({"delta": delta, "margin": m})
        if delta <= 1e-3:
            rep.check(f"margin_delta_{delta:g}", m > 0.9, f"{m:.6g}")
    a, m = margin_profile(q, spec.samples if spec.samples >= 100 else 10_000)
    rep.values.update({"profile_points": int(a.size), "margin_infimum": float(m.min()),
                       "argmin_a": float(a[np.argmin(m)]), "limit_at_quarter": prop2_margin(0.25 + 0.25j, q)})
    rep.check("margin_positive", float(m.min()) > 0.0, f"infimum {m.min():.6g}")


def random_points(d, count: int, rng: np.random.Generator) -> np.ndarray:
    x0, x1, y0, y1 = d.bbox
    out = []
    while sum(len(o) for o in out) < count:
        w = rng.uniform(x0, x1, 4 * count) + 1j * rng.uniform(y0, y1, 4 * count)
        out.append(w[d.contains(w)])
    return np.concatenate(out)[:count]


def reconstruct(spec: ExperimentSpec, rep: Report) -> None:
    f = parse(spec.function or "pole 2 1")
    atlas = build_atlas(f, spec.order, chebyshev_grid(spec.grid_points))
    region = Union((OmegaQ(spec.q), OmegaQRotated(spec.q)))
    pts = random_points(region, spec.samples, np.random.default_rng(spec.seed))
    errs, missed = [], 0
    for w in pts:
        try:
            v = extend(atlas, w)
        except OutsideAtlas:
            missed += 1
            continue
        exact = complex(f(np.array([w]))[0])
        errs.append(abs(v - exact) / max(abs(exact), 1e-300))
    covered = 1.0 - missed / len(pts)
    max_err = max(errs) if errs else math.nan
    rep.values.update({"charts": len(atlas.charts), "overlap_discrepancy": atlas.overlap_discrepancy,
                       "crossing_discrepancy": atlas.crossing_discrepancy, "points": len(pts),
                       "outside_atlas": missed, "covered_fraction": covered, "max_relative_error": max_err})
    rep.check("covered_fraction", covered >= 0.99, f"{covered:.4f} of sample points inside some chart")
    rep.check("round_trip", bool(errs) and max_err < 1e-6, f"max relative error {max_err:.3g}")
    try:
        build_atlas(DiagonalData(z, 1 - z), spec.order, chebyshev_grid(spec.grid_points))
        rejected = ""
    except (CrossingMismatch, InconsistentOverlap) as exc:
        rejected = type(exc).__name__
    rep.values["anti_analytic_rejection"] = rejected or "none"
    rep.check("anti_analytic_rejected", rejected == "CrossingMismatch", rejected or "accepted")


def domain_export(spec: ExperimentSpec, rep: Report) -> None:
    d = _domain(spec.domain, spec.q, spec.a, spec.xmax)
    lines = geometry.boundary_polylines(d, spec.resolution)
    rep.values.update({"domain": spec.domain, "components": len(lines),
                       "vertices": int(sum(len(p) for p in lines))})
    for k, line in enumerate(lines):
        rep.rows.extend({"component": k, "x": float(w.real), "y": float(w.imag)} for w in line)
    rep.csv_text = geometry.polylines_to_csv(lines)
    rep.check("nonempty", len(lines) > 0)


def _domain(name: str, q: float, a: float = 2.0, xmax: float = 1.0):
    table = {
        "sector": lambda: Sector(xmax),
        "omega_a": lambda: geometry.OmegaA(a),
        "omega_q": lambda: OmegaQ(q),
        "omega_q_rotated": lambda: OmegaQRotated(q),
        "omega": Omega,
        "square": SquareD,
        "ellipse": lambda: geometry.EllipseQ(q),
        "union": lambda: Union((OmegaQ(q), OmegaQRotated(q))),
    }
    if name not in table:
        raise ValueError(f"unknown domain {name!r}; choose from {', '.join(sorted(table))}")
    return table[name]()


def parseval(spec: ExperimentSpec, rep: Report) -> None:
    """Weighted-disk moments and the kernel line-integral constant."""
    expected = (1.0, 2.0 / 3.0, 8.0 / 15.0)
    for n, e in enumerate(expected):
        coeffs = [0.0] * n + [1.0]
        s, quad = weighted_disk_norm_sq(coeffs)
        rep.rows.append({"monomial": n, "coefficient_sum": s, "quadrature": quad, "expected": e})
        rep.check(f"monomial_{n}", abs(s - quad) <= 1e-8 and abs(s - e) <= 1e-12, f"{s!r} vs {quad!r}")
    rng = np.random.default_rng(spec.seed)
    r = rng.uniform(0.01, 2.0, spec.samples)
    phi = rng.uniform(-0.99, 0.99, spec.samples) * math.pi / 4
    pts = r * np.exp(1j * phi)
    closed = np.array([kernel_line_integral(p, 0.0, math.inf) for p in pts])
    numeric = np.array([kernel_line_integral_quad(p, 0.0, math.inf) for p in pts])
    target = SQRT2 * math.pi
    e1 = float(np.max(np.abs(closed - target)))
    e2 = float(np.max(np.abs(numeric - target)))
    rep.values.update({"kernel_points": int(pts.size), "kernel_closed_max_error": e1,
                       "kernel_quadrature_max_error": e2})
    rep.check("kernel_closed_form", e1 <= 1e-12, f"{e1:.3g}")
    rep.check("kernel_quadrature", e2 <= 1e-6, f"{e2:.3g}")


def coefficients(spec: ExperimentSpec, rep: Report) -> None:
    n_top = max(10_000, min(spec.n_max, 10**7))
    table = coefficient_table(min(n_top, 2**20))
    ns = [n for n in (0, 1, 2, 10, 100, 1000, 10_000, 100_000, 1_000_000, 10_000_000) if n <= n_top]
    for n in ns:
        w = weight_w(n)
        row = {"n": n, "w_n": w, "log_w_n": math.log(w), "asymptotic_ratio": asymptotic_ratio(n)}
        if n <= table.n_max:
            row["log_c_n"] = float(table.log_c[n])
        rep.rows.append(row)
    r = asymptotic_ratio(10_000)
    rel = abs(r - GAMMA_3_2) / GAMMA_3_2
    rep.values.update({"ratio_at_1e4": r, "limit": GAMMA_3_2, "relative_deviation": rel})
    rep.check("asymptotic_ratio_1e4", rel < 0.01, f"{rel:.3g}")


_REGISTRY: dict[str, Callable[[ExperimentSpec, Report], None]] = {
    "verify-ahs": verify_ahs,
    "counterexample": counterexample,
    "equivalence": equivalence,
    "coverage": coverage,
    "margin": margin,
    "reconstruct": reconstruct,
    "domain-export": domain_export,
    "parseval": parseval,
    "coefficients": coefficients,
}
