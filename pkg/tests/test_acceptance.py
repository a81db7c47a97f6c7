"""Acceptance run: one pass/fail line per criterion, at the stated tolerances.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import math
import time

import pytest

from bergdiag.experiments import ExperimentSpec, run
from bergdiag.geometry import coverage_report


def verdict(capsys, number: int, title: str, passed: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {'PASS' if passed else 'FAIL'}  {title}: {detail}")
    assert passed, detail


def checks(report, *prefixes):
    return [c for c in report.checks if c.name.startswith(prefixes)]


def summary(cs) -> str:
    return "; ".join(f"{c.name} {'ok' if c.passed else 'FAILED'}" + (f" ({c.detail})" if c.detail else "")
                     for c in cs)


@pytest.fixture(scope="module")
def equivalence():
    return run(ExperimentSpec("equivalence", threads=1))


def test_criterion_01_halfline_identity(capsys):
    t0 = time.perf_counter()
    rep = run(ExperimentSpec("verify-ahs", function="pole -1 2", xmax=50.0, threads=1))
    elapsed = time.perf_counter() - t0
    cs = checks(rep, "truncated_agreement", "tightening_halves_gap")
    ok = len(cs) == 2 and all(c.passed for c in cs) and elapsed < 30
    verdict(capsys, 1, "half-line series vs sector norm", ok, f"{summary(cs)}; {elapsed:.1f} s")


def test_criterion_02_kernel_constant(capsys):
    rep = run(ExperimentSpec("parseval", samples=1000, threads=1))
    cs = checks(rep, "kernel_")
    verdict(capsys, 2, "kernel line integral = sqrt2 pi", len(cs) == 2 and all(c.passed for c in cs), summary(cs))


def test_criterion_03_weighted_disk_moments(capsys):
    rep = run(ExperimentSpec("parseval", samples=10, threads=1))
    cs = checks(rep, "monomial_")
    verdict(capsys, 3, "monomial moments 1, 2/3, 8/15", len(cs) == 3 and all(c.passed for c in cs), summary(cs))


def test_criterion_04_constant_exact(capsys, equivalence):
    cs = checks(equivalence, "constant_exact")
    verdict(capsys, 4, "constant function on both sides", len(cs) == 1 and cs[0].passed, summary(cs))


def test_criterion_05_one_diagonal_bound(capsys, equivalence):
    cs = checks(equivalence, "one_diagonal_bound[", "omega_in_square[")
    ok = len(cs) == 24 and all(c.passed for c in cs)
    bad = [c.name for c in cs if not c.passed]
    verdict(capsys, 5, "one diagonal <= 2 Omega <= 2 D", ok, f"{len(cs) - len(bad)}/{len(cs)} checks hold {bad}")


def test_criterion_06_counterexample(capsys):
    rep = run(ExperimentSpec("counterexample", eps=(1e-2, 1e-3, 1e-4), threads=1))
    cs = checks(rep, "series_converges", "ratio_below_2x", "stolz_bound_eps_", "norm_increasing")
    ok = len(cs) == 6 and all(c.passed for c in cs)
    verdict(capsys, 6, "corner pole: finite diagonal sum, divergent norm", ok, summary(cs))


def test_criterion_07_coverage(capsys):
    results = []
    for q in (2, 4, 6):
        rep = coverage_report(q, 1e-3, 1e-3)
        results.append((q, rep.values["points"], rep.values["uncovered"], rep.passed))
    ok = all(r[3] and r[2] == 0 for r in results)
    detail = "; ".join(f"q={q}: {u} of {n} uncovered" for q, n, u, _ in results)
    verdict(capsys, 7, "square covered by the two clipped unions", ok, detail)


def test_criterion_08_equivalence_band(capsys, equivalence):
    cs = checks(equivalence, "band_")
    r_min, r_max = equivalence.values["ratio_min"], equivalence.values["ratio_max"]
    ok = len(cs) == 2 and all(c.passed for c in cs) and math.isfinite(r_min)
    verdict(capsys, 8, "two-diagonal / square ratio band", ok, f"band [{r_min:.6f}, {r_max:.6f}]")


def test_criterion_09_reconstruction(capsys):
    rep = run(ExperimentSpec("reconstruct", function="pole 2 1", order=64, grid_points=64, samples=1000,
                             threads=1))
    cs = checks(rep, "covered_fraction", "round_trip", "anti_analytic_rejected")
    verdict(capsys, 9, "continuation from diagonal jets", len(cs) == 3 and all(c.passed for c in cs), summary(cs))


def test_criterion_10_asymptotics_and_margin(capsys):
    coef = run(ExperimentSpec("coefficients", n_max=10**5))
    marg = run(ExperimentSpec("margin", q=4.0))
    cs = checks(coef, "asymptotic_ratio_1e4") + checks(marg, "margin_delta_")
    verdict(capsys, 10, "Stirling ratio and margin limit", len(cs) == 4 and all(c.passed for c in cs), summary(cs))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
