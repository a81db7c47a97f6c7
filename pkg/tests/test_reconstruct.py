import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergdiag.ahs import DiagonalData, TabulatedJets
from bergdiag.errors import (CrossingMismatch, DegenerateJet, InconsistentOverlap, InvalidEps, OutsideAtlas,
                             SlowConvergence)
from bergdiag.geometry import OmegaQ, OmegaQRotated, Union
from bergdiag.jets import Jet, Pole, parse, z
from bergdiag.reconstruct import (Chart, ExtensionAtlas, build_atlas, chebyshev_grid, extend, radius_estimate,
                                  taylor_remainder_bound)

SQRT2 = math.sqrt(2)


def value(f, w):
    return complex(f(np.array([complex(w)]))[0])


# -- radius ------------------------------------------------------------------------


def test_radius_examples():
    assert radius_estimate(Pole(2.0).jet(0.0, 64)) == pytest.approx(2.0, rel=1e-6)
    assert radius_estimate(parse("poly 1 2 3").jet(0.3, 32)) == math.inf
    assert radius_estimate(parse("exp 1").jet(0.0, 64)) > 10


def test_radius_degenerate():
    with pytest.raises(DegenerateJet):
        radius_estimate(Jet(0.2, np.zeros(20)))
    with pytest.raises(ValueError):
        radius_estimate(Jet(0.2, np.ones(5)))


@settings(max_examples=80, deadline=None)
@given(st.complex_numbers(min_magnitude=0.2, max_magnitude=5), st.integers(1, 3),
       st.floats(0.05, 0.95), st.sampled_from(["horizontal", "vertical"]))
def test_radius_sound_for_poles(p, m, t, diagonal):
    c = t if diagonal == "horizontal" else complex(0.5, t - 0.5)
    dist = abs(p - c)
    if dist < 0.05:
        return
    assert radius_estimate(Pole(p, m).jet(c, 64)) == pytest.approx(dist, rel=0.05)


def test_radius_ignores_parity_zeros():
    # 1/(1 - u**2) about 0 has every odd coefficient zero
    f = parse("quot (const 1) (poly 1 0 -1)")
    assert radius_estimate(f.jet(0.0, 64)) == pytest.approx(1.0, rel=1e-6)


# -- extension ------------------------------------------------------------------------


def test_extend_pole_example():
    f = Pole(2.0, 1)
    atlas = build_atlas(f)
    assert extend(atlas, 0.3 + 0.1j) == pytest.approx(1 / (1.7 - 0.1j), rel=1e-8)


def test_extend_at_chart_center_is_constant_term():
    f = parse("pole 1+1i 2")
    atlas = build_atlas(f)
    c = atlas.charts[5]
    assert extend(atlas, c.center) == c.jet.coeffs[0]


def test_extend_uses_vertical_chart():
    f = parse("exp 1+2i")
    atlas = build_atlas(f)
    w = 0.5 + 0.4j
    v, info = extend(atlas, w, info=True)
    assert atlas.charts[info["chart"]].diagonal == "vertical"
    assert v == pytest.approx(value(f, w), rel=1e-10)


def test_charts_agree_where_they_overlap():
    f = parse("pole 2 1")
    atlas = build_atlas(f)
    rng = np.random.default_rng(9)
    seen = 0
    for w in rng.uniform(0.05, 0.95, 400) + 1j * rng.uniform(-0.3, 0.3, 400):
        try:
            _, info = extend(atlas, w, info=True)
        except OutsideAtlas:
            continue
        if not math.isnan(info["discrepancy"]):
            seen += 1
            assert info["discrepancy"] < 1e-6
    assert seen > 100


def test_single_point_grid_uses_crossing_chart():
    f = parse("pole 2 1")
    atlas = build_atlas(f, grid=[0.5])
    assert len(atlas.charts) == 1 and atlas.charts[0].diagonal == "crossing"
    assert atlas.crossing_discrepancy < 1e-14
    assert extend(atlas, 0.6 + 0.1j) == pytest.approx(value(f, 0.6 + 0.1j), rel=1e-10)


def test_round_trip_on_union_of_ellipse_domains():
    f = parse("pole 2 1")
    atlas = build_atlas(f)
    dom = Union((OmegaQ(4), OmegaQRotated(4)))
    rng = np.random.default_rng(10)
    w = rng.uniform(0, 1, 6000) + 1j * rng.uniform(-0.5, 0.5, 6000)
    w = w[dom.contains(w)][:1000]
    covered, worst = 0, 0.0
    for p in w:
        try:
            v = extend(atlas, p)
        except OutsideAtlas:
            continue
        covered += 1
        worst = max(worst, abs(v - value(f, p)) / abs(value(f, p)))
    assert covered >= 990
    assert worst < 1e-6


def test_chebyshev_grid():
    g = chebyshev_grid(64)
    assert g.size == 64 and np.all((g > 0) & (g < 1)) and np.all(np.diff(g) > 0)
    np.testing.assert_allclose(g + g[::-1], 1.0, atol=1e-15)


# -- failures ---------------------------------------------------------------------------


def test_outside_atlas():
    atlas = build_atlas(parse("pole 2 1"))
    with pytest.raises(OutsideAtlas):
        extend(atlas, 0.1 + 0.12j)
    with pytest.raises(OutsideAtlas):
        extend(atlas, 2.0)


def test_anti_analytic_trace_is_rejected():
    with pytest.raises(CrossingMismatch):
        build_atlas(DiagonalData(z, parse("poly 1 -1")))


def test_mixed_tabulated_data_is_inconsistent():
    t = chebyshev_grid(64)
    a = TabulatedJets.from_function(Pole(2.0, 1), "horizontal", t, 32)
    b = TabulatedJets.from_function(Pole(2.1, 1), "horizontal", t, 32)
    coeffs = np.where((np.arange(t.size) % 2 == 0)[:, None], a.coeffs, b.coeffs)
    with pytest.raises(InconsistentOverlap):
        build_atlas(DiagonalData(TabulatedJets("horizontal", t, coeffs)), order=32)


def test_consistent_tabulated_data_builds():
    t = chebyshev_grid(64)
    f = Pole(2.0, 1)
    data = DiagonalData(TabulatedJets.from_function(f, "horizontal", t, 32),
                        TabulatedJets.from_function(f, "vertical", t, 32))
    atlas = build_atlas(data, order=32)
    assert atlas.overlap_discrepancy < 1e-10
    assert extend(atlas, 0.2 + 0.05j) == pytest.approx(value(f, 0.2 + 0.05j), rel=1e-8)


def test_slow_convergence_near_radius():
    jet = Pole(1.0).jet(0.0, 64)
    atlas = ExtensionAtlas([Chart(0j, jet, 1.0, "horizontal", radius_estimate(jet))], None)
    assert extend(atlas, 0.5) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(SlowConvergence):
        extend(atlas, 0.995)


def test_order_validation():
    with pytest.raises(ValueError):
        build_atlas(parse("pole 2 1"), order=4)
    with pytest.raises(ValueError):
        build_atlas(parse("pole 2 1"), grid=[0.0, 0.5])


# -- remainder bound ---------------------------------------------------------------------


def test_remainder_factor_decays_below_critical_eps():
    x0 = 0.4
    b = taylor_remainder_bound(x0, 0.9 * x0 / (SQRT2 + 1), np.ones(400))
    r = b[1:] / b[:-1]
    assert np.all(r[50:] < 1)
    assert r[-1] == pytest.approx(2 * 0.81 / (SQRT2 + 1 - 0.9) ** 2, rel=1e-2)


def test_remainder_factor_grows_above_critical_eps():
    x0 = 0.4
    b = taylor_remainder_bound(x0, 0.9 * x0, np.ones(200))
    b = b[np.isfinite(b)]
    assert b.size > 50
    assert np.all(b[1:] / b[:-1] > 1)


def test_remainder_zero_sequence_and_closed_form():
    assert np.all(taylor_remainder_bound(0.4, 0.1, np.zeros(10)) == 0)
    x0, eps = 0.4, 0.1
    n = 3
    exact = eps ** (2 * n) * math.factorial(2 * n + 3) / (math.factorial(n) ** 2 * (x0 - eps) ** (2 * n + 3) * 2 ** (n + 1))
    assert taylor_remainder_bound(x0, eps, [0, 0, 0, 2.5])[3] == pytest.approx(2.5 * exact, rel=1e-12)


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.4, 0.5])
def test_remainder_invalid_eps(eps):
    with pytest.raises(InvalidEps):
        taylor_remainder_bound(0.4, eps, [1.0])
