import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergdiag.errors import InvalidA, InvalidQ, OutsideSector
from bergdiag.geometry import (DOMAINS, Difference, Disk, EllipseQ, HalfPlaneStrip, Intersection, Omega, OmegaA,
                               OmegaQ, OmegaQRotated, Sector, SquareD, Union, boundary_polylines, coverage_report,
                               disk_roots, disk_roots_array, kernel_h, membership, omega_a_gap_check,
                               polylines_to_csv, rotate_quarter, square_grid, unrotate_quarter)

SQRT2 = math.sqrt(2)


def sector_points(rng, n, scale=2.0):
    r = rng.uniform(1e-3, scale, n)
    phi = rng.uniform(-1, 1, n) * math.pi / 4 * 0.999
    return r * np.exp(1j * phi)


# -- roots and kernel ------------------------------------------------------------


def test_disk_roots_examples():
    assert disk_roots(1) == pytest.approx((2 - SQRT2, 2 + SQRT2), rel=1e-15)
    assert disk_roots(0.25 + 0.25j) == pytest.approx((0.5, 0.5))
    x = 0.7
    r = disk_roots(x)
    assert r == pytest.approx((x * (2 - SQRT2), x * (2 + SQRT2)))
    assert r.x1 < x < r.x2


@pytest.mark.parametrize("zz", [-0.1, 0.0, 1 + 1.01j, 0.2 - 0.3j])
def test_disk_roots_outside(zz):
    with pytest.raises(OutsideSector):
        disk_roots(zz)


def test_vieta():
    rng = np.random.default_rng(1)
    for w in sector_points(rng, 200):
        x1, x2 = disk_roots(w)
        assert x1 * x2 == pytest.approx(2 * abs(w) ** 2, rel=1e-12)
        assert x1 + x2 == pytest.approx(4 * w.real, rel=1e-12)


def test_kernel_examples():
    assert kernel_h(0.4, 0.4) == pytest.approx(0.08)
    assert kernel_h(1, 2) == pytest.approx(1.0)
    x1, x2 = disk_roots(1)
    assert 0.5 * (2 - x1) * (x2 - 2) == pytest.approx(1.0, rel=1e-12)
    assert kernel_h(0.25 + 0.25j, 0.5) == pytest.approx(0.0, abs=1e-16)


def test_three_way_agreement():
    rng = np.random.default_rng(2)
    w = sector_points(rng, 10**5)
    x = rng.uniform(0, 6, w.size)
    x1, x2 = disk_roots_array(w)
    by_roots = (x1 < x) & (x < x2)
    by_kernel = kernel_h(w, x) > 0
    by_disk = np.abs(w - x) < x / SQRT2
    # identical except within rounding of the boundary itself
    h = kernel_h(w, x)
    clear = np.abs(h) > 1e-12 * np.maximum(1, x * x)
    assert np.array_equal(by_roots[clear], by_kernel[clear])
    assert np.array_equal(by_disk[clear], by_kernel[clear])
    x1s, x2s = disk_roots_array(w)
    np.testing.assert_allclose(h[clear], (0.5 * (x - x1s) * (x2s - x))[clear], atol=1e-12)


def test_roots_array_nan_outside():
    x1, x2 = disk_roots_array(np.array([1.0, -1.0, 0.1 + 0.2j]))
    assert np.isfinite(x1[0]) and np.isnan(x1[1]) and np.isnan(x2[2])


# -- membership examples ---------------------------------------------------------


def test_square_examples():
    assert membership(SquareD(), 0.5)
    assert not membership(SquareD(), 0.5 + 0.5j)
    assert not membership(SquareD(), 0.0)


def test_omega_boundary_point():
    assert not membership(Omega(), 0.5 + 1j / (2 * SQRT2))
    assert membership(Omega(), 0.5 + 1j / (2 * SQRT2) - 1e-9j)


def test_ellipse_eight_is_disk():
    rng = np.random.default_rng(3)
    w = 0.5 + rng.uniform(-0.5, 0.5, 20000) + 1j * rng.uniform(-0.5, 0.5, 20000)
    r = 1 / (2 * SQRT2)
    clear = np.abs(np.abs(w - 0.5) - r) > 1e-12
    inside = EllipseQ(8).contains(w)
    assert np.array_equal(inside[clear], (np.abs(w - 0.5) < r)[clear])


def test_invalid_parameters():
    for bad in (0, 8, -1, 9):
        with pytest.raises(InvalidQ):
            OmegaQ(bad)
        with pytest.raises(InvalidQ):
            coverage_report(bad, 0.1, 0.1)
    with pytest.raises(InvalidA):
        OmegaA(0.5)
    with pytest.raises(InvalidA):
        omega_a_gap_check(0.99)
    with pytest.raises(ValueError):
        Disk(0, 0)


@pytest.mark.parametrize("q", [0.5, 2, 4, 6, 7.9])
def test_ellipse_pinning(q):
    e = EllipseQ(q)
    for p in (0.25 + 0.25j, 0.25 - 0.25j, 0.75 + 0.25j, 0.75 - 0.25j):
        assert q * (p.real - 0.5) ** 2 + (16 - q) * p.imag**2 == 1.0
        assert not e.contains(p)
        assert e.contains(0.5 + 0.98 * (p - 0.5))


# -- symmetry and nesting ----------------------------------------------------------


@settings(max_examples=300)
@given(st.integers(-2**14, 2**17), st.integers(-2**16, 2**16))
def test_omega_reflections(i, j):
    # dyadic points keep 1 - conj(w) exact
    w = complex(i / 2**16, j / 2**17)
    m = membership(Omega(), w)
    assert m == membership(Omega(), 1 - w.conjugate())
    assert m == membership(Omega(), w.conjugate())


def test_rotation_involution():
    rng = np.random.default_rng(4)
    w = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    v = w
    for _ in range(4):
        v = rotate_quarter(v)
    np.testing.assert_allclose(v, w, atol=1e-15)
    np.testing.assert_allclose(unrotate_quarter(rotate_quarter(w)), w, atol=1e-15)


def test_rotated_membership_is_pullback():
    rng = np.random.default_rng(5)
    w = rng.uniform(0, 1, 5000) + 1j * rng.uniform(-0.5, 0.5, 5000)
    assert np.array_equal(OmegaQRotated(4).contains(w), OmegaQ(4).contains(0.5 - 1j * (w - 0.5)))


def test_nesting_on_grid():
    g = square_grid(5e-3, 1e-3)
    box = np.concatenate([g, (np.random.default_rng(6).uniform(-0.2, 1.2, 20000)
                              + 1j * np.random.default_rng(7).uniform(-0.7, 0.7, 20000))])
    om = Omega().contains(box)
    sq = SquareD().contains(box)
    assert np.all(sq[om])
    for a in (1.0, 1.5, 3.0, 10.0):
        oa = OmegaA(a).contains(box)
        assert np.all(oa[om])
        # the wider disks fill the sector |y| < a x near 0, so for a > 1 they leave D
        w = box[oa]
        mirror = np.where(w.real <= 0.5, w, 1 - w)
        assert np.all(np.abs(mirror.imag) < a * mirror.real)
        assert np.all(np.abs(w - 0.5) < 0.5)
    assert np.array_equal(OmegaA(1.0).contains(box), om)
    for q in (0.5, 2, 4, 6, 7.9):
        assert np.all(om[OmegaQ(q).contains(box)])


def test_bbox_contains_members():
    rng = np.random.default_rng(8)
    w = rng.uniform(-1, 2, 50000) + 1j * rng.uniform(-1.5, 1.5, 50000)
    domains = [Sector(1.5), SquareD(), Disk(0.3 + 0.1j, 0.2), Omega(), OmegaA(3), EllipseQ(4), OmegaQ(4),
               OmegaQRotated(4), HalfPlaneStrip(0.2, 0.6), Union((Omega(), Disk(1, 0.5))),
               Intersection((SquareD(), Disk(0.5, 0.4))), Difference(SquareD(), Disk(0.5, 0.1))]
    for d in domains:
        inside = w[d.contains(w)]
        assert inside.size > 0, d
        x0, x1, y0, y1 = d.bbox
        assert np.all((inside.real >= x0) & (inside.real <= x1) & (inside.imag >= y0) & (inside.imag <= y1)), d


def test_membership_is_pure():
    w = np.linspace(0, 1, 101) + 0.1j
    assert np.array_equal(Omega().contains(w), Omega().contains(w.copy()))
    assert set(DOMAINS) >= {"square", "omega"}


# -- coverage ------------------------------------------------------------------------


@pytest.mark.parametrize("q", [2, 4, 6])
def test_union_covers_square(q):
    rep = coverage_report(q, 2e-3, 1e-3)
    assert rep.values["uncovered"] == 0
    assert rep.values["omega_alone_uncovered"] > 0
    assert rep.passed


def test_omega_misses_near_corners():
    rep = coverage_report(4, 5e-3, 1e-3)
    pts = np.array([complex(*p) for p in rep.values["omega_alone_example"]])
    assert np.all(np.abs(pts.real - 0.5) < 0.3)
    assert rep.values["omega_alone_max_abs_imag_gap"] > 0.45


def test_uncovered_count_shrinks_with_q():
    g = square_grid(5e-3, 1e-3)
    counts = []
    for q in (0.5, 1, 2, 4, 6, 7.5):
        counts.append(int(np.count_nonzero(~(OmegaQ(q).contains(g) | OmegaQRotated(q).contains(g)))))
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_square_grid_margin():
    g = square_grid(1e-2, 1e-2)
    dist = 0.5 - (np.abs(g.real - 0.5) + np.abs(g.imag))
    assert np.all(dist / SQRT2 > 1e-2 - 1e-15)


# -- widened union ---------------------------------------------------------------------


@pytest.mark.parametrize("a,r", [(1, 1 / (2 * SQRT2)), (10, 10 / (2 * math.sqrt(101)))])
def test_omega_a_gap(a, r):
    rep = omega_a_gap_check(a)
    assert rep.values["radius_at_half"] == pytest.approx(r, rel=1e-15)
    assert rep.passed


def test_omega_a_leaves_square_near_origin():
    w = 0.01 + 0.015j
    assert OmegaA(3).contains(w) and not SquareD().contains(w)
    assert not Omega().contains(w)


def test_omega_a_radius_never_half():
    for a in (1e2, 1e4, 1e7):
        assert omega_a_gap_check(a, samples=101).values["radius_at_half"] < 0.5


# -- export ----------------------------------------------------------------------------


def test_polygon_export_and_csv():
    lines = boundary_polylines(SquareD())
    assert len(lines) == 1 and lines[0][0] == lines[0][-1]
    csv = polylines_to_csv(lines + lines)
    assert csv.startswith("x,y\n")
    assert csv.count("\n\n") == 1


def test_contour_export_lies_on_boundary():
    lines = boundary_polylines(Omega(), 401)
    pts = np.concatenate(lines)
    # marching squares puts vertices within a grid cell of the boundary
    h = 1.04 / 400
    near_in = Omega().contains(pts + h * np.exp(1j * np.linspace(0, 2 * np.pi, 9))[:, None])
    assert np.all(near_in.any(axis=0) & (~near_in).any(axis=0))


def test_ellipse_export_closed():
    (line,) = boundary_polylines(EllipseQ(4), 201)
    assert abs(line[0] - line[-1]) < 1e-12
    np.testing.assert_allclose(4 * (line.real - 0.5) ** 2 + 12 * line.imag**2, 1.0, rtol=1e-12)
