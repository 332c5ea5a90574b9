import math

import numpy as np
import pytest

import soapbubble as sb
from soapbubble.planes import critical_position
from soapbubble.symmetry import (
    critical_plane_distance,
    radial_bounds,
    radial_map_check,
    reflection_defect,
    stability_ratio,
    symmetry_center,
    symmetry_center_robust,
)

ELL111_OSC = 0.18677685950413236
ELL111_RATIO = 0.1 / ELL111_OSC  # 0.535398...


@pytest.fixture(scope="module")
def dumbbell():
    return sb.HarmonicRadial([(2, 0, 1.8)], dim=3)


class TestCenter:
    def test_offset_sphere(self):
        s = sb.Sphere([0.3, -0.2, 0.5], 1.0)
        O, planes = symmetry_center(s)
        np.testing.assert_allclose(O, [0.3, -0.2, 0.5], atol=1e-6)
        assert all(p.degenerate_contact for p in planes)

    def test_origin_ellipsoid(self, ell_111):
        O, _ = symmetry_center(ell_111)
        np.testing.assert_allclose(O, [0, 0, 0], atol=1e-6)

    def test_translation_equivariance(self):
        t = np.array([0.15, 0.3, -0.25])
        s = sb.Sphere(t, 0.8)
        O, _ = symmetry_center(s)
        np.testing.assert_allclose(O, t, atol=1e-6)

    def test_robust_variant_recovers_center_with_spread(self):
        s = sb.Sphere([0.2, -0.1, 0.35], 1.0)
        O, spread = symmetry_center_robust(s, n_directions=10, sample_budget=1200)
        np.testing.assert_allclose(O, [0.2, -0.1, 0.35], atol=1e-6)
        assert spread < 1e-6
        e = sb.Ellipsoid([1.0, 1.0, 1.1])
        O2, spread2 = symmetry_center_robust(e, n_directions=10, sample_budget=1200)
        # off-axis critical planes of a non-sphere genuinely miss a common
        # point; the spread is the diagnostic that reports it
        assert np.linalg.norm(O2) < 0.2
        assert spread2 > 1e-3


class TestRadialBounds:
    def test_unit_sphere(self, unit_sphere):
        r_i, r_e, _, _ = radial_bounds(unit_sphere, np.zeros(3))
        assert r_i == pytest.approx(1.0, abs=1e-9)
        assert r_e == pytest.approx(1.0, abs=1e-9)

    def test_ellipsoid_semi_axes(self, ell_111):
        r_i, r_e, p_i, p_e = radial_bounds(ell_111, np.zeros(3))
        assert r_i == pytest.approx(1.0, abs=1e-6)
        assert r_e == pytest.approx(1.1, abs=1e-6)
        assert abs(p_e[2]) == pytest.approx(1.1, abs=1e-3)

    def test_offset_center_in_sphere(self, unit_sphere):
        r_i, r_e, _, _ = radial_bounds(unit_sphere, np.array([0.1, 0, 0]))
        assert r_i == pytest.approx(0.9, abs=1e-6)
        assert r_e == pytest.approx(1.1, abs=1e-6)

    def test_annulus_containment(self, ell_111):
        O = np.zeros(3)
        r_i, r_e, _, _ = radial_bounds(ell_111, O)
        r = np.linalg.norm(ell_111.probe_points(3000, 1) - O, axis=1)
        assert np.all(r >= r_i - 1e-9)
        assert np.all(r <= r_e + 1e-9)


class TestPlaneDistance:
    def test_sphere_any_direction(self):
        s = sb.Sphere([0.2, 0.1, -0.3], 1.0)
        O, _ = symmetry_center(s)
        rng = np.random.default_rng(5)
        for _ in range(3):
            w = rng.standard_normal(3)
            w /= np.linalg.norm(w)
            assert critical_plane_distance(s, O, w) == pytest.approx(0.0, abs=1e-6)

    def test_ellipsoid_axis(self, ell_111):
        assert critical_plane_distance(ell_111, np.zeros(3), np.array([0.0, 0, 1])) == (
            pytest.approx(0.0, abs=1e-6)
        )

    def test_ellipsoid_diagonal_matches_direct(self, ell_111):
        w = np.array([1.0, 0, 1.0]) / math.sqrt(2)
        plane = critical_position(ell_111, w)
        d = critical_plane_distance(ell_111, np.zeros(3), w)
        assert d == pytest.approx(abs(plane.level), abs=1e-9)


class TestReflectionDefect:
    def test_sphere_zero(self):
        s = sb.Sphere([0.3, -0.2, 0.5], 1.0)
        assert reflection_defect(s, np.array([0.3, -0.2, 0.5])) < 1e-9

    def test_ellipsoid_zero(self, ell_111):
        assert reflection_defect(ell_111, np.zeros(3)) < 1e-9

    def test_odd_harmonic_grows_monotonically(self):
        # an odd radial term breaks central symmetry; the defect must grow
        # with its amplitude and vanish with it
        amps = [0.0, 0.02, 0.05, 0.1, 0.15]
        defects = []
        for a in amps:
            surf = sb.HarmonicRadial([(3, 0, a)], dim=3)
            O, _ = symmetry_center(surf, sample_budget=1500)
            defects.append(reflection_defect(surf, O, 1500))
        assert defects[0] < 1e-8
        assert all(b > a - 1e-12 for a, b in zip(defects, defects[1:]))
        assert defects[-1] > 1e-3


class TestRadialMap:
    def test_unit_sphere_all_dots_minus_one(self, unit_sphere):
        rep = radial_map_check(unit_sphere, np.zeros(3), 1.0, 1.0, rho=1.0, n_rays=300)
        assert rep.ok
        assert rep.max_radial_dot == pytest.approx(-1.0, abs=1e-12)

    def test_ellipsoid_bound(self, ell_111):
        rho = sb.touching_radius(ell_111)
        rep = radial_map_check(ell_111, np.zeros(3), 1.0, 1.1, rho=rho, n_rays=500)
        assert rep.ok
        assert rep.max_radial_dot <= -1.0 + 0.1 / rho + 1e-6
        assert rep.max_radial_dot <= -0.89

    def test_dumbbell_multi_hit(self, dumbbell):
        O, _ = symmetry_center(dumbbell, sample_budget=3000)
        r_i, r_e, _, _ = radial_bounds(dumbbell, O, 3000)
        rep = radial_map_check(dumbbell, O, r_i, r_e, n_rays=2000, sample_budget=2000)
        assert not rep.ok
        assert not rep.rays_ok
        assert len(rep.multi_hit_directions) > 0
        assert max(rep.hit_counts) >= 3

    def test_center_outside_rejected(self, unit_sphere):
        with pytest.raises(ValueError):
            radial_map_check(unit_sphere, np.array([2.0, 0, 0]), 1.0, 1.0)


@pytest.fixture(scope="module")
def sphere_report():
    return stability_ratio(sb.Sphere([0.25, -0.1, 0.4], 1.0), sample_budget=2000)


@pytest.fixture(scope="module")
def ell_report(ell_111):
    return stability_ratio(ell_111, sample_budget=2000)


class TestStabilityReport:
    def test_sphere_verdict(self, sphere_report):
        rep = sphere_report
        assert rep.ratio_indeterminate
        assert rep.ratio is None
        assert rep.verdict == "sphere within tolerance"
        assert rep.r_e - rep.r_i <= 1e-6
        assert rep.osc <= 1e-8

    def test_ellipsoid_numbers(self, ell_report):
        rep = ell_report
        assert rep.r_e - rep.r_i == pytest.approx(0.1, abs=1e-4)
        assert rep.osc == pytest.approx(ELL111_OSC, rel=0.01)
        assert rep.ratio == pytest.approx(ELL111_RATIO, rel=0.02)
        np.testing.assert_allclose(rep.center, np.zeros(3), atol=1e-5)

    def test_cross_check_inequality(self, ell_report):
        rep = ell_report
        assert rep.cross_check_lhs <= rep.cross_check_rhs + rep.cross_check_slack

    def test_report_metadata(self, ell_report):
        d = ell_report.to_dict()
        assert "inner normal" in d["metadata"]["h_convention"]
        assert d["constants"]["inputs"]["k_placeholder"]
        assert d["metadata"]["rho_hat"] == pytest.approx(1 / 1.1, rel=0.02)

    def test_scaling_covariance(self):
        # scaling by s: radii scale by s, osc by 1/s, ratio by s^2
        s = 2.0
        base = stability_ratio(sb.Ellipsoid([1, 1, 1.1]), sample_budget=1500)
        scaled = stability_ratio(sb.Ellipsoid([s, s, s * 1.1]), sample_budget=1500)
        assert scaled.r_i == pytest.approx(s * base.r_i, rel=1e-4)
        assert scaled.r_e == pytest.approx(s * base.r_e, rel=1e-4)
        assert scaled.osc == pytest.approx(base.osc / s, rel=1e-4)
        assert scaled.ratio == pytest.approx(s**2 * base.ratio, rel=1e-3)

    def test_rigid_motion_invariance_of_measures(self):
        t = np.array([0.2, -0.3, 0.1])
        base = stability_ratio(sb.Sphere([0, 0, 0], 1.0), sample_budget=1500)
        moved = stability_ratio(sb.Sphere(t, 1.0), sample_budget=1500)
        np.testing.assert_allclose(moved.center, t, atol=1e-6)
        assert moved.r_e - moved.r_i == pytest.approx(base.r_e - base.r_i, abs=1e-6)

    def test_thread_fanout_matches_serial(self, monkeypatch, ell_111):
        serial, _ = symmetry_center(ell_111, sample_budget=1200)
        monkeypatch.setenv("SOAPBUBBLE_THREADS", "3")
        threaded, _ = symmetry_center(ell_111, sample_budget=1200)
        np.testing.assert_array_equal(serial, threaded)

    def test_point_cloud_end_to_end(self):
        rng = np.random.default_rng(4)
        u = rng.standard_normal((2500, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = u * np.array([1.0, 1.0, 1.1])
        g = -2.0 * pts / np.array([1.0, 1.0, 1.21])
        cloud = sb.PointCloud(pts, g / np.linalg.norm(g, axis=1, keepdims=True), k=20)
        rep = stability_ratio(cloud, sample_budget=1000)
        np.testing.assert_allclose(rep.center, np.zeros(3), atol=0.02)
        assert rep.r_e - rep.r_i == pytest.approx(0.1, abs=0.02)
        assert rep.osc == pytest.approx(0.1868, rel=0.25)
        assert rep.radial_map is not None and rep.radial_map.rays_ok
