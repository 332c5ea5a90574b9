import math

import numpy as np
import pytest

import soapbubble as sb
from soapbubble.intrinsic import build_geodesic_graph
from soapbubble.lemmas import (
    figure_projection_check,
    normal_from_gradient,
    projected_curvature_bounds,
    slice_curvature_bounds,
    verify_annulus_normal,
    verify_distance_bounds,
    verify_graph_bounds,
    verify_normal_change,
    verify_normal_difference,
    verify_normal_tilt,
)
from soapbubble.planes import critical_position
from soapbubble.tracing import (
    TangentialSliceError,
    curve_curvatures,
    fit_circle,
    trace_plane_section,
)


@pytest.fixture(scope="module")
def sphere_graph8(unit_sphere):
    return build_geodesic_graph(unit_sphere, 3000, k=8, seed=0)


@pytest.fixture(scope="module")
def sphere_graph16(unit_sphere):
    # routing stretch at k=8 exceeds the edge-length slack of the distance
    # envelope; distance checks need the denser connectivity
    return build_geodesic_graph(unit_sphere, 3000, k=16, seed=0)


class TestGraphBounds:
    @pytest.mark.parametrize("surface_name", ["unit_sphere", "ell_111", "ell_112"])
    def test_no_violations(self, surface_name, request):
        surface = request.getfixturevalue(surface_name)
        v = verify_graph_bounds(surface, trials=4000)
        assert v.violations == 0
        assert v.worst_slack > -1e-7

    def test_sphere_saturates_near_rim(self, unit_sphere):
        # equality is approached as the offset nears the patch radius
        v = verify_graph_bounds(unit_sphere, trials=4000)
        assert v.worst_slack < 1e-3

    def test_negative_control_rho_doubled(self, ell_111):
        rho = sb.touching_radius(ell_111)
        v = verify_graph_bounds(ell_111, trials=2000, rho=2 * rho)
        assert v.violations > 0


class TestDistanceBounds:
    def test_sphere(self, unit_sphere, sphere_graph16):
        v = verify_distance_bounds(unit_sphere, sphere_graph16, trials=4000)
        assert v.violations == 0

    def test_ellipsoid(self, ell_111):
        g = build_geodesic_graph(ell_111, 3000, k=16, seed=0)
        v = verify_distance_bounds(ell_111, g, trials=4000)
        assert v.violations == 0

    def test_coarse_graph_flagged(self, unit_sphere):
        g = build_geodesic_graph(unit_sphere, 100, k=8, seed=0)
        v = verify_distance_bounds(unit_sphere, g, trials=500)
        assert any("low-resolution" in n for n in v.notes)


class TestSliceCurvature:
    def test_sphere_slice_numbers(self, unit_sphere):
        # slice of the unit sphere at height 1/2: circle of radius sqrt(3)/2
        v = slice_curvature_bounds(unit_sphere, np.array([0.0, 0, 1.0]), 0.5, step=0.02)
        assert v.violations == 0
        tr = trace_plane_section(
            unit_sphere.implicit, unit_sphere.implicit_grad, [0, 0, 1.0], 0.5, [1.0, 0, 0.5],
            step=0.02,
        )
        k = curve_curvatures(tr.points)
        assert k.mean() == pytest.approx(1 / math.sqrt(0.75), abs=1e-9)
        assert k.max() - k.min() < 1e-6
        # induced orientation identity at a known point: nu.nu_raw = 0.75,
        # loose bound kappa_max/(nu.nu_raw) = 4/3 still clears the curvature
        assert 1 / 0.75 >= 1 / math.sqrt(0.75)

    def test_ellipsoid_tilted_slice(self, ell_111):
        w = np.array([0.3, 0.2, 0.93])
        v = slice_curvature_bounds(ell_111, w, 0.3, step=0.02, tol=1e-5)
        assert v.violations == 0

    def test_tangential_slice_rejected(self, unit_sphere):
        with pytest.raises(TangentialSliceError):
            slice_curvature_bounds(unit_sphere, np.array([0.0, 0, 1.0]), 0.999)

    def test_curvature_constant_along_sphere_slices(self, unit_sphere):
        for level in (0.0, 0.3, -0.6):
            tr = trace_plane_section(
                unit_sphere.implicit, unit_sphere.implicit_grad,
                [0, 0, 1.0], level, [math.sqrt(1 - level**2), 0, level], step=0.01,
            )
            k = curve_curvatures(tr.points)
            assert k.max() - k.min() < 1e-6


class TestProjectedCurvature:
    def test_parallel_planes_identity(self, ell_111):
        # projecting within parallel planes is an isometry: kappa unchanged
        w = np.array([0.0, 0, 1.0])
        v = projected_curvature_bounds(ell_111, w, 0.25, w, step=0.02, tol=1e-6)
        assert v.violations == 0
        tr = trace_plane_section(
            ell_111.implicit, ell_111.implicit_grad, w, 0.25, [0.9, 0, 0.25], step=0.02
        )
        from soapbubble.tracing import project_to_plane

        k_src = curve_curvatures(tr.points)
        k_proj = curve_curvatures(project_to_plane(tr.points, w))
        np.testing.assert_allclose(k_proj, k_src, atol=1e-9)

    def test_ellipsoid_tilted_30deg(self, ell_111):
        w1 = np.array([0.0, math.sin(math.pi / 6), math.cos(math.pi / 6)])
        v = projected_curvature_bounds(ell_111, w1, 0.2, np.array([0.0, 0, 1.0]), step=0.005, tol=1e-5)
        assert v.violations == 0

    def test_figure_ground_truth(self):
        result = figure_projection_check(step=0.02)
        assert result["kappa_projected_max_dev"] < 1e-6
        assert result["center_dev"] < 1e-6
        assert result["radius_dev"] < 1e-6
        assert result["bound_verdict"].violations == 0


class TestNormalChange:
    @pytest.mark.parametrize("surface_name", ["unit_sphere", "ell_111"])
    def test_no_violations(self, surface_name, request):
        surface = request.getfixturevalue(surface_name)
        v = verify_normal_change(surface, trials=2000)
        assert v.violations == 0

    def test_identity_direction(self, unit_sphere):
        # ell = nu: heights coincide with the source patch, bound is slack
        v = verify_normal_change(unit_sphere, trials=500, eps_range=(1e-9, 1e-8))
        assert v.violations == 0

    def test_near_unit_eps(self, ell_111):
        v = verify_normal_change(ell_111, trials=500, eps_range=(0.95, 0.99))
        assert v.violations == 0


class TestNormalDifference:
    def test_equal_gradients(self):
        v = verify_normal_difference(grad1=np.zeros(2), grad2=np.zeros(2))
        assert v.worst_slack == 0.0
        assert v.violations == 0

    def test_explicit_slope_example(self):
        v = verify_normal_difference(grad1=np.array([0.0, 0.0]), grad2=np.array([0.1, 0.0]))
        assert v.witness["lhs"] == pytest.approx(0.0996274, abs=1e-6)
        assert v.witness["rhs"] == pytest.approx(math.sqrt(5) / 2 * 0.1, abs=1e-12)
        assert v.violations == 0

    def test_random_quadratics(self):
        v = verify_normal_difference(trials=10000)
        assert v.violations == 0

    def test_normal_formula(self):
        n = normal_from_gradient(np.array([[0.0, 0.0]]))
        np.testing.assert_allclose(n, [[0, 0, 1.0]])


class TestNormalTilt:
    def test_ellipsoid(self, ell_111):
        plane = critical_position(ell_111, np.array([1.0, 0, 0]))
        g = build_geodesic_graph(ell_111, 3000, k=8, seed=0)
        v = verify_normal_tilt(ell_111, plane, g)
        assert v.trials > 50
        assert v.violations == 0

    def test_sphere_band(self, unit_sphere, sphere_graph8):
        plane = critical_position(unit_sphere, np.array([0.0, 0, 1.0]))
        v = verify_normal_tilt(unit_sphere, plane, sphere_graph8)
        assert v.violations == 0

    def test_zero_band_vacuous(self, unit_sphere, sphere_graph8):
        plane = critical_position(unit_sphere, np.array([0.0, 0, 1.0]))
        v = verify_normal_tilt(unit_sphere, plane, sphere_graph8, delta=1e-12)
        assert v.trials == 0
        assert v.violations == 0


class TestAnnulusNormal:
    def test_sphere_equality(self, unit_sphere):
        v = verify_annulus_normal(unit_sphere, np.zeros(3), 1.0, 1.0, rho=1.0, sample_budget=2000)
        assert v.violations == 0
        assert v.worst_slack == pytest.approx(0.0, abs=1e-9)

    def test_ellipsoid(self, ell_111):
        rho = sb.touching_radius(ell_111)
        v = verify_annulus_normal(ell_111, np.zeros(3), 1.0, 1.1, rho=rho, sample_budget=4000)
        assert v.violations == 0

    def test_hypothesis_violation_rejected(self):
        dumbbell = sb.HarmonicRadial([(2, 0, 1.8)], dim=3)
        from soapbubble.symmetry import radial_bounds, symmetry_center

        O, _ = symmetry_center(dumbbell, sample_budget=2000)
        r_i, r_e, _, _ = radial_bounds(dumbbell, O, 2000)
        with pytest.raises(ValueError):
            verify_annulus_normal(dumbbell, O, r_i, r_e)


class TestCircleFit:
    def test_exact_circle(self):
        th = np.linspace(0, 2 * math.pi, 40, endpoint=False)
        pts = np.stack([2 + 3 * np.cos(th), -1 + 3 * np.sin(th), np.full_like(th, 0.5)], axis=1)
        center, r = fit_circle(pts)
        np.testing.assert_allclose(center, [2, -1, 0.5], atol=1e-12)
        assert r == pytest.approx(3.0, abs=1e-12)
