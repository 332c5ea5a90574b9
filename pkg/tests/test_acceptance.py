"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured numbers when it succeeds (run with -s or -v to see them)."""

import json
import math
import sys
import time

import numpy as np
import pytest

import soapbubble as sb
from soapbubble.cli import main
from soapbubble.constants import check_smallness, compute_constants
from soapbubble.intrinsic import build_geodesic_graph, harnack_chain, piecewise_geodesic_chain
from soapbubble.lemmas import (
    figure_projection_check,
    slice_curvature_bounds,
    verify_annulus_normal,
    verify_distance_bounds,
    verify_graph_bounds,
    verify_normal_change,
    verify_normal_difference,
    verify_normal_tilt,
)
from soapbubble.planes import critical_position
from soapbubble.symmetry import (
    radial_bounds,
    radial_map_check,
    reflection_defect,
    stability_ratio,
    symmetry_center,
)
from soapbubble.tracing import TangentialSliceError

from .oracles import constants_highprec


def report(line: str) -> None:
    sys.stdout.write(f"\n[acceptance] {line}\n")


def test_criterion_01_sphere_exactness():
    rng = np.random.default_rng(2024)
    center = rng.uniform(-0.5, 0.5, size=3)
    sphere = sb.Sphere(center, 1.0)
    t0 = time.monotonic()
    rep = stability_ratio(sphere, sample_budget=20000, seed=1)
    elapsed = time.monotonic() - t0
    m_err = float(np.abs(rep.center - center).max())
    assert rep.osc <= 1e-8
    assert m_err <= 1e-6
    assert rep.r_e - rep.r_i <= 1e-6
    assert rep.reflection_defect <= 1e-8
    assert elapsed <= 10.0
    report(
        f"1 sphere exactness PASS: osc={rep.osc:.2e} m_err={m_err:.2e} "
        f"re-ri={rep.r_e - rep.r_i:.2e} defect={rep.reflection_defect:.2e} "
        f"runtime={elapsed:.1f}s"
    )


def test_criterion_02_ellipsoid_regression():
    rep = stability_ratio(sb.Ellipsoid([1.0, 1.0, 1.1]), sample_budget=4000, seed=0)
    assert rep.osc == pytest.approx(0.18678, rel=0.01)
    assert rep.r_e - rep.r_i == pytest.approx(0.1, abs=1e-4)
    assert float(np.abs(rep.center).max()) <= 1e-5
    assert rep.ratio == pytest.approx(0.5354, rel=0.02)
    report(
        f"2 ellipsoid regression PASS: osc={rep.osc:.6f} re-ri={rep.r_e - rep.r_i:.6f} "
        f"|O|={float(np.abs(rep.center).max()):.1e} ratio={rep.ratio:.5f}"
    )


def test_criterion_03_optimal_rate_sweep():
    t0 = time.monotonic()
    ts = np.linspace(0.02, 0.2, 10)
    oscs, spreads, ratios = [], [], []
    for t in ts:
        rep = stability_ratio(sb.Ellipsoid([1.0, 1.0, 1.0 + t]), sample_budget=1500, seed=0)
        oscs.append(rep.osc)
        spreads.append(rep.r_e - rep.r_i)
        ratios.append(rep.ratio)
        assert rep.cross_check_lhs <= rep.cross_check_rhs + rep.cross_check_slack
        assert rep.radial_map is not None and rep.radial_map.ok
    elapsed = time.monotonic() - t0
    slope = float(np.polyfit(np.log(oscs), np.log(spreads), 1)[0])
    ratios = np.array(ratios)
    spread_rel = float((ratios.max() - ratios.min()) / ratios.min())
    assert 0.85 <= slope <= 1.15
    assert spread_rel < 0.25
    assert elapsed <= 120.0
    report(
        f"3 optimal-rate sweep PASS: slope={slope:.4f} ratio_spread={spread_rel:.3f} "
        f"runtime={elapsed:.1f}s"
    )


def test_criterion_04_figure_ground_truth():
    result = figure_projection_check(step=0.01)
    assert result["kappa_projected_max_dev"] < 1e-6
    assert result["center_dev"] < 1e-6
    verdict = result["bound_verdict"]
    assert verdict.violations == 0
    report(
        f"4 projection ground truth PASS: kappa_dev={result['kappa_projected_max_dev']:.1e} "
        f"center_dev={result['center_dev']:.1e} bound_worst_slack={verdict.worst_slack:.1e} "
        f"trace_points={result['trace_points']}"
    )


def test_criterion_05_lemma_property_suites():
    t0 = time.monotonic()
    surfaces = {
        "sphere1": sb.Sphere([0.0, 0.0, 0.0], 1.0),
        "sphere2": sb.Sphere([0.2, -0.1, 0.3], 1.6),
        "ell_111": sb.Ellipsoid([1.0, 1.0, 1.1]),
        "ell_112": sb.Ellipsoid([1.0, 1.0, 2.0]),
    }
    tallies = []
    tilt_matched_total = [0]
    for name, surf in surfaces.items():
        v = verify_graph_bounds(surf, trials=10000, seed=0)
        assert v.violations == 0, f"graph-bounds on {name}: {v}"
        tallies.append((name, "graph-bounds", v.trials))

        graph = build_geodesic_graph(surf, 3000, k=16, seed=0)
        v = verify_distance_bounds(surf, graph, trials=10000, seed=0)
        assert v.violations == 0, f"distance-bounds on {name}: {v}"
        tallies.append((name, "distance-bounds", v.trials))

        trace_trials = 0
        for level_frac, w in (
            (0.25, np.array([0.0, 0.0, 1.0])),
            (-0.1, np.array([0.3, 0.2, 0.93])),
            (0.4, np.array([1.0, 0.0, 0.2])),
        ):
            w = w / np.linalg.norm(w)
            level = level_frac * surf.bounding_radius() + float(
                np.mean(surf.probe_points(500, 0) @ w)
            )
            v = slice_curvature_bounds(surf, w, level, step=0.015, tol=1e-4)
            assert v.violations == 0, f"slice-curvature on {name}: {v}"
            trace_trials += v.trials
        tallies.append((name, "slice-curvature", trace_trials))

        v = verify_normal_change(surf, trials=10000, seed=0)
        assert v.violations == 0, f"normal-change on {name}: {v}"
        tallies.append((name, "normal-change", v.trials))

        # matched-pair tilt checks: asymmetric directions legitimately skip
        # unmatchable trials, so spheres carry most of the matched budget
        rho = sb.touching_radius(surf)
        graph8 = build_geodesic_graph(surf, 6000, k=8, seed=0)
        tilt_trials = 0
        tilt_skips = 0
        dir_rng = np.random.default_rng(77)
        extra = dir_rng.standard_normal((11, 3))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        tilt_dirs = [np.eye(3)[i] for i in range(3)] + list(extra)
        for w in tilt_dirs:
            plane = critical_position(surf, w, sample_budget=1500)
            v = verify_normal_tilt(surf, plane, graph8, delta=0.25 * rho)
            assert v.violations == 0, f"normal-tilt on {name}, {w}: {v}"
            tilt_trials += v.trials
            tilt_skips += v.skipped
            if tilt_trials >= 10000:
                break
        floor = 4000 if name.startswith("sphere") else 500
        assert tilt_trials >= floor, (
            f"normal-tilt matched only {tilt_trials} trials on {name} "
            f"({tilt_skips} skipped)"
        )
        tallies.append((name, "normal-tilt", tilt_trials))
        tilt_matched_total[0] += tilt_trials

        center, _ = symmetry_center(surf, sample_budget=1500)
        r_i, r_e, _, _ = radial_bounds(surf, center, 1500)
        v = verify_annulus_normal(surf, center, r_i, r_e, sample_budget=10000)
        assert v.violations == 0, f"annulus-normal on {name}: {v}"
        tallies.append((name, "annulus-normal", v.trials))

    v = verify_normal_difference(trials=10000, seed=0)
    assert v.violations == 0
    tallies.append(("quadratics", "normal-difference", v.trials))
    assert tilt_matched_total[0] >= 10000, (
        f"normal-tilt matched {tilt_matched_total[0]} trials across the roster"
    )

    # negative controls must be able to fail
    neg = verify_graph_bounds(
        surfaces["ell_111"], trials=2000, seed=0, rho=2.0 * sb.touching_radius(surfaces["ell_111"])
    )
    assert neg.violations >= 1
    with pytest.raises(TangentialSliceError):
        slice_curvature_bounds(surfaces["sphere1"], np.array([0.0, 0.0, 1.0]), 0.999)

    elapsed = time.monotonic() - t0
    assert elapsed <= 180.0
    total = sum(t for _, _, t in tallies)
    report(
        f"5 lemma suites PASS: {len(tallies)} suites, {total} trials, 0 violations, "
        f"negative controls fired, runtime={elapsed:.1f}s"
    )


def test_criterion_06_constants_ledger():
    rep = compute_constants(2, 1.0, 4 * math.pi)
    hp = constants_highprec(2, 1.0, 4 * math.pi)
    assert rep.delta == 0.015625
    assert rep.big_l == pytest.approx(65536.0, rel=1e-12)
    assert rep.eps0 == pytest.approx(hp["eps0"], rel=1e-12)
    assert rep.eps0 == pytest.approx(7.4505e-9, rel=1e-3)  # displayed magnitude
    assert rep.n0 == hp["N0"] and math.isfinite(rep.n0)
    assert math.isfinite(rep.log10_c1)
    assert rep.log10_c1 == pytest.approx(hp["log10_C1"], rel=1e-9)
    assert check_smallness(0.0, rep).applicable
    report(
        f"6 constants ledger PASS: delta={rep.delta} L={rep.big_l:.0f} "
        f"eps0={rep.eps0:.6e} N0={rep.n0} log10C1={rep.log10_c1:.4e}"
    )


def test_criterion_07_reach_estimator():
    values = []
    for r in (0.5, 1.0, 2.0):
        est = sb.estimate_touching_radius(sb.Sphere([0.0, 0.0, 0.0], r), 2000)
        assert est == pytest.approx(r, rel=0.02)
        values.append((f"sphere R={r}", est))
    est = sb.estimate_touching_radius(sb.Ellipsoid([1.0, 1.0, 2.0]), 2000)
    assert est == pytest.approx(0.5, rel=0.02)
    values.append(("ellipsoid (1,1,2)", est))
    report("7 reach estimator PASS: " + ", ".join(f"{n}->{v:.4f}" for n, v in values))


def test_criterion_08_radial_map_corollary():
    # the prolate family passes with margin
    checked = []
    for t in (0.02, 0.1, 0.2):
        surf = sb.Ellipsoid([1.0, 1.0, 1.0 + t])
        center, _ = symmetry_center(surf, sample_budget=1500)
        r_i, r_e, _, _ = radial_bounds(surf, center, 1500)
        rep = radial_map_check(surf, center, r_i, r_e, n_rays=1000, sample_budget=1500)
        assert rep.ok, f"radial map failed on t={t}: {rep}"
        checked.append(t)
    # the deep-neck counterexample fails with multi-hit witnesses
    dumbbell = sb.HarmonicRadial([(2, 0, 1.8)], dim=3)
    center, _ = symmetry_center(dumbbell, sample_budget=3000)
    r_i, r_e, _, _ = radial_bounds(dumbbell, center, 3000)
    rep = radial_map_check(dumbbell, center, r_i, r_e, n_rays=2000, sample_budget=2000)
    assert not rep.ok
    assert not rep.rays_ok
    assert max(rep.hit_counts) >= 3
    assert len(rep.multi_hit_directions) >= 1
    report(
        f"8 radial map PASS: family ok at t={checked}; dumbbell fails with "
        f"hit profile {rep.hit_counts}"
    )


def test_criterion_09_harnack_chain_combinatorics():
    sphere = sb.Sphere([0.0, 0.0, 0.0], 1.0)
    graph = build_geodesic_graph(sphere, 4000, k=8, seed=0)
    led = compute_constants(2, 1.0, 4 * math.pi)
    eps = led.eps0 / 2.0
    rng = np.random.default_rng(11)
    n_pairs = 1000
    sources = rng.choice(graph.node_count, size=40, replace=False)
    checked = 0
    r0 = math.sin(led.delta / 2.0)
    for s in sources:
        # antipodal-ish partners: nodes nearly opposite the source
        anti = -graph.points[s]
        scores = graph.points @ anti
        candidates = np.argsort(scores)[-60:]
        picks = rng.choice(candidates, size=25, replace=False)
        for q in picks:
            chain = piecewise_geodesic_chain(graph, int(s), int(q), led.delta)
            assert np.all(chain.arc_lengths <= led.delta + 1e-12)
            assert chain.full_arcs <= led.big_l
            assert chain.total_length <= led.big_l
            hc = harnack_chain(chain, eps, 1.0, led.delta)
            expected = (1.0 - eps) ** np.arange(len(hc.radii)) * r0
            np.testing.assert_array_equal(hc.radii, expected)
            assert hc.steps_ok and hc.count_ok
            checked += 1
            if checked >= n_pairs:
                break
        if checked >= n_pairs:
            break
    assert checked >= n_pairs
    report(f"9 chain combinatorics PASS: {checked} chains, arc<=delta, N<=L, radii exact")


def test_criterion_10_determinism(tmp_path):
    spec = tmp_path / "ell.json"
    spec.write_text(json.dumps({"type": "ellipsoid", "semi_axes": [1.0, 1.0, 1.1]}))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.json"
        code = main(
            ["analyze", "--surface", str(spec), "--samples", "1500", "--seed", "42",
             "--out", str(out)]
        )
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    report(f"10 determinism PASS: identical {len(outs[0])}-byte reports")
