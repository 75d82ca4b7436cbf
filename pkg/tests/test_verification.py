"""Scenario checks: equality detection, precondition guards, suite aggregation."""

import math

import numpy as np
import pytest

from tubecomp import manifolds
from tubecomp.submanifolds import round_sphere, sub_torus
from tubecomp.tubes import QuadratureSpec
from tubecomp.verification import (
    Scenario,
    certify_rho_lower_bound,
    check_focal_radius,
    check_hessian_comparison,
    check_hk_bound,
    check_integral_bound,
    check_lemma_51_52,
    check_structural_residuals,
    run_suite,
)
from tubecomp.scenarios import build_scenario


def fast_flat_scenario(**overrides):
    M = manifolds.flat_torus(4)
    M.volume_validity_radius = math.pi
    sigma = sub_torus(M, [0], np.array([0.0, 1.0, 2.0, 3.0]))
    defaults = dict(
        name="fast_flat", manifold=M, sigma=sigma, k=1, H=0.0, p=4.0,
        radii=(0.4,), quad=QuadratureSpec(base_resolution=4, fiber_resolution=2),
        checks=("hk",), minimal=True, totally_geodesic=True, check_rays=6)
    defaults.update(overrides)
    return Scenario(**defaults)


@pytest.fixture(scope="module")
def flat_scenario():
    return fast_flat_scenario()


class TestCertification:
    def test_flat_nonnegative(self, flat_scenario):
        cert = certify_rho_lower_bound(flat_scenario, 1, 0.0, samples=128)
        assert cert["ok"]
        assert abs(cert["min_rho_k"]) <= 1e-9
        assert cert["declared_gap"] <= 1e-9

    def test_flat_fails_positive_bound(self, flat_scenario):
        cert = certify_rho_lower_bound(flat_scenario, 1, 0.5, samples=128)
        assert not cert["ok"]
        assert cert["margin"] == pytest.approx(-0.5, abs=1e-9)


class TestHkCheck:
    def test_flat_equality(self, flat_scenario):
        rep = check_hk_bound(flat_scenario, 0.4)
        assert rep.passed and rep.equality
        assert rep.measured == pytest.approx(
            2.0 * math.pi * (4.0 / 3.0) * math.pi * 0.4**3, rel=1e-9)

    def test_violated_precondition_reported(self, flat_scenario):
        bad = fast_flat_scenario(H=0.3)  # flat torus has rho_1 = 0 < k H
        rep = check_hk_bound(bad, 0.4)
        assert rep.status == "precondition-violation"
        assert not rep.passed
        assert "certification" in rep.details


class TestIntegralCheck:
    def test_flat_equality_both_norms(self, flat_scenario):
        reports = check_integral_bound(flat_scenario, 0.4)
        assert len(reports) == 2
        for rep in reports:
            assert rep.passed and rep.equality
            assert rep.details["rho_k_method"] == "declared"
        variants = {rep.details["norm_variant"] for rep in reports}
        assert variants == {"global", "tube"}

    def test_hypersurface_rejected(self):
        M = manifolds.sphere(3)
        sigma = round_sphere(M, 0.8)
        sc = Scenario(name="bad", manifold=M, sigma=sigma, k=1, H=0.0, p=4.0,
                      radii=(0.3,), quad=QuadratureSpec(base_resolution=4,
                                                        fiber_resolution=2))
        reports = check_integral_bound(sc, 0.3)
        assert len(reports) == 1
        assert reports[0].status == "precondition-violation"

    def test_positive_H_rejected(self, flat_scenario):
        bad = fast_flat_scenario(H=1.0)
        reports = check_integral_bound(bad, 0.4)
        assert reports[0].status == "precondition-violation"

    def test_nonminimal_rejected(self):
        # a circle of nonzero geodesic curvature in the flat torus: dimensions
        # satisfy 0 < m < n-1 but |eta| > 1e-6, so minimality must trip first
        from tubecomp.geometry import Box
        from tubecomp.submanifolds import EmbeddedSubmanifold

        M = manifolds.flat_torus(4)

        def wobbly(s):
            s = np.asarray(s, dtype=float)
            ang = s[..., 0]
            out = np.stack([ang, 1.0 + 0.2 * np.sin(ang),
                            np.full_like(ang, 2.0), np.full_like(ang, 3.0)],
                           axis=-1)
            return out

        sigma = EmbeddedSubmanifold(
            dim=1, embedding=wobbly,
            param_domain=Box([0.0], [2.0 * math.pi], (True,)),
            name="wobbly_circle")
        sc = Scenario(name="nonminimal", manifold=M, sigma=sigma, k=1, H=0.0,
                      p=4.0, radii=(0.2,),
                      quad=QuadratureSpec(base_resolution=4, fiber_resolution=2))
        rep = check_integral_bound(sc, 0.2)[0]
        assert rep.status == "precondition-violation"
        assert "minimality" in rep.details["reason"]


class TestFocalCheck:
    def test_nonpositive_H_is_violation(self, flat_scenario):
        rep = check_focal_radius(flat_scenario)
        assert rep.status == "precondition-violation"

    def test_equator_equality(self):
        sc = build_scenario("sn_equator")
        sc.quad = QuadratureSpec(base_resolution=4, fiber_resolution=2)
        rep = check_focal_radius(sc, n_rays=6)
        assert rep.passed and rep.equality
        assert rep.measured == pytest.approx(math.pi / 2.0, abs=1e-6)


class TestHessianCheck:
    def test_flat_both_branches(self, flat_scenario):
        reports = check_hessian_comparison(flat_scenario, n_rays=4, n_times=5)
        names = {rep.name for rep in reports}
        assert names == {"hessian_comparison[tangential]",
                         "hessian_comparison[generic]"}
        for rep in reports:
            assert rep.passed

    def test_false_hypothesis_reported(self):
        # claiming H = 0.5 on the flat torus must be caught by the exact
        # per-sample Ric_k evaluation
        sc = fast_flat_scenario(hessian_H=0.5, checks=("hessian",))
        reports = check_hessian_comparison(sc, n_rays=4, n_times=4)
        assert any(rep.status == "precondition-violation" for rep in reports)


class TestLemmaCheck:
    def test_flat_zero_cases(self, flat_scenario):
        reports = check_lemma_51_52(flat_scenario, n_rays=4, grid_points=65)
        assert [rep.name for rep in reports] == ["lemma_51", "lemma_52"]
        for rep in reports:
            assert rep.passed
            assert rep.measured <= 1e-9
        assert reports[1].details["jy_second_derivative_residual"] <= 1e-4

    def test_small_p_rejected(self):
        sc = fast_flat_scenario(p=2.5)  # n - k = 3
        reports = check_lemma_51_52(sc)
        assert reports[0].status == "precondition-violation"


class TestResidualCheck:
    def test_flat_passes(self, flat_scenario):
        rep = check_structural_residuals(flat_scenario, n_rays=3)
        assert rep.passed
        assert set(rep.details["residuals"]) == {
            "riccati", "log_density", "wronskian", "density_power",
            "taylor_shape"}


class TestRunSuite:
    def test_empty_set(self):
        report = run_suite([])
        assert report.ok
        assert report.entries == []
        assert "0 failures" in report.summary()

    def test_one_violation_entry(self):
        bad = fast_flat_scenario(H=0.3, checks=("hk",))
        report = run_suite([bad])
        assert len(report.precondition_violations) == 1
        assert report.ok  # violations are not bound failures

    def test_failure_detection(self, monkeypatch):
        from tubecomp import verification

        sc = fast_flat_scenario(checks=("hk",))
        original = verification.TubeSampler.volume

        def inflated(self, r):
            res = original(self, r)
            res.value *= 1.1
            return res

        monkeypatch.setattr(verification.TubeSampler, "volume", inflated)
        report = run_suite([sc])
        assert not report.ok
        assert len(report.failures) == 1

    def test_sorted_and_serializable(self):
        import json
        sc_b = fast_flat_scenario(name="bbb")
        sc_a = fast_flat_scenario(name="aaa")
        report = run_suite([sc_b, sc_a])
        names = [name for name, _ in report.entries]
        assert names == sorted(names)
        payload = json.dumps(report.as_dict(), sort_keys=True)
        assert "aaa" in payload
        rows = report.csv_rows()
        assert rows[0][0] == "scenario"
        assert len(rows) == 1 + len(report.entries)
