"""Frames, Weingarten maps, mean curvature, and normal-bundle quadrature."""

import math

import numpy as np
import pytest

from tubecomp import manifolds
from tubecomp.models import sphere_volume
from tubecomp.submanifolds import (
    NonNormalVectorError,
    RankDeficiencyError,
    EmbeddedSubmanifold,
    build_submanifold,
    frames_at,
    great_circle,
    mean_curvature_vector,
    point,
    round_sphere,
    sub_torus,
    unit_normal_grid,
    weingarten,
)
from tubecomp.geometry import Box


def torus4():
    return manifolds.flat_torus(4)


class TestFrames:
    def test_sub_torus_coordinate_splitting(self):
        M = torus4()
        sigma = sub_torus(M, [0], np.array([0.0, 1.0, 2.0, 3.0]))
        tangent, normal = frames_at(sigma, M, np.array([0.3]))
        assert np.allclose(np.abs(tangent), np.eye(4)[:1], atol=1e-12)
        assert np.allclose(np.abs(normal), np.eye(4)[1:], atol=1e-12)

    def test_equator_frames(self):
        M = manifolds.sphere(3)
        sigma = build_submanifold("equator", M)
        g_at = M.metric_at
        for s in ([0.7, 1.1], [2.0, 4.0]):
            tangent, normal = frames_at(sigma, M, np.array(s))
            x = sigma.embed(np.array(s))
            g = g_at(x)
            full = np.vstack([tangent, normal])
            gram = full @ g @ full.T
            assert np.max(np.abs(gram - np.eye(3))) <= 1e-10

    def test_great_circle_frames(self):
        M = manifolds.sphere(3)
        sigma = great_circle(M)
        tangent, normal = frames_at(sigma, M, np.array([1.2]))
        assert tangent.shape == (1, 3) and normal.shape == (2, 3)
        x = sigma.embed(np.array([1.2]))
        g = M.metric_at(x)
        full = np.vstack([tangent, normal])
        assert np.max(np.abs(full @ g @ full.T - np.eye(3))) <= 1e-10

    def test_rank_deficiency_error(self):
        M = torus4()

        def degenerate(s):
            s = np.asarray(s, dtype=float)
            out = np.zeros(s.shape[:-1] + (4,))
            return out  # constant map, rank 0

        sigma = EmbeddedSubmanifold(
            dim=1, embedding=degenerate,
            param_domain=Box([0.0], [2.0 * math.pi], (True,)))
        with pytest.raises(RankDeficiencyError):
            frames_at(sigma, M, np.array([0.1]))


class TestWeingarten:
    def test_totally_geodesic_sub_torus(self):
        M = torus4()
        sigma = sub_torus(M, [0, 1], np.array([0.0, 0.0, 2.0, 3.0]))
        tangent, normal = frames_at(sigma, M, np.array([0.3, 0.4]))
        S = weingarten(sigma, M, np.array([0.3, 0.4]), normal[0])
        assert np.max(np.abs(S)) <= 1e-10

    def test_round_sphere_sign_mandatory(self):
        # outward normal on S^2(a) in R^3 must give S_xi = +(1/a) I and
        # eta = +(1/a) * outward; this pins the global sign convention
        M = manifolds.euclidean(3)
        a = 1.7
        sigma = round_sphere(M, a)
        s = np.array([1.1, 0.6])
        x = sigma.embed(s)
        outward = x / np.linalg.norm(x)
        S = weingarten(sigma, M, s, outward)
        assert np.allclose(S, (1.0 / a) * np.eye(2), atol=1e-6)
        assert np.max(np.abs(S - S.T)) <= 1e-8
        eta = mean_curvature_vector(sigma, M, s)
        assert np.linalg.norm(eta) == pytest.approx(1.0 / a, abs=1e-6)
        assert eta @ outward == pytest.approx(1.0 / a, abs=1e-6)

    def test_equator_totally_geodesic(self):
        M = manifolds.sphere(3)
        sigma = build_submanifold("equator", M)
        s = np.array([0.9, 2.2])
        _, normal = frames_at(sigma, M, s)
        S = weingarten(sigma, M, s, normal[0])
        assert np.max(np.abs(S)) <= 1e-8

    def test_non_normal_vector_rejected(self):
        M = torus4()
        sigma = sub_torus(M, [0], np.array([0.0, 1.0, 2.0, 3.0]))
        with pytest.raises(NonNormalVectorError):
            weingarten(sigma, M, np.array([0.3]), np.eye(4)[0])  # tangent dir
        with pytest.raises(NonNormalVectorError):
            weingarten(sigma, M, np.array([0.3]), 2.0 * np.eye(4)[1])  # not unit


class TestMeanCurvature:
    def test_sub_torus_zero(self):
        M = torus4()
        sigma = sub_torus(M, [0], np.array([0.0, 1.0, 2.0, 3.0]))
        eta = mean_curvature_vector(sigma, M, np.array([0.5]))
        assert np.max(np.abs(eta)) <= 1e-10

    def test_great_circle_geodesic(self):
        M = manifolds.sphere(3)
        sigma = great_circle(M)
        for s in (0.0, 1.0, 2.5, 4.4):
            eta = mean_curvature_vector(sigma, M, np.array([s]))
            x = sigma.embed(np.array([s]))
            g = M.metric_at(x)
            assert math.sqrt(eta @ g @ eta) <= 1e-8

    def test_point_returns_zero(self):
        M = manifolds.hyperbolic(3)
        sigma = point(M, [0.0, 0.0, 1.0])
        assert np.allclose(mean_curvature_vector(sigma, M, np.zeros(0)), 0.0)

    def test_weingarten_trace_consistency(self):
        # <eta, xi> from weingarten traces vs the mean curvature vector
        M = manifolds.sphere(3)
        sigma = round_sphere(M, 0.8)
        rng = np.random.default_rng(4)
        s = np.array([1.2, 0.7])
        x = sigma.embed(s)
        g = M.metric_at(x)
        _, normal = frames_at(sigma, M, s)
        eta = mean_curvature_vector(sigma, M, s)
        for _ in range(5):
            c = rng.standard_normal(1)
            xi = (c[0] * normal[0]) / abs(c[0])
            S = weingarten(sigma, M, s, xi)
            lhs = np.trace(S) / sigma.dim
            assert lhs == pytest.approx(float(eta @ g @ xi), abs=1e-9)

    def test_trace_consistency_random_fibers_codim3(self):
        # curve with nonzero curvature vector in T^4: random unit normals
        M = manifolds.flat_torus(4)

        def wobbly(s):
            s = np.asarray(s, dtype=float)
            ang = s[..., 0]
            return np.stack([ang, 1.0 + 0.3 * np.sin(ang),
                             2.0 + 0.2 * np.cos(2.0 * ang),
                             np.full_like(ang, 3.0)], axis=-1)

        sigma = EmbeddedSubmanifold(
            dim=1, embedding=wobbly,
            param_domain=Box([0.0], [2.0 * math.pi], (True,)),
            name="wobbly")
        rng = np.random.default_rng(8)
        s = np.array([0.9])
        x = sigma.embed(s)
        g = M.metric_at(x)
        _, normal = frames_at(sigma, M, s)
        eta = mean_curvature_vector(sigma, M, s)
        assert np.linalg.norm(eta) > 1e-3  # genuinely curved
        for _ in range(6):
            c = rng.standard_normal(3)
            c /= np.linalg.norm(c)
            xi = c @ normal
            S = weingarten(sigma, M, s, xi)
            assert np.trace(S) / 1.0 == pytest.approx(float(eta @ g @ xi),
                                                      abs=1e-9)


class TestUnitNormalGrid:
    def test_sub_torus_total_weight(self):
        M = torus4()
        sigma = sub_torus(M, [0], np.array([0.0, 1.0, 2.0, 3.0]))
        grid = unit_normal_grid(sigma, M, base_resolution=8, fiber_resolution=8)
        expect = 2.0 * math.pi * 4.0 * math.pi
        assert grid.total_weight == pytest.approx(expect, rel=1e-8)
        assert grid.sigma_volume == pytest.approx(2.0 * math.pi, rel=1e-10)
        assert np.sum(grid.fiber_weights) == pytest.approx(
            sphere_volume(2), rel=1e-8)

    def test_point_full_sphere(self):
        M = manifolds.euclidean(3)
        sigma = point(M, [0.0, 0.0, 0.0])
        grid = unit_normal_grid(sigma, M, fiber_resolution=8)
        assert grid.total_weight == pytest.approx(4.0 * math.pi, rel=1e-8)

    def test_hypersurface_two_point_fiber(self):
        M = manifolds.sphere(3)
        sigma = build_submanifold("equator", M)
        grid = unit_normal_grid(sigma, M, base_resolution=12, fiber_resolution=8)
        assert len(grid.fiber_coeffs) == 2
        # equator of the unit S^3 is a unit S^2 of area 4 pi
        assert grid.sigma_volume == pytest.approx(4.0 * math.pi, rel=1e-6)
        assert grid.total_weight == pytest.approx(8.0 * math.pi, rel=1e-6)

    def test_frames_orthonormal_at_nodes(self):
        M = manifolds.sphere(3)
        sigma = great_circle(M)
        grid = unit_normal_grid(sigma, M, base_resolution=6, fiber_resolution=4)
        for b in range(len(grid.base_params)):
            g = M.metric_at(grid.positions[b])
            full = np.vstack([grid.tangent_frames[b], grid.normal_frames[b]])
            assert np.max(np.abs(full @ g @ full.T - np.eye(3))) <= 1e-10

    def test_eta_dot_xi_matches_weingarten_trace(self):
        M = manifolds.sphere(3)
        sigma = round_sphere(M, 0.8)
        grid = unit_normal_grid(sigma, M, base_resolution=6, fiber_resolution=4)
        for b in (0, 3):
            for f in range(len(grid.fiber_coeffs)):
                S = grid.weingarten_block(b, f)
                assert np.trace(S) / sigma.dim == pytest.approx(
                    grid.eta_dot_xi(b, f), abs=1e-9)

    def test_great_circle_volume(self):
        M = manifolds.sphere(3, radius=1.0)
        sigma = great_circle(M)
        grid = unit_normal_grid(sigma, M, base_resolution=16, fiber_resolution=8)
        assert grid.sigma_volume == pytest.approx(2.0 * math.pi, rel=1e-9)
