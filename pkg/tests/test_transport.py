"""Ray integration: Jacobi matrices, shape operators, focal times, residual laws."""

import math

import numpy as np
import pytest

from tubecomp import manifolds
from tubecomp.manifolds import ambient_tangent_to_chart, axes_with_pole
from tubecomp.submanifolds import (
    frames_at,
    great_circle,
    point,
    round_sphere,
    sphere_point,
    sub_torus,
    build_submanifold,
)
from tubecomp.transport import (
    FocalSingularityError,
    NormalRay,
    RayIntegrationError,
    focal_distance,
    integrate_ray,
    jy_factors,
    partial_trace_shape,
    shape_operator,
    split_mean_curvature,
    structural_residuals,
    volume_density,
)
from tubecomp.models import model_shape_trace

S3_POLAR_AXES = axes_with_pole([0.0, 0.0, math.cos(0.196), math.sin(0.196)])
S3_TILTED_AXES = axes_with_pole([math.cos(0.4) * math.cos(0.55),
                                 math.cos(0.4) * math.sin(0.55),
                                 0.0, math.sin(0.4)])


def flat_circle_ray(t_max=2.0):
    M = manifolds.flat_torus(4)
    sigma = sub_torus(M, [0], np.array([0.0, 1.0, 2.0, 3.0]))
    ray = NormalRay(np.array([0.5]), np.eye(4)[2], t_max=t_max)
    return M, sigma, ray


def s3_circle_ray(t_max=1.5, psi=0.0):
    M = manifolds.sphere(3, axes=S3_POLAR_AXES)
    sigma = great_circle(M)
    s = np.array([0.7])
    q = np.array([math.cos(0.7), math.sin(0.7), 0.0, 0.0])
    w = np.array([0.0, 0.0, math.cos(psi), math.sin(psi)])
    xi = ambient_tangent_to_chart(M, q, w)
    return M, sigma, NormalRay(s, xi, t_max=t_max)


def hyperbolic_point_ray(t_max=2.2):
    M = manifolds.hyperbolic(3)
    sigma = point(M, [0.0, 0.0, 1.0])
    g = M.metric_at(np.array([0.0, 0.0, 1.0]))
    xi = np.array([0.3, -0.2, 0.5])
    xi = xi / math.sqrt(xi @ g @ xi)
    return M, sigma, NormalRay(np.zeros(0), xi, t_max=t_max)


class TestIntegrateRay:
    def test_flat_torus_linear_jacobi(self):
        M, sigma, ray = flat_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(1.3)
        assert np.allclose(st.J_mat, np.diag([1.0, 1.3, 1.3]), atol=1e-10)
        assert np.allclose(st.J_prime, np.diag([0.0, 1.0, 1.0]), atol=1e-10)
        assert volume_density(st) == pytest.approx(1.3**2, rel=1e-9)

    def test_s3_great_circle_blocks(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        t = 0.9
        st = sol.state_at(t)
        assert np.allclose(st.J_mat, np.diag([math.cos(t), math.sin(t)]), atol=1e-8)
        assert volume_density(st) == pytest.approx(math.cos(t) * math.sin(t), abs=1e-8)

    def test_hyperbolic_point_sinh(self):
        M, sigma, ray = hyperbolic_point_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(1.0)
        assert np.allclose(st.J_mat, math.sinh(1.0) * np.eye(2), atol=1e-8)

    def test_unit_speed_and_frame_orthonormality(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        for t in (0.2, 0.7, 1.2):
            st = sol.state_at(t)
            g = M.metric_at(st.position)
            assert st.velocity @ g @ st.velocity == pytest.approx(1.0, abs=1e-8)
            rows = np.vstack([st.frame, st.velocity])
            gram = rows @ g @ rows.T
            assert np.max(np.abs(gram - np.eye(3))) <= 1e-8

    def test_chart_exit_reports_failing_t(self):
        # euclidean chart is a finite box; a long ray must exit it
        M = manifolds.euclidean(3, halfwidth=2.0)
        sigma = point(M, [0.0, 0.0, 0.0])
        ray = NormalRay(np.zeros(0), np.array([1.0, 0.0, 0.0]), t_max=10.0)
        with pytest.raises(RayIntegrationError) as err:
            integrate_ray(M, sigma, ray)
        assert 1.9 <= err.value.t <= 2.3


class TestShapeOperator:
    def test_hyperbolic_coth(self):
        M, sigma, ray = hyperbolic_point_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(1.0)
        S = shape_operator(st)
        assert np.allclose(S, (1.0 / math.tanh(1.0)) * np.eye(2), atol=1e-8)
        assert np.max(np.abs(S - S.T)) <= 1e-7

    def test_flat_blocks(self):
        M, sigma, ray = flat_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(0.8)
        assert np.allclose(shape_operator(st), np.diag([0.0, 1.25, 1.25]), atol=1e-9)

    def test_s3_blocks_and_split(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        t = math.pi / 4.0
        S = shape_operator(sol.state_at(t))
        assert np.allclose(S, np.diag([-math.tan(t), 1.0 / math.tan(t)]), atol=1e-8)
        phi, psi = split_mean_curvature(sol.state_at(t))
        assert phi == pytest.approx(-1.0, abs=1e-8)
        assert psi == pytest.approx(1.0, abs=1e-8)

    def test_focal_singularity_error(self):
        M, sigma, ray = s3_circle_ray(t_max=2.0)
        sol = integrate_ray(M, sigma, ray)
        with pytest.raises(FocalSingularityError):
            shape_operator(sol.state_at(math.pi / 2.0))

    def test_space_form_totally_geodesic_split(self):
        # phi = -m H sn/cs, psi = (n-m-1) cs/sn in a space form around
        # a totally geodesic submanifold
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        for t in (0.3, 0.8, 1.2):
            phi, psi = split_mean_curvature(sol.state_at(t))
            assert phi == pytest.approx(-math.tan(t), abs=1e-8)
            assert psi == pytest.approx(1.0 / math.tan(t), abs=1e-8)


class TestPartialTrace:
    def test_full_trace_is_mean_curvature(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(0.6)
        full = partial_trace_shape(st, np.eye(2))
        phi, psi = split_mean_curvature(st)
        assert full == pytest.approx(phi + psi, abs=1e-10)

    def test_first_block_is_phi(self):
        M, sigma, ray = flat_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(0.9)
        assert partial_trace_shape(st, np.eye(3)[:1]) == pytest.approx(
            split_mean_curvature(st)[0], abs=1e-12)

    def test_isotropic_any_subspace(self):
        M, sigma, ray = hyperbolic_point_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(1.3)
        rng = np.random.default_rng(0)
        v = rng.standard_normal(2)
        v /= np.linalg.norm(v)
        val = partial_trace_shape(st, v[None, :])
        assert val == pytest.approx(1.0 / math.tanh(1.3), abs=1e-8)

    def test_basis_independence(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        st = sol.state_at(0.5)
        a = partial_trace_shape(st, np.eye(2))
        ang = 0.37
        rot = np.array([[math.cos(ang), math.sin(ang)],
                        [-math.sin(ang), math.cos(ang)]])
        b = partial_trace_shape(st, rot)
        assert a == pytest.approx(b, abs=1e-10)

    def test_rejects_non_orthonormal(self):
        M, sigma, ray = flat_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        with pytest.raises(ValueError):
            partial_trace_shape(sol.state_at(0.5), np.array([[1.0, 1.0, 0.0]]))


class TestFocalDistance:
    def test_equator_pi_over_two(self):
        M = manifolds.sphere(3, axes=S3_TILTED_AXES)
        sigma = build_submanifold("equator", M)
        s = np.array([0.9, 2.1])
        _, normal = frames_at(sigma, M, s)
        ray = NormalRay(s, normal[0], t_max=2.2)
        t = focal_distance(M, sigma, ray)
        assert t == pytest.approx(math.pi / 2.0, abs=1e-9)

    def test_point_conjugate_at_pi(self):
        M = manifolds.sphere(3, axes=axes_with_pole(
            [math.cos(2.0), 0.3 * math.sin(2.0), 0.8 * math.sin(2.0),
             math.sqrt(1.0 - 0.09 - 0.64) * math.sin(2.0)]))
        sigma = sphere_point(M, np.array([1.0, 0.0, 0.0, 0.0]))
        g = M.metric_at(sigma.embed(np.zeros(0)))
        xi = ambient_tangent_to_chart(M, np.array([1.0, 0.0, 0.0, 0.0]),
                                      np.array([0.0, 0.4, -0.5, math.sqrt(1 - 0.41)]))
        xi = xi / math.sqrt(xi @ g @ xi)
        ray = NormalRay(np.zeros(0), xi, t_max=3.5)
        t = focal_distance(M, sigma, ray)
        assert t == pytest.approx(math.pi, abs=1e-8)

    def test_flat_none_in_range(self):
        M, sigma, ray = flat_circle_ray(t_max=10.0)
        assert focal_distance(M, sigma, ray) is None

    def test_small_sphere_inward_focus(self):
        M = manifolds.sphere(3, axes=S3_TILTED_AXES)
        sigma = round_sphere(M, 0.8)
        s = np.array([1.1, 0.7])
        _, normal = frames_at(sigma, M, s)
        focals = []
        for sgn in (1.0, -1.0):
            ray = NormalRay(s, sgn * normal[0], t_max=2.6)
            focals.append(focal_distance(M, sigma, ray))
        assert min(focals) == pytest.approx(0.8, abs=1e-7)
        assert max(focals) == pytest.approx(math.pi - 0.8, abs=1e-7)


class TestJYFactors:
    def test_flat(self):
        M, sigma, ray = flat_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        jj, yy = jy_factors(sol.state_at(1.1))
        assert jj == pytest.approx(1.0, abs=1e-9)
        assert yy == pytest.approx(1.1, rel=1e-9)

    def test_s3_great_circle(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        t = 0.9
        jj, yy = jy_factors(sol.state_at(t))
        assert jj == pytest.approx(math.cos(t), abs=1e-8)
        assert yy == pytest.approx(math.sin(t), abs=1e-8)

    def test_product_identity(self):
        # J^m Y^(n-m-1) = det J to 1e-7 relative on a curved, non-symmetric ray
        M = manifolds.bump_torus(4, amplitude=0.1, width=1.2)
        sigma = sub_torus(M, [0], np.array([0.0, 0.7, 2.2, 2.6]))
        g = M.metric_at(sigma.embed(np.array([0.4])))
        xi = np.array([0.0, 1.0, 0.4, 0.2])
        xi = xi / math.sqrt(xi @ g @ xi)
        sol = integrate_ray(M, sigma, NormalRay(np.array([0.4]), xi, t_max=1.6))
        for t in (0.5, 1.0, 1.5):
            st = sol.state_at(t)
            jj, yy = jy_factors(st)
            assert jj**1 * yy**2 == pytest.approx(volume_density(st), rel=1e-7)


class TestStructuralResiduals:
    @pytest.mark.parametrize("maker", [flat_circle_ray, s3_circle_ray,
                                       hyperbolic_point_ray])
    def test_space_form_rays(self, maker):
        M, sigma, ray = maker()
        sol = integrate_ray(M, sigma, ray)
        res = structural_residuals(sol)
        assert res["wronskian"] <= 1e-8
        assert res["log_density"] <= 1e-6
        assert res["riccati"] <= 1e-5
        assert res["density_power"] <= 1e-3
        assert res["taylor_shape"] <= 1e-2

    def test_bump_ray(self):
        M = manifolds.bump_torus(4, amplitude=0.1, width=1.2)
        sigma = sub_torus(M, [0], np.array([0.0, 0.7, 2.2, 2.6]))
        g = M.metric_at(sigma.embed(np.array([0.4])))
        xi = np.array([0.0, 1.0, 0.0, 0.0])
        xi = xi / math.sqrt(xi @ g @ xi)
        sol = integrate_ray(M, sigma, NormalRay(np.array([0.4]), xi, t_max=1.8))
        res = structural_residuals(sol)
        assert res["wronskian"] <= 1e-8
        assert res["log_density"] <= 1e-6
        assert res["riccati"] <= 1e-5
        assert res["density_power"] <= 1e-3
        assert res["taylor_shape"] <= 1e-2


class TestScalarRiccatiInequality:
    def test_partial_trace_riccati_pointwise(self):
        # w = tr_W(S)/k obeys w' + w^2 <= -Ric_k(velocity, W_t)/k + 1e-5
        # for parallel W along a genuinely curved, non-symmetric ray
        from tubecomp.geometry import connection_and_curvature

        M = manifolds.bump_torus(4, amplitude=0.1, width=1.2)
        sigma = sub_torus(M, [0], np.array([0.0, 0.7, 2.2, 2.6]))
        g = M.metric_at(sigma.embed(np.array([0.4])))
        xi = np.array([0.0, 1.0, 0.3, -0.2])
        xi = xi / math.sqrt(xi @ g @ xi)
        sol = integrate_ray(M, sigma, NormalRay(np.array([0.4]), xi, t_max=1.8))
        rng = np.random.default_rng(9)
        h = 1e-4
        for _ in range(4):
            k = int(rng.integers(1, 4))
            W = np.linalg.qr(rng.standard_normal((3, k)))[0][:, :k].T
            for t in (0.4, 0.9, 1.4):
                w_at = lambda s: partial_trace_shape(sol.state_at(s), W) / k
                wdot = (w_at(t + h) - w_at(t - h)) / (2.0 * h)
                st = sol.state_at(t)
                _, _, rm = connection_and_curvature(M, st.position)
                rmat = np.einsum("ijkl,ai,j,bk,l->ab", rm, st.frame,
                                 st.velocity, st.frame, st.velocity)
                ric = float(np.einsum("ai,ij,aj->", W, rmat, W))
                assert wdot + w_at(t) ** 2 <= -ric / k + 1e-5


class TestHessianComparisonAlongRays:
    def test_s3_tangential_branch_equality(self):
        # totally geodesic circle in the round sphere realizes equality
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        for t in (0.3, 0.7, 1.1):
            st = sol.state_at(t)
            tr = partial_trace_shape(st, np.eye(2)[:1])
            model = model_shape_trace(1.0, 1, 0.0, t)
            assert tr <= model + 1e-6
            assert tr == pytest.approx(model, abs=1e-6)

    def test_s3_generic_branch_equality(self):
        M, sigma, ray = s3_circle_ray()
        sol = integrate_ray(M, sigma, ray)
        for t in (0.3, 0.7, 1.1):
            st = sol.state_at(t)
            tr = partial_trace_shape(st, np.eye(2)[1:])
            model = model_shape_trace(1.0, 1, None, t)
            assert tr <= model + 1e-6
            assert tr == pytest.approx(model, abs=1e-6)

    def test_hyperbolic_laplacian_equality(self):
        M, sigma, ray = hyperbolic_point_ray()
        sol = integrate_ray(M, sigma, ray)
        for t in np.linspace(0.1, 2.0, 8):
            st = sol.state_at(float(t))
            tr = partial_trace_shape(st, np.eye(2))
            assert tr == pytest.approx(2.0 / math.tanh(t), abs=1e-5)
