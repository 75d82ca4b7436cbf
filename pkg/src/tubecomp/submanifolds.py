"""Parameterized closed submanifolds: frames, second fundamental form, normal grids.

The Weingarten sign convention matches the ambient-derivative definition
S_xi = (grad xi)^tangential, equivalently <S_xi X, Y> = -<II(X, Y), xi>,
which makes <eta, xi> = tr(S_xi)/m and gives the round sphere in
Euclidean space S_xi = +(1/a) I for the outward normal. The sphere test
in the suite pins this sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Box, ChartManifold, christoffel_at, complete_frame, gram_schmidt
from .manifolds import ambient_tangent_to_chart, sphere_to_chart
from .quadrature import gauss_legendre_panels, periodic_trapezoid, unit_sphere_quadrature

__all__ = [
    "RankDeficiencyError",
    "NonNormalVectorError",
    "EmbeddedSubmanifold",
    "NormalFiberGrid",
    "frames_at",
    "second_fundamental_at",
    "weingarten",
    "mean_curvature_vector",
    "unit_normal_grid",
    "point",
    "sphere_point",
    "sub_torus",
    "closed_geodesic",
    "great_circle",
    "equator",
    "round_sphere",
    "SUBMANIFOLD_BUILDERS",
    "build_submanifold",
]


class RankDeficiencyError(ValueError):
    """Embedding differential fell below full rank at a parameter point."""


class NonNormalVectorError(ValueError):
    """Vector is not a unit normal of the submanifold at the given point."""


@dataclass(eq=False)
class EmbeddedSubmanifold:
    """Closed submanifold given by a vectorized parameter-box embedding.

    ``embedding`` maps (..., m) parameter arrays into chart coordinates
    (..., n); for m = 0 use param_domain None and an embedding ignoring
    its argument. Analytic jacobian/hessian callbacks are optional;
    central differences (1e-5 / 1e-4) are the fallback.
    """

    dim: int
    embedding: Callable[[np.ndarray], np.ndarray]
    param_domain: Box | None
    name: str = "submanifold"
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None   # (..., n, m)
    hessian: Callable[[np.ndarray], np.ndarray] | None = None    # (..., m, m, n)
    normal_frame_fn: Callable | None = None   # (s, x, g, tangent) -> (n-m, n)
    is_minimal_declared: bool = False
    totally_geodesic_declared: bool = False
    fd_step_first: float = 1e-5
    fd_step_second: float = 1e-4
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim > 0 and (self.param_domain is None
                             or self.param_domain.dim != self.dim):
            raise ValueError("parameter box must match submanifold dimension")

    def embed(self, s) -> np.ndarray:
        if self.dim == 0:
            shape = np.shape(s)[:-1] if np.ndim(s) > 1 else ()
            base = np.asarray(self.embedding(np.zeros(0)), dtype=float)
            return np.broadcast_to(base, shape + base.shape).copy()
        return np.asarray(self.embedding(np.asarray(s, dtype=float)), dtype=float)

    def jacobian_at(self, s: np.ndarray) -> np.ndarray:
        """d embedding / d s as columns: shape (n, m)."""
        s = np.asarray(s, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(s), dtype=float)
        h = self.fd_step_first
        eye = np.eye(self.dim)
        plus = self.embed(s[None, :] + h * eye)
        minus = self.embed(s[None, :] - h * eye)
        return ((plus - minus) / (2.0 * h)).T

    def hessian_at(self, s: np.ndarray) -> np.ndarray:
        """Second parameter derivatives of the embedding: shape (m, m, n).

        Central differences with one Richardson level (steps 2e-3 and
        1e-3); keeps the noise floor near 1e-9 so totally geodesic cases
        test clean at 1e-8.
        """
        s = np.asarray(s, dtype=float)
        if self.hessian is not None:
            return np.asarray(self.hessian(s), dtype=float)

        def stencil(h):
            m = self.dim
            eye = np.eye(m)
            x0 = self.embed(s)
            out = np.empty((m, m, x0.shape[-1]))
            for a in range(m):
                out[a, a] = (self.embed(s + h * eye[a]) - 2.0 * x0
                             + self.embed(s - h * eye[a])) / h**2
            for a in range(m):
                for b in range(a + 1, m):
                    mixed = (self.embed(s + h * (eye[a] + eye[b]))
                             - self.embed(s + h * (eye[a] - eye[b]))
                             - self.embed(s - h * (eye[a] - eye[b]))
                             + self.embed(s - h * (eye[a] + eye[b]))) / (4.0 * h**2)
                    out[a, b] = mixed
                    out[b, a] = mixed
            return out

        h = 20.0 * self.fd_step_second
        return (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0

    def base_quadrature(self, resolution) -> tuple[np.ndarray, np.ndarray]:
        """Parameter nodes and coordinate-measure weights (no metric factor)."""
        if self.dim == 0:
            return np.zeros((1, 0)), np.ones(1)
        box = self.param_domain
        if np.isscalar(resolution):
            resolution = [int(resolution)] * self.dim
        axes, weights = [], []
        for i, res in enumerate(resolution):
            if box.periodic[i]:
                nodes, w = periodic_trapezoid(box.hi[i] - box.lo[i], res, box.lo[i])
            else:
                nodes, w = gauss_legendre_panels(box.lo[i], box.hi[i], 1, res)
            axes.append(nodes)
            weights.append(w)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([mm.ravel() for mm in mesh], axis=-1)
        wmesh = np.meshgrid(*weights, indexing="ij")
        w = np.ones(len(pts))
        for wm in wmesh:
            w *= wm.ravel()
        return pts, w


def frames_at(sigma: EmbeddedSubmanifold, M: ChartManifold,
              s) -> tuple[np.ndarray, np.ndarray]:
    """g-orthonormal (tangent frame (m, n), normal frame (n-m, n)) at embed(s)."""
    s = np.asarray(s, dtype=float)
    x = sigma.embed(s)
    g = M.metric_at(x)
    m = sigma.dim
    if m == 0:
        tangent = np.zeros((0, M.dim))
        if sigma.normal_frame_fn is not None:
            return tangent, np.asarray(sigma.normal_frame_fn(s, x, g, tangent))
        return tangent, complete_frame(g, [])
    J = sigma.jacobian_at(s)
    tangent = gram_schmidt(g, list(J.T))
    if len(tangent) != m:
        raise RankDeficiencyError(
            f"embedding differential of {sigma.name} has rank {len(tangent)} < {m} at s={s}")
    if sigma.normal_frame_fn is not None:
        return tangent, np.asarray(sigma.normal_frame_fn(s, x, g, tangent))
    full = complete_frame(g, list(tangent))
    return full[:m], full[m:]


def second_fundamental_at(sigma: EmbeddedSubmanifold, M: ChartManifold,
                          s) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(tangent frame, normal frame, II tensor, position) at embed(s).

    The II tensor K[a, b, :] holds the ambient covariant second derivative
    along the orthonormal tangent directions; its normal component is the
    second fundamental form.
    """
    s = np.asarray(s, dtype=float)
    x = sigma.embed(s)
    g = M.metric_at(x)
    m = sigma.dim
    if m == 0:
        raise ValueError("second fundamental form undefined for a point (m = 0)")
    J = sigma.jacobian_at(s)
    gram = J.T @ g @ J
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(
            f"embedding differential of {sigma.name} rank-deficient at s={s}") from exc
    coeff = np.linalg.inv(L)                  # tangent frame = coeff @ J.T
    tangent = coeff @ J.T
    if sigma.normal_frame_fn is not None:
        normal = np.asarray(sigma.normal_frame_fn(s, x, g, tangent))
    else:
        normal = complete_frame(g, list(tangent))[m:]
    H2 = sigma.hessian_at(s)                  # (m, m, n) coordinate second derivatives
    gamma = christoffel_at(M, x)
    K_coord = H2 + np.einsum("ijk,ja,kb->abi", gamma, J, J)
    K = np.einsum("ac,bd,cdi->abi", coeff, coeff, K_coord)
    return tangent, normal, K, x


def weingarten(sigma: EmbeddedSubmanifold, M: ChartManifold, s,
               xi: np.ndarray) -> np.ndarray:
    """Shape operator S_xi in the orthonormal tangent frame (m x m, symmetric)."""
    tangent, normal, K, x = second_fundamental_at(sigma, M, s)
    g = M.metric_at(x)
    xi = np.asarray(xi, dtype=float)
    if abs(xi @ g @ xi - 1.0) > 1e-8:
        raise NonNormalVectorError(f"xi is not unit: |xi|^2 = {xi @ g @ xi}")
    if np.max(np.abs(tangent @ g @ xi)) > 1e-6:
        raise NonNormalVectorError("xi has a tangential component")
    return -np.einsum("abi,ij,j->ab", K, g, xi)


def mean_curvature_vector(sigma: EmbeddedSubmanifold, M: ChartManifold,
                          s) -> np.ndarray:
    """Normal vector eta with <eta, xi> = tr(S_xi)/m; zero vector for m = 0."""
    if sigma.dim == 0:
        return np.zeros(M.dim)
    tangent, normal, K, x = second_fundamental_at(sigma, M, s)
    g = M.metric_at(x)
    eta = np.zeros(M.dim)
    trace_K = np.einsum("aai->i", K)
    for nu in normal:
        eta += (-(trace_K @ g @ nu) / sigma.dim) * nu
    return eta


@dataclass(eq=False)
class NormalFiberGrid:
    """Product quadrature data over the unit normal bundle."""

    sigma: EmbeddedSubmanifold
    manifold: ChartManifold
    base_params: np.ndarray       # (B, m)
    base_weights: np.ndarray      # (B,) includes the induced volume density
    positions: np.ndarray         # (B, n)
    tangent_frames: np.ndarray    # (B, m, n)
    normal_frames: np.ndarray     # (B, n-m, n)
    second_fundamental: np.ndarray | None   # (B, m, m, n) or None for m = 0
    mean_curvature: np.ndarray    # (B, n)
    fiber_coeffs: np.ndarray      # (F, n-m) unit coefficient vectors
    fiber_weights: np.ndarray     # (F,)

    @property
    def sigma_volume(self) -> float:
        return float(np.sum(self.base_weights))

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.base_weights) * np.sum(self.fiber_weights))

    def normal_vector(self, b: int, f: int) -> np.ndarray:
        return self.fiber_coeffs[f] @ self.normal_frames[b]

    def weingarten_block(self, b: int, f: int) -> np.ndarray:
        """S_xi in the node's tangent frame for fiber direction f."""
        m = self.sigma.dim
        if m == 0:
            return np.zeros((0, 0))
        g = self.manifold.metric_at(self.positions[b])
        xi = self.normal_vector(b, f)
        return -np.einsum("abi,ij,j->ab", self.second_fundamental[b], g, xi)

    def eta_dot_xi(self, b: int, f: int) -> float:
        g = self.manifold.metric_at(self.positions[b])
        return float(self.mean_curvature[b] @ g @ self.normal_vector(b, f))


def unit_normal_grid(sigma: EmbeddedSubmanifold, M: ChartManifold,
                     base_resolution=8, fiber_resolution: int = 8,
                     mc_samples: int | None = None,
                     rng: np.random.Generator | None = None) -> NormalFiberGrid:
    """Product quadrature over the unit normal bundle.

    Fiber weights sum to vol(S^(n-m-1)) at every node (two antipodal
    normals of weight 1 for hypersurfaces); base weights integrate the
    induced volume, so the total weight is vol(Sigma) * vol(S^(n-m-1)).
    """
    n, m = M.dim, sigma.dim
    params, par_w = sigma.base_quadrature(base_resolution)
    B = len(params)
    positions = np.empty((B, n))
    tangents = np.empty((B, m, n))
    normals = np.empty((B, n - m, n))
    second = np.empty((B, m, m, n)) if m > 0 else None
    eta = np.empty((B, n))
    weights = np.empty(B)
    for b, s in enumerate(params):
        if m == 0:
            x = sigma.embed(s)
            g = M.metric_at(x)
            tangents[b] = np.zeros((0, n))
            if sigma.normal_frame_fn is not None:
                normals[b] = np.asarray(sigma.normal_frame_fn(s, x, g, tangents[b]))
            else:
                normals[b] = complete_frame(g, [])
            eta[b] = 0.0
            positions[b] = x
            weights[b] = par_w[b]
            continue
        tangent, normal, K, x = second_fundamental_at(sigma, M, s)
        g = M.metric_at(x)
        J = sigma.jacobian_at(s)
        gram = J.T @ g @ J
        positions[b] = x
        tangents[b] = tangent
        normals[b] = normal
        second[b] = K
        trace_K = np.einsum("aai->i", K)
        ev = np.zeros(n)
        for nu in normal:
            ev += (-(trace_K @ g @ nu) / m) * nu
        eta[b] = ev
        weights[b] = par_w[b] * math.sqrt(np.linalg.det(gram))
    fiber_coeffs, fiber_w = unit_sphere_quadrature(
        n - m - 1, resolution=fiber_resolution, mc_samples=mc_samples, rng=rng)
    return NormalFiberGrid(sigma=sigma, manifold=M, base_params=params,
                           base_weights=weights, positions=positions,
                           tangent_frames=tangents, normal_frames=normals,
                           second_fundamental=second, mean_curvature=eta,
                           fiber_coeffs=fiber_coeffs, fiber_weights=fiber_w)


# ---------------------------------------------------------------------------
# built-in submanifolds


def point(M: ChartManifold, location, normal_frame_fn=None) -> EmbeddedSubmanifold:
    loc = np.asarray(location, dtype=float)

    def embedding(_s):
        return loc.copy()

    return EmbeddedSubmanifold(dim=0, embedding=embedding, param_domain=None,
                               name="point", is_minimal_declared=True,
                               totally_geodesic_declared=True,
                               normal_frame_fn=normal_frame_fn)


def sphere_point(M: ChartManifold, ambient_location) -> EmbeddedSubmanifold:
    """Point of a stereographic round sphere with a deterministic ambient frame."""
    q0 = np.asarray(ambient_location, dtype=float)
    radius = M.extra["radius"]
    q0 = radius * q0 / np.linalg.norm(q0)
    basis = []
    for e in np.eye(M.dim + 1):
        v = e - (e @ q0) * q0 / radius**2
        for b in basis:
            v = v - (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            basis.append(v / nrm)
        if len(basis) == M.dim:
            break

    def normal_frame(_s, _x, _g, _tangent):
        return np.stack([ambient_tangent_to_chart(M, q0, w) for w in basis])

    sigma = point(M, sphere_to_chart(M, q0), normal_frame_fn=normal_frame)
    sigma.extra["ambient_location"] = q0
    return sigma


def sub_torus(M: ChartManifold, axes, offset) -> EmbeddedSubmanifold:
    """Coordinate sub-torus of a (possibly bumped) flat torus chart."""
    axes = list(axes)
    offset = np.asarray(offset, dtype=float)
    n = M.dim
    m = len(axes)
    side = M.domain.widths()[axes[0]]

    def embedding(s):
        s = np.asarray(s, dtype=float)
        out = np.broadcast_to(offset, s.shape[:-1] + (n,)).copy()
        for i, ax in enumerate(axes):
            out[..., ax] = s[..., i]
        return out

    def jac(s):
        s = np.asarray(s, dtype=float)
        J = np.zeros(s.shape[:-1] + (n, m))
        for i, ax in enumerate(axes):
            J[..., ax, i] = 1.0
        return J

    def hess(s):
        s = np.asarray(s, dtype=float)
        return np.zeros(s.shape[:-1] + (m, m, n))

    box = Box(np.zeros(m), side * np.ones(m), (True,) * m)
    return EmbeddedSubmanifold(dim=m, embedding=embedding, param_domain=box,
                               jacobian=jac, hessian=hess,
                               name=f"sub_torus{m}", is_minimal_declared=True,
                               totally_geodesic_declared=True)


def closed_geodesic(M: ChartManifold, axis: int = 0, offset=None) -> EmbeddedSubmanifold:
    """Closed coordinate geodesic of a flat torus chart."""
    if offset is None:
        offset = M.domain.lo + 0.5 * M.domain.widths()
    sigma = sub_torus(M, [axis], offset)
    sigma.name = "closed_geodesic"
    return sigma


def great_circle(M: ChartManifold, plane=(0, 1), phase: float = 0.0) -> EmbeddedSubmanifold:
    """Great circle of a stereographic round sphere, in the ambient plane given.

    The normal frame at each point is the (constant) family of ambient
    axes outside the circle's plane, pushed into the chart, so fiber
    angles correspond exactly to ambient directions.
    """
    radius = M.extra["radius"]
    n_amb = M.dim + 1
    e1 = np.eye(n_amb)[plane[0]]
    e2 = np.eye(n_amb)[plane[1]]
    others = [np.eye(n_amb)[c] for c in range(n_amb) if c not in plane]

    def ambient_point(s):
        ang = np.asarray(s, dtype=float)[..., 0] + phase
        return radius * (np.cos(ang)[..., None] * e1 + np.sin(ang)[..., None] * e2)

    def embedding(s):
        return sphere_to_chart(M, ambient_point(s))

    def normal_frame(s, _x, _g, _tangent):
        q = ambient_point(np.asarray(s, dtype=float))
        return np.stack([ambient_tangent_to_chart(M, q, w) for w in others])

    box = Box([0.0], [2.0 * math.pi], (True,))
    return EmbeddedSubmanifold(dim=1, embedding=embedding, param_domain=box,
                               name="great_circle", is_minimal_declared=True,
                               totally_geodesic_declared=True,
                               normal_frame_fn=normal_frame)


def equator(M: ChartManifold) -> EmbeddedSubmanifold:
    """Equatorial hypersurface S^(n-1) of a stereographic round S^n (n = 2, 3)."""
    radius = M.extra["radius"]
    n = M.dim
    if n == 2:
        sigma = great_circle(M, plane=(0, 1))
        sigma.name = "equator"
        return sigma
    if n != 3:
        raise ValueError("equator builder implemented for S^2 and S^3 ambients")

    def ambient_point(s):
        s = np.asarray(s, dtype=float)
        theta, phi = s[..., 0], s[..., 1]
        return radius * np.stack([np.sin(theta) * np.cos(phi),
                                  np.sin(theta) * np.sin(phi),
                                  np.cos(theta),
                                  np.zeros_like(theta)], axis=-1)

    def embedding(s):
        return sphere_to_chart(M, ambient_point(s))

    def normal_frame(s, _x, _g, _tangent):
        q = ambient_point(np.asarray(s, dtype=float))
        e4 = np.array([0.0, 0.0, 0.0, 1.0])
        return ambient_tangent_to_chart(M, q, e4)[None, :]

    box = Box([1e-8, 0.0], [math.pi - 1e-8, 2.0 * math.pi], (False, True))
    return EmbeddedSubmanifold(dim=2, embedding=embedding, param_domain=box,
                               name="equator", is_minimal_declared=True,
                               totally_geodesic_declared=True,
                               normal_frame_fn=normal_frame)


def round_sphere(M: ChartManifold, radius: float,
                 center=None) -> EmbeddedSubmanifold:
    """Round hypersurface sphere.

    In Euclidean ambients: the sphere of Euclidean radius ``radius`` about
    ``center``. In a stereographic round-sphere ambient S^3: the distance
    sphere of geodesic radius ``radius`` about the last coordinate pole.
    """
    kind = getattr(M, "extra", {}).get("kind", "euclidean")
    if kind == "sphere":
        if M.dim != 3:
            raise ValueError("geodesic round_sphere implemented for S^3 ambients")
        R = M.extra["radius"]
        rho = radius

        def direction(s):
            s = np.asarray(s, dtype=float)
            theta, phi = s[..., 0], s[..., 1]
            return np.stack([np.sin(theta) * np.cos(phi),
                             np.sin(theta) * np.sin(phi),
                             np.cos(theta)], axis=-1)

        def embedding(s):
            v = direction(s)
            q = R * np.concatenate([math.sin(rho) * v,
                                    math.cos(rho) * np.ones(v.shape[:-1] + (1,))],
                                   axis=-1)
            return sphere_to_chart(M, q)

        def normal_frame(s, _x, _g, _tangent):
            v = direction(np.asarray(s, dtype=float))
            q = R * np.concatenate([math.sin(rho) * v, [math.cos(rho)]])
            nu = np.concatenate([math.cos(rho) * v, [-math.sin(rho)]])
            return ambient_tangent_to_chart(M, q, nu)[None, :]

        box = Box([1e-8, 0.0], [math.pi - 1e-8, 2.0 * math.pi], (False, True))
        return EmbeddedSubmanifold(dim=2, embedding=embedding, param_domain=box,
                                   name=f"round_sphere_rho{radius:g}",
                                   normal_frame_fn=normal_frame)
    if M.dim != 3:
        raise ValueError("euclidean round_sphere implemented for R^3 ambients")
    c = np.zeros(3) if center is None else np.asarray(center, dtype=float)

    def embedding(s):
        s = np.asarray(s, dtype=float)
        theta, phi = s[..., 0], s[..., 1]
        return c + radius * np.stack([np.sin(theta) * np.cos(phi),
                                      np.sin(theta) * np.sin(phi),
                                      np.cos(theta)], axis=-1)

    box = Box([1e-8, 0.0], [math.pi - 1e-8, 2.0 * math.pi], (False, True))
    return EmbeddedSubmanifold(dim=2, embedding=embedding, param_domain=box,
                               name=f"round_sphere_a{radius:g}")


SUBMANIFOLD_BUILDERS = {
    "point": point,
    "closed_geodesic": closed_geodesic,
    "sub_torus": sub_torus,
    "equator": equator,
    "great_circle": great_circle,
    "round_sphere": round_sphere,
}


def build_submanifold(name: str, M: ChartManifold, **params) -> EmbeddedSubmanifold:
    """Construct a built-in submanifold by registry name."""
    if name not in SUBMANIFOLD_BUILDERS:
        raise KeyError(f"unknown submanifold '{name}'; known: {sorted(SUBMANIFOLD_BUILDERS)}")
    return SUBMANIFOLD_BUILDERS[name](M, **params)
