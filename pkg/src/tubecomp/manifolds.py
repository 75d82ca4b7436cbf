"""Built-in chart manifolds: space forms, tori, products, warped and bump metrics.

All metric callables are vectorized over leading batch axes and the hot
ones (space forms, conformal bumps) carry analytic first and second
derivative callbacks, so ray integration never pays finite-difference
costs on them.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Box, ChartManifold

__all__ = [
    "euclidean",
    "flat_torus",
    "sphere",
    "sphere_colatitude",
    "hyperbolic",
    "product",
    "warped_product",
    "bump_torus",
    "axes_with_pole",
    "sphere_to_chart",
    "chart_to_sphere",
    "build_manifold",
    "MANIFOLD_BUILDERS",
]


def _flat_metric(n):
    eye = np.eye(n)

    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape[:-1] + (n, n)).copy()

    def grad(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n))

    def hess(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (n, n, n, n))

    return metric, grad, hess


def euclidean(n: int, halfwidth: float = 6.0) -> ChartManifold:
    """Flat R^n on an open box chart."""
    metric, grad, hess = _flat_metric(n)
    domain = Box(-halfwidth * np.ones(n), halfwidth * np.ones(n), (False,) * n)
    return ChartManifold(dim=n, metric=metric, domain=domain, metric_grad=grad,
                         metric_hess=hess, name=f"euclidean{n}",
                         rho_exact={k: 0.0 for k in range(1, n)})


def flat_torus(n: int, side: float = 2.0 * math.pi) -> ChartManifold:
    """Flat torus with all periods equal to ``side``."""
    metric, grad, hess = _flat_metric(n)
    domain = Box(np.zeros(n), side * np.ones(n), (True,) * n)
    return ChartManifold(dim=n, metric=metric, domain=domain, metric_grad=grad,
                         metric_hess=hess, name=f"flat_torus{n}",
                         rho_exact={k: 0.0 for k in range(1, n)})


def axes_with_pole(pole: np.ndarray) -> np.ndarray:
    """Orthonormal axes matrix whose last row is the given unit direction.

    Used to park a stereographic projection point away from every
    quadrature ray of a scenario.
    """
    pole = np.asarray(pole, dtype=float)
    pole = pole / np.linalg.norm(pole)
    d = len(pole)
    cols = [pole]
    for e in np.eye(d):
        v = e.copy()
        for b in cols:
            v -= (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            cols.append(v / nrm)
        if len(cols) == d:
            break
    return np.vstack(cols[1:] + [pole])


def sphere(n: int, radius: float = 1.0, axes: np.ndarray | None = None,
           halfwidth: float = 64.0) -> ChartManifold:
    """Round S^n in a stereographic chart: g = 4 R^2 / (1+|y|^2)^2 * I.

    The chart omits a single projection point; ``axes`` is an orthonormal
    (n+1)x(n+1) matrix whose last row is that point's direction, letting
    scenarios park it away from every quadrature ray. Christoffel symbols
    are bounded on the whole chart.
    """
    if axes is None:
        axes = np.eye(n + 1)
    axes = np.asarray(axes, dtype=float)
    R2 = radius * radius

    def conformal(x):
        x = np.asarray(x, dtype=float)
        return 1.0 + np.sum(x * x, axis=-1)

    def metric(x):
        x = np.asarray(x, dtype=float)
        u = conformal(x)
        eye = np.eye(n)
        return (4.0 * R2 / u**2)[..., None, None] * eye

    def grad(x):
        x = np.asarray(x, dtype=float)
        u = conformal(x)
        dc = -16.0 * R2 * x / (u**3)[..., None]              # (..., k)
        return dc[..., :, None, None] * np.eye(n)

    def hess(x):
        x = np.asarray(x, dtype=float)
        u = conformal(x)
        eye = np.eye(n)
        d2c = (-16.0 * R2 * eye * (u**-3)[..., None, None]
               + 96.0 * R2 * (x[..., :, None] * x[..., None, :]) * (u**-4)[..., None, None])
        return d2c[..., :, :, None, None] * eye

    domain = Box(-halfwidth * np.ones(n), halfwidth * np.ones(n), (False,) * n)
    M = ChartManifold(dim=n, metric=metric, domain=domain, metric_grad=grad,
                      metric_hess=hess, name=f"sphere{n}_r{radius:g}",
                      rho_exact={k: k / R2 for k in range(1, n)})
    M.extra = {"kind": "sphere", "radius": radius, "axes": axes}
    return M


def sphere_to_chart(M: ChartManifold, q: np.ndarray) -> np.ndarray:
    """Ambient R^(n+1) point on the round sphere -> stereographic coordinates."""
    radius = M.extra["radius"]
    axes = M.extra["axes"]
    q = np.asarray(q, dtype=float) / radius
    comps = q @ axes.T
    denom = 1.0 - comps[..., -1]
    return comps[..., :-1] / denom[..., None]


def chart_to_sphere(M: ChartManifold, y: np.ndarray) -> np.ndarray:
    """Stereographic coordinates -> ambient R^(n+1) point (length = radius)."""
    radius = M.extra["radius"]
    axes = M.extra["axes"]
    y = np.asarray(y, dtype=float)
    u = 1.0 + np.sum(y * y, axis=-1)
    comps = np.concatenate([2.0 * y / u[..., None],
                            ((u - 2.0) / u)[..., None]], axis=-1)
    return radius * (comps @ axes)


def ambient_tangent_to_chart(M: ChartManifold, q: np.ndarray,
                             w: np.ndarray) -> np.ndarray:
    """Push an ambient tangent vector of the round sphere into chart components.

    q is the ambient point (|q| = R), w an ambient vector with <q, w> = 0.
    The stereographic chart metric is the pullback metric, so g-norms of
    the result equal ambient norms of w exactly.
    """
    radius = M.extra["radius"]
    axes = M.extra["axes"]
    c = (np.asarray(q, dtype=float) / radius) @ axes.T
    cw = (np.asarray(w, dtype=float) / radius) @ axes.T
    denom = 1.0 - c[..., -1]
    return (cw[..., :-1] * denom[..., None]
            + c[..., :-1] * cw[..., -1:]) / (denom**2)[..., None]


def sphere_colatitude(n: int, radius: float = 1.0) -> ChartManifold:
    """Round S^n in hyperspherical angles; good for chart-box integrals.

    Coordinates (t_1, ..., t_{n-1}, phi) with metric
    diag(R^2, R^2 sin^2 t_1, ..., R^2 prod sin^2 t_j). Degenerate at the
    poles, so only interior quadrature uses this chart.
    """
    R2 = radius * radius

    def metric(x):
        x = np.asarray(x, dtype=float)
        diag = np.empty(x.shape[:-1] + (n,))
        diag[..., 0] = R2
        running = np.ones(x.shape[:-1])
        for i in range(1, n):
            running = running * np.sin(x[..., i - 1]) ** 2
            diag[..., i] = R2 * running
        out = np.zeros(x.shape[:-1] + (n, n))
        idx = np.arange(n)
        out[..., idx, idx] = diag
        return out

    lo = np.concatenate([np.full(n - 1, 1e-8), [0.0]])
    hi = np.concatenate([np.full(n - 1, math.pi - 1e-8), [2.0 * math.pi]])
    periodic = tuple([False] * (n - 1) + [True])
    M = ChartManifold(dim=n, metric=metric, domain=Box(lo, hi, periodic),
                      name=f"sphere{n}_colat_r{radius:g}",
                      rho_exact={k: k / R2 for k in range(1, n)})
    M.extra = {"kind": "sphere_colatitude", "radius": radius}
    return M


def hyperbolic(n: int, z_range: tuple[float, float] = (0.02, 20.0),
               halfwidth: float = 8.0) -> ChartManifold:
    """Hyperbolic space (curvature -1) in the upper half-space chart."""

    def metric(x):
        x = np.asarray(x, dtype=float)
        z = x[..., -1]
        return (z**-2.0)[..., None, None] * np.eye(n)

    def grad(x):
        x = np.asarray(x, dtype=float)
        z = x[..., -1]
        out = np.zeros(x.shape[:-1] + (n, n, n))
        out[..., n - 1, :, :] = (-2.0 * z**-3.0)[..., None, None] * np.eye(n)
        return out

    def hess(x):
        x = np.asarray(x, dtype=float)
        z = x[..., -1]
        out = np.zeros(x.shape[:-1] + (n, n, n, n))
        out[..., n - 1, n - 1, :, :] = (6.0 * z**-4.0)[..., None, None] * np.eye(n)
        return out

    lo = np.concatenate([-halfwidth * np.ones(n - 1), [z_range[0]]])
    hi = np.concatenate([halfwidth * np.ones(n - 1), [z_range[1]]])
    return ChartManifold(dim=n, metric=metric, domain=Box(lo, hi, (False,) * n),
                         metric_grad=grad, metric_hess=hess, name=f"hyperbolic{n}",
                         rho_exact={k: -float(k) for k in range(1, n)})


def product(Ma: ChartManifold, Mb: ChartManifold,
            rho_exact: dict[int, float] | None = None) -> ChartManifold:
    """Riemannian product on the concatenated chart."""
    na, nb = Ma.dim, Mb.dim
    n = na + nb

    def metric(x):
        x = np.asarray(x, dtype=float)
        ga = Ma.metric_at(x[..., :na])
        gb = Mb.metric_at(x[..., na:])
        out = np.zeros(x.shape[:-1] + (n, n))
        out[..., :na, :na] = ga
        out[..., na:, na:] = gb
        return out

    grad = hess = None
    if Ma.metric_grad is not None and Mb.metric_grad is not None:
        def grad(x):
            x = np.asarray(x, dtype=float)
            da = np.asarray(Ma.metric_grad(x[..., :na]), dtype=float)
            db = np.asarray(Mb.metric_grad(x[..., na:]), dtype=float)
            out = np.zeros(x.shape[:-1] + (n, n, n))
            out[..., :na, :na, :na] = da
            out[..., na:, na:, na:] = db
            return out

    if Ma.metric_hess is not None and Mb.metric_hess is not None:
        def hess(x):
            x = np.asarray(x, dtype=float)
            da = np.asarray(Ma.metric_hess(x[..., :na]), dtype=float)
            db = np.asarray(Mb.metric_hess(x[..., na:]), dtype=float)
            out = np.zeros(x.shape[:-1] + (n, n, n, n))
            out[..., :na, :na, :na, :na] = da
            out[..., na:, na:, na:, na:] = db
            return out

    domain = Box(np.concatenate([Ma.domain.lo, Mb.domain.lo]),
                 np.concatenate([Ma.domain.hi, Mb.domain.hi]),
                 Ma.domain.periodic + Mb.domain.periodic)
    M = ChartManifold(dim=n, metric=metric, domain=domain, metric_grad=grad,
                      metric_hess=hess, name=f"{Ma.name}_x_{Mb.name}",
                      rho_exact=rho_exact)
    M.extra = {"kind": "product", "factors": (Ma, Mb)}
    return M


def warped_product(fiber_dim: int, warp, dwarp=None, d2warp=None,
                   base_interval: tuple[float, float] = (-2.0, 2.0),
                   fiber_side: float = 2.0 * math.pi) -> ChartManifold:
    """Warped product over an interval: g = dt^2 + warp(t)^2 * flat fiber torus."""
    n = 1 + fiber_dim

    def metric(x):
        x = np.asarray(x, dtype=float)
        w = np.asarray(warp(x[..., 0]), dtype=float)
        out = np.zeros(x.shape[:-1] + (n, n))
        out[..., 0, 0] = 1.0
        for i in range(1, n):
            out[..., i, i] = w * w
        return out

    grad = hess = None
    if dwarp is not None:
        def grad(x):
            x = np.asarray(x, dtype=float)
            t = x[..., 0]
            w = np.asarray(warp(t), dtype=float)
            dw = np.asarray(dwarp(t), dtype=float)
            out = np.zeros(x.shape[:-1] + (n, n, n))
            for i in range(1, n):
                out[..., 0, i, i] = 2.0 * w * dw
            return out

    if dwarp is not None and d2warp is not None:
        def hess(x):
            x = np.asarray(x, dtype=float)
            t = x[..., 0]
            w = np.asarray(warp(t), dtype=float)
            dw = np.asarray(dwarp(t), dtype=float)
            d2w = np.asarray(d2warp(t), dtype=float)
            out = np.zeros(x.shape[:-1] + (n, n, n, n))
            for i in range(1, n):
                out[..., 0, 0, i, i] = 2.0 * (dw * dw + w * d2w)
            return out

    lo = np.concatenate([[base_interval[0]], np.zeros(fiber_dim)])
    hi = np.concatenate([[base_interval[1]], fiber_side * np.ones(fiber_dim)])
    periodic = tuple([False] + [True] * fiber_dim)
    return ChartManifold(dim=n, metric=metric, domain=Box(lo, hi, periodic),
                         metric_grad=grad, metric_hess=hess,
                         name=f"warped{n}")


def _mollifier(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact bump b(s) = (1-s^2)^5 on |s|<1 with b, b', b''.

    Polynomial profile rather than exp(-1/(1-s^2)): the latter's
    derivative spikes near |s|=1 concentrate curvature in thin shells
    that desk-scale quadrature cannot resolve; this one keeps curvature
    spread over the support (metric is C^4 across the boundary).
    """
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    q = np.where(inside, 1.0 - s * s, 0.0)
    b = q**5
    db = np.where(inside, -10.0 * s * q**4, 0.0)
    d2b = np.where(inside, -10.0 * q**4 + 80.0 * s * s * q**3, 0.0)
    return b, db, d2b


def bump_torus(n: int, side: float = 2.0 * math.pi, amplitude: float = 0.1,
               center: np.ndarray | None = None,
               width: np.ndarray | float = 1.0) -> ChartManifold:
    """Flat torus with a compactly supported conformal bump e^(2f) * delta.

    f = amplitude * prod_i b((x_i - c_i)/w_i) with b the standard
    mollifier, wrapped periodically. Curvature is supported exactly in the
    declared box, which lp_deficit_norm exploits.
    """
    if center is None:
        center = np.full(n, side / 2.0)
    center = np.asarray(center, dtype=float)
    width = np.broadcast_to(np.asarray(width, dtype=float), (n,)).copy()
    if np.any(width >= side / 2.0):
        raise ValueError("bump width must be below half the period")

    def parts(x):
        x = np.asarray(x, dtype=float)
        s = (np.mod(x - center + side / 2.0, side) - side / 2.0) / width
        b, db, d2b = _mollifier(s)
        db = db / width
        d2b = d2b / width**2
        prod_all = np.prod(b, axis=-1)
        excl = np.empty_like(b)
        for k in range(n):
            bk = b.copy()
            bk[..., k] = 1.0
            excl[..., k] = np.prod(bk, axis=-1)
        return b, db, d2b, prod_all, excl

    def f_and_derivs(x):
        b, db, d2b, prod_all, excl = parts(x)
        f = amplitude * prod_all
        fk = amplitude * db * excl
        n_ = b.shape[-1]
        fkl = np.empty(b.shape[:-1] + (n_, n_))
        for k in range(n_):
            for l in range(n_):
                if k == l:
                    fkl[..., k, k] = amplitude * d2b[..., k] * excl[..., k]
                else:
                    bkl = b.copy()
                    bkl[..., k] = 1.0
                    bkl[..., l] = 1.0
                    fkl[..., k, l] = (amplitude * db[..., k] * db[..., l]
                                      * np.prod(bkl, axis=-1))
        return f, fk, fkl

    eye = np.eye(n)

    def metric(x):
        f, _, _ = f_and_derivs(x)
        return np.exp(2.0 * f)[..., None, None] * eye

    def grad(x):
        f, fk, _ = f_and_derivs(x)
        return (2.0 * fk * np.exp(2.0 * f)[..., None])[..., :, None, None] * eye

    def hess(x):
        f, fk, fkl = f_and_derivs(x)
        coef = (2.0 * fkl + 4.0 * fk[..., :, None] * fk[..., None, :])
        return (coef * np.exp(2.0 * f)[..., None, None])[..., :, :, None, None] * eye

    domain = Box(np.zeros(n), side * np.ones(n), (True,) * n)
    support = Box(center - width, center + width, (False,) * n)
    M = ChartManifold(dim=n, metric=metric, domain=domain, metric_grad=grad,
                      metric_hess=hess, name=f"bump_torus{n}_eps{amplitude:g}",
                      curvature_support=support)
    M.extra = {"kind": "bump_torus", "amplitude": amplitude,
               "center": center, "width": width, "side": side}
    return M


MANIFOLD_BUILDERS = {
    "euclidean": euclidean,
    "flat_torus": flat_torus,
    "sphere": sphere,
    "sphere_colatitude": sphere_colatitude,
    "hyperbolic": hyperbolic,
    "product": product,
    "warped_product": warped_product,
    "bump_torus": bump_torus,
}


def build_manifold(name: str, **params) -> ChartManifold:
    """Construct a built-in manifold by registry name."""
    if name not in MANIFOLD_BUILDERS:
        raise KeyError(f"unknown manifold '{name}'; known: {sorted(MANIFOLD_BUILDERS)}")
    return MANIFOLD_BUILDERS[name](**params)
