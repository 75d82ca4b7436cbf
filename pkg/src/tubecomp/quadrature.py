"""Quadrature rules shared by chart, fiber-sphere, and radial integrations."""

from __future__ import annotations

import math

import numpy as np

from .models import sphere_volume

__all__ = [
    "gauss_legendre_panels",
    "periodic_trapezoid",
    "circle_grid",
    "fibonacci_sphere",
    "product_angle_sphere",
    "monte_carlo_sphere",
    "unit_sphere_quadrature",
    "direction_search_grid",
]


def gauss_legendre_panels(a: float, b: float, panels: int = 1,
                          nodes_per_panel: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [a, b] split into equal panels."""
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def periodic_trapezoid(period: float, count: int,
                       offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Uniform nodes on a period (spectrally accurate for smooth periodic f)."""
    nodes = offset + period * np.arange(count) / count
    weights = np.full(count, period / count)
    return nodes, weights


def circle_grid(count: int, offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on the unit circle S^1, weights summing to 2 pi."""
    theta, w = periodic_trapezoid(2.0 * math.pi, count, offset)
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    return pts, w


def fibonacci_sphere(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Golden-angle spiral on S^2; quasi-uniform, equal weights 4 pi / N."""
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    return pts, np.full(count, 4.0 * math.pi / count)


def product_angle_sphere(d: int, polar: int = 16,
                         azimuth: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Product-angle grid on S^d: GL in each colatitude cosine, trapezoid in phi.

    Exact total weight for d <= 2; for higher d the polar weight
    (1-u^2)^((d-2)/2) is merely smooth, so weights are renormalized to
    vol(S^d).
    """
    if d == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 1:
        return circle_grid(azimuth)
    u, wu = np.polynomial.legendre.leggauss(polar)
    sub_pts, sub_w = product_angle_sphere(d - 1, polar, azimuth)
    rho = np.sqrt(1.0 - u * u)
    pts = np.concatenate([
        np.column_stack([np.full(len(sub_pts), ui), ri * sub_pts])
        for ui, ri in zip(u, rho)])
    w = np.concatenate([
        wui * (1.0 - ui * ui) ** ((d - 2) / 2.0) * sub_w
        for ui, wui in zip(u, wu)])
    w *= sphere_volume(d) / w.sum()
    return pts, w


def monte_carlo_sphere(d: int, count: int,
                       rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random points on S^d with equal weights vol(S^d)/N."""
    pts = rng.standard_normal((count, d + 1))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts, np.full(count, sphere_volume(d) / count)


def unit_sphere_quadrature(d: int, resolution: int = 16,
                           mc_samples: int | None = None,
                           rng: np.random.Generator | None = None,
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on S^d used for normal fibers.

    Deterministic product-angle grids up to d = 2; for d >= 3 a Monte
    Carlo rule is used (per-sample standard errors are the caller's job),
    unless mc_samples is given explicitly for lower d too.
    """
    if mc_samples is not None:
        if rng is None:
            raise ValueError("Monte Carlo fiber quadrature needs an rng")
        return monte_carlo_sphere(d, mc_samples, rng)
    if d <= 2:
        return product_angle_sphere(d, polar=resolution, azimuth=2 * resolution)
    if rng is None:
        raise ValueError(f"fiber dimension {d} >= 3 requires Monte Carlo sampling")
    return monte_carlo_sphere(d, 256 * resolution, rng)


def direction_search_grid(n: int, min_count: int = 2048) -> np.ndarray:
    """Deterministic unit-direction grid in R^n for curvature minimization."""
    if n < 2:
        raise ValueError(f"need ambient dimension >= 2, got {n}")
    if n == 2:
        pts, _ = circle_grid(max(min_count, 256))
        return pts
    if n == 3:
        pts, _ = fibonacci_sphere(max(min_count, 512))
        return pts
    polar = 8
    azimuth = 16
    while True:
        pts, _ = product_angle_sphere(n - 1, polar=polar, azimuth=azimuth)
        if len(pts) >= min_count:
            return pts
        polar += 4
        azimuth += 8
