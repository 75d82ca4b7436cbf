"""Tube volumes, equidistant areas, and tube-restricted curvature norms.

Everything is assembled by Fubini over the unit normal bundle: one ray
integration per (base node, fiber direction), then composite
Gauss-Legendre in the radial variable with the density set to zero past
each ray's first focal time. Accumulation order is fixed, so results are
bitwise reproducible for a given spec and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ChartManifold, rho_k_at
from .quadrature import gauss_legendre_panels
from .submanifolds import EmbeddedSubmanifold, NormalFiberGrid, unit_normal_grid
from .transport import NormalRay, RayIntegrationError, RaySolution, integrate_ray

__all__ = [
    "QuadratureSpec",
    "TubeVolumeResult",
    "TubeSampler",
    "tube_volume",
    "equidistant_area",
    "tube_lp_deficit",
    "tube_volume_monte_carlo",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the radial rule, fiber sphere, and parameter domain."""

    t_nodes_per_panel: int = 16
    t_panels: int = 1
    base_resolution: int | tuple = 8
    fiber_resolution: int = 4
    fiber_mc_samples: int | None = None     # Monte Carlo fiber for n-m-1 >= 3
    mc_samples: int = 2048                  # volume cross-check sample budget
    seed: int = 0
    ray_tolerance: float = 1e-9
    rho_directions: int = 2048
    rho_refine_rounds: int = 3
    chart_resolution: int = 8               # per-axis nodes for chart-box norms

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class TubeVolumeResult:
    value: float
    error_estimate: float
    rays_used: int
    truncated_at_focal: list[bool]
    validity_exceeded: bool = False

    def __post_init__(self):
        if self.value < -1e-12 or self.error_estimate < 0.0:
            raise ValueError("tube volume and error estimate must be nonnegative")


class TubeSampler:
    """Shared ray cache: integrates every (node, fiber) ray once up to r_max."""

    def __init__(self, M: ChartManifold, sigma: EmbeddedSubmanifold,
                 r_max: float, spec: QuadratureSpec | None = None):
        self.M = M
        self.sigma = sigma
        self.spec = spec or QuadratureSpec()
        self.r_max = float(r_max)
        fiber_dim = M.dim - sigma.dim - 1
        needs_mc = self.spec.fiber_mc_samples is not None or fiber_dim >= 3
        self.grid: NormalFiberGrid = unit_normal_grid(
            sigma, M, base_resolution=self.spec.base_resolution,
            fiber_resolution=self.spec.fiber_resolution,
            mc_samples=self.spec.fiber_mc_samples,
            rng=self.spec.rng() if needs_mc else None)
        self.rays: list[RaySolution] = []
        self.weights: list[float] = []
        self.ray_index: list[tuple[int, int]] = []
        for b in range(len(self.grid.base_params)):
            for f in range(len(self.grid.fiber_coeffs)):
                xi = self.grid.normal_vector(b, f)
                ray = NormalRay(base_param=self.grid.base_params[b], xi=xi,
                                t_max=self.r_max,
                                tolerance=self.spec.ray_tolerance)
                try:
                    self.rays.append(integrate_ray(M, sigma, ray))
                except RayIntegrationError as exc:
                    raise RayIntegrationError(
                        f"ray s={np.array2string(ray.base_param, precision=6)} "
                        f"xi={np.array2string(xi, precision=6)} failed: {exc}",
                        t=exc.t) from exc
                self.weights.append(self.grid.base_weights[b]
                                    * self.grid.fiber_weights[f])
                self.ray_index.append((b, f))

    def _radial_nodes(self, sol: RaySolution, r: float):
        focal = sol.focal_time()
        top = min(r, focal) if focal is not None else r
        truncated = focal is not None and focal < r
        return top, truncated

    def _density_at(self, sol: RaySolution, ts: np.ndarray) -> np.ndarray:
        n = self.M.dim
        ys = sol.sol(ts)
        start = 2 * n + (n - 1) * n
        sz = (n - 1) * (n - 1)
        Js = ys[start:start + sz].T.reshape(-1, n - 1, n - 1)
        return np.linalg.det(Js)

    def volume(self, r: float) -> TubeVolumeResult:
        if r > self.r_max + 1e-12:
            raise ValueError(f"radius {r} beyond integrated horizon {self.r_max}")
        if r <= 0.0:
            return TubeVolumeResult(0.0, 0.0, len(self.rays),
                                    [False] * len(self.rays))
        spec = self.spec
        total = 0.0
        total_coarse = 0.0
        flags = []
        for sol, w in zip(self.rays, self.weights):
            top, truncated = self._radial_nodes(sol, r)
            flags.append(truncated)
            if top <= 0.0:
                continue
            ts, tw = gauss_legendre_panels(0.0, top, spec.t_panels,
                                           spec.t_nodes_per_panel)
            total += w * float(tw @ self._density_at(sol, ts))
            ts2, tw2 = gauss_legendre_panels(0.0, top, spec.t_panels,
                                             max(4, spec.t_nodes_per_panel // 2))
            total_coarse += w * float(tw2 @ self._density_at(sol, ts2))
        validity = self.M.volume_validity_radius
        return TubeVolumeResult(value=total,
                                error_estimate=abs(total - total_coarse),
                                rays_used=len(self.rays),
                                truncated_at_focal=flags,
                                validity_exceeded=(validity is not None
                                                   and r > validity + 1e-12))

    def area(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        total = 0.0
        for sol, w in zip(self.rays, self.weights):
            focal = sol.focal_time()
            if focal is not None and t >= focal:
                continue
            total += w * float(self._density_at(sol, np.array([t]))[0])
        return total

    def lp_deficit(self, t: float, k: int, H: float, p: float,
                   rho_fn=None, inflation: float = 0.0) -> float:
        """Tube-restricted ||(rho_k - H)_-||_p via the same Fubini quadrature."""
        if p < 1.0:
            raise ValueError(f"need p >= 1, got {p}")
        spec = self.spec
        if rho_fn is None:
            def rho_fn(x):
                return rho_k_at(self.M, x, k, directions=spec.rho_directions,
                                refine_rounds=spec.rho_refine_rounds)
        total = 0.0
        n = self.M.dim
        for sol, w in zip(self.rays, self.weights):
            top, _ = self._radial_nodes(sol, t)
            if top <= 0.0:
                continue
            ts, tw = gauss_legendre_panels(0.0, top, spec.t_panels,
                                           spec.t_nodes_per_panel)
            dens = self._density_at(sol, ts)
            positions = sol.sol(ts)[:n].T
            deficit = np.array([max(H - rho_fn(x), 0.0) + inflation
                                for x in positions])
            total += w * float(tw @ (deficit**p * dens))
        return total ** (1.0 / p)


def tube_volume(M: ChartManifold, sigma: EmbeddedSubmanifold, r: float,
                spec: QuadratureSpec | None = None) -> TubeVolumeResult:
    """vol(T(Sigma, r)) by normal-bundle quadrature, density zero past focal."""
    sampler = TubeSampler(M, sigma, r, spec)
    return sampler.volume(r)


def equidistant_area(M: ChartManifold, sigma: EmbeddedSubmanifold, t: float,
                     spec: QuadratureSpec | None = None) -> float:
    """Area v(t) of the distance-t level set (regular part)."""
    sampler = TubeSampler(M, sigma, max(t, 1e-6), spec)
    return sampler.area(t)


def tube_lp_deficit(M: ChartManifold, sigma: EmbeddedSubmanifold, t: float,
                    k: int, H: float, p: float,
                    spec: QuadratureSpec | None = None,
                    rho_fn=None, inflation: float = 0.0) -> float:
    """Tube-restricted L^p deficit norm over T(Sigma, t)."""
    sampler = TubeSampler(M, sigma, max(t, 1e-6), spec)
    return sampler.lp_deficit(t, k, H, p, rho_fn=rho_fn, inflation=inflation)


def tube_volume_monte_carlo(M: ChartManifold, sigma: EmbeddedSubmanifold,
                            r: float, spec: QuadratureSpec | None = None,
                            ) -> tuple[float, float]:
    """(estimate, standard error) for vol(T(Sigma, r)) by random nodes.

    Same Fubini representation with uniform random base points, fiber
    directions, and radial times, clustered per ray so the standard error
    comes from independent ray aggregates. Cross-validates the product
    quadrature without sharing its node placement.
    """
    spec = spec or QuadratureSpec()
    rng = spec.rng()
    n, m = M.dim, sigma.dim
    d = n - m - 1
    t_draws = 8
    n_rays = max(8, spec.mc_samples // t_draws)
    box = sigma.param_domain
    param_measure = 1.0 if m == 0 else float(np.prod(box.widths()))
    from .models import sphere_volume
    from .submanifolds import second_fundamental_at, frames_at
    from .geometry import complete_frame

    values = np.empty(n_rays)
    for i in range(n_rays):
        s = (np.zeros(0) if m == 0
             else rng.uniform(box.lo, box.hi))
        x = sigma.embed(s)
        g = M.metric_at(x)
        if m == 0:
            tangent = np.zeros((0, n))
            normal = (np.asarray(sigma.normal_frame_fn(s, x, g, tangent))
                      if sigma.normal_frame_fn is not None
                      else complete_frame(g, []))
            gram_density = 1.0
        else:
            J = sigma.jacobian_at(s)
            gram = J.T @ g @ J
            gram_density = math.sqrt(np.linalg.det(gram))
            _, normal = frames_at(sigma, M, s)
        c = rng.standard_normal(n - m)
        c /= np.linalg.norm(c)
        xi = c @ normal
        sol = integrate_ray(M, sigma, NormalRay(s, xi, t_max=r,
                                                tolerance=spec.ray_tolerance))
        focal = sol.focal_time()
        ts = rng.uniform(0.0, r, size=t_draws)
        if focal is not None:
            keep = ts < focal
        else:
            keep = np.ones(t_draws, dtype=bool)
        dens = np.zeros(t_draws)
        if keep.any():
            ys = sol.sol(ts[keep])
            start = 2 * n + (n - 1) * n
            sz = (n - 1) * (n - 1)
            Js = ys[start:start + sz].T.reshape(-1, n - 1, n - 1)
            dens[keep] = np.linalg.det(Js)
        values[i] = (param_measure * gram_density * sphere_volume(d)
                     * r * float(np.mean(dens)))
    estimate = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n_rays))
    return estimate, stderr
