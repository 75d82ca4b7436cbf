"""Normal geodesic rays with parallel frames and the Jacobi matrix pair.

The singular Riccati initial data (1/t) P_xi is never integrated: the
linear Jacobi system J'' = -R(t) J with block initial conditions
J(0) = diag(I_m, 0), J'(0) = diag(S_xi, I_{n-m-1}) carries the same
information and is regular at t = 0. The shape operator of the distance
level sets is recovered as S(t) = J'(t) J(t)^{-1}, the polar volume
density as det J(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import ChartManifold, connection_and_curvature
from .submanifolds import EmbeddedSubmanifold, NonNormalVectorError, second_fundamental_at
from .geometry import complete_frame

__all__ = [
    "RayIntegrationError",
    "FocalSingularityError",
    "NormalRay",
    "TransportState",
    "RaySolution",
    "integrate_ray",
    "volume_density",
    "shape_operator",
    "split_mean_curvature",
    "partial_trace_shape",
    "focal_distance",
    "structural_residuals",
    "jy_factors",
]


class RayIntegrationError(RuntimeError):
    """Adaptive step-size collapse (metric singularity) along a ray."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class FocalSingularityError(ValueError):
    """Shape operator requested at or beyond the first focal time."""


@dataclass(eq=False)
class NormalRay:
    """One normal geodesic: base parameter, unit normal, horizon, tolerance."""

    base_param: np.ndarray
    xi: np.ndarray
    t_max: float
    tolerance: float = 1e-9


@dataclass(eq=False)
class TransportState:
    """Snapshot along a ray; frame rows 0..m-1 start tangent, the rest normal."""

    t: float
    position: np.ndarray
    velocity: np.ndarray
    frame: np.ndarray        # (n-1, n) parallel g-orthonormal rows
    J_mat: np.ndarray        # (n-1, n-1)
    J_prime: np.ndarray      # (n-1, n-1)
    solution: "RaySolution" = field(repr=False, default=None)


def _complete_euclidean(first_row: np.ndarray) -> np.ndarray:
    """Orthonormal basis of R^d with the given unit vector as first row."""
    d = len(first_row)
    basis = [first_row]
    for e in np.eye(d):
        v = e.copy()
        for b in basis:
            v -= (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            basis.append(v / nrm)
        if len(basis) == d:
            break
    return np.array(basis)


def _initial_data(M: ChartManifold, sigma: EmbeddedSubmanifold, ray: NormalRay):
    n, m = M.dim, sigma.dim
    s = np.asarray(ray.base_param, dtype=float)
    xi = np.asarray(ray.xi, dtype=float)
    x0 = sigma.embed(s)
    g = M.metric_at(x0)
    if abs(xi @ g @ xi - 1.0) > 1e-10:
        raise NonNormalVectorError(f"|xi|_g^2 = {xi @ g @ xi}, not unit")
    if m == 0:
        tangent = np.zeros((0, n))
        normal = complete_frame(g, [xi])
        S_xi = np.zeros((0, 0))
    else:
        tangent, normal, K, _ = second_fundamental_at(sigma, M, s)
        if np.max(np.abs(tangent @ g @ xi)) > 1e-8:
            raise NonNormalVectorError("xi is not normal to the submanifold")
        S_xi = -np.einsum("abi,ij,j->ab", K, g, xi)
    # orthonormal basis of the normal space with xi first, in frame coefficients
    coeff = normal @ g @ xi
    nperp = _complete_euclidean(coeff / np.linalg.norm(coeff))[1:] @ normal
    frame0 = np.vstack([tangent, nperp])           # (n-1, n)
    d = n - m - 1
    J0 = np.zeros((n - 1, n - 1))
    J0[:m, :m] = np.eye(m)
    Jp0 = np.zeros((n - 1, n - 1))
    Jp0[:m, :m] = S_xi
    Jp0[m:, m:] = np.eye(d)
    return x0, xi, frame0, J0, Jp0, S_xi


@dataclass(eq=False)
class RaySolution:
    """Dense solution of one ray; states() samples it anywhere in [0, t_max]."""

    manifold: ChartManifold
    sigma: EmbeddedSubmanifold
    ray: NormalRay
    m: int
    sol: object
    t_max: float
    weingarten0: np.ndarray
    states: Sequence[TransportState] = None
    _det_grid: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    _focal: float | None | str = field(default="unset", repr=False)

    @property
    def n(self) -> int:
        return self.manifold.dim

    def _unpack(self, y: np.ndarray, t: float) -> TransportState:
        n = self.n
        frame = y[2 * n:2 * n + (n - 1) * n].reshape(n - 1, n)
        sz = (n - 1) * (n - 1)
        J = y[2 * n + (n - 1) * n:2 * n + (n - 1) * n + sz].reshape(n - 1, n - 1)
        Jp = y[2 * n + (n - 1) * n + sz:].reshape(n - 1, n - 1)
        return TransportState(t=t, position=y[:n], velocity=y[n:2 * n],
                              frame=frame, J_mat=J, J_prime=Jp, solution=self)

    def state_at(self, t: float) -> TransportState:
        if not 0.0 <= t <= self.t_max + 1e-12:
            raise ValueError(f"t={t} outside integrated range [0, {self.t_max}]")
        return self._unpack(self.sol(min(t, self.t_max)), t)

    def sample(self, ts) -> list[TransportState]:
        return [self.state_at(float(t)) for t in np.atleast_1d(ts)]

    def jacobi_dets(self, resolution: int = 512) -> tuple[np.ndarray, np.ndarray]:
        """(ts, det J(ts)) on a cached uniform grid."""
        if self._det_grid is None or len(self._det_grid[0]) < resolution:
            ts = np.linspace(0.0, self.t_max, resolution + 1)
            ys = self.sol(ts)
            n = self.n
            sz = (n - 1) * (n - 1)
            start = 2 * n + (n - 1) * n
            Js = ys[start:start + sz].T.reshape(-1, n - 1, n - 1)
            self._det_grid = (ts, np.linalg.det(Js))
        return self._det_grid

    def det_scale(self, t: float) -> float:
        ts, dets = self.jacobi_dets()
        mask = ts <= t + 1e-12
        return max(1.0, float(np.max(np.abs(dets[mask])))) if mask.any() else 1.0

    def _det_at(self, t: float) -> float:
        return float(np.linalg.det(self._J_at(t)))

    def focal_time(self) -> float | None:
        """First zero of det J in (0, t_max], or None.

        Odd-multiplicity zeros are located by sign-change bisection;
        even-multiplicity ones (det touches zero, e.g. cos^2 blocks) by
        bisecting the sign change of d(det)/dt at a near-zero local
        minimum of |det|. The t -> 0 degeneracy det ~ t^(n-m-1) is not a
        local minimum and is never reported.
        """
        if self._focal != "unset":
            return self._focal
        ts, dets = self.jacobi_dets(resolution=1024)
        scale = max(1.0, float(np.max(np.abs(dets))))
        focal = None
        for i in range(1, len(ts)):
            if dets[i - 1] > 0.0 > dets[i] or dets[i - 1] < 0.0 < dets[i]:
                a, b = ts[i - 1], ts[i]
                fa = dets[i - 1]
                while b - a > 1e-10:
                    mid = 0.5 * (a + b)
                    fm = self._det_at(mid)
                    if (fa > 0) == (fm > 0):
                        a, fa = mid, fm
                    else:
                        b = mid
                focal = 0.5 * (a + b)
                break
            if (i < len(ts) - 1 and abs(dets[i]) <= 1e-4 * scale
                    and abs(dets[i]) < abs(dets[i - 1])
                    and abs(dets[i]) <= abs(dets[i + 1])):
                tstar = self._refine_touching_zero(ts[i - 1], ts[i + 1])
                if tstar is not None and abs(self._det_at(tstar)) <= 1e-9 * scale:
                    focal = tstar
                    break
        if focal is None and abs(dets[-1]) <= 1e-9 * scale:
            focal = float(ts[-1])
        self._focal = focal
        return focal

    def _refine_touching_zero(self, a: float, b: float) -> float | None:
        """Locate a minimum of |det| inside [a, b] via the slope's sign change."""
        h = min(1e-4, 0.05 * (b - a))

        def slope(t):
            lo = max(t - h, 0.0)
            hi = min(t + h, self.t_max)
            return (self._det_at(hi) - self._det_at(lo)) / (hi - lo)

        sign0 = self._det_at(0.5 * (a + b)) >= 0.0
        sa = slope(a) if sign0 else -slope(a)
        sb = slope(b) if sign0 else -slope(b)
        if not (sa < 0.0 < sb):
            return None
        fa = sa
        while b - a > 1e-10:
            mid = 0.5 * (a + b)
            fm = slope(mid) if sign0 else -slope(mid)
            if (fa < 0) == (fm < 0):
                a, fa = mid, fm
            else:
                b = mid
        return 0.5 * (a + b)

    def _J_at(self, t: float) -> np.ndarray:
        n = self.n
        y = self.sol(t)
        start = 2 * n + (n - 1) * n
        sz = (n - 1) * (n - 1)
        return y[start:start + sz].reshape(n - 1, n - 1)


def integrate_ray(M: ChartManifold, sigma: EmbeddedSubmanifold, ray: NormalRay,
                  output_points: int = 65) -> RaySolution:
    """Integrate geodesic + parallel frame + Jacobi system along one ray."""
    n, m = M.dim, sigma.dim
    x0, xi, frame0, J0, Jp0, S_xi = _initial_data(M, sigma, ray)
    y0 = np.concatenate([x0, xi, frame0.ravel(), J0.ravel(), Jp0.ravel()])

    def rhs(t, y):
        x = y[:n]
        v = y[n:2 * n]
        E = y[2 * n:2 * n + (n - 1) * n].reshape(n - 1, n)
        sz = (n - 1) * (n - 1)
        J = y[2 * n + (n - 1) * n:2 * n + (n - 1) * n + sz].reshape(n - 1, n - 1)
        Jp = y[2 * n + (n - 1) * n + sz:].reshape(n - 1, n - 1)
        g, gamma, rm = connection_and_curvature(M, x)
        acc = -np.einsum("ijk,j,k->i", gamma, v, v)
        dE = -np.einsum("ijk,j,ak->ai", gamma, v, E)
        rmat = np.einsum("ijkl,ai,j,bk,l->ab", rm, E, v, E, v)
        rmat = 0.5 * (rmat + rmat.T)
        return np.concatenate([v, acc, dE.ravel(), Jp.ravel(), (-rmat @ J).ravel()])

    lo, hi = M.domain.lo, M.domain.hi
    margin = 0.05 * np.max(M.domain.widths())
    periodic = np.array(M.domain.periodic)

    def chart_exit(t, y):
        # periodic coordinates wrap; open ones must stay inside the chart
        pos = y[:n]
        over = np.where(periodic, -1.0,
                        np.maximum(lo - margin - pos, pos - hi - margin))
        return -float(np.max(over))

    chart_exit.terminal = True

    sol = solve_ivp(rhs, (0.0, ray.t_max), y0, method="DOP853",
                    rtol=ray.tolerance, atol=ray.tolerance * 1e-2,
                    dense_output=True, events=chart_exit)
    if not sol.success or sol.status == 1:
        t_fail = float(sol.t_events[0][0]) if sol.status == 1 else float(sol.t[-1])
        raise RayIntegrationError(
            f"ray left the chart or step size collapsed at t={t_fail:.6g}"
            f" ({sol.message})", t=t_fail)
    result = RaySolution(manifold=M, sigma=sigma, ray=ray, m=m, sol=sol.sol,
                         t_max=ray.t_max, weingarten0=S_xi)
    result.states = result.sample(np.linspace(0.0, ray.t_max, output_points))
    return result


# ---------------------------------------------------------------------------
# operations on transport states


def volume_density(state: TransportState) -> float:
    """Polar volume density A(t, xi) = det J(t)."""
    return float(np.linalg.det(state.J_mat))


def shape_operator(state: TransportState) -> np.ndarray:
    """S(t) = J'(t) J(t)^{-1} in the parallel frame; needs t before focal time."""
    if state.t <= 0.0:
        raise FocalSingularityError("shape operator singular at t = 0")
    det = float(np.linalg.det(state.J_mat))
    scale = 1.0
    if state.solution is not None:
        scale = state.solution.det_scale(state.t)
        focal = state.solution.focal_time()
        if focal is not None and state.t >= focal - 1e-9:
            raise FocalSingularityError(
                f"t={state.t} at/beyond focal time {focal:.9g}")
    if abs(det) < 1e-12 * scale:
        raise FocalSingularityError(
            f"det J = {det:.3e} at t={state.t}: at/beyond focal time")
    return state.J_prime @ np.linalg.inv(state.J_mat)


def split_mean_curvature(state: TransportState) -> tuple[float, float]:
    """(phi, psi): traces of S over the tangent-born and normal-born blocks."""
    S = shape_operator(state)
    m = state.solution.m
    return float(np.trace(S[:m, :m])), float(np.trace(S[m:, m:]))


def partial_trace_shape(state: TransportState, W: np.ndarray) -> float:
    """Trace of S over the span of orthonormal frame-coefficient rows W."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    gram = W @ W.T
    if np.max(np.abs(gram - np.eye(len(W)))) > 1e-8:
        raise ValueError("W rows must be orthonormal frame coefficients")
    S = shape_operator(state)
    return float(np.einsum("ai,ij,aj->", W, S, W))


def focal_distance(M: ChartManifold, sigma: EmbeddedSubmanifold, ray: NormalRay,
                   t_max: float | None = None,
                   solution: RaySolution | None = None) -> float | None:
    """First t in (0, t_max] with det J(t) = 0, or None when none in range."""
    if solution is None or (t_max is not None and t_max > solution.t_max):
        horizon = t_max if t_max is not None else ray.t_max
        ray = NormalRay(base_param=ray.base_param, xi=ray.xi, t_max=horizon,
                        tolerance=ray.tolerance)
        solution = integrate_ray(M, sigma, ray)
    return solution.focal_time()


def _scalar_trace_grids(solution: RaySolution, t: float, npts: int = 513):
    """phi and psi sampled on a uniform grid of (0, t] for quadrature."""
    n, m = solution.n, solution.m
    eps = min(1e-8, 0.1 * t)
    ts = np.linspace(eps, t, npts)
    ys = solution.sol(ts)
    start = 2 * n + (n - 1) * n
    sz = (n - 1) * (n - 1)
    Js = ys[start:start + sz].T.reshape(-1, n - 1, n - 1)
    Jps = ys[start + sz:].T.reshape(-1, n - 1, n - 1)
    S = np.linalg.solve(np.transpose(Js, (0, 2, 1)), np.transpose(Jps, (0, 2, 1)))
    S = np.transpose(S, (0, 2, 1))     # Jp J^{-1} = solve(J^T, Jp^T)^T
    phi = np.trace(S[:, :m, :m], axis1=1, axis2=2)
    psi = np.trace(S[:, m:, m:], axis1=1, axis2=2)
    return ts, phi, psi


def _simpson(vals: np.ndarray, ts: np.ndarray) -> float:
    h = ts[1] - ts[0]
    return float(h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum()
                            + 2.0 * vals[2:-2:2].sum()))


def structural_residuals(solution: RaySolution, ts=None) -> dict:
    """Max magnitudes of the evolution-law residuals along one ray.

    Keys: wronskian (J'^T J - J^T J' drift), log_density (d/dt log det J
    vs tr S), riccati (S' + S^2 + R in Frobenius norm), density_power
    (det J / t^(n-m-1) - 1 at t = 1e-3) and taylor_shape (t S - the block
    limit, plus tangential block vs the Weingarten map, at t = 1e-3).
    """
    M = solution.manifold
    n, m = solution.n, solution.m
    d = n - m - 1
    focal = solution.focal_time()
    hi = solution.t_max if focal is None else 0.9 * focal
    h = 1e-4
    hi = min(hi, solution.t_max - 2.0 * h)
    if ts is None:
        ts = np.linspace(0.25, max(0.3, hi), 9)
    ts = np.asarray([t for t in np.atleast_1d(ts) if 0.0 < t <= hi + 1e-12])
    out = {"wronskian": 0.0, "log_density": 0.0, "riccati": 0.0}

    def s_derivative(t):
        def central(step):
            return (shape_operator(solution.state_at(t + step))
                    - shape_operator(solution.state_at(t - step))) / (2.0 * step)
        return (4.0 * central(h / 2.0) - central(h)) / 3.0

    for t in ts:
        st = solution.state_at(float(t))
        J, Jp = st.J_mat, st.J_prime
        out["wronskian"] = max(out["wronskian"],
                               float(np.max(np.abs(Jp.T @ J - J.T @ Jp))))
        S0 = shape_operator(st)
        Sdot = s_derivative(t)
        _, _, rm = connection_and_curvature(M, st.position)
        rmat = np.einsum("ijkl,ai,j,bk,l->ab", rm, st.frame, st.velocity,
                         st.frame, st.velocity)
        out["riccati"] = max(out["riccati"], float(np.linalg.norm(
            Sdot + S0 @ S0 + rmat, ord="fro")))
        a_m = float(np.linalg.det(solution.state_at(t - h).J_mat))
        a_p = float(np.linalg.det(solution.state_at(t + h).J_mat))
        dlog = (a_p - a_m) / (2.0 * h * float(np.linalg.det(J)))
        out["log_density"] = max(out["log_density"],
                                 float(abs(dlog - np.trace(S0))))
    t0 = 1e-3
    st0 = solution.state_at(t0)
    # A / t^d = 1 + t tr(S_xi) + O(t^2); compare against the linear Taylor
    # (the linear term vanishes on totally geodesic submanifolds)
    linear = 1.0 + t0 * float(np.trace(solution.weingarten0)) if m > 0 else 1.0
    ratio = float(np.linalg.det(st0.J_mat)) / (t0**d if d > 0 else 1.0)
    out["density_power"] = abs(ratio - linear)
    S_small = shape_operator(st0)
    block_limit = np.zeros((n - 1, n - 1))
    block_limit[m:, m:] = np.eye(d)
    taylor = float(np.max(np.abs(t0 * S_small - block_limit)))
    if m > 0:
        taylor = max(taylor, float(np.max(np.abs(
            S_small[:m, :m] - solution.weingarten0))))
    out["taylor_shape"] = taylor
    return out


def jy_factors(state: TransportState) -> tuple[float, float]:
    """Scalar factors (J, Y) with J^m Y^(n-m-1) = det J_mat.

    J = exp(int phi/m); Y is integrated in the regularized form
    Y = t * exp(int (psi - (n-m-1)/s) / (n-m-1) ds) so the 1/t part of psi
    is handled exactly.
    """
    solution = state.solution
    n, m = solution.n, solution.m
    d = n - m - 1
    if state.t <= 0.0:
        return 1.0, 0.0
    focal = solution.focal_time()
    if focal is not None and state.t >= focal - 1e-9:
        raise FocalSingularityError(
            f"jy_factors needs t before the focal time {focal:.9g}, got {state.t}")
    ts, phi, psi = _scalar_trace_grids(solution, state.t)
    j_scalar = math.exp(_simpson(phi / m, ts)) if m >= 1 else 1.0
    if d >= 1:
        y_scalar = state.t * math.exp(_simpson((psi - d / ts) / d, ts))
    else:
        y_scalar = 1.0
    return float(j_scalar), float(y_scalar)
