"""Constant-curvature model functions and closed-form volume bounds.

Everything in this module is a pure function of real/integer arguments:
the generalized trigonometric pair (sn, cs), the model shape-operator
trace, the Heintze-Karcher tube integrand and its first zero, and the
integral-curvature tube bound with its derived constants. No manifold
machinery is touched here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

__all__ = [
    "DomainError",
    "InfeasibleBoundError",
    "BoundConstants",
    "BoundReport",
    "sn_cs",
    "model_shape_trace",
    "hk_integrand",
    "first_zero",
    "sphere_volume",
    "thm1_constants",
    "thm1_bound",
    "cheeger_delta",
]

# Below this |H| the flat branch is used; avoids 0/0 cancellation in sin(s*r)/s.
_FLAT_EPS = 1e-8


class DomainError(ValueError):
    """Argument lies at or beyond the first singularity of a model formula."""


class InfeasibleBoundError(ValueError):
    """No positive submanifold volume satisfies the requested bound."""


def sn_cs(H: float, r: float) -> tuple[float, float]:
    """Return (sn_H(r), cs_H(r)), the solution pair of f'' + H f = 0.

    sn_H has sn(0)=0, sn'(0)=1; cs_H = sn_H' has cs(0)=1. The three sign
    branches (sin/linear/sinh) are continuous in H at H = 0.
    """
    if abs(H) < _FLAT_EPS:
        return r, 1.0
    if H > 0.0:
        s = math.sqrt(H)
        return math.sin(s * r) / s, math.cos(s * r)
    s = math.sqrt(-H)
    return math.sinh(s * r) / s, math.cosh(s * r)


def _denominator_first_zero(H: float, w0: float | None) -> float:
    """First positive zero of cs_H + w0*sn_H (or of sn_H when w0 is None)."""
    if w0 is None:
        if H > _FLAT_EPS:
            return math.pi / math.sqrt(H)
        return math.inf
    if abs(H) < _FLAT_EPS:
        return -1.0 / w0 if w0 < 0.0 else math.inf
    if H > 0.0:
        s = math.sqrt(H)
        return (math.atan(w0 / s) + 0.5 * math.pi) / s
    s = math.sqrt(-H)
    if w0 < -s:
        return math.atanh(s / -w0) / s
    return math.inf


def model_shape_trace(H: float, k: int, tangential_w0: float | None, t: float) -> float:
    """Trace bound k*(log(cs_H + w0*sn_H))' for the k-dim comparison model.

    With ``tangential_w0`` supplied the tangential branch
    k*(w0*cs - H*sn)/(cs + w0*sn) is returned; otherwise the generic
    branch k*cs/sn. Raises DomainError at or beyond the first positive
    zero of the relevant denominator.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if t <= 0.0:
        raise DomainError(f"model trace needs t > 0, got t={t}")
    zero = _denominator_first_zero(H, tangential_w0)
    if t >= zero:
        raise DomainError(f"t={t} at/beyond first denominator zero {zero}")
    sn, cs = sn_cs(H, t)
    if tangential_w0 is None:
        return k * cs / sn
    w0 = tangential_w0
    return k * (w0 * cs - H * sn) / (cs + w0 * sn)


def hk_integrand(H: float, n: int, m: int, eta_dot_xi: float, t: float) -> float:
    """Model tube density (cs_H + <eta,xi> sn_H)^m * sn_H^(n-m-1)."""
    if not 0 <= m <= n - 1:
        raise ValueError(f"need 0 <= m <= n-1, got n={n}, m={m}")
    sn, cs = sn_cs(H, t)
    return (cs + eta_dot_xi * sn) ** m * sn ** (n - m - 1)


def _march_bisect_first_zero(f, r: float, H: float) -> float:
    """First zero of f in (0, r] by coarse marching then bisection.

    f must be positive just after 0 and cross zero transversally. Returns
    math.inf when no zero is found in (0, r].
    """
    step = min(r, math.pi / math.sqrt(max(H, 1e-12))) / 256.0
    t_prev = 0.0
    nsteps = int(math.ceil(r / step))
    for j in range(1, nsteps + 1):
        t = min(j * step, r)
        v = f(t)
        if v == 0.0:
            return t
        if v < 0.0:
            a, b = t_prev, t
            while (b - a) > 1e-12 * max(1.0, b):
                mid = 0.5 * (a + b)
                if f(mid) < 0.0:
                    b = mid
                else:
                    a = mid
            return 0.5 * (a + b)
        t_prev = t
    return math.inf


def first_zero(H: float, n: int, m: int, eta_dot_xi: float, r: float) -> float:
    """min(r, first t > 0 where the Heintze-Karcher integrand vanishes).

    The integrand's zeros come from its two smooth factors; each factor is
    bracketed by marching and refined by bisection to 1e-12 relative, which
    stays correct when even powers make the product touch zero without a
    sign change.
    """
    if r <= 0.0:
        raise ValueError(f"need r > 0, got {r}")
    z = math.inf
    if m >= 1:
        z = min(z, _march_bisect_first_zero(
            lambda t: sn_cs(H, t)[1] + eta_dot_xi * sn_cs(H, t)[0], r, H))
    if n - m - 1 >= 1:
        # sn_H vanishes first at pi/sqrt(H) for H > 0, never on (0, r] otherwise.
        if H > _FLAT_EPS:
            z = min(z, math.pi / math.sqrt(H))
    return min(r, z)


def sphere_volume(d: int) -> float:
    """d-volume of the unit d-sphere: 2 pi^((d+1)/2) / Gamma((d+1)/2)."""
    if d < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {d}")
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)


@dataclass(frozen=True)
class BoundConstants:
    """Derived constants of the integral tube-volume bound."""

    n: int
    m: int
    p: float
    H: float
    k: int
    alpha: float
    beta: float
    delta: float
    kappa: float

    def as_dict(self) -> dict:
        return asdict(self)


def thm1_constants(n: int, m: int, p: float, H: float) -> BoundConstants:
    """Derive (k, alpha, beta, delta, kappa) for the integral tube bound.

    Requires n >= 3, 0 < m < n-1, H <= 0 and p > n-k where
    k = min(m, n-m-1).
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if not 0 < m < n - 1:
        raise ValueError(f"need 0 < m < n-1, got m={m}, n={n}")
    if H > 0.0:
        raise ValueError(f"need H <= 0, got {H}")
    k = min(m, n - m - 1)
    if p <= n - k:
        raise ValueError(f"need p > n-k = {n - k}, got p={p}")
    alpha = (n - k - 1) / (n - k)
    beta = 1.0 / (n - m - 1) - 1.0 / p
    delta = 4.0 * (n - k - 1) + (4.0 / k) * ((2.0 * p - 1.0) / (p - n + k))
    kappa = (delta * abs(H)) ** alpha / (2.0 * alpha)
    return BoundConstants(n=n, m=m, p=float(p), H=float(H), k=k,
                          alpha=alpha, beta=beta, delta=delta, kappa=kappa)


def thm1_bound(constants: BoundConstants, vol_sigma: float,
               deficit_norm: float, r: float) -> float:
    """Upper bound for vol(T(Sigma, r)) from the integral curvature bound.

    Evaluates (w^(n-m-1) + 2^(p/alpha) * norm^(beta p) * w^p) * exp(kappa r^(2 alpha))
    with w(r) the curvature-weighted radius polynomial.
    """
    if vol_sigma < 0.0:
        raise ValueError(f"vol_sigma must be nonnegative, got {vol_sigma}")
    if deficit_norm < 0.0:
        raise ValueError(f"deficit_norm must be nonnegative, got {deficit_norm}")
    if r < 0.0:
        raise ValueError(f"r must be nonnegative, got {r}")
    c = constants
    n, m, p = c.n, c.m, c.p
    fiber_dim = n - m - 1
    w = ((c.alpha / fiber_dim) ** (1.0 / (n - c.k - 1))
         * (sphere_volume(fiber_dim) * vol_sigma * r ** (n - m)) ** (1.0 / fiber_dim)
         + c.delta * deficit_norm ** (1.0 - c.beta) * r ** 2)
    main = w ** fiber_dim + 2.0 ** (p / c.alpha) * deficit_norm ** (c.beta * p) * w ** p
    return main * math.exp(c.kappa * r ** (2.0 * c.alpha))


def cheeger_delta(n: int, m: int, p: float, H: float,
                  v0: float, D: float, epsilon: float = 0.0) -> float:
    """Largest submanifold volume delta with tube bound at radius D below v0.

    Inverts the (strictly increasing in vol_sigma) tube bound by monotone
    bisection to 1e-10 relative. Raises InfeasibleBoundError when even
    vol_sigma -> 0+ exceeds v0, i.e. epsilon is too large for (v0, D).
    """
    if v0 <= 0.0 or D <= 0.0:
        raise ValueError("v0 and D must be positive")
    if epsilon < 0.0:
        raise ValueError("epsilon must be nonnegative")
    consts = thm1_constants(n, m, p, H)
    floor = thm1_bound(consts, 0.0, epsilon, D)
    if floor >= v0:
        raise InfeasibleBoundError(
            f"bound at vol_sigma -> 0+ is {floor} >= v0 = {v0}; epsilon too large")
    hi = 1.0
    while thm1_bound(consts, hi, epsilon, D) <= v0:
        hi *= 2.0
        if hi > 1e300:
            raise InfeasibleBoundError("bound never exceeds v0; parameters degenerate")
    lo = 0.0
    while (hi - lo) > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if thm1_bound(consts, mid, epsilon, D) <= v0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class BoundReport:
    """Measured quantity vs. bound, with slack and pass/fail at a tolerance."""

    name: str
    measured: float
    bound: float
    slack: float
    constants: dict
    tolerance: float
    passed: bool
    equality: bool = False
    error_estimate: float = 0.0
    status: str = "ok"          # "ok" or "precondition-violation"
    details: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, name: str, measured: float, bound: float,
                    tolerance: float, constants: dict | BoundConstants | None = None,
                    error_estimate: float = 0.0, **details) -> "BoundReport":
        if isinstance(constants, BoundConstants):
            constants = constants.as_dict()
        slack = bound - measured
        return cls(
            name=name,
            measured=measured,
            bound=bound,
            slack=slack,
            constants=dict(constants or {}),
            tolerance=tolerance,
            passed=slack >= -tolerance,
            equality=abs(slack) <= 10.0 * error_estimate,
            error_estimate=error_estimate,
            details=details,
        )

    @classmethod
    def precondition_violation(cls, name: str, reason: str, **details) -> "BoundReport":
        report = cls(name=name, measured=math.nan, bound=math.nan, slack=math.nan,
                     constants={}, tolerance=0.0, passed=False,
                     status="precondition-violation", details=details)
        report.details["reason"] = reason
        return report

    def as_dict(self) -> dict:
        return _jsonable({
            "name": self.name,
            "status": self.status,
            "measured": self.measured,
            "bound": self.bound,
            "slack": self.slack,
            "constants": self.constants,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "equality": self.equality,
            "error_estimate": self.error_estimate,
            "details": self.details,
        })


def _jsonable(obj):
    """Recursively coerce numpy scalars/arrays so json.dumps accepts the tree."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    if isinstance(obj, BoundConstants):
        return obj.as_dict()
    return repr(obj)
