"""FLRW background: scale function, Hubble rate, curved mass, light cone.

All quantities are closed-form in the power-law / exponential family of
scale functions

    a(t) = a0 * exp(H t)                                   (sigma = -1)
    a(t) = a0 * (1 + n (1+sigma) H t / 2)^(2 / n(1+sigma)) (sigma != -1)

on [0, T0), where T0 is finite exactly when (1+sigma) H < 0.  The closed
forms are authoritative; adaptive quadrature is used only as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from scipy.integrate import quad

__all__ = [
    "CosmologyParams",
    "Regime",
    "ConeData",
    "MassBounds",
    "DomainError",
    "horizon_time",
    "scale_factor",
    "hubble_rate",
    "curved_mass_sq",
    "curved_mass_sq_from_derivatives",
    "mass_sign_change_time",
    "cone_radius",
    "cone_radius_quadrature",
    "cone_radius_limit",
    "cone_entry_time",
    "classify_regime",
    "curved_mass_bounds",
    "background_arrays",
]

# Fraction of T0 kept usable when the horizon is finite; evaluation at the
# horizon itself is singular.
_HORIZON_CLAMP = 1.0 - 1e-12
_LOG_BRANCH_TOL = 1e-12


class DomainError(ValueError):
    """Time argument outside [0, T0)."""


@dataclass(frozen=True)
class CosmologyParams:
    """Spacetime model (n, c, m^2, H, sigma, a0).

    ``m_sq < 0`` encodes a purely imaginary mass m; every formula below
    uses m^2 only, so the complex square root is never taken.
    """

    n: int
    c: float = 1.0
    m_sq: float = 0.0
    H: float = 0.0
    sigma: float = 0.0
    a0: float = 1.0

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError(f"spatial dimension must be a positive integer, got {self.n}")
        if self.c <= 0:
            raise ValueError(f"speed of light must be positive, got {self.c}")
        if self.a0 <= 0:
            raise ValueError(f"initial scale factor must be positive, got {self.a0}")


class Regime(Enum):
    MINKOWSKI = "minkowski"
    DE_SITTER_EXPANDING = "de_sitter_expanding"
    DE_SITTER_CONTRACTING = "de_sitter_contracting"
    EXPANDING_POLYNOMIAL = "expanding_polynomial"
    BIG_RIP = "big_rip"
    CONTRACTING = "contracting"
    BIG_CRUNCH = "big_crunch"


@dataclass(frozen=True)
class ConeData:
    """Initial support radius together with the background it propagates in."""

    r0: float
    params: CosmologyParams

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError(f"initial support radius must be positive, got {self.r0}")


def horizon_time(params: CosmologyParams) -> float:
    """End of the spacetime: inf when (1+sigma)H >= 0, else -2/(n(1+sigma)H)."""
    s = (1.0 + params.sigma) * params.H
    if s >= 0:
        return math.inf
    return -2.0 / (params.n * (1.0 + params.sigma) * params.H)


def _check_time(params: CosmologyParams, t: float) -> float:
    """Validate t in [0, T0) and clamp just below a finite horizon."""
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    t0 = horizon_time(params)
    if t >= t0:
        raise DomainError(f"time {t} is beyond the horizon T0 = {t0}")
    if math.isfinite(t0):
        t = min(t, _HORIZON_CLAMP * t0)
    return t


def scale_factor(params: CosmologyParams, t: float) -> float:
    """a(t) on [0, T0)."""
    t = _check_time(params, t)
    if params.sigma == -1.0:
        return params.a0 * math.exp(params.H * t)
    q = params.n * (1.0 + params.sigma)
    return params.a0 * (1.0 + q * params.H * t / 2.0) ** (2.0 / q)


def hubble_rate(params: CosmologyParams, t: float) -> float:
    """adot/a = H (a/a0)^(-n(1+sigma)/2); equals H at t = 0."""
    t = _check_time(params, t)
    if params.sigma == -1.0:
        return params.H
    q = params.n * (1.0 + params.sigma)
    return params.H / (1.0 + q * params.H * t / 2.0)


def curved_mass_sq(params: CosmologyParams, t: float) -> float:
    """M^2(t) = m^2 + sigma (nH/2c)^2 (1 + n(1+sigma)Ht/2)^-2.

    At sigma = -1 the bracket is 1 and this reduces to the constant
    m^2 - (nH/2c)^2.
    """
    t = _check_time(params, t)
    shift = params.sigma * (params.n * params.H / (2.0 * params.c)) ** 2
    if params.sigma == -1.0:
        return params.m_sq + shift
    q = params.n * (1.0 + params.sigma)
    return params.m_sq + shift * (1.0 + q * params.H * t / 2.0) ** (-2.0)


def curved_mass_sq_from_derivatives(
    params: CosmologyParams, t: float, dt: Optional[float] = None
) -> float:
    """M^2 from the defining derivative form, via 4th-order finite differences.

    M^2 = m^2 - n(n-2)/(4c^2) (adot/a)^2 - n/(2c^2) (addot/a).  Used only as a
    cross-check of the closed form.  Central stencil where it fits, one-sided
    near t = 0.  The step balances truncation against roundoff on the local
    timescale, which shrinks toward a finite horizon.
    """
    t = _check_time(params, t)
    t0 = horizon_time(params)
    if dt is None:
        scale = 1.0 + t
        if math.isfinite(t0):
            scale = min(scale, 0.4 * (t0 - t))
        dt = 2e-3 * scale
    elif math.isfinite(t0):
        dt = min(dt, (t0 - t) / 8.0)
    if t >= 2 * dt:
        a = [scale_factor(params, t + k * dt) for k in (-2, -1, 0, 1, 2)]
        a_here = a[2]
        adot = (a[0] - 8 * a[1] + 8 * a[3] - a[4]) / (12.0 * dt)
        addot = (-a[0] + 16 * a[1] - 30 * a[2] + 16 * a[3] - a[4]) / (12.0 * dt * dt)
    else:
        a = [scale_factor(params, t + k * dt) for k in range(6)]
        a_here = a[0]
        adot = (-25 * a[0] + 48 * a[1] - 36 * a[2] + 16 * a[3] - 3 * a[4]) / (12.0 * dt)
        addot = (45 * a[0] - 154 * a[1] + 214 * a[2] - 156 * a[3] + 61 * a[4] - 10 * a[5]) / (
            12.0 * dt * dt
        )
    n, c = params.n, params.c
    return params.m_sq - n * (n - 2) / (4.0 * c * c) * (adot / a_here) ** 2 - n / (2.0 * c * c) * addot / a_here


def mass_sign_change_time(params: CosmologyParams) -> Optional[float]:
    """Time T1 at which M^2 changes sign, when it exists.

    Requires (1+sigma)H < 0, sigma < 0 and m real with
    m > sqrt(|sigma|) n |H| / 2c; otherwise M^2 keeps its sign and None is
    returned.
    """
    if (1.0 + params.sigma) * params.H >= 0 or params.sigma >= 0 or params.m_sq <= 0:
        return None
    m = math.sqrt(params.m_sq)
    crit = math.sqrt(abs(params.sigma)) * params.n * abs(params.H) / (2.0 * params.c)
    if m <= crit:
        return None
    return -2.0 / (params.n * (1.0 + params.sigma) * params.H) * (1.0 - crit / m)


def _is_log_branch(params: CosmologyParams) -> bool:
    """Detect n(1+sigma) = 2, where the cone integral is logarithmic."""
    sig = params.sigma
    if isinstance(sig, (int, Fraction)):
        return params.n * (1 + Fraction(sig)) == 2
    return abs(params.n * (1.0 + sig) - 2.0) < _LOG_BRANCH_TOL


def cone_radius(cone: ConeData, t: float) -> float:
    """Light-cone radius r(t) = r0 + int_0^t c/a(s) ds, in closed form."""
    p = cone.params
    t = _check_time(p, t)
    c, a0, H = p.c, p.a0, p.H
    if H == 0.0:
        return cone.r0 + c * t / a0
    if p.sigma == -1.0:
        return cone.r0 + c / (a0 * H) * (1.0 - math.exp(-H * t))
    if _is_log_branch(p):
        return cone.r0 + c / (a0 * H) * math.log1p(H * t)
    q = p.n * (1.0 + p.sigma)
    ratio = scale_factor(p, t) / a0
    return cone.r0 + 2.0 * c / (a0 * H * (q - 2.0)) * (ratio ** (q / 2.0 - 1.0) - 1.0)


def cone_radius_quadrature(cone: ConeData, t: float, tol: float = 1e-12) -> float:
    """r(t) by adaptive quadrature of c/a(s); cross-check for cone_radius."""
    p = cone.params
    t = _check_time(p, t)
    if t == 0.0:
        return cone.r0
    val, _ = quad(lambda s: p.c / scale_factor(p, s), 0.0, t, epsabs=tol, epsrel=1e-12, limit=200)
    return cone.r0 + val


def cone_radius_limit(cone: ConeData) -> float:
    """sup of r(t) over [0, T0); inf when the cone is unbounded."""
    p = cone.params
    if p.H == 0.0:
        return math.inf
    if p.sigma == -1.0:
        return cone.r0 + p.c / (p.a0 * p.H) if p.H > 0 else math.inf
    if _is_log_branch(p):
        # log(1 + H t): unbounded as t -> T0 (H<0) or t -> inf (H>0)
        return math.inf
    q = p.n * (1.0 + p.sigma)
    # r(t) - r0 = coef * ((1 + qHt/2)^(1 - 2/q) - 1)
    e = 1.0 - 2.0 / q
    bracket_to_inf = q * p.H > 0  # T0 = inf; bracket term grows, else it -> 0
    term = (math.inf if e > 0 else 0.0) if bracket_to_inf else (0.0 if e > 0 else math.inf)
    coef = 2.0 * p.c / (p.a0 * p.H * (q - 2.0))
    if math.isinf(term):
        return math.inf
    return cone.r0 + coef * (term - 1.0)


def cone_entry_time(cone: ConeData, R: float, tol: float = 1e-10, max_iter: int = 200) -> Optional[float]:
    """The unique t with r(t) = R/2, or None when the cone never reaches R/2.

    Bisection after exponential bracket expansion; r is strictly increasing.
    """
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    target = R / 2.0
    if cone.r0 >= target:
        return 0.0 if cone.r0 == target else None
    t0 = horizon_time(cone.params)
    t_cap = _HORIZON_CLAMP * t0 if math.isfinite(t0) else None

    hi = 1.0
    if t_cap is not None:
        hi = min(hi, t_cap)
    for _ in range(max_iter):
        if cone_radius(cone, hi) >= target:
            break
        if t_cap is not None and hi >= t_cap:
            return None
        hi = min(hi * 2.0, t_cap) if t_cap is not None else hi * 2.0
    else:
        return None
    if cone_radius(cone, hi) < target:
        return None
    lo = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if cone_radius(cone, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def classify_regime(params: CosmologyParams) -> Regime:
    """Total classification of (H, sigma)."""
    H, sigma = params.H, params.sigma
    if H == 0.0:
        return Regime.MINKOWSKI
    if sigma == -1.0:
        return Regime.DE_SITTER_EXPANDING if H > 0 else Regime.DE_SITTER_CONTRACTING
    if H > 0:
        return Regime.EXPANDING_POLYNOMIAL if sigma > -1 else Regime.BIG_RIP
    return Regime.BIG_CRUNCH if sigma > -1 else Regime.CONTRACTING


def background_arrays(params: CosmologyParams, r0: float, ts) -> tuple:
    """Vectorized (a(t), r(t), M^2(t)) over an array of times in [0, T0).

    Same closed forms as the scalar operations; used by grid suprema and
    quadrature-heavy callers.
    """
    import numpy as np

    ts = np.asarray(ts, dtype=float)
    n, c, H, sigma, a0 = params.n, params.c, params.H, params.sigma, params.a0
    t0 = horizon_time(params)
    if ts.size and (ts.min() < 0 or ts.max() >= t0):
        raise DomainError("times must lie in [0, T0)")
    if math.isfinite(t0):
        ts = np.minimum(ts, _HORIZON_CLAMP * t0)
    shift = sigma * (n * H / (2.0 * c)) ** 2
    if sigma == -1.0:
        with np.errstate(over="ignore"):
            a = a0 * np.exp(H * ts)
            msq = np.full_like(ts, params.m_sq + shift)
            if H == 0.0:
                r = r0 + c * ts / a0
            else:
                r = r0 + c / (a0 * H) * (1.0 - np.exp(-H * ts))
        return a, r, msq
    q = n * (1.0 + sigma)
    bracket = 1.0 + q * H * ts / 2.0
    a = a0 * bracket ** (2.0 / q)
    msq = params.m_sq + shift * bracket ** (-2.0)
    if H == 0.0:
        r = r0 + c * ts / a0
    elif abs(q - 2.0) < _LOG_BRANCH_TOL:
        r = r0 + c / (a0 * H) * np.log1p(H * ts)
    else:
        r = r0 + 2.0 * c / (a0 * H * (q - 2.0)) * (bracket ** (1.0 - 2.0 / q) - 1.0)
    return a, r, msq


@dataclass(frozen=True)
class MassBounds:
    """Pointwise envelope of M^2(t) on [0, T0)."""

    case: str  # one of "i".."vi"
    lower: float  # -inf allowed
    upper: float  # +inf allowed
    inf_m_sq: float  # infimum of M^2 over [0, T0)
    sup_m_sq: float  # supremum of M^2 over [0, T0)
    limit: Optional[float]  # limit of M^2 at the end of the time domain


def curved_mass_bounds(params: CosmologyParams) -> MassBounds:
    """Analytic envelope of M^2, by case on (H, sigma)."""
    n, c, H, sigma, m_sq = params.n, params.c, params.H, params.sigma, params.m_sq
    shift = sigma * (n * H / (2.0 * c)) ** 2
    if H == 0.0 or sigma == 0.0:
        return MassBounds("i", m_sq, m_sq, m_sq, m_sq, m_sq)
    if sigma == -1.0:
        v = m_sq + shift
        return MassBounds("ii", v, v, v, v, v)
    if H > 0 and sigma > 0:
        # decreasing from m^2 + shift (shift > 0) toward m^2
        return MassBounds("iii", m_sq, m_sq + shift, m_sq, m_sq + shift, m_sq)
    if (1.0 + sigma) * H > 0 and sigma < 0:
        # increasing from m^2 + shift (shift < 0) toward m^2
        return MassBounds("iv", m_sq + shift, m_sq, m_sq + shift, m_sq, m_sq)
    if H < 0 and sigma > 0:
        return MassBounds("v", m_sq + shift, math.inf, m_sq + shift, math.inf, math.inf)
    # (1+sigma)H < 0 with sigma < 0
    return MassBounds("vi", -math.inf, m_sq + shift, -math.inf, m_sq + shift, -math.inf)
