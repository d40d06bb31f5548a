"""Blow-up threshold quantities and admissibility verdicts.

Computes the damping rate N, the weight b(t), the data threshold S, the
admissible exponent ranges per regime (including the critical exponent p0
for contracting backgrounds), and renders a per-hypothesis verdict for a
parameter point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Optional, Union

from .cosmology import (
    ConeData,
    CosmologyParams,
    background_arrays,
    cone_radius,
    curved_mass_bounds,
    curved_mass_sq,
    horizon_time,
)

__all__ = [
    "InitialDataSummary",
    "ThresholdReport",
    "CaseMismatchError",
    "unit_ball_volume",
    "nonlinearity_weight",
    "damping_rate_N",
    "threshold_S",
    "critical_exponent_p0",
    "admissible_p_range",
    "analytic_scaling_conditions",
    "check_hypotheses",
    "compare_prior_conditions",
]

_S_OVERFLOW = 1e30


class CaseMismatchError(ValueError):
    """Parameter point matches no admissible regime case."""


@dataclass(frozen=True)
class InitialDataSummary:
    """Spatial means of the data and their common support radius."""

    w0: float
    w1: float
    r0: float

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError(f"support radius must be positive, got {self.r0}")


@dataclass
class ThresholdReport:
    """Per-hypothesis ledger for one parameter point."""

    N: float
    S: float
    p_lower: float
    p_upper: float
    case_label: str
    hypothesis_flags: dict
    verdict: str  # "admissible" or "inadmissible(<reason>)"

    def to_dict(self) -> dict:
        return asdict(self)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in n dimensions: pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def nonlinearity_weight(
    params: CosmologyParams, r0: float, lam: float, p: float, t: float
) -> float:
    """b(t) = lambda * (omega_n^(2/n) a(t) r(t)^2)^(-n(p-1)/2).

    Strictly positive for lambda > 0; equivalently
    lambda / (omega_n^(p-1) (a r^2)^(n(p-1)/2)).
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    cone = ConeData(r0, params)
    from .cosmology import scale_factor

    a = scale_factor(params, t)
    r = cone_radius(cone, t)
    wn = unit_ball_volume(params.n)
    return lam * (wn ** (2.0 / params.n) * a * r * r) ** (-params.n * (p - 1.0) / 2.0)


def damping_rate_N(
    params: CosmologyParams, N_user: Optional[float] = None
) -> tuple[float, str]:
    """Damping rate N with its regime case label.

    Case dispatch follows the regime enumeration: (1) static background,
    (2) polynomially expanding, (3) strongly contracting.  A supplied
    ``N_user`` switches to the raw mode, which only checks the mass
    hypotheses; "raw" mode without N_user uses the minimal admissible
    N = sqrt(-inf M^2) when the squared curved mass stays in [-N^2, 0].
    """
    n, c, H, sigma, m_sq = params.n, params.c, params.H, params.sigma, params.m_sq
    bounds = curved_mass_bounds(params)
    if N_user is not None:
        if N_user < 0:
            raise ValueError(f"N must be nonnegative, got {N_user}")
        _require_mass_window(params, N_user, bounds)
        return N_user, "raw"

    shift_abs = (n * H / (2.0 * c)) ** 2
    if H == 0.0:
        if m_sq > 0:
            raise CaseMismatchError("static case requires purely imaginary mass (m_sq <= 0)")
        return math.sqrt(-m_sq), "1"
    if H > 0 and sigma > -1:
        if m_sq > 0:
            raise CaseMismatchError("expanding case requires purely imaginary mass (m_sq <= 0)")
        if sigma > 0:
            N = math.sqrt(-m_sq)
            if N < math.sqrt(sigma) * n * H / (2.0 * c) - 1e-15:
                raise CaseMismatchError(
                    "expanding case with sigma > 0 requires |m| >= sqrt(sigma) n H / 2c"
                )
            return N, "2"
        if sigma == 0:
            return math.sqrt(-m_sq), "2"
        return math.sqrt(-m_sq - sigma * shift_abs), "2"
    if H < 0 and sigma < -1 - 2.0 / n:
        if m_sq > 0:
            raise CaseMismatchError("contracting case requires purely imaginary mass (m_sq <= 0)")
        return math.sqrt(-m_sq - sigma * shift_abs), "3"
    # raw fallback: minimal N compatible with the mass window, when one exists
    if not math.isfinite(bounds.inf_m_sq):
        raise CaseMismatchError(
            f"M^2 is unbounded below (case {bounds.case}); no finite N exists"
        )
    if bounds.sup_m_sq > 1e-12:
        raise CaseMismatchError(
            f"M^2 becomes positive (case {bounds.case}); curved mass is not purely imaginary"
        )
    N = math.sqrt(max(0.0, -bounds.inf_m_sq))
    return N, "raw"


def _require_mass_window(params: CosmologyParams, N: float, bounds=None) -> None:
    if bounds is None:
        bounds = curved_mass_bounds(params)
    if not math.isfinite(bounds.inf_m_sq):
        raise CaseMismatchError("M^2 is unbounded below; the mass hypothesis fails for any N")
    if N * N + bounds.inf_m_sq < -1e-10 * (1.0 + N * N):
        raise CaseMismatchError(f"N^2 + inf M^2 = {N*N + bounds.inf_m_sq} < 0")


def _s_integrand(params, r0, lam, p, theta, N, t):
    msq = curved_mass_sq(params, t)
    val = N * N + msq
    if val <= 1e-12 * (N * N + abs(msq) + 1.0):
        return 0.0
    b = nonlinearity_weight(params, r0, lam, p, t)
    return math.exp(-params.c * N * t) * (val / ((1.0 - theta) * b)) ** (1.0 / (p - 1.0))


def threshold_S(
    params: CosmologyParams,
    r0: float,
    lam: float,
    p: float,
    theta: float,
    N: float,
    t_max: Optional[float] = None,
    grid_size: int = 10_000,
) -> float:
    """S = sup_t e^(-cNt) ((N^2 + M^2(t)) / ((1-theta) b(t)))^(1/(p-1)).

    Supremum over a log-spaced grid with golden-section refinement near the
    grid maximizer; returns inf when sampled values exceed the overflow guard.
    Negative values of N^2 + M^2 (possible only at round-off level under the
    mass hypothesis) contribute zero.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    t0 = horizon_time(params)
    if t_max is None:
        t_max = 1e3 * max(1.0, 1.0 / (params.c * N)) if N > 0 else 1e3
    if math.isfinite(t0):
        t_max = min(t_max, (1.0 - 1e-9) * t0)

    import numpy as np

    f = lambda t: _s_integrand(params, r0, lam, p, theta, N, t)
    # log-spaced grid plus t = 0; work in logs to survive huge scale factors
    ts = np.concatenate(([0.0], t_max * 10.0 ** (-6.0 * (1.0 - np.linspace(0.0, 1.0, grid_size)))))
    a, r, msq = background_arrays(params, r0, ts)
    wn = unit_ball_volume(params.n)
    window = N * N + msq
    # the mass hypothesis makes inf(N^2 + M^2) = 0; clamp roundoff residue
    window = np.where(window <= 1e-12 * (N * N + np.abs(msq) + 1.0), 0.0, window)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        log_b = math.log(lam) - params.n * (p - 1.0) / 2.0 * (
            (2.0 / params.n) * math.log(wn) + np.log(a) + 2.0 * np.log(r)
        )
        log_vals = -params.c * N * ts + (np.log(window) - math.log(1.0 - theta) - log_b) / (p - 1.0)
    log_vals = np.where(window > 0.0, log_vals, -np.inf)
    best = int(np.argmax(log_vals))
    if log_vals[best] == -np.inf:
        return 0.0
    if log_vals[best] > math.log(_S_OVERFLOW):
        return math.inf
    ts = ts.tolist()
    vals = np.exp(log_vals).tolist()
    # golden-section refinement on the bracketing interval
    lo = ts[best - 1] if best > 0 else ts[0]
    hi = ts[best + 1] if best + 1 < len(ts) else ts[-1]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(80):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    return max(vals[best], f1, f2)


Number = Union[int, float, Fraction]


def critical_exponent_p0(n: int, sigma: Number) -> Number:
    """p0 = n((n+1)(sigma+1) + 1) / (n(n-1)(sigma+1) + n - 4).

    Defined for sigma <= -1 - 2/n; the boundary value is exactly 1.  Exact
    arithmetic is preserved when sigma is an int or Fraction.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    exact = isinstance(sigma, (int, Fraction))
    boundary = Fraction(-1) - Fraction(2, n)
    if exact:
        sig = Fraction(sigma)
        if sig > boundary:
            raise ValueError(f"sigma must satisfy sigma <= -1 - 2/n, got {sigma}")
        num = n * ((n + 1) * (sig + 1) + 1)
        den = n * (n - 1) * (sig + 1) + n - 4
        return num / den
    if sigma > float(boundary) + 1e-15:
        raise ValueError(f"sigma must satisfy sigma <= -1 - 2/n, got {sigma}")
    num = n * ((n + 1) * (sigma + 1.0) + 1.0)
    den = n * (n - 1) * (sigma + 1.0) + n - 4.0
    return num / den


def admissible_p_range(params: CosmologyParams) -> tuple[float, float]:
    """(1, p_upper) for the matched regime case; raises on mismatch."""
    n, H, sigma = params.n, params.H, params.sigma
    if H == 0.0:
        return 1.0, math.inf if n == 1 else (n + 1.0) / (n - 1.0)
    if H > 0 and sigma > -1:
        branch = -1.0 + 2.0 / n
        if n == 1 and sigma >= 0:
            return 1.0, math.inf
        if n == 2 and sigma == 0.0:
            return 1.0, math.inf
        if n >= 2 and sigma > branch:
            return 1.0, ((n + 1) * (1.0 + sigma) - 1.0) / ((n - 1) * (1.0 + sigma) - 1.0)
        if n >= 3 and sigma == branch:
            return 1.0, (n + 2.0) / (n - 2.0)
        # remaining: n=1 with -1<sigma<0, or n>=2 with -1<sigma<branch
        return 1.0, -(2.0 + sigma) / sigma
    if H < 0 and sigma < -1 - 2.0 / n:
        return 1.0, float(critical_exponent_p0(n, sigma))
    raise CaseMismatchError(
        f"(H={H}, sigma={sigma}) matches no admissible exponent-range case"
    )


def analytic_scaling_conditions(
    params: CosmologyParams, p: float
) -> Optional[tuple[bool, bool]]:
    """Analytic verdict for the two scaling-limit hypotheses, per regime.

    Returns (h13, h14) -- whether the cutoff-integral limits vanish -- or
    None when the regime is outside the analyzed condition ladder.
    """
    n, H, sigma = params.n, params.H, params.sigma
    if H == 0.0:
        ok = n == 1 or p < (n + 1.0) / (n - 1.0)
        return ok, ok
    if sigma == -1.0:
        return (False, True) if H > 0 else (True, False)
    if H > 0 and sigma > -1:
        _, p_up = admissible_p_range(params)
        return p < p_up, True
    if H < 0 and sigma < -1 - 2.0 / n:
        # polynomially contracting case: a ~ t^(2/q) with q = n(1+sigma) < -2.
        # The cutoff-layer integral grows like R^(n+1+1/(1+sigma)); the
        # annulus integral carries gamma = (1-4p'/n)/(1+sigma) and its decay
        # switches between the R- and t_R-dominated branches at gamma = -1.
        # Both limits vanish iff the growth exponent stays below 2p'
        # (equality leaves a nonvanishing, or log-growing, limit).
        pp = p / (p - 1.0)
        h13 = n + 1.0 + 1.0 / (1.0 + sigma) < 2.0 * pp
        gamma = (1.0 - 4.0 * pp / n) / (1.0 + sigma)
        q = n * (1.0 + sigma)
        if gamma > -1.0:
            slope_iii = n + 1.0 + gamma
        elif gamma < -1.0:
            slope_iii = n + (gamma + 1.0) * q / (q - 2.0)
        else:
            slope_iii = float(n)  # exact critical line, times (log R)^(1/p')
        h14 = slope_iii < 2.0 * pp
        return h13, h14
    return None


def check_hypotheses(
    params: CosmologyParams,
    data: InitialDataSummary,
    lam: float,
    p: float,
    theta: float = 0.5,
    N_user: Optional[float] = None,
    numeric_scaling: bool = False,
) -> ThresholdReport:
    """Full hypothesis ledger and admissibility verdict for one point.

    The scaling-limit hypotheses are decided by the analytic condition
    ladder; with ``numeric_scaling`` the cutoff integrals are also fitted
    numerically and any disagreement is flagged.  The space-time integral
    condition on M^2 u constrains the unknown solution and is recorded as
    diagnostic-only.
    """
    flags: dict = {}
    reasons: list[str] = []

    try:
        N, case_label = damping_rate_N(params, N_user)
        flags["mass_window_1_10"] = True
    except CaseMismatchError as exc:
        return ThresholdReport(
            N=math.nan, S=math.nan, p_lower=1.0, p_upper=math.nan,
            case_label="none",
            hypothesis_flags={"mass_window_1_10": False},
            verdict=f"inadmissible(case mismatch: {exc})",
        )

    S = threshold_S(params, data.r0, lam, p, theta, N)
    flags["S_finite"] = math.isfinite(S)
    flags["w0_gt_S"] = math.isfinite(S) and data.w0 > S
    flags["w1_ge_cNw0"] = data.w1 >= params.c * N * data.w0
    if not flags["S_finite"]:
        reasons.append("S = inf")
    elif not flags["w0_gt_S"]:
        reasons.append("w0 <= S")
    if not flags["w1_ge_cNw0"]:
        reasons.append("w1 < cNw0")

    ladder = analytic_scaling_conditions(params, p)
    if ladder is None:
        flags["h13"] = flags["h14"] = False
        reasons.append("regime outside the analyzed scaling ladder")
    else:
        flags["h13"], flags["h14"] = ladder
        if not flags["h13"]:
            reasons.append("(1.13) fails")
        if not flags["h14"]:
            reasons.append("(1.14) fails")
    if numeric_scaling:
        from .testfn import hypothesis_13_14

        ev = hypothesis_13_14(params, data.r0, p)
        flags["h13_numeric"] = ev.h13_numeric
        flags["h14_numeric"] = ev.h14_numeric
        flags["scaling_disagreement"] = ladder is not None and (
            ev.h13_numeric != flags["h13"] or ev.h14_numeric != flags["h14"]
        )
    flags["mass_integral_1_15"] = "diagnostic-only"

    if case_label in {"1", "2", "3"}:
        p_lower, p_upper = admissible_p_range(params)
    else:
        p_lower, p_upper = 1.0, math.inf
    in_range = p_lower < p < p_upper
    if not in_range:
        reasons.append(f"p outside ({p_lower}, {p_upper})")

    core = ("mass_window_1_10", "S_finite", "w0_gt_S", "w1_ge_cNw0", "h13", "h14")
    ok = in_range and all(flags[k] for k in core)
    verdict = "admissible" if ok else "inadmissible(" + "; ".join(reasons) + ")"
    return ThresholdReport(
        N=N, S=S, p_lower=p_lower, p_upper=p_upper, case_label=case_label,
        hypothesis_flags=flags, verdict=verdict,
    )


def _prior_w1_floor(params: CosmologyParams, data, lam, p, theta, N) -> float:
    wn = unit_ball_volume(params.n)
    c = params.c
    extra = math.sqrt(2.0 * lam * c * c * theta / (p + 1.0)) * data.w0 ** ((p + 1.0) / 2.0) / (
        (wn ** (2.0 / params.n) * params.a0 * data.r0 ** 2) ** (params.n * (p - 1.0) / 4.0)
    )
    return max(c * N * data.w0, extra)


def _prior_S(params: CosmologyParams, r0, lam, p, theta, N, grid_size=4000) -> float:
    """Earlier-work data threshold: the sup carries max{a0 r0^2, a r^2}."""
    import numpy as np

    wn = unit_ball_volume(params.n)
    t0 = horizon_time(params)
    t_max = 1e3 * max(1.0, 1.0 / (params.c * N)) if N > 0 else 1e3
    if math.isfinite(t0):
        t_max = min(t_max, (1.0 - 1e-9) * t0)
    ts = np.concatenate(([0.0], t_max * 10.0 ** (-6.0 * (1.0 - np.linspace(0.0, 1.0, grid_size)))))
    a, r, msq = background_arrays(params, r0, ts)
    window = N * N + msq
    window = np.where(window <= 1e-12 * (N * N + np.abs(msq) + 1.0), 0.0, window)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        log_bulk = params.n / 2.0 * np.log(np.maximum(params.a0 * r0 * r0, a * r * r))
        log_vals = (
            math.log(wn) - params.c * N * ts + log_bulk
            + (np.log(window) - math.log((1.0 - theta) * lam)) / (p - 1.0)
        )
    log_vals = np.where(window > 0.0, log_vals, -np.inf)
    top = float(np.max(log_vals))
    if top == -math.inf:
        return 0.0
    return math.inf if top > math.log(_S_OVERFLOW) else math.exp(top)


def compare_prior_conditions(
    params: CosmologyParams,
    data: InitialDataSummary,
    lam: float,
    p: float,
    theta: float = 0.5,
    N_user: Optional[float] = None,
) -> dict:
    """Evaluate this work's data conditions against the earlier, stronger ones.

    The earlier conditions carry a max over {a0 r0^2, a r^2} inside the sup,
    an extra lower bound on w1, and a cap on r0 in the contracting de Sitter
    family; passing them implies passing the present ones.
    """
    N, _ = damping_rate_N(params, N_user)
    S_this = threshold_S(params, data.r0, lam, p, theta, N)
    this_ok = (
        math.isfinite(S_this) and data.w0 > S_this and data.w1 >= params.c * N * data.w0
    )
    S_prior = _prior_S(params, data.r0, lam, p, theta, N)
    prior_ok = (
        math.isfinite(S_prior)
        and data.w0 > S_prior
        and data.w1 >= _prior_w1_floor(params, data, lam, p, theta, N)
    )
    if params.H < 0 and params.sigma <= -1:
        prior_ok = prior_ok and data.r0 <= 2.0 * params.c / (params.a0 * abs(params.H))
    return {"this_paper": this_ok, "prior": prior_ok}
