"""Run-specification parsing, validation, and serialization.

A run specification is a flat JSON object naming the background, the
nonlinearity, and the initial data, plus optional numerical knobs and an
optional ``sweep`` block describing a two-axis parameter grid.  Unknown
keys are rejected rather than ignored so that a typo cannot silently fall
back to a default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .cosmology import CosmologyParams
from .thresholds import CaseMismatchError, InitialDataSummary, damping_rate_N


class ConfigError(ValueError):
    """Malformed or invalid run specification."""


# keys of the flat spec object; values are (default, validator description)
_KNOWN_KEYS = {
    "n", "H", "sigma", "m_sq", "c", "a0",
    "lambda", "p", "theta", "N",
    "r0", "w0", "w1",
    "t_end", "R", "num_nodes", "r_max", "output_interval", "safety",
    "sweep",
}

_SWEEP_AXES = {"sigma", "H", "p", "m_sq", "lambda", "r0", "w0", "w1", "theta"}


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: an inclusive linear range with a point count."""

    name: str
    lo: float
    hi: float
    count: int


@dataclass(frozen=True)
class SweepSpec:
    """Two-axis grid over an otherwise fixed run specification."""

    axis1: SweepAxis
    axis2: SweepAxis
    run_ode: bool = False


@dataclass(frozen=True)
class RunSpec:
    """Validated run specification with defaults applied."""

    n: int
    H: float = 0.0
    sigma: float = 0.0
    m_sq: float = 0.0
    c: float = 1.0
    a0: float = 1.0
    lam: float = 1.0
    p: float = 2.0
    theta: float = 0.5
    N: Optional[float] = None
    r0: float = 1.0
    w0: float = 10.0
    w1: Optional[float] = None
    t_end: Optional[float] = None
    R: Optional[float] = None
    num_nodes: Optional[int] = None
    r_max: Optional[float] = None
    output_interval: Optional[float] = None
    safety: float = 0.4
    sweep: Optional[SweepSpec] = None

    def params(self) -> CosmologyParams:
        return CosmologyParams(
            n=self.n, c=self.c, m_sq=self.m_sq, H=self.H, sigma=self.sigma, a0=self.a0
        )

    def resolved_w1(self) -> float:
        """w1, defaulting to the threshold-hypothesis equality c N w0.

        When the point matches no damping-rate case the default falls back
        to zero (there is no N to scale by).
        """
        if self.w1 is not None:
            return self.w1
        try:
            N, _ = damping_rate_N(self.params(), self.N)
        except CaseMismatchError:
            return 0.0
        return self.c * N * self.w0

    def data(self) -> InitialDataSummary:
        return InitialDataSummary(w0=self.w0, w1=self.resolved_w1(), r0=self.r0)

    def to_dict(self) -> dict:
        out = {
            "n": self.n, "H": self.H, "sigma": self.sigma, "m_sq": self.m_sq,
            "c": self.c, "a0": self.a0, "lambda": self.lam, "p": self.p,
            "theta": self.theta, "r0": self.r0, "w0": self.w0,
            "safety": self.safety,
        }
        for key, val in (
            ("N", self.N), ("w1", self.w1), ("t_end", self.t_end), ("R", self.R),
            ("num_nodes", self.num_nodes), ("r_max", self.r_max),
            ("output_interval", self.output_interval),
        ):
            if val is not None:
                out[key] = val
        if self.sweep is not None:
            def axis_dict(axis: SweepAxis) -> dict:
                return {"name": axis.name, "min": axis.lo, "max": axis.hi,
                        "count": axis.count}

            out["sweep"] = {
                "axis1": axis_dict(self.sweep.axis1),
                "axis2": axis_dict(self.sweep.axis2),
                "run_ode": self.sweep.run_ode,
            }
        return out

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _number(raw: dict, key: str, default=None):
    if key not in raw:
        return default
    val = raw[key]
    _require(isinstance(val, (int, float)) and not isinstance(val, bool),
             f"{key} must be a number, got {val!r}")
    return float(val)


def _parse_axis(obj, which: str) -> SweepAxis:
    _require(isinstance(obj, dict), f"sweep.{which} must be an object")
    unknown = set(obj) - {"name", "min", "max", "count"}
    _require(not unknown, f"sweep.{which} has unknown keys {sorted(unknown)}")
    for key in ("name", "min", "max", "count"):
        _require(key in obj, f"sweep.{which}.{key} is required")
    name = obj["name"]
    _require(name in _SWEEP_AXES, f"sweep.{which}.name must be one of {sorted(_SWEEP_AXES)}")
    count = obj["count"]
    _require(isinstance(count, int) and count >= 2, f"sweep.{which}.count must be an integer >= 2")
    return SweepAxis(name=name, lo=float(obj["min"]), hi=float(obj["max"]), count=count)


def parse_config_dict(raw: dict) -> RunSpec:
    """Validate a decoded JSON object into a RunSpec."""
    _require(isinstance(raw, dict), "config root must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    _require(not unknown, f"unknown config keys {sorted(unknown)}")
    _require("n" in raw, "n is required")
    n = raw["n"]
    _require(isinstance(n, int) and n >= 1, f"n must be a positive integer, got {n!r}")

    theta = _number(raw, "theta", 0.5)
    _require(0.0 < theta < 1.0, f"theta must lie in (0, 1), got {theta}")
    p = _number(raw, "p", 2.0)
    _require(p > 1.0, f"p must exceed 1, got {p}")
    c = _number(raw, "c", 1.0)
    _require(c > 0.0, f"c must be positive, got {c}")
    a0 = _number(raw, "a0", 1.0)
    _require(a0 > 0.0, f"a0 must be positive, got {a0}")
    r0 = _number(raw, "r0", 1.0)
    _require(r0 > 0.0, f"r0 must be positive, got {r0}")
    lam = _number(raw, "lambda", 1.0)
    _require(lam > 0.0, f"lambda must be positive, got {lam}")
    safety = _number(raw, "safety", 0.4)
    _require(0.0 < safety <= 1.0, f"safety must lie in (0, 1], got {safety}")
    for key in ("t_end", "R", "r_max", "output_interval"):
        val = _number(raw, key)
        if val is not None:
            _require(val > 0.0, f"{key} must be positive, got {val}")
    num_nodes = raw.get("num_nodes")
    if num_nodes is not None:
        _require(isinstance(num_nodes, int) and num_nodes >= 3,
                 f"num_nodes must be an integer >= 3, got {num_nodes!r}")
    N = _number(raw, "N")
    if N is not None:
        _require(N >= 0.0, f"N must be nonnegative, got {N}")

    sweep = None
    if "sweep" in raw:
        sw = raw["sweep"]
        _require(isinstance(sw, dict), "sweep must be an object")
        unknown = set(sw) - {"axis1", "axis2", "run_ode"}
        _require(not unknown, f"sweep has unknown keys {sorted(unknown)}")
        _require("axis1" in sw and "axis2" in sw, "sweep requires axis1 and axis2")
        axis1 = _parse_axis(sw["axis1"], "axis1")
        axis2 = _parse_axis(sw["axis2"], "axis2")
        _require(axis1.name != axis2.name, "sweep axes must name distinct parameters")
        run_ode = sw.get("run_ode", False)
        _require(isinstance(run_ode, bool), "sweep.run_ode must be a boolean")
        sweep = SweepSpec(axis1=axis1, axis2=axis2, run_ode=run_ode)

    spec = RunSpec(
        n=n,
        H=_number(raw, "H", 0.0),
        sigma=_number(raw, "sigma", 0.0),
        m_sq=_number(raw, "m_sq", 0.0),
        c=c, a0=a0, lam=lam, p=p, theta=theta, N=N,
        r0=r0,
        w0=_number(raw, "w0", 10.0),
        w1=_number(raw, "w1"),
        t_end=_number(raw, "t_end"),
        R=_number(raw, "R"),
        num_nodes=num_nodes,
        r_max=_number(raw, "r_max"),
        output_interval=_number(raw, "output_interval"),
        safety=safety,
        sweep=sweep,
    )
    # constructing the params validates the remaining physics fields
    try:
        spec.params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec


def parse_config(path) -> RunSpec:
    """Load and validate a JSON run specification from disk."""
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config_dict(raw)
