"""Command line front end.

One subcommand per capability: background classification, threshold
verdicts, comparison-ODE and PDE runs, cutoff-scaling studies, the weak
identity check, and two-axis parameter sweeps with CSV persistence.  All
state lives in plain files; identical configs produce byte-identical
outputs, and sweeps are resumable and support a worker pool that matches
the serial output row for row.

Exit codes: 0 on success, 1 on a configuration or validation error, 2 on
a runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import comparison_ode, field_solver
from .config import ConfigError, RunSpec, parse_config, parse_config_dict
from .cosmology import (
    ConeData,
    cone_radius,
    classify_regime,
    curved_mass_bounds,
    horizon_time,
    mass_sign_change_time,
)
from .thresholds import CaseMismatchError, check_hypotheses, damping_rate_N
from .testfn import hypothesis_13_14, save_scaling_fit, weak_identity_residual


def _print_json(payload: dict, out_dir, name: str) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    print(text)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / name).write_text(text + "\n")


def _time_cap(spec: RunSpec, default: float) -> float:
    t0 = horizon_time(spec.params())
    t_end = spec.t_end if spec.t_end is not None else default
    return min(t_end, 0.99 * t0) if math.isfinite(t0) else t_end


def cmd_regime(spec: RunSpec, out_dir) -> int:
    params = spec.params()
    bounds = curved_mass_bounds(params)
    payload = {
        "regime": classify_regime(params).value,
        "horizon_time": horizon_time(params),
        "curved_mass_sq_bounds": {"lower": bounds.lower, "upper": bounds.upper,
                                  "case": bounds.case},
        "mass_sign_change_time": mass_sign_change_time(params),
    }
    _print_json(payload, out_dir, "regime.json")
    return 0


def cmd_threshold(spec: RunSpec, out_dir) -> int:
    report = check_hypotheses(
        spec.params(), spec.data(), spec.lam, spec.p, theta=spec.theta, N_user=spec.N
    )
    _print_json(report.to_dict(), out_dir, "threshold.json")
    return 0


def cmd_ode(spec: RunSpec, out_dir) -> int:
    params = spec.params()
    try:
        N, _ = damping_rate_N(params, spec.N)
    except CaseMismatchError as exc:
        raise ConfigError(f"no damping rate N for this background: {exc}") from exc
    problem = comparison_ode.OdeProblem(
        params=params, r0=spec.r0, lam=spec.lam, p=spec.p, theta=spec.theta,
        N=N, w0=spec.w0, w1=spec.resolved_w1(),
        t_end=spec.t_end if spec.t_end is not None else 50.0,
    )
    traj = comparison_ode.integrate_comparison(problem)
    payload = {
        "blowup": traj.blowup,
        "t_star": traj.t_star,
        "t_star_err": traj.t_star_err,
        "final_t": float(traj.t[-1]),
        "final_w": float(traj.w[-1]),
        "samples": int(traj.t.size),
    }
    _print_json(payload, out_dir, "ode.json")
    if out_dir is not None:
        comparison_ode.save_trajectory_csv(
            traj, Path(out_dir) / "trajectory.csv", Path(out_dir) / "trajectory.json"
        )
    return 0


def _pde_state(spec: RunSpec, t_cap: float):
    params = spec.params()
    cone = ConeData(spec.r0, params)
    r_max = spec.r_max if spec.r_max is not None else cone_radius(cone, t_cap) + 0.5
    nodes = spec.num_nodes if spec.num_nodes is not None else int(512 * r_max) + 1
    return field_solver.init_field(
        n=spec.n, r0=spec.r0, r_max=r_max, num_nodes=nodes,
        w0=spec.w0, w1=spec.resolved_w1(),
    )


def cmd_pde(spec: RunSpec, out_dir, keep_snapshots: bool = False):
    t_cap = _time_cap(spec, 5.0)
    state = _pde_state(spec, t_cap)
    diag = field_solver.run_until(
        spec.params(), spec.lam, spec.p, state, t_cap, spec.r0,
        output_interval=spec.output_interval, safety=spec.safety,
        keep_snapshots=keep_snapshots,
    )
    payload = {
        "diverged": diag.diverged,
        "divergence_time": diag.divergence_time,
        "final_t": diag.t[-1],
        "final_mean": diag.mean[-1],
        "final_sup": diag.sup[-1],
        "mass_integral": diag.mass_integral[-1],
    }
    _print_json(payload, out_dir, "pde.json")
    if out_dir is not None:
        field_solver.save_diagnostics_csv(diag, Path(out_dir) / "diagnostics.csv")
    return diag


def cmd_scaling(spec: RunSpec, out_dir) -> int:
    ev = hypothesis_13_14(spec.params(), spec.r0, spec.p)
    payload = {
        "h13_numeric": ev.h13_numeric,
        "h14_numeric": ev.h14_numeric,
        "h13_analytic": ev.h13_analytic,
        "h14_analytic": ev.h14_analytic,
        "disagreement": ev.disagreement,
        "II_slope": ev.fit_II.slope,
        "II_exponential": ev.fit_II.exponential,
        "III_slope": ev.fit_III.slope,
        "III_exponential": ev.fit_III.exponential,
    }
    _print_json(payload, out_dir, "scaling.json")
    if out_dir is not None:
        save_scaling_fit(ev.fit_II, Path(out_dir) / "II_prime.csv",
                         Path(out_dir) / "II_prime.json")
        save_scaling_fit(ev.fit_III, Path(out_dir) / "III_prime.csv",
                         Path(out_dir) / "III_prime.json")
    return 0


def cmd_identity(spec: RunSpec, out_dir) -> int:
    R = spec.R if spec.R is not None else 2.0 * spec.r0 + 2.0
    if R <= 2.0 * spec.r0:
        raise ConfigError(f"R = {R} must exceed 2 r0 = {2.0 * spec.r0}")
    t_cap = _time_cap(spec, R)
    if t_cap < min(R, 0.99 * horizon_time(spec.params())):
        raise ConfigError(f"t_end = {t_cap} does not cover the cutoff window [0, {R}]")
    state = _pde_state(spec, t_cap)
    diag = field_solver.run_until(
        spec.params(), spec.lam, spec.p, state, t_cap, spec.r0,
        output_interval=spec.output_interval, safety=spec.safety,
        keep_snapshots=True,
    )
    residual, parts = weak_identity_residual(
        diag, spec.params(), spec.lam, spec.p, R, return_parts=True
    )
    payload = {"R": R, "residual": residual, **parts}
    _print_json(payload, out_dir, "identity.json")
    return 0


# ---------------------------------------------------------------------------
# sweep machinery


_SWEEP_FIELDS = [
    "N", "S", "p_lower", "p_upper", "case", "verdict", "t_star", "error",
]


def _axis_values(axis) -> list[float]:
    return [float(v) for v in np.linspace(axis.lo, axis.hi, axis.count)]


def _sweep_point(task) -> list[str]:
    """Evaluate one grid point; any failure is recorded in-row."""
    base, name1, val1, name2, val2, run_ode = task
    raw = dict(base)
    raw[name1] = val1
    raw[name2] = val2
    row = [repr(val1), repr(val2)] + [""] * len(_SWEEP_FIELDS)
    try:
        spec = parse_config_dict(raw)
        report = check_hypotheses(
            spec.params(), spec.data(), spec.lam, spec.p, theta=spec.theta, N_user=spec.N
        )
        row[2:8] = [repr(report.N), repr(report.S), repr(report.p_lower),
                    repr(report.p_upper), report.case_label, report.verdict]
        if run_ode and report.verdict == "admissible":
            problem = comparison_ode.OdeProblem(
                params=spec.params(), r0=spec.r0, lam=spec.lam, p=spec.p,
                theta=spec.theta, N=report.N, w0=spec.w0, w1=spec.resolved_w1(),
                t_end=spec.t_end if spec.t_end is not None else 50.0,
            )
            traj = comparison_ode.integrate_comparison(problem)
            row[8] = repr(traj.t_star) if traj.blowup else ""
    except Exception as exc:  # recorded, never aborts the sweep
        row[9] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(spec: RunSpec, out_dir, jobs: int = 1) -> Path:
    """Evaluate the grid and persist one CSV row per point.

    Rows are written in deterministic axis1-major order; rows already
    present in an earlier partial output are reused instead of recomputed,
    and a parallel run produces the same bytes as a serial one.
    """
    if spec.sweep is None:
        raise ConfigError("config has no sweep block")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    sweep = spec.sweep
    header = [sweep.axis1.name, sweep.axis2.name] + _SWEEP_FIELDS

    existing: dict[tuple[str, str], list[str]] = {}
    if csv_path.exists():
        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            old_header = next(reader, None)
            if old_header == header:
                for row in reader:
                    existing[(row[0], row[1])] = row

    base = spec.to_dict()
    base.pop("sweep", None)
    tasks = []
    keys = []
    for v1 in _axis_values(sweep.axis1):
        for v2 in _axis_values(sweep.axis2):
            keys.append((repr(v1), repr(v2)))
            tasks.append((base, sweep.axis1.name, v1, sweep.axis2.name, v2, sweep.run_ode))

    todo = [t for t, k in zip(tasks, keys) if k not in existing]
    if todo:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                fresh = list(pool.map(_sweep_point, todo))
        else:
            fresh = [_sweep_point(t) for t in todo]
        for row in fresh:
            existing[(row[0], row[1])] = row

    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for key in keys:
            writer.writerow(existing[key])
    return csv_path


def emit_report(out_dir) -> str:
    """Summarize a finished sweep: admissible fraction, boundary, blow-up table.

    Writes summary.txt and boundary.csv next to sweep.csv and returns the
    summary text.  The boundary curve samples, for each value of the first
    axis, the largest second-axis value still admissible.
    """
    out = Path(out_dir)
    csv_path = out / "sweep.csv"
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    name1, name2 = header[0], header[1]
    verdict_idx = header.index("verdict")
    tstar_idx = header.index("t_star")

    total = len(rows)
    admissible = [r for r in rows if r[verdict_idx] == "admissible"]
    boundary: dict[str, float] = {}
    for r in admissible:
        v2 = float(r[1])
        if r[0] not in boundary or v2 > boundary[r[0]]:
            boundary[r[0]] = v2
    with open(out / "boundary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([name1, f"max_admissible_{name2}"])
        for key in sorted(boundary, key=float):
            writer.writerow([key, repr(boundary[key])])

    lines = [
        f"grid points: {total}",
        f"admissible: {len(admissible)} ({len(admissible) / total:.1%})" if total
        else "admissible: 0",
        f"boundary samples ({name1} -> max admissible {name2}): {len(boundary)}",
    ]
    blowups = [(r[0], r[1], r[tstar_idx]) for r in admissible if r[tstar_idx]]
    if blowups:
        lines.append("blow-up times:")
        for v1, v2, ts in blowups:
            lines.append(f"  {name1}={v1} {name2}={v2}: t_star={ts}")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    return text


def cmd_sweep(spec: RunSpec, out_dir, jobs: int) -> int:
    if out_dir is None:
        raise ConfigError("sweep requires --out")
    run_sweep(spec, out_dir, jobs=jobs)
    print(emit_report(out_dir), end="")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgflrw",
        description="Blow-up laboratory for semilinear Klein-Gordon fields on "
                    "FLRW backgrounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("regime", "classify the background and its horizon"),
        ("threshold", "hypothesis ledger and admissibility verdict"),
        ("ode", "integrate the extremal comparison ODE"),
        ("pde", "run the radial field solver"),
        ("scaling", "fit the cutoff growth integrals and decide the limits"),
        ("sweep", "two-axis parameter sweep with CSV persistence"),
        ("identity", "weak-solution identity residual on a solver run"),
    ):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="path to a JSON run spec")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--jobs", type=int, default=1, help="sweep worker count")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = parse_config(args.config)
        if args.command == "regime":
            return cmd_regime(spec, args.out)
        if args.command == "threshold":
            return cmd_threshold(spec, args.out)
        if args.command == "ode":
            return cmd_ode(spec, args.out)
        if args.command == "pde":
            cmd_pde(spec, args.out)
            return 0
        if args.command == "scaling":
            return cmd_scaling(spec, args.out)
        if args.command == "sweep":
            return cmd_sweep(spec, args.out, args.jobs)
        if args.command == "identity":
            return cmd_identity(spec, args.out)
        raise RuntimeError(f"unhandled command {args.command}")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
