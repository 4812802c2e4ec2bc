"""Command-line driver: ``tdswanson run`` and ``tdswanson sweep``.

``run`` consumes a JSON configuration, integrates the requested mode, and
writes deterministic artifacts (CSV trajectories with 17 significant digits,
JSON reports with sorted keys, no timestamps) into the output directory.
``sweep`` varies one parameter over a range and writes a feasibility /
summary table.

Exit codes: 0 success, 1 verification-check failure, 2 configuration error,
3 numerical failure (halt or stepper breakdown; the last good time is
reported).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .exceptions import ConfigError, IntegrationError, ModelError
from .fock_su11 import dyson_map, metric_state
from .lr_solver import evolve_lr, psi_solution
from .metric_flow import integrate_metric
from .model import (
    CoefficientScenario,
    eval_coefficients,
    hamiltonian_matrix,
    scenario_from_json,
)
from .observables import rho_metric
from .oracle import dyson_residual, propagate_tdse, rho_norm_series
from .static_metric import solve_static

__all__ = ["RunConfig", "load_config", "run", "sweep", "main"]

_MODES = ("complex", "real", "static", "static-real")


@dataclass
class RunConfig:
    """Parsed and validated run configuration."""

    scenario: CoefficientScenario
    mode: str
    z_abs: float
    phi_cap0: float
    varphi0: float
    t_start: float
    t_stop: float
    points: int
    dim: int
    rtol: float
    atol: float
    method: str
    out_dir: Path
    verify: bool
    static_time: float
    fock_index: int
    # LR stage runs only when all three are provided
    r0: Optional[float] = None
    phi_s0: Optional[float] = None
    theta0: Optional[complex] = None
    raw: dict = field(default_factory=dict)

    @property
    def wants_lr(self) -> bool:
        return self.r0 is not None


def _req(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}: missing required field")
    return obj[key]


def _real(obj, path: str) -> float:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return float(obj)
    raise ConfigError(f"{path}: expected a real number, got {obj!r}")


def _int(obj, path: str) -> int:
    if isinstance(obj, int) and not isinstance(obj, bool):
        return obj
    raise ConfigError(f"{path}: expected an integer, got {obj!r}")


def load_config(path) -> RunConfig:
    """Read and validate a JSON run configuration file."""
    cfg_path = Path(path)
    try:
        raw = json.loads(cfg_path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {cfg_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{cfg_path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("$: config must be a JSON object")

    scen_obj = _req(raw, "scenario", "$")
    if isinstance(scen_obj, str):
        scen_path = (cfg_path.parent / scen_obj).resolve()
        try:
            scen_obj = json.loads(scen_path.read_text())
        except OSError as exc:
            raise ConfigError(f"$.scenario: cannot read {scen_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"$.scenario: invalid JSON in {scen_path}: {exc}") from exc
    scenario = scenario_from_json(scen_obj, "$.scenario")

    mode = _req(raw, "mode", "$")
    if mode not in _MODES:
        raise ConfigError(f"$.mode: expected one of {_MODES}, got {mode!r}")

    z_abs = _real(_req(raw, "z_abs", "$"), "$.z_abs")
    initial = raw.get("initial", {})
    if not isinstance(initial, dict):
        raise ConfigError("$.initial: expected an object")
    phi_cap0 = _real(initial.get("phi_cap", 0.0), "$.initial.phi_cap")
    varphi0 = _real(initial.get("varphi", 0.0), "$.initial.varphi")

    r0 = phi_s0 = theta0 = None
    if "r" in initial or "phi_s" in initial or "theta" in initial:
        r0 = _real(_req(initial, "r", "$.initial"), "$.initial.r")
        phi_s0 = _real(_req(initial, "phi_s", "$.initial"), "$.initial.phi_s")
        th = _req(initial, "theta", "$.initial")
        if isinstance(th, (int, float)):
            theta0 = complex(th)
        elif isinstance(th, list) and len(th) == 2:
            theta0 = complex(_real(th[0], "$.initial.theta[0]"),
                             _real(th[1], "$.initial.theta[1]"))
        else:
            raise ConfigError("$.initial.theta: expected number or [re, im]")

    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("$.grid: expected an object")
    t_start = _real(grid.get("t_start", 0.0), "$.grid.t_start")
    t_stop = _real(grid.get("t_stop", 1.0), "$.grid.t_stop")
    points = _int(grid.get("points", 201), "$.grid.points")
    if points < 2:
        raise ConfigError("$.grid.points: need at least 2")
    if not t_start < t_stop:
        raise ConfigError("$.grid: t_start must be below t_stop")

    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("$.tolerances: expected an object")

    return RunConfig(
        scenario=scenario,
        mode=mode,
        z_abs=z_abs,
        phi_cap0=phi_cap0,
        varphi0=varphi0,
        t_start=t_start,
        t_stop=t_stop,
        points=points,
        dim=_int(raw.get("dim", 40), "$.dim"),
        rtol=_real(tol.get("rtol", 1e-10), "$.tolerances.rtol"),
        atol=_real(tol.get("atol", 1e-10), "$.tolerances.atol"),
        method=str(raw.get("method", "RK45")),
        out_dir=Path(raw.get("out_dir", ".")),
        verify=bool(raw.get("verify", False)),
        static_time=_real(raw.get("static_time", 0.0), "$.static_time"),
        fock_index=_int(raw.get("fock_index", 0), "$.fock_index"),
        r0=r0,
        phi_s0=phi_s0,
        theta0=theta0,
        raw=raw,
    )


# ---------------------------------------------------------------------------
# artifact writers (deterministic: fixed formats, no timestamps)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: List[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _unwrapped_zetas(herms) -> np.ndarray:
    return np.unwrap(np.array([h.zeta for h in herms]))


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _run_flow(config: RunConfig, out: Path) -> int:
    traj = integrate_metric(config.scenario, config.z_abs, config.phi_cap0,
                            config.varphi0,
                            (config.t_start, config.t_stop, config.points),
                            mode=config.mode, rtol=config.rtol,
                            atol=config.atol, method=config.method)
    zetas = _unwrapped_zetas(traj.hermitized)
    rows = []
    for i, t in enumerate(traj.times):
        st = traj.states[i]
        hm = traj.hermitized[i]
        eps = st.epsilon if st.epsilon is not None else math.nan
        rows.append([t, st.phi_cap, st.varphi, eps, hm.W, hm.V.real, hm.V.imag,
                     hm.kappa, zetas[i], traj.res_reality[i], traj.res_TVstar[i]])
    _write_csv(out / "metric_trajectory.csv",
               ["t", "Phi", "varphi", "epsilon", "W", "Re_V", "Im_V",
                "kappa", "zeta", "res_reality", "res_TVstar"],
               rows)

    summary = {
        "mode": config.mode,
        "points": int(traj.times.size),
        "halted": None if traj.halted is None else {
            "reason": traj.halted.reason, "t_halt": traj.halted.t_halt},
        "max_res_reality": float(traj.res_reality.max()) if traj.times.size else None,
        "max_res_TVstar": float(traj.res_TVstar.max()) if traj.times.size else None,
        "max_res_imW": float(traj.res_imW.max()) if traj.times.size else None,
        "constraint_tension_points": int(traj.tension_flags.sum()),
    }

    lr = None
    if config.wants_lr and traj.halted is None:
        lr = evolve_lr(traj, config.r0, config.phi_s0, config.theta0)
        lr_rows = []
        for i, t in enumerate(lr.times):
            ls = lr.states[i]
            lr_rows.append([t, ls.r, ls.phi_s, ls.theta.real, ls.theta.imag,
                            ls.varpi, lr.Omega[i]])
        _write_csv(out / "lr_trajectory.csv",
                   ["t", "r", "phi_s", "Re_theta", "Im_theta", "varpi", "Omega"],
                   lr_rows)
        psi = psi_solution(config.fock_index, float(lr.times[-1]), lr, config.dim)
        _write_csv(out / "state_final.csv", ["n", "Re_c", "Im_c"],
                   [[k, psi[k].real, psi[k].imag] for k in range(config.dim)])
        summary["lr_points"] = int(lr.times.size)

    _write_json(out / "run_summary.json", summary)

    status = 0
    if config.verify:
        checks = _verification_checks(config, traj, lr)
        _write_json(out / "verification.json", {"checks": checks,
                                                "all_pass": all(c["pass"] for c in checks)})
        if not all(c["pass"] for c in checks):
            status = 1
    if traj.halted is not None:
        print(f"halted at t = {traj.halted.t_halt:.6g}: {traj.halted.reason}",
              file=sys.stderr)
        return 3
    return status


def _verification_checks(config: RunConfig, traj, lr) -> List[dict]:
    """Self-checks for a flow run; each entry is name/value/threshold/pass."""
    checks = []

    def add(name: str, value: float, threshold: float):
        checks.append({"name": name, "value": float(value),
                       "threshold": float(threshold),
                       "pass": bool(value <= threshold)})

    add("transformed_frequency_imaginary_part", traj.res_imW.max(), 1e-8)
    add("transformed_TV_conjugacy", traj.res_TVstar.max(), 1e-8)

    t_mid = 0.5 * (traj.times[0] + traj.times[-1])
    dim = config.dim

    def eta_fn(t):
        return dyson_map(traj.state_at(t), dim)

    def h_fn(t):
        from .metric_flow import hermitized_W_V
        from .fock_su11 import annihilation_operator
        state = traj.state_at(t)
        _, _, _, polar = eval_coefficients(config.scenario, t)
        herm = hermitized_W_V(state, polar,
                              mode="real" if config.mode == "real" else "complex")
        a = annihilation_operator(dim)
        a2 = a @ a
        return (herm.W * np.diag(np.arange(dim) + 0.5)
                + herm.V * a2 + herm.T * a2.conj().T)

    def bigH_fn(t):
        return hamiltonian_matrix(config.scenario, t, dim)

    add("dyson_defining_relation_midpoint",
        dyson_residual(eta_fn, bigH_fn, h_fn, t_mid), 1e-6)

    if lr is not None:
        psis = [psi_solution(config.fock_index, float(t), lr, dim)
                for t in lr.times]
        rhos = [rho_metric(ms, dim) for ms in lr.metric_states]
        norms = rho_norm_series(psis, rhos)
        drift = float(np.max(np.abs(norms - norms[0])) / max(1.0, abs(norms[0])))
        add("metric_norm_drift_lr_solution", drift, 1e-7)
    return checks


def _run_static(config: RunConfig, out: Path) -> int:
    _, _, _, polar = eval_coefficients(config.scenario, config.static_time)
    solution = solve_static(config.z_abs, polar)

    roots_payload = []
    for rec in solution.roots:
        diag = rec.diagnostics
        roots_payload.append({
            "phi_cap": rec.phi_cap,
            "lambda_zero": rec.lambda_zero,
            "angles": list(rec.angles),
            "angle_status": diag.status,
            "angle_candidates_alpha": list(diag.candidates_alpha),
            "angle_candidates_beta": list(diag.candidates_beta),
            "angle_residuals": {
                _fmt(v): list(res) for v, res in diag.residuals.items()},
            "epsilon": rec.epsilon,
            "epsilon_reason": rec.epsilon_reason,
        })
    band = solution.band
    band_payload = None
    if band is not None:
        band_payload = {
            "z_minus": band.z_minus, "z_plus": band.z_plus,
            "empty": band.empty, "advisory": list(band.advisory),
            "contains_z": band.contains(config.z_abs),
        }
    payload = {
        "mode": config.mode,
        "z_abs": config.z_abs,
        "static_time": config.static_time,
        "coefficients_polar": {
            "omega_abs": polar.omega_abs, "varphi_omega": polar.varphi_omega,
            "alpha_abs": polar.alpha_abs, "varphi_alpha": polar.varphi_alpha,
            "beta_abs": polar.beta_abs, "varphi_beta": polar.varphi_beta,
        },
        "cubic_roots": roots_payload,
        "forbidden_band": band_payload,
        "epsilon_real": solution.epsilon_real,
        "epsilon_real_reason": solution.epsilon_real_reason,
    }
    if config.mode == "static-real":
        if solution.epsilon_real is None and band is not None and band.contains(config.z_abs):
            payload["message"] = (
                f"no real strength at z_abs = {config.z_abs:.6g}: inside the "
                f"forbidden band [{band.z_minus:.6g}, {band.z_plus:.6g}]"
            )
        elif solution.epsilon_real is not None:
            from .static_metric import static_hVT
            om, al, be, _ = eval_coefficients(config.scenario, config.static_time)
            w, v, t = static_hVT(config.z_abs, solution.epsilon_real, (om, al, be))
            payload["static_transformed"] = {
                "W": [w.real, w.imag], "V": [v.real, v.imag], "T": [t.real, t.imag]}
    _write_json(out / "static_report.json", payload)
    return 0


def run(config: RunConfig) -> int:
    """Execute one configuration; returns the process exit status."""
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if config.mode in ("static", "static-real"):
        return _run_static(config, out)
    return _run_flow(config, out)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_PARAMS = ("z_abs", "phi_cap0", "omega_scale", "alpha_scale", "beta_scale")


def _sweep_point(config: RunConfig, param: str, value: float) -> dict:
    scen = config.scenario
    z_abs = config.z_abs
    phi0 = config.phi_cap0
    if param == "z_abs":
        z_abs = value
    elif param == "phi_cap0":
        phi0 = value
    elif param == "omega_scale":
        scen = CoefficientScenario(scen.omega.scaled(value), scen.alpha, scen.beta)
    elif param == "alpha_scale":
        scen = CoefficientScenario(scen.omega, scen.alpha.scaled(value), scen.beta)
    elif param == "beta_scale":
        scen = CoefficientScenario(scen.omega, scen.alpha, scen.beta.scaled(value))

    row = {"value": value}
    try:
        _, _, _, polar = eval_coefficients(scen, config.static_time)
        if config.mode in ("static", "static-real"):
            solution = solve_static(z_abs, polar)
            band = solution.band
            row.update({
                "feasible": solution.epsilon_real is not None,
                "epsilon": solution.epsilon_real,
                "in_band": bool(band is not None and band.contains(z_abs)),
                "z_minus": None if band is None or band.empty else band.z_minus,
                "z_plus": None if band is None or band.empty else band.z_plus,
                "n_roots": len(solution.roots),
                "n_angles": sum(len(r.angles) for r in solution.roots),
            })
        else:
            state = metric_state(z_abs, phi0, config.varphi0)
            row.update({
                "feasible": state.feasible,
                "epsilon": state.epsilon,
                "lambda_zero": state.lambda_zero,
                "chi": state.chi,
            })
        row["error"] = None
    except ModelError as exc:
        row["feasible"] = False
        row["error"] = str(exc)
    return row


def sweep(config: RunConfig, param: str, values: np.ndarray,
          workers: int = 4) -> List[dict]:
    """Evaluate a one-parameter family of configurations.

    Points are processed in a small thread pool; the returned list preserves
    the input order, so output artifacts are deterministic.
    """
    if param not in _SWEEP_PARAMS:
        raise ConfigError(
            f"sweep parameter must be one of {_SWEEP_PARAMS}, got {param!r}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(lambda v: _sweep_point(config, param, float(v)),
                             values))
    return rows


def _sweep_csv(out: Path, param: str, rows: List[dict]) -> None:
    keys = ["value"] + sorted(k for k in rows[0] if k not in ("value", "error"))
    lines = [",".join([param] + keys[1:] + ["error"])]
    for row in rows:
        cells = []
        for k in keys:
            val = row.get(k)
            if val is None:
                cells.append("")
            elif isinstance(val, bool):
                cells.append(str(int(val)))
            elif isinstance(val, (int, float)):
                cells.append(_fmt(val))
            else:
                cells.append(str(val))
        err = row.get("error")
        cells.append("" if err is None else str(err).replace(",", ";"))
        lines.append(",".join(cells))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parse_range(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError("--range expects start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--range: {exc}") from exc
    if count < 1:
        raise ConfigError("--range: count must be >= 1")
    return np.linspace(start, stop, count)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tdswanson",
        description="Metric flows, invariant solutions, and static metrics "
                    "for the driven Swanson-type quadratic model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configuration")
    p_run.add_argument("config", help="JSON configuration file")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--verify", action="store_true",
                       help="run verification checks (overrides config)")
    p_run.add_argument("--quiet", action="store_true")

    p_sweep = sub.add_parser("sweep", help="one-parameter sweep")
    p_sweep.add_argument("config", help="JSON configuration file")
    p_sweep.add_argument("--param", required=True,
                         help=f"one of {_SWEEP_PARAMS}")
    p_sweep.add_argument("--range", required=True, dest="value_range",
                         help="start:stop:count")
    p_sweep.add_argument("--out", help="output directory (overrides config)")
    p_sweep.add_argument("--workers", type=int, default=4)

    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.out:
            config.out_dir = Path(args.out)
        if args.command == "run":
            if args.verify:
                config.verify = True
            status = run(config)
            if not args.quiet:
                print(f"artifacts written to {config.out_dir}")
            return status
        values = _parse_range(args.value_range)
        config.out_dir.mkdir(parents=True, exist_ok=True)
        rows = sweep(config, args.param, values, workers=args.workers)
        _sweep_csv(config.out_dir, args.param, rows)
        print(f"sweep table written to {config.out_dir / 'sweep.csv'}")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"numerical failure: {exc} (last good t = {exc.t_last})",
              file=sys.stderr)
        return 3
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
