"""Experiment runner CLI.

Subcommands: run, sweep, fit, locate-critical, gen-topology.  All outputs
are written atomically (temp file + rename) so a crash never leaves a
partial result file.  Exit codes: 0 success, 2 configuration error,
3 runtime error, 4 degenerate fit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from .analysis import (FitResult, ScalingPoint, coupling_to_temperature,
                       fit_alpha, fit_effective_temperature,
                       fit_inverse_n_model, fit_n0_model,
                       locate_critical_coupling)
from .config import ExperimentConfig, parse_config, with_axis_value
from .dynamics import equilibrate, run_protocol, save_shotset, target_all_zero
from .errors import (ConfigError, CqieError, DegenerateDataError,
                     InvalidArgumentError, NoTransitionError)
from .measurement import (average_magnetization, global_fidelity,
                          single_qubit_fidelity)
from .schedule import classical_flag
from .topology import average_connectivity, write_edge_list

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_DEGENERATE = 4

SCALING_COLUMNS = ("axis_value", "N", "F", "F_err", "f", "f_err",
                   "m", "m_std", "connectivity")


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def derive_point_seed(master_seed: int, axis: str, value: float) -> int:
    """Stable per-point seed: adding sweep points never perturbs others."""
    digest = hashlib.sha256(f"{master_seed}:{axis}:{value!r}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _summarize(cfg: ExperimentConfig):
    shots = run_protocol(cfg.topology, cfg.schedule, cfg.scales, cfg.bath,
                         cfg.shots, cfg.seed)
    target = target_all_zero(cfg.topology.n)
    glob = global_fidelity(shots, target)
    single = single_qubit_fidelity(shots, target)
    mag = average_magnetization(shots)
    summary = {
        "n_qubits": cfg.topology.n,
        "n_shots": cfg.shots,
        "seed": cfg.seed,
        "engine": "classical" if classical_flag(cfg.schedule, cfg.scales) else "pimc",
        "global_fidelity": glob.value,
        "global_fidelity_stderr": glob.stderr,
        "single_qubit_fidelity": single.value,
        "single_qubit_fidelity_stderr": single.stderr,
        "magnetization_mean": mag.mean,
        "magnetization_std": mag.std,
        "connectivity": average_connectivity(cfg.topology),
    }
    return shots, summary


def cmd_run(cfg: ExperimentConfig) -> int:
    shots, summary = _summarize(cfg)
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    # shotset CSV/JSON written via temp files as well
    fd, tmp_csv = tempfile.mkstemp(dir=out, prefix=".tmp-")
    os.close(fd)
    fd, tmp_json = tempfile.mkstemp(dir=out, prefix=".tmp-")
    os.close(fd)
    try:
        save_shotset(shots, tmp_csv, tmp_json)
        os.replace(tmp_csv, os.path.join(out, "shots.csv"))
        os.replace(tmp_json, os.path.join(out, "metadata.json"))
    except BaseException:
        for t in (tmp_csv, tmp_json):
            if os.path.exists(t):
                os.unlink(t)
        raise
    _atomic_write(os.path.join(out, "summary.json"),
                  json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _atomic_write(os.path.join(out, "config.json"), cfg.to_json())
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, axis: str, values) -> int:
    rows = []
    failures = {}
    for value in values:
        seed = derive_point_seed(cfg.seed, axis, value)
        try:
            point_cfg = with_axis_value(cfg, axis, value, seed)
            _, s = _summarize(point_cfg)
            rows.append((value, s["n_qubits"], s["global_fidelity"],
                         s["global_fidelity_stderr"], s["single_qubit_fidelity"],
                         s["single_qubit_fidelity_stderr"], s["magnetization_mean"],
                         s["magnetization_std"], s["connectivity"]))
        except CqieError as exc:
            failures[repr(value)] = str(exc)
            rows.append((value,) + (float("nan"),) * 8)
    lines = [",".join(SCALING_COLUMNS)]
    for row in rows:
        lines.append(",".join(f"{x:.10g}" if isinstance(x, float) else str(x)
                              for x in row))
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    _atomic_write(os.path.join(out, "scaling.csv"), "\n".join(lines) + "\n")
    if failures:
        _atomic_write(os.path.join(out, "sweep_errors.json"),
                      json.dumps(failures, sort_keys=True, indent=2) + "\n")
        print(f"{len(failures)} of {len(values)} sweep points failed",
              file=sys.stderr)
    if len(failures) == len(values):
        return EXIT_RUNTIME
    return EXIT_OK


def read_scaling_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SCALING_COLUMNS:
            raise InvalidArgumentError(f"bad scaling CSV header: {header}")
        rows = []
        for line in fh:
            if line.strip():
                rows.append([float(x) for x in line.strip().split(",")])
    return rows


def cmd_fit(csv_path: str, model: str, out_dir: str, delta_e: float | None,
            alpha: float | None, alpha_from: str | None) -> int:
    rows = [r for r in read_scaling_csv(csv_path) if not np.isnan(r[2])]
    if not rows:
        raise DegenerateDataError(f"no usable rows in {csv_path}")
    global_points = [ScalingPoint(int(r[1]), r[2], r[3]) for r in rows]
    single_points = [ScalingPoint(int(r[1]), r[4], r[5]) for r in rows]
    if alpha is None and alpha_from is not None:
        with open(alpha_from) as fh:
            alpha = json.load(fh)["params"]["alpha"]
    if model == "alpha":
        result = fit_alpha(global_points)
        curve = _curve(global_points, lambda n: (1 - result.params["alpha"]) ** n)
    elif model == "effective_temp":
        if delta_e is None:
            raise ConfigError("model=effective_temp requires --delta-e")
        result = fit_effective_temperature(global_points, delta_e)
        x = result.params["x"]
        curve = _curve(global_points, lambda n: (1 + np.exp(-x)) ** (-n))
    elif model == "inverse_n":
        result = fit_inverse_n_model(single_points)
        a = result.params["alpha_hat"]
        curve = _curve(single_points, lambda n: 1 - a / n)
    elif model == "n0":
        if alpha is None:
            raise ConfigError("model=n0 requires --alpha or --alpha-from")
        result = fit_n0_model(global_points, alpha)
        n0 = result.params["n0"]
        curve = _curve(global_points, lambda n: (1 - alpha) ** (n / n0))
    else:
        raise ConfigError(f"unknown fit model {model!r}")
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, f"fit_{model}.json"), result.to_json())
    _atomic_write(os.path.join(out_dir, f"fit_{model}_curve.csv"), curve)
    print(result.to_json(), end="")
    return EXIT_OK


def _curve(points, fn) -> str:
    lines = ["N,model_value"]
    for p in sorted(points, key=lambda q: q.n_qubits):
        lines.append(f"{p.n_qubits},{fn(p.n_qubits):.10g}")
    return "\n".join(lines) + "\n"


def cmd_locate_critical(cfg: ExperimentConfig, j_values, burn_in: int,
                        n_samples: int, thinning: int) -> int:
    if len(j_values) < 5:
        raise ConfigError("locate-critical needs at least 5 J values")
    from .schedule import HamiltonianParams

    half_b = cfg.scales.b_of_s(cfg.schedule.s_bar) / 2.0
    curve = []
    for j in j_values:
        seed = derive_point_seed(cfg.seed, "j_coupling", j)
        params = HamiltonianParams(bx=0.0, bz=0.0, jz=half_b * j)
        ss = equilibrate(cfg.topology, params, cfg.bath.temperature_mk,
                         burn_in=burn_in, n_samples=n_samples,
                         thinning=thinning, seed=seed)
        curve.append((j, ss.spins.mean(axis=1)))
    result = locate_critical_coupling(curve, n_spins=cfg.topology.n)
    os.makedirs(cfg.out_dir, exist_ok=True)
    lines = ["J,mean_abs_m,chi,binder"]
    for i, j in enumerate(result.j_values):
        lines.append(f"{j:.10g},{result.mean_abs_m[i]:.10g},"
                     f"{result.susceptibility[i]:.10g},{result.binder[i]:.10g}")
    _atomic_write(os.path.join(cfg.out_dir, "critical_scan.csv"),
                  "\n".join(lines) + "\n")
    payload = {
        "j_c": result.j_c,
        "uncertainty": result.uncertainty,
        "temperature_mk": coupling_to_temperature(result.j_c, 2.0 * half_b),
        "b_at_operating_s_ghz": 2.0 * half_b,
    }
    _atomic_write(os.path.join(cfg.out_dir, "critical_point.json"),
                  json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cqie", description="Cooperative register-reset simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", required=True, help="experiment JSON")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--shots", type=int, default=None, help="override shot count")

    p = sub.add_parser("run", help="run one protocol and write shot files")
    add_config_args(p)

    p = sub.add_parser("sweep", help="run a parameter sweep into a scaling CSV")
    add_config_args(p)
    p.add_argument("--axis", required=True,
                   choices=["n_qubits", "h_bar", "j_coupling", "s_bar"])
    p.add_argument("--values", required=True,
                   help="comma-separated axis values")

    p = sub.add_parser("fit", help="fit a scaling model to a scaling CSV")
    p.add_argument("--csv", required=True, help="scaling CSV from sweep")
    p.add_argument("--model", required=True,
                   choices=["alpha", "effective_temp", "inverse_n", "n0"])
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--delta-e", type=float, default=None,
                   help="level splitting in GHz (effective_temp)")
    p.add_argument("--alpha", type=float, default=None, help="alpha for n0 model")
    p.add_argument("--alpha-from", default=None,
                   help="read alpha from a prior fit JSON")

    p = sub.add_parser("locate-critical",
                       help="equilibrium J scan and critical-point estimate")
    add_config_args(p)
    p.add_argument("--values", required=True, help="comma-separated J values")
    p.add_argument("--burn-in", type=int, default=2000)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--thinning", type=int, default=4)

    p = sub.add_parser("gen-topology", help="write the configured topology")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="edge-list output file")
    return ap


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config)
    raw = json.loads(json.dumps(cfg.canonical))
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        raw["out_dir"] = args.out
    if getattr(args, "shots", None) is not None:
        raw["shots"] = args.shots
    from .config import config_from_dict
    return config_from_dict(raw)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_load_config(args))
        if args.command == "sweep":
            values = [float(v) for v in args.values.split(",")]
            return cmd_sweep(_load_config(args), args.axis, values)
        if args.command == "fit":
            return cmd_fit(args.csv, args.model, args.out, args.delta_e,
                           args.alpha, args.alpha_from)
        if args.command == "locate-critical":
            values = [float(v) for v in args.values.split(",")]
            return cmd_locate_critical(_load_config(args), values,
                                       args.burn_in, args.samples, args.thinning)
        if args.command == "gen-topology":
            cfg = parse_config(args.config)
            write_edge_list(cfg.topology, args.out)
            return EXIT_OK
        raise AssertionError(args.command)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateDataError, NoTransitionError) as exc:
        print(f"degenerate fit: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (CqieError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
