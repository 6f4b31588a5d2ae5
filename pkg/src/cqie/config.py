"""Experiment configuration: strict JSON parsing and canonical emission.

Unknown keys are hard errors; every numeric domain is checked at parse
time so a typo fails before any computation starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import topology as topo_mod
from .dynamics import BathParameters
from .errors import ConfigError
from .schedule import (EnergyScales, ProtocolSchedule, linear_energy_scales,
                       load_energy_scales_csv, make_original_protocol,
                       make_quench_protocol)
from .topology import Topology

_TOPOLOGY_KEYS = {
    "individual": {"n"},
    "square_lattice": {"L", "periodic"},
    "pegasus": {"m", "trimmed"},
    "pegasus_patch": {"m", "trimmed", "target_n", "seed"},
    "random_regular": {"n", "degree", "seed"},
    "file": {"path"},
}


def _require_keys(d: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)} in {where}")


@dataclass(frozen=True)
class ExperimentConfig:
    topology: Topology
    schedule: ProtocolSchedule
    scales: EnergyScales
    bath: BathParameters
    shots: int
    seed: int
    out_dir: str
    canonical: dict  # normalized keys with defaults filled in

    def to_json(self) -> str:
        return json.dumps(self.canonical, sort_keys=True, indent=2) + "\n"


def build_topology(spec: dict) -> Topology:
    _require_keys(spec, {"kind"} | set().union(*_TOPOLOGY_KEYS.values()),
                  {"kind"}, "topology")
    kind = spec["kind"]
    if kind not in _TOPOLOGY_KEYS:
        raise ConfigError(f"unknown topology kind {kind!r}")
    _require_keys(spec, {"kind"} | _TOPOLOGY_KEYS[kind], {"kind"}, "topology")
    if kind == "individual":
        return topo_mod.build_individual(int(spec["n"]))
    if kind == "square_lattice":
        return topo_mod.build_square_lattice(
            int(spec["L"]), bool(spec.get("periodic", False)))
    if kind == "pegasus":
        return topo_mod.build_pegasus(int(spec["m"]), bool(spec.get("trimmed", True)))
    if kind == "pegasus_patch":
        parent = topo_mod.build_pegasus(
            int(spec.get("m", 16)), bool(spec.get("trimmed", True)))
        return topo_mod.sample_patch(
            parent, int(spec["target_n"]), int(spec.get("seed", 0)))
    if kind == "random_regular":
        return topo_mod.build_random_regular(
            int(spec["n"]), int(spec["degree"]), int(spec.get("seed", 0)))
    return topo_mod.read_edge_list(spec["path"])


def build_schedule(spec: dict) -> ProtocolSchedule:
    _require_keys(spec, {"variant", "s_bar", "h_bar", "j"},
                  {"variant", "s_bar", "h_bar", "j"}, "schedule")
    s_bar = float(spec["s_bar"])
    h_bar = float(spec["h_bar"])
    j = float(spec["j"])
    if not 0.0 < s_bar <= 1.0:
        raise ConfigError(f"s_bar must be in (0, 1], got {s_bar}")
    if h_bar < 0:
        raise ConfigError(f"h_bar must be >= 0, got {h_bar}")
    if spec["variant"] == "original":
        return make_original_protocol(s_bar, h_bar, j)
    if spec["variant"] == "quench":
        return make_quench_protocol(s_bar, h_bar, j)
    raise ConfigError(f"unknown schedule variant {spec['variant']!r}")


def build_scales(spec: dict) -> EnergyScales:
    _require_keys(spec, {"type", "a_max", "b_max", "path"}, {"type"}, "scales")
    if spec["type"] == "linear":
        _require_keys(spec, {"type", "a_max", "b_max"}, set(), "scales")
        a_max = float(spec.get("a_max", 6.0))
        b_max = float(spec.get("b_max", 12.0))
        if a_max < 0 or b_max <= 0:
            raise ConfigError(f"bad energy scales a_max={a_max}, b_max={b_max}")
        return linear_energy_scales(a_max, b_max)
    if spec["type"] == "csv":
        _require_keys(spec, {"type", "path"}, {"path"}, "scales")
        return load_energy_scales_csv(spec["path"])
    raise ConfigError(f"unknown scales type {spec['type']!r}")


def build_bath(spec: dict) -> BathParameters:
    _require_keys(spec, {"temperature_mk", "sweeps_per_us", "trotter_slices"},
                  {"temperature_mk"}, "bath")
    t = float(spec["temperature_mk"])
    spu = float(spec.get("sweeps_per_us", 100.0))
    ts = int(spec.get("trotter_slices", 32))
    if t <= 0:
        raise ConfigError(f"temperature_mk must be positive, got {t}")
    if spu <= 0:
        raise ConfigError(f"sweeps_per_us must be positive, got {spu}")
    if ts < 2 or ts % 2:
        raise ConfigError(f"trotter_slices must be even and >= 2, got {ts}")
    return BathParameters(temperature_mk=t, sweeps_per_microsecond=spu,
                          trotter_slices=ts)


def config_from_dict(raw: dict) -> ExperimentConfig:
    _require_keys(raw, {"topology", "schedule", "scales", "bath", "shots",
                        "seed", "out_dir"},
                  {"topology", "schedule", "bath", "shots", "seed", "out_dir"},
                  "config")
    for section in ("topology", "schedule", "bath"):
        if not isinstance(raw[section], dict):
            raise ConfigError(f"{section} must be an object")
    scales_spec = raw.get("scales", {"type": "linear", "a_max": 6.0, "b_max": 12.0})
    topology = build_topology(raw["topology"])
    schedule = build_schedule(raw["schedule"])
    scales = build_scales(scales_spec)
    bath = build_bath(raw["bath"])
    shots = int(raw["shots"])
    if shots < 1:
        raise ConfigError(f"shots must be >= 1, got {shots}")
    seed = int(raw["seed"])
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    canonical = {
        "topology": dict(raw["topology"]),
        "schedule": {"variant": raw["schedule"]["variant"],
                     "s_bar": float(raw["schedule"]["s_bar"]),
                     "h_bar": float(raw["schedule"]["h_bar"]),
                     "j": float(raw["schedule"]["j"])},
        "scales": dict(scales_spec),
        "bath": {"temperature_mk": bath.temperature_mk,
                 "sweeps_per_us": bath.sweeps_per_microsecond,
                 "trotter_slices": bath.trotter_slices},
        "shots": shots,
        "seed": seed,
        "out_dir": str(raw["out_dir"]),
    }
    if scales_spec["type"] == "linear":
        canonical["scales"].setdefault("a_max", 6.0)
        canonical["scales"].setdefault("b_max", 12.0)
    return ExperimentConfig(topology=topology, schedule=schedule, scales=scales,
                            bath=bath, shots=shots, seed=seed,
                            out_dir=str(raw["out_dir"]), canonical=canonical)


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    return config_from_dict(raw)


def with_axis_value(cfg: ExperimentConfig, axis: str, value: float,
                    seed: int) -> ExperimentConfig:
    """New config with one sweep axis changed and a derived seed."""
    raw = json.loads(json.dumps(cfg.canonical))
    if axis == "n_qubits":
        n = int(value)
        kind = raw["topology"]["kind"]
        if kind == "individual":
            raw["topology"]["n"] = n
        elif kind == "square_lattice":
            side = math.isqrt(n)
            if side * side != n:
                raise ConfigError(f"n_qubits={n} is not a square lattice size")
            raw["topology"]["L"] = side
        elif kind == "pegasus_patch":
            raw["topology"]["target_n"] = n
        elif kind == "random_regular":
            raw["topology"]["n"] = n
        else:
            raise ConfigError(f"cannot sweep n_qubits for topology kind {kind!r}")
    elif axis in ("h_bar", "s_bar"):
        raw["schedule"][axis] = float(value)
    elif axis == "j_coupling":
        raw["schedule"]["j"] = float(value)
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    raw["seed"] = seed
    return config_from_dict(raw)
