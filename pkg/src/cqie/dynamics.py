"""Thermal evolution of spin networks through a protocol.

Two engines share one energy convention (see cqie.schedule): single
spin-flip Metropolis for transverse-field-free protocols, and
path-integral (Suzuki-Trotter) Monte Carlo when a transverse field is
present.  A dense Gibbs-state oracle validates both on small systems.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import EngineMismatchError, InvalidArgumentError, SizeLimitError
from .schedule import (EnergyScales, HamiltonianParams, ProtocolSchedule,
                       classical_flag, instantaneous_params)
from .topology import Topology
from .units import beta_from_mk

BX_TOL = 1e-12


@dataclass(frozen=True)
class BathParameters:
    """Environment temperature plus the Monte Carlo time calibration."""

    temperature_mk: float
    sweeps_per_microsecond: float = 100.0
    trotter_slices: int = 32

    def __post_init__(self):
        if self.temperature_mk <= 0:
            raise InvalidArgumentError("temperature must be positive")
        if self.sweeps_per_microsecond <= 0:
            raise InvalidArgumentError("sweeps_per_microsecond must be positive")
        if self.trotter_slices < 2 or self.trotter_slices % 2 != 0:
            raise InvalidArgumentError("trotter_slices must be even and >= 2")

    @property
    def beta(self) -> float:
        """Inverse temperature in 1/GHz."""
        return beta_from_mk(self.temperature_mk)


@dataclass(frozen=True)
class ShotMetadata:
    topology_fingerprint: str
    schedule_fingerprint: str
    bath: BathParameters
    master_seed: int
    n_shots: int


@dataclass(frozen=True)
class ShotSet:
    """Final measured configurations of repeated protocol runs."""

    spins: np.ndarray  # (n_shots, n) int8, values +-1
    metadata: ShotMetadata

    def __post_init__(self):
        if self.spins.ndim != 2 or self.spins.shape[0] != self.metadata.n_shots:
            raise InvalidArgumentError("shot array inconsistent with metadata")
        if not np.all(np.abs(self.spins) == 1):
            raise InvalidArgumentError("shot array must contain only +-1")

    @property
    def n_shots(self) -> int:
        return self.spins.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.spins.shape[1]


def target_all_zero(n: int) -> np.ndarray:
    """The all-|0> register target; |0> maps to sigma_z = -1."""
    return np.full(n, -1, dtype=np.int8)


def shot_seed(master_seed: int, shot_index: int) -> int:
    """Counter-based per-shot seed so shot-level parallelism cannot
    change results."""
    ss = np.random.SeedSequence((master_seed, shot_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def random_initial_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Each spin independently +-1 with probability 1/2."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)


def _check_spins(config: np.ndarray, topo: Topology) -> np.ndarray:
    config = np.ascontiguousarray(config, dtype=np.int8)
    if config.shape[-1] != topo.n or not np.all(np.abs(config) == 1):
        raise InvalidArgumentError("configuration does not match topology")
    return config


def classical_sweep(config: np.ndarray, topo: Topology,
                    params: HamiltonianParams, temperature_mk: float,
                    rng: np.random.Generator) -> np.ndarray:
    """One Metropolis sweep (N proposed flips at random sites), in place."""
    if abs(params.bx) > BX_TOL:
        raise EngineMismatchError(
            f"classical engine cannot handle bx={params.bx}")
    config = _check_spins(config, topo)
    indptr, indices, weights = topo._csr
    seed = np.uint64(rng.integers(0, 2**63, dtype=np.uint64))
    _kernels.classical_evolve(config, indptr, indices, weights,
                              np.array([params.bz]), np.array([params.jz]),
                              beta_from_mk(temperature_mk), seed)
    return config


def pimc_sweep(config: np.ndarray, topo: Topology, params: HamiltonianParams,
               temperature_mk: float, rng: np.random.Generator) -> np.ndarray:
    """One path-integral sweep over all N*P sites, in place.

    config has shape (P, N).  With bx = 0 the slices decouple and each is
    updated by classical dynamics at the full inverse temperature.
    """
    if params.bx < 0:
        raise EngineMismatchError(f"bx must be >= 0, got {params.bx}")
    config = _check_spins(config, topo)
    if config.ndim != 2:
        raise InvalidArgumentError("PIMC configuration must be (P, N)")
    indptr, indices, weights = topo._csr
    seed = np.uint64(rng.integers(0, 2**63, dtype=np.uint64))
    _kernels.pimc_evolve(config, indptr, indices, weights,
                         np.array([params.bx]), np.array([params.bz]),
                         np.array([params.jz]),
                         beta_from_mk(temperature_mk), seed, BX_TOL)
    return config


def schedule_step_params(sched: ProtocolSchedule, scales: EnergyScales,
                         sweeps_per_microsecond: float):
    """Per-sweep Hamiltonian coefficient arrays for the whole protocol.

    Sweep k runs at the parameters of its step start time k*dt, so the
    final sweep of a quench protocol still sees the full field.
    """
    dt = 1.0 / sweeps_per_microsecond
    n_steps = max(1, int(np.ceil(sched.duration / dt - 1e-9)))
    times = np.arange(n_steps) * dt
    p = [instantaneous_params(sched, scales, t) for t in times]
    bx = np.array([q.bx for q in p])
    bz = np.array([q.bz for q in p])
    jz = np.array([q.jz for q in p])
    return bx, bz, jz


def effective_trotter_slices(bath: BathParameters, bx_max: float) -> int:
    """Spec'd slice count, doubled while beta*bx/P > 1 to keep the
    Trotter error controlled."""
    p = bath.trotter_slices
    while bx_max > 0 and bath.beta * bx_max / p > 1.0:
        p *= 2
    return p


def _worker_count() -> int:
    env = os.environ.get("CQIE_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def run_protocol(topo: Topology, sched: ProtocolSchedule, scales: EnergyScales,
                 bath: BathParameters, shots: int, master_seed: int) -> ShotSet:
    """Repeat the protocol `shots` times from fresh random states.

    Engine selection: classical Metropolis when the transverse field is
    identically zero over the protocol, PIMC otherwise (readout from
    slice 0).  Shots are independent, seeded from (master_seed, index).
    """
    if shots < 1:
        raise InvalidArgumentError(f"shots must be >= 1, got {shots}")
    bx_t, bz_t, jz_t = schedule_step_params(
        sched, scales, bath.sweeps_per_microsecond)
    beta = bath.beta
    indptr, indices, weights = topo._csr
    classical = classical_flag(sched, scales)
    if classical and np.any(bx_t > BX_TOL):
        raise EngineMismatchError("classical schedule produced nonzero bx")
    n_slices = effective_trotter_slices(bath, float(bx_t.max()))
    out = np.empty((shots, topo.n), dtype=np.int8)

    def run_range(lo: int, hi: int) -> None:
        for idx in range(lo, hi):
            seed = np.uint64(shot_seed(master_seed, idx))
            if classical:
                out[idx] = _kernels.classical_shot(
                    topo.n, indptr, indices, weights, bz_t, jz_t, beta, seed)
            else:
                out[idx] = _kernels.pimc_shot(
                    topo.n, n_slices, indptr, indices, weights,
                    bx_t, bz_t, jz_t, beta, seed, BX_TOL)

    workers = _worker_count()
    if workers == 1:
        run_range(0, shots)
    else:
        chunk = (shots + workers - 1) // workers
        bounds = [(lo, min(lo + chunk, shots)) for lo in range(0, shots, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: run_range(*b), bounds))
    meta = ShotMetadata(
        topology_fingerprint=topo.fingerprint(),
        schedule_fingerprint=sched.fingerprint(),
        bath=bath, master_seed=master_seed, n_shots=shots)
    return ShotSet(spins=out, metadata=meta)


def equilibrate(topo: Topology, params: HamiltonianParams, temperature_mk: float,
                burn_in: int, n_samples: int, thinning: int, seed: int,
                trotter_slices: int = 32) -> ShotSet:
    """Stationary samples of the fixed-parameter Gibbs distribution.

    Classical engine when bx = 0, PIMC (slice-0 readout) otherwise.
    """
    if burn_in < 1 or thinning < 1 or n_samples < 1:
        raise InvalidArgumentError("burn_in, thinning, n_samples must be >= 1")
    indptr, indices, weights = topo._csr
    beta = beta_from_mk(temperature_mk)
    seed64 = np.uint64(shot_seed(seed, 0))
    init = _kernels.random_spins(topo.n, np.uint64(shot_seed(seed, 1)))
    if abs(params.bx) <= BX_TOL:
        samples = _kernels.classical_sample(
            init, indptr, indices, weights, params.bz, params.jz, beta,
            burn_in, n_samples, thinning, seed64)
    else:
        slices = np.tile(init, (trotter_slices, 1))
        samples, _ = _kernels.pimc_sample(
            slices, indptr, indices, weights, params.bx, params.bz, params.jz,
            beta, burn_in, n_samples, thinning, seed64)
    bath = BathParameters(temperature_mk=temperature_mk,
                          trotter_slices=trotter_slices)
    meta = ShotMetadata(
        topology_fingerprint=topo.fingerprint(),
        schedule_fingerprint=f"equilibrate:bx={params.bx},bz={params.bz},jz={params.jz}",
        bath=bath, master_seed=seed, n_shots=n_samples)
    return ShotSet(spins=samples, metadata=meta)


def equilibrate_pimc_x(topo: Topology, params: HamiltonianParams,
                       temperature_mk: float, burn_in: int, n_samples: int,
                       thinning: int, seed: int,
                       trotter_slices: int = 32):
    """Like equilibrate with bx > 0, but also returns the transverse
    magnetization estimator per sample."""
    if params.bx <= BX_TOL:
        raise EngineMismatchError("transverse estimator needs bx > 0")
    indptr, indices, weights = topo._csr
    beta = beta_from_mk(temperature_mk)
    init = _kernels.random_spins(topo.n, np.uint64(shot_seed(seed, 1)))
    slices = np.tile(init, (trotter_slices, 1))
    samples, x_est = _kernels.pimc_sample(
        slices, indptr, indices, weights, params.bx, params.bz, params.jz,
        beta, burn_in, n_samples, thinning, np.uint64(shot_seed(seed, 0)))
    return samples, x_est


ORACLE_MAX_QUBITS = 14


@dataclass(frozen=True)
class OracleResult:
    mean_magnetization: float
    per_site_sz: np.ndarray
    state_probs: np.ndarray  # indexed by bitmask, bit i set <=> sigma_i = +1


def state_index(config: np.ndarray) -> int:
    """Bitmask of a configuration: bit i set iff sigma_i = +1."""
    bits = (np.asarray(config) > 0).astype(np.int64)
    return int(np.sum(bits << np.arange(bits.shape[0])))


def exact_thermal_oracle(topo: Topology, params: HamiltonianParams,
                         temperature_mk: float) -> OracleResult:
    """Dense Gibbs state of the full Hamiltonian (n <= 14)."""
    n = topo.n
    if n > ORACLE_MAX_QUBITS:
        raise SizeLimitError(f"oracle limited to {ORACLE_MAX_QUBITS} qubits, got {n}")
    beta = beta_from_mk(temperature_mk)
    dim = 1 << n
    states = np.arange(dim)
    sigma = 2.0 * ((states[:, None] >> np.arange(n)[None, :]) & 1) - 1.0
    diag = params.bz * sigma.sum(axis=1)
    for i, j, w in topo.edges:
        diag -= params.jz * w * sigma[:, i] * sigma[:, j]
    h = np.diag(diag)
    if abs(params.bx) > 0:
        for i in range(n):
            flipped = states ^ (1 << i)
            h[states, flipped] -= params.bx
    evals, evecs = np.linalg.eigh(h)
    log_w = -beta * (evals - evals.min())
    w = np.exp(log_w)
    w /= w.sum()
    probs = (evecs**2) @ w
    per_site = probs @ sigma
    return OracleResult(
        mean_magnetization=float(per_site.mean()),
        per_site_sz=per_site, state_probs=probs)


def spins_to_bitstring(config: np.ndarray) -> str:
    """'0' for the |0> state (sigma = -1), '1' otherwise."""
    return "".join("1" if s > 0 else "0" for s in config)


def bitstring_to_spins(bits: str) -> np.ndarray:
    return np.array([1 if b == "1" else -1 for b in bits], dtype=np.int8)


def save_shotset(shots: ShotSet, csv_path, json_path) -> None:
    """Portable persistence: a shots CSV plus a metadata JSON."""
    with open(csv_path, "w") as fh:
        fh.write("shot_index,spins\n")
        for idx in range(shots.n_shots):
            fh.write(f"{idx},{spins_to_bitstring(shots.spins[idx])}\n")
    meta = shots.metadata
    with open(json_path, "w") as fh:
        json.dump({
            "topology_fingerprint": meta.topology_fingerprint,
            "schedule_fingerprint": meta.schedule_fingerprint,
            "bath": {
                "temperature_mk": meta.bath.temperature_mk,
                "sweeps_per_microsecond": meta.bath.sweeps_per_microsecond,
                "trotter_slices": meta.bath.trotter_slices,
            },
            "master_seed": meta.master_seed,
            "n_shots": meta.n_shots,
        }, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_shotset(csv_path, json_path) -> ShotSet:
    with open(json_path) as fh:
        d = json.load(fh)
    meta = ShotMetadata(
        topology_fingerprint=d["topology_fingerprint"],
        schedule_fingerprint=d["schedule_fingerprint"],
        bath=BathParameters(**d["bath"]),
        master_seed=d["master_seed"], n_shots=d["n_shots"])
    rows = []
    with open(csv_path) as fh:
        header = fh.readline().strip()
        if header != "shot_index,spins":
            raise InvalidArgumentError(f"bad shots CSV header: {header!r}")
        for line in fh:
            _, bits = line.strip().split(",")
            rows.append(bitstring_to_spins(bits))
    return ShotSet(spins=np.array(rows, dtype=np.int8), metadata=meta)
