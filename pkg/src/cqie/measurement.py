"""Fidelity and magnetization statistics from shot sets.

Error bars are binomial (Wald) by default; a Wilson interval is available
for counts near 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ShotSet
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    stderr: float
    n_qubits: int
    n_shots: int


@dataclass(frozen=True)
class MagnetizationEstimate:
    mean: float
    std: float


def _check(shots: ShotSet, target: np.ndarray) -> np.ndarray:
    if shots.n_shots == 0:
        raise InvalidArgumentError("empty shot set")
    target = np.asarray(target, dtype=np.int8)
    if target.shape != (shots.n_qubits,):
        raise InvalidArgumentError(
            f"target length {target.shape} does not match {shots.n_qubits} qubits")
    return target


def _binomial_stderr(p: float, trials: int) -> float:
    return float(np.sqrt(p * (1.0 - p) / trials))


def global_fidelity(shots: ShotSet, target: np.ndarray) -> FidelityEstimate:
    """Fraction of shots in which every qubit reads the target state."""
    target = _check(shots, target)
    hits = np.all(shots.spins == target[None, :], axis=1)
    p = float(hits.mean())
    return FidelityEstimate(value=p, stderr=_binomial_stderr(p, shots.n_shots),
                            n_qubits=shots.n_qubits, n_shots=shots.n_shots)


def single_qubit_fidelity(shots: ShotSet, target: np.ndarray) -> FidelityEstimate:
    """Match frequency pooled over all (shot, qubit) readings.

    The binomial stderr treats the pooled readings as independent trials,
    ignoring inter-qubit correlation.
    """
    target = _check(shots, target)
    p = float((shots.spins == target[None, :]).mean())
    trials = shots.n_shots * shots.n_qubits
    return FidelityEstimate(value=p, stderr=_binomial_stderr(p, trials),
                            n_qubits=shots.n_qubits, n_shots=shots.n_shots)


def wilson_interval(p: float, trials: int, z: float = 2.0) -> tuple[float, float]:
    """Wilson score interval, better behaved than Wald near p in {0, 1}."""
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def average_magnetization(shots: ShotSet) -> MagnetizationEstimate:
    """Mean and standard deviation over shots of the per-shot
    normalized magnetization sum_i sigma_i / N."""
    if shots.n_shots == 0:
        raise InvalidArgumentError("empty shot set")
    m = shots.spins.mean(axis=1)
    return MagnetizationEstimate(mean=float(m.mean()), std=float(m.std()))


def magnetization_toward(shots: ShotSet, target: np.ndarray) -> MagnetizationEstimate:
    """Magnetization projected onto the target orientation (1 means every
    qubit reads the target state)."""
    target = _check(shots, target)
    m = (shots.spins * target[None, :]).mean(axis=1)
    return MagnetizationEstimate(mean=float(m.mean()), std=float(m.std()))


def per_qubit_zero_frequency(shots: ShotSet, target: np.ndarray) -> np.ndarray:
    """Per-qubit match frequency; min over qubits bounds global fidelity."""
    target = _check(shots, target)
    return (shots.spins == target[None, :]).mean(axis=0)
