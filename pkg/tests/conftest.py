import numpy as np

from cqie.dynamics import BathParameters, ShotMetadata, ShotSet


def make_shotset(spins, temperature_mk=48.0, seed=0) -> ShotSet:
    """Wrap a raw (n_shots, n) +-1 array in a ShotSet for measurement tests."""
    spins = np.asarray(spins, dtype=np.int8)
    meta = ShotMetadata(
        topology_fingerprint="test", schedule_fingerprint="test",
        bath=BathParameters(temperature_mk=temperature_mk),
        master_seed=seed, n_shots=spins.shape[0])
    return ShotSet(spins=spins, metadata=meta)


def tv_distance(probs_a, probs_b) -> float:
    """Total variation distance between two distributions on the same support."""
    return 0.5 * float(np.abs(np.asarray(probs_a) - np.asarray(probs_b)).sum())


def empirical_state_probs(spins, n_states) -> np.ndarray:
    """Histogram of bitmask state indices (bit i set iff sigma_i = +1)."""
    spins = np.asarray(spins)
    idx = ((spins > 0).astype(np.int64)
           << np.arange(spins.shape[1])[None, :]).sum(axis=1)
    return np.bincount(idx, minlength=n_states) / spins.shape[0]


def batch_stderr(series, n_batches=20) -> float:
    """Batch-means standard error, robust to autocorrelation."""
    series = np.asarray(series, dtype=float)
    usable = (len(series) // n_batches) * n_batches
    means = series[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))
