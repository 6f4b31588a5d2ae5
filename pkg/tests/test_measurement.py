import numpy as np
import pytest
from conftest import make_shotset

from cqie.dynamics import target_all_zero
from cqie.errors import InvalidArgumentError
from cqie.measurement import (average_magnetization, global_fidelity,
                              magnetization_toward, per_qubit_zero_frequency,
                              single_qubit_fidelity, wilson_interval)


def shots_from_bitstrings(strings):
    spins = np.array([[1 if c == "1" else -1 for c in s] for s in strings],
                     dtype=np.int8)
    return make_shotset(spins)


class TestGlobalFidelity:
    def test_exact_counts(self):
        shots = shots_from_bitstrings(["000", "000", "010", "000"])
        est = global_fidelity(shots, target_all_zero(3))
        assert est.value == 0.75
        assert est.stderr == pytest.approx(np.sqrt(0.75 * 0.25 / 4))
        assert est.n_qubits == 3 and est.n_shots == 4

    def test_large_register_stderr_scale(self):
        # a 0.9956 hit rate over 1e5 shots carries a ~2.1e-4 error bar
        rng = np.random.default_rng(0)
        hits = rng.random(100000) < 0.9956
        spins = np.where(hits[:, None], -1, 1) * np.ones((1, 4), dtype=np.int8)
        est = global_fidelity(make_shotset(spins.astype(np.int8)),
                              target_all_zero(4))
        assert est.stderr == pytest.approx(2.1e-4, abs=0.2e-4)

    def test_perfect_and_zero(self):
        shots = shots_from_bitstrings(["00", "00"])
        assert global_fidelity(shots, target_all_zero(2)).value == 1.0
        assert global_fidelity(
            shots, np.array([1, 1], dtype=np.int8)).value == 0.0


class TestSingleQubitFidelity:
    def test_pooled_counts(self):
        shots = shots_from_bitstrings(["000", "010"])
        est = single_qubit_fidelity(shots, target_all_zero(3))
        assert est.value == pytest.approx(5.0 / 6.0)
        assert est.stderr == pytest.approx(np.sqrt((5 / 6) * (1 / 6) / 6))

    def test_global_bounded_by_worst_qubit(self):
        rng = np.random.default_rng(2)
        spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=(500, 6),
                           p=[0.9, 0.1])
        shots = make_shotset(spins)
        target = target_all_zero(6)
        worst = per_qubit_zero_frequency(shots, target).min()
        assert global_fidelity(shots, target).value <= worst + 1e-12

    def test_duplication_invariance(self):
        shots = shots_from_bitstrings(["010", "001", "000"])
        doubled = shots_from_bitstrings(["010", "001", "000"] * 2)
        t = target_all_zero(3)
        assert single_qubit_fidelity(shots, t).value \
            == single_qubit_fidelity(doubled, t).value
        assert global_fidelity(shots, t).value \
            == global_fidelity(doubled, t).value


class TestWilson:
    def test_contains_point_estimate(self):
        lo, hi = wilson_interval(0.95, 200)
        assert lo < 0.95 < hi

    def test_behaved_at_edges(self):
        lo, hi = wilson_interval(1.0, 100)
        assert 0.0 <= lo < 1.0 and hi == 1.0
        lo, hi = wilson_interval(0.0, 100)
        assert lo == 0.0 and 0.0 < hi <= 1.0


class TestMagnetization:
    def test_mean_and_std(self):
        shots = shots_from_bitstrings(["11", "00"])
        est = average_magnetization(shots)
        assert est.mean == 0.0
        assert est.std == 1.0

    def test_toward_target(self):
        shots = shots_from_bitstrings(["00", "01"])
        est = magnetization_toward(shots, target_all_zero(2))
        assert est.mean == pytest.approx(0.5)
        t = np.array([-1, 1], dtype=np.int8)
        assert magnetization_toward(shots, t).mean == pytest.approx(0.5)

    def test_relabel_invariance(self):
        shots = shots_from_bitstrings(["010", "100"])
        perm = [2, 0, 1]
        permuted = make_shotset(shots.spins[:, perm])
        assert average_magnetization(shots) == average_magnetization(permuted)


class TestValidation:
    def test_target_length_mismatch(self):
        shots = shots_from_bitstrings(["00"])
        with pytest.raises(InvalidArgumentError):
            global_fidelity(shots, target_all_zero(3))
