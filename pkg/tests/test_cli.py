import json
import os

import numpy as np
import pytest

from cqie.cli import (EXIT_CONFIG, EXIT_DEGENERATE, EXIT_OK, EXIT_RUNTIME,
                      SCALING_COLUMNS, derive_point_seed, main,
                      read_scaling_csv)
from cqie.config import config_from_dict, parse_config, with_axis_value
from cqie.dynamics import load_shotset
from cqie.errors import ConfigError
from cqie.topology import build_square_lattice, read_edge_list


def base_config(out_dir, **overrides):
    cfg = {
        "topology": {"kind": "square_lattice", "L": 3},
        "schedule": {"variant": "quench", "s_bar": 0.6, "h_bar": 0.5,
                     "j": 0.12},
        "scales": {"type": "linear", "a_max": 6.0, "b_max": 12.0},
        "bath": {"temperature_mk": 33.0, "sweeps_per_us": 2.0},
        "shots": 100,
        "seed": 11,
        "out_dir": str(out_dir),
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, **overrides):
    cfg = base_config(tmp_path / "out", **overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path), cfg


class TestConfigParsing:
    def test_defaults_filled(self, tmp_path):
        path, _ = write_config(tmp_path)
        cfg = parse_config(path)
        assert cfg.bath.trotter_slices == 32
        assert cfg.topology.n == 9
        assert cfg.canonical["bath"]["trotter_slices"] == 32

    def test_unknown_key_named(self, tmp_path):
        raw = base_config(tmp_path)
        raw["schedule"]["s_barr"] = 0.5
        with pytest.raises(ConfigError, match="s_barr"):
            config_from_dict(raw)

    def test_missing_section_named(self, tmp_path):
        raw = base_config(tmp_path)
        del raw["bath"]
        with pytest.raises(ConfigError, match="bath"):
            config_from_dict(raw)

    def test_bad_domain_named(self, tmp_path):
        raw = base_config(tmp_path)
        raw["schedule"]["s_bar"] = 1.5
        with pytest.raises(ConfigError, match="s_bar"):
            config_from_dict(raw)

    def test_canonical_round_trip(self, tmp_path):
        raw = base_config(tmp_path)
        cfg = config_from_dict(raw)
        again = config_from_dict(json.loads(cfg.to_json()))
        assert again.canonical == cfg.canonical
        assert again.topology == cfg.topology
        assert again.schedule == cfg.schedule

    def test_axis_override(self, tmp_path):
        cfg = config_from_dict(base_config(tmp_path))
        swept = with_axis_value(cfg, "n_qubits", 16, seed=99)
        assert swept.topology == build_square_lattice(4)
        assert swept.seed == 99
        with pytest.raises(ConfigError):
            with_axis_value(cfg, "n_qubits", 17, seed=0)
        with pytest.raises(ConfigError):
            with_axis_value(cfg, "bogus_axis", 1.0, seed=0)


class TestPointSeeds:
    def test_stable_and_distinct(self):
        s = derive_point_seed(5, "h_bar", 0.25)
        assert s == derive_point_seed(5, "h_bar", 0.25)
        assert s != derive_point_seed(5, "h_bar", 0.5)
        assert s != derive_point_seed(6, "h_bar", 0.25)
        assert s != derive_point_seed(5, "j_coupling", 0.25)
        assert 0 <= s < 2**64


class TestRun:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        path, raw = write_config(tmp_path)
        assert main(["run", "--config", path]) == EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        out = raw["out_dir"]
        summary = json.loads(open(os.path.join(out, "summary.json")).read())
        assert summary == printed
        assert summary["engine"] == "classical"
        assert summary["n_qubits"] == 9 and summary["n_shots"] == 100
        assert 0.0 <= summary["global_fidelity"] <= 1.0
        shots = load_shotset(os.path.join(out, "shots.csv"),
                             os.path.join(out, "metadata.json"))
        assert shots.spins.shape == (100, 9)
        first = open(os.path.join(out, "summary.json")).read()
        assert main(["run", "--config", path]) == EXIT_OK
        assert open(os.path.join(out, "summary.json")).read() == first

    def test_seed_override_changes_shots(self, tmp_path, capsys):
        path, raw = write_config(tmp_path, shots=50)
        main(["run", "--config", path])
        a = json.loads(capsys.readouterr().out)
        main(["run", "--config", path, "--seed", "12345"])
        b = json.loads(capsys.readouterr().out)
        assert a["seed"] != b["seed"]

    def test_missing_config_is_runtime_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) \
            == EXIT_RUNTIME

    def test_invalid_json_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", "--config", str(bad)]) == EXIT_CONFIG


class TestSweep:
    def test_scaling_csv_schema(self, tmp_path, capsys):
        path, raw = write_config(tmp_path, shots=50)
        rc = main(["sweep", "--config", path, "--axis", "n_qubits",
                   "--values", "4,9,16"])
        assert rc == EXIT_OK
        rows = read_scaling_csv(os.path.join(raw["out_dir"], "scaling.csv"))
        assert [int(r[1]) for r in rows] == [4, 9, 16]
        header = open(os.path.join(raw["out_dir"],
                                   "scaling.csv")).readline().strip()
        assert header == ",".join(SCALING_COLUMNS)

    def test_partial_failure_keeps_good_rows(self, tmp_path, capsys):
        path, raw = write_config(tmp_path, shots=50)
        rc = main(["sweep", "--config", path, "--axis", "n_qubits",
                   "--values", "9,17"])
        assert rc == EXIT_OK
        rows = read_scaling_csv(os.path.join(raw["out_dir"], "scaling.csv"))
        assert not np.isnan(rows[0][2])
        assert np.isnan(rows[1][2])
        errors = json.loads(open(os.path.join(
            raw["out_dir"], "sweep_errors.json")).read())
        assert len(errors) == 1

    def test_total_failure_is_runtime_error(self, tmp_path, capsys):
        path, raw = write_config(tmp_path, shots=50)
        rc = main(["sweep", "--config", path, "--axis", "n_qubits",
                   "--values", "17,18"])
        assert rc == EXIT_RUNTIME


def write_scaling_csv(path, points):
    lines = [",".join(SCALING_COLUMNS)]
    for n, F, F_err, f, f_err in points:
        lines.append(f"{float(n):.10g},{n},{F:.10g},{F_err:.10g},"
                     f"{f:.10g},{f_err:.10g},0,0,0")
    path.write_text("\n".join(lines) + "\n")


class TestFit:
    def test_alpha_fit_round_trip(self, tmp_path, capsys):
        alpha = 2.11e-4
        csv = tmp_path / "scaling.csv"
        write_scaling_csv(csv, [(n, (1 - alpha)**n, 0.0, 1 - alpha, 0.0)
                                for n in (40, 262, 1036, 5612)])
        rc = main(["fit", "--csv", str(csv), "--model", "alpha",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        result = json.loads(open(tmp_path / "fit_alpha.json").read())
        assert result["params"]["alpha"] == pytest.approx(alpha, rel=1e-6)
        curve = open(tmp_path / "fit_alpha_curve.csv").read().splitlines()
        assert curve[0] == "N,model_value"
        assert len(curve) == 5

    def test_effective_temp_requires_delta_e(self, tmp_path):
        csv = tmp_path / "scaling.csv"
        write_scaling_csv(csv, [(n, 0.99**n, 0.0, 0.99, 0.0)
                                for n in (10, 20, 40)])
        assert main(["fit", "--csv", str(csv), "--model", "effective_temp",
                     "--out", str(tmp_path)]) == EXIT_CONFIG
        assert main(["fit", "--csv", str(csv), "--model", "effective_temp",
                     "--out", str(tmp_path), "--delta-e", "4.0"]) == EXIT_OK

    def test_n0_chained_from_alpha_fit(self, tmp_path):
        alpha, n0 = 2.11e-4, 329.0
        small = tmp_path / "small.csv"
        write_scaling_csv(small, [(n, (1 - alpha)**n, 0.0, 1 - alpha, 0.0)
                                  for n in (40, 120, 262)])
        assert main(["fit", "--csv", str(small), "--model", "alpha",
                     "--out", str(tmp_path)]) == EXIT_OK
        big = tmp_path / "big.csv"
        write_scaling_csv(big, [(n, (1 - alpha)**(n / n0), 0.0, 1.0, 0.0)
                                for n in (262, 1036, 5612)])
        rc = main(["fit", "--csv", str(big), "--model", "n0",
                   "--out", str(tmp_path),
                   "--alpha-from", str(tmp_path / "fit_alpha.json")])
        assert rc == EXIT_OK
        result = json.loads(open(tmp_path / "fit_n0.json").read())
        assert result["params"]["n0"] == pytest.approx(n0, abs=0.1)

    def test_degenerate_data_exit_code(self, tmp_path):
        csv = tmp_path / "scaling.csv"
        write_scaling_csv(csv, [(n, 1.0, 0.0, 1.0, 0.0) for n in (10, 20, 40)])
        assert main(["fit", "--csv", str(csv), "--model", "effective_temp",
                     "--out", str(tmp_path), "--delta-e", "1.0"]) \
            == EXIT_DEGENERATE


class TestLocateCritical:
    def test_small_lattice_scan(self, tmp_path, capsys):
        path, raw = write_config(
            tmp_path,
            topology={"kind": "square_lattice", "L": 6, "periodic": True},
            schedule={"variant": "quench", "s_bar": 0.5, "h_bar": 0.0,
                      "j": 0.12},
            bath={"temperature_mk": 47.9924, "sweeps_per_us": 2.0},
            seed=7)
        rc = main(["locate-critical", "--config", path,
                   "--values", "0.06,0.10,0.14,0.18,0.22,0.26,0.30",
                   "--burn-in", "3000", "--samples", "4000",
                   "--thinning", "4"])
        assert rc == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        # at beta = 1/GHz and B(0.5)/2 = 3 GHz the exact infinite-lattice
        # critical point sits at J = 0.4407/3 = 0.147; a 6x6 scan lands in
        # the right region
        assert payload["j_c"] == pytest.approx(0.147, abs=0.05)
        assert payload["b_at_operating_s_ghz"] == pytest.approx(6.0)
        scan = open(os.path.join(raw["out_dir"], "critical_scan.csv")).read()
        assert scan.splitlines()[0] == "J,mean_abs_m,chi,binder"

    def test_needs_five_values(self, tmp_path):
        path, _ = write_config(tmp_path)
        assert main(["locate-critical", "--config", path,
                     "--values", "0.1,0.2"]) == EXIT_CONFIG


class TestGenTopology:
    def test_round_trip(self, tmp_path):
        path, _ = write_config(tmp_path)
        out = tmp_path / "topo.edges"
        assert main(["gen-topology", "--config", path,
                     "--out", str(out)]) == EXIT_OK
        assert read_edge_list(out) == build_square_lattice(3)
