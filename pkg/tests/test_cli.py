import json

import numpy as np
import pytest

from regdeph.cli import EXIT_IO, EXIT_OK, EXIT_TOLERANCE, EXIT_VALIDATION, main, run_command
from regdeph.config import (
    ConfigError,
    config_hash,
    dump_state,
    load_state_file,
    parse_config,
    serialize_config,
)
from regdeph.core import BasisLabel, RegisterState

MINIMAL = """\
[geometry]
dims = 2,1,1

[coupling]
A = 0.2
"""

FULL = """\
[geometry]
dims = 3,1,1
d = 1.5
delta = 0.2
seed = 7

[bath]
v = 2.0
T = 0.4
dimensionality = 1

[coupling]
A = 0.3
p = 1.0
cutoff = 2.0

[grid]
modes = 256
omega_max = 12.0

[state]
preset = single-flip
site = 1

[run]
t0 = 0.0
t1 = 4.0
steps = 9

[output]
precision = 12
"""


class TestParsing:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.geometry.dims == (2, 1, 1)
        assert cfg.geometry.d == 1.0
        assert cfg.bath.coupling_amplitude == 0.2
        assert cfg.state.preset == "cat"
        assert cfg.output.precision == 12

    def test_round_trip_identity(self):
        for text in (MINIMAL, FULL):
            cfg = parse_config(text)
            again = parse_config(serialize_config(cfg))
            assert again == cfg
            assert config_hash(again) == config_hash(cfg)

    def test_round_trip_with_entries(self):
        text = MINIMAL + """
[state]
entries =
    ++ 0.70710678118654752 0
    -- 0 0.70710678118654752
"""
        cfg = parse_config(text)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_unknown_key_is_error(self):
        with pytest.raises(ConfigError, match="unknown key geometry.spacing"):
            parse_config("[geometry]\ndims = 2,1,1\nspacing = 2\n")

    def test_unknown_section_is_error(self):
        with pytest.raises(ConfigError, match=r"unknown section \[extras\]"):
            parse_config(MINIMAL + "\n[extras]\nx = 1\n")

    def test_negative_delta_names_the_key(self):
        with pytest.raises(ConfigError, match="geometry.delta"):
            parse_config("[geometry]\ndims = 2,1,1\ndelta = -1\n")

    def test_syntax_error_reports_line(self):
        with pytest.raises(ConfigError, match="syntax"):
            parse_config("delta = 1 without a section\n")

    def test_preset_and_entries_conflict(self):
        text = "[state]\npreset = cat\nentries =\n    + 1 0\n"
        with pytest.raises(ConfigError, match="mutually exclusive"):
            parse_config(text)

    def test_seed_override_changes_hash(self):
        cfg = parse_config(MINIMAL)
        assert config_hash(cfg.with_seed(99)) != config_hash(cfg)


class TestStateFiles:
    def test_round_trip(self):
        state = RegisterState.cat(2)
        text = dump_state(state)
        again = load_state_file(text, n_qubits=2)
        assert set(again.labels()) == set(state.labels())
        for lab, amp in state.items():
            assert again.amplitudes[lab] == pytest.approx(amp, abs=1e-15)

    def test_normalization_tolerance(self):
        with pytest.raises(ConfigError, match="norm"):
            load_state_file("+ 0.707 0\n- 0.707 0\n")  # off by ~3e-4

    def test_wrong_register_size(self):
        with pytest.raises(ConfigError, match="qubits"):
            load_state_file("++ 1 0\n", n_qubits=3)


def _write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestCommands:
    def test_simulate_cat_fidelity_starts_at_one(self, tmp_path):
        cfg_path = _write(tmp_path, FULL)
        out = tmp_path / "out"
        code = main(["simulate", "--config", str(cfg_path), "--output", str(out), "--quiet"])
        assert code == EXIT_OK
        lines = (out / "simulate.csv").read_text().splitlines()
        assert lines[0].startswith("# regdeph")
        assert lines[1].startswith("# config-sha256 = ")
        assert lines[2] == "t,F"
        first = lines[3].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 1.0

    def test_simulate_reproducible_byte_identical(self, tmp_path):
        cfg_path = _write(tmp_path, FULL)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfg_path), "--output", str(out1), "--quiet"]) == EXIT_OK
        assert main(["simulate", "--config", str(cfg_path), "--output", str(out2), "--quiet"]) == EXIT_OK
        assert (out1 / "simulate.csv").read_bytes() == (out2 / "simulate.csv").read_bytes()

    def test_simulate_track_pairs_and_exports(self, tmp_path):
        text = FULL + "\n[run]\ntrack_pairs = +++,++-\n\n[output]\nexport_positions = true\nexport_modes = true\n"
        # merge duplicate sections by hand: configparser forbids duplicates
        text = FULL.replace("[run]\nt0 = 0.0\nt1 = 4.0\nsteps = 9",
                            "[run]\nt0 = 0.0\nt1 = 4.0\nsteps = 9\ntrack_pairs = +++,++-")
        text = text.replace("[output]\nprecision = 12",
                            "[output]\nprecision = 12\nexport_positions = true\nexport_modes = true")
        cfg_path = _write(tmp_path, text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg_path), "--output", str(out), "--quiet"]) == EXIT_OK
        header = (out / "simulate.csv").read_text().splitlines()[2]
        assert header == "t,F,eta_0,phi_0"
        assert (out / "positions.csv").exists()
        assert (out / "modes.csv").exists()

    def test_classify_prints_key_values_and_json(self, tmp_path, capsys):
        text = """\
[geometry]
dims = 4,1,1
d = 1.0
delta = 1.0

[peak]
center = 4.0
width = 1.0
"""
        cfg_path = _write(tmp_path, text)
        assert main(["classify", "--config", str(cfg_path), "--quiet",
                     "--output", str(tmp_path / "out")]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        keyed = dict(line.split(" = ") for line in lines[:-1])
        assert keyed["classification"] == "Independent-1"
        payload = json.loads(lines[-1])
        assert payload["classification"] == "Independent-1"

    def test_pairing_and_encode(self, tmp_path, capsys):
        text = """\
[geometry]
dims = 8,1,1
d = 1.0

[peak]
center = 1.5707963267948966
width = 0.05

[run]
code = modulated
"""
        cfg_path = _write(tmp_path, text)
        out = tmp_path / "out"
        assert main(["pairing", "--config", str(cfg_path), "--quiet",
                     "--output", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "m = 2" in printed and "n = 1" in printed

        assert main(["encode", "--config", str(cfg_path), "--quiet",
                     "--output", str(out)]) == EXIT_OK
        body = (out / "encoded_state.txt").read_text()
        state = load_state_file("\n".join(l for l in body.splitlines()
                                          if not l.startswith("#")), n_qubits=8)
        assert set(map(str, state.labels())) == {"++++++++", "--------"}

    def test_pairing_not_found_is_tolerance_exit(self, tmp_path):
        text = """\
[geometry]
dims = 4,1,1

[peak]
center = 1.2
width = 0.05

[run]
m_max = 2
eps_tol = 0.0001
"""
        cfg_path = _write(tmp_path, text)
        assert main(["pairing", "--config", str(cfg_path), "--quiet",
                     "--output", str(tmp_path / "out")]) == EXIT_TOLERANCE

    def test_disorder_scan_writes_csv(self, tmp_path):
        text = """\
[geometry]
dims = 4,1,1
seed = 3

[run]
delta_min = 0.0
delta_max = 0.4
delta_steps = 3
samples = 50
k_magnitude = 6.0
"""
        cfg_path = _write(tmp_path, text)
        out = tmp_path / "out"
        assert main(["disorder-scan", "--config", str(cfg_path), "--quiet",
                     "--output", str(out)]) == EXIT_OK
        lines = (out / "disorder_scan.csv").read_text().splitlines()
        assert lines[2] == "delta,mean_lambda1,stderr1,mean_lambda2,stderr2"
        assert len(lines) == 3 + 3
        # zero disorder row has zero spread
        first = lines[3].split(",")
        assert float(first[0]) == 0.0 and float(first[2]) == 0.0

    def test_validate_oracle_passes(self, tmp_path):
        text = "[geometry]\nseed = 11\n\n[run]\ninstances = 2\noracle_samples = 1200\n"
        cfg_path = _write(tmp_path, text)
        assert main(["validate-oracle", "--config", str(cfg_path), "--quiet",
                     "--output", str(tmp_path / "out")]) == EXIT_OK

    def test_header_contains_version_seed_and_hash(self, tmp_path, capsys):
        cfg_path = _write(tmp_path, MINIMAL)
        assert main(["simulate", "--config", str(cfg_path),
                     "--output", str(tmp_path / "out")]) == EXIT_OK
        head = capsys.readouterr().out.splitlines()
        assert head[0].startswith("# regdeph ")
        assert head[1] == "# command = simulate"
        assert head[2].startswith("# seed = ")
        assert head[3].startswith("# config-sha256 = ")

    def test_seed_flag_overrides_config(self, tmp_path, capsys):
        cfg_path = _write(tmp_path, MINIMAL)
        assert main(["simulate", "--config", str(cfg_path), "--seed", "424242",
                     "--output", str(tmp_path / "out")]) == EXIT_OK
        assert "# seed = 424242" in capsys.readouterr().out


class TestExitCodes:
    def test_bad_config_is_validation_failure(self, tmp_path):
        cfg_path = _write(tmp_path, "[geometry]\ndelta = -2\n")
        assert main(["simulate", "--config", str(cfg_path), "--quiet",
                     "--output", str(tmp_path / "o")]) == EXIT_VALIDATION

    def test_missing_config_is_io_failure(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.ini"),
                     "--quiet"]) == EXIT_IO

    def test_unknown_command_via_run_command(self):
        cfg = parse_config(MINIMAL)
        with pytest.raises(ConfigError):
            run_command("explode", cfg, out_dir="/tmp/never", quiet=True)
