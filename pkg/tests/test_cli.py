import json
import math

import numpy as np
import pytest

from atompair.cli import main
from atompair.config import ConfigError, parse_config_text

FAST_MC = "n_traj = 60\nt_total = 40\nseed = 7\n"


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    metadata = {}
    rows = []
    header = None
    for line in open(path, encoding="utf-8"):
        line = line.rstrip("\n")
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            metadata[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return metadata, header, rows


class TestConfigParsing:
    def test_defaults(self):
        config = parse_config_text("")
        assert config.g == 1.0 and config.scan_points == 360

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="line 2: unknown key 'spam'"):
            parse_config_text("g = 1.0\nspam = 3\n")

    def test_bad_value_named(self):
        with pytest.raises(ConfigError, match="'scan_points'"):
            parse_config_text("scan_points = many\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("g = 1\ng = 2\n")

    def test_comments_and_vectors(self):
        config = parse_config_text(
            "# a comment\ndrive_direction = 0, 0, 1\npol_1 = custom\n"
            "pol_1_vector = 1, 0, 0, 0, 0, 0\n"
        )
        assert config.drive_direction == (0.0, 0.0, 1.0)
        assert np.allclose(config.polarization_vector(1), [1, 0, 0])

    def test_custom_without_vector(self):
        with pytest.raises(ConfigError, match="pol_2_vector"):
            parse_config_text("pol_2 = custom\n")

    def test_choice_validation(self):
        with pytest.raises(ConfigError, match="scan_plane"):
            parse_config_text("scan_plane = yz\n")


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        path = write_config(tmp_path, "nonsense_key = 1\n")
        assert main(["intensity-scan", "--config", path]) == 2
        assert "nonsense_key" in capsys.readouterr().err

    def test_missing_config_file_is_2(self, capsys):
        assert main(["intensity-scan", "--config", "/no/such/file.cfg"]) == 2

    def test_degenerate_steady_state_is_1(self, tmp_path, capsys):
        path = write_config(tmp_path, "g = 0.0\n" + FAST_MC)
        assert main(["steady-state", "--config", path]) == 1
        assert "not unique" in capsys.readouterr().err

    def test_unwritable_output_is_1(self, tmp_path, capsys):
        path = write_config(tmp_path, "scan_points = 8\n")
        code = main(["intensity-scan", "--config", path, "--output", "/no/such/dir/out.csv"])
        assert code == 1


class TestIntensityScanCommand:
    def test_sigma_flat(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "pol_1 = sigma\n")
        out = str(tmp_path / "scan.csv")
        assert main(["intensity-scan", "--config", cfg, "--output", out]) == 0
        metadata, header, rows = read_csv(out)
        assert header == ["angle", "phase", "intensity"]
        assert len(rows) == 360
        assert abs(float(metadata["visibility"])) < 1e-12
        assert abs(float(metadata["visibility_closed_form"])) < 1e-15

    def test_pi_visibility_third(self, tmp_path):
        cfg = write_config(tmp_path, "pol_1 = pi\n")
        out = str(tmp_path / "scan.csv")
        main(["intensity-scan", "--config", cfg, "--output", out])
        metadata, _, _ = read_csv(out)
        assert abs(float(metadata["visibility"]) - 1.0 / 3.0) < 1e-12

    def test_scan_resolution_independence(self, tmp_path):
        values = {}
        for points in (360, 720):
            cfg = write_config(tmp_path, f"scan_points = {points}\n", name=f"c{points}.cfg")
            out = str(tmp_path / f"scan{points}.csv")
            main(["intensity-scan", "--config", cfg, "--output", out])
            values[points] = float(read_csv(out)[0]["visibility"])
        assert abs(values[360] - values[720]) < 1e-9

    def test_two_level_scheme_flag(self, tmp_path):
        cfg = write_config(tmp_path, "scheme = two-level\ng = 0.5\ngamma0 = 0\ngamma = 1\n")
        out = str(tmp_path / "scan.csv")
        assert main(["intensity-scan", "--config", cfg, "--output", out]) == 0
        metadata, _, _ = read_csv(out)
        expected = 1.0 / (2 * 0.25 + 1.0)
        assert abs(float(metadata["visibility"]) - expected) < 1e-9

    def test_bit_stable_output(self, tmp_path):
        cfg = write_config(tmp_path, "pol_1 = pi\nscan_points = 48\n")
        outs = []
        for name in ("a.csv", "b.csv"):
            out = str(tmp_path / name)
            main(["intensity-scan", "--config", cfg, "--output", out])
            outs.append(open(out, "rb").read())
        # the config echo records the output path; strip it before comparing
        strip = lambda blob: b"\n".join(
            line for line in blob.split(b"\n") if not line.startswith(b"# path")
        )
        assert strip(outs[0]) == strip(outs[1])


class TestG2ScanCommand:
    def test_sigma_pair_columns(self, tmp_path):
        cfg = write_config(tmp_path, "pol_1 = sigma\npol_2 = sigma\nscan_points = 360\n")
        out = str(tmp_path / "g2.csv")
        assert main(["g2-scan", "--config", cfg, "--output", out]) == 0
        metadata, header, rows = read_csv(out)
        assert header == [
            "angle",
            "phase",
            "g2_factorized",
            "g2_exact",
            "gamma2",
            "g2_normalized",
            "witness_lhs",
            "witness_rhs",
            "violated",
        ]
        assert abs(float(metadata["modulation_depth"]) - 1.0) < 1e-9
        assert abs(float(metadata["modulation_closed_form"]) - 1.0) < 1e-15
        assert float(metadata["max_factorized_vs_exact"]) < 1e-10
        # normalized coincidence follows (1 + cos phi)/2 row by row
        for cells in rows[:: len(rows) // 24]:
            phase, g2n = float(cells[1]), float(cells[5])
            assert abs(g2n - 0.5 * (1 + math.cos(phase))) < 1e-10

    def test_orthogonal_flat(self, tmp_path):
        cfg = write_config(tmp_path, "pol_1 = pi\npol_2 = sigma\nscan_points = 120\n")
        out = str(tmp_path / "g2.csv")
        main(["g2-scan", "--config", cfg, "--output", out])
        metadata, _, rows = read_csv(out)
        assert float(metadata["modulation_depth"]) < 1e-12
        gamma2_col = [abs(float(c[4])) for c in rows]
        assert max(gamma2_col) < 1e-15

    def test_xz_plane(self, tmp_path):
        cfg = write_config(
            tmp_path, "scan_plane = xz\npol_1 = sigma\npol_2 = sigma\nscan_points = 120\n"
        )
        out = str(tmp_path / "g2.csv")
        assert main(["g2-scan", "--config", cfg, "--output", out]) == 0
        metadata, _, _ = read_csv(out)
        assert abs(float(metadata["modulation_depth"]) - 1.0) < 1e-9

    def test_custom_polarization_mix(self, tmp_path):
        # equal mix of the pi and sigma reference vectors: |z.eps|^2 = 1/2
        inv_sqrt2 = 2**-0.5
        cfg = write_config(
            tmp_path,
            f"pol_1 = custom\npol_1_vector = {inv_sqrt2}, 0, 0, 0, {inv_sqrt2}, 0\n",
        )
        out = str(tmp_path / "scan.csv")
        assert main(["intensity-scan", "--config", cfg, "--output", out]) == 0
        metadata, _, _ = read_csv(out)
        assert abs(float(metadata["visibility"]) - 1.0 / 6.0) < 1e-12
        assert abs(float(metadata["visibility"]) - float(metadata["visibility_closed_form"])) < 1e-12

    def test_json_csv_encode_identical_numbers(self, tmp_path):
        cfg = write_config(tmp_path, "scan_points = 36\npol_1 = sigma\npol_2 = sigma\n")
        out_csv = str(tmp_path / "g2.csv")
        out_json = str(tmp_path / "g2.json")
        main(["g2-scan", "--config", cfg, "--output", out_csv, "--format", "csv"])
        main(["g2-scan", "--config", cfg, "--output", out_json, "--format", "json"])
        _, header, rows = read_csv(out_csv)
        payload = json.loads(open(out_json, encoding="utf-8").read())
        for j, name in enumerate(header):
            json_col = payload["columns"][name]
            for i, cells in enumerate(rows):
                assert float(cells[j]) == float(json_col[i]), (name, i)


class TestSteadyStateCommand:
    def test_table_reports_sixth(self, tmp_path, capsys):
        cfg = write_config(tmp_path, FAST_MC)
        assert main(["steady-state", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "rho11" in out
        assert "+0.166667" in out  # analytic and numeric columns
        assert "max |numeric - analytic|" in out

    def test_writes_file(self, tmp_path):
        cfg = write_config(tmp_path, FAST_MC)
        out = str(tmp_path / "ss.csv")
        main(["steady-state", "--config", cfg, "--output", out])
        metadata, header, rows = read_csv(out)
        assert float(metadata["max_abs_difference"]) < 1e-10
        entry_col = [cells[0] for cells in rows]
        assert "rho11" in entry_col and "rho34" in entry_col


class TestValidateCommand:
    def test_small_run_passes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "n_traj = 60\nt_total = 40\nseed = 20260809\n")
        out = str(tmp_path / "report.json")
        code = main(["validate", "--config", cfg, "--output", out])
        captured = capsys.readouterr().out
        assert code == 0, captured
        assert "PASS  overall" in captured
        report = json.loads(open(out, encoding="utf-8").read())
        assert report["passed"] is True
        names = {g["name"] for g in report["groups"]}
        assert {"steady_state", "trace_normalization", "monte_carlo"} <= names

    def test_injected_trace_bug_fails(self, tmp_path, capsys):
        cfg = write_config(tmp_path, FAST_MC)
        code = main(["validate", "--config", cfg, "--inject-trace-bug"])
        captured = capsys.readouterr().out
        assert code == 1
        assert "FAIL  trace_normalization" in captured
