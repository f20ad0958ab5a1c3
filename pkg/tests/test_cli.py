"""Command-line interface: subcommand smoke tests and exit-status contract."""

import json
import os

import pytest

from bathforge import cli


def write_config(tmp_path, obj, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


class TestDispatch:
    def test_help_exits_zero(self, capsys):
        assert cli.main(["--help"]) == 0
        assert "steady" in capsys.readouterr().out

    @pytest.mark.parametrize(
        "sub", ["steady", "evolve", "preset", "sweep", "fit", "design", "report"]
    )
    def test_subcommand_help_exits_zero(self, sub, capsys):
        assert cli.main([sub, "--help"]) == 0
        assert sub in capsys.readouterr().out

    def test_unknown_subcommand_is_a_usage_error(self, capsys):
        assert cli.main(["frobnicate"]) == 2

    def test_missing_subcommand_is_a_usage_error(self):
        assert cli.main([]) == 2

    def test_version_flag(self, capsys):
        assert cli.main(["--version"]) == 0
        assert "bathforge" in capsys.readouterr().out


class TestSteady:
    def test_defaults_print_populations(self, capsys):
        assert cli.main(["steady"]) == 0
        out = capsys.readouterr().out
        assert "P_g" in out and "P_e" in out and "P_fplus" in out

    def test_pumped_warm_system_prints_chemical_potential(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            {
                "system": {"temperature_mk": 40.0, "qubit_levels": 2,
                           "kappa_qubit_down_mhz": 0.0, "kappa_qubit_up_mhz": 0.0},
                "drives": [
                    {"kind": "SigmaGE", "g_eff_mhz": 0.2},
                    {"kind": "DeltaGE", "g_eff_mhz": 0.4},
                ],
            },
        )
        assert cli.main(["steady", "--config", path]) == 0
        out = capsys.readouterr().out
        assert "mu_over_h_mhz" in out
        assert "fermi_dirac" in out
        # The effective-bath prediction must track the full solver closely.
        solved = float(out.split("P_e      = ")[1].split("\n")[0])
        fermi = float(out.split("fermi_dirac P_e = ")[1].split("\n")[0])
        assert abs(solved - fermi) < 5e-3

    def test_cold_unpumped_system_reports_no_potential(self, capsys):
        assert cli.main(["steady"]) == 0
        assert "n/a" in capsys.readouterr().out

    def test_bad_config_is_a_domain_error(self, tmp_path, capsys):
        path = write_config(tmp_path, {"system": {"kappa_snail_mhz": -1}})
        assert cli.main(["steady", "--config", path]) == 1
        assert "error:" in capsys.readouterr().err


class TestEvolve:
    def test_writes_csv_and_report(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "drives": [{"kind": "SigmaGE", "g_eff_mhz": 0.4}],
                "sequence": {"segments": [{"duration_us": 3.0}],
                             "sample_dt_us": 0.25, "measure_window_us": 0.0},
                "output": {"prefix": "demo"},
            },
        )
        out = tmp_path / "out"
        assert cli.main(["evolve", "--config", cfg, "--out", str(out)]) == 0
        assert sorted(os.listdir(out)) == ["demo.csv", "demo_report.json"]

    def test_empty_sequence_is_a_domain_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"sequence": {"measure_window_us": 0.0}})
        assert cli.main(["evolve", "--config", cfg]) == 1
        assert "error:" in capsys.readouterr().err


class TestPreset:
    def test_writes_outputs(self, tmp_path, capsys):
        assert cli.main(["preset", "heating_ge", "--out", str(tmp_path)]) == 0
        assert sorted(os.listdir(tmp_path)) == ["heating_ge.csv", "heating_ge_report.json"]
        out = capsys.readouterr().out
        assert "P_e=" in out

    def test_set_overrides(self, tmp_path, capsys):
        rc = cli.main(
            ["preset", "heating_ge", "--out", str(tmp_path), "--set", "duration_us=2.0"]
        )
        assert rc == 0
        report = json.loads((tmp_path / "heating_ge_report.json").read_text())
        assert report["config_echo"]["overrides"] == {"duration_us": 2.0}

    def test_bad_override_is_a_domain_error(self, capsys):
        assert cli.main(["preset", "heating_ge", "--set", "nonsense=1"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_preset_is_a_usage_error(self, capsys):
        assert cli.main(["preset", "frobnicate"]) == 2


class TestSweepFitReport:
    def test_sweep_then_report(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "drives": [{"kind": "SigmaGE", "g_eff_mhz": 0.4}],
                "sequence": {"segments": [{"duration_us": 3.0}],
                             "sample_dt_us": 0.25, "measure_window_us": 0.0},
                "sweep": {"values": [0.2, 0.4], "threads": 1},
                "output": {"prefix": "sw"},
            },
        )
        out = tmp_path / "out"
        assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        assert sorted(os.listdir(out)) == [
            "sw_sweep0.csv", "sw_sweep1.csv", "sw_sweep_report.json",
        ]
        capsys.readouterr()
        assert cli.main(["report", str(out)]) == 0
        assert "sw_sweep_report" not in capsys.readouterr().err

    def test_sweep_without_sweep_section_fails(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"drives": [{"kind": "SigmaGE", "g_eff_mhz": 0.1}]})
        assert cli.main(["sweep", "--config", cfg]) == 1

    def test_fit_recovers_pumped_relaxation(self, tmp_path, capsys):
        assert cli.main(["preset", "cooling_ge", "--out", str(tmp_path)]) == 0
        capsys.readouterr()
        csv = str(tmp_path / "cooling_ge.csv")
        assert cli.main(["fit", "--csv", csv, "--model", "two_level"]) == 0
        out = capsys.readouterr().out
        assert "gamma_ge" in out and "gamma_eg" in out
        assert "converged = True" in out

    def test_fit_missing_file_is_a_domain_error(self, capsys):
        assert cli.main(["fit", "--csv", "/nonexistent/t.csv"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_fit_bad_fixed_syntax_is_a_domain_error(self, tmp_path, capsys):
        assert cli.main(["preset", "heating_ge", "--out", str(tmp_path)]) == 0
        capsys.readouterr()
        csv = str(tmp_path / "heating_ge.csv")
        assert cli.main(["fit", "--csv", csv, "--fixed", "gamma_ge"]) == 1

    def test_report_on_directory_without_reports_fails(self, tmp_path, capsys):
        assert cli.main(["report", str(tmp_path)]) == 1
        assert "error:" in capsys.readouterr().err


class TestDesign:
    def test_two_level_forward_check_hits_the_target(self, capsys):
        assert cli.main(["design", "--target", "0.2,0.8"]) == 0
        out = capsys.readouterr().out
        achieved = [float(x) for x in out.split("achieved  = ")[1].split("\n")[0].split(",")]
        assert abs(achieved[0] - 0.2) <= 1e-3
        assert abs(achieved[1] - 0.8) <= 1e-3

    def test_malformed_target_is_a_domain_error(self, capsys):
        assert cli.main(["design", "--target", "0.2,x"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_infeasible_target_is_a_domain_error(self, capsys):
        # Populations must sum to one.
        assert cli.main(["design", "--target", "0.9,0.9"]) == 1
        assert "error:" in capsys.readouterr().err
