"""Command-line front end: presets, config parsing, exit codes, reports."""

import pytest

from faidet import cli

GOOD_CONFIG = """
[system]
tx_antennas = 4
num_dr = 2
num_er = 2
ports = 16
antenna_size_wavelengths = 0.5
rho = 1.0
power_dbm = 30
noise_dbm = -50
sinr_threshold_db = 10
energy_weight = 1.0
dr_distance_m = 10
er_distance_m = 3
pathloss_exponent = 2.7
port_stride = 1
max_ao_iterations = 30
ao_tolerance_w = 1e-6

[sweep]
parameter = N
values = 1, 16
trials = 2
seed = 0
baseline = false
"""


def write_config(tmp_path, text=GOOD_CONFIG, name="scenario.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestPresets:
    def test_fig2_structure(self):
        sweeps = cli.preset_sweeps("fig2")
        assert [label for label, _ in sweeps] == ["w02", "w05"]
        for _, spec in sweeps:
            assert spec.parameter == "N"
            assert spec.values == (1, 10, 50, 200)
            assert spec.run_baseline
            assert spec.base.power_w == pytest.approx(1.0)
            assert spec.base.noise_w == pytest.approx(1e-8)
            assert spec.base.dr_gamma(0) == pytest.approx(10.0)

    def test_fig3_structure(self):
        sweeps = cli.preset_sweeps("fig3")
        assert len(sweeps) == 2
        for _, spec in sweeps:
            assert spec.parameter == "gamma_db"
            assert spec.base.ports == 200

    def test_fig4_structure(self):
        sweeps = cli.preset_sweeps("fig4")
        assert len(sweeps) == 9  # stride x accuracy grid
        strides = {spec.base.port_stride for _, spec in sweeps}
        rhos = {spec.base.dr_rho(0) for _, spec in sweeps}
        assert strides == {1, 2, 4}
        assert rhos == {0.9, 0.95, 1.0}

    def test_unknown_preset(self):
        with pytest.raises(cli.ConfigError):
            cli.preset_sweeps("fig9")


class TestConfigFile:
    def test_loads_and_converts_units(self, tmp_path):
        config, sweep = cli.load_config(write_config(tmp_path))
        assert config.power_w == pytest.approx(1.0)
        assert config.noise_w == pytest.approx(1e-8)
        assert config.dr_gamma(0) == pytest.approx(10.0)
        assert sweep["parameter"] == "N"
        assert sweep["values"] == (1, 16)

    def test_per_receiver_lists(self, tmp_path):
        text = GOOD_CONFIG.replace("rho = 1.0", "rho = 0.9, 0.95, 1.0, 1.0")
        config, _ = cli.load_config(write_config(tmp_path, text))
        assert config.dr_rho(0) == 0.9
        assert config.er_rho(1) == 1.0

    def test_missing_key_names_field(self, tmp_path):
        text = GOOD_CONFIG.replace("power_dbm = 30\n", "")
        with pytest.raises(cli.ConfigError, match=r"\[system\] power_dbm"):
            cli.load_config(write_config(tmp_path, text))

    def test_invalid_value_names_field(self, tmp_path):
        text = GOOD_CONFIG.replace("ports = 16", "ports = many")
        with pytest.raises(cli.ConfigError, match=r"\[system\] ports"):
            cli.load_config(write_config(tmp_path, text))

    def test_missing_file(self):
        with pytest.raises(cli.ConfigError):
            cli.load_config("/nonexistent/path.ini")


class TestRunCommand:
    def test_config_run_writes_csv(self, tmp_path):
        out = tmp_path / "result.csv"
        code = cli.main(
            ["run", "--config", write_config(tmp_path), "--out", str(out), "--trials", "1"]
        )
        assert code == 0
        text = out.read_text()
        assert text.startswith("sweep_param,param_value,trial,seed,status")
        assert "\nN,1,0," in text

    def test_missing_key_exit_code(self, tmp_path, capsys):
        text = GOOD_CONFIG.replace("noise_dbm = -50\n", "")
        code = cli.main(["run", "--config", write_config(tmp_path, text)])
        assert code == 2
        assert "noise_dbm" in capsys.readouterr().err

    def test_requires_exactly_one_source(self, tmp_path):
        assert cli.main(["run"]) == 2
        assert (
            cli.main(["run", "--preset", "fig2", "--config", write_config(tmp_path)]) == 2
        )

    def test_preset_multi_output(self, tmp_path, monkeypatch):
        # shrink the preset so the test stays fast
        original = cli.preset_sweeps
        import dataclasses

        def shrunk(name):
            out = []
            for label, spec in original(name):
                base = dataclasses.replace(spec.base, ports=8)
                out.append(
                    (label, dataclasses.replace(spec, base=base, values=(1, 4), trials=1))
                )
            return out

        monkeypatch.setattr(cli, "preset_sweeps", shrunk)
        out = tmp_path / "fig2.csv"
        code = cli.main(["run", "--preset", "fig2", "--out", str(out), "--no-baseline"])
        assert code == 0
        assert (tmp_path / "fig2_w02.csv").exists()
        assert (tmp_path / "fig2_w05.csv").exists()


class TestInspectCommand:
    def test_reference_report(self, tmp_path, capsys, monkeypatch):
        import dataclasses

        original = cli.reference_config
        monkeypatch.setattr(
            cli, "reference_config", lambda **kw: dataclasses.replace(original(**kw), ports=8)
        )
        code = cli.main(["inspect", "--seed", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "status: converged" in out
        assert "objective trace" in out
        assert "DR 0: port" in out
        assert "ER 1: port" in out
        assert "weighted EH (realized)" in out


class TestSelftestCommand:
    def test_selftest_passes(self, capsys):
        code = cli.main(["selftest"])
        out = capsys.readouterr().out
        assert code == 0
        assert "[PASS]" in out
        assert "[FAIL]" not in out
