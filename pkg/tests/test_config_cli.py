import pytest

from ionx.cli import main
from ionx.config import ConfigError, RunConfig, parse_config_text, parse_overrides
from ionx.csvio import read_csv
from ionx.drive import Square


def test_defaults_are_the_reference_system():
    cfg = RunConfig.resolve()
    s, g = cfg.system_and_grid()
    assert (s.X, s.d, s.delta) == (1.0, pytest.approx(50.0), pytest.approx(100.0))
    assert g.N == 480
    assert str(cfg.drive_signal()) == "step(5.0)"


def test_layers_override_in_order():
    cfg = RunConfig.resolve({"drive": "step(1)"}, parse_config_text("drive = square(2, 10)\n# c\n"),
                            parse_overrides(["tau_end=7"]))
    assert isinstance(cfg.drive_signal(), Square)
    assert cfg.get("tau_end") == 7.0


def test_manifest_reads_back():
    cfg = RunConfig.resolve({"system.X": "2.5", "grid": "reference"})
    again = RunConfig.resolve(parse_config_text(cfg.manifest_text()))
    assert again == cfg


@pytest.mark.parametrize("layer", [{"nope": "1"}, {"tau_end": "x"}, {"grid": "fine"},
                                   {"system.D_M": "0.1"}, {"drive": "ramp(1)"},
                                   {"solver.dt_init": "2", "solver.dt_max": "1"}])
def test_bad_config(layer):
    with pytest.raises(ConfigError):
        RunConfig.resolve(layer)


def test_output_times_include_end():
    cfg = RunConfig.resolve({"tau_end": "1.0", "output_dt": "0.1"})
    t = cfg.output_times()
    assert len(t) == 11 and t[-1] == 1.0 and t[3] == 0.3


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["run", "--scenario", "nosuch", "--out", str(tmp_path)]) == 2
    assert "fig5" in capsys.readouterr().err
    assert main(["frobnicate"]) == 2
    assert main(["run", "--scenario", "equilibrium", "--out", str(tmp_path), "--set", "bad"]) == 2


def test_cli_solver_failure_exit_code(tmp_path):
    code = main(["run", "--scenario", "custom", "--out", str(tmp_path), "--set", "grid=scaled",
                 "--set", "solver.max_newton_iters=1", "--set", "solver.dt_init=5",
                 "--set", "solver.dt_min=1", "--set", "solver.dt_max=5", "--set", "drive=step(50)", "--set", "tau_end=10"])
    assert code == 3


def test_cli_equilibrium_run(tmp_path):
    assert main(["run", "--scenario", "equilibrium", "--out", str(tmp_path)]) == 0
    _, header, rows = read_csv(tmp_path / "profile_equilibrium.csv")
    assert header == ["xi", "c1", "c2", "phi", "rho"]
    assert len(rows) == 480
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "scenario = equilibrium" in manifest and "noise.D_a = 2e-09" in manifest


def test_cli_grid_and_netlist(tmp_path, capsys):
    assert main(["grid", "--dump"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "k,xi,width,region" and len(out) == 481
    path = tmp_path / "n.cir"
    assert main(["netlist", "--mode", "galvanostatic", "--out", str(path)]) == 0
    assert ".mode galvanostatic" in path.read_text()


def test_custom_scenario_outputs(tmp_path):
    assert main(["run", "--scenario", "custom", "--out", str(tmp_path), "--set", "tau_end=2",
                 "--set", "drive=step(2)"]) == 0
    _, header, rows = read_csv(tmp_path / "series.csv")
    assert header == ["tau", "J_exit", "I_total"] and rows[-1][0] == 2.0


def test_fig7_sweep_is_ordered(tmp_path):
    assert main(["run", "--scenario", "fig7", "--out", str(tmp_path), "--set", "output_dt=0.25",
                 "--set", "tau_end=40", "--set", "jobs=2"]) == 0
    peaks = []
    for v in (3, 5, 7, 9):
        _, header, rows = read_csv(tmp_path / f"channel_V{v}.csv")
        assert header == ["tau", "concentration"]
        peaks.append(max(r[1] for r in rows))
    assert peaks == sorted(peaks) and len(set(peaks)) == 4


def test_spectrum_csv_schema(tmp_path):
    assert main(["run", "--scenario", "fig9", "--out", str(tmp_path), "--set", "sweep.v_sig=3"]) == 0
    comments, header, rows = read_csv(tmp_path / "snr_V3.csv")
    assert header == ["omega", "S_thermal", "S_shot", "S_J_total", "SNR", "SNR_dB"]
    assert comments[0].startswith("dc_impulse_weight = ")
    assert len(rows) == 81
