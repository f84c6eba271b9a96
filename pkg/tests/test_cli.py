import csv
import io
import math

import pytest

from optosense import cli
from optosense.closed_form import validate_against_numeric
from optosense.config import parse_config
from optosense.model import drift_matrix, stability_check, reference_params
from optosense.output import emit_csv, emit_modes_csv, emit_sweep_csv, stability_text
from optosense.sweeps import FrequencyGrid, frequency_sweep, parameter_sweep


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_matches_library(capsys):
    code, out, err = run(capsys, "spectrum", "--grid", "0.98,1.02,41", "--set", "phi=pi/2")
    assert code == 0
    expect = emit_csv(frequency_sweep(reference_params(phi=math.pi / 2), FrequencyGrid(0.98, 1.02, 41)))
    assert out == expect
    assert "effective frequencies: 0.990000" in err


def test_spectrum_files(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[system]\nv_hop = 0.01\n[grid]\nstart = 0.98\nstop = 1.02\npoints = 41\n")
    out = tmp_path / "s.csv"
    code, stdout, _ = run(capsys, "spectrum", "--config", str(cfg), "--out", str(out),
                          "--figure", str(tmp_path / "s.png"), "--plot-script", str(tmp_path / "p.py"),
                          "--overlay-phi", "pi")
    assert code == 0 and stdout == ""
    assert out.read_text() == emit_csv(frequency_sweep(reference_params(), FrequencyGrid(0.98, 1.02, 41)))
    assert (tmp_path / "s.phi0.csv").exists()
    assert (tmp_path / "s.png").stat().st_size > 0
    assert str(tmp_path / "s.phi0.csv") in (tmp_path / "p.py").read_text()


def test_modes(capsys):
    code, out, _ = run(capsys, "modes")
    assert code == 0
    assert out == emit_modes_csv(cli.modes_table(reference_params(), 9))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["dark_label"] == "minus-dark" and rows[4]["dark_label"] == "plus-dark"


def test_sweep(capsys):
    code, out, err = run(capsys, "sweep", "--parameter", "g_eff", "--values", "3e-3,6e-3,4",
                         "--grid", "0.98,1.02,201")
    assert code == 0
    expect = parameter_sweep(reference_params(), "g_eff", [3e-3, 4e-3, 5e-3, 6e-3], FrequencyGrid(0.98, 1.02, 201))
    assert out == emit_sweep_csv(expect)
    assert "minimum N_add" in err


def test_sweep_needs_parameter(capsys):
    code, _, err = run(capsys, "sweep")
    assert code == cli.EXIT_CONFIG and "parameter" in err


def test_validate(tmp_path, capsys):
    rec = tmp_path / "r.csv"
    code, out, _ = run(capsys, "validate", "--records", str(rec), "--set", "phi=pi/2")
    assert code == 0
    cfg = parse_config("", ["phi=pi/2"])
    report = validate_against_numeric(cfg.params, FrequencyGrid(0.95, 1.05, 201).omegas())
    assert out == report.summary()
    assert rec.read_text() == report.records_csv()
    assert "CONTRADICTED" in out


def test_stability(capsys):
    code, out, _ = run(capsys, "stability")
    assert code == 0 and out == stability_text(stability_check(drift_matrix(reference_params())))


@pytest.mark.parametrize("argv", [
    ["spectrum", "--set", "kappa=-1"],
    ["spectrum", "--set", "nope=1"],
    ["spectrum", "--grid", "1,0,10"],
    ["spectrum", "--grid", "1,2"],
    ["sweep", "--parameter", "g_eff", "--values", "1,2"],
])
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG and err.startswith("config error")


def test_config_error_names_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[system]\n\nkappa = -1\n")
    code, _, err = run(capsys, "stability", "--config", str(cfg))
    assert code == 2 and "kappa" in err and "line 3" in err


def test_io_errors(tmp_path, capsys):
    code, _, err = run(capsys, "spectrum", "--config", str(tmp_path / "missing.cfg"))
    assert code == cli.EXIT_IO and "missing.cfg" in err
    code, _, err = run(capsys, "stability", "--out", str(tmp_path / "no" / "x.txt"))
    assert code == cli.EXIT_IO


def test_numerical_failure(monkeypatch, capsys):
    from optosense import sweeps

    monkeypatch.setattr(sweeps, "_evaluate", lambda p, w, f: None)
    code, _, err = run(capsys, "spectrum", "--grid", "0.99,1.01,3")
    assert code == cli.EXIT_NUMERIC and "singular" in err


def test_plot_script_needs_out(tmp_path, capsys):
    code, _, _ = run(capsys, "spectrum", "--grid", "0.99,1.01,3", "--plot-script", str(tmp_path / "p.py"))
    assert code == cli.EXIT_CONFIG


def test_threads_flag(capsys):
    with pytest.raises(SystemExit):
        cli.main(["spectrum", "--threads", "0"])
