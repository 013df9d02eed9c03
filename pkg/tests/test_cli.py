"""CLI layer: argument parsing, config layering, exit codes, output routing."""

import csv

import pytest

from noisygrover.cli import main, parse_config_file
from noisygrover.errors import ConfigError
from noisygrover.ladder import cell_master_seed, run_seed


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))[1:]


def test_exact_command(tmp_path, capsys):
    rc = main(["exact", "--n", "4", "--out", str(tmp_path), "--no-figures"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "<- m_max" in out
    assert (tmp_path / "exact.csv").exists()
    assert not (tmp_path / "exact.png").exists()


def test_figures_render_by_default(tmp_path, capsys):
    rc = main(["exact", "--n", "4", "--out", str(tmp_path)])
    capsys.readouterr()
    assert rc == 0
    assert (tmp_path / "exact.png").stat().st_size > 0


def test_trajectory_requires_sigma(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["trajectory", "--n", "10", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_trajectory_convention_changes_output(tmp_path, capsys):
    args = ["trajectory", "--n", "10", "--sigma", "0.002", "--seed", "7", "--no-figures"]
    assert main(args + ["--out", str(tmp_path / "a"), "--noise-convention", "stddev"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--noise-convention", "paper"]) == 0
    capsys.readouterr()
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a != b


def test_sigma_max_with_preset_defaults(tmp_path, capsys):
    rc = main(["sigma-max", "--preset", "desk", "--runs", "5", "--seed", "99",
               "--out", str(tmp_path), "--no-figures"])
    out = capsys.readouterr().out
    assert rc == 0
    # Desk preset supplies n=10, p_cut=0.5, d_sigma=1e-4 as the cell.
    assert "sigma_max(n=10, p_cut=0.5, d_sigma=0.0001)" in out
    assert "runs=5" in out
    rows = read_rows(tmp_path / "runs.csv")
    assert len(rows) == 5
    cell = cell_master_seed(99, 10, 0.5, 1e-4)
    assert int(rows[0][4]) == run_seed(cell, 0)


def test_config_file_layering(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# small cell\n"
        "n_list = 10\n"
        "p_cut_list = 0.7\n"
        "d_sigma_list = 0.001\n"
        "runs = 7  # overridden by the flag below\n"
        "master_seed = 5\n"
    )
    rc = main(["sigma-max", "--preset", "desk", "--config", str(cfg), "--runs", "4",
               "--out", str(tmp_path / "out"), "--no-figures"])
    capsys.readouterr()
    assert rc == 0
    rows = read_rows(tmp_path / "out" / "runs.csv")
    # Flag beats config file beats preset: 4 runs, not 7 or 50.
    assert len(rows) == 4
    assert int(rows[0][4]) == run_seed(cell_master_seed(5, 10, 0.7, 0.001), 0)


def test_parse_config_file():
    import tempfile, os

    body = (
        "\n"
        "# comment line\n"
        "n_list = 10, 11\n"
        "p_cut_list = 0.5,0.7\n"
        "d_sigma_list = 1e-4\n"
        "threads = auto\n"
        "output_dir = elsewhere\n"
        "convention = paper\n"
    )
    fd, path = tempfile.mkstemp(suffix=".cfg")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        settings = parse_config_file(path)
    finally:
        os.unlink(path)
    assert settings["n_list"] == (10, 11)
    assert settings["p_cut_list"] == (0.5, 0.7)
    assert settings["threads"] >= 1
    assert settings["output_dir"] == "elsewhere"
    assert settings["convention"].value == "paper"


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("granularity = 3\n")
    rc = main(["sigma-max", "--config", str(cfg), "--out", str(tmp_path), "--no-figures"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "unknown key" in err


def test_config_file_rejects_bad_syntax(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just some words\n")
    with pytest.raises(ConfigError):
        parse_config_file(cfg.as_posix())


def test_missing_config_file_is_config_error(tmp_path, capsys):
    rc = main(["sigma-max", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "error:" in err


def test_infeasible_cutoff_exit_code(tmp_path, capsys):
    rc = main(["sigma-max", "--n", "10", "--p-cut", "0.9999", "--d-sigma", "0.001",
               "--runs", "2", "--out", str(tmp_path), "--no-figures"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "error:" in err


def test_numerical_failure_exit_code(tmp_path, capsys):
    # Identical x values leave the power-law design matrix rank deficient.
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n2.0,1.0\n2.0,2.0\n2.0,3.0\n")
    rc = main(["fit", str(path), "--model", "power"])
    err = capsys.readouterr().err
    assert rc == 3
    assert "error:" in err


def test_fit_command(tmp_path, capsys):
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n10.0,2.0\n100.0,20.0\n1000.0,200.0\n")
    rc = main(["fit", str(path), "--model", "power"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "exponent=" in out and "coeff=" in out


def test_threads_auto_accepted(tmp_path, capsys):
    rc = main(["sigma-max", "--n", "10", "--p-cut", "0.7", "--d-sigma", "0.001",
               "--runs", "3", "--threads", "auto", "--out", str(tmp_path), "--no-figures"])
    capsys.readouterr()
    assert rc == 0
