"""Command-line interface: argument parsing, outputs, and reproducibility."""

import subprocess
import sys

import pytest

from entsim import cli


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# ----------------------------------------------------------------- parsing


def test_parse_defaults():
    cfg = cli.parse(["chsh"])
    assert cfg.experiment == "chsh"
    assert cfg.seed == 12345
    assert cfg.workers == 1
    assert cfg.shots == 0
    assert cfg.params["state"] == "singlet"


def test_parse_flag_overrides():
    cfg = cli.parse(["chsh", "--state", "werner", "--visibility", "0.8",
                     "--seed", "9", "--shots", "5000"])
    assert cfg.params["state"] == "werner"
    assert cfg.params["visibility"] == 0.8
    assert cfg.seed == 9
    assert cfg.shots == 5000


def test_parse_rejects_unknown_experiment_and_bad_choice(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.parse(["teleportify"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.parse(["chsh", "--state", "ghz"])
    assert exc.value.code == 2


def test_config_file_merge_and_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment line\nstate=werner\nvisibility=0.7\nseed=4\n")
    cfg = cli.parse(["chsh", "--config", str(conf)])
    assert cfg.params["state"] == "werner"
    assert cfg.params["visibility"] == 0.7
    assert cfg.seed == 4
    # Explicit flags beat the file.
    cfg = cli.parse(["chsh", "--config", str(conf), "--visibility", "0.9"])
    assert cfg.params["visibility"] == 0.9


def test_config_file_unknown_key_is_an_error(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("bogus=1\n")
    with pytest.raises(SystemExit) as exc:
        cli.parse(["chsh", "--config", str(conf)])
    assert exc.value.code == 2
    assert "unknown config key" in capsys.readouterr().err


# ------------------------------------------------------- every experiment

FAST_ARGS = {
    "chsh": ["--shots", "2000"],
    "mermin": [],
    "ghz-profile": ["--n", "3"],
    "efficiency-threshold": ["--alpha", "0.5", "--tol", "1e-3"],
    "speed-bound": ["--separation-m", "10000", "--timing-s", "5e-12"],
    "bsm": ["--shots", "1000"],
    "teleport": ["--theta", "1.1", "--phi", "0.4"],
    "dense": ["--message", "10"],
    "swap": ["--visibility", "0.95"],
    "tomo": ["--shots", "200", "--method", "linear"],
    "distill": ["--grid", "12"],
    "qkd-rate": ["--length-km", "30"],
    "qkd-curve": ["--l-max-km", "20", "--step-km", "10"],
    "qkd-mc": ["--shots", "20000"],
    "ekert": ["--shots", "20000"],
    "secret-share": ["--shots", "5000"],
}


@pytest.mark.parametrize("experiment", sorted(cli.EXPERIMENTS))
def test_every_experiment_runs(experiment, tmp_path, capsys):
    out_file = tmp_path / f"{experiment}.csv"
    args = [experiment, *FAST_ARGS[experiment], "--out", str(out_file)]
    code, out, err = run_cli(args, capsys)
    assert code == 0, err
    assert out.startswith(f"experiment={experiment} ")
    assert out.rstrip().endswith("seed=12345")
    assert out_file.exists() and out_file.stat().st_size > 0


def test_every_experiment_is_listed():
    assert sorted(cli.EXPERIMENTS) == sorted(FAST_ARGS)


# ------------------------------------------------------------ output files


def test_same_seed_reruns_are_byte_identical(tmp_path, capsys):
    outs = []
    for name in ("a.txt", "b.txt"):
        path = tmp_path / name
        code, _, _ = run_cli(
            ["qkd-mc", "--shots", "30000", "--seed", "77", "--out", str(path)],
            capsys,
        )
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_different_seeds_differ(tmp_path, capsys):
    texts = []
    for seed in ("1", "2"):
        path = tmp_path / f"s{seed}.txt"
        run_cli(["ekert", "--shots", "20000", "--seed", seed,
                 "--out", str(path)], capsys)
        texts.append(path.read_text())
    assert texts[0] != texts[1]


def test_chsh_counts_output_header(tmp_path, capsys):
    path = tmp_path / "counts.csv"
    code, _, _ = run_cli(
        ["chsh", "--shots", "500", "--out", str(path)], capsys
    )
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "setting_id,outcome,count"
    assert len(lines) == 1 + 4 * 4


def test_qkd_curve_output_matches_library_writer(tmp_path, capsys):
    import io

    from entsim.qkdsim import LinkParams, rate_curve, write_rate_curve

    path = tmp_path / "curve.csv"
    code, _, _ = run_cli(
        ["qkd-curve", "--l-max-km", "15", "--step-km", "5", "--out", str(path)],
        capsys,
    )
    assert code == 0
    buf = io.StringIO()
    write_rate_curve(rate_curve(LinkParams(), 15.0, 5.0), buf)
    assert path.read_text() == buf.getvalue()


def test_tomo_writes_counts_and_matrix(tmp_path, capsys):
    path = tmp_path / "tomo.csv"
    code, _, _ = run_cli(
        ["tomo", "--shots", "300", "--method", "mle", "--out", str(path)],
        capsys,
    )
    assert code == 0
    assert path.read_text().splitlines()[0] == "setting_id,outcome,count"
    rho_path = path.with_suffix(".rho.csv")
    lines = rho_path.read_text().splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 1 + 16


def test_plot_flag_renders_figure(tmp_path, capsys):
    path = tmp_path / "profile.csv"
    code, _, _ = run_cli(
        ["ghz-profile", "--out", str(path), "--plot"], capsys
    )
    assert code == 0
    png = path.with_suffix(".png")
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_without_out_fails_cleanly(capsys):
    code, _, err = run_cli(["ghz-profile", "--plot"], capsys)
    assert code == 1
    assert err.startswith("error:")


def test_invalid_value_reports_error_exit_one(capsys):
    code, _, err = run_cli(["qkd-rate", "--mu", "-0.5"], capsys)
    assert code == 1
    assert "error:" in err


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "entsim.cli", "speed-bound",
         "--separation-m", "3e8", "--timing-s", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "bound=1c" in proc.stdout
