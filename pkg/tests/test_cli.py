import json
import subprocess
import sys

import pytest

from mzchain import cli, figures


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_run_slaz_operating_point(capsys):
    code, out, _ = _run(["run", "--scheme", "slaz", "--coherent", "10", "--M", "250", "--N", "35000",
                         "--s", "0"], capsys)
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("P0"))
    exact = float(line.split("exact=")[1].split()[0])
    linear = float(line.split("linearized=")[1].split()[0])
    assert abs(exact - 0.906) < 0.002 and abs(linear - 0.901) < 1e-3


def test_run_modified_json(capsys):
    code, out, _ = _run(["run", "--scheme", "modified", "--coherent", "200", "--M", "38", "--N", "14",
                         "--mc", "2", "--s", "1", "--json", "--profile"], capsys)
    assert code == 0
    report = json.loads(out)
    assert abs(report["outcome"]["p_success"] - 0.5) < 0.02
    assert report["occupancy_peak"]["outer"] == 2 and report["occupancy_peak"]["inner"] == 1
    assert "validity" in report["analytic"]


def test_run_vacuum(capsys):
    code, out, _ = _run(["run", "--scheme", "slaz", "--fock", "0", "--M", "5", "--N", "5", "--s", "1",
                         "--json"], capsys)
    o = json.loads(out)["outcome"]
    assert code == 0 and o["prob_only_d0"] == o["prob_only_d1"] == 0.0


@pytest.mark.parametrize("argv", [
    ["run", "--scheme", "slaz", "--M", "5", "--N", "5", "--s", "0"],
    ["run", "--scheme", "slaz", "--coherent", "1", "--M", "1", "--N", "5", "--s", "0"],
    ["run", "--scheme", "modified", "--coherent", "1", "--M", "5", "--N", "5", "--s", "0"],
    ["run", "--scheme", "slaz", "--coherent", "1", "--M", "5", "--N", "5", "--s", "3"],
    ["run", "--coherent", "1", "--fock", "2", "--M", "5", "--N", "5", "--s", "0"],
    ["optimize", "--approx", "--target", "1.5", "--coherent", "200"],
    ["optimize", "--exact", "--target", "0.5"],
    ["oracle", "--scheme", "slaz", "--fock", "6", "--M", "3", "--N", "3", "--s", "0", "--cutoff", "2"],
    ["nonsense"],
])
def test_invalid_input_exits_one(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 1 and err


def test_argparse_errors_exit_one(capsys):
    assert cli.main(["run", "--bogus"]) == 1
    assert cli.main(["--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_optimize_modes(capsys):
    code, out, _ = _run(["optimize", "--exact", "--target", "0.5", "--coherent", "200"], capsys)
    r = json.loads(out)
    assert code == 0 and (r["m_c"], r["M"], r["N"], r["T"]) == (2, 38, 14, 28)
    code, out, _ = _run(["optimize", "--approx", "--target", "0.9", "--coherent", "200"], capsys)
    r = json.loads(out)
    assert code == 0 and min(r["achieved_p0"], r["achieved_p1"]) >= 0.88
    code, out, _ = _run(["optimize", "--baseline", "--target", "0.9"], capsys)
    r = json.loads(out)
    assert (r["M"], r["N"], r["T"]) == (25, 309, 7725)
    code, out, _ = _run(["optimize", "--baseline-exact", "--target", "0.5"], capsys)
    assert json.loads(out)["T"] == 20


def test_optimize_infeasible_exits_two(capsys, tmp_path):
    dest = tmp_path / "r.json"
    code, out, _ = _run(["optimize", "--exact", "--target", "0.999", "--coherent", "200", "--mc-max", "2",
                         "--M-max", "50", "--N-max", "50", "--output", str(dest)], capsys)
    assert code == 2 and json.loads(out)["feasible"] is False
    assert json.loads(dest.read_text())["feasible"] is False


def test_oracle_command(capsys):
    code, out, _ = _run(["oracle", "--scheme", "slaz", "--coherent", "2", "--M", "4", "--N", "4",
                         "--s", "1", "--cutoff", "20", "--shots", "20000", "--seed", "5", "--json"], capsys)
    report = json.loads(out)
    assert code == 0 and report["fock"]["agree"]
    assert set(report["monte_carlo"]["within"]) == {"only_d0", "only_d1", "channel_leak", "other"}


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# operating point\nscheme = modified\nM = 38\nN = 14\nmc = 2\ns = 0\n"
                   "coherent = 200\njson = true\n")
    code, out, _ = _run(["--config", str(cfg), "run"], capsys)
    assert code == 0 and json.loads(out)["params"]["s"] == 0
    code, out, _ = _run(["--config", str(cfg), "run", "--s", "1"], capsys)
    assert json.loads(out)["params"]["s"] == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, err = _run(["--config", str(bad), "run"], capsys)
    assert code == 1 and "colour" in err
    code, _, err = _run(["--config", str(tmp_path / "missing.cfg"), "run"], capsys)
    assert code == 1


def test_figure_env_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = _run(["figure", "fig1b", "--M-start", "250", "--M-stop", "250",
                         "--N-start", "35000", "--N-stop", "35000"], capsys)
    assert code == 0
    text = (tmp_path / "fig1b.csv").read_text()
    assert text.splitlines() == ["M,N,P", "250,35000,0.906412003584"]


def test_figure_headers_and_determinism(capsys, tmp_path):
    small = {"fig1c": ["--M-start", "50", "--M-stop", "100", "--N-start", "5000", "--N-stop", "10000"],
             "fig1d": ["--P-start", "0.5", "--P-stop", "0.55"],
             "fig1d-table": ["--P-start", "0.5", "--P-stop", "0.5"],
             "figD1": ["--P-start", "0.5", "--P-stop", "0.6"]}
    for name, extra in small.items():
        paths = []
        for i in range(2):
            path = tmp_path / f"{name}-{i}.csv"
            assert _run(["figure", name, "--output", str(path), *extra], capsys)[0] == 0
            paths.append(path)
        a, b = (p.read_bytes() for p in paths)
        assert a == b
        assert a.decode().splitlines()[0] == ",".join(figures.HEADERS[name])
    table = (tmp_path / "fig1d-table-0.csv").read_text().splitlines()
    assert table[1] == "0.5,38,14,2,28"


def test_figure_unwritable_path(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = _run(["figure", "figD1", "--P-start", "0.5", "--P-stop", "0.5",
                         "--output", str(blocker / "sub" / "x.csv")], capsys)
    assert code == 1 and err


def test_analytic_source_for_grid(capsys, tmp_path):
    path = tmp_path / "a.csv"
    _run(["figure", "fig1b", "--source", "analytic", "--M-start", "250", "--M-stop", "250",
          "--N-start", "35000", "--N-stop", "35000", "--output", str(path)], capsys)
    value = float(path.read_text().splitlines()[1].split(",")[2])
    assert abs(value - 0.901) < 1e-3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mzchain", "optimize", "--baseline", "--target", "0.9"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["T"] == 7725


def test_grid_helpers():
    assert figures.grid(0.5, 0.95, 0.05)[-1] == 0.95
    assert len(figures.grid(0.5, 0.95, 0.05)) == 10
    assert figures.int_grid(50, 500, 50)[-1] == 500
    with pytest.raises(ValueError):
        figures.grid(1.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        figures.SweepSpec("fig9")
    assert figures.fmt(1 / 3) == "0.333333333333"
    assert figures.fmt(7) == "7"
