import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from billiards.cli import main
from billiards.plotting import emit_plot_script, read_columns

from conftest import circ


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return invoke


def body(path):
    return [line for line in open(path) if not line.startswith("#")]


def rows(path):
    return list(csv.DictReader(body(path)))


def test_table_info(run):
    res = run("table-info", "--table", "A")
    assert res.exit_code == 0
    assert "ax.1 = 1.1" in res.output and "by.2 = 0.03" in res.output
    assert "min_signed_curvature" in res.output


def test_unknown_table(run):
    res = run("table-info", "--table", "Z")
    assert res.exit_code != 0
    record = json.loads(res.stderr.strip().splitlines()[-1]) if res.stderr else json.loads(res.output)
    assert record["error"] == "unknown table"


def test_table_file(run, tmp_path):
    (tmp_path / "t.txt").write_text("ax.1 = 1.2\nby.1 = 1.0\nax.2 = 0.02\n")
    res = run("table-info", "--table-file", tmp_path / "t.txt")
    assert res.exit_code == 0 and "ax.2 = 0.02" in res.output


def test_orbit_command(run):
    assert run("orbit", "--table", "A", "--theta0", 0.5, "--r0", 0.0, "--steps", 4,
               "--out", "o.csv").exit_code == 0
    lines = open("o.csv").read().splitlines()
    assert lines[0].startswith("# billiards") and any(l.startswith("# seed") for l in lines)
    r = rows("o.csv")
    assert [int(x["step"]) for x in r] == [0, 1, 2, 3, 4]
    assert circ(float(r[2]["theta"]), 0.5) < 1e-10
    assert float(r[1]["s"]) == pytest.approx(2.2, abs=1e-10)


def test_orbit_ellipse_only(run):
    assert run("orbit", "--table", "A", "--theta0", 0.0, "--r0", 0.0, "--steps", 1,
               "--ellipse-only", "--out", "e.csv").exit_code == 0
    r = rows("e.csv")
    assert float(r[1]["s"]) == pytest.approx(2.2, abs=1e-12)


def test_orbit_domain_error_is_reported(run):
    res = run("orbit", "--table", "A", "--theta0", 0.0, "--r0", 1.5, "--steps", 3, "--out", "x.csv")
    assert res.exit_code != 0
    assert "DomainError" in res.output + res.stderr


def test_scan_then_find_periodic(run):
    assert run("scan", "--table", "A", "--grid-theta", 6, "--grid-r", 5, "--steps", 400,
               "--out", "scan.csv", "--plot-script", "scan_plot.py").exit_code == 0
    r = rows("scan.csv")
    assert len(r) == 30 and set(r[0]) == {"theta0", "r0", "frequency", "chaotic", "gap"}
    assert "scan.csv" in open("scan_plot.py").read()
    assert run("find-periodic", "--table", "A", "--period", 2, "--seed", "0.5,0.01,0.0,-0.01",
               "--out", "orbit.json").exit_code == 0
    data = json.load(open("orbit.json"))
    pts = np.array(data["points"])
    assert np.all(circ(pts[:, 0], [0.5, 0.0]) < 1e-8) and np.all(np.abs(pts[:, 1]) < 1e-8)
    assert data["residual"] < 1e-12
    m = data["multipliers"]
    assert m["alpha"] * m["beta"] == pytest.approx(1.0, abs=1e-8)
    assert data["meta"]["table"] == "A"


def test_scan_is_byte_identical_for_equal_configs(run):
    for out in ("a.csv", "b.csv"):
        assert run("scan", "--table", "B", "--random", 20, "--seed", 7, "--steps", 300,
                   "--out", out).exit_code == 0
    assert open("a.csv").read() == open("b.csv").read()
    assert "# seed: 7" in open("a.csv").read()


def test_find_periodic_seed_validation(run):
    res = run("find-periodic", "--table", "A", "--period", 3, "--seed", "0.5,0.0", "--out", "o.json")
    assert res.exit_code != 0


def test_manifold_and_globalize_round_trip(run):
    assert run("find-periodic", "--table", "B", "--period", 2, "--seed", "0.5,0.01,0.0,-0.01",
               "--out", "orbit.json").exit_code == 0
    assert run("manifold", "--orbit", "orbit.json", "--kind", "unstable", "--table-scale", 0.45,
               "--order", 40, "--out", "chart.json").exit_code == 0
    chart = json.load(open("chart.json"))
    assert chart["scale"] == pytest.approx(0.45 ** 2)
    assert chart["conjugacy_error"] < 1e-9 and chart["N"] == 40
    assert len(chart["decay"]) == 41
    assert run("scan", "--table", "B", "--grid-theta", 4, "--grid-r", 4, "--steps", 200,
               "--out", "scan.csv").exit_code == 0
    assert run("globalize", "--chart", "chart.json", "--samples", 20, "--iterates", 2,
               "--out", "man.csv", "--scan", "scan.csv", "--plot-script", "ov.py").exit_code == 0
    r = rows("man.csv")
    assert set(r[0]) == {"branch", "iterate", "sigma", "theta", "r"}
    assert {x["branch"] for x in r} == {"u0+", "u0-", "u1+", "u1-"}
    assert {int(x["iterate"]) for x in r} == {0, 1, 2}
    script = open("ov.py").read()
    assert "scan.csv" in script and "man.csv" in script


def test_manifold_needs_exactly_one_scale(run):
    assert run("find-periodic", "--table", "B", "--period", 2, "--seed", "0.5,0.01,0.0,-0.01",
               "--out", "orbit.json").exit_code == 0
    res = run("manifold", "--orbit", "orbit.json", "--kind", "stable", "--out", "c.json")
    assert res.exit_code != 0


def test_plot_script_for_empty_manifold(tmp_path):
    scan = tmp_path / "scan.csv"
    scan.write_text("# meta\ntheta0,r0,frequency,chaotic,gap\n0.1,0.2,0.3,0,1e-9\n")
    man = tmp_path / "man.csv"
    man.write_text("# meta\nbranch,iterate,sigma,theta,r\n")
    out = emit_plot_script(tmp_path / "p.py", scan=scan, manifold=man)
    text = out.read_text()
    assert text.startswith("# WARNING") and "man.csv" not in text.split("\n", 1)[1]
    compile(text, str(out), "exec")


def test_plot_script_rejects_wrong_headers(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="do not match"):
        emit_plot_script(tmp_path / "p.py", scan=bad)
    assert read_columns(bad) == (["a", "b"], 1)
