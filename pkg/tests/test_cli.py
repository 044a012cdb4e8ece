import json
import subprocess
import sys
from pathlib import Path

import pytest

from digraphon import cli

DATA = Path(cli.__file__).parent / "data"
FIXTURES = sorted(DATA.glob("*.json"))


def call(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), (json.loads(err) if err else None)


def test_usage_errors(capsys):
    assert call(capsys, "bogus", DATA / "c3.json")[0] == 2
    assert call(capsys, "cutdist", DATA / "c3.json")[0] == 2
    assert call(capsys, "sample", DATA / "c3.json")[0] == 2
    code, _, err = call(capsys, "info", "graph.txt")
    assert code == 2 and err["error"] == "UsageError"


def test_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"measures":[0.5,0.6],"values":[[0,0],[0,0]]}')
    code, out, err = call(capsys, "info", bad)
    assert code == 3 and out is None and err["error"] == "MeasureSum"
    broken = tmp_path / "broken.json"
    broken.write_text((DATA / "c3.json").read_text()[:-5])
    assert call(capsys, "check", broken)[0] == 3
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text((DATA / "c3.json").read_text().replace("1.0", "1.2", 1))
    code, _, err = call(capsys, "check", corrupt)
    assert code == 3 and err["error"] == "ValueRange"
    assert call(capsys, "info", tmp_path / "missing.json")[0] == 3
    assert call(capsys, "asymptotics", DATA / "ut.json")[0] == 3


def test_components_c3(capsys):
    code, out, _ = call(capsys, "components", DATA / "c3.json")
    assert code == 0
    assert out["result"]["components"] == [[0, 1, 2]] and out["result"]["fragmented"] == []
    assert len(out["input_digest"]) == 64


def test_spectrum_values(capsys):
    _, out, _ = call(capsys, "spectrum", DATA / "c3.json")
    eigs = sorted(complex(*z).imag for z in out["result"]["eigenvalues"])
    assert eigs == pytest.approx([-(3**0.5) / 6, 0.0, 3**0.5 / 6], abs=1e-4)
    assert out["result"]["rho"] == pytest.approx(1 / 3, abs=1e-4)


def test_check_ut(capsys):
    code, out, _ = call(capsys, "check", DATA / "ut.json")
    assert code == 0
    assert out["result"]["rho"] == 0.0
    by_name = {c["name"]: c for c in out["result"]["checks"]}
    assert by_name["fragmented_nilpotent"]["passed"] is True
    assert by_name["perron_pair"]["passed"] is None


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_check_bundled_fixtures(capsys, path):
    code, out, _ = call(capsys, "check", path)
    assert code == 0 and out["result"]["failed"] == []


def test_sample_and_edges_round_trip(capsys, tmp_path):
    dest = tmp_path / "s.edges"
    code, out, _ = call(capsys, "sample", DATA / "c3.json", "--seed", 5, "--n", 30, "--output", dest)
    assert code == 0 and dest.exists()
    code, info, _ = call(capsys, "info", dest)
    assert code == 0 and info["result"]["t"] == 30
    again = call(capsys, "sample", DATA / "c3.json", "--seed", 5, "--n", 30)[1]
    assert again["result"]["edge_list"] == dest.read_text()


def test_csv_outputs(capsys, tmp_path):
    series = tmp_path / "g.csv"
    assert call(capsys, "spectrum", DATA / "chorded4.json", "--csv", series, "--k", 6)[0] == 0
    lines = series.read_text().splitlines()
    assert lines[0] == "k,gelfand" and len(lines) == 7
    res = tmp_path / "r.csv"
    assert call(capsys, "asymptotics", DATA / "c3.json", "--lmax", 30, "--csv", res)[0] == 0
    assert len(res.read_text().splitlines()) == 31


def test_other_commands(capsys):
    c3 = DATA / "c3.json"
    assert call(capsys, "period", c3)[1]["result"]["components"][0]["period"] == 3
    assert call(capsys, "density", c3, "--k", 3)[1]["result"]["value"] == pytest.approx(1 / 9)
    assert call(capsys, "power", c3, "--k", 2)[0] == 0
    assert call(capsys, "cutnorm", c3, DATA / "c3.json")[1]["result"]["value"] == 0.0
    assert call(capsys, "cutdist", DATA / "figure2.json", DATA / "figure2.json")[1]["result"]["upper_bound"] == 0.0
    assert call(capsys, "cutnorm", c3, "--mode", "heuristic")[0] == 2
    reg = call(capsys, "regularity", DATA / "const.json", "--epsilon", 0.2)[1]["result"]
    assert reg["partition"] == [[0]] and reg["recheck"]["all"]


def test_output_is_deterministic(capsys):
    a = call(capsys, "check", DATA / "chorded4.json")[1]
    b = call(capsys, "check", DATA / "chorded4.json")[1]
    assert a == b


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "digraphon", "info", str(DATA / "const.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["t"] == 1
