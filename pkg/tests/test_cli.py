import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from zonecover import Arrangement, apple_peel, random_arrangement
from zonecover.cli import (
    SWEEP_COLUMNS,
    arrangement_to_text,
    dumps,
    main,
    parse_arrangement,
    parse_int_list,
)


def run(*argv) -> int:
    return main([str(a) for a in argv])


def read_csv(path):
    lines = [ln for ln in open(path).read().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture
def files(tmp_path):
    def make(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p

    return make


# -- gen / file format -----------------------------------------------------------


def test_gen_apple_peel(tmp_path):
    out = tmp_path / "a.json"
    assert run("gen", "apple-peel", 4, "-o", out) == 0
    doc = json.loads(out.read_text())
    assert doc["dim"] == 3
    assert len(doc["normals"]) == 4
    arr, hw = parse_arrangement(out.read_text())
    assert hw is None
    np.testing.assert_array_equal(arr.matrix, apple_peel(4).matrix)


def test_gen_random_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("gen", "random", 3, 5, 7, "-o", a) == 0
    assert run("gen", "random", 3, 5, 7, "-o", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_errors(tmp_path, capsys):
    assert run("gen", "apple-peel", 0, "-o", tmp_path / "x.json") == 2
    assert run("gen", "apple-peel", "-o", tmp_path / "x.json") == 2
    assert run("gen", "spiral", 3, "-o", tmp_path / "x.json") == 2
    assert run("gen", "random", 1, 3, 0) == 2
    assert "zonecover:" in capsys.readouterr().err


def test_round_trip_is_lossless():
    for seed in range(20):
        arr = random_arrangement(4, 6, seed)
        hw = tuple(np.random.default_rng(seed).uniform(0.01, 1.5, 6).tolist())
        back, hw2 = parse_arrangement(arrangement_to_text(arr, hw))
        np.testing.assert_array_equal(back.matrix, arr.matrix)
        assert hw2 == hw


def test_dumps_floats():
    assert dumps(-0.0) == "-0.0"
    assert dumps(1.0) == "1.0"
    assert json.loads(dumps(0.1)) == 0.1
    assert dumps(float("nan")) == "NaN"
    assert dumps([1, 2.5]) == "[1, 2.5]"


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[1, 2]",
        '{"dim": 3}',
        '{"dim": 3, "normals": [[1, 0]]}',
        '{"dim": 2, "normals": [[0, 0]]}',
        '{"dim": 2, "normals": []}',
        '{"dim": 2, "normals": [[1, 0]], "half_widths": [0.1, 0.2]}',
    ],
)
def test_malformed_file_exit_2(files, text):
    assert run("solve", files("bad.json", text)) == 2


def test_missing_file_exit_2(tmp_path):
    assert run("solve", tmp_path / "nope.json") == 2


def test_parse_int_list():
    assert parse_int_list("1-4") == [1, 2, 3, 4]
    assert parse_int_list("0,2,5") == [0, 2, 5]
    assert parse_int_list("1-2,7") == [1, 2, 7]
    assert parse_int_list("") == []


# -- solve -----------------------------------------------------------------------


def test_solve_apple_peel_two(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "r.json"
    run("gen", "apple-peel", 2, "-o", inp)
    assert run("solve", inp, "-o", out) == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["margin"] == pytest.approx(0.0, abs=1e-9)
    assert doc["report"]["exit_code"] == 0
    assert doc["manifest"]["seed"] == 0
    assert doc["manifest"]["tolerances"]["grad_tol"] == 1e-9
    assert "numpy" in doc["manifest"]["versions"]


def test_solve_single_plane(tmp_path, files):
    out = tmp_path / "r.json"
    assert run("solve", files("one.json", '{"dim": 3, "normals": [[0, 0, 2]]}'), "-o", out) == 0
    assert json.loads(out.read_text())["report"]["objective"] == pytest.approx(1.0, abs=1e-15)


def test_solve_csv(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "r.csv"
    run("gen", "random", 3, 4, 1, "-o", inp)
    assert run("solve", inp, "--format", "csv", "-o", out) == 0
    (row,) = read_csv(out)
    assert float(row["margin"]) >= -1e-7
    assert int(row["n"]) == 4


def test_solve_exit_codes(tmp_path, monkeypatch):
    import dataclasses

    import zonecover.cli as cli
    from zonecover import solve

    inp, out = tmp_path / "a.json", tmp_path / "r.json"
    run("gen", "random", 3, 6, 2, "-o", inp)
    good = solve(random_arrangement(3, 6, 2))
    bad = dataclasses.replace(good, margin=-0.1, min_abs_inner=good.bound - 0.1)
    monkeypatch.setattr(cli, "solve", lambda arr, cfg: bad)
    assert run("solve", inp, "-o", out) == 3
    assert json.loads(out.read_text())["report"]["theorem_holds"] is False
    monkeypatch.setattr(cli, "solve", lambda arr, cfg: dataclasses.replace(bad, converged=False))
    assert run("solve", inp, "-o", out) == 4
    monkeypatch.setattr(cli, "solve", lambda arr, cfg: dataclasses.replace(good, converged=False))
    assert run("solve", inp, "-o", out) == 0


def test_solve_stdout(tmp_path, capsys):
    inp = tmp_path / "a.json"
    run("gen", "apple-peel", 3, "-o", inp)
    assert run("solve", inp) == 0
    assert len(json.loads(capsys.readouterr().out)["report"]["inner_products"]) == 3


def test_env_override(tmp_path, monkeypatch):
    inp, out = tmp_path / "a.json", tmp_path / "r.json"
    run("gen", "random", 3, 3, 0, "-o", inp)
    monkeypatch.setenv("ZONECOVER_SEED", "5")
    monkeypatch.setenv("ZONECOVER_RESTARTS", "10")
    assert run("solve", inp, "-o", out) == 0
    m = json.loads(out.read_text())["manifest"]
    assert m["seed"] == 5 and m["restarts"] == 10
    assert run("solve", inp, "--seed", 6, "-o", out) == 0
    assert json.loads(out.read_text())["manifest"]["seed"] == 6
    monkeypatch.setenv("ZONECOVER_SEED", "five")
    assert run("solve", inp) == 2


def test_solve_workers_identical(tmp_path):
    inp = tmp_path / "a.json"
    run("gen", "random", 4, 7, 3, "-o", inp)
    outs = []
    for w in (1, 3):
        out = tmp_path / f"r{w}.json"
        assert run("solve", inp, "--workers", w, "-o", out) == 0
        outs.append(json.loads(out.read_text())["report"])
    assert outs[0] == outs[1]


# -- deepest / cover -------------------------------------------------------------


def test_deepest_apple_peel(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "d.json"
    run("gen", "apple-peel", 3, "-o", inp)
    assert run("deepest", inp, "-o", out) == 0
    doc = json.loads(out.read_text())
    rep = doc["report"]
    assert rep["covering_radius_lo"] <= math.pi / 6 + 1e-9 <= rep["covering_radius_hi"] + 2e-9
    assert doc["certificate"]["method"] == "fibonacci_s2"


def test_cover(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "c.json"
    run("gen", "apple-peel", 2, "--half-width", math.pi / 4, "-o", inp)
    assert run("cover", inp, "-o", out) == 0
    assert json.loads(out.read_text())["report"]["covers"] is True
    assert run("cover", inp, "--half-width", math.pi / 4 - 0.01, "-o", out) == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["covers"] is False and len(rep["witness"]) == 3


def test_cover_needs_widths(tmp_path):
    inp = tmp_path / "a.json"
    run("gen", "apple-peel", 2, "-o", inp)
    assert run("cover", inp) == 2
    assert run("cover", inp, "--half-width", 2.0) == 2


def test_deepest_high_dim_is_flagged(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "d.json"
    run("gen", "random", 4, 3, 0, "-o", inp)
    assert run("deepest", inp, "-o", out) == 0
    assert json.loads(out.read_text())["report"]["certified"] is False


# -- sweep -----------------------------------------------------------------------


def test_sweep_random(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--n", "1-4", "--d", "2", "--seeds", "0-2", "-o", out) == 0
    rows = read_csv(out)
    assert len(rows) == 12
    assert list(rows[0].keys()) == SWEEP_COLUMNS
    assert all(float(r["margin"]) >= -1e-7 for r in rows)
    assert all(float(r["rho_lo"]) >= math.pi / (2 * int(r["n"])) - 1e-7 for r in rows)
    header = out.read_text().splitlines()[0]
    assert header.startswith("# zonecover-sweep/1")


def test_sweep_empty_seeds(tmp_path):
    assert run("sweep", "--seeds", "", "-o", tmp_path / "s.csv") == 2


def test_sweep_apple_peel(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--family", "apple-peel", "--n", "1-8", "--mesh", "1e-3", "-o", out) == 0
    rows = read_csv(out)
    assert len(rows) == 8
    for r in rows:
        target = math.pi / (2 * int(r["n"]))
        assert float(r["rho_lo"]) == pytest.approx(target, abs=2e-3)
        assert float(r["rho_hi"]) >= target - 1e-9


def test_sweep_no_cover(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--n", "2", "--d", "3,4", "--no-cover", "-o", out) == 0
    rows = read_csv(out)
    assert [r["d"] for r in rows] == ["3", "4"]
    assert rows[0]["rho_lo"] == "NaN"


# -- certify ---------------------------------------------------------------------


def test_certify_extremal_2d(tmp_path, files):
    n = 5
    t = np.arange(n) * math.pi / n
    inp = files("e.json", arrangement_to_text(Arrangement.from_array(np.column_stack([np.cos(t), np.sin(t)]))))
    out, plot = tmp_path / "t.json", tmp_path / "p.csv"
    assert run("certify", inp, "-o", out, "--plot-csv", plot) == 0
    rows = read_csv(plot)
    assert len(rows) == 1000
    assert max(abs(float(r["f"]) - float(r["cos_n_theta"])) for r in rows) <= 1e-10
    doc = json.loads(out.read_text())
    assert doc["trace"]["violating_index"] is None


def test_certify_random_maximizer(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "t.json"
    run("gen", "random", 3, 6, 4, "-o", inp)
    assert run("certify", inp, "-o", out) == 0
    tr = json.loads(out.read_text())["trace"]
    assert tr["g_zero_count"] <= 2 * 6 - 2
    assert tr["violating_index"] is None


def test_certify_suboptimal_point(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "t.json"
    run("gen", "apple-peel", 3, "-o", inp)
    u = f"{math.cos(0.05)},{math.sin(0.05)},0"
    assert run("certify", inp, "--u", u, "-o", out) == 0
    tr = json.loads(out.read_text())["trace"]
    assert tr["violating_index"] == 0
    assert tr["alpha"] < 1
    assert abs(tr["f_at_pi_over_2n"]) <= 1e-10
    assert run("certify", inp, "--u", "1,0", "-o", out) == 2
    assert run("certify", inp, "--u", "a,b,c", "-o", out) == 2


def test_certify_csv_format(tmp_path):
    inp, out = tmp_path / "a.json", tmp_path / "t.csv"
    run("gen", "apple-peel", 2, "-o", inp)
    assert run("certify", inp, "--format", "csv", "--samples", 64, "-o", out) == 0
    assert len(read_csv(out)) == 64


def test_module_entry_point(tmp_path):
    out = tmp_path / "a.json"
    r = subprocess.run([sys.executable, "-m", "zonecover", "gen", "apple-peel", "2", "-o", str(out)])
    assert r.returncode == 0
    assert json.loads(out.read_text())["dim"] == 3
