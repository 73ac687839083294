import csv
import io
import json

import pytest

from spectral_billiards import __version__
from spectral_billiards.cli import run


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def disk(tmp_path):
    return _write(tmp_path, "disk.json", {"type": "disk", "R": 1.0})


def _rows(path):
    text = open(path, encoding="utf-8", newline="").read()
    head, body = text.split("\r\n", 1)
    return head, list(csv.reader(io.StringIO(body)))


def test_trace_example(tmp_path, disk):
    out = tmp_path / "orbit.csv"
    assert run(["trace", "--domain", disk, "--bounces", "100", "--seed", "7", "-o", str(out)]) == 0
    head, rows = _rows(out)
    assert head.startswith(f"# tool=spectral-billiards version={__version__} config=") and head.endswith("seed=7")
    assert rows[0][:3] == ["bounce", "x", "y"]
    assert len(rows) - 1 == 100
    assert open(out, "rb").read().count(b"\r\n") == 102


def test_trace_explicit_start(tmp_path, disk):
    out = tmp_path / "o.csv"
    assert run(["trace", "--domain", disk, "--bounces", "5", "--start", "0", "0", "--angle", "0.3", "-o", str(out)]) == 0
    head, rows = _rows(out)
    assert head.endswith("seed=none") and len(rows) == 6
    assert float(rows[1][1]) ** 2 + float(rows[1][2]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_weyl_example(tmp_path, disk):
    out = tmp_path / "resid.csv"
    assert run(["weyl", "--domain", disk, "--bc", "dirichlet", "--lmax", "6400", "-o", str(out)]) == 0
    _, rows = _rows(out)
    assert rows[0] == ["lambda", "N", "N_weyl", "R", "R_over_sqrt_lambda", "one_term_residual"]
    body = [[float(v) for v in r] for r in rows[1:]]
    assert len(body) == 2000 and body[0][0] == 100.0 and body[-1][0] == 6400.0
    for lam, N, NW, R, Rn, _ in body:
        assert R == pytest.approx(N - NW, abs=1e-9)
        assert Rn == pytest.approx(R / lam**0.5, abs=1e-12)
    assert max(abs(r[4]) for r in body) <= 0.5


def test_json_output_has_header(tmp_path, disk):
    zone = _write(tmp_path, "zone.json", {"gamma_min": 0.01, "gamma_max": 0.5})
    out = tmp_path / "r.json"
    args = ["remainder", "--domain", disk, "--zone", zone, "--samples", "20000", "--seed", "4", "--format", "json", "-o", str(out)]
    assert run(args) == 0
    doc = json.loads(out.read_text())
    assert doc["header"]["seed"] == 4 and doc["header"]["version"] == __version__
    assert len(doc["header"]["config_sha256"]) == 64
    assert doc["report"]["seed"] == 4 and doc["report"]["samples"] == 20000


def test_byte_identical_reruns_and_threads(tmp_path, disk):
    zone = _write(tmp_path, "zone.json", {"gamma_min": 0.01, "gamma_max": 0.5})
    outs = []
    for i, threads in enumerate(("1", "1", "3")):
        o = tmp_path / f"r{i}.csv"
        run(["remainder", "--domain", disk, "--zone", zone, "--samples", "50000", "--seed", "9",
             "--threads", threads, "-o", str(o)])
        outs.append(o.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_config_hash_tracks_config(tmp_path, disk):
    heads = []
    for seed in ("1", "1", "2"):
        o = tmp_path / f"t{seed}{len(heads)}.csv"
        run(["trace", "--domain", disk, "--bounces", "3", "--seed", seed, "-o", str(o)])
        heads.append(_rows(o)[0])
    assert heads[0] == heads[1] != heads[2]


def test_spectrum_and_rotation(tmp_path, disk, capsys):
    assert run(["spectrum", "--domain", disk, "--lmax", "30"]) == 0
    text = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(text.split("\r\n", 1)[1])))
    assert sum(int(r[1]) for r in rows[1:]) == 5
    model = _write(tmp_path, "m.json", {"model": "flat_disk"})
    assert run(["rotation", "--model", model, "--points", "5"]) == 0
    text = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(text.split("\r\n", 1)[1])))
    for r in rows[1:]:
        assert float(r[1]) == pytest.approx(float(r[2]), abs=1e-9)


def test_periodic_and_robin(tmp_path, capsys):
    model = _write(tmp_path, "m.json", {"model": "flat_disk"})
    assert run(["periodic", "--model", model, "--n", "10", "--eps", "1e-3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert 0 < doc["measure"] <= 1.1 * doc["bound"]
    cfg = _write(tmp_path, "r.json", {"a_prime": "x**2 + xi**2 + 1", "beta": 0.5, "tau1": 0.8, "tau2": 1.5})
    assert run(["robin", "--config", cfg, "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["kappa1"] == pytest.approx(0.35, abs=1e-9)


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        [],
        ["trace", "--bounces", "3"],
        ["weyl", "--domain", "/nonexistent.json", "--lmax", "100"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_missing_seed_exit_2(disk):
    assert run(["trace", "--domain", disk]) == 2


def test_bad_domain_exit_2(tmp_path):
    bad = _write(tmp_path, "bad.json", {"type": "hexagon"})
    assert run(["trace", "--domain", bad, "--seed", "1"]) == 2
    ell = _write(tmp_path, "e.json", {"type": "ellipse", "a": 2.0, "b": 1.0})
    assert run(["weyl", "--domain", ell, "--lmax", "400"]) == 2


def test_start_outside_exit_2(disk):
    assert run(["trace", "--domain", disk, "--start", "2", "0", "--angle", "0"]) == 2


def test_numeric_range_exit_3(tmp_path, capsys):
    model = _write(tmp_path, "m.json", {"model": "flat_disk", "mu": 1.0})
    assert run(["rotation", "--model", model, "--eta-max", "5", "--points", "2"]) == 3
    assert "numeric" in capsys.readouterr().err


def test_version(capsys):
    assert run(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
