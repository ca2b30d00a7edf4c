"""CLI: schemas, artifacts, exit codes, determinism."""

import json
import math
from pathlib import Path

import pytest

from loxodyn import errors
from loxodyn.cli import main, map_spec_to_json, parse_map_spec
from loxodyn.maps import HenonComposition, MarkovWord, MonomialAuto

MONOMIAL = {"family": "monomial", "matrix": [[2, 1], [1, 1]],
            "twist": ["1", "1"]}
HENON = {"family": "henon", "factors": [{"poly": ["0", "0", "1"],
                                         "delta": "1"}]}
MARKOV = {"family": "markov", "D": "0", "word": ["sz", "pxy"]}


# -- schema ---------------------------------------------------------------------

def test_parse_monomial():
    auto = parse_map_spec(MONOMIAL)
    assert isinstance(auto, MonomialAuto)
    assert auto.matrix == ((2, 1), (1, 1))


def test_parse_henon_coefficient_convention():
    auto = parse_map_spec(HENON)
    assert isinstance(auto, HenonComposition)
    assert auto.steps[0][0].poly == (0, 0, 1)  # c0 + c1 y + c2 y^2


def test_parse_markov():
    auto = parse_map_spec(MARKOV)
    assert isinstance(auto, MarkovWord)
    assert auto.letters == ("sz", "pxy")


def test_parse_missing_family():
    with pytest.raises(errors.SchemaError):
        parse_map_spec({"matrix": [[2, 1], [1, 1]]})


def test_parse_nonunimodular():
    with pytest.raises(errors.NonUnimodular):
        parse_map_spec({"family": "monomial", "matrix": [[2, 0], [0, 1]]})


def test_schema_round_trip():
    for spec in (MONOMIAL, HENON, MARKOV):
        auto = parse_map_spec(spec)
        again = parse_map_spec(map_spec_to_json(auto))
        assert map_spec_to_json(auto) == map_spec_to_json(again)


# -- commands ---------------------------------------------------------------------

def _write_spec(tmp_path, spec, name="map.json"):
    p = tmp_path / name
    p.write_text(json.dumps(spec))
    return str(p)


def test_degree_command(tmp_path, capsys):
    path = _write_spec(tmp_path, MONOMIAL)
    assert main(["degree", "--map", path]) == 0
    out = capsys.readouterr().out
    data = json.loads(out)
    assert abs(data["lambda1"] - (3 + math.sqrt(5)) / 2) < 1e-12
    assert "2.6180339887498949" in out  # 17 significant digits


def test_degree_unknown_flag_exits_2(tmp_path):
    path = _write_spec(tmp_path, MONOMIAL)
    assert main(["degree", "--map", path, "--bogus"]) == 2


def test_degree_bad_spec_exits_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"family": "unknown"}')
    assert main(["degree", "--map", str(p)]) == 2


def test_height_command(tmp_path, capsys):
    path = _write_spec(tmp_path, HENON)
    assert main(["height", "--map", path, "--point", "1/2,3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == "NonPeriodic"
    assert any(v["place"] == "p=2" for v in data["per_place"])


def test_height_artifact_and_manifest(tmp_path):
    path = _write_spec(tmp_path, HENON)
    out = tmp_path / "height.json"
    assert main(["height", "--map", path, "--point", "0,0",
                 "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["verdict"] == "Periodic"
    manifest = json.loads(out.with_suffix(".manifest.json").read_text())
    assert manifest["seed"] == 0
    assert str(out) in manifest["outputs"]


def test_rigidity_mismatched_surfaces_exits_2(tmp_path, capsys):
    f = _write_spec(tmp_path, HENON, "f.json")
    g = _write_spec(tmp_path, MONOMIAL, "g.json")
    assert main(["rigidity", "--map-f", f, "--map-g", g, "--n", "1"]) == 2
    assert "SurfaceMismatch" in capsys.readouterr().err


def test_periodic_exact(tmp_path, capsys):
    path = _write_spec(tmp_path, MONOMIAL)
    assert main(["periodic", "--map", path, "--n", "2", "--exact"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["count"] == 5
    assert len(data["representatives"]) == 5


def test_green_grid_csv(tmp_path):
    path = _write_spec(tmp_path, HENON)
    out = tmp_path / "grid.csv"
    code = main(["green-grid", "--map", path, "--nx", "8", "--ny", "8",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x,y,Gplus,Gminus,G,err"
    assert len(lines) == 65


def test_green_grid_binary(tmp_path):
    import numpy as np

    path = _write_spec(tmp_path, HENON)
    out = tmp_path / "grid.csv"
    binp = tmp_path / "grid.bin"
    main(["green-grid", "--map", path, "--nx", "4", "--ny", "5",
          "--out", str(out), "--binary", str(binp)])
    raw = binp.read_bytes()
    assert raw[:8] == b"LOXGRID1"
    nx, ny = np.frombuffer(raw[8:24], dtype="<i8")
    assert (nx, ny) == (4, 5)
    vals = np.frombuffer(raw[24:], dtype="<f8")
    assert vals.size == 20


def test_determinism_repeated_runs(tmp_path):
    path = _write_spec(tmp_path, HENON)
    outs = []
    for k in (1, 2):
        out = tmp_path / f"run{k}.csv"
        main(["green-grid", "--map", path, "--nx", "6", "--ny", "6",
              "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_moriwaki_command(tmp_path, capsys):
    spec = {"family": "henon",
            "factors": [{"poly": ["0", "0", "0", "1/(2*t)"], "delta": "-1"}]}
    path = _write_spec(tmp_path, spec)
    assert main(["moriwaki", "--family", path, "--point", "1,1",
                 "--quad-n", "16", "--spec-n", "8"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["value"] > 0
    assert data["rel_diff"] < 0.05
