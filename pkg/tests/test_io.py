import json

import numpy as np
import pytest

from conicpinch import io as cio


def test_json_schema_and_cleaning(tmp_path):
    doc = {"b": np.float64(1.5), "a": np.arange(3), "z": 1 + 2j, "n": float("nan"),
           "i": float("-inf"), "flag": np.bool_(True)}
    text = cio.to_json(doc, "demo")
    back = json.loads(text)
    assert back["schema_version"] == cio.SCHEMA_VERSION
    assert back["kind"] == "demo"
    assert back["a"] == [0, 1, 2] and back["z"] == [1.0, 2.0]
    assert back["n"] == "nan" and back["i"] == "-inf" and back["flag"] is True
    assert list(back) == sorted(back)
    assert cio.to_json(doc, "demo") == text


def test_csv_exact_round_trip(tmp_path):
    rows = [[0.1, 1 / 3, 7], [1e-300, -2.5, 0]]
    p = cio.write_csv(tmp_path / "t.csv", ["x", "y", "k"], rows)
    head, back = cio.read_csv(p)
    assert head == ["x", "y", "k"]
    assert back == [[0.1, 1 / 3, 7.0], [1e-300, -2.5, 0.0]]
    assert open(p).read().splitlines()[1] == "0.1,0.3333333333333333,7"


def test_grid_round_trip(tmp_path):
    a = np.linspace(0, 1, 12).reshape(3, 4)
    p = cio.write_grid(tmp_path / "g.grid", a, {"grid_kind": "demo", "ds": 0.5})
    b, head = cio.read_grid(p)
    assert np.array_equal(a, b)
    assert head["shape"] == [3, 4] and head["schema_version"] == cio.SCHEMA_VERSION


def test_grid_magic_checked(tmp_path):
    p = tmp_path / "bad.grid"
    p.write_bytes(b"not a grid")
    with pytest.raises(ValueError):
        cio.read_grid(p)


def test_manifest(tmp_path):
    p = cio.write_manifest(tmp_path, "demo", {"x": 1}, [tmp_path / "b.csv", tmp_path / "a.json"], 0)
    doc = cio.read_json(p)
    assert doc["outputs"] == ["a.json", "b.csv"]
    assert doc["exit_status"] == 0 and doc["kind"] == "manifest"
    assert doc["kernel_backend"] in ("compiled", "python")
