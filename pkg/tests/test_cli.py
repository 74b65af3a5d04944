import json

import numpy as np
import pytest

from gaugeloc import jsonio
from gaugeloc.cli import main

EX311 = {
    "dimension": 2,
    "sites": [
        {
            "set": {"type": "point", "p": [-2, 2]},
            "gauge": {
                "type": "hpolytope",
                "functionals": [[-0.5, 0], [1, 1], [1, -1], [0.5, 1], [0.5, -1]],
            },
            "weight": 1.0,
        },
        {
            "set": {"type": "point", "p": [-2, -2]},
            "gauge": {
                "type": "hpolytope",
                "functionals": [[-0.5, 0], [1, 1], [1, -1], [0.5, 1], [0.5, -1]],
            },
            "weight": 1.0,
        },
    ],
}

FLAT_POINT = {
    "dimension": 2,
    "sites": [
        {"set": {"type": "point", "p": [0, 0]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
        {"set": {"type": "flat", "base": [0, 0], "directions": [[1, 0]]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
        {"set": {"type": "point", "p": [0, 3]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
        {"set": {"type": "point", "p": [0, 5]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
    ],
}


@pytest.fixture
def ex311_file(tmp_path):
    path = tmp_path / "ex311.json"
    path.write_text(json.dumps(EX311))
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_roundtrip_exit_codes(ex311_file, capsys):
    code, out, _ = _run(capsys, ["solve", ex311_file])
    assert code == 0
    payload = json.loads(out)
    assert payload["point"] == [0.0, 0.0]
    assert payload["value"] == 2.0
    assert payload["method"] == "lp"


def test_certify_exit_codes(ex311_file, capsys):
    code, out, _ = _run(capsys, ["certify", ex311_file, "--point", "1", "1"])
    assert code == 2
    assert "no certificate" in out
    code, out, _ = _run(capsys, ["certify", ex311_file, "--point", "0", "0"])
    assert code == 0
    payload = json.loads(out)
    assert payload["accepted"] is True
    # explicit inline certificate
    cert = json.dumps({"phis": [[0, -0.5], [0, 0.5]], "phi0": None})
    code, out, _ = _run(
        capsys, ["certify", ex311_file, "--point", "0", "0", "--cert", cert]
    )
    assert code == 0
    bad = json.dumps({"phis": [[1, 0], [-1, 0]], "phi0": None})
    code, out, _ = _run(
        capsys, ["certify", ex311_file, "--point", "0", "0", "--cert", bad]
    )
    assert code == 2


def test_malformed_input_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = _run(capsys, ["solve", str(bad)])
    assert code == 1 and "malformed" in err
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({**EX311, "extra_field": 1}))
    code, _, err = _run(capsys, ["solve", str(unknown)])
    assert code == 1 and "unknown fields" in err


def test_dseg_locus_sublevel_commands(ex311_file, tmp_path, capsys):
    gauge_file = tmp_path / "gauge.json"
    gauge_file.write_text(json.dumps(EX311["sites"][0]["gauge"]))
    code, out, _ = _run(
        capsys, ["dseg", str(gauge_file), "--x", "-2", "2", "--y", "-2", "-2"]
    )
    assert code == 0
    seg = json.loads(out)
    assert np.allclose(seg["vertices"], [[-2, 2], [-2, -2]])
    code, out, _ = _run(capsys, ["locus", ex311_file])
    assert code == 0
    assert np.allclose(json.loads(out)["vertices"], [[0, 0]])
    code, out, _ = _run(capsys, ["sublevel", ex311_file, "--alpha", "2"])
    assert code == 0
    assert np.allclose(json.loads(out)["vertices"], [[0, 0]])


def test_euclid_and_classify_commands(tmp_path, capsys):
    fp = tmp_path / "fp.json"
    fp.write_text(json.dumps(FLAT_POINT))
    code, out, _ = _run(capsys, ["euclid", str(fp), "--test", "flat-point", "--point", "0", "0"])
    assert code == 0
    payload = json.loads(out)
    assert payload["optimal"] is True
    assert payload["alpha"] == pytest.approx(np.pi / 2, abs=1e-9)
    assert payload["bound"] == pytest.approx(2.0)
    classify_fixture = {
        "dimension": 2,
        "sites": [
            {"set": {"type": "flat", "base": [0, 0], "directions": [[1, 0]]},
             "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
            {"set": {"type": "point", "p": [0, 1]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
            {"set": {"type": "point", "p": [0, 2]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
            {"set": {"type": "point", "p": [0, 3]}, "gauge": {"type": "euclidean", "dim": 2}, "weight": 1.0},
        ],
    }
    cf = tmp_path / "classify.json"
    cf.write_text(json.dumps(classify_fixture))
    code, out, _ = _run(capsys, ["classify", str(cf)])
    assert code == 0
    assert json.loads(out) == {"multiple": True, "case": "iii", "flags": []}


def test_oracle_command(ex311_file, capsys):
    code, out, _ = _run(
        capsys,
        ["oracle", ex311_file, "--box", "-4", "-4", "4", "4", "--res", "21", "--levels", "4"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(2.0, abs=0.05)
    assert payload["cell_size"] <= 0.05


def test_asymmetry_command(ex311_file, capsys):
    code, out, _ = _run(capsys, ["asymmetry", ex311_file])
    assert code == 0
    payload = json.loads(out)
    assert payload["ratio"] == 4.0


def test_plot_deterministic(ex311_file, tmp_path):
    out1 = tmp_path / "a.svg"
    out2 = tmp_path / "b.svg"
    argv = ["plot", ex311_file, "--levels", "0.5", "1.5", "2.5", "--res", "120"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    assert b1.startswith(b"<?xml")
    assert b"DTD SVG 1.1" in b1[:200]


def test_plot_innermost_contour_encloses_minimum(ex311_file):
    from gaugeloc.jsonio import parse_instance
    from gaugeloc.plotting import PlotSpec, marching_squares, objective_raster

    inst = parse_instance(EX311)
    spec = PlotSpec(
        ((-4.5, -3.5), (4.5, 3.5)),
        (0.1, 0.6, 1.1, 1.6, 2.1, 2.6, 3.1),
        resolution=200,
    )
    xs, ys, field = objective_raster(inst, spec)
    # levels below the minimum value 2 have no contour at all
    assert not marching_squares(field, xs, ys, 0.6)
    inner = marching_squares(field, xs, ys, 2.1)
    pts = np.array([p for seg in inner for p in seg])
    assert len(pts) > 0
    assert pts[:, 0].min() < 0 < pts[:, 0].max()
    assert pts[:, 1].min() < 0 < pts[:, 1].max()
    assert np.max(np.linalg.norm(pts, axis=1)) < 1.0  # a tight ring about (0,0)


def test_instance_roundtrip_exact():
    inst = jsonio.parse_instance(EX311)
    blob = jsonio.instance_to_json(inst)
    again = jsonio.parse_instance(json.loads(json.dumps(blob)))
    assert again.dimension == inst.dimension
    for a, b in zip(inst.sites, again.sites):
        assert a.weight == b.weight
        assert np.array_equal(a.set.p, b.set.p)
        assert np.array_equal(a.gauge.functionals, b.gauge.functionals)
    # full-precision floats survive the round trip exactly
    tricky = {
        "dimension": 2,
        "sites": [
            {
                "set": {"type": "point", "p": [1 / 3, 2 / 7]},
                "gauge": {"type": "euclidean", "dim": 2},
                "weight": 0.1 + 0.2,
            }
        ],
    }
    inst = jsonio.parse_instance(tricky)
    blob = json.loads(json.dumps(jsonio.instance_to_json(inst)))
    again = jsonio.parse_instance(blob)
    assert again.sites[0].weight == inst.sites[0].weight
    assert np.array_equal(again.sites[0].set.p, inst.sites[0].set.p)


def test_deterministic_json_output(ex311_file, capsys):
    code, out1, _ = _run(capsys, ["solve", ex311_file])
    code, out2, _ = _run(capsys, ["solve", ex311_file])
    assert out1 == out2


def test_twelve_significant_digits():
    payload = {"value": 2.0000000000001234567, "list": [1.23456789012345678]}
    text = jsonio.dumps(payload)
    assert "2.0" in text and "1.23456789012" in text
