import hashlib
import json

import numpy as np
import pytest

from figtool import SchemaError, render


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")


@pytest.fixture
def transmission_csv(tmp_path):
    path = tmp_path / "single_AC(4).csv"
    rows = []
    for e in np.linspace(-1.9, 1.9, 60):
        t2 = np.exp(-e * e)
        for m in (1, 2):
            rows.append((e, m, 1, 0.1, 0.2, t2 if m == 2 else 1 - t2))
    write_csv(path, ["E", "m", "n", "Re_t", "Im_t", "abs_t2"], rows)
    return path


@pytest.fixture
def heatmap_csv(tmp_path):
    path = tmp_path / "two_Line(39).csv"
    ks = np.linspace(-3.0, 3.0, 25)
    rows = [(k1, k2, np.sin(k1 + k2), 0.0) for k1 in ks for k2 in ks]
    write_csv(path, ["k1", "k2", "ReR", "ImR"], rows)
    sidecar = path.with_suffix("").with_suffix(".params.json")
    (tmp_path / "two_Line(39).params.json").write_text(
        json.dumps({"p1": -0.785, "p2": 1.571}))
    return path


@pytest.fixture
def xsec_csv(tmp_path):
    path = tmp_path / "xsec_Line(27).csv"
    rows = [(d, 25 * d, 5 * d) for d in (0.01, 0.03, 0.1)]
    write_csv(path, ["delta", "sigma_counter", "sigma_co"], rows)
    return path


def spec_file(tmp_path, payload):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(payload))
    return str(path)


def digest(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_transmission_render_deterministic(tmp_path, transmission_csv):
    out = tmp_path / "fig2.png"
    spec = spec_file(tmp_path, {"figure": "transmission",
                                "inputs": {"csv": str(transmission_csv)},
                                "output": str(out)})
    render(spec)
    h1 = digest(out)
    render(spec)
    assert digest(out) == h1
    assert out.stat().st_size > 5000


def test_heatmap_render_with_overlays(tmp_path, heatmap_csv):
    out = tmp_path / "fig8.png"
    spec = spec_file(tmp_path, {"figure": "heatmap",
                                "inputs": {"csv": str(heatmap_csv)},
                                "output": str(out),
                                "options": {"cube_root": True}})
    render(spec)
    h1 = digest(out)
    render(spec)
    assert digest(out) == h1


def test_xsec_render(tmp_path, xsec_csv):
    out = tmp_path / "fig11.png"
    spec = spec_file(tmp_path, {"figure": "xsec",
                                "inputs": {"csv": str(xsec_csv)},
                                "output": str(out)})
    render(spec)
    assert out.exists()


def test_schema_mismatch_names_column(tmp_path, xsec_csv):
    out = tmp_path / "x.png"
    spec = spec_file(tmp_path, {"figure": "transmission",
                                "inputs": {"csv": str(xsec_csv)},
                                "output": str(out)})
    with pytest.raises(SchemaError, match="abs_t2"):
        render(spec)
    assert not out.exists()


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out = tmp_path / "x.png"
    spec = spec_file(tmp_path, {"figure": "transmission",
                                "inputs": {"csv": str(empty)},
                                "output": str(out)})
    with pytest.raises(SchemaError):
        render(spec)
    assert not out.exists()


def test_unknown_figure_kind(tmp_path, xsec_csv):
    spec = spec_file(tmp_path, {"figure": "pie", "inputs": {},
                                "output": "x.png"})
    with pytest.raises(SchemaError, match="unknown figure"):
        render(spec)


def test_missing_input_reported(tmp_path):
    spec = spec_file(tmp_path, {"figure": "xsec",
                                "inputs": {"csv": str(tmp_path / "nope.csv")},
                                "output": "x.png"})
    with pytest.raises(SchemaError, match="does not exist"):
        render(spec)


def test_cli_exit_codes(tmp_path, xsec_csv):
    from figtool.render import main
    out = tmp_path / "fig.png"
    spec = spec_file(tmp_path, {"figure": "xsec",
                                "inputs": {"csv": str(xsec_csv)},
                                "output": str(out)})
    assert main([spec]) == 0
    bad = spec_file(tmp_path, {"figure": "nope", "inputs": {},
                               "output": "x.png"})
    assert main([bad]) == 2
