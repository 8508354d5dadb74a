import json

import numpy as np
import pytest

from juliats import __version__
from juliats.cli import main, parse_angle, parse_complex, parse_window
from juliats.geometry import read_pnm


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text, value", [
    ("0.5", 0.5), ("-1.25", -1.25), ("0.5i", 0.5j), ("-i", -1j), ("i", 1j),
    ("0.3+0.2i", 0.3 + 0.2j), ("0.3-0.2i", 0.3 - 0.2j), ("1e-3-2e-2i", 1e-3 - 2e-2j),
    ("2.5e+1+1i", 25 + 1j), ("-1-1j", -1 - 1j), (" 2 ", 2), ([1, -2], 1 - 2j), (3, 3),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_complex("0,5")
    with pytest.raises(ValueError):
        parse_angle("x")
    with pytest.raises(ValueError):
        parse_window("1,0,0,1")
    assert str(parse_angle("2/6")) == "1/3"


def test_boettcher_closed_form(capsys):
    code, out, _ = run(capsys, "boettcher", "--lambda", 2, "--order", 16)
    assert code == 0
    doc = json.loads(out)
    coeffs = np.array([complex(*c) for c in doc["result"]["coeffs"]])
    assert doc["result"]["lowest_index"] == -1
    assert np.allclose(coeffs[:2], [-0.5, 0.5], atol=1e-12)
    assert np.allclose(coeffs[2:], 0, atol=1e-12)
    assert doc["version"] == __version__
    assert doc["config"] == {"lambda": [2.0, 0.0], "order": 16}
    assert doc["residuals"]["functional_r0.5"] < 1e-12


def test_periodic_exponent(capsys):
    code, out, _ = run(capsys, "periodic", "--lambda", 0.9, "--angle", "1/1")
    assert code == 0
    assert abs(json.loads(out)["result"]["b_real"] - 0.1375) < 1e-3
    code, out, _ = run(capsys, "periodic", "--lambda", 0.9, "--angle", "1/3")
    assert abs(json.loads(out)["result"]["b_real"] - 1.1595) < 1e-3


def test_periodic_all_cycles(capsys):
    code, out, _ = run(capsys, "periodic", "--lambda", 0.5, "--period", 5)
    res = json.loads(out)["result"]
    assert res["count"] == res["expected"] == 31


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda": "0.9", "angle": "1/3", "order": 2048}))
    code, out, _ = run(capsys, "periodic", "--config", cfg)
    doc = json.loads(out)
    assert doc["config"] == {"angle": "1/3", "lambda": [0.9, 0.0], "order": 2048}
    code, out, _ = run(capsys, "periodic", "--config", cfg, "--angle", "0/1")
    assert json.loads(out)["config"]["angle"] == "0/1"


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "periodic", "--lambda", 0)[0] == 3
    assert run(capsys, "periodic", "--angle", "x/y")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "render", "--window=1,0,0,1", "--out", tmp_path / "a.ppm")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"colour": 1}')
    assert run(capsys, "boettcher", "--config", bad)[0] == 2
    assert run(capsys, "boettcher", "--config", tmp_path / "missing.json")[0] == 2


def test_transseries_output(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert run(capsys, "transseries", "--lambda", 0.5, "--angle", "1/3", "--table", "--out", out)[0] == 0
    doc = json.loads(out.read_text())
    assert doc["residuals"]["conjugacy"] <= 1e-9
    assert max(doc["residuals"]["oracle_error"]) < 1e-9
    assert "coefficient_table" in doc["result"]
    assert doc["result"]["conventions"]["normalization"].startswith("phi = -1/G")


def test_transseries_dyadic(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert run(capsys, "transseries", "--lambda", 0.5, "--angle", "3/8", "--out", out)[0] == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["dyadic"]["angle"] == "3/8"
    assert max(doc["residuals"]["oracle_error"]) < 1e-9


def test_brick_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    fig = tmp_path / "b.png"
    code, text, _ = run(capsys, "brick", "--lambda", 0.5, "--depth", 4, "--samples", 33,
                        "--oracle-points", 20000, "--out", out, "--figure", fig)
    assert code == 0
    lines = out.read_text().splitlines()
    meta = json.loads(lines[0][2:])
    assert meta["config"]["depth"] == 4 and meta["version"] == __version__
    assert lines[1] == "index,re,im,copy,address"
    assert len(lines) == 2 + 16 * 33
    assert json.loads(text)["result"]["copies"] == 16
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_render_thread_invariance(tmp_path, capsys):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    base = ["render", "--lambda=-1.25", "--depth", 8, "--width", 96, "--height", 64]
    assert run(capsys, *base, "--threads", 1, "--out", a)[0] == 0
    assert run(capsys, *base, "--threads", 8, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    px, comments = read_pnm(a)
    assert px.shape == (64, 96, 3) and px.min() < 255
    assert json.loads(comments[0])["config"]["depth"] == 8


def test_render_mandelbrot_and_oracle(tmp_path, capsys):
    m = tmp_path / "m.pgm"
    assert run(capsys, "render", "--mandelbrot", "--width", 40, "--height", 40, "--out", m)[0] == 0
    px, _ = read_pnm(m)
    assert px.shape == (40, 40) and px[20, 28] == 0
    o = tmp_path / "o.ppm"
    assert run(capsys, "render", "--method", "oracle", "--oracle-points", 5000, "--width", 32,
               "--height", 32, "--out", o, "--figure", tmp_path / "o.png")[0] == 0


def test_dimension_outputs(tmp_path, capsys):
    out, csv = tmp_path / "d.json", tmp_path / "d.csv"
    code, _, _ = run(capsys, "dimension", "--lambda", 2, "--order", 256, "--n", 6, "--out", out,
                     "--csv", csv, "--figure", tmp_path / "d.png")
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["result"]["beta_E"] - 1) < 1e-9
    assert abs(doc["result"]["ruelle_D"] - np.log2(63) / 6) < 1e-9
    rows = csv.read_text().splitlines()
    assert rows[0].startswith("# {") and rows[1] == "beta,mu_n,F_n,Phi_n"


def test_normality_outputs(capsys):
    code, out, _ = run(capsys, "normality", "--m", 2, "--epsilon", 0.5, "--N", 6)
    res = json.loads(out)["result"]
    assert res["all_within_bound"] and len(res["rows"]) == 6
    code, out, _ = run(capsys, "normality", "--bits", "0110", "--m", 1, "--epsilon", 0.5)
    assert json.loads(out)["result"]["normal"] is True


def test_verify_passes_for_lambda_half(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--lambda", 0.5, "--out", tmp_path / "v", "--threads", 2)
    assert code == 0
    assert "verify: PASS" in out
    report = json.loads((tmp_path / "v" / "report.json").read_text())
    assert report["result"]["passed"] is True
    names = {r["check"] for r in report["result"]["rows"]}
    assert "brick_hausdorff_depth12" in names
