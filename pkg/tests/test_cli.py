import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rmtwalks.cli import main, map_trials, parse_process
from rmtwalks.errors import ValidationError
from rmtwalks.figures import figure_esd
from rmtwalks.specfn import reference_pdf
from rmtwalks.walks import random_stream

CONFIGS = {
    "esd": {"experiment": "esd", "process": {"kind": "Wigner", "n": 120, "trials": 3, "seed": 7},
            "alphas": [0.6, 1.0]},
    "moments": {"experiment": "moments", "process": {"kind": "ReverseCirculant", "n": 128, "trials": 4},
                "orders": [2, 4]},
    "word-limits": {"experiment": "word-limits", "kinds": ["Wigner"], "m": 2, "samples": [4, 8]},
    "process": {"experiment": "process", "process": {"kind": "SymmetricCirculant", "n": 51,
                                                     "grid": [0, 0.5, 1.0]},
                "paths": 500, "pairs": [[0.5, 1.0]]},
    "clocks": {"experiment": "clocks", "process": {"alpha": 0.7, "seed": 3}, "paths": 2000},
    "star-moments": {"experiment": "star-moments",
                     "process": {"kind": "EllipticIID", "n": 60, "rho": 0.5, "trials": 3}},
}
HEADERS = {
    "moments.csv": "l,t,alpha,estimate,stderr,theory,rel_err",
    "words.csv": "kind,word,n,count,ratio,extrapolated",
    "paths.csv": "path_id,t,value",
    "fdd.csv": "s,t,statistic,estimate,stderr,theory",
    "esd_alpha1.csv": "index,eigenvalue",
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def _run(tmp_path, cfg, out="out", extra=()):
    code = main(["run", str(_write(tmp_path, cfg)), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


@pytest.mark.parametrize("name", list(CONFIGS))
def test_every_experiment_runs(tmp_path, name):
    code, out = _run(tmp_path, CONFIGS[name])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"] == CONFIGS[name]
    assert {"config", "seed", "outputs", "elapsed_ms"} <= set(manifest)
    for entry in manifest["outputs"]:
        path = out / entry["file"]
        assert path.exists()
        if path.suffix == ".csv":
            header = path.read_text().splitlines()[0]
            assert header and not header[0].isdigit()
            if entry["file"] in HEADERS:
                assert header == HEADERS[entry["file"]]


def test_moments_table_has_theory(tmp_path):
    code, out = _run(tmp_path, CONFIGS["moments"])
    rows = list(csv.DictReader(open(out / "moments.csv")))
    assert [r["theory"] for r in rows] == ["1.0", "2.0"]
    assert all(float(r["rel_err"]) >= 0 for r in rows)


def test_determinism_and_thread_independence(tmp_path):
    cfg = CONFIGS["esd"]
    hashes = []
    for k, threads in enumerate(("1", "1", "3")):
        code, out = _run(tmp_path, cfg, out=f"o{k}", extra=("--threads", threads))
        assert code == 0
        hashes.append(json.loads((out / "manifest.json").read_text())["content_hash"])
    assert hashes[0] == hashes[1] == hashes[2]
    assert (tmp_path / "o0" / "esd.svg").read_bytes() == (tmp_path / "o2" / "esd.svg").read_bytes()
    code, out = _run(tmp_path, cfg, out="o3", extra=("--seed", "8"))
    assert json.loads((out / "manifest.json").read_text())["content_hash"] != hashes[0]


@pytest.mark.parametrize("cfg, field", [
    ({"experiment": "moments", "process": {"kind": "Wigner", "n": 100, "alpha": 1.5}}, "alpha"),
    ({"experiment": "moments", "process": {"kind": "Wigner", "n": 100, "colour": 1}}, "colour"),
    ({"experiment": "moments", "process": {"n": 100}}, "kind"),
    ({"experiment": "dance", "process": {"kind": "Wigner", "n": 10}}, "experiment"),
    ({"experiment": "esd", "process": {"kind": "Circulant", "n": 10}}, "kind"),
    ({"experiment": "process", "process": {"kind": "SymmetricCirculant", "n": 11, "grid": [0, 1]},
      "pairs": [[0.5, 1]]}, "pairs"),
])
def test_validation_exit_code(tmp_path, capsys, cfg, field):
    code, out = _run(tmp_path, cfg)
    assert code == 1
    assert f"[{field}]" in capsys.readouterr().err
    assert not out.exists()


def test_capacity_exit_code(tmp_path):
    code, _ = _run(tmp_path, {"experiment": "moments", "process": {"kind": "Wigner", "n": 5000}})
    assert code == 3


def test_numeric_exit_code(tmp_path, monkeypatch):
    from rmtwalks import cli
    from rmtwalks.errors import NumericError

    def boom(self):
        raise NumericError("forced")

    monkeypatch.setattr(cli.Runner, "run_moments", boom)
    code, _ = _run(tmp_path, CONFIGS["moments"])
    assert code == 2


def test_bad_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 1


def test_env_thread_default(tmp_path, monkeypatch):
    monkeypatch.setenv("RMTWALKS_THREADS", "2")
    code, _ = _run(tmp_path, CONFIGS["moments"])
    assert code == 0


def test_console_script(tmp_path):
    cfg = _write(tmp_path, CONFIGS["word-limits"])
    res = subprocess.run([sys.executable, "-m", "rmtwalks.cli", "run", str(cfg), "--out",
                          str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["outputs"] == ["words.csv"]


def test_parse_process_maps_type_errors():
    with pytest.raises(ValidationError):
        parse_process({"kind": "Wigner", "n": "many"})


def test_map_trials_keeps_order():
    assert map_trials(lambda k: k * k, 7, 3) == [k * k for k in range(7)]


def test_figure_single_zero_series():
    svg = figure_esd([("zeros", np.zeros(20))])
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    bars = root.findall(f"{ns}g/{ns}rect")
    assert len(bars) == 1
    meta = json.loads(root.find(f"{ns}metadata").text)
    lo, hi = meta["bin_edges"]["zeros"]
    assert lo < 0 < hi


def test_figure_semicircle_calibration():
    rng = random_stream(14)
    grid = np.linspace(-2, 2, 200001)
    cdf = np.cumsum(reference_pdf("semicircle", 1.0, grid))
    x = np.interp(rng.uniform(size=2000), cdf / cdf[-1], grid)
    h, _ = np.histogram(x, bins="fd", density=True)
    assert h.max() == pytest.approx(1 / np.pi, rel=0.15)
    svg = figure_esd([("a", x)], lambda z: reference_pdf("semicircle", 1.0, z))
    assert svg == figure_esd([("a", x)], lambda z: reference_pdf("semicircle", 1.0, z))
    assert 'class="reference"' in svg
    with pytest.raises(ValueError):
        figure_esd([])
