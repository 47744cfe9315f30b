import csv
import io
import json
import math

import jsonschema
import pytest

from elastweyl.cli import SWEEP_TARGETS, load_schema, main
from elastweyl.config import build_config, config_hash

SMALL = ["--tau-max", "2500"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    assert code == 0, err
    return json.loads(out)


def code_of(capsys, *argv):
    return run(capsys, *argv)[0]


@pytest.fixture
def cache(tmp_path):
    return str(tmp_path / "cache")


# --- rayleigh / beta --------------------------------------------------------

def test_rayleigh_alpha_one_table(capsys):
    data = run_json(capsys, "rayleigh", "--alpha", "1")
    roots = {round(r["gamma"], 6): r["multiplicity"] for r in data["roots"]}
    assert roots[0.0] == 2
    for g in (2.613126, -2.613126, 1.082392, -1.082392):
        assert roots[g] == 1
    jsonschema.validate(data, load_schema("rayleigh"))


def test_rayleigh_unit_root_and_text(capsys):
    data = run_json(capsys, "rayleigh", "--alpha", "0.333333")
    assert data["unit_interval_root"] == pytest.approx(0.9194, abs=1e-4)
    code, out, _ = run(capsys, "rayleigh", "--alpha", "1")
    assert code == 0 and "root in (0,1)" in out


def test_rayleigh_bad_alpha_exit_code(capsys):
    code, out, err = run(capsys, "rayleigh", "--alpha", "-1")
    assert code == 2
    assert "error" in err and "alpha" in err


def test_beta_json_encodes_infinity(capsys):
    data = run_json(capsys, "beta", "--alpha", "1")
    assert data["beta_dir"] == pytest.approx(-2.0, abs=1e-8)
    betas = {round(e["gamma"], 6): e["beta"] for e in data["beta_free"]}
    assert betas[0.0] == "inf"
    assert code_of(capsys, "beta", "--alpha", "1.5") == 2


# --- predict ----------------------------------------------------------------

def test_predict_alpha_one_free_note(capsys, cache):
    data = run_json(capsys, "predict", "--alpha", "1", "--bc", "free", "--gamma-policy", "family",
                    "--cache-dir", cache)
    names = set(data["entries"])
    assert {"Thm3_1", "MS_limit"} <= names
    assert any(n.startswith("SV[gamma=") for n in names)
    assert any("SV_A26_as_printed" in n for n in data["notes"])
    assert data["config_hash"] == config_hash(data["effective_config"])


def test_predict_alpha_one_dirichlet_agreement(capsys):
    data = run_json(capsys, "predict", "--alpha", "1", "--bc", "dir")
    ds = [e["d"] for e in data["entries"].values() if "d" in e]
    assert len(ds) >= 3
    assert all(d == pytest.approx(-math.sqrt(math.pi) / 2, rel=1e-9) for d in ds)


def test_predict_missing_gamma_marked_absent(capsys):
    # at alpha = 1 the sextic has no root in (0, 1)
    data = run_json(capsys, "predict", "--alpha", "1", "--bc", "free")
    sv = data["entries"]["SV"]
    assert sv["absent"] is True and "no Rayleigh root" in sv["reason"]


# --- spectrum ---------------------------------------------------------------

def test_spectrum_cache_hit_is_byte_identical(capsys, cache, tmp_path):
    argv = ["spectrum", "--alpha", "0.5", "--bc", "free", *SMALL, "--cache-dir", cache]
    first = run_json(capsys, *argv)
    assert first["cache_hit"] is False
    blob = open(first["cache_path"], "rb").read()
    second = run_json(capsys, *argv, "--out-dir", str(tmp_path / "out"))
    assert second["cache_hit"] is True
    assert second["cache_path"] == first["cache_path"]
    assert open(second["cache_path"], "rb").read() == blob
    assert second["max_residual"] <= 1e-8
    assert second["zero_multiplicity"] == 3
    rows = list(csv.reader(open(tmp_path / "out" / "spectrum.csv")))
    assert rows[0] == ["tau", "multiplicity", "m", "k", "residual"]
    assert len(rows) - 1 == second["distinct"]


def test_spectrum_band_failure_exit_code(capsys, cache, tmp_path):
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps({"tolerances": {"band_slack": 1e-6}}))
    code, out, err = run(capsys, "spectrum", "--config", str(cfg), "--alpha", "0.5", *SMALL,
                         "--cache-dir", cache)
    assert code == 3
    assert "numerical failure" in err and "band" in err.lower()


def test_spectrum_bad_config_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tau_max": 1e3, "colour": "blue"}))
    assert code_of(capsys, "spectrum", "--config", str(bad)) == 2
    assert code_of(capsys, "spectrum", "--tau-max", "-3") == 2


# --- fit / adjudicate / sum rule --------------------------------------------

def test_fit_scalar_neumann(capsys, cache, tmp_path):
    out = tmp_path / "out"
    data = run_json(capsys, "fit", "--operator", "scalar_laplace", "--bc", "neu",
                    "--tau-max", "1e4", "--cache-dir", cache, "--out-dir", str(out))
    assert data["heat_d"]["estimate"] == pytest.approx(math.sqrt(math.pi) / 4, rel=0.02)
    assert data["counting_b"]["estimate"] > 0
    rows = list(csv.reader(open(out / "heat_plot.csv")))
    assert rows[0] == ["t", "Z", "Z_minus_lead_times_sqrt_t", "tail_bound"]
    jsonschema.validate(json.loads((out / "fit.json").read_text()), load_schema("fit"))


def test_adjudicate_agreement_is_indecisive(capsys, cache, tmp_path):
    out = tmp_path / "out"
    argv = ["adjudicate", "--alpha", "1", "--bc", "dir", "--tau-max", "1e4", "--cache-dir", cache,
            "--out-dir", str(out)]
    code, text, err = run(capsys, "--require-decisive", *argv)
    assert code == 4 and "not decisive" in err
    report = json.loads((out / "adjudication_report.json").read_text())
    assert report["decisive"] is False and report["winner"] is None
    assert report["scalar_control"]["passed"] is True
    assert set(report["matching"]) == set(report["distances"])
    assert code_of(capsys, *argv) == 0


def test_adjudicate_rejects_scalar_operator(capsys):
    assert code_of(capsys, "adjudicate", "--operator", "scalar_laplace") == 2


def test_sum_rule_output(capsys, cache):
    # too short a spectrum leaves no admissible fit window
    assert code_of(capsys, "sum-rule", "--alpha", "0.5", *SMALL, "--cache-dir", cache) == 3
    data = run_json(capsys, "sum-rule", "--alpha", "0.5", "--tau-max", "1e4", "--cache-dir", cache)
    assert data["stderr"] > 0
    assert data["measured_sum"] == pytest.approx(data["d_dir"] + data["d_free"])
    assert data["predicted_sums"]["Thm3_1"] == 0.0
    jsonschema.validate(data, load_schema("sum_rule"))


# --- sweep ------------------------------------------------------------------

def _sweep(capsys, *argv):
    code, out, err = run(capsys, "sweep", *argv)
    assert code == 0, err
    return list(csv.DictReader(io.StringIO(out)))


def test_sweep_row_count(capsys):
    alphas = "0.1,0.3,0.5,0.7,0.9"
    rows = _sweep(capsys, "--alphas", alphas, "--targets", "beta,SV,Thm3_1,MS_limit")
    assert len(rows) == 5 * 4
    assert list(rows[0]) == ["alpha", "bc", "target", "value", "note"]


def test_sweep_beta_dirichlet_trend(capsys):
    rows = _sweep(capsys, "--alphas", "0.1,0.3,0.5,0.7,0.9,0.99,1.0", "--bc", "dir",
                  "--targets", "beta")
    vals = [float(r["value"]) for r in rows]
    assert all(v < 0 for v in vals)
    assert vals[-1] == pytest.approx(-2.0, abs=1e-8)
    assert abs(vals[-2] + 2.0) < abs(vals[0] + 2.0)


def test_sweep_beta_free_diverges_near_one(capsys):
    alphas = [0.9, 0.99, 0.999, 0.9999]
    rows = _sweep(capsys, "--alphas", ",".join(map(str, alphas)), "--bc", "free",
                  "--targets", "beta")
    vals = [float(r["value"]) for r in rows]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 10 * vals[0]


def test_sweep_json_and_bad_target(capsys):
    data = run_json(capsys, "sweep", "--alphas", "0.5", "--targets", "beta,SV")
    assert len(data["rows"]) == 2
    jsonschema.validate(data, load_schema("sweep"))
    assert code_of(capsys, "sweep", "--alphas", "0.5", "--targets", "nonsense") == 2
    assert set(SWEEP_TARGETS) >= {"beta", "measured"}


# --- config -----------------------------------------------------------------

def test_config_hash_stable_under_reordering(tmp_path):
    a = {"bc": "free", "tau_max": 1000.0, "material": {"ct2": 1.0, "cl2": 2.0},
         "tolerances": {"band_slack": 3.0, "residual_gate": 1e-9}}
    b = {"tolerances": {"residual_gate": 1e-9, "band_slack": 3.0},
         "material": {"cl2": 2.0, "ct2": 1.0}, "tau_max": 1000.0, "bc": "free"}
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(json.dumps(a))
    pb.write_text(json.dumps(b))
    ha = config_hash(build_config(str(pa)))
    assert ha == config_hash(build_config(str(pb)))
    # output locations do not change results, so they do not change the hash
    assert ha == config_hash(build_config(str(pa), {"out_dir": str(tmp_path / "x")}))
    assert ha != config_hash(build_config(str(pa), {"tau_max": 999.0}))


def test_outputs_are_deterministic(capsys):
    first = run(capsys, "beta", "--alpha", "0.4", "--json")[1]
    assert run(capsys, "beta", "--alpha", "0.4", "--json")[1] == first
