import json
import os

import numpy as np
import pytest

from gbelab.harness.cli import main
from gbelab.harness.config import (ConfigError, ExperimentConfig, parse_config, parse_sweep,
                                   serialize_config)
from gbelab.harness.experiments import SCHEMAS, exact_clt_variance, run_experiment
from gbelab.harness.results import Check, ResultTable, emit_report


def test_defaults_filled():
    c = parse_config('{"experiment": "clt", "alpha": 1}')
    assert c.n == 200 and c.replicas == 1000 and c.seed == 0 and c.W == 10.0
    assert c.zeta == 1j and c.function == "x^2" and c.workers >= 1


def test_zeta_pair():
    c = parse_config('{"experiment": "local-law", "alpha": 1, "zeta": [0.5, 2]}')
    assert c.zeta == 0.5 + 2j


@pytest.mark.parametrize("doc, path", [
    ('{"experiment": "clt", "alpha": 1, "replicas": 0}', "replicas"),
    ('{"experiment": "clt"}', "alpha"),
    ('{"experiment": "nope", "alpha": 1}', "experiment"),
    ('{"experiment": "clt", "alpha": "one"}', "alpha"),
    ('{"experiment": "clt", "alpha": 1, "n": 2.5}', "n"),
    ('{"experiment": "clt", "alpha": 1, "bogus": 3}', "bogus"),
    ('{"experiment": "clt", "alpha": 1, "tau": -1}', "tau"),
    ('{"experiment": "clt", "alpha": 1, "s": 0.5}', "s"),
    ('{"experiment": "clt", "alpha": 1, "fit_range": [1]}', "fit_range"),
    ('{"experiment": "clt", "alpha": 1', "<document>"),
    ('[1, 2]', "<root>"),
])
def test_config_errors_name_the_field(doc, path):
    with pytest.raises(ConfigError) as e:
        parse_config(doc)
    assert e.value.path == path
    assert path in str(e.value)


def test_round_trip():
    c = parse_config('{"experiment": "bulk-poisson", "alpha": 0.5, "intervals": [[0, 1], [2, 3]],'
                     ' "z": [0.1, 0.2], "seed": 7}')
    assert parse_config(serialize_config(c)) == c


def test_overrides():
    c = parse_config('{"experiment": "clt", "alpha": 1, "seed": 3}', {"seed": 9, "workers": None})
    assert c.seed == 9


def test_sweep_expansion():
    cs = parse_sweep('{"experiment": "clt", "alpha": [0.5, 1, 2], "n": [100, 200]}')
    assert [(c.n, c.alpha) for c in cs] == [(100, 0.5), (100, 1.0), (100, 2.0),
                                            (200, 0.5), (200, 1.0), (200, 2.0)]
    with pytest.raises(ConfigError):
        parse_config('{"experiment": "clt", "alpha": [1, 2]}')
    with pytest.raises(ConfigError):
        parse_sweep('{"experiment": "clt", "alpha": []}')


def test_csv_format(tmp_path):
    t = ResultTable("t", ("a", "b"), [(0.1, 1.0), (np.nan, -np.inf)], {"x": np.float64(1)})
    assert t.to_csv() == "a,b\n0.10000000000000001,1\nnan,-inf\n"
    csv_path, json_path = t.write(str(tmp_path / "out"))
    with open(csv_path, "rb") as fh:
        assert b"\r" not in fh.read()
    meta = json.load(open(json_path))
    assert meta["columns"] == ["a", "b"] and meta["metadata"]["x"] == 1.0
    with pytest.raises(ValueError):
        ResultTable("bad", ("a",), [(1.0, 2.0)])


def test_emit_report():
    assert emit_report([]) == ("no checks run\n", 0)
    ok = ResultTable("x", ("a",), [(1.0,)], checks=[Check("fine", True)])
    bad = ResultTable("y", ("a",), [(1.0,)], checks=[Check("broken", False, "detail")])
    text, status = emit_report([ok])
    assert status == 0 and "[PASS] x: fine" in text
    text, status = emit_report([ok, bad])
    assert status == 1 and "[FAIL] y: broken (detail)" in text and "1 passed, 1 failed" in text


def test_exact_clt_variance():
    assert exact_clt_variance("x", 10, 3.0) == 1.0
    assert exact_clt_variance("x^2", 200, 1.0) == pytest.approx(3.99)
    assert np.isnan(exact_clt_variance("x^3", 200, 1.0))


@pytest.mark.parametrize("doc", [
    {"experiment": "dos-table", "alpha": 1, "emin": -1, "emax": 1, "N": 2000},
    {"experiment": "global-law", "alpha": 1, "n": 400, "replicas": 300},
    {"experiment": "clt", "alpha": 1, "n": 50, "replicas": 300, "function": "x"},
    {"experiment": "sigma2-identity", "alpha": 1, "n": 50, "replicas": 300, "function": "x",
     "grid_size": 5, "n_iid": 50, "replicas_iid": 300},
    {"experiment": "local-law", "alpha": 1, "n": 100, "replicas": 100},
    {"experiment": "bulk-poisson", "alpha": 1, "n": 100, "replicas": 100},
    {"experiment": "wegner-minami", "alpha": 1, "n": 50, "replicas": 100, "minami_n": 40,
     "minami_replicas": 100, "block_length": 20},
    {"experiment": "green-decay", "alpha": 1, "n": 60, "replicas": 100, "max_distance": 30,
     "fit_range": [5, 30]},
])
def test_every_experiment_runs(doc, tmp_path):
    doc = dict(doc, out=str(tmp_path), workers=1)
    t = run_experiment(parse_config(json.dumps(doc)))
    assert t.columns == SCHEMAS[doc["experiment"]]
    assert t.rows.shape[0] >= 1 and t.checks
    header = open(tmp_path / f"{doc['experiment']}.csv").readline().strip()
    assert header == ",".join(SCHEMAS[doc["experiment"]])
    meta = json.load(open(tmp_path / f"{doc['experiment']}.json"))
    assert meta["metadata"]["seed"] == 0 and "wall_time_s" in meta["metadata"]


def test_determinism_across_workers(tmp_path):
    doc = '{"experiment": "clt", "alpha": 1, "n": 80, "replicas": 700, "function": "x^3"}'
    a = run_experiment(parse_config(doc, {"workers": 1}), write=False).to_csv()
    b = run_experiment(parse_config(doc, {"workers": 3}), write=False).to_csv()
    c = run_experiment(parse_config(doc, {"workers": 1, "seed": 1}), write=False).to_csv()
    assert a == b and a != c


def _write(tmp_path, doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_cli_run_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, {"experiment": "clt", "alpha": 1, "n": 50, "replicas": 400,
                             "function": "x"})
    assert main(["run", "--config", good, "--out", str(tmp_path / "r"), "--workers", "1"]) == 0
    assert os.path.exists(tmp_path / "r" / "clt.csv")
    bad = _write(tmp_path, {"experiment": "clt", "alpha": 1, "replicas": 0})
    assert main(["run", "--config", bad]) == 2
    assert "replicas" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["frobnicate"]) == 2


def test_cli_run_reports_failure(tmp_path):
    # a dos table with a coarse truncation oracle fails its agreement check
    cfg = _write(tmp_path, {"experiment": "dos-table", "alpha": 1, "emin": 0, "emax": 0.5,
                            "N": 100, "eta": 0.5, "out": str(tmp_path / "r")})
    assert main(["run", "--config", cfg]) == 1


def test_cli_sweep(tmp_path, capsys):
    cfg = _write(tmp_path, {"experiment": "clt", "alpha": [0.5, 1], "n": 40, "replicas": 300,
                            "function": "x", "out": str(tmp_path / "s"), "workers": 1})
    main(["run", "--config", cfg])
    assert sorted(os.listdir(tmp_path / "s")) == ["clt-000.csv", "clt-000.json",
                                                 "clt-001.csv", "clt-001.json"]


def test_cli_dos(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["dos", "--alpha", "1", "--emin", "-1", "--emax", "1", "--step", "1",
                 "--N", "1000", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "E,dos,theta_E,dos_via_truncation" and len(lines) == 4
    assert main(["dos", "--alpha", "1", "--step", "0", "--out", str(out)]) == 2


def test_cli_help_lists_schemas(capsys):
    assert main(["--help"]) == 0
    text = capsys.readouterr().out
    for name, cols in SCHEMAS.items():
        assert f"{name}: {','.join(cols)}" in text


def test_cli_check_only(capsys):
    assert main(["check", "--only", "1"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]  1." in out
    assert main(["check", "--only", "x"]) == 2


def test_config_dataclass_is_frozen():
    c = ExperimentConfig("clt", 1.0)
    with pytest.raises(Exception):
        c.n = 3
