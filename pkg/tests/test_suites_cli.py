import csv
import io
import json

import pytest

from besselsq.cli import CSV_COLUMNS, main, reports_from_json, reports_to_csv, reports_to_json
from besselsq.errors import ConfigError
from besselsq.suites import REGISTRY, SUITES, checks_of, load_config, register, run_suite


def _write(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return str(p)


def test_every_check_in_exactly_one_suite():
    seen = [name for s in SUITES for name in checks_of(s)]
    assert sorted(seen) == sorted(REGISTRY)
    assert len(seen) == len(set(seen))


def test_duplicate_registration_rejected():
    with pytest.raises(ValueError):
        register("gamma", "mc_coverage")(lambda cfg: [])


@pytest.mark.parametrize("data", [
    {"suite": "identities"},
    {"suite": "identities", "seed": 0, "lambdas": []},
    {"suite": "identities", "seed": 0, "lambdas": [0.5]},
    {"suite": "identities", "seed": 0, "grid": {"x_min": 2.0, "x_max": 1.0}},
    {"suite": "identities", "seed": 0, "checks": ["mc_coverage"]},
    {"suite": "nope", "seed": 0},
    {"seed": 0},
    {"suite": "gamma", "seed": 0, "samples": 10},
    {"suite": "gamma", "seed": 0, "unexpected": 1},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        load_config(data)


def test_cli_overrides_config():
    cfg = load_config({"suite": "gamma", "seed": 1}, seed=7, threads=2)
    assert cfg.seed == 7 and cfg.threads == 2 and cfg.suite == "gamma"


def test_exit_code_2_on_bad_config(tmp_path, capsys):
    assert main(["run", "--config", _write(tmp_path, {"suite": "identities", "seed": 0, "lambdas": []})]) == 2
    assert main(["run", "--suite", "identities"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_writes_csv_and_json(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--suite", "identities", "--seed", "0", "--checks", "poisson_closed_form",
                 "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(io.StringIO((out / "identities.csv").read_text())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1][0] == "identities" and rows[1][-1] == "pass"
    reps = reports_from_json((out / "identities.json").read_text())
    assert reps[0].seed == 0 and reps[0].passed


def test_failing_case_gives_exit_1(tmp_path, capsys):
    cfg = {"suite": "identities", "seed": 0, "checks": ["poisson_closed_form"],
           "tolerances": {"poisson_closed_form": 1e-30}, "out": str(tmp_path)}
    assert main(["run", "--config", _write(tmp_path, cfg)]) == 1
    assert "poisson_closed_form/lam=1" in capsys.readouterr().err


def test_seeded_runs_are_identical():
    cfg = load_config({"suite": "gamma", "seed": 3, "checks": ["mc_coverage"]})
    a, b = run_suite(cfg), run_suite(cfg)
    strip = lambda rs: [{k: v for k, v in r.to_dict().items() if k != "runtime"} for r in rs]
    assert strip(a) == strip(b)


def test_thread_pool_gives_same_reports():
    base = {"suite": "envelopes", "seed": 0, "lambdas": [1.0], "checks": ["H59", "H43"]}
    one = run_suite(load_config(base))
    two = run_suite(load_config({**base, "threads": 2}))
    assert [r.value for r in one] == [r.value for r in two]


def test_empty_report_list_serializes():
    assert reports_to_csv([]).strip() == ",".join(CSV_COLUMNS)
    assert reports_from_json(reports_to_json([])) == []


def test_plots_flag_writes_script(tmp_path):
    code = main(["run", "--suite", "envelopes", "--seed", "0", "--checks", "H59", "--out", str(tmp_path),
                 "--plots"])
    assert code == 0
    script = (tmp_path / "plot_envelopes.py").read_text()
    assert "envelopes.json" in script
    compile(script, "plot_envelopes.py", "exec")


def test_list_suites(capsys):
    assert main(["list-suites"]) == 0
    out = capsys.readouterr().out
    for s in SUITES:
        assert out.count(f"{s}:") == 1
