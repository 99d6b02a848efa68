import json
import math

import pytest

from laminarvc import DomainError, OrderModel, save_model, type_space
from laminarvc.cli import main
from laminarvc.harness import CSV_HEADER, ExperimentConfig, csv_text, run_growth
from laminarvc.models import SetFamily, pair_equality_formula, random_ultrametric


def rows_without_ms(report):
    return [(r.model, r.formula, r.arity, r.m, r.trial, r.seed, r.type_count) for r in report.rows]


# --- config validation ----------------------------------------------------------


def test_config_validation():
    with pytest.raises(DomainError):
        ExperimentConfig("lca-ball", 3, (4, 8, 16))
    with pytest.raises(DomainError):
        ExperimentConfig("lca-ball", 1, (4, 8, 16), trials=0)
    with pytest.raises(DomainError):
        ExperimentConfig("lca-ball", 1, (8, 4, 16))
    with pytest.raises(DomainError):
        ExperimentConfig("lca-ball", 1, (4, 8))
    with pytest.raises(DomainError):
        ExperimentConfig("no-such-kind", 1, (4, 8, 16))
    assert ExperimentConfig("lca-ball", 1, (4, 8, 16)).ceiling == pytest.approx(1.15)


# --- growth runs ------------------------------------------------------------------


def small_config(**kw):
    base = dict(formula_kind="lca-ball", arity=1, sizes=(4, 8, 16), trials=2, seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_growth_rows_deterministic_across_runs(monkeypatch):
    a = run_growth(small_config())
    b = run_growth(small_config())
    assert rows_without_ms(a) == rows_without_ms(b)
    assert a.exponents == b.exponents
    monkeypatch.setenv("LAMINAR_VC_THREADS", "3")
    c = run_growth(small_config())
    assert rows_without_ms(a) == rows_without_ms(c)


def test_growth_rows_sorted_and_csv_header():
    report = run_growth(small_config())
    keys = [(r.m, r.trial) for r in report.rows]
    assert keys == sorted(keys)
    text = csv_text(report)
    assert text.splitlines()[0] == "model,formula,arity,m,trial,seed,type_count,ms"
    assert len(text.splitlines()) == 1 + len(report.rows)
    assert ",".join(CSV_HEADER) == "model,formula,arity,m,trial,seed,type_count,ms"


def test_growth_exponent_pipeline_on_exact_quadratic():
    cfg = ExperimentConfig("pair-equality", 2, (8, 16, 32), trials=2, seed=1)
    report = run_growth(cfg)
    for r in report.rows:
        assert r.type_count == 1 + r.m + math.comb(r.m, 2)
    assert report.passed  # quadratic growth sits under ceiling 2.15
    assert report.median_exponent > 1.5


def test_default_tolerance_separates_quadratic_from_cubic():
    from laminarvc import GrowthPoint, GrowthSeries, fit_codensity_exponent

    ceiling = 2 + 0.15
    quad = GrowthSeries(tuple(GrowthPoint(m, m * m, 0) for m in (8, 16, 32, 64)))
    cubic = GrowthSeries(tuple(GrowthPoint(m, m**3, 0) for m in (8, 16, 32, 64)))
    assert fit_codensity_exponent(quad).slope <= ceiling
    assert fit_codensity_exponent(cubic).slope > ceiling + 0.5  # fails decisively


def test_duplicate_parameter_columns_do_not_change_counts():
    model = OrderModel(24)
    eq = pair_equality_formula()
    B = [(3,), (7,), (11,)]
    base = type_space([eq], B, model, 2).count
    assert type_space([eq], B + [B[0]], model, 2).count == base


def test_growth_with_duplicates_flag_runs():
    report = run_growth(small_config(allow_duplicate_params=True, sizes=(4, 8, 16)))
    assert report.complete


def test_growth_cap_marks_incomplete():
    report = run_growth(small_config(cap=10))
    assert not report.complete and not report.passed


def test_growth_model_path(tmp_path):
    path = tmp_path / "m.model.json"
    save_model(random_ultrametric(32, 3, 5), path)
    report = run_growth(small_config(model_path=str(path)))
    assert report.model_label == "ultrametric-L32-s5"


def test_report_json_round_trip():
    report = run_growth(small_config())
    doc = json.loads(json.dumps(report.to_json()))
    assert doc["passed"] is True
    assert doc["rows"][0]["m"] == 4
    assert doc["median_exponent"] == pytest.approx(report.median_exponent)


# --- CLI -------------------------------------------------------------------------


def test_cli_gen_model_and_check_directed(tmp_path, capsys):
    path = tmp_path / "t.model.json"
    assert main(["gen-model", "--kind", "ultrametric", "--leaves", "12", "--seed", "4", "--out", str(path)]) == 0
    capsys.readouterr()
    assert main(["check-directed", "--model", str(path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["directed"] is True


def test_cli_check_directed_crossing_family(tmp_path, capsys):
    path = tmp_path / "crossing.model.json"
    save_model(SetFamily.of(3, [{0, 1}, {1, 2}]), path)
    assert main(["check-directed", "--model", str(path)]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"directed": False, "violation": [0, 1]}


def test_cli_check_directed_missing_file(tmp_path):
    assert main(["check-directed", "--model", str(tmp_path / "nope.model.json")]) == 2


def test_cli_growth_writes_csv(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main([
        "growth", "--formula", "lca-ball", "--arity", "1",
        "--sizes", "4,8,16", "--trials", "2", "--seed", "3", "--out", str(out), "--json",
    ])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    lines = out.read_text().splitlines()
    assert lines[0] == "model,formula,arity,m,trial,seed,type_count,ms"
    assert len(lines) == 1 + 3 * 2


def test_cli_growth_usage_error():
    assert main(["growth", "--formula", "lca-ball", "--arity", "1", "--sizes", "4,8"]) == 2


def test_cli_growth_cap_exit_code(tmp_path):
    out = tmp_path / "partial.csv"
    code = main([
        "growth", "--formula", "lca-ball", "--arity", "1",
        "--sizes", "4,8,16", "--trials", "1", "--cap", "10", "--out", str(out),
    ])
    assert code == 3


def test_cli_fullvcmin_demo(capsys):
    assert main(["fullvcmin-demo", "--b-size", "4"]) == 0
    out = capsys.readouterr().out
    assert "sum dist" in out and "FAIL" not in out
    with pytest.raises(SystemExit) as err:
        main(["fullvcmin-demo", "--b-size", "3"])
    assert err.value.code == 2


def test_cli_verify_lemmas_usage_error():
    assert main(["verify-lemmas", "--trials", "0"]) == 2


def test_cli_verify_lemmas_small_run(capsys):
    assert main(["verify-lemmas", "--trials", "2", "--seed", "5", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    names = {entry["lemma"] for entry in doc}
    assert names == {
        "directedness+linear-bound",
        "convex-ordering",
        "sum-of-distances",
        "sauer-shelah",
        "components-canonicity",
        "forest+type-determination",
        "incremental-count",
    }
    assert all(entry["failures"] == 0 for entry in doc)
