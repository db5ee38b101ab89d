import json
import re

import numpy as np
import pytest

from lofs.cli import ALGORITHM_FLAGS, build_parser, main
from lofs.dataset import write_csv
from lofs.lfi import SelectorConfig

from synthetic import copy_dataset, gaussian_dataset


def strip_runtime(doc):
    if isinstance(doc, dict):
        return {k: strip_runtime(v) for k, v in doc.items() if k != "runtime_ms"}
    if isinstance(doc, list):
        return [strip_runtime(v) for v in doc]
    return doc


@pytest.fixture
def data_csv(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(copy_dataset(n=300, n_noise=6, seed=1), path)
    return path


@pytest.fixture
def groups_json(tmp_path):
    path = tmp_path / "g.json"
    groups = [{"name": "G1", "features": [0, 1]}, {"name": "G2", "features": [2, 3, 4]}, {"name": "G3", "features": [5, 6, 7]}]
    path.write_text(json.dumps({"groups": groups}))
    return path


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_run_writes_report(tmp_path, data_csv, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["run", "--algorithm", "fast-osfs", "--data", data_csv, "--alpha", "0.05",
                          "--order", "shuffled", "--seed", "7", "--output", out], capsys)
    assert code == 0
    report = json.loads(out.read_text())
    assert report["algorithm"] == "fast_osfs"
    assert report["stream"]["seed"] == 7 and sorted(report["stream"]["order"]) == list(range(8))
    assert len(set(report["selected"]) & {0, 1}) == 1
    assert len(report["arrival_trace"]) == 8
    assert report["metrics"] is None
    assert report["n_tests_executed"] >= report["n_tests_computed"] > 0


@pytest.mark.parametrize("flag", sorted(ALGORITHM_FLAGS))
def test_every_algorithm_runs(tmp_path, data_csv, groups_json, flag, capsys):
    args = ["run", "--algorithm", flag, "--data", data_csv, "--no-trace"]
    if flag == "group-saola":
        args += ["--groups", groups_json]
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    report = json.loads(out)
    assert "arrival_trace" not in report
    if flag == "alpha-investing":
        assert report["wealth"] >= 0
    if flag == "group-saola":
        assert set(report["selected_groups"]) <= {"G1", "G2", "G3"}


def test_run_twice_identical(tmp_path, data_csv, capsys):
    docs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["run", "--algorithm", "saola", "--data", str(data_csv), "--order", "shuffled", "--seed", "3",
                     "--output", str(out)]) == 0
        docs.append(strip_runtime(json.loads(out.read_text())))
    assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)


def test_group_mode_without_groups(data_csv, capsys):
    code, out, err = run_cli(["run", "--algorithm", "group-saola", "--data", data_csv], capsys)
    assert code == 2
    assert err.strip() == "error: group mode requires --groups"
    assert out == ""


def test_group_check_happens_before_loading(tmp_path, capsys):
    code, _, err = run_cli(["run", "--algorithm", "group-saola", "--data", tmp_path / "missing.csv"], capsys)
    assert code == 2 and "requires --groups" in err


@pytest.mark.parametrize(
    "args, code",
    [
        (["run", "--algorithm", "osfs", "--data", "MISSING"], 3),
        (["run", "--algorithm", "osfs", "--data", "DATA", "--alpha", "2"], 2),
        (["run", "--algorithm", "osfs", "--data", "DATA", "--measure", "mi"], 2),
        (["run", "--algorithm", "nope", "--data", "DATA"], 2),
        (["run", "--algorithm", "osfs", "--data", "DATA", "--bogus"], 2),
        (["eval", "--report", "MISSING", "--data", "DATA"], 3),
        (["compare", "--reports", "MISSING"], 3),
    ],
)
def test_exit_codes(tmp_path, data_csv, args, code, capsys):
    args = [str(tmp_path / "nope.csv") if a == "MISSING" else str(data_csv) if a == "DATA" else a for a in args]
    got, _, err = run_cli(args, capsys)
    assert got == code
    lines = err.strip().splitlines()
    assert lines[-1].startswith("error:")


def test_parse_error_reports_row(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,class\n1,2,0\n1,1\n")
    code, _, err = run_cli(["run", "--algorithm", "osfs", "--data", bad], capsys)
    assert code == 3 and "row 3" in err


def test_eval_and_compare(tmp_path, capsys):
    reports = tmp_path / "reports"
    reports.mkdir()
    for d in range(3):
        data = tmp_path / f"data{d}.csv"
        ds = copy_dataset(n=200, n_noise=5, seed=d)
        write_csv(ds, data)
        for flag in ("osfs", "saola"):
            run_path = tmp_path / f"run_{d}_{flag}.json"
            assert main(["run", "--algorithm", flag, "--data", str(data), "--output", str(run_path)]) == 0
            out = reports / f"{d}_{flag}.json"
            assert main(["eval", "--report", str(run_path), "--data", str(data), "--folds", "5",
                         "--output", str(out)]) == 0
            doc = json.loads(out.read_text())
            assert doc["metrics"]["accuracy"] == 1.0
            assert doc["evaluation"]["folds"] == 5
    capsys.readouterr()
    code, out, _ = run_cli(["compare", "--reports", reports, "--metric", "accuracy"], capsys)
    assert code == 0
    table, _, body = out.partition("\n{")
    comparison = json.loads("{" + body)
    assert comparison["friedman_chi2"] == 0.0
    assert comparison["datasets"] == ["data0", "data1", "data2"]
    assert "average" in table


def test_eval_empty_selection(tmp_path, capsys):
    data = tmp_path / "g.csv"
    write_csv(gaussian_dataset(60, 3, seed=0, informative=0), data)
    report = tmp_path / "r.json"
    report.write_text(json.dumps({"algorithm": "osfs", "selected": [], "feature_names": [], "n_features": 3}))
    code, out, _ = run_cli(["eval", "--report", report, "--data", data, "--folds", "3"], capsys)
    assert code == 0
    metrics = json.loads(out)["metrics"]
    assert metrics["auc"] == 0.5 and metrics["kappa"] == 0.0 and metrics["compactness"] == 0


def test_eval_rejects_mismatched_dataset(tmp_path, data_csv, capsys):
    report = tmp_path / "r.json"
    report.write_text(json.dumps({"algorithm": "osfs", "selected": [0], "feature_names": ["zzz"], "n_features": 8}))
    code, _, err = run_cli(["eval", "--report", report, "--data", data_csv], capsys)
    assert code == 3 and err.startswith("error:")


def test_eval_too_many_folds(tmp_path, data_csv, capsys):
    report = tmp_path / "r.json"
    main(["run", "--algorithm", "osfs", "--data", str(data_csv), "--output", str(report)])
    code, _, err = run_cli(["eval", "--report", report, "--data", data_csv, "--folds", "301"], capsys)
    assert code == 2 and "--folds" in err


def test_eval_select_per_fold(tmp_path, data_csv, capsys):
    report = tmp_path / "r.json"
    main(["run", "--algorithm", "fast-osfs", "--data", str(data_csv), "--output", str(report)])
    capsys.readouterr()
    code, out, _ = run_cli(["eval", "--report", report, "--data", data_csv, "--folds", "3", "--select-per-fold"],
                           capsys)
    assert code == 0
    assert all(d["n_selected"] == 1 for d in json.loads(out)["evaluation"]["fold_details"])


def test_compare_needs_evaluated_reports(tmp_path, data_csv, capsys):
    for flag in ("osfs", "saola"):
        main(["run", "--algorithm", flag, "--data", str(data_csv), "--output", str(tmp_path / f"{flag}.json")])
    code, _, err = run_cli(["compare", "--reports", tmp_path / "osfs.json", tmp_path / "saola.json"], capsys)
    assert code == 2 and "eval" in err


def test_inputs_not_mutated(tmp_path, data_csv, capsys):
    before = data_csv.read_bytes()
    report = tmp_path / "r.json"
    main(["run", "--algorithm", "saola", "--data", str(data_csv), "--output", str(report)])
    rep_before = report.read_bytes()
    main(["eval", "--report", str(report), "--data", str(data_csv), "--folds", "3", "--output", str(tmp_path / "e.json")])
    assert data_csv.read_bytes() == before
    assert report.read_bytes() == rep_before


def test_help_lists_defaults():
    parser = build_parser()
    run_parser = parser._subparsers._group_actions[0].choices["run"]
    options = run_parser.format_help().split("options:", 1)[1]
    entries = {e.split()[0].rstrip(","): " ".join(e.split()) for e in re.split(r"\n  (?=-)", options) if e.strip()}
    defaults = SelectorConfig()
    for flag, value in [("--alpha", defaults.alpha), ("--max-cond-size", defaults.max_cond_size),
                        ("--saola-delta", defaults.saola_delta), ("--ai-w0", defaults.ai_w0),
                        ("--ai-dw", defaults.ai_dw)]:
        assert entries[flag].endswith(f"(default: {value})"), entries[flag]
    for action in run_parser._actions:
        assert action.option_strings[0] in entries


def test_help_exits_zero(capsys):
    assert main(["run", "--help"]) == 0
    assert "--algorithm" in capsys.readouterr().out


def test_shuffled_order_reproducible_via_stream_order(tmp_path, data_csv, capsys):
    orders = []
    for seed in (5, 5, 6):
        code, out, _ = run_cli(["run", "--algorithm", "osfs", "--data", data_csv, "--order", "shuffled",
                                "--seed", seed, "--no-trace"], capsys)
        orders.append(json.loads(out)["stream"]["order"])
    assert orders[0] == orders[1] != orders[2]


def test_arff_input_with_inline_groups(tmp_path, capsys):
    rng = np.random.default_rng(0)
    f = rng.integers(0, 2, 40)
    lines = ["@relation t", "% @group A a,b", "% @group B c", "@attribute a {0,1}", "@attribute b {0,1}",
             "@attribute c {0,1}", "@attribute class {0,1}", "@data"]
    lines += [f"{v},{v},{w},{v}" for v, w in zip(f, rng.integers(0, 2, 40))]
    path = tmp_path / "t.arff"
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(["run", "--algorithm", "group-saola", "--data", path], capsys)
    assert code == 0
    assert json.loads(out)["selected_groups"] == {"A": [0]}
