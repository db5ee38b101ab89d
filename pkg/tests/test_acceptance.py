"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and repeated in the terminal summary
(see ``conftest.py``), so they show up even when output capture is on.
Run directly with ``python3 tests/test_acceptance.py`` for a plain listing.
"""

import json
import math
import sys
import time
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lofs import measures  # noqa: E402
from lofs.cli import main  # noqa: E402
from lofs.dataset import Dataset, Group, make_stream, write_csv  # noqa: E402
from lofs.lfi import SelectorConfig, run_selector  # noqa: E402
from lofs.lgf import run_group_selector  # noqa: E402
from lofs.measures import (  # noqa: E402
    CLASS,
    chi2_test,
    fisher_z_test,
    g2_test,
    partial_correlation,
    table_mutual_information,
)
from lofs.sc import auc_binary, friedman_test, kappa, nemenyi_cd  # noqa: E402

from synthetic import copy_dataset, gaussian_dataset, random_discrete  # noqa: E402

RESULTS = []


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    return ok


# -- oracles ------------------------------------------------------------------


def residual_partial_corr(data):
    n = data.shape[0]
    Z = np.column_stack([np.ones(n), data[:, 2:]])
    res = [data[:, c] - Z @ np.linalg.lstsq(Z, data[:, c], rcond=None)[0] for c in (0, 1)]
    return float(np.corrcoef(res[0], res[1])[0, 1])


def osfs_violations(ds, selected, alpha=0.05, max_cond=3):
    bad = 0
    for x in selected:
        others = [f for f in selected if f != x]
        if any(
            not measures.ci_test(ds, x, CLASS, z, "g2", alpha).dependent
            for k in range(min(max_cond, len(others)) + 1)
            for z in combinations(others, k)
        ):
            bad += 1
    return bad


def pair_discardable(ds, x, y):
    rel_x = measures.mutual_information(ds, x, CLASS).value
    rel_y = measures.mutual_information(ds, y, CLASS).value
    return measures.mutual_information(ds, x, y).value >= rel_x - 1e-12 and rel_y >= rel_x - 1e-12


def strip_runtime(doc):
    if isinstance(doc, dict):
        return {k: strip_runtime(v) for k, v in doc.items() if k != "runtime_ms"}
    if isinstance(doc, list):
        return [strip_runtime(v) for v in doc]
    return doc


# -- criteria -----------------------------------------------------------------


@pytest.fixture(scope="module")
def recovery_data():
    return copy_dataset(n=1000, n_noise=48, seed=0)


@pytest.fixture(scope="module")
def recovery_runs(recovery_data):
    ds = recovery_data
    runs = {}
    start = time.perf_counter()
    for algo in ("osfs", "fast_osfs", "saola"):
        runs[algo] = [run_selector(ds, make_stream(ds, order="shuffled", seed=s), algo) for s in range(100)]
    return runs, time.perf_counter() - start


def test_criterion_1_synthetic_recovery(recovery_runs):
    runs, elapsed = recovery_runs
    correct = {
        algo: sum(len(set(st.selected) & {0, 1}) == 1 and not set(st.selected) - {0, 1} for st in states)
        for algo, states in runs.items()
    }
    ok = all(c >= 95 for c in correct.values()) and elapsed < 10
    detail = ", ".join(f"{a} {c}/100" for a, c in correct.items()) + f", {elapsed:.2f} s"
    assert report(1, ok, detail), detail


def test_criterion_2_bruteforce_oracle():
    violations = 0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        d = int(rng.integers(3, 9))
        ds = random_discrete(int(rng.integers(80, 400)), d, seed, card=int(rng.integers(2, 4)))
        state = run_selector(ds, make_stream(ds, order="shuffled", seed=seed), "osfs")
        violations += osfs_violations(ds, state.selected)
    ok = violations == 0
    assert report(2, ok, f"{violations} violations over 50 datasets"), violations


def test_criterion_3_fast_osfs_efficiency(recovery_runs):
    runs, _ = recovery_runs
    pairs = [(f.n_tests, o.n_tests) for f, o in zip(runs["fast_osfs"], runs["osfs"])]
    never_more = all(f <= o for f, o in pairs)
    strictly = sum(f < o for f, o in pairs)
    ok = never_more and strictly >= 80
    detail = f"fast <= osfs on every seed: {never_more}, strictly fewer on {strictly}/100"
    assert report(3, ok, detail), detail


def test_criterion_4_measure_calibration():
    rng = np.random.default_rng(2024)
    trials = 2000
    rejected = {"chi2": 0, "g2": 0}
    for _ in range(trials):
        x, y = rng.integers(0, 2, 500), rng.integers(0, 2, 500)
        counts = np.bincount(2 * x + y, minlength=4).reshape(2, 2)
        rejected["chi2"] += chi2_test(counts, 0.05).dependent
        rejected["g2"] += g2_test(counts, 0.05).dependent
    rates = {k: v / trials for k, v in rejected.items()}
    worst = 0.0
    for _ in range(1000):
        shape = tuple(int(v) for v in rng.integers(1, 4, 3)) if rng.random() < 0.5 else (1, *rng.integers(2, 5, 2))
        counts = rng.integers(0, 12, shape)
        counts = counts[counts.sum(axis=(1, 2)) > 0]
        if counts.size == 0:
            continue
        g2 = g2_test(counts).statistic
        worst = max(worst, abs(g2 - 2 * counts.sum() * table_mutual_information(counts)))
    ok = all(0.02 <= r <= 0.08 for r in rates.values()) and worst <= 1e-9
    detail = f"chi2 rate {rates['chi2']:.4f}, g2 rate {rates['g2']:.4f}, max |G2 - 2nMI| {worst:.2e}"
    assert report(4, ok, detail), detail


def test_criterion_5_fisher_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for i in range(500):
        k = i % 4
        A = rng.normal(size=(k + 2, k + 2))
        data = rng.normal(size=(int(rng.integers(20, 200)), k + 2)) @ A
        worst = max(worst, abs(partial_correlation(data) - residual_partial_corr(data)))
    x, e = rng.normal(size=100), rng.normal(size=100)
    x = (x - x.mean()) / x.std()
    e = e - e.mean()
    e = e - (e @ x) / (x @ x) * x
    e = e / e.std()
    y = 0.5 * x + math.sqrt(0.75) * e
    ds = Dataset.from_arrays(np.column_stack([x, y]), [0, 1] * 50, feature_kinds="all_continuous")
    stat = fisher_z_test(ds, 0, 1).statistic
    ok = worst <= 1e-8 and abs(stat - 5.410) <= 1e-3
    detail = f"max partial-correlation gap {worst:.2e}, fixture statistic {stat:.4f}"
    assert report(5, ok, detail), detail


def test_criterion_6_group_constraints():
    violations = 0
    for seed in range(10):
        ds = copy_dataset(n=1000, n_noise=48, seed=seed, groups=5)
        state = run_group_selector(ds, make_stream(ds, mode="group", order="shuffled", seed=seed), SelectorConfig())
        sel = state.selected_groups
        for members in sel.values():
            violations += sum(pair_discardable(ds, a, b) or pair_discardable(ds, b, a) for a, b in combinations(members, 2))
        for g, h in combinations(sel, 2):
            violations += sum(pair_discardable(ds, a, b) or pair_discardable(ds, b, a) for a in sel[g] for b in sel[h])
        violations += sum(not m for m in sel.values())
    mismatches = 0
    for seed in range(50):
        base = copy_dataset(n=1000, n_noise=48, seed=seed)
        ds = base.with_groups([Group(f"g{j}", (j,)) for j in range(base.n_features)])
        gstream = make_stream(ds, mode="group", order="shuffled", seed=seed)
        order = tuple(ds.groups[k].features[0] for k in gstream.order)
        grouped = run_group_selector(ds, gstream, SelectorConfig()).selected
        single = run_selector(ds, make_stream(ds, order=order), "saola").selected
        mismatches += grouped != single
    ok = violations == 0 and mismatches == 0
    detail = f"{violations} constraint violations over 10 grouped runs, {mismatches}/50 singleton mismatches"
    assert report(6, ok, detail), detail


def test_criterion_7_sc_fixtures():
    strict = np.array([[0.9, 0.8, 0.7], [0.85, 0.75, 0.6], [0.95, 0.9, 0.5], [0.7, 0.65, 0.6]])
    fr = friedman_test(strict)
    k_val = kappa([[20, 5], [10, 15]])
    auc = auc_binary([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    cd_gap = max(abs(nemenyi_cd(2, n) - 1.960 / math.sqrt(n)) for n in range(1, 101))
    ok = (
        abs(fr.chi2 - 8) < 1e-12
        and abs(fr.p_value - 0.0183) <= 1e-4
        and abs(k_val - 0.4) < 1e-12
        and auc == 0.75
        and cd_gap <= 1e-3
    )
    detail = f"chi2_F {fr.chi2:g}, p {fr.p_value:.5f}, kappa {k_val:g}, AUC {auc:g}, max k=2 CD gap {cd_gap:.1e}"
    assert report(7, ok, detail), detail


def test_criterion_8_wealth_ledger():
    cfg = SelectorConfig(ai_w0=0.5, ai_dw=0.5)
    exact, first = 0, set()
    runs = 5
    for seed in range(runs):
        ds = gaussian_dataset(300, 1000, seed=seed, informative=5)
        state = run_selector(ds, make_stream(ds, order="shuffled", seed=seed), "alpha_investing", cfg)
        added = sum(e.action == "added" for e in state.arrival_log)
        ledger = Fraction(cfg.ai_w0) - sum(state.algo_state["thresholds"], Fraction(0)) + Fraction(cfg.ai_dw) * added
        exact += state.algo_state["wealth"] == ledger and len(state.algo_state["thresholds"]) == 1000
        first.add(state.algo_state["thresholds"][0])
    ok = exact == runs and first == {Fraction(1, 4)}
    detail = f"ledger exact on {exact}/{runs} runs of 1000 features, first threshold {sorted(map(float, first))}"
    assert report(8, ok, detail), detail


def _pipeline(root):
    root.mkdir()
    datasets = {
        "copy_a": copy_dataset(n=1000, n_noise=48, seed=0),
        "copy_b": copy_dataset(n=1000, n_noise=48, seed=1),
        "random": random_discrete(600, 20, seed=3),
        "gauss": gaussian_dataset(600, 30, seed=4, informative=3),
    }
    evaluated = root / "evaluated"
    evaluated.mkdir()
    for name, ds in datasets.items():
        data = root / f"{name}.csv"
        write_csv(ds, data)
        for algo in ("alpha-investing", "fast-osfs", "saola"):
            run_json = root / f"{name}.{algo}.run.json"
            assert main(["run", "--algorithm", algo, "--data", str(data), "--order", "shuffled", "--seed", "11",
                         "--output", str(run_json)]) == 0
            assert main(["eval", "--report", str(run_json), "--data", str(data), "--cv-seed", "5",
                         "--output", str(evaluated / f"{name}.{algo}.json")]) == 0
    assert main(["compare", "--reports", str(evaluated), "--metric", "accuracy",
                 "--output", str(root / "comparison.json"), "--table", str(root / "ranks.txt")]) == 0
    return {
        p.relative_to(root).as_posix(): json.dumps(strip_runtime(json.loads(p.read_text())), indent=2)
        if p.suffix == ".json" else p.read_text()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_criterion_9_end_to_end_determinism(tmp_path):
    start = time.perf_counter()
    first = _pipeline(tmp_path / "one")
    second = _pipeline(tmp_path / "two")
    elapsed = time.perf_counter() - start
    n_json = sum(name.endswith(".json") for name in first)
    ok = first == second and elapsed < 60 and n_json == 12 * 2 + 1
    detail = f"{n_json} JSON files identical: {first == second}, {elapsed:.1f} s for both executions"
    assert report(9, ok, detail), detail


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
