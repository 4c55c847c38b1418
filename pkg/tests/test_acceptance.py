"""Acceptance gate: one test per criterion, each timed against its budget.

The terminal summary prints one PASS/FAIL line per criterion (see conftest).
"""

import itertools
import json
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from mfearl.benchmarks import ProblemSpec, Suite
from mfearl.encoding import Individual, Population, random_genomes
from mfearl.harness import ExperimentConfig, read_convergence_csv, run_experiment
from mfearl.mfea_rl import build_training_batch, residual_crossover
from mfearl.nn import ResidualNet, SkillClassifier, TrainOptions, gradient_check, train_classifier, train_vdsr
from mfearl.operators import sbx_children
from mfearl.projection import JlConfig, jl_dimension, row_map_distortion, run_jl
from mfearl.stats import Decision, exact_p_value, render_table, wilcoxon_rank_sum

pytestmark = pytest.mark.acceptance


class Timer:
    def __init__(self, budget):
        self.budget = budget

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0

    def check(self, record_property):
        record_property("detail", f"{self.elapsed:.1f}s of {self.budget}s")
        assert self.elapsed < self.budget


def cec(*ids, dim=10):
    return [ProblemSpec(Suite.CEC17, p, dims=(dim, dim)) for p in ids]


@pytest.mark.criterion(1, "gradient check, depth-3 D=4 VDSR and 1-block classifier")
def test_gradient_correctness(record_property):
    rng = np.random.default_rng(1)
    with Timer(10) as t:
        vdsr = ResidualNet(4, depth=3, hidden_channels=16, seed=0)
        err_v = gradient_check(vdsr, rng.random((3, 4)), rng.random((3, 4, 4)), n_samples=None, rng=0)
        clf = SkillClassifier(4, 2, n_blocks=1, channels=8, seed=0)
        err_c = gradient_check(clf, rng.random((6, 4, 4)), np.array([0, 1] * 3), n_samples=None, rng=0)
    record_property("detail", f"max rel err vdsr {err_v:.1e}, classifier {err_c:.1e}")
    assert err_v < 1e-4 and err_c < 1e-4
    t.check(record_property)


@pytest.mark.criterion(2, "zero-head identity for compose and residual crossover")
def test_zero_residual_identity(record_property):
    rng = np.random.default_rng(2)
    with Timer(1) as t:
        net = ResidualNet(10, seed=0, zero_head=True)
        parents = rng.random((2, 10))
        x_new = net.compose(parents)
        c1, c2 = residual_crossover(x_new[0], x_new[1], rng)
    for p, x in zip(parents, x_new):
        assert all(np.array_equal(row, p) for row in x)
    assert np.array_equal(c1, parents[0]) and np.array_equal(c2, parents[1])
    t.check(record_property)


@pytest.mark.criterion(3, "VDSR epoch-5 MSE < 0.8 x epoch-1 on >= 9/10 seeds")
def test_vdsr_training_progress(record_property):
    ratios = []
    with Timer(60) as t:
        for seed in range(10):
            rng = np.random.default_rng(seed)
            genomes = random_genomes(rng, 200, 8)
            pop = Population([Individual.new(g, i % 2, 2) for i, g in enumerate(genomes)])
            batch = build_training_batch(pop, rng)
            net = ResidualNet(8, seed=seed)
            losses = train_vdsr(net, batch.vdsr_inputs, batch.vdsr_targets, TrainOptions.vdsr(), rng).losses
            ratios.append(losses[4] / losses[0])
    passed = sum(r < 0.8 for r in ratios)
    record_property("detail", f"{passed}/10 seeds, worst ratio {max(ratios):.3f}")
    assert passed >= 9
    t.check(record_property)


@pytest.mark.criterion(4, "classifier val acc >= 0.95 on clusters offset by 0.5")
def test_classifier_accuracy(record_property):
    rng = np.random.default_rng(4)
    d, n = 10, 400
    labels = np.repeat([0, 1], n // 2)
    images = 0.25 + 0.5 * labels[:, None, None] + 0.25 * rng.standard_normal((n, d, d))
    with Timer(120) as t:
        net = SkillClassifier(d, 2, seed=0)
        res = train_classifier(net, images, labels, TrainOptions.resnet(epochs=50, patience=5), rng)
    record_property("detail", f"best val acc {res.best_accuracy:.3f} at epoch {res.best_epoch}/{res.epochs_run}")
    assert res.best_accuracy >= 0.95 and res.epochs_run <= 50
    t.check(record_property)


@pytest.mark.criterion(5, "JL n=100, ambient 2500, eps=0.5: >= 99% of pairs within bounds")
def test_jl_verification(record_property):
    cfg = JlConfig(n=100, ambient_dim=2500, eps=0.5)
    assert cfg.k == jl_dimension(100, 0.5) == 148
    with Timer(30) as t:
        rep = run_jl(cfg, seed=5)[0]
    record_property("detail", f"{rep.fraction_within:.4f} of {rep.n_pairs} pairs within")
    assert rep.n_pairs == 4950 and rep.fraction_within >= 0.99
    t.check(record_property)


@pytest.mark.criterion(6, "row-map unbiasedness over 1e4 draws")
def test_row_map_unbiasedness(record_property):
    mats = np.random.default_rng(6).random((50, 10, 10))
    with Timer(10) as t:
        stats = row_map_distortion(mats, np.random.default_rng(60), trials=10_000)
    record_property("detail", f"mean ratio {stats.mean_ratio:.4f}")
    assert stats.n_draws == 10_000 and abs(stats.mean_ratio - 1) <= 0.05
    t.check(record_property)


@pytest.mark.criterion(7, "SBX pre-clamp conservation over 1e5 events")
def test_sbx_conservation(record_property):
    rng = np.random.default_rng(7)
    bad = 0
    with Timer(10) as t:
        for _ in range(100_000):
            p1, p2 = random_genomes(rng, 2, 10)
            c1, c2 = sbx_children(p1, p2, 2.0, rng)
            bad += not np.array_equal(c1 + c2, p1 + p2)
    record_property("detail", f"{bad} violations")
    assert bad == 0
    t.check(record_property)


def enumerated_p(a, b):
    """Exact two-sided p by listing every rank split."""
    n, m = len(a), len(b)
    pooled = sorted(list(a) + list(b))
    rank = {v: i + 1 for i, v in enumerate(pooled)}
    u_obs = sum(rank[v] for v in a) - n * (n + 1) // 2
    us = [sum(c) - n * (n + 1) // 2 for c in itertools.combinations(range(1, n + m + 1), n)]
    tail = min(sum(u <= u_obs for u in us), sum(u >= u_obs for u in us))
    return min(Fraction(1), Fraction(2 * tail, len(us)))


@pytest.mark.criterion(8, "Wilcoxon exact p equals enumeration for min(n,m) <= 6")
def test_wilcoxon_exactness(record_property):
    rng = np.random.default_rng(8)
    sizes = [(n, m) for n in range(1, 7) for m in range(n, 11)]
    mismatches = 0
    with Timer(30) as t:
        for i in range(100):
            n, m = sizes[i % len(sizes)]
            if i % 2:
                n, m = m, n
            values = rng.choice(1000, size=n + m, replace=False)
            a, b = values[:n].tolist(), values[n:].tolist()
            res = wilcoxon_rank_sum(a, b)
            ref = enumerated_p(a, b)
            assert res.exact
            mismatches += exact_p_value(int(res.statistic), n, m) != ref or res.p_value != float(ref)
    record_property("detail", f"{mismatches} mismatches in 100 samples")
    assert mismatches == 0
    t.check(record_property)


@pytest.mark.criterion(9, "--deterministic runs give byte-identical convergence.csv")
def test_determinism(tmp_path, record_property):
    outputs = []
    with Timer(300) as t:
        for run in ("a", "b"):
            out = tmp_path / run
            argv = [sys.executable, "-m", "mfearl.cli", "--problem", "cec17:P4", "--dim", "10",
                    "--algo", "mfea,mfea-rl:full", "--seeds", "2", "--max-evals", "3000", "--out", str(out),
                    "--deterministic"]
            proc = subprocess.run(argv, capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outputs.append((out / "convergence.csv").read_bytes())
    assert outputs[0] == outputs[1]
    t.check(record_property)


@pytest.mark.criterion(10, "D=10, 20k evals, 10 seeds: MFEA and MFEA-RL beat random search on P1 and P4")
def test_optimization_sanity(tmp_path, record_property):
    cfg = ExperimentConfig(problems=cec("P1", "P4"), algorithms=["mfea", "mfea-rl:full", "random-search"],
                           seeds=list(range(10)), reps=10, max_evals=20_000, output_dir=str(tmp_path),
                           deterministic=True, base_algorithm="random-search")
    with Timer(1800) as t:
        res = run_experiment(cfg)
    signs = {(r.problem, r.task, r.algorithm): r.sign for r in res.summary.rows if r.sign is not None}
    record_property("detail", " ".join(f"{p}-T{k + 1}:{a}={s.value}" for (p, k, a), s in sorted(signs.items())))
    for p in ("P1", "P4"):
        for task in (0, 1):
            for alg in ("mfea", "mfea-rl:full"):
                assert signs[(p, task, alg)] is Decision.PLUS, (p, task, alg)
    traces = read_convergence_csv(tmp_path / "convergence.csv")
    for (alg, _, _, _), trace in traces.items():
        if alg == "mfea-rl:full":
            best = [b for _, b in trace]
            assert all(y <= x for x, y in zip(best, best[1:]))
    retrains = [json.loads(line) for line in (tmp_path / "events.jsonl").read_text().splitlines()]
    retrains = [e for e in retrains if e["event"] == "retrain"]
    assert len(retrains) == 2 * 10 * 20 and all(e["eval_delta"] == 0 for e in retrains)
    t.check(record_property)


@pytest.mark.criterion(11, "ablation modes on P3/P4/P8/P9 at D=10 with +/-/= footer")
def test_ablation_harness(tmp_path, record_property):
    modes = ["mfea-rl:full", "mfea-rl:vdsr", "mfea-rl:res"]
    cfg = ExperimentConfig(problems=cec("P3", "P4", "P8", "P9"), algorithms=modes, seeds=list(range(5)), reps=5,
                           max_evals=5_000, output_dir=str(tmp_path), deterministic=True,
                           base_algorithm="mfea-rl:full")
    with Timer(3600) as t:
        res = run_experiment(cfg)
    traces = read_convergence_csv(tmp_path / "convergence.csv")
    assert len(traces) == 3 * 4 * 2 * 5
    for p in ("P3", "P4", "P8", "P9"):
        for task in (0, 1):
            for seed in range(5):
                grids = [[e for e, _ in traces[(m, p, task, seed)]] for m in modes]
                assert grids[0] == grids[1] == grids[2] and grids[0][-1] == 5_000
                for m in modes:
                    best = [b for _, b in traces[(m, p, task, seed)]]
                    assert np.all(np.isfinite(best)) and all(y <= x for x, y in zip(best, best[1:]))
    totals = res.summary.totals()
    assert set(totals) == {"mfea-rl:vdsr", "mfea-rl:res"} and all(sum(v) == 8 for v in totals.values())
    footer = [line for line in render_table(res.summary).splitlines() if line.startswith("+ / - / =")]
    assert len(footer) == 1
    record_property("detail", footer[0].strip())
    t.check(record_property)
