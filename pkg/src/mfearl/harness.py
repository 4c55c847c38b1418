"""Experiment orchestration: problem x algorithm x seed cells, logs and summaries.

Output files written to ``output_dir``:

``convergence.csv``
    algorithm, problem, task, seed, evals, best_objective (one row per generation).
``summary.csv``
    see :func:`mfearl.stats.write_summary_csv`.
``events.jsonl``
    one JSON object per event. ``{"event": "generation", algorithm, problem,
    seed, generation, evals, best: [per task], fallback_crossovers, repairs}``
    for every generation (the last two only for MFEA-RL) and
    ``{"event": "retrain", algorithm, problem, seed, generation, vdsr_loss,
    classifier_skipped, classifier_val_acc, classifier_best_epoch,
    eval_delta}`` for every network retraining.
``config.echo``
    the resolved configuration as flat ``key = value`` lines.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .benchmarks import EvalCounter, ProblemSpec, evaluate_task
from .encoding import decode, random_genomes
from .exceptions import BudgetError
from .mfea import MfeaConfig, run_mfea
from .mfea_rl import Mode, MfeaRlConfig, run_mfea_rl
from .records import BestTracker, RunResult
from .stats import render_table, summarize, write_summary_csv

ALGORITHMS = ("mfea", "mfea-rl:full", "mfea-rl:vdsr", "mfea-rl:res", "random-search")
ALIASES = {"mfea-rl": "mfea-rl:full"}


def canonical_algorithm(name: str) -> str:
    name = ALIASES.get(name.strip().lower(), name.strip().lower())
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return name


@dataclass
class ExperimentConfig:
    problems: list
    algorithms: list = field(default_factory=lambda: ["mfea", "mfea-rl:full"])
    seeds: list = field(default_factory=lambda: list(range(30)))
    max_evals: int = 50_000
    reps: int = 30
    output_dir: str = "results"
    deterministic: bool = False
    population_size: int = 100
    base_seed: int = 0
    data_dir: str | None = None
    base_algorithm: str | None = None
    jobs: int = 1

    def __post_init__(self):
        self.algorithms = [canonical_algorithm(a) for a in self.algorithms]
        if not self.problems:
            raise ValueError("at least one problem is required")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        self.seeds = [int(s) for s in self.seeds]
        # More reps than listed seeds: continue counting after the largest seed.
        while len(self.seeds) < self.reps:
            self.seeds.append(max(self.seeds) + 1)
        if self.max_evals < self.population_size:
            raise BudgetError(f"max_evals={self.max_evals} is below the population size {self.population_size}")
        if self.base_algorithm is not None:
            self.base_algorithm = canonical_algorithm(self.base_algorithm)

    @property
    def base(self) -> str:
        if self.base_algorithm:
            return self.base_algorithm
        return "mfea" if "mfea" in self.algorithms else self.algorithms[0]

    def echo(self) -> str:
        lines = {
            "problem": ",".join(p.label for p in self.problems),
            "algo": ",".join(self.algorithms),
            "seeds": ",".join(str(s) for s in self.seeds),
            "max-evals": self.max_evals,
            "reps": self.reps,
            "out": self.output_dir,
            "deterministic": str(self.deterministic).lower(),
            "population-size": self.population_size,
            "base-seed": self.base_seed,
            "data-dir": self.data_dir or "",
            "base": self.base,
            "jobs": 1 if self.deterministic else self.jobs,
        }
        return "".join(f"{k} = {v}\n" for k, v in lines.items())


def cell_seed(base_seed: int, problem_id: str, algorithm: str, rep: int) -> int:
    """Order-free per-cell seed: a hash of the cell coordinates."""
    key = f"{base_seed}|{problem_id}|{algorithm}|{rep}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def run_random_search(problem, max_evals: int, seed: int, population_size: int = 100, counter=None) -> RunResult:
    """Uniform sampling in the unified space; sample ``i`` is evaluated on task ``i % T``."""
    if max_evals < population_size:
        raise BudgetError(f"max_evals={max_evals} is below the population size {population_size}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    counter = counter if counter is not None else EvalCounter()
    t, d = problem.n_tasks, problem.unified_dim
    tracker = BestTracker(t, d)
    start, gen, events = counter.count, 0, []
    while counter.count - start + population_size <= max_evals:
        for i, g in enumerate(random_genomes(rng, population_size, d)):
            task = problem.tasks[i % t]
            tracker.update(g, i % t, evaluate_task(task, decode(g, task), counter))
        tracker.snapshot(counter.count - start)
        events.append({"event": "generation", "algorithm": "random-search", "problem": problem.name, "seed": seed,
                       "generation": gen, "evals": counter.count - start, "best": [float(b) for b in tracker.best]})
        gen += 1
    wall = time.perf_counter() - t0
    return RunResult(tracker.records("random-search", problem.name, seed, wall), events, counter.count - start, gen,
                     [g.copy() for g in tracker.genomes])


def run_algorithm(algorithm: str, problem, max_evals: int, seed: int, population_size: int = 100) -> RunResult:
    algorithm = canonical_algorithm(algorithm)
    if algorithm == "random-search":
        return run_random_search(problem, max_evals, seed, population_size)
    if algorithm == "mfea":
        return run_mfea(problem, MfeaConfig(population_size=population_size, max_evals=max_evals), seed)
    mode = Mode(algorithm.split(":")[1])
    cfg = MfeaRlConfig(population_size=population_size, max_evals=max_evals, mode=mode)
    return run_mfea_rl(problem, cfg, seed, algorithm=algorithm)


@dataclass(frozen=True)
class Cell:
    spec: ProblemSpec
    algorithm: str
    rep: int
    seed: int  # user-level seed shared by all algorithms in this replicate
    run_seed: int  # derived RNG seed for this cell
    max_evals: int
    population_size: int
    data_dir: str | None


def _run_cell(cell: Cell):
    problem = cell.spec.build(cell.data_dir)
    result = run_algorithm(cell.algorithm, problem, cell.max_evals, cell.run_seed, cell.population_size)
    for r in result.records:
        r.seed = cell.seed
        r.problem_id = cell.spec.label
    for e in result.events:
        e["seed"] = cell.seed
        e["problem"] = cell.spec.label
    result.__dict__.pop("networks", None)
    return result


def make_cells(config: ExperimentConfig) -> list[Cell]:
    cells = []
    for spec in config.problems:
        for alg in config.algorithms:
            for rep, seed in enumerate(config.seeds[: config.reps]):
                run_seed = cell_seed(config.base_seed, spec.label, alg, seed)
                cells.append(Cell(spec, alg, rep, seed, run_seed, config.max_evals, config.population_size,
                                  config.data_dir))
    return cells


def check_writable(path) -> Path:
    """Create ``path`` if needed and prove it accepts files; raises OSError otherwise."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    fd, probe = tempfile.mkstemp(dir=out, prefix=".probe")
    os.close(fd)
    os.unlink(probe)
    return out


@dataclass
class ExperimentResult:
    records: list
    events: list
    summary: object
    output_dir: Path


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentResult:
    """Run every (problem, algorithm, seed) cell and write the four output files.

    Cells are independent: each derives its RNG seed from its coordinates, so
    results do not depend on execution order or on ``config.jobs``.
    """
    out = check_writable(config.output_dir)
    cells = make_cells(config)
    jobs = 1 if config.deterministic else max(1, config.jobs)
    if jobs == 1:
        results = []
        for cell in cells:
            results.append(_run_cell(cell))
            if progress:
                progress(cell, results[-1])
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    records = [r for res in results for r in res.records]
    events = [e for res in results for e in res.events]
    write_convergence_csv(records, out / "convergence.csv")
    with open(out / "events.jsonl", "w") as fh:
        for e in events:
            fh.write(json.dumps(e, sort_keys=True) + "\n")
    summary = summarize(records, config.base)
    write_summary_csv(summary, out / "summary.csv")
    (out / "config.echo").write_text(config.echo())
    return ExperimentResult(records, events, summary, out)


def write_convergence_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "problem", "task", "seed", "evals", "best_objective"])
        for r in records:
            for evals, best in r.trace:
                w.writerow([r.algorithm, r.problem_id, r.task_id, r.seed, evals, repr(best)])


def read_convergence_csv(path) -> dict:
    """``{(algorithm, problem, task, seed): [(evals, best), ...]}``."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["algorithm"], row["problem"], int(row["task"]), int(row["seed"]))
            out.setdefault(key, []).append((int(row["evals"]), float(row["best_objective"])))
    return out


__all__ = [
    "ALGORITHMS",
    "Cell",
    "ExperimentConfig",
    "ExperimentResult",
    "canonical_algorithm",
    "cell_seed",
    "check_writable",
    "make_cells",
    "read_convergence_csv",
    "render_table",
    "run_algorithm",
    "run_experiment",
    "run_random_search",
    "write_convergence_csv",
]
