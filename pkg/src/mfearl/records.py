from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunRecord:
    """Convergence trace of one task in one (algorithm, problem, seed) run.

    ``trace`` holds ``(evals, best_objective)`` pairs, one per generation.
    """

    algorithm: str
    problem_id: str
    task_id: int
    seed: int
    trace: list = field(default_factory=list)
    final_best: float = float("inf")
    wall_time: float = 0.0

    def check(self):
        evals = [e for e, _ in self.trace]
        best = [b for _, b in self.trace]
        if any(b <= a for a, b in zip(evals, evals[1:])):
            raise AssertionError("trace evaluations are not strictly increasing")
        if any(b > a for a, b in zip(best, best[1:])):
            raise AssertionError("best objective increased along the trace")


@dataclass
class RunResult:
    """Everything one optimizer run produces."""

    records: list
    events: list = field(default_factory=list)
    evaluations: int = 0
    generations: int = 0
    best_genomes: list = field(default_factory=list)

    @property
    def final_best(self) -> np.ndarray:
        return np.array([r.final_best for r in self.records])


class BestTracker:
    """Best-so-far objective per task plus the per-generation trace."""

    def __init__(self, n_tasks: int, dim: int):
        self.best = np.full(n_tasks, np.inf)
        self.genomes = [np.full(dim, np.nan) for _ in range(n_tasks)]
        self.trace = [[] for _ in range(n_tasks)]

    def update(self, genome, task: int, value: float):
        if value < self.best[task]:
            self.best[task] = value
            self.genomes[task] = np.array(genome, dtype=float)

    def snapshot(self, evals: int):
        for j, b in enumerate(self.best):
            self.trace[j].append((int(evals), float(b)))

    def records(self, algorithm: str, problem_id: str, seed: int, wall_time: float) -> list[RunRecord]:
        return [
            RunRecord(algorithm, problem_id, j, seed, list(self.trace[j]), float(self.best[j]), wall_time)
            for j in range(len(self.best))
        ]
