"""Canonical multifactorial evolutionary algorithm (the SBX baseline)."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .benchmarks import EvalCounter, evaluate_task
from .encoding import Individual, MultitaskProblem, Population, decode, random_genomes, snap_genome
from .exceptions import BudgetError
from .operators import (
    Mating,
    assortative_mating,
    boundary_repair,
    polynomial_mutation,
    sbx_crossover,
    select_next_generation,
)
from .records import BestTracker, RunResult


@dataclass
class MfeaConfig:
    population_size: int = 100
    rmp: float = 0.3
    sbx_eta: float = 2.0
    mutation_eta: float = 5.0
    mutation_rate: float | None = None  # None -> 1 / unified dimension
    max_evals: int = 50_000

    def __post_init__(self):
        if not 0.0 <= self.rmp <= 1.0:
            raise ValueError("rmp must lie in [0, 1]")
        if self.population_size < 2 or self.population_size % 2:
            raise ValueError("population_size must be an even number >= 2")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")

    def check_budget(self):
        if self.max_evals < self.population_size:
            raise BudgetError(f"max_evals={self.max_evals} is below the population size {self.population_size}")

    def rate_for(self, dim: int) -> float:
        return 1.0 / dim if self.mutation_rate is None else self.mutation_rate

    def as_dict(self) -> dict:
        return asdict(self)


class Evaluator:
    """Evaluates individuals on their skill task only, tracking the best."""

    def __init__(self, problem: MultitaskProblem, counter: EvalCounter, tracker: BestTracker):
        self.problem = problem
        self.counter = counter
        self.tracker = tracker

    def __call__(self, members: list[Individual]):
        t = self.problem.n_tasks
        for ind in members:
            task = self.problem.tasks[ind.skill_factor]
            value = evaluate_task(task, decode(ind.genome, task), self.counter)
            ind.factorial_costs = np.full(t, np.inf)
            ind.factorial_costs[ind.skill_factor] = value
            self.tracker.update(ind.genome, ind.skill_factor, value)


def initial_population(problem: MultitaskProblem, n: int, rng: np.random.Generator) -> Population:
    """Uniform genomes with skill factors dealt round-robin over the tasks."""
    genomes = random_genomes(rng, n, problem.unified_dim)
    return Population([Individual.new(g, i % problem.n_tasks, problem.n_tasks) for i, g in enumerate(genomes)])


def mating_pairs(n: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    return perm.reshape(-1, 2)


def finish(tracker: BestTracker, algorithm: str, problem: MultitaskProblem, seed, counter, gen, events, t0):
    wall = time.perf_counter() - t0
    return RunResult(
        records=tracker.records(algorithm, problem.name, seed, wall),
        events=events,
        evaluations=counter.count,
        generations=gen + 1,
        best_genomes=[g.copy() for g in tracker.genomes],
    )


def generation_event(algorithm, problem, seed, gen, counter, tracker, **extra) -> dict:
    event = {
        "event": "generation",
        "algorithm": algorithm,
        "problem": problem.name,
        "seed": seed,
        "generation": gen,
        "evals": counter.count,
        "best": [float(b) for b in tracker.best],
    }
    event.update(extra)
    return event


def run_mfea(problem: MultitaskProblem, config: MfeaConfig | None = None, seed: int = 0, counter=None, algorithm="mfea"):
    """Run the baseline MFEA until the next generation would exceed ``max_evals``.

    Crossover children inherit the skill of a uniformly chosen parent;
    mutated children keep their parent's skill. Every generation costs
    ``population_size`` evaluations.
    """
    config = config or MfeaConfig()
    config.check_budget()
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    counter = counter if counter is not None else EvalCounter()
    n, d = config.population_size, problem.unified_dim
    rate = config.rate_for(d)
    tracker = BestTracker(problem.n_tasks, d)
    evaluate = Evaluator(problem, counter, tracker)
    events = []

    pop = initial_population(problem, n, rng)
    start = counter.count
    evaluate(pop.members)
    tracker.snapshot(counter.count - start)
    events.append(generation_event(algorithm, problem, seed, 0, counter, tracker))

    gen = 0
    while counter.count - start + n <= config.max_evals:
        offspring = []
        for i, j in mating_pairs(n, rng):
            a, b = pop[i], pop[j]
            if assortative_mating(a, b, config.rmp, rng) is Mating.CROSSOVER:
                c1, c2 = sbx_crossover(a.genome, b.genome, config.sbx_eta, rng)
                s1 = (a, b)[rng.integers(2)].skill_factor
                s2 = (a, b)[rng.integers(2)].skill_factor
            else:
                c1 = polynomial_mutation(a.genome, config.mutation_eta, rate, rng)
                c2 = polynomial_mutation(b.genome, config.mutation_eta, rate, rng)
                s1, s2 = a.skill_factor, b.skill_factor
            for c, s in ((c1, s1), (c2, s2)):
                g, _ = boundary_repair(c, rng)
                offspring.append(Individual.new(snap_genome(g), s, problem.n_tasks))
        evaluate(offspring)
        gen += 1
        pop = select_next_generation(Population(pop.members + offspring, generation=gen), n)
        tracker.snapshot(counter.count - start)
        events.append(generation_event(algorithm, problem, seed, gen, counter, tracker))
    return finish(tracker, algorithm, problem, seed, counter, gen, events, t0)


class MFEA(BaseEstimator):
    """Estimator-style wrapper: ``MFEA(...).fit(problem)``.

    After fitting, ``result_`` holds the :class:`RunResult`, ``best_f_`` the
    best objective per task and ``best_x_`` the decoded best solutions.
    """

    def __init__(self, population_size=100, rmp=0.3, sbx_eta=2.0, mutation_eta=5.0, mutation_rate=None,
                 max_evals=50_000, random_state=0):
        self.population_size = population_size
        self.rmp = rmp
        self.sbx_eta = sbx_eta
        self.mutation_eta = mutation_eta
        self.mutation_rate = mutation_rate
        self.max_evals = max_evals
        self.random_state = random_state

    def _config(self) -> MfeaConfig:
        return MfeaConfig(self.population_size, self.rmp, self.sbx_eta, self.mutation_eta, self.mutation_rate,
                          self.max_evals)

    def fit(self, problem: MultitaskProblem, y=None):
        self.result_ = run_mfea(problem, self._config(), seed=self.random_state)
        _store_solution(self, problem)
        return self


def _store_solution(est, problem):
    est.best_f_ = est.result_.final_best
    est.best_x_ = [decode(g, t) for g, t in zip(est.result_.best_genomes, problem.tasks)]
    est.n_evals_ = est.result_.evaluations
