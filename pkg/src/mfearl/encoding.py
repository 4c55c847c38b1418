"""Unified search space, skill factors, factorial ranks and scalar fitness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .exceptions import DimensionMismatchError, EmptyInputError, UndefinedFitnessError

# Marker for a factorial rank that was never computed (cost on that task unset).
UNSET_RANK = 0

# Genomes live on a dyadic lattice so that sums of genes (and SBX children of
# magnitude below 2**21) are exact in float64.
GENOME_GRID = 2.0**-32


def snap_genome(genome) -> np.ndarray:
    """Round genes to the nearest multiple of :data:`GENOME_GRID`."""
    return np.round(np.asarray(genome, dtype=float) / GENOME_GRID) * GENOME_GRID


def random_genomes(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Uniform lattice points in [0, 1]^dim."""
    return snap_genome(rng.random((n, dim)))


@dataclass
class Task:
    """One minimization task of a multitask problem.

    ``base_function`` is a :class:`~mfearl.benchmarks.BaseFunction` (or any
    callable taking the transformed vector). Decision vectors are mapped to
    ``rotation @ (x - shift)`` before the base function sees them.
    """

    id: int
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    base_function: object
    shift: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        self.lower = _as_bound(self.lower, self.dim)
        self.upper = _as_bound(self.upper, self.dim)
        self.shift = np.asarray(self.shift, dtype=float).reshape(-1)
        self.rotation = np.asarray(self.rotation, dtype=float)
        if self.dim < 1:
            raise ValueError("task dimension must be positive")
        if np.any(self.lower >= self.upper):
            raise ValueError("lower bound must be strictly below upper bound")
        if self.shift.shape != (self.dim,):
            raise DimensionMismatchError(f"shift has length {self.shift.size}, expected {self.dim}")
        if self.rotation.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"rotation has shape {self.rotation.shape}, expected ({self.dim}, {self.dim})")
        ortho = np.abs(self.rotation.T @ self.rotation - np.eye(self.dim)).max()
        if ortho > 1e-9:
            raise ValueError(f"rotation is not orthogonal (max deviation {ortho:.2e})")

    def transform(self, x: np.ndarray) -> np.ndarray:
        return self.rotation @ (x - self.shift)


def _as_bound(value, dim: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(dim, float(arr))
    arr = arr.reshape(-1)
    if arr.size != dim:
        raise DimensionMismatchError(f"bound has length {arr.size}, expected {dim}")
    return arr


@dataclass
class MultitaskProblem:
    tasks: list[Task]
    name: str = "custom"

    def __post_init__(self):
        if len(self.tasks) < 2:
            raise ValueError("a multitask problem needs at least two tasks")

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def unified_dim(self) -> int:
        return max(t.dim for t in self.tasks)


@dataclass(eq=False)
class Individual:
    genome: np.ndarray
    skill_factor: int
    factorial_costs: np.ndarray
    factorial_ranks: np.ndarray = None
    scalar_fitness: float = 0.0
    # Composed D x D representation, valid only for the network version it was built with.
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.genome = np.asarray(self.genome, dtype=float)
        self.factorial_costs = np.asarray(self.factorial_costs, dtype=float)
        if self.factorial_ranks is None:
            self.factorial_ranks = np.full(self.factorial_costs.shape, UNSET_RANK, dtype=int)

    @classmethod
    def new(cls, genome, skill_factor: int, n_tasks: int) -> "Individual":
        return cls(genome=genome, skill_factor=int(skill_factor), factorial_costs=np.full(n_tasks, np.inf))

    @property
    def cost(self) -> float:
        """Factorial cost on the individual's own skill task."""
        return float(self.factorial_costs[self.skill_factor])


@dataclass
class Population:
    members: list[Individual]
    generation: int = 0

    def __post_init__(self):
        if self.members:
            dims = {m.genome.shape for m in self.members}
            if len(dims) != 1:
                raise DimensionMismatchError(f"members have differing genome shapes {sorted(dims)}")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def genomes(self) -> np.ndarray:
        return np.stack([m.genome for m in self.members])

    @property
    def skill_factors(self) -> np.ndarray:
        return np.array([m.skill_factor for m in self.members], dtype=int)

    @property
    def costs(self) -> np.ndarray:
        return np.stack([m.factorial_costs for m in self.members])


def decode(genome: np.ndarray, task: Task) -> np.ndarray:
    """Map the first ``task.dim`` unified-space genes onto the task's box."""
    genome = np.asarray(genome, dtype=float)
    if genome.shape[-1] < task.dim:
        raise DimensionMismatchError(f"genome of length {genome.shape[-1]} is shorter than task dimension {task.dim}")
    g = genome[..., : task.dim]
    return task.lower + g * (task.upper - task.lower)


def encode(x: np.ndarray, task: Task, unified_dim: int | None = None, fill: float = 0.5) -> np.ndarray:
    """Inverse of :func:`decode`; unused trailing genes are set to ``fill``."""
    x = np.asarray(x, dtype=float)
    g = (x - task.lower) / (task.upper - task.lower)
    if unified_dim is None or unified_dim == task.dim:
        return g
    out = np.full(unified_dim, fill)
    out[: task.dim] = g
    return out


def factorial_ranks(costs: Sequence[float] | Population, task_id: int | None = None) -> np.ndarray:
    """Ranks 1..N by ascending cost; unset (inf/NaN) costs go last, ties by index.

    Accepts either a cost vector or a population together with ``task_id``.
    """
    if isinstance(costs, Population):
        if task_id is None:
            raise TypeError("task_id is required when ranking a population")
        c = np.array([m.factorial_costs[task_id] for m in costs.members], dtype=float)
    else:
        c = np.asarray(costs, dtype=float).reshape(-1)
    if c.size == 0:
        raise EmptyInputError("cannot rank an empty population")
    c = np.where(np.isnan(c), np.inf, c)
    order = np.argsort(c, kind="stable")
    ranks = np.empty(c.size, dtype=int)
    ranks[order] = np.arange(1, c.size + 1)
    return ranks


def scalar_fitness(ranks: Iterable) -> float:
    """``1 / min`` over the set ranks; ``None``, NaN and 0 count as unset."""
    valid = []
    for r in ranks:
        if r is None:
            continue
        r = float(r)
        if np.isnan(r) or r == UNSET_RANK:
            continue
        valid.append(r)
    if not valid:
        raise UndefinedFitnessError("scalar fitness needs at least one set factorial rank")
    return 1.0 / min(valid)


def assign_fitness(pop: Population) -> np.ndarray:
    """Recompute factorial ranks and scalar fitness for every member in place.

    A rank is recorded only where the member's cost is set, so an
    individual's fitness always comes from a task it was evaluated on.
    """
    costs = pop.costs
    n, t = costs.shape
    ranks = np.empty((n, t), dtype=int)
    for j in range(t):
        ranks[:, j] = factorial_ranks(costs[:, j])
    ranks = np.where(np.isfinite(costs), ranks, UNSET_RANK)
    fitness = np.empty(n)
    for i, m in enumerate(pop.members):
        m.factorial_ranks = ranks[i]
        m.scalar_fitness = fitness[i] = scalar_fitness(ranks[i])
    return fitness


def evaluate_individual(ind: Individual, problem: MultitaskProblem, evaluate: Callable) -> float:
    """Evaluate ``ind`` on its skill task only; other costs stay unset."""
    task = problem.tasks[ind.skill_factor]
    value = evaluate(task, decode(ind.genome, task))
    ind.factorial_costs = np.full(problem.n_tasks, np.inf)
    ind.factorial_costs[ind.skill_factor] = value
    return value
