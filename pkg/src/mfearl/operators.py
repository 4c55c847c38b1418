"""Variation and selection operators on unified-space genomes."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .encoding import GENOME_GRID, Individual, Population, assign_fitness, snap_genome
from .exceptions import EmptyInputError


class Mating(str, Enum):
    CROSSOVER = "crossover"
    MUTATE_EACH = "mutate_each"


# Children further than this from the parents' midpoint are clamped anyway.
MAX_SPREAD = 2.0**20


def sbx_spread(u: np.ndarray, eta: float) -> np.ndarray:
    """Spread factor from uniform draws via the inverse CDF of the SBX distribution."""
    u = np.asarray(u, dtype=float)
    e = 1.0 / (eta + 1.0)
    with np.errstate(divide="ignore"):
        beta = np.where(u <= 0.5, (2.0 * u) ** e, (1.0 / (2.0 * (1.0 - u))) ** e)
    return np.minimum(beta, MAX_SPREAD)


def sbx_children(p1: np.ndarray, p2: np.ndarray, eta: float, rng: np.random.Generator):
    """Unclamped SBX children ``c1 = ((1+b) p1 + (1-b) p2) / 2`` and ``c2 = p1 + p2 - c1``.

    ``c1`` is snapped to the genome lattice, so for lattice parents the
    per-gene sum ``c1 + c2 == p1 + p2`` holds bit for bit.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    beta = sbx_spread(rng.random(p1.shape), eta)
    total = p1 + p2
    c1 = snap_genome(0.5 * (total + beta * (p1 - p2)))
    c2 = total - c1
    return c1, c2


def sbx_crossover(p1, p2, eta: float, rng: np.random.Generator):
    c1, c2 = sbx_children(p1, p2, eta, rng)
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def polynomial_mutation(x, eta: float, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation on [0, 1].

    Each gene mutates with probability ``rate``. A draw ``u <= 0.5`` moves the
    gene towards 0 by ``((2u)^(1/(eta+1)) - 1) * x``, otherwise towards 1 by
    ``(1 - (2(1-u))^(1/(eta+1))) * (1 - x)``, so results never leave the box.
    """
    x = np.array(x, dtype=float)
    mask = rng.random(x.shape) < rate
    u = rng.random(x.shape)
    e = 1.0 / (eta + 1.0)
    down = ((2.0 * u) ** e - 1.0) * x
    up = (1.0 - (2.0 * (1.0 - u)) ** e) * (1.0 - x)
    delta = np.where(u <= 0.5, down, up)
    x[mask] += delta[mask]
    return np.clip(x, 0.0, 1.0)


def assortative_mating(p1: Individual, p2: Individual, rmp: float, rng: np.random.Generator) -> Mating:
    """Crossover when skills agree or a uniform draw falls below ``rmp``.

    The draw is taken only when the skills differ.
    """
    if p1.skill_factor == p2.skill_factor or rng.random() < rmp:
        return Mating.CROSSOVER
    return Mating.MUTATE_EACH


def boundary_repair(genome, rng: np.random.Generator | None = None):
    """Clamp to [0, 1]; NaN genes are resampled uniformly.

    Returns ``(repaired, flagged)`` where ``flagged`` is True if any NaN was
    replaced.
    """
    g = np.array(genome, dtype=float)
    nan = np.isnan(g)
    flagged = bool(nan.any())
    if flagged:
        rng = rng if rng is not None else np.random.default_rng()
        g[nan] = rng.random(int(nan.sum()))
    return np.clip(g, 0.0, 1.0), flagged


def select_next_generation(pool: Population | list, n: int) -> Population:
    """Keep the ``n`` members of highest scalar fitness.

    Ranks and fitness are recomputed over the whole pool; ties go to the lower
    cost on the member's own skill task, then to the lower pool index.
    """
    if not isinstance(pool, Population):
        pool = Population(list(pool))
    if len(pool) < n:
        raise EmptyInputError(f"pool of {len(pool)} cannot supply {n} survivors")
    fitness = assign_fitness(pool)
    own_cost = np.array([m.cost for m in pool.members])
    order = np.lexsort((np.arange(len(pool)), own_cost, -fitness))
    keep = [pool.members[i] for i in order[:n]]
    return Population(keep, generation=pool.generation)
