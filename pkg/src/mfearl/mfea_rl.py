"""MFEA with residual-expansion crossover and learned skill-factor assignment.

Each generation the shared :class:`ResidualNet` lifts a genome ``x`` to
``X_new = broadcast(x) + R(x)`` and a uniformly chosen row of ``X_new`` becomes
the child. A :class:`SkillClassifier` reads the child's own ``X_new`` and
picks its task. Both networks are retrained from the current population every
``retrain_interval`` generations without any objective evaluations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator

from .benchmarks import EvalCounter
from .encoding import Individual, MultitaskProblem, Population, snap_genome
from .exceptions import DegenerateLabelsError
from .mfea import (
    MFEA,
    Evaluator,
    MfeaConfig,
    _store_solution,
    finish,
    generation_event,
    initial_population,
    mating_pairs,
)
from .nn import ResidualNet, SkillClassifier, TrainOptions, train_classifier, train_vdsr
from .operators import Mating, assortative_mating, boundary_repair, polynomial_mutation, sbx_crossover, select_next_generation
from .records import BestTracker


class Mode(str, Enum):
    FULL = "full"
    VDSR_ONLY = "vdsr"
    RES_ONLY = "res"

    @property
    def residual_crossover(self) -> bool:
        return self is not Mode.RES_ONLY

    @property
    def learned_skills(self) -> bool:
        return self is not Mode.VDSR_ONLY


@dataclass
class MfeaRlConfig(MfeaConfig):
    retrain_interval: int = 10
    vdsr_opts: TrainOptions = field(default_factory=TrainOptions.vdsr)
    resnet_opts: TrainOptions = field(default_factory=TrainOptions.resnet)
    mode: Mode = Mode.FULL
    vdsr_depth: int = 8
    vdsr_channels: int = 64
    classifier_blocks: int = 3
    classifier_channels: int = 16
    # Members sampled as VDSR training inputs per retrain (one batch by default); None uses all.
    vdsr_samples: int | None = 20

    def __post_init__(self):
        super().__post_init__()
        self.mode = Mode(self.mode)
        if self.retrain_interval < 1:
            raise ValueError("retrain_interval must be >= 1")

    def as_dict(self) -> dict:
        out = super().as_dict()
        out["mode"] = self.mode.value
        out["vdsr_opts"] = vars(self.vdsr_opts).copy()
        out["resnet_opts"] = vars(self.resnet_opts).copy()
        return out


@dataclass
class TrainingBatch:
    vdsr_inputs: np.ndarray  # (n, D)
    vdsr_targets: np.ndarray  # (n, D, D)
    resnet_members: np.ndarray  # (m,) population indices; composed with the VDSR after it is trained
    resnet_labels: np.ndarray  # (m,)

    @property
    def classifier_ready(self) -> bool:
        return np.unique(self.resnet_labels).size >= 2


def build_training_batch(pop: Population, rng: np.random.Generator, max_vdsr: int | None = None) -> TrainingBatch:
    """Training pairs drawn from the evaluated population.

    The VDSR target of a member with skill ``t`` stacks ``D`` genomes drawn with
    replacement from the members of skill ``t``. Classifier samples are the
    members themselves, down-sampled so every present task has the same count.
    """
    genomes = pop.genomes
    skills = pop.skill_factors
    n, d = genomes.shape
    members = np.arange(n)
    if max_vdsr is not None and max_vdsr < n:
        members = np.sort(rng.choice(n, size=max_vdsr, replace=False))
    groups = {t: np.flatnonzero(skills == t) for t in np.unique(skills)}
    targets = np.empty((members.size, d, d))
    for row, i in enumerate(members):
        group = groups[skills[i]]
        targets[row] = genomes[group[rng.integers(group.size, size=d)]]

    smallest = min(g.size for g in groups.values())
    picked = []
    for t in sorted(groups):
        g = groups[t]
        picked.append(g if g.size == smallest else np.sort(rng.choice(g, size=smallest, replace=False)))
    picked = np.concatenate(picked)
    return TrainingBatch(genomes[members], targets, picked, skills[picked])


def random_row_map(x_new: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A uniformly chosen row of ``x_new`` (a basis-row selector ``P``)."""
    x_new = np.asarray(x_new, dtype=float)
    return x_new[rng.integers(x_new.shape[0])].copy()


def residual_crossover(x1: np.ndarray, x2: np.ndarray, rng: np.random.Generator):
    """Children are random rows of each parent's composed matrix, clamped to [0, 1].

    ``x1`` and ``x2`` are the parents' ``X_new`` matrices.
    """
    return np.clip(random_row_map(x1, rng), 0.0, 1.0), np.clip(random_row_map(x2, rng), 0.0, 1.0)


def assign_skill_factor(logits, parents=None, rng=None) -> int:
    """Argmax of the classifier logits, ties to the lower task id.

    Without logits the skill of a uniformly chosen parent is inherited.
    """
    if logits is None:
        return int(parents[rng.integers(len(parents))].skill_factor)
    return int(np.argmax(np.asarray(logits)))


class _Networks:
    """Shared VDSR and classifier plus a version counter for cached X_new."""

    def __init__(self, problem: MultitaskProblem, config: MfeaRlConfig, rng: np.random.Generator):
        d = problem.unified_dim
        self.vdsr = ResidualNet(d, config.vdsr_depth, config.vdsr_channels, seed=int(rng.integers(2**63)))
        self.classifier = SkillClassifier(
            d, problem.n_tasks, config.classifier_blocks, config.classifier_channels, seed=int(rng.integers(2**63))
        )
        self.vdsr_trained = False
        self.classifier_trained = False
        self.version = 0

    def composed(self, members: list[Individual]) -> np.ndarray:
        """``X_new`` for each member, reusing matrices built with the current VDSR."""
        stale = [m for m in members if m.cache.get("version") != self.version]
        if stale:
            xs = self.vdsr.compose(np.stack([m.genome for m in stale]))
            for m, x in zip(stale, xs):
                m.cache["version"] = self.version
                m.cache["x_new"] = x
        return np.stack([m.cache["x_new"] for m in members])


def _retrain(nets: _Networks, pop: Population, config: MfeaRlConfig, rng, counter) -> dict:
    before = counter.count
    batch = build_training_batch(pop, rng, config.vdsr_samples)
    vres = train_vdsr(nets.vdsr, batch.vdsr_inputs, batch.vdsr_targets, config.vdsr_opts, rng)
    nets.vdsr_trained = True
    nets.version += 1
    event = {"event": "retrain", "vdsr_loss": [float(v) for v in vres.losses], "classifier_skipped": True}
    if config.mode.learned_skills and batch.classifier_ready:
        images = nets.composed([pop[i] for i in batch.resnet_members])
        try:
            cres = train_classifier(nets.classifier, images, batch.resnet_labels, config.resnet_opts, rng)
        except DegenerateLabelsError:
            cres = None
        if cres is not None:
            nets.classifier_trained = True
            event.update(
                classifier_skipped=False,
                classifier_val_acc=[float(a) for a in cres.val_accuracy],
                classifier_best_epoch=cres.best_epoch,
            )
    event["eval_delta"] = counter.count - before
    return event


def run_mfea_rl(problem: MultitaskProblem, config: MfeaRlConfig | None = None, seed: int = 0, counter=None,
                algorithm: str | None = None):
    """Run MFEA-RL in the configured mode until the budget is spent.

    Networks are first trained once generation 1 has been evaluated; earlier
    crossovers use SBX and are counted as fallbacks in the event log.
    """
    config = config or MfeaRlConfig()
    config.check_budget()
    algorithm = algorithm or f"mfea-rl:{config.mode.value}"
    t0 = time.perf_counter()
    evo_seq, train_seq, init_seq = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(evo_seq)
    train_rng = np.random.default_rng(train_seq)
    counter = counter if counter is not None else EvalCounter()
    n, d, t = config.population_size, problem.unified_dim, problem.n_tasks
    rate = config.rate_for(d)
    tracker = BestTracker(t, d)
    evaluate = Evaluator(problem, counter, tracker)
    nets = _Networks(problem, config, np.random.default_rng(init_seq))
    events = []

    pop = initial_population(problem, n, rng)
    start = counter.count
    evaluate(pop.members)
    tracker.snapshot(counter.count - start)
    events.append(generation_event(algorithm, problem, seed, 0, counter, tracker, fallback_crossovers=0, repairs=0))

    gen = 0
    while counter.count - start + n <= config.max_evals:
        if gen >= 1 and (gen - 1) % config.retrain_interval == 0:
            event = _retrain(nets, pop, config, train_rng, counter)
            event.update(algorithm=algorithm, problem=problem.name, seed=seed, generation=gen)
            events.append(event)

        use_residual = config.mode.residual_crossover and nets.vdsr_trained
        use_classifier = config.mode.learned_skills and nets.classifier_trained
        pairs = mating_pairs(n, rng)
        decisions = [assortative_mating(pop[i], pop[j], config.rmp, rng) for i, j in pairs]
        parent_x = {}
        if use_residual:
            need = sorted({int(k) for pair, m in zip(pairs, decisions) if m is Mating.CROSSOVER for k in pair})
            if need:
                parent_x = dict(zip(need, nets.composed([pop[k] for k in need])))
        offspring, parents_of, fallbacks, repairs = [], [], 0, 0
        for (i, j), mating in zip(pairs, decisions):
            a, b = pop[i], pop[j]
            if mating is Mating.CROSSOVER:
                if use_residual:
                    c1, c2 = residual_crossover(parent_x[i], parent_x[j], rng)
                else:
                    c1, c2 = sbx_crossover(a.genome, b.genome, config.sbx_eta, rng)
                    fallbacks += config.mode.residual_crossover
                kids = [(c1, (a, b)), (c2, (a, b))]
            else:
                c1 = polynomial_mutation(a.genome, config.mutation_eta, rate, rng)
                c2 = polynomial_mutation(b.genome, config.mutation_eta, rate, rng)
                kids = [(c1, (a,)), (c2, (b,))]
            for c, parents in kids:
                g, flagged = boundary_repair(c, rng)
                repairs += flagged
                offspring.append(Individual.new(snap_genome(g), parents[0].skill_factor, t))
                parents_of.append(parents)

        crossed = [k for k, parents in enumerate(parents_of) if len(parents) == 2]
        logits = {}
        if use_classifier and crossed:
            x_new = nets.composed([offspring[k] for k in crossed])
            logits = dict(zip(crossed, nets.classifier.forward(x_new)))
        for k in crossed:
            offspring[k].skill_factor = assign_skill_factor(logits.get(k), parents_of[k], rng)

        evaluate(offspring)
        gen += 1
        pop = select_next_generation(Population(pop.members + offspring, generation=gen), n)
        tracker.snapshot(counter.count - start)
        events.append(generation_event(algorithm, problem, seed, gen, counter, tracker,
                                       fallback_crossovers=int(fallbacks), repairs=int(repairs)))
    result = finish(tracker, algorithm, problem, seed, counter, gen, events, t0)
    result.networks = nets
    return result


class MFEARL(MFEA):
    """Estimator-style wrapper around :func:`run_mfea_rl`."""

    def __init__(self, mode="full", population_size=100, rmp=0.3, sbx_eta=2.0, mutation_eta=5.0,
                 mutation_rate=None, max_evals=50_000, retrain_interval=10, vdsr_depth=8, vdsr_channels=64,
                 classifier_blocks=3, classifier_channels=16, vdsr_samples=20, random_state=0):
        super().__init__(population_size, rmp, sbx_eta, mutation_eta, mutation_rate, max_evals, random_state)
        self.mode = mode
        self.retrain_interval = retrain_interval
        self.vdsr_depth = vdsr_depth
        self.vdsr_channels = vdsr_channels
        self.classifier_blocks = classifier_blocks
        self.classifier_channels = classifier_channels
        self.vdsr_samples = vdsr_samples

    def _config(self) -> MfeaRlConfig:
        return MfeaRlConfig(
            population_size=self.population_size, rmp=self.rmp, sbx_eta=self.sbx_eta,
            mutation_eta=self.mutation_eta, mutation_rate=self.mutation_rate, max_evals=self.max_evals,
            retrain_interval=self.retrain_interval, mode=self.mode, vdsr_depth=self.vdsr_depth,
            vdsr_channels=self.vdsr_channels, classifier_blocks=self.classifier_blocks,
            classifier_channels=self.classifier_channels, vdsr_samples=self.vdsr_samples,
        )

    def fit(self, problem: MultitaskProblem, y=None):
        self.result_ = run_mfea_rl(problem, self._config(), seed=self.random_state)
        _store_solution(self, problem)
        return self
