"""Base objective functions and CEC2017-MTSO style dual-task problems."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .encoding import MultitaskProblem, Task
from .exceptions import DimensionMismatchError, InvalidInputError

SCHWEFEL_OPTIMUM = 420.9687
_SCHWEFEL_CONST = 418.9829

_W_A, _W_B, _W_KMAX = 0.5, 3.0, 20
_W_AK = _W_A ** np.arange(_W_KMAX + 1)
_W_BK = _W_B ** np.arange(_W_KMAX + 1)


class BaseFunction(str, Enum):
    SPHERE = "sphere"
    ROSENBROCK = "rosenbrock"
    ACKLEY = "ackley"
    RASTRIGIN = "rastrigin"
    GRIEWANK = "griewank"
    WEIERSTRASS = "weierstrass"
    SCHWEFEL = "schwefel"

    def optimum_point(self, dim: int) -> np.ndarray:
        """Canonical minimizer in the transformed (z) space."""
        if self is BaseFunction.ROSENBROCK:
            return np.ones(dim)
        if self is BaseFunction.SCHWEFEL:
            return np.full(dim, SCHWEFEL_OPTIMUM)
        return np.zeros(dim)


def _sphere(z):
    return float(z @ z)


def _rosenbrock(z):
    a, b = z[:-1], z[1:]
    return float(np.sum(100.0 * (b - a * a) ** 2 + (a - 1.0) ** 2))


def _ackley(z):
    d = z.size
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(z @ z / d)) - np.exp(np.sum(np.cos(2.0 * np.pi * z)) / d) + 20.0 + np.e
    )


def _rastrigin(z):
    return float(np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0))


def _griewank(z):
    i = np.arange(1, z.size + 1)
    return float(1.0 + z @ z / 4000.0 - np.prod(np.cos(z / np.sqrt(i))))


def _weierstrass(z):
    inner = np.cos(2.0 * np.pi * np.outer(z + 0.5, _W_BK)) @ _W_AK
    offset = z.size * float(_W_AK @ np.cos(np.pi * _W_BK))
    return float(np.sum(inner) - offset)


def _schwefel(z):
    return float(_SCHWEFEL_CONST * z.size - np.sum(z * np.sin(np.sqrt(np.abs(z)))))


_FUNCS = {
    BaseFunction.SPHERE: _sphere,
    BaseFunction.ROSENBROCK: _rosenbrock,
    BaseFunction.ACKLEY: _ackley,
    BaseFunction.RASTRIGIN: _rastrigin,
    BaseFunction.GRIEWANK: _griewank,
    BaseFunction.WEIERSTRASS: _weierstrass,
    BaseFunction.SCHWEFEL: _schwefel,
}


def evaluate_base(kind, z) -> float:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size == 0:
        raise InvalidInputError("empty input vector")
    if np.isnan(z).any():
        raise InvalidInputError("NaN in input vector")
    if callable(kind) and not isinstance(kind, BaseFunction):
        return float(kind(z))
    return _FUNCS[BaseFunction(kind)](z)


class EvalCounter:
    """Thread-safe count of objective evaluations."""

    def __init__(self):
        self._count = 0
        self._lock = threading.Lock()

    def increment(self, n: int = 1) -> int:
        with self._lock:
            self._count += n
            return self._count

    @property
    def count(self) -> int:
        return self._count

    def __repr__(self):
        return f"EvalCounter({self._count})"


def evaluate_task(task: Task, x, counter: EvalCounter | None = None) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != task.dim:
        raise DimensionMismatchError(f"vector of length {x.size} given to task of dimension {task.dim}")
    value = evaluate_base(task.base_function, task.transform(x))
    if counter is not None:
        counter.increment()
    return value


class Suite(str, Enum):
    CEC17 = "cec17"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ProblemSpec:
    suite: Suite
    problem_id: str
    dims: tuple[int, ...] | None = None
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.suite is Suite.CEC17 and self.problem_id not in CEC17_PAIRS:
            raise ValueError(f"unknown CEC17 problem {self.problem_id!r}")
        if self.dims is not None and any(d < 1 for d in self.dims):
            raise ValueError("dimensions must be positive")

    @property
    def label(self) -> str:
        if self.suite is Suite.CEC17:
            return self.problem_id
        return Path(self.path or self.problem_id).stem

    def build(self, data_dir=None) -> MultitaskProblem:
        if self.suite is Suite.CEC17:
            dim = self.dims[0] if self.dims else 50
            return make_cec17_pair(self.problem_id, self.seed, dim=dim, data_dir=data_dir)
        from .problems import load_custom_problem

        return load_custom_problem(self.path or self.problem_id)


F = BaseFunction
# (function, lower, upper) per task, plus how the two optima intersect in unified space.
CEC17_PAIRS = {
    "P1": ((F.GRIEWANK, -100, 100), (F.RASTRIGIN, -50, 50), "CI"),
    "P2": ((F.ACKLEY, -50, 50), (F.RASTRIGIN, -50, 50), "CI"),
    "P3": ((F.ACKLEY, -50, 50), (F.SCHWEFEL, -500, 500), "CI"),
    "P4": ((F.RASTRIGIN, -50, 50), (F.SPHERE, -100, 100), "PI"),
    "P5": ((F.ACKLEY, -50, 50), (F.ROSENBROCK, -50, 50), "PI"),
    "P6": ((F.ACKLEY, -50, 50), (F.WEIERSTRASS, -0.5, 0.5), "PI"),
    "P7": ((F.ROSENBROCK, -50, 50), (F.RASTRIGIN, -50, 50), "NI"),
    "P8": ((F.GRIEWANK, -100, 100), (F.WEIERSTRASS, -0.5, 0.5), "NI"),
    "P9": ((F.RASTRIGIN, -50, 50), (F.SCHWEFEL, -500, 500), "NI"),
}
del F


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR with sign correction."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _read_matrix(path: Path) -> np.ndarray:
    return np.loadtxt(path, dtype=float, ndmin=2)


def _instance_files(data_dir: Path, problem_id: str, task_no: int):
    for stem in (f"{problem_id}_{task_no}", f"{problem_id}_T{task_no}"):
        shift, rot = data_dir / f"{stem}_shift.txt", data_dir / f"{stem}_rot.txt"
        if shift.exists() or rot.exists():
            return shift, rot
    return None, None


def make_cec17_pair(problem_id: str, seed: int = 0, dim: int = 50, data_dir=None) -> MultitaskProblem:
    """Build one of the nine CEC2017-MTSO style dual-task problems.

    Shifts and rotations come from ``data_dir`` when instance files exist
    there, otherwise they are synthesized from ``seed``. Synthesized optima
    follow the suite's intersection category in unified space: shared (CI),
    shared on the first half of the coordinates (PI), or independent (NI).
    Schwefel tasks keep the identity rotation and a zero shift so that their
    optimum stays at 420.9687 inside the box.
    """
    if problem_id not in CEC17_PAIRS:
        raise ValueError(f"unknown CEC17 problem {problem_id!r}; expected one of P1..P9")
    *task_defs, overlap = CEC17_PAIRS[problem_id]
    rng = np.random.default_rng([int(seed), int(problem_id[1:])])
    data_dir = Path(data_dir) if data_dir is not None else None

    u_shared = rng.uniform(0.2, 0.8, size=dim)
    for kind, lo, hi in task_defs:
        if kind is BaseFunction.SCHWEFEL:
            u_shared = np.full(dim, (SCHWEFEL_OPTIMUM - lo) / (hi - lo))

    tasks = []
    for j, (kind, lo, hi) in enumerate(task_defs):
        shift = rotation = None
        if data_dir is not None:
            shift_path, rot_path = _instance_files(data_dir, problem_id, j + 1)
            if shift_path is not None and shift_path.exists():
                shift = _read_matrix(shift_path).reshape(-1)
            if rot_path is not None and rot_path.exists():
                rotation = _read_matrix(rot_path)
        task_dim = shift.size if shift is not None else (rotation.shape[0] if rotation is not None else dim)

        # Draws happen unconditionally so loading one file does not perturb the other task.
        rot_draw = random_rotation(task_dim, rng)
        u_own = rng.uniform(0.2, 0.8, size=task_dim)
        if rotation is None:
            rotation = np.eye(task_dim) if kind is BaseFunction.SCHWEFEL else rot_draw
        if shift is None:
            if kind is BaseFunction.SCHWEFEL:
                shift = np.zeros(task_dim)
            else:
                u = u_own.copy()
                n_shared = {"CI": task_dim, "PI": task_dim // 2, "NI": 0}[overlap]
                n_shared = min(n_shared, u_shared.size)
                u[:n_shared] = u_shared[:n_shared]
                x_opt = lo + u * (hi - lo)
                shift = x_opt - rotation.T @ kind.optimum_point(task_dim)
        tasks.append(Task(j, task_dim, lo, hi, kind, shift, rotation))
    return MultitaskProblem(tasks, name=problem_id)
