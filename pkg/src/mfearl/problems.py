"""Loading user-defined multitask problems from JSON files.

A custom problem file looks like::

    {
      "name": "my-pair",
      "tasks": [
        {"function": "sphere", "dim": 10, "lower": -100, "upper": 100},
        {"function": "rastrigin", "dim": 5, "lower": -5, "upper": 5,
         "shift": [0, 0, 0, 0, 1], "rotation": "random", "seed": 3}
      ]
    }

``shift`` defaults to zeros; ``rotation`` is ``"identity"`` (default),
``"random"`` (seeded by ``seed``) or an explicit row-major matrix.
"""

import json
from pathlib import Path

import numpy as np

from .benchmarks import BaseFunction, random_rotation
from .encoding import MultitaskProblem, Task


def _task_from_dict(j: int, spec: dict) -> Task:
    dim = int(spec["dim"])
    kind = BaseFunction(spec["function"].lower())
    shift = np.asarray(spec.get("shift", np.zeros(dim)), dtype=float)
    rot = spec.get("rotation", "identity")
    if isinstance(rot, str):
        if rot == "identity":
            rot = np.eye(dim)
        elif rot == "random":
            rot = random_rotation(dim, np.random.default_rng(spec.get("seed", j)))
        else:
            raise ValueError(f"unknown rotation kind {rot!r}")
    return Task(j, dim, spec["lower"], spec["upper"], kind, shift, np.asarray(rot, dtype=float))


def problem_from_dict(doc: dict) -> MultitaskProblem:
    tasks = [_task_from_dict(j, t) for j, t in enumerate(doc["tasks"])]
    return MultitaskProblem(tasks, name=doc.get("name", "custom"))


def load_custom_problem(path) -> MultitaskProblem:
    path = Path(path)
    with path.open() as fh:
        doc = json.load(fh)
    doc.setdefault("name", path.stem)
    return problem_from_dict(doc)
