"""``mfearl`` command line entry point.

Example::

    mfearl --problem cec17:P1,P4 --algo mfea,mfea-rl:full,random-search \\
        --seeds 10 --max-evals 20000 --dim 10 --out results/ --deterministic
"""

from __future__ import annotations

import argparse
import sys

from .benchmarks import ProblemSpec, Suite
from .exceptions import BudgetError
from .harness import ALGORITHMS, ExperimentConfig, canonical_algorithm, render_table, run_experiment

# Keys accepted in a --config file; each maps to the matching long flag.
CONFIG_KEYS = {
    "problem", "algo", "seeds", "max-evals", "reps", "out", "deterministic", "data-dir",
    "dim", "base-seed", "instance-seed", "base", "jobs", "population-size",
}


class UsageError(Exception):
    pass


def parse_problems(text: str, dim: int | None, instance_seed: int) -> list[ProblemSpec]:
    """``cec17:P1,P2`` or ``custom:<file>``; several groups may be separated by ``;``."""
    specs = []
    for group in filter(None, (g.strip() for g in text.split(";"))):
        suite, sep, rest = group.partition(":")
        if not sep or not rest:
            raise UsageError(f"malformed --problem {group!r}; expected cec17:P1[,P2...] or custom:<file>")
        suite = suite.strip().lower()
        if suite == Suite.CEC17.value:
            for pid in filter(None, (p.strip().upper() for p in rest.split(","))):
                dims = (dim, dim) if dim else None
                try:
                    specs.append(ProblemSpec(Suite.CEC17, pid, dims=dims, seed=instance_seed))
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
        elif suite == Suite.CUSTOM.value:
            specs.append(ProblemSpec(Suite.CUSTOM, rest.strip(), path=rest.strip()))
        else:
            raise UsageError(f"unknown suite {suite!r}; expected cec17 or custom")
    if not specs:
        raise UsageError("--problem names no problems")
    return specs


def parse_seeds(text: str, base_seed: int) -> list[int]:
    """``5`` means five seeds ``base_seed .. base_seed+4``; ``1,4,9`` is an explicit list."""
    text = str(text).strip()
    try:
        if "," in text:
            return [int(s) for s in text.split(",") if s.strip()]
        n = int(text)
    except ValueError:
        raise UsageError(f"malformed --seeds {text!r}") from None
    if n < 1:
        raise UsageError("--seeds must be positive")
    return [base_seed + i for i in range(n)]


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    values = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise UsageError(f"{path}:{n}: expected key = value")
        key = key.strip().lower().replace("_", "-")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mfearl", description="Run multitask optimization experiments.")
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--problem", help="cec17:P1[,P2,...] or custom:<file.json>")
    p.add_argument("--algo", help=f"comma-separated subset of {', '.join(ALGORITHMS)} (mfea-rl = mfea-rl:full)")
    p.add_argument("--seeds", help="seed count or comma-separated list")
    p.add_argument("--max-evals", type=int)
    p.add_argument("--reps", type=int, help="runs per cell (default: number of seeds)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--deterministic", action="store_true", default=None, help="single process, fixed order")
    p.add_argument("--data-dir", help="directory with CEC17 shift/rotation files")
    p.add_argument("--dim", type=int, help="per-task dimension for cec17 problems (default 50)")
    p.add_argument("--instance-seed", type=int, help="seed for synthesized problem instances")
    p.add_argument("--base-seed", type=int, help="first seed when --seeds is a count")
    p.add_argument("--base", help="reference algorithm for the rank-sum comparison")
    p.add_argument("--jobs", type=int, help="worker processes (ignored with --deterministic)")
    p.add_argument("--population-size", type=int)
    p.add_argument("--table", action="store_true", help="print the summary table")
    return p


def _int(values: dict, key: str, default):
    raw = values.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise UsageError(f"malformed --{key} {raw!r}") from None


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            values[key] = flag
    if "problem" not in values:
        raise UsageError("--problem is required")
    deterministic = values.get("deterministic", False)
    if isinstance(deterministic, str):
        if deterministic.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"malformed deterministic value {deterministic!r}")
        deterministic = deterministic.lower() in ("true", "1", "yes")
    base_seed = _int(values, "base-seed", 0)
    seeds = parse_seeds(values.get("seeds", "30"), base_seed)
    try:
        algorithms = [canonical_algorithm(a) for a in str(values.get("algo", "mfea,mfea-rl:full")).split(",") if a.strip()]
        return ExperimentConfig(
            problems=parse_problems(values["problem"], _int(values, "dim", None), _int(values, "instance-seed", 0)),
            algorithms=algorithms,
            seeds=seeds,
            max_evals=_int(values, "max-evals", 50_000),
            reps=_int(values, "reps", len(seeds)),
            output_dir=str(values.get("out", "results")),
            deterministic=bool(deterministic),
            population_size=_int(values, "population-size", 100),
            base_seed=base_seed,
            data_dir=values.get("data-dir") or None,
            base_algorithm=values.get("base") or None,
            jobs=_int(values, "jobs", 1),
        )
    except (ValueError, BudgetError) as exc:
        raise UsageError(str(exc)) from None


def parse_cli(argv=None) -> ExperimentConfig:
    return config_from_args(build_parser().parse_args(argv))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except UsageError as exc:
        parser.error(str(exc))
    try:
        result = run_experiment(config)
    except OSError as exc:
        print(f"mfearl: cannot write results: {exc}", file=sys.stderr)
        return 1
    if args.table:
        print(render_table(result.summary), end="")
    print(f"wrote {len(result.records)} run records to {result.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
