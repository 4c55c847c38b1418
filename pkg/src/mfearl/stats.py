"""Wilcoxon rank-sum comparisons and +/-/= summary tables."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import EmptyInputError, MismatchedRunsError

EXACT_MAX = 8

CONVENTION = (
    "sign compares each algorithm with {base} by a two-sided Wilcoxon rank-sum test at alpha={alpha}: "
    "'+' significantly lower mean objective (better), '-' significantly higher (worse), '=' no significant difference"
)


class Decision(str, Enum):
    PLUS = "+"
    MINUS = "-"
    EQUAL = "="

    def mirrored(self) -> "Decision":
        return {Decision.PLUS: Decision.MINUS, Decision.MINUS: Decision.PLUS}.get(self, self)


@dataclass(frozen=True)
class ComparisonResult:
    p_value: float
    decision: Decision
    alpha: float
    direction: str  # "a", "b" or "tie": which sample has the lower mean
    statistic: float  # Mann-Whitney U of sample a
    exact: bool


def midranks(values) -> np.ndarray:
    """1-based ranks with ties given the average of their positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    sorted_vals = values[order]
    start = 0
    for end in range(1, values.size + 1):
        if end == values.size or sorted_vals[end] != sorted_vals[start]:
            ranks[order[start:end]] = 0.5 * (start + end + 1)
            start = end
    return ranks


@lru_cache(maxsize=None)
def u_distribution(n: int, m: int) -> tuple:
    """Counts of each U value 0..n*m over all C(n+m, n) rank assignments (no ties).

    The largest element either belongs to ``a`` (adding ``m`` to U) or to ``b``.
    """
    if n == 0 or m == 0:
        return (1,)
    counts = [0] * (n * m + 1)
    for u, c in enumerate(u_distribution(n - 1, m)):
        counts[u + m] += c
    for u, c in enumerate(u_distribution(n, m - 1)):
        counts[u] += c
    return tuple(counts)


def exact_p_value(u: int, n: int, m: int) -> Fraction:
    counts = u_distribution(n, m)
    total = sum(counts)
    le = sum(counts[: u + 1])
    ge = sum(counts[u:])
    return min(Fraction(1), Fraction(2 * min(le, ge), total))


def wilcoxon_rank_sum(a, b, alpha: float = 0.05) -> ComparisonResult:
    """Two-sided rank-sum test of ``a`` against ``b`` for minimization.

    Exact null distribution when ``min(n, m) <= 8`` and no ties, otherwise a
    normal approximation with tie and continuity corrections. ``decision`` is
    ``+`` when the difference is significant and ``a`` has the lower mean.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise EmptyInputError("both samples must be non-empty")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("samples contain NaN")
    n, m = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    u = float(ranks[:n].sum() - n * (n + 1) / 2)
    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool((tie_counts > 1).any())
    exact = min(n, m) <= EXACT_MAX and not has_ties
    if exact:
        p = float(exact_p_value(int(round(u)), n, m))
    else:
        big_n = n + m
        tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (big_n * (big_n - 1))
        var = n * m / 12.0 * ((big_n + 1) - tie_term)
        if var <= 0:
            p = 1.0
        else:
            z = max(abs(u - n * m / 2.0) - 0.5, 0.0) / math.sqrt(var)
            p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    mean_a, mean_b = a.mean(), b.mean()
    direction = "a" if mean_a < mean_b else "b" if mean_b < mean_a else "tie"
    if p < alpha and direction == "a":
        decision = Decision.PLUS
    elif p < alpha and direction == "b":
        decision = Decision.MINUS
    else:
        decision = Decision.EQUAL
    return ComparisonResult(p, decision, alpha, direction, u, exact)


@dataclass
class SummaryRow:
    problem: str
    task: int
    algorithm: str
    mean: float
    std: float
    n_runs: int
    p_value: float | None = None
    sign: Decision | None = None


@dataclass
class Summary:
    base: str
    alpha: float
    algorithms: list
    rows: list

    def totals(self) -> dict:
        """``{algorithm: (n_plus, n_minus, n_equal)}`` for every non-base algorithm."""
        out = {}
        for alg in self.algorithms:
            if alg == self.base:
                continue
            signs = [r.sign for r in self.rows if r.algorithm == alg]
            out[alg] = tuple(signs.count(d) for d in (Decision.PLUS, Decision.MINUS, Decision.EQUAL))
        return out

    @property
    def has_comparisons(self) -> bool:
        return len(self.algorithms) > 1

    def row(self, problem, task, algorithm) -> SummaryRow:
        for r in self.rows:
            if (r.problem, r.task, r.algorithm) == (problem, task, algorithm):
                return r
        raise KeyError((problem, task, algorithm))


def _problem_key(name: str):
    digits = "".join(ch for ch in name if ch.isdigit())
    return (name.rstrip("0123456789"), int(digits) if digits else -1, name)


def summarize(records, base: str, alpha: float = 0.05) -> Summary:
    """Mean/std of final best values per (problem, task, algorithm) with rank-sum signs vs ``base``.

    Every algorithm must have a record for the same (problem, task, seed) cells.
    """
    cells = defaultdict(dict)
    algorithms = []
    for r in records:
        if r.algorithm not in algorithms:
            algorithms.append(r.algorithm)
        cells[(r.problem_id, r.task_id, r.algorithm)][r.seed] = r.final_best
    if base not in algorithms:
        raise MismatchedRunsError(f"base algorithm {base!r} has no runs")
    algorithms = [base] + [a for a in algorithms if a != base]
    groups = sorted({(p, t) for p, t, _ in cells}, key=lambda k: (_problem_key(k[0]), k[1]))
    missing = []
    for p, t in groups:
        seeds = set().union(*(cells.get((p, t, a), {}).keys() for a in algorithms))
        for a in algorithms:
            lacking = seeds - cells.get((p, t, a), {}).keys()
            missing += [f"{a} on {p} task {t} seed {s}" for s in sorted(lacking)]
    if missing:
        raise MismatchedRunsError("missing runs: " + "; ".join(missing))
    rows = []
    for p, t in groups:
        base_vals = np.array([v for _, v in sorted(cells[(p, t, base)].items())])
        for a in algorithms:
            vals = np.array([v for _, v in sorted(cells[(p, t, a)].items())])
            std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            row = SummaryRow(p, t, a, float(vals.mean()), std, int(vals.size))
            if a != base:
                res = wilcoxon_rank_sum(vals, base_vals, alpha)
                row.p_value, row.sign = res.p_value, res.decision
            rows.append(row)
    return Summary(base, alpha, algorithms, rows)


def write_summary_csv(summary: Summary, path):
    """``summary.csv``; a leading ``#`` line states the sign convention."""
    cols = ["problem", "task", "algorithm", "mean", "std", "n_runs"]
    if summary.has_comparisons:
        cols += [f"wilcoxon_vs({summary.base})", "sign"]
    with open(path, "w", newline="") as fh:
        if summary.has_comparisons:
            fh.write("# " + CONVENTION.format(base=summary.base, alpha=summary.alpha) + "\n")
        w = csv.writer(fh)
        w.writerow(cols)
        for r in summary.rows:
            line = [r.problem, r.task, r.algorithm, repr(r.mean), repr(r.std), r.n_runs]
            if summary.has_comparisons:
                line += ["" if r.p_value is None else repr(r.p_value), "" if r.sign is None else r.sign.value]
            w.writerow(line)
        if summary.has_comparisons:
            for alg, (plus, minus, eq) in summary.totals().items():
                w.writerow(["total", "", alg, "", "", "", "", f"{plus}/{minus}/{eq}"])


def render_table(summary: Summary, fmt: str = "{:.4e}") -> str:
    """Plain-text table: one row per problem task, ``mean(std) sign`` per algorithm,
    closed by a ``+ / - / =`` footer row."""
    header = ["Problem", "Task"] + summary.algorithms
    lines = []
    for p, t in dict.fromkeys((r.problem, r.task) for r in summary.rows):
        cells = [p, f"T{t + 1}"]
        for a in summary.algorithms:
            r = summary.row(p, t, a)
            cell = f"{fmt.format(r.mean)}({fmt.format(r.std)})"
            if r.sign is not None:
                cell += f" {r.sign.value}"
            cells.append(cell)
        lines.append(cells)
    if summary.has_comparisons:
        totals = summary.totals()
        footer = ["+ / - / =", ""]
        for a in summary.algorithms:
            footer.append("-" if a == summary.base else "{} / {} / {}".format(*totals[a]))
        lines.append(footer)
    widths = [max(len(str(row[i])) for row in [header] + lines) for i in range(len(header))]
    out = []
    if summary.has_comparisons:
        out.append("# " + CONVENTION.format(base=summary.base, alpha=summary.alpha))
    for k, row in enumerate([header] + lines):
        out.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
        if k == 0 or (summary.has_comparisons and k == len(lines) - 1):
            out.append("-" * len(out[-1]))
    return "\n".join(out) + "\n"
