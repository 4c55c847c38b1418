"""Distance preservation checks for random projections and random row selection.

``mfearl-jl`` runs both experiments and writes a per-pair CSV report.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, EmptyInputError


@dataclass
class JlConfig:
    n: int = 100
    ambient_dim: int = 2500
    eps: float = 0.5
    k: int | None = None
    trials: int = 1

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.k is None:
            self.k = jl_dimension(self.n, self.eps)
        if self.k < 1:
            raise ValueError("k must be >= 1")


def jl_dimension(n: int, eps: float) -> int:
    """``ceil(8 ln n / eps^2)``."""
    return int(math.ceil(8.0 * math.log(n) / eps**2))


def gaussian_projection(points, k: int, rng=None) -> np.ndarray:
    """Project rows onto ``k`` dims with an i.i.d. N(0, 1/k) matrix."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None]
    if k > points.shape[1]:
        raise DimensionMismatchError(f"k={k} exceeds the ambient dimension {points.shape[1]}")
    rng = np.random.default_rng(rng)
    p = rng.standard_normal((points.shape[1], k)) / math.sqrt(k)
    return points @ p


def _pair_sq_dists(x: np.ndarray):
    i, j = np.triu_indices(x.shape[0], k=1)
    diff = x[i] - x[j]
    return i, j, np.einsum("ij,ij->i", diff, diff)


@dataclass
class DistortionReport:
    max_deviation: float
    fraction_within: float
    n_pairs: int
    n_excluded: int
    pairs: np.ndarray  # (pair_id, i, j)
    original_sq: np.ndarray
    projected_sq: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.projected_sq / self.original_sq


def distortion_report(original, projected, eps: float = 0.5) -> DistortionReport:
    """Squared-distance ratios over all pairs; zero-distance pairs are skipped."""
    original = np.asarray(original, dtype=float)
    projected = np.asarray(projected, dtype=float)
    if original.shape[0] != projected.shape[0]:
        raise DimensionMismatchError("original and projected point counts differ")
    if original.shape[0] < 2:
        raise EmptyInputError("need at least two points")
    i, j, orig = _pair_sq_dists(original)
    _, _, proj = _pair_sq_dists(projected)
    keep = orig > 0
    ratio = proj[keep] / orig[keep]
    dev = np.abs(ratio - 1.0)
    n_pairs = int(keep.sum())
    pair_ids = np.flatnonzero(keep)
    return DistortionReport(
        max_deviation=float(dev.max()) if n_pairs else 0.0,
        fraction_within=float(np.mean(dev <= eps)) if n_pairs else 1.0,
        n_pairs=n_pairs,
        n_excluded=int((~keep).sum()),
        pairs=np.column_stack([pair_ids, i[keep], j[keep]]),
        original_sq=orig[keep],
        projected_sq=proj[keep],
    )


@dataclass
class RowMapStats:
    mean_ratio: float
    variance: float
    n_draws: int
    ratios: np.ndarray


def row_map_distortion(matrices, rng=None, trials: int = 10_000) -> RowMapStats:
    """Ratio ``D * ||row_s(Xi) - row_s(Xj)||^2 / ||Xi - Xj||_F^2`` for a shared random row ``s``.

    Each draw picks a random pair of distinct matrices and a uniform row index.
    Pairs of identical matrices are skipped.
    """
    mats = np.asarray(matrices, dtype=float)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise DimensionMismatchError("expected a stack of D x D matrices")
    m, d, _ = mats.shape
    if m < 2:
        raise EmptyInputError("need at least two matrices")
    rng = np.random.default_rng(rng)
    a = rng.integers(m, size=trials)
    b = (a + 1 + rng.integers(m - 1, size=trials)) % m
    s = rng.integers(d, size=trials)
    delta = mats[a] - mats[b]
    frob = np.einsum("tij,tij->t", delta, delta)
    rows = delta[np.arange(trials), s]
    ratio_all = d * np.einsum("ti,ti->t", rows, rows)
    keep = frob > 0
    ratios = ratio_all[keep] / frob[keep]
    return RowMapStats(float(ratios.mean()), float(ratios.var()), int(keep.sum()), ratios)


def write_report_csv(report: DistortionReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair_id", "original_sq_dist", "projected_sq_dist", "ratio"])
        for pid, o, p in zip(report.pairs[:, 0], report.original_sq, report.projected_sq):
            w.writerow([int(pid), repr(float(o)), repr(float(p)), repr(float(p / o))])


def run_jl(config: JlConfig, seed: int = 0) -> list[DistortionReport]:
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((config.n, config.ambient_dim))
    return [distortion_report(points, gaussian_projection(points, config.k, rng), config.eps) for _ in range(config.trials)]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mfearl-jl", description="Random projection distortion experiment.")
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--dim", type=int, default=50, help="matrix side D; points live in D*D dims")
    parser.add_argument("--eps", type=float, default=0.5)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--draws", type=int, default=10_000, help="row-selection draws")
    parser.add_argument("--out", default=None, help="CSV path for the per-pair report")
    args = parser.parse_args(argv)
    try:
        cfg = JlConfig(n=args.n, ambient_dim=args.dim**2, eps=args.eps, k=args.k)
    except ValueError as exc:
        parser.error(str(exc))
    if cfg.k > cfg.ambient_dim:
        parser.error(f"k={cfg.k} exceeds the ambient dimension {cfg.ambient_dim}; raise --dim or lower --k")
    report = run_jl(cfg, args.seed)[0]
    mats = np.random.default_rng(args.seed + 1).random((args.n, args.dim, args.dim))
    rows = row_map_distortion(mats, args.seed + 2, args.draws)
    print(f"gaussian k={cfg.k}: within [1-eps, 1+eps] {report.fraction_within:.4f}, max deviation {report.max_deviation:.4f}")
    print(f"row selection: mean ratio {rows.mean_ratio:.4f}, variance {rows.variance:.4f} over {rows.n_draws} draws")
    if args.out:
        write_report_csv(report, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
