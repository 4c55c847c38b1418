import csv
import math

import numpy as np
import pytest

from mfearl.exceptions import DimensionMismatchError, EmptyInputError
from mfearl.projection import (
    JlConfig,
    distortion_report,
    gaussian_projection,
    jl_dimension,
    main,
    row_map_distortion,
    run_jl,
    write_report_csv,
)


def test_jl_dimension():
    assert jl_dimension(100, 0.5) == math.ceil(8 * math.log(100) / 0.25) == 148
    assert JlConfig().k == 148
    with pytest.raises(ValueError):
        JlConfig(eps=1.0)


def test_zero_vector_projects_to_zero(rng):
    assert np.all(gaussian_projection(np.zeros(30), 5, rng) == 0)


def test_projection_rejects_large_k(rng):
    with pytest.raises(DimensionMismatchError):
        gaussian_projection(np.ones((2, 4)), 5, rng)


def test_squared_norm_preserved_in_expectation():
    v = np.random.default_rng(0).standard_normal(40)
    rng = np.random.default_rng(1)
    ratios = [np.sum(gaussian_projection(v, 16, rng) ** 2) / (v @ v) for _ in range(10_000)]
    assert abs(np.mean(ratios) - 1) <= 0.05


def test_identical_points_stay_identical(rng):
    x = np.tile(rng.random(50), (3, 1))
    y = gaussian_projection(x, 10, rng)
    assert np.array_equal(y[0], y[1]) and np.array_equal(y[1], y[2])
    rep = distortion_report(x, y)
    assert rep.n_pairs == 0 and rep.n_excluded == 3


def test_identity_projection_report(rng):
    x = rng.random((12, 9))
    rep = distortion_report(x, x, eps=0.1)
    assert rep.max_deviation == 0.0 and rep.fraction_within == 1.0 and rep.n_pairs == 66


def test_orthonormal_projection_is_isometric(rng):
    v = rng.standard_normal(16)
    q, _ = np.linalg.qr(rng.standard_normal((16, 16)))
    rep = distortion_report(np.stack([v, -v]), np.stack([v, -v]) @ q.T)
    assert rep.ratios[0] == pytest.approx(1.0, abs=1e-12)


def test_duplicates_are_excluded(rng):
    x = rng.random((4, 5))
    x[3] = x[1]
    rep = distortion_report(x, gaussian_projection(x, 3, rng))
    assert rep.n_pairs == 5 and rep.n_excluded == 1
    assert np.all(np.isfinite(rep.ratios))


def test_report_errors(rng):
    with pytest.raises(DimensionMismatchError):
        distortion_report(rng.random((3, 4)), rng.random((2, 4)))
    with pytest.raises(EmptyInputError):
        distortion_report(rng.random((1, 4)), rng.random((1, 2)))


def test_row_map_broadcast_matrices_exact():
    rng = np.random.default_rng(0)
    mats = np.stack([np.tile(rng.integers(-5, 5, 4).astype(float), (4, 1)) for _ in range(6)])
    stats = row_map_distortion(mats, rng, trials=500)
    assert np.all(stats.ratios == 1.0)


def test_row_map_dimension_one(rng):
    stats = row_map_distortion(rng.random((5, 1, 1)), rng, trials=200)
    np.testing.assert_allclose(stats.ratios, 1.0, rtol=1e-14)


def test_row_map_unbiased_and_deterministic():
    mats = np.random.default_rng(3).random((40, 6, 6))
    a = row_map_distortion(mats, 9, 10_000)
    b = row_map_distortion(mats, 9, 10_000)
    assert abs(a.mean_ratio - 1) <= 0.05
    assert a.variance > 0
    np.testing.assert_array_equal(a.ratios, b.ratios)


def test_row_map_errors(rng):
    with pytest.raises(DimensionMismatchError):
        row_map_distortion(rng.random((3, 2, 4)), rng)
    with pytest.raises(EmptyInputError):
        row_map_distortion(rng.random((1, 2, 2)), rng)


def test_reports_are_deterministic():
    cfg = JlConfig(n=20, ambient_dim=100, eps=0.5, k=30)
    a, b = run_jl(cfg, seed=5)[0], run_jl(cfg, seed=5)[0]
    np.testing.assert_array_equal(a.projected_sq, b.projected_sq)


def test_csv_report(tmp_path, rng):
    x = rng.random((5, 8))
    rep = distortion_report(x, gaussian_projection(x, 4, rng))
    path = tmp_path / "r.csv"
    write_report_csv(rep, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["pair_id", "original_sq_dist", "projected_sq_dist", "ratio"]
    assert len(rows) == 11
    assert float(rows[1][3]) == pytest.approx(float(rows[1][2]) / float(rows[1][1]))


def test_cli(tmp_path, capsys):
    out = tmp_path / "jl.csv"
    assert main(["--n", "20", "--dim", "12", "--draws", "500", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "gaussian k=96" in text and "row selection" in text
    assert len(out.read_text().splitlines()) == 191
    with pytest.raises(SystemExit) as exc:
        main(["--n", "20", "--dim", "6"])
    assert exc.value.code == 2
