import csv
import itertools
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from mfearl.exceptions import EmptyInputError, MismatchedRunsError
from mfearl.records import RunRecord
from mfearl.stats import (
    Decision,
    exact_p_value,
    midranks,
    render_table,
    summarize,
    wilcoxon_rank_sum,
    write_summary_csv,
)


def brute_force_p(a, b):
    """Two-sided exact p by enumerating every split of the pooled ranks."""
    n, m = len(a), len(b)
    pooled = sorted(list(a) + list(b))
    rank = {v: i + 1 for i, v in enumerate(pooled)}
    u_obs = sum(rank[v] for v in a) - n * (n + 1) // 2
    us = [sum(c) - n * (n + 1) // 2 for c in itertools.combinations(range(1, n + m + 1), n)]
    le = sum(u <= u_obs for u in us)
    ge = sum(u >= u_obs for u in us)
    return min(Fraction(1), Fraction(2 * min(le, ge), len(us)))


def test_identical_samples():
    res = wilcoxon_rank_sum([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res.p_value == 1.0 and res.decision is Decision.EQUAL


def test_three_vs_three():
    res = wilcoxon_rank_sum([1, 2, 3], [10, 11, 12])
    assert res.exact and res.statistic == 0
    assert res.p_value == pytest.approx(0.1, abs=1e-15)
    assert res.decision is Decision.EQUAL
    assert brute_force_p([1, 2, 3], [10, 11, 12]) == Fraction(1, 10)


def test_five_vs_five():
    res = wilcoxon_rank_sum(range(1, 6), range(6, 11))
    assert res.p_value == float(Fraction(2, 252))
    assert res.decision is Decision.PLUS and res.direction == "a"
    assert wilcoxon_rank_sum(range(6, 11), range(1, 6)).decision is Decision.MINUS


def test_empty_sample():
    with pytest.raises(EmptyInputError):
        wilcoxon_rank_sum([], [1.0])


def test_midranks():
    np.testing.assert_array_equal(midranks([3, 1, 2]), [3, 1, 2])
    np.testing.assert_array_equal(midranks([5, 5, 1]), [2.5, 2.5, 1])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_exact_matches_enumeration(n, m, seed):
    rng = np.random.default_rng(seed)
    values = rng.choice(1000, size=n + m, replace=False)
    a, b = values[:n], values[n:]
    assert exact_p_value(int(wilcoxon_rank_sum(a, b).statistic), n, m) == brute_force_p(a, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_exact_matches_scipy(n, m, seed):
    rng = np.random.default_rng(seed)
    values = rng.permutation(n + m).astype(float)
    a, b = values[:n], values[n:]
    ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided", method="exact").pvalue
    assert wilcoxon_rank_sum(a, b).p_value == pytest.approx(ref, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(9, 25), st.integers(9, 25), st.integers(0, 2**32 - 1), st.booleans())
def test_normal_approximation_matches_scipy(n, m, seed, ties):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 8, n) if ties else rng.standard_normal(n)
    b = rng.integers(0, 8, m) + 1 if ties else rng.standard_normal(m) + 0.5
    res = wilcoxon_rank_sum(a, b)
    ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert not res.exact
    assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-15)


def test_small_samples_with_ties_use_normal_branch():
    res = wilcoxon_rank_sum([1, 1, 2], [2, 3, 3])
    ref = scipy.stats.mannwhitneyu([1, 1, 2], [2, 3, 3], method="asymptotic").pvalue
    assert not res.exact and res.p_value == pytest.approx(ref)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=12),
       st.lists(st.integers(-20, 20), min_size=1, max_size=12),
       st.floats(0.01, 0.2))
def test_symmetry_and_range(a, b, alpha):
    ab, ba = wilcoxon_rank_sum(a, b, alpha), wilcoxon_rank_sum(b, a, alpha)
    assert ab.p_value == pytest.approx(ba.p_value, rel=1e-12)
    assert ab.decision is ba.decision.mirrored()
    assert 0.0 <= ab.p_value <= 1.0
    # Equal means with a significant p stay "=": there is no direction to report.
    assert (ab.decision is Decision.EQUAL) == (ab.p_value >= alpha or ab.direction == "tie")


def records(alg, values, problem="P1", task=0):
    return [RunRecord(alg, problem, task, s, [(10, v)], v) for s, v in enumerate(values)]


def test_summary_single_algorithm(tmp_path):
    s = summarize(records("mfea", [1.0, 2.0, 3.0]), "mfea")
    assert not s.has_comparisons
    row = s.row("P1", 0, "mfea")
    assert row.mean == 2.0 and row.std == pytest.approx(1.0) and row.n_runs == 3
    write_summary_csv(s, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "problem,task,algorithm,mean,std,n_runs"
    assert "+ / - / =" not in render_table(s)


def test_summary_identical_algorithms_all_equal():
    vals = [3.0, 1.0, 2.0, 5.0]
    recs = []
    for p in ("P1", "P2"):
        for t in (0, 1):
            recs += records("mfea", vals, p, t) + records("copy", vals, p, t)
    s = summarize(recs, "mfea")
    assert s.totals() == {"copy": (0, 0, 4)}


def test_summary_signs_and_outputs(tmp_path):
    recs = records("mfea", [5.0, 6, 7, 8, 9]) + records("better", [1.0, 2, 3, 4, 4.5])
    recs += records("worse", [20.0, 21, 22, 23, 24])
    s = summarize(recs, "mfea")
    assert s.row("P1", 0, "better").sign is Decision.PLUS
    assert s.row("P1", 0, "worse").sign is Decision.MINUS
    assert s.totals() == {"better": (1, 0, 0), "worse": (0, 1, 0)}

    write_summary_csv(s, tmp_path / "s.csv")
    text = (tmp_path / "s.csv").read_text().splitlines()
    assert text[0].startswith("# sign compares each algorithm with mfea")
    rows = list(csv.reader(text[1:]))
    assert rows[0] == ["problem", "task", "algorithm", "mean", "std", "n_runs", "wilcoxon_vs(mfea)", "sign"]
    assert rows[-2:] == [["total", "", "better", "", "", "", "", "1/0/0"], ["total", "", "worse", "", "", "", "", "0/1/0"]]

    table = render_table(s)
    footer = [line for line in table.splitlines() if line.startswith("+ / - / =")]
    assert len(footer) == 1
    assert "1 / 0 / 0" in footer[0] and "0 / 1 / 0" in footer[0]
    assert "T1" in table and "+" in table


def test_summary_mismatched_runs():
    recs = records("mfea", [1.0, 2.0, 3.0]) + records("other", [1.0, 2.0])
    with pytest.raises(MismatchedRunsError, match="other on P1 task 0 seed 2"):
        summarize(recs, "mfea")
    with pytest.raises(MismatchedRunsError):
        summarize(records("other", [1.0]), "mfea")
