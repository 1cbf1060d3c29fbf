"""Tests for the rank statistics, density curves and summaries."""

import math

import numpy as np
import pandas as pd
import pytest

from src.analysis.density import kde, silverman_bandwidth, write_density_csv
from src.analysis.stats import (
    Adjustment,
    SampleGroup,
    compare_groups,
    dunns_test,
    format_ranking,
    kruskal_wallis,
    rank_groups,
)
from src.analysis.summary import TABLE_COLUMNS, results_table, summarize
from src.core.exceptions import ContractViolationError

FIXTURE = [
    SampleGroup("a", (1, 2, 3)),
    SampleGroup("b", (4, 5, 6)),
    SampleGroup("c", (7, 8, 9)),
]


def _groups(rng, means, sd=1.0, n=20):
    return [SampleGroup(f"g{i}", tuple(rng.normal(m, sd, n))) for i, m in enumerate(means)]


class TestSampleGroup:
    """Group validation."""

    def test_empty_rejected(self):
        with pytest.raises(ContractViolationError):
            SampleGroup("x", ())

    def test_non_finite_rejected(self):
        with pytest.raises(ContractViolationError):
            SampleGroup("x", (1.0, math.inf))


class TestKruskalWallis:
    """H statistic, tie correction and p-values."""

    def test_hand_computed_fixture(self):
        result = kruskal_wallis(FIXTURE)

        assert result.statistic == pytest.approx(7.2)
        assert result.df == 2
        assert 0.0 <= result.p_value <= 1.0

    def test_identical_groups(self):
        result = kruskal_wallis([SampleGroup("a", (2.0, 2.0, 2.0)), SampleGroup("b", (2.0, 2.0))])

        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_single_group_rejected(self):
        with pytest.raises(ContractViolationError):
            kruskal_wallis(FIXTURE[:1])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(4)
        groups = _groups(rng, [0.0, 0.5, 1.0])
        transformed = [SampleGroup(g.label, tuple(np.exp(np.asarray(g.values)))) for g in groups]

        assert kruskal_wallis(transformed).statistic == pytest.approx(kruskal_wallis(groups).statistic, abs=1e-12)

    def test_member_order_irrelevant(self):
        rng = np.random.default_rng(5)
        groups = _groups(rng, [0.0, 1.0])
        shuffled = [SampleGroup(g.label, tuple(rng.permutation(g.values))) for g in groups]

        assert kruskal_wallis(shuffled).statistic == pytest.approx(kruskal_wallis(groups).statistic, abs=1e-12)

    def test_tie_correction_applied(self):
        groups = [SampleGroup("a", (1, 1, 2, 3)), SampleGroup("b", (3, 4, 4, 5))]
        pooled = np.array([1, 1, 2, 3, 3, 4, 4, 5], dtype=float)
        ranks = np.array([1.5, 1.5, 3, 4.5, 4.5, 6.5, 6.5, 8])
        n = len(pooled)
        raw = 12 / (n * (n + 1)) * (ranks[:4].sum() ** 2 / 4 + ranks[4:].sum() ** 2 / 4) - 3 * (n + 1)
        ties = 3 * (2**3 - 2)

        assert kruskal_wallis(groups).statistic == pytest.approx(raw / (1 - ties / (n**3 - n)))

    @pytest.mark.slow
    def test_agrees_with_permutation_distribution(self):
        rng = np.random.default_rng(11)
        shuffles = 10_000
        agree = 0
        for _ in range(100):
            groups = _groups(rng, [0.0, rng.uniform(0, 0.6), rng.uniform(0, 0.6)])
            observed = kruskal_wallis(groups)
            pooled = np.concatenate([g.values for g in groups])
            ranks = pd.Series(pooled).rank().to_numpy()
            n = len(ranks)
            permuted = rng.permuted(np.tile(ranks, (shuffles, 1)), axis=1)
            sums = permuted.reshape(shuffles, 3, 20).sum(axis=2)
            h = 12 / (n * (n + 1)) * (sums**2 / 20).sum(axis=1) - 3 * (n + 1)
            p_perm = float(np.mean(h >= observed.statistic - 1e-9))
            half_width = 2.576 * math.sqrt(max(p_perm * (1 - p_perm), 1e-4) / shuffles) + 0.01
            agree += abs(observed.p_value - p_perm) <= half_width
        assert agree >= 95


class TestDunn:
    """Pairwise post hoc comparisons."""

    def test_pair_count_and_order(self):
        pairs = dunns_test(FIXTURE)

        assert [(p.first, p.second) for p in pairs] == [("a", "b"), ("a", "c"), ("b", "c")]

    def test_extreme_pair_has_largest_z(self):
        pairs = {(p.first, p.second): p for p in dunns_test(FIXTURE)}

        assert abs(pairs[("a", "c")].z) > abs(pairs[("a", "b")].z)
        assert abs(pairs[("a", "c")].z) > abs(pairs[("b", "c")].z)

    def test_identical_groups(self):
        groups = [SampleGroup(label, (3.0, 3.0, 3.0)) for label in "xyz"]

        for pair in dunns_test(groups):
            assert pair.z == 0.0
            assert pair.p_adjusted == 1.0

    def test_antisymmetric(self):
        forward = dunns_test(FIXTURE[:2])[0]
        backward = dunns_test(FIXTURE[1::-1])[0]

        assert forward.z == pytest.approx(-backward.z)

    def test_bonferroni_scaling(self):
        rng = np.random.default_rng(2)
        groups = _groups(rng, [0.0, 0.2, 0.4, 0.6])
        raw = dunns_test(groups, Adjustment.NONE)
        adjusted = dunns_test(groups, Adjustment.BONFERRONI)

        for r, a in zip(raw, adjusted):
            assert r.p_adjusted == r.p_raw
            assert a.p_adjusted == pytest.approx(min(1.0, 6 * r.p_raw))
            assert 0.0 <= a.p_adjusted <= 1.0


class TestRanking:
    """Ordering and tiers."""

    def test_well_separated_groups(self):
        rng = np.random.default_rng(0)
        groups = [
            SampleGroup("low", tuple(rng.normal(0, 0.1, 100))),
            SampleGroup("high", tuple(rng.normal(10, 0.1, 100))),
            SampleGroup("mid", tuple(rng.normal(5, 0.1, 100))),
        ]

        report = compare_groups(groups)

        assert report.ranking == ("high", "mid", "low")
        assert report.tiers == (("high",), ("mid",), ("low",))
        assert format_ranking(report.tiers) == "high > mid > low"
        assert len(report.pairwise) == 3

    def test_indistinguishable_groups_share_a_tier(self):
        groups = [SampleGroup("p", (1.0, 2.0, 3.0)), SampleGroup("q", (1.5, 2.5, 3.5))]

        ranking, tiers = rank_groups(groups, dunns_test(groups))

        assert ranking == ("q", "p")
        assert tiers == (("q", "p"),)
        assert format_ranking(tiers) == "q ~ p"

    def test_report_document(self):
        doc = compare_groups(FIXTURE).to_document()

        assert doc["degrees_of_freedom"] == 2
        assert len(doc["pairwise"]) == 3
        assert doc["ranking"] == ["c", "b", "a"]


class TestDensity:
    """Kernel density curves."""

    def test_symmetric_data(self):
        curve = kde([-1.0, 0.0, 1.0])

        np.testing.assert_allclose(curve.density, curve.density[::-1], atol=1e-12)
        np.testing.assert_allclose(curve.x, -curve.x[::-1], atol=1e-12)

    def test_grid_shape_and_positivity(self):
        curve = kde(np.random.default_rng(1).normal(size=50))

        assert curve.x.shape == (256,)
        assert np.all(curve.density >= 0.0)
        assert curve.x[0] == pytest.approx(curve.x.min())

    def test_integral_close_to_one(self):
        curve = kde(np.random.default_rng(3).normal(2.0, 0.5, 200))

        assert 0.98 <= curve.integral() <= 1.0 + 1e-9

    def test_wider_margin_integrates_to_one(self):
        curve = kde(np.random.default_rng(4).exponential(size=150), margin=6.0)

        assert curve.integral() == pytest.approx(1.0, abs=1e-3)

    def test_single_value_fixed_bandwidth_is_one_bump(self):
        curve = kde([2.0] * 10, bandwidth=0.5)

        expected = np.exp(-0.5 * ((curve.x - 2.0) / 0.5) ** 2) / (0.5 * math.sqrt(2 * math.pi))
        assert curve.degenerate
        np.testing.assert_allclose(curve.density, expected, rtol=1e-12)

    def test_silverman_falls_back_to_sd(self):
        values = np.array([0.0] * 10 + [1.0])
        sd = values.std(ddof=1)

        assert silverman_bandwidth(values) == pytest.approx(0.9 * sd * 11**-0.2)

    def test_csv_export(self, tmp_path):
        path = write_density_csv(kde([0.0, 1.0, 3.0]), tmp_path / "kde" / "a.csv")

        frame = pd.read_csv(path)
        assert list(frame.columns) == ["x", "density"]
        assert len(frame) == 256


class TestSummary:
    """Descriptive statistics and results table."""

    def test_even_median(self):
        assert summarize(SampleGroup("s", (4, 1, 3, 2))).median == 2.5

    def test_against_two_pass_oracle(self):
        values = np.random.default_rng(8).normal(3.0, 2.0, 500)
        summary = summarize(SampleGroup("s", tuple(values)))
        mean = sum(values) / len(values)
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))

        assert summary.mean == pytest.approx(mean, abs=1e-12)
        assert summary.sd == pytest.approx(sd, abs=1e-12)
        assert summary.minimum == values.min()
        assert summary.maximum == values.max()

    def test_results_table_layout(self):
        frame = pd.DataFrame(
            {
                "scenario_id": [0, 1],
                "displacement": [2.0, 4.0],
                "voxel_count": [224, 224],
                "delta_score": [0.1, 0.2],
                "nu_score": [0.5, 0.5],
                "fitness": [0.3, 0.35],
            }
        )

        table = results_table({"AFPO": frame})

        assert list(table.columns) == TABLE_COLUMNS
        assert table.iloc[0]["Number of voxels"] == 224
        assert table.iloc[0]["Mean displacement"] == pytest.approx(3.0)
        assert table.iloc[0]["Fitness value"] == pytest.approx(0.325)
