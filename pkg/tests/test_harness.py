"""Scenario construction and the sequential meta-procedure."""

import logging
import math

import numpy as np
import pytest

from mabfdr.errors import ConfigError, DataError
from mabfdr.harness import (
    CaptionDataset,
    ScenarioConfig,
    aggregate_row,
    build_plan,
    caption_scenario,
    default_config,
    generate_means,
    load_captions,
    run_many,
    run_meta,
    run_one,
)
from mabfdr.metrics import ExperimentRecord, mfdr_estimate
from mabfdr.online_fdr import gamma
from mabfdr.rewards import SeededStream


class TestScenarioConfig:
    @pytest.mark.parametrize("overrides", [
        {"family": "weibull"},
        {"hypotheses": 0},
        {"null_fraction": 1.5},
        {"arms": 1},
        {"gap": 0.0},
        {"gap": 9.0},
        {"family": "bernoulli", "best_mean": 0.4, "gap": 0.3, "truncation": 7.5},
        {"truncation": 10, "arms": 51},
        {"runs": 0},
        {"fdr": "bh"},
        {"method": "thompson"},
        {"alpha": 1.0},
        {"w0": 0.2},
        {"family": "caption"},
        {"family": "caption", "data_path": "x.csv", "top_n": 1},
    ])
    def test_validate_rejects(self, overrides):
        with pytest.raises(ConfigError):
            ScenarioConfig(**overrides).validate()

    def test_scenario_id(self):
        assert ScenarioConfig(null_fraction=0.6).scenario_id == "gaussian|pi1=0.4"
        assert ScenarioConfig(family="bernoulli", best_mean=0.4, gap=0.3,
                              null_fraction=1.0).scenario_id == "bernoulli|pi1=0"

    def test_default_config_family_means(self):
        c = default_config("bernoulli", hypotheses=5)
        assert (c.best_mean, c.gap, c.hypotheses) == (0.4, 0.3, 5)
        assert default_config("gaussian").best_mean == 8.0


class TestTruthAndMeans:
    def test_label_counts_and_determinism(self):
        config = ScenarioConfig(hypotheses=30, null_fraction=0.6, arms=4, seed=5)
        a, b = build_plan(config), build_plan(config)
        assert int(a.is_null.sum()) == 18  # ceil(0.6 * 30)
        assert (a.is_null == b.is_null).all()
        assert a.control_means == pytest.approx(b.control_means)
        assert (a.alt_means == b.alt_means).all()

    def test_all_null_and_all_alternative(self):
        base = dict(hypotheses=10, arms=3, seed=1)
        assert build_plan(ScenarioConfig(null_fraction=1.0, **base)).is_null.all()
        assert not build_plan(ScenarioConfig(null_fraction=0.0, **base)).is_null.any()

    def test_null_means(self):
        config = ScenarioConfig(arms=6, best_mean=8.0, gap=3.0, seed=3)
        control, alts = generate_means(config, 0, True)
        assert control == 8.0
        assert len(alts) == 5
        assert (alts <= 5.0).all() and (alts >= 0.0).all()

    def test_alternative_means(self):
        config = ScenarioConfig(arms=6, best_mean=8.0, gap=3.0, seed=3)
        control, alts = generate_means(config, 0, False)
        assert (alts == 8.0).sum() == 1
        assert control <= 5.0
        others = alts[alts != 8.0]
        assert (others <= 5.0).all()

    def test_means_vary_with_hypothesis(self):
        config = ScenarioConfig(arms=4, seed=9)
        _, a = generate_means(config, 0, True)
        _, b = generate_means(config, 1, True)
        assert not np.allclose(a, b)

    def test_uniform_null_p_nulls_have_no_arms(self):
        config = ScenarioConfig(family="uniform-null-p", hypotheses=12,
                                null_fraction=0.5, arms=4, seed=7)
        plan = build_plan(config)
        assert np.isnan(plan.control_means[plan.is_null]).all()
        assert np.isfinite(plan.control_means[~plan.is_null]).all()


CAPTIONS_CSV = """contest_id,caption_id,mean,count
1,a,0.9,100
1,b,0.8,100
1,c,0.7,100
1,d,0.6,100
1,e,0.5,100
2,f,0.9,100
2,g,0.8,100
3,h,0.4,100
3,i,0.3,100
3,j,0.2,100
3,k,0.1,100
"""


class TestCaptions:
    @pytest.fixture
    def data_path(self, tmp_path):
        path = tmp_path / "captions.csv"
        path.write_text(CAPTIONS_CSV)
        return str(path)

    def test_small_contests_skipped_with_warning(self, data_path, caplog):
        dataset = load_captions(data_path)
        config = ScenarioConfig(family="caption", data_path=data_path, top_n=4,
                                null_fraction=1.0, hypotheses=10)
        with caplog.at_level(logging.WARNING, logger="mabfdr.harness"):
            plan = caption_scenario(dataset, config)
        assert len(plan.is_null) == 2  # contest 2 dropped
        assert any("skipped" in r.message for r in caplog.records)

    def test_null_control_is_top_caption(self, data_path):
        config = ScenarioConfig(family="caption", data_path=data_path, top_n=4,
                                null_fraction=1.0, hypotheses=10)
        plan = build_plan(config)
        assert plan.reward_kind == "bernoulli"
        assert plan.control_means == pytest.approx([0.9, 0.4])
        assert plan.alt_means[0] == pytest.approx([0.8, 0.7, 0.6])

    def test_alternative_control_is_weakest_of_pool(self, data_path):
        config = ScenarioConfig(family="caption", data_path=data_path, top_n=4,
                                null_fraction=0.0, hypotheses=10)
        plan = build_plan(config)
        assert plan.control_means == pytest.approx([0.6, 0.1])
        assert plan.alt_means[1] == pytest.approx([0.4, 0.3, 0.2])

    def test_top_n_larger_than_every_contest(self, data_path):
        dataset = load_captions(data_path)
        config = ScenarioConfig(family="caption", data_path=data_path, top_n=9)
        with pytest.raises(DataError):
            caption_scenario(dataset, config)

    @pytest.mark.parametrize("text", [
        "",
        "wrong,header,entirely,here\n1,a,0.5,10\n",
        "contest_id,caption_id,mean,count\n1,a,0.5\n",
        "contest_id,caption_id,mean,count\n1,a,1.5,10\n",
        "contest_id,caption_id,mean,count\nx,a,0.5,10\n",
        "contest_id,caption_id,mean,count\n",
    ])
    def test_malformed_files_rejected(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(DataError):
            load_captions(str(path))

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(DataError):
            load_captions(str(tmp_path / "nope.csv"))

    def test_error_names_the_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("contest_id,caption_id,mean,count\n1,a,0.5,10\n1,b,2.0,10\n")
        with pytest.raises(DataError, match="line 3"):
            load_captions(str(path))


class TestRunOne:
    def test_uniform_null_p_rows(self):
        config = ScenarioConfig(family="uniform-null-p", hypotheses=8,
                                null_fraction=0.5, arms=3, truncation=100,
                                seed=21, alpha=0.1)
        plan = build_plan(config)
        result = run_one(config, plan, run=2)
        for rec in result.records:
            if rec.is_null:
                assert rec.returned_arm == -1
                assert rec.samples == 0
                expected = SeededStream(21, (3, 2, rec.j - 1)).generator().random()
                assert rec.pvalue == expected
            else:
                assert rec.samples >= 3
                assert rec.returned_arm >= 0

    def test_control_return_never_rejects(self):
        # all-null gaussian scenario: whenever the control wins, no rejection
        config = ScenarioConfig(hypotheses=12, null_fraction=1.0, arms=4,
                                truncation=60, seed=33)
        result = run_one(config, build_plan(config), run=0)
        assert any(r.returned_arm == 0 for r in result.records)
        assert all(not r.rejected for r in result.records if r.returned_arm == 0)

    def test_wealth_tracked_per_hypothesis(self):
        config = ScenarioConfig(family="uniform-null-p", hypotheses=10,
                                null_fraction=1.0, arms=3, seed=2)
        result = run_one(config, build_plan(config), run=0)
        assert len(result.wealth) == 10
        assert result.total_samples == 0

    def test_levels_follow_procedure(self):
        config = ScenarioConfig(family="uniform-null-p", hypotheses=5,
                                null_fraction=1.0, arms=3, seed=2,
                                fdr="bonferroni", alpha=0.1)
        result = run_one(config, build_plan(config), run=0)
        expected = [6 * 0.1 / (math.pi**2 * j**2) for j in range(1, 6)]
        assert [r.alpha_j for r in result.records] == pytest.approx(expected, rel=1e-12)


class TestRunMany:
    def test_runs_reproducible(self):
        config = ScenarioConfig(hypotheses=6, null_fraction=0.5, arms=3,
                                truncation=80, runs=3, seed=44)
        assert run_meta(config) == run_meta(config)

    def test_parallel_matches_sequential(self):
        config = ScenarioConfig(hypotheses=6, null_fraction=0.5, arms=3,
                                truncation=80, runs=4, seed=44)
        assert run_many(config, jobs=2) == run_meta(config)

    def test_runs_differ_in_noise_not_truth(self):
        config = ScenarioConfig(hypotheses=6, null_fraction=0.5, arms=3,
                                truncation=80, runs=2, seed=44)
        a, b = run_meta(config)
        assert [r.is_null for r in a.records] == [r.is_null for r in b.records]
        assert [r.samples for r in a.records] != [r.samples for r in b.records]


class TestErrorControlDesk:
    """Small-scale previews of the acceptance-scale error guarantees."""

    def test_single_null_rejection_rate(self):
        # lord at j=1 tests at gamma(1) * w0; the rejection rate must match
        config = ScenarioConfig(family="uniform-null-p", hypotheses=1,
                                null_fraction=1.0, arms=3, runs=2000, seed=55,
                                fdr="lord", alpha=0.1)
        results = run_meta(config)
        rate = np.mean([r.records[0].rejected for r in results])
        level = gamma(1) * 0.05
        assert rate <= 0.01
        assert rate == pytest.approx(level, abs=3 * math.sqrt(level / 2000))

    def test_uncorrected_testing_loses_control(self):
        config = ScenarioConfig(family="uniform-null-p", hypotheses=40,
                                null_fraction=0.9, arms=4, truncation=150,
                                runs=10, seed=66, fdr="independent", alpha=0.1)
        results = run_meta(config)
        assert mfdr_estimate([r.records for r in results]) > 0.12

    @pytest.mark.parametrize("method", ["mab", "ab"])
    @pytest.mark.parametrize("fdr", ["lord", "lord15", "bonferroni"])
    def test_gaussian_pipeline_mfdr(self, method, fdr):
        config = ScenarioConfig(hypotheses=30, null_fraction=0.6, arms=6,
                                truncation=150, runs=8, seed=77,
                                method=method, fdr=fdr, alpha=0.1)
        results = run_meta(config)
        records = [r.records for r in results]
        assert mfdr_estimate(records) <= 0.2
        for run in records:
            for rec in run:
                if rec.rejected:
                    assert rec.pvalue <= rec.alpha_j and rec.returned_arm != 0

    def test_bernoulli_pipeline_mfdr(self):
        # scale-1 bounds on a [0, 1] reward need a wide gap to stop quickly
        config = ScenarioConfig(family="bernoulli", best_mean=0.9, gap=0.8,
                                hypotheses=20, null_fraction=0.6, arms=4,
                                truncation=600, runs=6, seed=88, alpha=0.1)
        results = run_meta(config)
        records = [r.records for r in results]
        assert mfdr_estimate(records) <= 0.2
        assert sum(rec.rejected for run in records for rec in run) > 0


class TestAggregateRow:
    def test_hand_built_batch(self):
        def rec(j, rejected, is_null, samples):
            return ExperimentRecord(
                j=j, is_null=is_null, alpha_j=0.01, pvalue=0.001 if rejected else 0.9,
                rejected=rejected, returned_arm=1, returned_mean=8.0,
                control_mean=2.0, best_mean=8.0, samples=samples, truncated=False)

        from mabfdr.harness import RunResult
        results = [
            RunResult(0, [rec(1, True, True, 10), rec(2, True, False, 20)]),
            RunResult(1, [rec(1, False, True, 30), rec(2, True, False, 40)]),
        ]
        config = ScenarioConfig(hypotheses=2, null_fraction=0.5, arms=3,
                                truncation=100, runs=2, seed=0)
        row = aggregate_row(config, results)
        assert row["J"] == 2 and row["runs"] == 2
        assert row["mfdr"] == pytest.approx(0.5 / 2.5)
        assert row["fdr_mean"] == pytest.approx(0.25)  # (1/2 + 0) / 2
        assert row["bdr"] == pytest.approx(1.0)
        assert row["mean_samples"] == pytest.approx(50.0)
        assert row["scenario_id"] == "gaussian|pi1=0.5"
        assert row["truncation"] == 100 and row["arms"] == 3
