import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothie_hpo.errors import (AllProbesFailed, ExactCoverageImpossible,
                                 InvalidGeometry, SpaceTooSmall)
from smoothie_hpo.fixtures import make_blobs
from smoothie_hpo.hpo import (SearchSpace, SmoothieParams, coverage_lower,
                              coverage_upper, default_learner_grids,
                              default_preprocessors, monte_carlo_coverage,
                              random_search, required_samples, sample_configs,
                              smoothie)


def tiny_space(epochs=3):
    """Small fast space: 6 scaler-only chains x 4 tiny ff shapes."""
    chains = [[], [{"kind": "standardize"}], [{"kind": "minmax"}],
              [{"kind": "maxabs"}], [{"kind": "robust"}],
              [{"kind": "normalize"}]]
    grids = {"ff": [{"layers": l, "units": u}
                    for l in (1, 2) for u in (2, 3)]}
    return SearchSpace(preprocessors=chains, learner_grids=grids,
                       train_params={"epochs": epochs, "learning_rate": 0.05,
                                     "batch_size": 16})


class TestSpace:
    def test_default_sizes(self):
        space = SearchSpace()
        assert len(default_preprocessors()) == 60
        grids = default_learner_grids()
        assert len(grids["ff"]) == 90
        assert len(grids["lr"]) == 9
        assert len(grids["gnb"]) == 1
        assert space.total_size == 6000

    def test_restrict_sizes(self):
        space = SearchSpace()
        assert space.restrict("ff").total_size == 60 * 90
        assert space.restrict("lr").total_size == 60 * 9
        assert space.restrict("gnb").total_size == 60

    def test_config_decode_roundtrip(self):
        space = tiny_space()
        seen = set()
        for i in range(space.total_size):
            cfg = space.config_at(i)
            key = (cfg.preprocessor, cfg.learner_kind,
                   tuple(sorted(cfg.learner_params.items())))
            key = (tuple(tuple(sorted(s.items())) for s in cfg.preprocessor),
                   cfg.learner_kind, tuple(sorted(cfg.learner_params.items())))
            assert key not in seen
            seen.add(key)
        assert len(seen) == space.total_size


class TestSampling:
    def test_exhaustive_when_n1_equals_size(self):
        space = tiny_space()
        configs = sample_configs(space, space.total_size, seed=0)
        assert sorted(c.index for c in configs) == list(range(space.total_size))

    def test_same_seed_identical(self):
        space = tiny_space()
        a = sample_configs(space, 10, seed=5)
        b = sample_configs(space, 10, seed=5)
        assert [c.index for c in a] == [c.index for c in b]

    def test_space_too_small(self):
        space = tiny_space()
        with pytest.raises(SpaceTooSmall):
            sample_configs(space, space.total_size + 1, seed=0)

    def test_marginal_uniformity_chi_square(self):
        # 10,000 draws of 3 from a 24-point space: every index frequency
        # within 3 sigma of the uniform expectation
        space = tiny_space()
        total = space.total_size
        draws, per = 10_000, 3
        counts = np.zeros(total)
        for rep in range(draws):
            for c in sample_configs(space, per, seed=rep):
                counts[c.index] += 1
        p = per / total
        expect = draws * p
        sigma = math.sqrt(draws * p * (1 - p))
        assert np.all(np.abs(counts - expect) <= 3 * sigma)


class TestSmoothie:
    def test_degenerate_n2_equals_n1_matches_exhaustive(self):
        train = make_blobs(m=60, seed=0)
        test = make_blobs(m=30, seed=1)
        space = tiny_space()
        params = SmoothieParams(N1=8, N2=8, seed=3)
        best_s, trials_s = smoothie(train, test, space, "ff", params,
                                    "accuracy")
        best_r, _ = random_search(train, test, space, "ff", 8, 3, "accuracy")
        assert best_s.config.index == best_r.config.index
        assert best_s.metrics == best_r.metrics

    def test_single_config(self):
        train = make_blobs(m=40, seed=2)
        test = make_blobs(m=20, seed=3)
        best, trials = smoothie(train, test, tiny_space(), "ff",
                                SmoothieParams(N1=1, N2=1, seed=0),
                                "accuracy")
        assert len(trials) == 1
        assert best.metrics is not None

    def test_full_run_count_equals_n2(self):
        train = make_blobs(m=50, seed=4)
        test = make_blobs(m=25, seed=5)
        params = SmoothieParams(N1=6, N2=2, seed=1)
        _, trials = smoothie(train, test, tiny_space(), "ff", params,
                             "accuracy")
        full_runs = [t for t in trials if t.metrics is not None]
        assert len(full_runs) == params.N2
        assert all(t.selected for t in full_runs)

    def test_best_is_member_of_selected_set_with_max_metric(self):
        train = make_blobs(m=50, seed=6)
        test = make_blobs(m=25, seed=7)
        params = SmoothieParams(N1=10, N2=4, seed=2)
        best, trials = smoothie(train, test, tiny_space(), "ff", params,
                                "accuracy")
        chosen = [t for t in trials if t.selected and t.status == "ok"]
        assert best in chosen
        assert best.metrics["accuracy"] == max(t.metrics["accuracy"]
                                               for t in chosen)

    def test_smoothie_deterministic(self):
        train = make_blobs(m=40, seed=8)
        test = make_blobs(m=20, seed=9)
        params = SmoothieParams(N1=5, N2=2, seed=11)
        b1, t1 = smoothie(train, test, tiny_space(), "ff", params, "accuracy")
        b2, t2 = smoothie(train, test, tiny_space(), "ff", params, "accuracy")
        assert b1.config.index == b2.config.index
        assert [t.smoothness.beta for t in t1 if t.smoothness] == \
            [t.smoothness.beta for t in t2 if t.smoothness]
        assert b1.metrics == b2.metrics

    def test_probe_cost_structure(self):
        train = make_blobs(m=60, seed=10)
        test = make_blobs(m=30, seed=11)
        params = SmoothieParams(N1=6, N2=2, seed=4)
        _, trials = smoothie(train, test, tiny_space(epochs=30), "ff",
                             params, "accuracy")
        probes = sum(1 for t in trials if t.probe_seconds > 0)
        fulls = sum(1 for t in trials if t.full_seconds > 0)
        assert probes == params.N1
        assert fulls == params.N2

    def test_failed_probes_topped_up(self):
        # three observed classes make every fuzzy chain fail its probe
        train = make_blobs(m=60, k=3, seed=12)
        test = make_blobs(m=30, k=3, seed=13)
        chains = [[], [{"kind": "fuzzy", "times": 1}],
                  [{"kind": "standardize"}], [{"kind": "minmax"}]]
        space = SearchSpace(preprocessors=chains,
                            learner_grids={"ff": [{"layers": 1, "units": 2}]},
                            train_params={"epochs": 2, "learning_rate": 0.05,
                                          "batch_size": 16})
        params = SmoothieParams(N1=3, N2=1, seed=0)
        best, trials = smoothie(train, test, space, "ff", params, "accuracy")
        ok_probes = [t for t in trials if t.smoothness is not None]
        failed = [t for t in trials if t.status == "failed"]
        assert len(ok_probes) == 3
        assert len(failed) == 1
        assert "NoMinority" in failed[0].fail_reason

    def test_all_probes_failed(self):
        train = make_blobs(m=60, k=3, seed=14)
        test = make_blobs(m=30, k=3, seed=15)
        space = SearchSpace(preprocessors=[[{"kind": "fuzzy", "times": 1}]],
                            learner_grids={"ff": [{"layers": 1, "units": 2}]},
                            train_params={"epochs": 2, "learning_rate": 0.05,
                                          "batch_size": 16})
        with pytest.raises(AllProbesFailed):
            smoothie(train, test, space, "ff", SmoothieParams(N1=1, N2=1),
                     "accuracy")

    def test_false_alarm_metric_minimized(self):
        train = make_blobs(m=60, seed=18)
        test = make_blobs(m=30, seed=19)
        params = SmoothieParams(N1=6, N2=3, seed=5)
        best, trials = smoothie(train, test, tiny_space(), "ff", params, "pf")
        chosen = [t for t in trials if t.selected and t.status == "ok"]
        assert best.metrics["pf"] == min(t.metrics["pf"] for t in chosen)

    def test_random_search_explores_probe_set(self):
        train = make_blobs(m=40, seed=16)
        test = make_blobs(m=20, seed=17)
        space = tiny_space()
        params = SmoothieParams(N1=6, N2=2, seed=21)
        _, s_trials = smoothie(train, test, space, "ff", params, "accuracy")
        _, r_trials = random_search(train, test, space, "ff", 6, 21,
                                    "accuracy")
        assert [t.config.index for t in s_trials] == \
            [t.config.index for t in r_trials]


class TestCoverage:
    def test_upper_plugin_values(self):
        assert coverage_upper(1, [0.5], [1.0]) == pytest.approx(1 - math.exp(-1))
        assert coverage_upper(0, [0.05], [1.0]) == 0.0
        assert coverage_upper(30, [0.05], [1.0]) == \
            pytest.approx(1 - math.exp(-3))

    def test_upper_invalid_geometry(self):
        with pytest.raises(InvalidGeometry):
            coverage_upper(1, [0.6], [1.0])     # 2k > L
        with pytest.raises(InvalidGeometry):
            coverage_upper(-1, [0.1], [1.0])
        with pytest.raises(InvalidGeometry):
            coverage_upper(1, [0.0], [1.0])

    def test_lower_plugin_values(self):
        assert coverage_lower(1, 0.1, 0.0, 1.0) == pytest.approx(0.2)  # 2k
        # large p approaches b - a - k
        assert coverage_lower(2000, 0.1, 0.0, 1.0) == pytest.approx(0.9)

    def test_lower_invalid_geometry(self):
        with pytest.raises(InvalidGeometry):
            coverage_lower(1, 0.6, 0.0, 1.0)
        with pytest.raises(InvalidGeometry):
            coverage_lower(0, 0.1, 0.0, 1.0)
        with pytest.raises(InvalidGeometry):
            coverage_lower(1, 0.1, 1.0, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(p=st.integers(0, 50), frac=st.floats(0.01, 1.0))
    def test_upper_monotone_in_p(self, p, frac):
        assert coverage_upper(p + 1, [frac / 2], [1.0]) >= \
            coverage_upper(p, [frac / 2], [1.0])

    @settings(max_examples=30, deadline=None)
    @given(p=st.integers(0, 50), f1=st.floats(0.02, 0.98),
           f2=st.floats(0.02, 0.98))
    def test_upper_monotone_in_fraction(self, p, f1, f2):
        lo, hi = sorted([f1, f2])
        assert coverage_upper(p, [hi / 2], [1.0]) >= \
            coverage_upper(p, [lo / 2], [1.0])

    @settings(max_examples=30, deadline=None)
    @given(p=st.integers(1, 50), k=st.floats(0.01, 0.33))
    def test_lower_monotone_in_p(self, p, k):
        # monotone only while b - a - 3k >= 0; above k = (b-a)/3 the closed
        # form starts above its own limit and decreases
        assert coverage_lower(p + 1, k, 0.0, 1.0) >= \
            coverage_lower(p, k, 0.0, 1.0) - 1e-12

    def test_lower_below_upper_with_slack(self):
        # the exponential-form upper bound dips below the recurrence lower
        # bound for very small p; the documented 0.02 slack absorbs it
        for p in range(1, 31):
            lo = coverage_lower(p, 0.05, 0.0, 1.0)
            hi = coverage_upper(p, [0.05], [1.0])
            assert lo <= hi + 0.02

    def test_monte_carlo_sandwich_small(self):
        for p in (1, 5, 20):
            emp = monte_carlo_coverage(p, 0.05, 0.0, 1.0, trials=20_000,
                                       seed=p)
            assert coverage_lower(p, 0.05, 0.0, 1.0) - 0.02 <= emp
            assert emp <= coverage_upper(p, [0.05], [1.0]) + 0.02

    def test_required_samples(self):
        assert required_samples([0.1], 0.95) == 30
        assert required_samples([0.1], 0.0) == 0
        with pytest.raises(ExactCoverageImpossible):
            required_samples([0.1], 1.0)
        with pytest.raises(InvalidGeometry):
            required_samples([0.0], 0.5)

    def test_required_samples_reaches_target(self):
        for target in (0.5, 0.9, 0.99):
            p = required_samples([0.1], target)
            assert coverage_upper(p, [0.05], [1.0]) >= target
            if p > 0:
                assert coverage_upper(p - 1, [0.05], [1.0]) < target
