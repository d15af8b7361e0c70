import numpy as np
import pytest
from scipy.optimize import linprog

from sdrisk.axioms import (
    AxiomReport,
    CheckConfig,
    Density,
    acceptance_identity,
    check_coherence,
    check_deviation,
    check_ordering_and_parameters,
    dilation_check,
    es_dual_lp,
    es_dual_weights,
    random_densities,
    sd_envelope_bound,
)
from sdrisk.errors import InvalidParameterError
from sdrisk.measures import ReturnSeries, RiskConfig, es_hs, sd_hs

FAST = CheckConfig(trials=200, seed=3)

# the ten properties the randomized suites must establish without a single
# recorded failure
CLEAN_COHERENCE = (
    "translation-invariance",
    "positive-homogeneity",
    "subadditivity",
    "monotonicity",
    "relevance",
    "strictness",
    "law-invariance",
    "ordering-chain",
)
CLEAN_DEVIATION = ("non-negativity", "lower-range-dominance")


class TestDensity:
    def test_mean_one_accepted(self):
        d = Density([0.5, 1.5, 2.0, 0.0])
        assert d.weights.sum() == 4.0

    def test_mean_off_rejected_not_renormalized(self):
        with pytest.raises(InvalidParameterError, match="renormalized"):
            Density([0.5, 1.5, 2.0, 0.5])

    def test_negative_weights_construct_but_fail_es_membership(self):
        # mean-1 is the construction invariant; the sign constraint belongs
        # to the ES envelope, not the type
        d = Density([-0.5, 1.5, 2.0, 1.0])
        assert not d.is_es_feasible(0.25)

    def test_es_feasibility_cap(self):
        d = Density([2.0, 0.0, 2.0, 0.0])
        assert d.is_es_feasible(0.5)
        assert not d.is_es_feasible(0.6)  # cap 1/0.6 < 2

    def test_dispersion(self):
        d = Density([2.0, 0.0, 2.0, 0.0])
        assert d.dispersion == pytest.approx(1.0, rel=1e-15)
        assert Density(np.ones(5)).dispersion == 0.0


class TestRandomizedSuites:
    def test_coherence_entries_all_clean(self):
        report = check_coherence(FAST)
        assert tuple(e.name for e in report.entries) == CLEAN_COHERENCE
        for e in report.entries:
            assert e.trials == FAST.trials
            assert e.failures == 0, e.name
        assert not report.failed()

    def test_deviation_clean_except_subadditivity(self):
        report = check_deviation(FAST)
        for name in CLEAN_DEVIATION + ("translation-insensitivity",
                                       "positive-homogeneity", "law-invariance"):
            assert report.entry(name).failures == 0, name

    def test_deviation_subadditivity_records_real_failures(self):
        # the dispersion component is anchored at its argument's own tail
        # mean, which genuinely breaks subadditivity on some pairs; the
        # suite must report that honestly rather than paper over it
        report = check_deviation(CheckConfig(trials=2000, seed=3))
        entry = report.entry("subadditivity")
        assert entry.failures > 0
        assert entry.max_violation > entry.tolerance
        assert "expected to fail" in entry.note
        assert report.failed()

    def test_subadditivity_counterexample_by_hand(self):
        # alpha = 0.5: both margins have flat lower halves, zero deviation;
        # the sum spreads below its own tail mean
        kw = dict(alpha=0.5, p=2.0, mode="coherent")
        x = ReturnSeries([0.0, 0.0, 10.0, 10.0])
        y = ReturnSeries([10.0, 0.0, 0.0, 10.0])
        xy = ReturnSeries([10.0, 0.0, 10.0, 20.0])
        assert sd_hs(x, **kw) == 0.0
        assert sd_hs(y, **kw) == 0.0
        assert sd_hs(xy, **kw) == 2.5

    def test_thread_counts_agree_exactly(self):
        cfg = CheckConfig(trials=64, seed=11)
        assert check_coherence(cfg, threads=1).as_dict() == \
            check_coherence(cfg, threads=8).as_dict()
        assert check_deviation(cfg, threads=1).as_dict() == \
            check_deviation(cfg, threads=8).as_dict()

    def test_config_refuses_literal_mode(self):
        with pytest.raises(InvalidParameterError, match="coherent"):
            CheckConfig(mode="literal")

    def test_entry_lookup_unknown_name(self):
        report = check_coherence(CheckConfig(trials=8))
        with pytest.raises(KeyError):
            report.entry("frobnication")


class TestOrderingGrid:
    def test_clean_on_gaussian_sample(self, small_sample):
        report = check_ordering_and_parameters(
            small_sample, [0.01, 0.05, 0.1, 0.25, 0.5], [0.0, 0.5, 1.0, 2.0, 5.0]
        )
        assert report.entry("ordering-chain").failures == 0
        assert report.entry("beta-monotonicity").failures == 0
        assert report.entry("beta-monotonicity").tolerance == 0.0

    def test_alpha_direction_is_advisory(self, small_sample):
        report = check_ordering_and_parameters(
            small_sample, np.linspace(0.02, 0.5, 25), [1.0]
        )
        entry = report.entry("alpha-monotonicity")
        assert entry.advisory
        # even if quantile jumps trip it, the verdict must not change
        assert not report.failed() or report.entry("ordering-chain").failures > 0

    def test_grid_validation(self, small_sample):
        with pytest.raises(InvalidParameterError):
            check_ordering_and_parameters(small_sample, [], [1.0])
        with pytest.raises(InvalidParameterError):
            check_ordering_and_parameters(small_sample, [0.1], [-1.0])


class TestDualRepresentation:
    def test_lp_equals_plugin_exactly(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            n = int(rng.integers(16, 200))
            x = ReturnSeries(rng.standard_normal(n) * rng.uniform(0.5, 3.0))
            a = float(rng.uniform(1.5 / n, 0.6))
            assert es_dual_lp(x, a) == es_hs(x, a, "coherent")

    def test_greedy_weights_form(self):
        x = ReturnSeries([5.0, -2.0, 1.0, -7.0, 3.0, 0.0, 2.0, -1.0])
        d = es_dual_weights(x, 0.25)  # na = 2, floor = 2, cap = 4
        w = d.weights
        assert w[3] == 4.0 and w[1] == 4.0  # two smallest take the cap
        assert w.sum() == 8.0
        assert d.is_es_feasible(0.25)

    def test_greedy_weights_fractional_boundary(self):
        x = ReturnSeries([4.0, 1.0, 2.0, 3.0, 0.0])
        d = es_dual_weights(x, 0.3)  # na = 1.5, floor = 1, cap = 10/3
        w = d.weights
        assert w[4] == pytest.approx(10.0 / 3.0, rel=1e-15)
        assert w[1] == pytest.approx(5.0 - 10.0 / 3.0, rel=1e-12)
        assert w.sum() == pytest.approx(5.0, rel=1e-15)

    def test_objective_of_weights_matches_value(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(10, 60))
            x = ReturnSeries(rng.standard_normal(n))
            a = float(rng.uniform(1.5 / n, 0.5))
            d = es_dual_weights(x, a)
            objective = -float(np.mean(d.weights * x.values))
            assert objective == pytest.approx(es_dual_lp(x, a), rel=1e-12, abs=1e-12)

    def test_against_scipy_linprog(self):
        # independent solver for max E[-wX] over the envelope
        rng = np.random.default_rng(29)
        for _ in range(25):
            n = int(rng.integers(8, 40))
            x = rng.standard_normal(n)
            a = float(rng.uniform(1.5 / n, 0.5))
            res = linprog(
                c=x / n,
                A_eq=np.full((1, n), 1.0 / n),
                b_eq=[1.0],
                bounds=[(0.0, 1.0 / a)] * n,
                method="highs",
            )
            assert res.success
            assert -res.fun == pytest.approx(es_dual_lp(ReturnSeries(x), a),
                                             rel=1e-8, abs=1e-8)


class TestEnvelopeBound:
    def test_zero_violations_on_random_candidates(self, small_sample):
        cands = random_densities(len(small_sample), 500, seed=4)
        report = sd_envelope_bound(small_sample, 0.05, 2.0, cands)
        entry = report.entry("envelope-lower-bound")
        assert entry.failures == 0
        assert entry.trials + entry.skipped == 500
        assert entry.trials > 0  # the batch must actually exercise the bound
        assert entry.skipped > 0  # and the membership filter

    def test_uniform_density_always_member(self, small_sample):
        report = sd_envelope_bound(small_sample, 0.05, 2.0,
                                   [Density(np.ones(len(small_sample)))])
        entry = report.entry("envelope-lower-bound")
        assert (entry.trials, entry.skipped, entry.failures) == (1, 0, 0)

    def test_zero_variance_series_notes_and_checks_all(self):
        s = ReturnSeries(np.full(40, 2.0))
        cands = random_densities(40, 50, seed=5)
        report = sd_envelope_bound(s, 0.25, 2.0, cands)
        entry = report.entry("envelope-lower-bound")
        assert entry.trials == 50 and entry.skipped == 0
        assert "zero-variance" in entry.note
        assert entry.failures == 0

    def test_candidate_validation(self, small_sample):
        with pytest.raises(InvalidParameterError, match="candidate 0"):
            sd_envelope_bound(small_sample, 0.05, 2.0, [Density(np.ones(3))])

    def test_random_densities_deterministic(self):
        a = random_densities(10, 3, seed=9)
        b = random_densities(10, 3, seed=9)
        for d1, d2 in zip(a, b):
            assert np.array_equal(d1.weights, d2.weights)


class TestAcceptanceIdentity:
    def test_residual_small_on_random_samples(self):
        rng = np.random.default_rng(13)
        cfg = RiskConfig(alpha=0.1, beta=1.0, p=2.0, mode="coherent")
        for _ in range(200):
            x = ReturnSeries(rng.standard_normal(int(rng.integers(20, 300))))
            scale = max(1.0, float(np.max(np.abs(x.values))))
            assert acceptance_identity(x, cfg) <= 1e-9 * scale


class TestDilation:
    def test_single_group_collapses_to_mean(self, small_sample):
        n = len(small_sample)
        report = dilation_check(small_sample, [list(range(n))],
                                RiskConfig(alpha=0.1, mode="coherent"))
        assert report.entry("dilation").failures == 0

    def test_singleton_groups_change_nothing(self, small_sample):
        n = len(small_sample)
        report = dilation_check(small_sample, [[i] for i in range(n)],
                                RiskConfig(alpha=0.1, mode="coherent"))
        entry = report.entry("dilation")
        assert entry.failures == 0
        assert entry.max_violation == 0.0

    def test_random_partitions_never_raise_risk(self):
        rng = np.random.default_rng(41)
        cfg = RiskConfig(alpha=0.1, beta=1.0, mode="coherent")
        for _ in range(100):
            n = int(rng.integers(20, 120))
            x = ReturnSeries(rng.standard_normal(n))
            labels = rng.integers(0, int(rng.integers(2, 8)), n)
            parts = [np.flatnonzero(labels == g) for g in np.unique(labels)]
            report = dilation_check(x, parts, cfg)
            assert report.entry("dilation").failures == 0

    def test_partition_must_cover_exactly(self, small_sample):
        n = len(small_sample)
        with pytest.raises(InvalidParameterError, match="cover"):
            dilation_check(small_sample, [list(range(n - 1))],
                           RiskConfig(alpha=0.1))
        with pytest.raises(InvalidParameterError, match="cover"):
            dilation_check(small_sample, [list(range(n)), [0]],
                           RiskConfig(alpha=0.1))
        with pytest.raises(InvalidParameterError, match="non-empty"):
            dilation_check(small_sample, [list(range(n)), []],
                           RiskConfig(alpha=0.1))


class TestReportPlumbing:
    def test_as_dict_round_trip(self):
        report = check_coherence(CheckConfig(trials=8, seed=2))
        d = report.as_dict()
        assert set(d) == {"entries", "failed"}
        assert d["failed"] is False
        assert len(d["entries"]) == len(CLEAN_COHERENCE)
        assert all({"name", "trials", "failures", "max_violation",
                    "tolerance"} <= set(e) for e in d["entries"])

    def test_advisory_excluded_from_failed(self):
        report = AxiomReport(
            entries=(
                check_coherence(CheckConfig(trials=4)).entries[0],
            )
        )
        assert not report.failed()
