import numpy as np
import pytest

from regimevol import (
    ExplosivePath,
    GammaGrid,
    NoFeasibleThreshold,
    RankDeficient,
    TransitionSpec,
    exponential_transition,
    fit_ar,
    fit_lstar,
    fit_setar,
    logistic_transition,
    one_step_fitted,
    select_ar_order,
    simulate,
)
from regimevol.regimes import LAGGED_VALUE, TIME, ThresholdVariable
from tests.conftest import make_regime_model


class TestTransitionFunctions:
    def test_logistic_midpoint(self):
        assert logistic_transition(5.0, 2.0, 5.0) == 0.5

    def test_logistic_analytic_point(self):
        assert logistic_transition(np.log(3.0), 1.0, 0.0) == pytest.approx(0.75, abs=1e-15)

    def test_logistic_saturation(self):
        # high-precision oracle: 1/(1+exp(-20)) differs from 1 by ~2e-9
        assert 1.0 - logistic_transition(0.1, 200.0, 0.0) < 1e-3
        assert logistic_transition(0.1, 200.0, 0.0) == pytest.approx(1.0 / (1.0 + np.exp(-20.0)), rel=1e-12)

    def test_logistic_monotone_and_bounded(self):
        z = np.linspace(-30, 30, 301)
        w = logistic_transition(z, 0.7, 1.3)
        assert np.all(np.diff(w) > 0)
        assert np.all((w > 0) & (w < 1))

    def test_exponential_vanishes_at_threshold(self):
        assert exponential_transition(2.0, 3.0, 2.0) == 0.0

    def test_exponential_analytic_point(self):
        z = np.sqrt(np.log(2.0))
        assert exponential_transition(z, 1.0, 0.0) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("a", [0.1, 0.5, 2.0, 7.0])
    def test_exponential_even_symmetry(self, a):
        c = 0.8
        assert exponential_transition(c + a, 1.7, c) == pytest.approx(
            exponential_transition(c - a, 1.7, c), abs=1e-15
        )

    def test_gamma_must_be_positive(self):
        with pytest.raises(ValueError):
            logistic_transition(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            TransitionSpec("logistic", -1.0, 0.0)


class TestFitAr:
    def test_recovers_known_coefficient(self, ar1_model):
        hits = 0
        for seed in range(20):
            x = simulate(ar1_model, 500, 0.1, seed=seed)
            m = fit_ar(x, 1)
            hits += abs(m.regimes[0][1] - 0.9) <= 0.05
        assert hits >= 18

    def test_constant_series_is_rank_deficient(self):
        with pytest.raises(RankDeficient):
            fit_ar(np.full(50, 3.2), 1)

    def test_parameter_count_and_label(self, ar1_model):
        x = simulate(ar1_model, 200, 0.1, seed=0)
        m = fit_ar(x, 2)
        assert m.n_parameters == 3
        assert m.label == "ar(2)"

    def test_fitted_plus_residuals_reconstructs_response(self, ar1_model):
        x = simulate(ar1_model, 300, 0.1, seed=1)
        m = fit_ar(x, 1)
        # residuals are defined as response minus fitted, bit for bit
        assert np.array_equal(m.residuals, x[1:] - m.fitted)
        np.testing.assert_allclose(m.fitted + m.residuals, x[1:], rtol=0, atol=1e-15)


class TestSelectArOrder:
    def test_white_noise_prefers_zero_by_bic(self):
        gen = make_regime_model("ar", [[0.0, 0.0]])
        hits = 0
        for seed in range(100):
            x = simulate(gen, 300, 1.0, seed=seed)
            hits += select_ar_order(x, 6).best_bic == 0
        assert hits >= 90

    def test_ar1_signal_found_by_aic(self):
        gen = make_regime_model("ar", [[0.0, 0.9]])
        hits = 0
        for seed in range(100):
            x = simulate(gen, 300, 0.1, seed=seed)
            hits += select_ar_order(x, 6).best_aic >= 1
        assert hits >= 95

    def test_common_sample_is_shared(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=120)
        table = select_ar_order(x, 10)
        assert [row[0] for row in table.rows] == list(range(11))


class TestFitSetar:
    def test_recovery_pass_rate(self, setar_generator):
        # slope standard errors put single-seed misses around 10%; see the
        # acceptance suite for the full criterion run
        hits = 0
        for seed in range(30):
            x = simulate(setar_generator, 500, 0.1, seed=seed)
            m = fit_setar(x, 1, 2, ThresholdVariable(LAGGED_VALUE, 1))
            errs = np.concatenate(
                [np.abs(m.regimes[0] - 0.5), np.abs(m.regimes[1] + 0.5)]
            )
            hits += abs(m.thresholds[0]) <= 0.1 and np.all(errs <= 0.1)
        assert hits >= 24

    def test_nested_in_ar(self, ar1_model):
        # at n=2500 the searched-threshold overfitting gain is well under 1%
        x = simulate(ar1_model, 2500, 0.1, seed=3)
        ar = fit_ar(x, 1)
        setar2 = fit_setar(x, 1, 2, ThresholdVariable(LAGGED_VALUE, 1))
        assert setar2.rss <= ar.rss + 1e-12
        assert setar2.rss >= ar.rss * 0.99

    def test_three_regimes_nest_two(self, setar_generator):
        x = simulate(setar_generator, 500, 0.1, seed=7)
        two = fit_setar(x, 1, 2, ThresholdVariable(LAGGED_VALUE, 1), min_fraction=0.10)
        three = fit_setar(x, 1, 3, ThresholdVariable(LAGGED_VALUE, 1), min_fraction=0.10)
        assert three.rss <= two.rss + 1e-12

    def test_proportions_respect_min_fraction(self, setar_generator):
        x = simulate(setar_generator, 500, 0.1, seed=11)
        m = fit_setar(x, 1, 3, ThresholdVariable(LAGGED_VALUE, 1), min_fraction=0.10)
        assert np.all(m.regime_proportions >= 0.10 - 1e-12)
        assert m.regime_proportions.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(m.thresholds) > 0)

    def test_tie_break_prefers_smallest_threshold(self):
        # an exact AR(1) relation makes every split a perfect fit, so the
        # tie-break must return the smallest feasible time threshold
        t = np.arange(1, 121)
        x = 1.0 + 0.97**t
        m = fit_setar(x, 1, 2, ThresholdVariable(TIME))
        rows = 119
        min_count = max(int(np.ceil(0.15 * rows)), 3)
        assert m.thresholds[0] == float(2 + min_count)
        assert m.rss == pytest.approx(0.0, abs=1e-18)

    def test_no_feasible_threshold(self):
        x = np.linspace(0.0, 1.0, 30) ** 2
        with pytest.raises((NoFeasibleThreshold, Exception)):
            fit_setar(x, 1, 2, min_fraction=0.6)

    def test_time_threshold_grid(self):
        gen = make_regime_model(
            "setar",
            [[0.3, 0.2], [-0.3, 0.2]],
            thresholds=[150.0],
            tv=ThresholdVariable(TIME),
        )
        x = simulate(gen, 400, 0.1, seed=5)
        m = fit_setar(x, 1, 2, ThresholdVariable(TIME))
        assert abs(m.thresholds[0] - 150.0) <= 10
        assert np.array_equal(m.fitted + m.residuals, x[1:])

    def test_determinism(self, setar_generator):
        x = simulate(setar_generator, 400, 0.1, seed=13)
        a = fit_setar(x, 1, 2, ThresholdVariable(LAGGED_VALUE, 1))
        b = fit_setar(x, 1, 2, ThresholdVariable(LAGGED_VALUE, 1))
        assert np.array_equal(a.thresholds, b.thresholds)
        assert all(np.array_equal(p, q) for p, q in zip(a.regimes, b.regimes))


class TestFitLstar:
    def test_single_seed_recovery(self, lstar_lagged_generator):
        x = simulate(lstar_lagged_generator, 500, 0.1, seed=0)
        m = fit_lstar(x, 1, 1, ThresholdVariable(LAGGED_VALUE, 1))
        span = x.max() - x.min()
        assert abs(m.transitions[0].c) <= 0.05 * span
        assert 5.0 <= m.transitions[0].gamma <= 20.0
        assert m.kind == "lstar"
        assert m.n_parameters == 6

    def test_degenerate_second_regime_block_is_near_zero(self, ar1_model):
        misses = 0
        for seed in (0, 1, 2):
            x = simulate(ar1_model, 500, 0.1, seed=seed)
            m = fit_lstar(x, 1, 1, ThresholdVariable(LAGGED_VALUE, 1))
            misses += np.any(np.abs(m.regimes[1]) > 0.05)
        assert misses <= 1

    def test_estar_kind_and_symmetry(self, lstar_lagged_generator):
        x = simulate(lstar_lagged_generator, 400, 0.1, seed=2)
        m = fit_lstar(x, 1, 1, ThresholdVariable(LAGGED_VALUE, 1), transition="exponential")
        assert m.kind == "estar"
        assert m.transitions[0].kind == "exponential"

    def test_two_transitions_ordered_thresholds(self):
        gen = make_regime_model(
            "lstar",
            [[0.01, 0.9], [0.05, -0.3], [0.04, -0.4]],
            thresholds=[150.0, 300.0],
            transitions=[
                TransitionSpec("logistic", 0.05, 150.0),
                TransitionSpec("logistic", 0.05, 300.0),
            ],
            tv=ThresholdVariable(TIME),
        )
        x = simulate(gen, 450, 0.05, seed=4)
        m = fit_lstar(x, 1, 2, ThresholdVariable(TIME))
        assert len(m.transitions) == 2
        assert m.thresholds[0] < m.thresholds[1]
        assert m.n_parameters == 10

    def test_exact_gamma_grid_values(self):
        grid = GammaGrid(lo=1.0, hi=2.0, step=0.25)
        assert grid.values().tolist() == [1.0, 1.25, 1.5, 1.75, 2.0]

    def test_exact_arithmetic_grid_mode(self, lstar_lagged_generator):
        x = simulate(lstar_lagged_generator, 200, 0.1, seed=6)
        m = fit_lstar(
            x, 1, 1, ThresholdVariable(LAGGED_VALUE, 1),
            gamma_grid=GammaGrid(lo=1.0, hi=20.0, step=0.5),
        )
        assert 1.0 <= m.transitions[0].gamma <= 20.0

    def test_grid_determinism(self, lstar_lagged_generator):
        x = simulate(lstar_lagged_generator, 300, 0.1, seed=9)
        a = fit_lstar(x, 1, 1, ThresholdVariable(LAGGED_VALUE, 1), refine=False)
        b = fit_lstar(x, 1, 1, ThresholdVariable(LAGGED_VALUE, 1), refine=False)
        assert a.transitions[0].gamma == b.transitions[0].gamma
        assert a.transitions[0].c == b.transitions[0].c


class TestOneStepFitted:
    def test_zero_coefficient_ar_predicts_intercept(self):
        m = make_regime_model("ar", [[0.7, 0.0]])
        fitted, resid = one_step_fitted(m, np.array([1.0, 2.0, 3.0, 4.0]))
        assert np.all(fitted == 0.7)
        assert resid.tolist() == [1.3, 2.3, 3.3]

    def test_setar_self_consistency_bitwise(self, setar_generator):
        x = simulate(setar_generator, 400, 0.1, seed=21)
        m = fit_setar(x, 1, 2, ThresholdVariable(LAGGED_VALUE, 1))
        fitted, resid = one_step_fitted(m, x)
        assert np.array_equal(fitted, m.fitted)
        assert np.array_equal(resid, m.residuals)

    def test_sharp_lstar_approaches_setar(self, setar_generator):
        x = simulate(setar_generator, 300, 0.1, seed=17)
        setar = make_regime_model(
            "setar", [[0.5, 0.5], [-0.5, -0.5]], thresholds=[0.0],
            tv=ThresholdVariable(LAGGED_VALUE, 1),
        )
        lstar = make_regime_model(
            "lstar", [[0.5, 0.5], [-1.0, -1.0]], thresholds=[0.0],
            transitions=[TransitionSpec("logistic", 200.0, 0.0)],
            tv=ThresholdVariable(LAGGED_VALUE, 1),
        )
        f_setar, _ = one_step_fitted(setar, x)
        f_lstar, _ = one_step_fitted(lstar, x)
        away = np.abs(x[:-1] - 0.0) > 0.05
        assert np.max(np.abs(f_setar[away] - f_lstar[away])) < 1e-2


class TestSimulate:
    def test_zero_model_zero_noise_is_all_zeros(self):
        m = make_regime_model("ar", [[0.0, 0.0]])
        assert np.all(simulate(m, 50, 0.0, seed=0) == 0.0)

    def test_explosive_path_raises(self):
        m = make_regime_model("ar", [[0.0, 1.5]])
        with pytest.raises(ExplosivePath):
            simulate(m, 500, 1.0, seed=0)

    def test_same_seed_identical(self, setar_generator):
        a = simulate(setar_generator, 200, 0.1, seed=33)
        b = simulate(setar_generator, 200, 0.1, seed=33)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self, setar_generator):
        a = simulate(setar_generator, 200, 0.1, seed=1)
        b = simulate(setar_generator, 200, 0.1, seed=2)
        assert not np.array_equal(a, b)
