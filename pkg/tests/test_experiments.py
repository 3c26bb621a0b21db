import numpy as np
import pytest

from conftest import cp_exp, cp_unit
from supou.experiments import (
    DEFAULT_TOLERANCES,
    ConfigurationError,
    GrowthReport,
    Tolerances,
    exotic_partial_sums,
    exotic_threshold,
    lil_normalizer,
    run_growth_sweep,
    run_lil_experiment,
    run_mz_experiment,
    verify_exotic,
    verify_levy_tail,
)
from supou.measures import GeneratingQuadruple, LevyFamily, ParetoTail, PointMass, PowerDensity
from supou.simulator import SimConfig


class TestTolerances:
    def test_defaults(self):
        t = DEFAULT_TOLERANCES
        assert (t.mz_factor, t.lil_max_band, t.lil_median_band) == (0.5, (0.3, 1.6), (0.4, 1.3))
        assert (t.slope_margin, t.probe_ratio, t.tail_z) == (0.15, 1.25, 3.0)

    def test_bad_band(self):
        with pytest.raises(ConfigurationError):
            Tolerances(lil_max_band=(2.0, 1.0))


class TestMZ:
    def test_small_run_reports(self):
        q = GeneratingQuadruple(cp_exp(), PointMass(1.0))
        cfg = SimConfig(horizon=1e3, grid_points=20, n_paths=10, seed=0)
        rep = run_mz_experiment(q, 2.0, cfg, threads=1)
        assert rep.experiment == "mz"
        assert rep.per_path["M_first"].shape == (10,)
        # the running max over u >= t can only shrink as t grows
        assert np.all(rep.per_path["M_tail"] <= rep.per_path["M_first"])
        assert "mz_tail_over_first" in rep.summary()

    def test_gamma_condition_enforced(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.5)), PointMass(1.0))
        cfg = SimConfig(horizon=1e3, grid_points=20)
        with pytest.raises(ConfigurationError, match="infinite"):
            run_mz_experiment(q, 2.0, cfg)

    def test_short_grid_rejected(self):
        q = GeneratingQuadruple(cp_exp(), PointMass(1.0))
        with pytest.raises(ConfigurationError):
            run_mz_experiment(q, 2.0, SimConfig(horizon=50.0, grid_points=5))

    def test_gamma_range(self):
        q = GeneratingQuadruple(cp_exp(), PointMass(1.0))
        with pytest.raises(ConfigurationError):
            run_mz_experiment(q, 2.5, SimConfig(horizon=1e3, grid_points=5))


class TestLIL:
    def test_jump_normalizer(self):
        q = GeneratingQuadruple(cp_unit(), PointMass(1.0))
        t = np.array([1e3, 1e4])
        expect = np.sqrt(2 * t * np.log(np.log(t)))  # m_2(lambda) = m_-2(pi) = 1
        np.testing.assert_allclose(lil_normalizer(q, t), expect)

    def test_mixed_model_rejected(self):
        q = GeneratingQuadruple(cp_unit(), PointMass(1.0), b=1.0)
        with pytest.raises(ConfigurationError):
            lil_normalizer(q, np.array([1e3]))

    def test_small_run(self):
        q = GeneratingQuadruple(LevyFamily(), PointMass(1.0), b=1.0)
        cfg = SimConfig(horizon=1e4, grid_points=30, n_paths=20, seed=0)
        rep = run_lil_experiment(q, cfg, threads=1)
        assert [c.name for c in rep.criteria] == ["lil_cross_path_max", "lil_median"]
        assert 0.2 < rep.stats["median_sup_ratio"] < 2.0

    def test_grid_must_reach_start(self):
        q = GeneratingQuadruple(cp_unit(), PointMass(1.0))
        with pytest.raises(ConfigurationError):
            run_lil_experiment(q, SimConfig(horizon=100.0, grid_points=10))


class TestGrowth:
    def test_small_sweep(self):
        models = [GeneratingQuadruple(cp_exp(), PointMass(1.0))]
        cfg = SimConfig(horizon=1e3, grid_points=20, n_paths=10, seed=0)
        (rep,) = run_growth_sweep(models, cfg, threads=1, names=["cp"])
        assert rep.experiment == "growth:cp"
        assert rep.stats["bound"] == 0.5 and rep.stats["case_tag"] == "half"
        assert {c.name for c in rep.criteria} == {"slope_plus_2se", "intermittency_probe_ratio"}

    def test_degenerate_zero(self):
        q = GeneratingQuadruple(LevyFamily(), PointMass(1.0))
        cfg = SimConfig(horizon=1e3, grid_points=20, n_paths=2)
        (rep,) = run_growth_sweep([q], cfg, threads=1)
        assert rep.stats["degenerate_zero"] and rep.skipped and not rep.passed


class TestLevyTail:
    def test_monte_carlo_agrees(self):
        q = GeneratingQuadruple(cp_unit(2.0), PointMass(1.0))
        cfg = SimConfig(horizon=1.0, times=(1.0,), seed=0)
        rep = verify_levy_tail(q, 1.0, [0.1, 0.3, 0.5], cfg, n_rep=2000)
        assert len(rep.criteria) == 4
        assert rep.stats["quadrature"][0] > rep.stats["quadrature"][2] > 0

    def test_needs_positive_jumps(self):
        q = GeneratingQuadruple(LevyFamily(cp_unit().positive, cp_unit().positive), PointMass(1.0))
        with pytest.raises(ConfigurationError):
            verify_levy_tail(q, 1.0, [0.1], SimConfig(horizon=1.0, times=(1.0,)))


class TestExotic:
    @pytest.mark.parametrize("a,b", [(0.5, 1.8), (0.0, 1.0), (1.0, 2.5)])
    def test_pairs(self, a, b):
        thr = exotic_threshold(a, b)
        rep = verify_exotic(a, b, [thr - 0.2, thr - 0.01, thr + 0.01, thr + 0.2])
        assert rep.passed, rep.summary()

    def test_beta_above_one_plus_alpha(self):
        rep = verify_exotic(0.5, 1.8, [1.0])
        assert rep.stats["beta_exceeds_one_plus_alpha"]

    def test_partial_sums(self):
        s = exotic_partial_sums(0.5, 1.8, 1.0)
        assert s.size == 6 and np.all(np.diff(s) > 0)

    def test_bad_parameters(self):
        with pytest.raises(ConfigurationError):
            verify_exotic(-1.0, 1.0, [0.5])


def test_report_summary_format():
    rep = GrowthReport("demo", "abc")
    rep.add("x", 1.0, "< 2", True)
    rep.add("y", 3.0, "< 2", False, "note")
    text = rep.summary()
    assert text.splitlines()[0] == "demo [abc]: FAIL"
    assert "FAIL y: 3 (< 2) note" in text
