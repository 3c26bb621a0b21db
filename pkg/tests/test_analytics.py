import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import SHIPPED_MODELS, cp_exp, cp_unit
from supou._numeric import DomainError
from supou.analytics import (
    CASE_TAGS,
    HypothesisError,
    NumericError,
    _scaled_inner,
    exp_moment,
    factorize_covariance,
    gaussian_covariance,
    gaussian_variance,
    growth_exponent,
    k0,
    kernel,
    kernel_l2,
    levy_tail_integrated,
    levy_tail_integrated_with_error,
    lil_envelope,
    limit_class,
    mean_integrated,
    moment_finite,
    tail_asymptote_constant,
    variance_integrated,
)
from supou.measures import (
    CompoundPoisson,
    GeneratingQuadruple,
    IndexTriple,
    LevyFamily,
    ParetoTail,
    PointMass,
    PowerDensity,
    StableLike,
    compute_indices,
)


def unit_jump_tail(rho, t, r):
    """Closed-form eta*_t(r) for pi = PointMass(1) and rho unit jumps.

    int_{z0}^1 rho / (z - r) dz with z0 = r / (1 - e^-t), valid while z0 < 1.
    """
    return rho * math.log((1.0 - r) * (1.0 - math.exp(-t)) / (r * math.exp(-t)))


class TestKernel:
    def test_bounds_and_monotonicity(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(1e-3, 10.0, 10_000)
        s = rng.uniform(-20.0, 20.0, 10_000)
        t = rng.uniform(1e-3, 20.0, 10_000)
        f = kernel(x, s, t)
        assert np.all(f >= 0.0)
        assert np.all(f <= np.minimum(t, 1.0 / x) * (1 + 1e-12))
        assert np.all(kernel(x, s, t + 0.5) >= f - 1e-15)
        assert np.all(f[s > t] == 0.0)

    @pytest.mark.parametrize("x,t", [(1.0, 1.0), (0.01, 5.0), (3.0, 0.2), (1e-4, 2.0)])
    def test_l2_against_quadrature(self, x, t):
        past, _ = integrate.quad(lambda s: kernel(x, s, t) ** 2, -np.inf, 0.0)
        fut, _ = integrate.quad(lambda s: kernel(x, s, t) ** 2, 0.0, t)
        assert kernel_l2(x, t) == pytest.approx(past + fut, rel=1e-7)

    def test_l2_tiny_rate(self):
        # x t -> 0: int int f^2 ~ t^2 / (2 x)
        v = kernel_l2(1e-110, 1.0)
        assert math.isfinite(v) and v == pytest.approx(0.5e110, rel=1e-6)


class TestMean:
    def test_unit_jumps(self):
        q = GeneratingQuadruple(cp_unit(2.0), PointMass(1.0))
        assert mean_integrated(q, 3.0).value == pytest.approx(6.0)

    def test_symmetric(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(3.0), ParetoTail(3.0)), PowerDensity(1.0))
        assert mean_integrated(q, 5.0).value == pytest.approx(0.0, abs=1e-12)

    def test_infinite(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(0.5)), PointMass(1.0))
        assert mean_integrated(q, 1.0).is_infinite

    def test_negative_time(self):
        with pytest.raises(DomainError):
            mean_integrated(GeneratingQuadruple(cp_unit(), PointMass(1.0)), -1.0)


class TestLevyTail:
    @pytest.mark.parametrize("t,r", [(1.0, 0.1), (0.5, 0.3), (3.0, 0.9), (10.0, 0.01)])
    def test_closed_form(self, t, r):
        q = GeneratingQuadruple(cp_unit(2.0), PointMass(1.0))
        assert levy_tail_integrated(q, t, r) == pytest.approx(unit_jump_tail(2.0, t, r), rel=1e-8)

    def test_zero_above_support(self):
        q = GeneratingQuadruple(cp_unit(2.0), PointMass(1.0))
        assert levy_tail_integrated(q, 1.0, 0.7) == 0.0

    def test_negative_side(self):
        q = GeneratingQuadruple(LevyFamily(negative=CompoundPoisson.atoms(2.0, [1.0])), PointMass(1.0))
        assert levy_tail_integrated(q, 1.0, 0.1, side="positive") == 0.0
        assert levy_tail_integrated(q, 1.0, 0.1, side="negative") == pytest.approx(
            unit_jump_tail(2.0, 1.0, 0.1), rel=1e-8
        )

    def test_error_estimate_reported(self):
        q = GeneratingQuadruple(LevyFamily(StableLike(1.5)), PowerDensity(1.0))
        v, e = levy_tail_integrated_with_error(q, 1.0, 0.5)
        assert 0 <= e < 1e-6 * v

    @pytest.mark.parametrize("bad", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            levy_tail_integrated(GeneratingQuadruple(cp_unit(), PointMass(1.0)), *bad)

    def test_monotone_probe(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            q = SHIPPED_MODELS[rng.integers(len(SHIPPED_MODELS))]
            t = float(rng.uniform(0.1, 10.0))
            r = float(np.exp(rng.uniform(-4.0, 3.0)))
            assert levy_tail_integrated(q, t, 2 * r) <= levy_tail_integrated(q, t, r) * (1 + 1e-9)


@settings(max_examples=500, deadline=None)
@given(
    k=st.integers(0, len(SHIPPED_MODELS) - 1),
    t=st.floats(0.05, 20.0),
    r=st.floats(1e-3, 20.0),
    dr=st.floats(1.01, 5.0),
    dt=st.floats(1.01, 5.0),
)
def test_levy_tail_monotone_property(k, t, r, dr, dt):
    q = SHIPPED_MODELS[k]
    base = levy_tail_integrated(q, t, r)
    tol = 1e-8 * max(base, 1e-300)
    assert levy_tail_integrated(q, t, r * dr) <= base + tol
    assert levy_tail_integrated(q, t * dt, r) >= base - tol


class TestMoments:
    def test_pareto_necessity(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(2.0)), PointMass(1.0))
        assert moment_finite(q, 3.0).status == "infinite"

    def test_bounded_jumps(self):
        q = GeneratingQuadruple(cp_unit(), PowerDensity(0.5))
        assert moment_finite(q, 1.5).is_finite

    def test_case_two(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.0)), PowerDensity(0.2))
        v = moment_finite(q, 0.5)
        assert v.status == "finite"

    def test_domain(self):
        with pytest.raises(DomainError):
            moment_finite(GeneratingQuadruple(cp_unit(), PointMass(1.0)), 0.0)

    @pytest.mark.parametrize("k", range(len(SHIPPED_MODELS)))
    def test_matches_tail_integral(self, k):
        """Finiteness of int_1^inf r^(beta-1) eta*_1(r) dr agrees with moment_finite."""
        q = SHIPPED_MODELS[k]
        eta = compute_indices(q).eta
        r = np.geomspace(1e3, 1e6, 7)
        tails = np.array([levy_tail_integrated(q, 1.0, float(x)) for x in r])
        for beta in (0.5, 1.0, 1.5, 2.0, 3.0):
            if abs(beta - eta) < 0.2:
                continue  # too close to the boundary to read off a decay rate
            if np.all(tails == 0.0):
                finite = True
            else:
                # the integral converges iff r^beta eta*(r) decays like a negative power
                slope = np.polyfit(np.log(r), np.log(r**beta * tails), 1)[0]
                finite = slope < -0.05
            assert moment_finite(q, beta).is_finite == finite, (k, beta)

    @pytest.mark.slow
    def test_monte_carlo_half_moment(self):
        from supou.simulator import SimConfig, simulate_paths, value_matrix

        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.0)), PowerDensity(0.2))
        cfg = SimConfig(horizon=1.0, times=(1.0,), n_paths=20_000, seed=11)
        x = np.abs(value_matrix(simulate_paths(q, cfg))[:, 0]) ** 0.5
        a, b = x[: x.size // 2], x[x.size // 2 :]
        se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        assert abs(a.mean() - b.mean()) <= 4 * se


class TestExpMoment:
    def test_bounded(self):
        q = GeneratingQuadruple(cp_unit(), PointMass(1.0))
        assert exp_moment(q, 1.0, 100.0) == "finite"

    def test_power_tail(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(3.0)), PointMass(1.0))
        assert exp_moment(q, 1.0, 1e-3) == "infinite"

    def test_exponential_boundary(self):
        lam = LevyFamily(CompoundPoisson.exponential(1.0, 2.0, jump_loc=1.0))
        q = GeneratingQuadruple(lam, PointMass(1.0))
        s_star = 2.0 / (1.0 - math.exp(-1.0))
        assert s_star == pytest.approx(3.1639, abs=1e-4)
        assert exp_moment(q, 1.0, s_star * 0.999) == "finite"
        assert exp_moment(q, 1.0, s_star * 1.001) == "infinite"
        assert exp_moment(q, 1.0, s_star) == "boundary"

    def test_k0(self):
        assert k0(GeneratingQuadruple(cp_unit(), PointMass(2.0)), 1.0) == pytest.approx(
            (1 - math.exp(-2.0)) / 2.0
        )
        assert k0(GeneratingQuadruple(cp_unit(), PowerDensity(1.0)), 3.0) == 3.0


class TestTailConstant:
    def test_point_mass_oracle(self, oracles):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(2.0)), PointMass(1.0))
        c = tail_asymptote_constant(q, 1.0, 2.0)
        assert c == pytest.approx(oracles["tail_constant_pointmass1_gamma2_t1"], rel=1e-9)

    def test_power_density_oracle(self, oracles):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.5)), PowerDensity(2.0))
        c = tail_asymptote_constant(q, 2.0, 1.5)
        assert c == pytest.approx(oracles["tail_constant_power2_gamma1.5_t2"], rel=1e-4)

    @pytest.mark.parametrize("gamma,t", [(1.5, 2.0), (2.0, 1.0), (0.7, 5.0)])
    def test_small_rate_limit(self, gamma, t):
        assert _scaled_inner(1e-6, t, gamma) == pytest.approx(t**gamma / gamma, rel=1e-3)

    @pytest.mark.parametrize("r", [1e2, 1e3, 1e4])
    def test_ratio_against_tail(self, r):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.5)), PowerDensity(2.0))
        c = tail_asymptote_constant(q, 2.0, 1.5)
        assert levy_tail_integrated(q, 2.0, r) / (q.lam.tail(r) * c) == pytest.approx(1.0, rel=0.05)

    def test_wrong_index(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(2.0)), PointMass(1.0))
        with pytest.raises(HypothesisError, match="hypothesis not satisfied"):
            tail_asymptote_constant(q, 1.0, 1.5)

    def test_pi_condition(self):
        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.9)), PowerDensity(0.3))
        with pytest.raises(HypothesisError, match="hypothesis not satisfied"):
            tail_asymptote_constant(q, 1.0, 1.9)


def triple(a, e, b, fv=None):
    return IndexTriple(a, True, b, True, e, True, fv)


class TestGrowthExponent:
    def test_rows(self):
        assert growth_exponent(triple(2, 3, 1)).exponent_bound == Fraction(1, 2)
        v = growth_exponent(triple(Fraction(1, 2), 3, Fraction(6, 5)))
        assert v.exponent_bound == Fraction(2, 3) and v.case_tag == "inv_one_plus_alpha"
        v = growth_exponent(triple(Fraction(1, 2), 3, Fraction(9, 5)))
        assert v.exponent_bound == Fraction(13, 18) and v.case_tag == "one_minus_alpha_over_beta"
        v = growth_exponent(triple(2, Fraction(3, 2), 1))
        assert v.exponent_bound == Fraction(2, 3) and v.case_tag == "inv_eta"

    def test_float_inputs(self):
        v = growth_exponent(triple(0.5, 3.0, 1.8))
        assert float(v) == pytest.approx(1 - 0.5 / 1.8)

    def test_boundary_consistency(self):
        a = Fraction(1, 2)
        # eta = 1 + alpha: 1/eta = 1/(1 + alpha)
        assert growth_exponent(triple(a, 1 + a, 1)).exponent_bound == 1 / (1 + a)
        assert growth_exponent(triple(a, 1 + a + Fraction(1, 10**9), 1)).exponent_bound == 1 / (1 + a)
        # beta = 1 + alpha: 1/(1 + alpha) = 1 - alpha/beta
        assert growth_exponent(triple(a, 3, 1 + a)).exponent_bound == 1 - a / (1 + a)
        # alpha = 1, eta = 2: 1/2 = 1/eta
        assert growth_exponent(triple(1, 2, 1)).exponent_bound == Fraction(1, 2)

    def test_tags(self):
        assert set(CASE_TAGS) == {"half", "inv_eta", "inv_one_plus_alpha", "one_minus_alpha_over_beta"}

    def test_log_correction(self):
        assert growth_exponent(triple(2, 3, 1.5, fv=False)).log_correction
        assert not growth_exponent(triple(2, 3, 0.5, fv=True)).log_correction
        assert not growth_exponent(triple(0.5, 3, 1.8, fv=False)).log_correction

    def test_uncovered_region(self):
        v = growth_exponent(triple(0.2, 1.1, 1.5))
        assert not v.covered
        assert float(v) == pytest.approx(max(1 / 1.1, 1 - 0.2 / 1.5))


class TestLimitClass:
    def test_brownian(self):
        lc = limit_class(GeneratingQuadruple(cp_exp(), PowerDensity(2.0)))
        assert (lc.name, lc.hurst) == ("BrownianMotion", 0.5)

    def test_fbm(self):
        lc = limit_class(GeneratingQuadruple(LevyFamily(), PowerDensity(0.4), b=1.0))
        assert lc.name == "FractionalBM" and lc.hurst == pytest.approx(0.8)

    def test_stable_dependent(self):
        lc = limit_class(GeneratingQuadruple(LevyFamily(StableLike(1.7)), PowerDensity(0.4)))
        assert lc.name == "StableDependent" and lc.hurst == pytest.approx(1 - 0.4 / 1.7)

    def test_stable_levy(self):
        lc = limit_class(GeneratingQuadruple(cp_exp(), PowerDensity(0.5)))
        assert lc.name == "StableLevy" and lc.hurst == pytest.approx(1 / 1.5)

    def test_unclassified(self):
        assert limit_class(GeneratingQuadruple(cp_exp(), PointMass(1.0))).name == "unclassified"
        q = GeneratingQuadruple(LevyFamily(ParetoTail(1.5)), PowerDensity(2.0))
        assert limit_class(q).name == "unclassified"


class TestGaussian:
    q = GeneratingQuadruple(LevyFamily(), PointMass(1.0), b=1.0)

    @pytest.mark.parametrize("t", [0.1, 1.0, 7.5, 100.0])
    def test_closed_form(self, t):
        assert gaussian_variance(self.q, t) == pytest.approx(t - 1 + math.exp(-t), rel=1e-8)

    def test_q_zero_and_monotone(self):
        assert gaussian_variance(self.q, 0.0) == 0.0
        q = GeneratingQuadruple(LevyFamily(), PowerDensity(0.6), b=2.0)
        v = [gaussian_variance(q, t) for t in np.geomspace(1e-3, 1e3, 30)]
        assert np.all(np.diff(v) > 0)

    def test_asymptotic_slope(self):
        assert gaussian_variance(self.q, 1e4) / 1e4 == pytest.approx(1.0, rel=0.01)

    def test_variance_includes_gaussian_part(self):
        q = GeneratingQuadruple(cp_unit(2.0), PointMass(1.0), b=0.5)
        v = variance_integrated(q, 1.0).value
        assert v == pytest.approx((2.0 + 0.5) * math.exp(-1.0), rel=1e-10)

    def test_envelope(self):
        t = 1e4
        assert lil_envelope(self.q, t) == pytest.approx(
            math.sqrt(2 * gaussian_variance(self.q, t) * math.log(math.log(t)))
        )
        with pytest.raises(DomainError):
            lil_envelope(self.q, 2.0)

    def test_envelope_regularly_varying(self):
        a, b, t = 0.4, 1.5, 1e4
        q = GeneratingQuadruple(LevyFamily(), PowerDensity(a), b=b)
        sigma2 = b * math.gamma(1 + a) / ((2 - a) * (1 - a))
        ell = (1 + a) / a
        expect = math.sqrt(sigma2 * ell) * t ** (1 - a / 2) * math.sqrt(2 * math.log(math.log(t)))
        assert lil_envelope(q, t) == pytest.approx(expect, rel=1e-10)

    def test_envelope_needs_b(self):
        with pytest.raises(HypothesisError):
            lil_envelope(GeneratingQuadruple(cp_unit(), PointMass(1.0)), 10.0)

    def test_covariance(self):
        q = GeneratingQuadruple(LevyFamily(), PowerDensity(0.7), b=1.3)
        times = np.array([0.01, 0.3, 1.0, 4.0, 20.0])
        cov = gaussian_covariance(q, times)
        for k, t in enumerate(times):
            assert cov[k, k] == pytest.approx(gaussian_variance(q, float(t)), rel=1e-8)
        d = np.sqrt(np.diag(cov))
        assert np.all(np.abs(cov) <= np.outer(d, d) * (1 + 1e-12))
        np.testing.assert_allclose(cov, cov.T)
        f = factorize_covariance(cov)
        np.testing.assert_allclose(f @ f.T, cov, rtol=1e-10, atol=1e-14)

    def test_factorize_rejects_indefinite(self):
        with pytest.raises(NumericError):
            factorize_covariance(np.array([[1.0, 2.0], [2.0, 1.0]]))
