import warnings

import numpy as np
import pytest

from normprod import (
    CaseMismatch,
    MeanParams,
    cf_grid,
    cf_mean,
    cf_mean_derivative,
    cf_ode_residual,
    cf_raw_moments,
    raw_moments_exact,
    validate,
)
from conftest import random_mean_params


class TestBasicProperties:
    def test_value_at_zero_is_one(self, rng):
        for _ in range(10):
            mp = random_mean_params(rng)
            assert cf_mean(mp, 0.0) == 1.0 + 0.0j

    def test_modulus_bounded_by_one(self, rng):
        ts = np.linspace(-30, 30, 601)
        for _ in range(10):
            mp = random_mean_params(rng)
            vals = cf_grid(mp, ts)
            assert np.all(np.abs(vals) <= 1 + 1e-12)

    def test_conjugate_symmetry(self, rng):
        for _ in range(10):
            mp = random_mean_params(rng)
            for t in (0.3, 1.7, 8.5):
                assert cf_mean(mp, -t) == pytest.approx(
                    np.conj(cf_mean(mp, t)), rel=1e-13)

    def test_decays_along_grid(self):
        mp = MeanParams(validate(0, 0, 1, 1, 0), 1)
        # |phi(t)| = (1 + t^2)^(-1/2) for the standard product
        for t in (0.5, 1.0, 3.0):
            assert abs(cf_mean(mp, t)) == pytest.approx(
                (1 + t ** 2) ** -0.5, rel=1e-13)

    def test_grid_branch_continuity_no_warning(self, rng):
        ts = np.linspace(-50, 50, 2001)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for _ in range(5):
                cf_grid(random_mean_params(rng), ts)


class TestDerivative:
    def test_analytic_derivative_matches_finite_difference(self, rng):
        h = 1e-6
        for _ in range(10):
            mp = random_mean_params(rng)
            for t in (-2.1, 0.4, 1.3):
                fd = (cf_mean(mp, t + h) - cf_mean(mp, t - h)) / (2 * h)
                assert cf_mean_derivative(mp, t) == pytest.approx(fd, rel=1e-8)

    def test_derivative_at_zero_gives_mean(self, rng):
        for _ in range(10):
            mp = random_mean_params(rng)
            m1 = float(raw_moments_exact(mp, 1)[1])
            assert (cf_mean_derivative(mp, 0.0) / 1j).real == pytest.approx(
                m1, rel=1e-12, abs=1e-12)


class TestOde:
    def test_residual_small_over_random_draws(self, rng):
        for _ in range(100):
            mp = random_mean_params(rng, unit_sigma=True)
            t = float(rng.uniform(-5, 5))
            assert abs(cf_ode_residual(mp, t)) <= 1e-10

    def test_residual_with_supplied_derivative(self):
        mp = MeanParams(validate(1, 2, 1, 1, 0.3), 2)
        t = 0.8
        assert abs(cf_ode_residual(mp, t, cf_mean_derivative(mp, t))) <= 1e-12

    def test_requires_unit_variances(self):
        with pytest.raises(CaseMismatch):
            cf_ode_residual(MeanParams(validate(0, 0, 2, 1, 0), 1), 1.0)


class TestMomentExtraction:
    def test_matches_exact_moments(self, rng):
        for _ in range(10):
            mp = random_mean_params(rng)
            got = cf_raw_moments(mp, 4)
            expected = [float(v) for v in raw_moments_exact(mp, 4)]
            for g, e in zip(got, expected):
                assert g == pytest.approx(e, rel=1e-6, abs=1e-6)

    def test_zeroth_moment_is_one(self):
        mp = MeanParams(validate(1, -2, 1.5, 0.5, -0.4), 3)
        assert cf_raw_moments(mp, 0)[0] == pytest.approx(1.0, rel=1e-12)
