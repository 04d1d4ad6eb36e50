import json
import math

import numpy as np
import pytest

from adaptix.empirical import empirical_coeffs
from adaptix.estimator import (
    TruncationError,
    adaptive_estimate,
    evaluate,
    grid_csv,
    l2_error,
)
from adaptix.samplers import (
    Dataset,
    GaussianSequenceSampler,
    NoiseSpec,
    gen_density_sample,
    gen_regression,
    gen_stationary_gaussian,
)
from adaptix.targets import custom_target, make_W_target, uniform_target
from adaptix.trig_basis import FourierSeries, partial_sum, tail_rho


def zero_regression(n):
    return Dataset("R", n, np.zeros(n))


class TestAdaptiveEstimate:
    def test_noiseless_constant(self):
        est = adaptive_estimate(gen_regression(uniform_target(), 300, NoiseSpec(sigma=0), 0))
        assert est.coeffs[0] == pytest.approx(1.0, abs=1e-15)
        assert np.max(np.abs(est.coeffs[1:]), initial=0.0) < 1e-13
        x = np.linspace(0, 1, 101)
        np.testing.assert_allclose(est(x), 1.0, atol=1e-11)

    def test_zero_data_tie_rule(self):
        est = adaptive_estimate(zero_regression(300))
        assert est.N_selected == 100
        assert est.tau_star == 0.0
        assert np.all(est.coeffs == 0.0)

    def test_coeffs_are_prefix_of_empirical(self):
        d = gen_density_sample(make_W_target(J=256, constraints="nonnegative"), 2000, seed=1)
        est = adaptive_estimate(d)
        assert np.array_equal(est.coeffs, empirical_coeffs(d).coeffs[: est.N_selected])
        assert np.array_equal(est.coeffs, est.empirical.coeffs[: est.N_selected])

    def test_uniform_density_coefficients_small(self):
        n = 4096
        small, total = 0, 0
        for r in range(20):
            est = adaptive_estimate(gen_density_sample(uniform_target(), n, 2, (r,)))
            c = est.coeffs[1:]
            small += np.sum(np.abs(c) <= 3 / math.sqrt(n))
            total += c.size
        assert total == 0 or small / total >= 0.95

    def test_white_noise_spectral_risk(self):
        n, reps = 4096, 200
        t = uniform_target()
        sampler = GaussianSequenceSampler(t, n)
        ok = 0
        for r in range(reps):
            est = adaptive_estimate(gen_stationary_gaussian(t, n, 3, (r,), sampler))
            ok += l2_error(est, t) < 10 * est.N_selected / n
        assert ok / reps >= 0.95

    def test_deterministic(self):
        d = gen_density_sample(make_W_target(J=64, constraints="nonnegative"), 999, seed=4)
        a, b = adaptive_estimate(d), adaptive_estimate(d)
        assert a.to_json() == b.to_json()

    def test_small_n(self):
        with pytest.raises(ValueError):
            adaptive_estimate(Dataset("D", 8, np.full(8, 0.5)))


class TestL2Error:
    def test_exact_coefficients(self):
        # frequencies stay below n/2, so the design reproduces c_j exactly
        n = 4096
        t = make_W_target(J=2 * (n // 3))
        est = adaptive_estimate(gen_regression(t, n, NoiseSpec(sigma=0), 0))
        assert l2_error(est, t) == pytest.approx(tail_rho(t.series, est.N_selected), abs=1e-12)

    def test_zero_estimate(self):
        t = make_W_target(J=128)
        est = adaptive_estimate(zero_regression(300))
        assert l2_error(est, t) == pytest.approx(tail_rho(t.series, 0), rel=1e-14)

    def test_quadrature_oracle(self):
        t = make_W_target(beta=1, J=256, constraints="nonnegative")
        x = np.arange(8192) / 8192
        for seed in range(5):
            est = adaptive_estimate(gen_density_sample(t, 3000, seed=seed))
            quad = np.mean((est(x) - t(x)) ** 2)
            assert l2_error(est, t) == pytest.approx(quad, rel=1e-6)

    def test_truncation(self):
        est = adaptive_estimate(zero_regression(300))
        with pytest.raises(TruncationError):
            l2_error(est, make_W_target(J=64))

    def test_custom_target_is_zero_padded(self):
        est = adaptive_estimate(zero_regression(300))
        assert l2_error(est, custom_target([1.0, 0.5])) == pytest.approx(1.25, rel=1e-15)


class TestEvaluate:
    def test_constant(self):
        est = adaptive_estimate(gen_regression(uniform_target(), 30, NoiseSpec(sigma=0), 0))
        est = type(est)(**{**est.__dict__, "coeffs": np.array([1.0])})
        np.testing.assert_array_equal(evaluate(est, [0.0, 0.5, 1.0]), [1.0, 1.0, 1.0])

    def test_empty_grid(self):
        est = adaptive_estimate(zero_regression(30))
        assert evaluate(est, []).size == 0

    def test_matches_partial_sum(self):
        d = gen_density_sample(make_W_target(J=128, constraints="nonnegative"), 5000, seed=2)
        est = adaptive_estimate(d)
        x = np.linspace(0, 1, 333)
        s = FourierSeries(est.coeffs)
        np.testing.assert_allclose(evaluate(est, x), partial_sum(s, s.J, x), atol=1e-14, rtol=0)


class TestExport:
    def test_json(self):
        est = adaptive_estimate(gen_density_sample(uniform_target(), 500, seed=0))
        doc = json.loads(est.to_json())
        assert set(doc) == {"problem", "n", "N", "coeffs", "tau_star"}
        assert doc["N"] == len(doc["coeffs"]) == est.N_selected

    def test_grid_csv(self):
        est = adaptive_estimate(gen_density_sample(uniform_target(), 500, seed=0))
        lines = grid_csv(est, 8).splitlines()
        assert lines[0] == "x,f_hat" and len(lines) == 10

    def test_negativity_report(self):
        est = adaptive_estimate(gen_density_sample(uniform_target(), 500, seed=0))
        rep = est.negativity(256)
        assert rep["negative_mass"] >= 0
