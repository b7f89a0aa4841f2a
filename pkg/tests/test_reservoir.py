import math

import numpy as np
import pytest

from hybridrc.errors import GenerationFailure
from hybridrc.gaussian import (is_physical, squeezed_thermal_matrix,
                               symplectic_eigenvalues, symplectic_form)
from hybridrc.reservoir import (build_step_matrix, feature_dim, is_stable,
                                make_crystal, reservoir_step, run_reservoir,
                                sample_crystal, sample_measured_covariance,
                                sample_reservoir, symplectic_propagator)
from hybridrc.tasks import injection_series, sample_inputs


def rotation(angle):
    return np.array([[np.cos(angle), np.sin(angle)],
                     [-np.sin(angle), np.cos(angle)]])


class TestCrystalSampling:
    def test_p_zero_removes_couplings(self):
        rng = np.random.default_rng(0)
        crystal = sample_crystal(4, 0.0, rng)
        assert not np.any(crystal.g)
        assert not np.any(crystal.h)
        # uncoupled modes rotate in phase space at angle 2 dt
        s = symplectic_propagator(crystal, dt=0.3)
        assert np.allclose(s[:2, :2], rotation(0.6), atol=1e-12)

    def test_p_one_fully_connected(self):
        rng = np.random.default_rng(1)
        crystal = sample_crystal(9, 1.0, rng)
        iu = np.triu_indices(9, 1)
        assert np.count_nonzero(crystal.g[iu]) == 36
        assert np.count_nonzero(crystal.h[iu]) == 36

    def test_coupling_ranges_and_symmetry(self):
        rng = np.random.default_rng(2)
        crystal = sample_crystal(6, 1.0, rng)
        iu = np.triu_indices(6, 1)
        assert np.array_equal(crystal.g, crystal.g.T)
        assert np.array_equal(crystal.h, crystal.h.T)
        assert not np.any(np.diag(crystal.g))
        assert not np.any(np.diag(crystal.h))
        assert np.all((crystal.g[iu] >= 0.1) & (crystal.g[iu] <= 0.3))
        assert np.all((crystal.h[iu] >= 0.2) & (crystal.h[iu] <= 0.4))

    def test_binomial_keep_count(self):
        # keep-probability without rejection interference: a 2-mode crystal
        # can never be unstable (pair instability needs h > 1), so the kept
        # fraction is purely binomial
        rng = np.random.default_rng(3)
        kept = 0
        draws = 3000
        for _ in range(draws):
            crystal = sample_crystal(2, 7 / 9, rng)
            kept += np.count_nonzero(crystal.g[0, 1]) + \
                np.count_nonzero(crystal.h[0, 1])
        p = 7 / 9
        sigma = math.sqrt(p * (1 - p) / (2 * draws))
        assert abs(kept / (2 * draws) - p) <= 3 * sigma

    def test_expected_couplings_at_defaults(self):
        # 36 pairs x 7/9 = 28 expected per matrix; stability rejection
        # conditions the accepted ensemble slightly (it mildly favors
        # frequency-detuning g couplings), so the h count carries the clean
        # binomial mean and the g count gets a small extra allowance
        rng = np.random.default_rng(3)
        iu = np.triu_indices(9, 1)
        g_counts, h_counts = [], []
        for _ in range(200):
            crystal = sample_crystal(9, 7 / 9, rng)
            g_counts.append(np.count_nonzero(crystal.g[iu]))
            h_counts.append(np.count_nonzero(crystal.h[iu]))
        sigma = math.sqrt(36 * (7 / 9) * (2 / 9) / 200)
        assert abs(np.mean(h_counts) - 28.0) <= 3 * sigma
        assert abs(np.mean(g_counts) - 28.0) <= 3 * sigma + 1.0

    def test_accepted_crystals_are_stable(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            assert is_stable(sample_crystal(9, 7 / 9, rng))

    def test_generation_failure_bounded(self, monkeypatch):
        monkeypatch.setattr("hybridrc.reservoir.is_stable",
                            lambda crystal, tol=1e-9: False)
        rng = np.random.default_rng(5)
        with pytest.raises(GenerationFailure):
            sample_crystal(9, 7 / 9, rng, max_tries=20)


class TestStability:
    def test_free_modes_stable(self):
        crystal = make_crystal(np.zeros((2, 2)), np.zeros((2, 2)))
        assert is_stable(crystal)
        gen = symplectic_form(2) @ crystal.m_form
        assert np.allclose(np.sort_complex(np.linalg.eigvals(gen)),
                           [-2j, -2j, 2j, 2j])

    def test_large_pair_squeezing_unstable(self):
        h = np.array([[0.0, 5.0], [5.0, 0.0]])
        crystal = make_crystal(np.zeros((2, 2)), h)
        assert not is_stable(crystal)
        gen = symplectic_form(2) @ crystal.m_form
        assert np.abs(np.linalg.eigvals(gen).real).max() > 1.0


class TestPropagator:
    def test_zero_form_gives_identity(self):
        crystal = make_crystal(np.zeros((3, 3)), np.zeros((3, 3)),
                               omega=np.zeros(3))
        assert np.allclose(symplectic_propagator(crystal), np.eye(6))

    def test_single_mode_rotation_matches_series(self):
        crystal = make_crystal(np.zeros((1, 1)), np.zeros((1, 1)))
        s = symplectic_propagator(crystal, dt=1.0)
        gen = symplectic_form(1) @ crystal.m_form
        series = sum(np.linalg.matrix_power(gen, k) / math.factorial(k)
                     for k in range(30))
        assert np.allclose(s, series, atol=1e-12)
        assert np.allclose(s, rotation(2.0), atol=1e-12)

    def test_symplectic_and_unimodular(self):
        rng = np.random.default_rng(6)
        omega = symplectic_form(9)
        for _ in range(20):
            s = symplectic_propagator(sample_crystal(9, 7 / 9, rng))
            assert np.abs(s @ omega @ s.T - omega).max() <= 1e-10
            assert np.abs(np.linalg.eigvals(s)).max() == pytest.approx(1.0, abs=1e-6)


class TestStepMatrix:
    def test_reflective_limit(self):
        rng = np.random.default_rng(7)
        s1 = symplectic_propagator(sample_crystal(3, 0.5, rng))
        s2 = symplectic_propagator(sample_crystal(3, 0.5, rng))
        step = build_step_matrix(s1, s2, 1.0)
        assert np.allclose(step[:6, :6], s1)
        assert np.allclose(step[6:, 6:], s2)
        assert not np.any(step[:6, 6:])
        assert not np.any(step[6:, :6])

    def test_transmissive_limit(self):
        rng = np.random.default_rng(8)
        s1 = symplectic_propagator(sample_crystal(3, 0.5, rng))
        s2 = symplectic_propagator(sample_crystal(3, 0.5, rng))
        step = build_step_matrix(s1, s2, 0.0)
        assert not np.any(step[:6, :6])
        assert not np.any(step[6:, 6:])
        assert np.allclose(step[:6, 6:], -s1)
        assert np.allclose(step[6:, :6], s2)

    def test_step_matrix_symplectic(self):
        rng = np.random.default_rng(9)
        omega = symplectic_form(18)
        for _ in range(10):
            config = sample_reservoir(9, 0.4, 7 / 9, rng)
            err = np.abs(config.step_matrix @ omega @ config.step_matrix.T
                         - omega).max()
            assert err <= 1e-10

    def test_reflectivity_range(self):
        with pytest.raises(ValueError):
            build_step_matrix(np.eye(2), np.eye(2), 1.5)


class TestReservoirStep:
    def test_reflective_vacuum_passthrough(self):
        rng = np.random.default_rng(10)
        config = sample_reservoir(3, 1.0, 0.5, rng)
        s1 = symplectic_propagator(config.crystals[0])
        s2 = symplectic_propagator(config.crystals[1])
        sigma_r, sigma_x = reservoir_step(np.eye(6), np.eye(6), config)
        # at R=1 the reservoir evolves unitarily and the input is reflected
        # straight through the readout crystal
        assert np.allclose(sigma_r, s1 @ s1.T, atol=1e-12)
        x_idx = [0, 2, 4]
        expected = (s2 @ s2.T)[np.ix_(x_idx, x_idx)]
        assert np.allclose(sigma_x, expected, atol=1e-12)

    def test_single_mode_two_step_bounce(self):
        # p = 0, R = 0.5, one mode: everything reduces to 2x2 rotations
        rng = np.random.default_rng(11)
        config = sample_reservoir(1, 0.5, 0.0, rng)
        rot = rotation(2.0)
        sig_in1 = squeezed_thermal_matrix(0.3, 0.4, 1.0)
        sig_in2 = squeezed_thermal_matrix(1.2, 0.1, 4.0)
        r_state = np.eye(2)
        exp_r1 = rot @ (0.5 * r_state + 0.5 * sig_in1) @ rot.T
        exp_x1 = (rot @ (0.5 * r_state + 0.5 * sig_in1) @ rot.T)[0, 0]
        got_r1, got_x1 = reservoir_step(r_state, sig_in1, config)
        assert np.allclose(got_r1, exp_r1, atol=1e-12)
        assert got_x1[0, 0] == pytest.approx(exp_x1, abs=1e-12)
        exp_r2 = rot @ (0.5 * exp_r1 + 0.5 * sig_in2) @ rot.T
        got_r2, _ = reservoir_step(got_r1, sig_in2, config)
        assert np.allclose(got_r2, exp_r2, atol=1e-12)

    def test_non_finite_state_raises(self):
        rng = np.random.default_rng(30)
        config = sample_reservoir(2, 0.4, 0.5, rng)
        bad = np.full((4, 4), np.nan)
        from hybridrc.errors import NumericalFailure
        with pytest.raises(NumericalFailure):
            reservoir_step(bad, np.eye(4), config)

    def test_unphysical_state_raises(self):
        # a sub-vacuum reservoir block stays sub-vacuum under R = 1 and
        # trips the per-mode determinant guard
        rng = np.random.default_rng(31)
        config = sample_reservoir(2, 1.0, 0.0, rng)
        from hybridrc.errors import NumericalFailure
        with pytest.raises(NumericalFailure):
            reservoir_step(0.1 * np.eye(4), np.eye(4), config)

    def test_linearity_in_input(self):
        rng = np.random.default_rng(12)
        config = sample_reservoir(2, 0.4, 0.8, rng)
        sigma_r = np.eye(4) * 1.7
        a = np.kron(np.eye(2), squeezed_thermal_matrix(0.5, 0.2, 0.3))
        b = np.kron(np.eye(2), squeezed_thermal_matrix(2.0, 0.6, 2.0))
        alpha = 0.3
        ra, xa = reservoir_step(sigma_r, a, config)
        rb, xb = reservoir_step(sigma_r, b, config)
        rc, xc = reservoir_step(sigma_r, alpha * a + (1 - alpha) * b, config)
        assert np.allclose(rc, alpha * ra + (1 - alpha) * rb, atol=1e-12)
        assert np.allclose(xc, alpha * xa + (1 - alpha) * xb, atol=1e-12)


class TestMeasurement:
    def test_infinite_ensemble_exact(self):
        rng = np.random.default_rng(13)
        sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
        state = rng.bit_generator.state
        assert np.array_equal(
            sample_measured_covariance(sigma, math.inf, rng), sigma)
        assert rng.bit_generator.state == state  # no variates consumed

    def test_unbiased_scalar_mean(self):
        rng = np.random.default_rng(14)
        draws = np.array([
            sample_measured_covariance(np.eye(1), 10 ** 5, rng)[0, 0]
            for _ in range(10 ** 4)])
        assert abs(draws.mean() - 1.0) <= 0.002

    def test_variance_scaling(self):
        rng = np.random.default_rng(15)
        sigma = np.array([[1.5, 0.4], [0.4, 0.9]])
        def element_var(m, n_draws=10 ** 4):
            vals = np.array([
                sample_measured_covariance(sigma, m, rng)[0, 1]
                for _ in range(n_draws)])
            return vals.var()
        ratio = element_var(10 ** 3) / element_var(10 ** 5)
        assert 80.0 <= ratio <= 120.0

    def test_wishart_matrix_mean(self):
        rng = np.random.default_rng(16)
        sigma = np.array([[2.0, -0.5], [-0.5, 1.2]])
        acc = np.zeros((2, 2))
        n = 4000
        for _ in range(n):
            acc += sample_measured_covariance(sigma, 500, rng)
        assert np.allclose(acc / n, sigma, atol=0.01)

    def test_small_ensemble_rejected(self):
        rng = np.random.default_rng(17)
        with pytest.raises(ValueError):
            sample_measured_covariance(np.eye(3), 2, rng)

    def test_non_positive_definite_rejected(self):
        rng = np.random.default_rng(18)
        with pytest.raises(ValueError):
            sample_measured_covariance(np.array([[1.0, 2.0], [2.0, 1.0]]),
                                       100, rng)


class TestRunReservoir:
    def test_empty_series(self):
        rng = np.random.default_rng(19)
        config = sample_reservoir(2, 0.4, 0.5, rng)
        feats = run_reservoir(np.empty((0, 4, 4)), config, rng)
        assert feats.shape == (0, 3)

    def test_feature_count(self):
        assert feature_dim(9) == 45
        rng = np.random.default_rng(20)
        config = sample_reservoir(9, 0.4, 7 / 9, rng, ensemble_size=1000)
        seq = sample_inputs("single", 20, rng)
        feats = run_reservoir(injection_series(seq, 9), config, rng)
        assert feats.shape == (20, 45)

    def test_deterministic_given_seed(self):
        def once():
            rng = np.random.default_rng(21)
            config = sample_reservoir(5, 0.4, 0.6, rng, ensemble_size=500)
            seq = sample_inputs("single", 50, rng)
            return run_reservoir(injection_series(seq, 5), config, rng)
        assert np.array_equal(once(), once())

    def test_echo_state_property(self):
        rng = np.random.default_rng(22)
        config = sample_reservoir(9, 0.4, 7 / 9, rng)
        seq = sample_inputs("single", 600, rng)
        inputs = injection_series(seq, 9)
        feats_a = run_reservoir(inputs, config, rng)
        feats_b = run_reservoir(inputs, config, rng,
                                initial_covariance=5.0 * np.eye(18))
        diff = np.abs(feats_a[500:] - feats_b[500:]).max()
        assert diff <= 1e-8

    def test_reservoir_stays_physical(self):
        rng = np.random.default_rng(23)
        config = sample_reservoir(5, 0.4, 7 / 9, rng)
        seq = sample_inputs("single", 2000, rng)
        inputs = injection_series(seq, 5)
        sigma_r = np.eye(10)
        for t in range(len(inputs)):
            sigma_r, _ = reservoir_step(sigma_r, inputs[t], config)
            if t % 100 == 0:
                assert symplectic_eigenvalues(sigma_r).min() >= 1 - 1e-8
        assert is_physical(sigma_r, tol=1e-8)

    def test_ensemble_size_validation(self):
        rng = np.random.default_rng(24)
        with pytest.raises(ValueError):
            sample_reservoir(9, 0.4, 0.5, rng, ensemble_size=5)
