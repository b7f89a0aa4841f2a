import numpy as np
import pytest

from hybridrc.gaussian import (is_physical, log_negativity,
                               squeezed_thermal_covariance)
from hybridrc.tasks import (TASKS, InputSequence, assemble_injection,
                            build_targets, injection_series, sample_inputs)


class TestSampling:
    def test_single_mode_parameter_ranges(self):
        rng = np.random.default_rng(0)
        seq = sample_inputs("single", 100000, rng)
        n_th, r, phi = seq.params.T
        assert abs(n_th.mean() - 2.5) <= 0.02
        assert r.max() <= 0.75 and r.min() >= 0.0
        assert phi.max() <= 2 * np.pi
        assert seq.sigmas.shape == (100000, 2, 2)

    def test_two_mode_parameter_ranges(self):
        rng = np.random.default_rng(1)
        seq = sample_inputs("two", 50000, rng)
        n_th, s = seq.params.T
        assert abs(n_th.mean() - 0.625) <= 0.01
        assert s.max() <= 0.75
        assert seq.sigmas.shape == (50000, 4, 4)

    def test_generated_states_physical(self):
        rng = np.random.default_rng(2)
        for kind in ("single", "two"):
            seq = sample_inputs(kind, 300, rng)
            for sigma in seq.sigmas[:50]:
                assert is_physical(sigma, tol=1e-9)

    def test_matches_constructor(self):
        rng = np.random.default_rng(3)
        seq = sample_inputs("single", 10, rng)
        for params, sigma in zip(seq.params, seq.sigmas):
            expected = squeezed_thermal_covariance(*params).data
            assert np.allclose(sigma, expected, atol=1e-14)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sample_inputs("triple", 5, np.random.default_rng(4))

    def test_empty_sequence(self):
        seq = sample_inputs("single", 0, np.random.default_rng(4))
        assert len(seq) == 0
        assert seq.sigmas.shape == (0, 2, 2)
        qrc, final = build_targets(seq, "trace")
        assert final.shape == (0, 1)


class TestInjection:
    def test_single_mode_copies(self):
        sigma = squeezed_thermal_covariance(0.5, 0.2, 1.0).data
        inj = assemble_injection(sigma, 9)
        assert inj.shape == (18, 18)
        for j in range(9):
            assert np.array_equal(inj[2 * j:2 * j + 2, 2 * j:2 * j + 2], sigma)
        # no cross-mode correlations in a product state
        assert np.count_nonzero(inj) == np.count_nonzero(
            np.kron(np.eye(9), sigma))

    def test_two_mode_odd_leftover_vacuum(self):
        rng = np.random.default_rng(5)
        sigma = sample_inputs("two", 1, rng).sigmas[0]
        inj = assemble_injection(sigma, 9)
        for k in range(4):
            block = inj[4 * k:4 * k + 4, 4 * k:4 * k + 4]
            assert np.array_equal(block, sigma)
        assert np.array_equal(inj[16:, 16:], np.eye(2))

    def test_two_mode_even_exact(self):
        rng = np.random.default_rng(6)
        sigma = sample_inputs("two", 1, rng).sigmas[0]
        inj = assemble_injection(sigma, 4)
        assert np.array_equal(inj[:4, :4], sigma)
        assert np.array_equal(inj[4:, 4:], sigma)

    def test_two_mode_single_reservoir_mode_rejected(self):
        rng = np.random.default_rng(7)
        sigma = sample_inputs("two", 1, rng).sigmas[0]
        with pytest.raises(ValueError):
            assemble_injection(sigma, 1)

    def test_series_matches_per_step(self):
        rng = np.random.default_rng(8)
        seq = sample_inputs("two", 7, rng)
        series = injection_series(seq, 5)
        for t in range(7):
            assert np.array_equal(series[t],
                                  assemble_injection(seq.sigmas[t], 5))


class TestTargets:
    def test_vacuum_values(self):
        params = np.zeros((3, 3))
        seq = InputSequence("single", params,
                            np.broadcast_to(np.eye(2), (3, 2, 2)).copy())
        qrc, final = build_targets(seq, "trace")
        assert np.allclose(final, 2.0)
        _, det = build_targets(seq, "determinant")
        assert np.allclose(det, 1.0)
        mem_q, mem_f = build_targets(seq, "memory")
        assert np.allclose(mem_f, [1.0, 0.0, 1.0])
        assert np.array_equal(mem_q, mem_f)

    def test_thermal_values(self):
        sig = squeezed_thermal_covariance(0.5, 0.0, 0.0).data
        seq = InputSequence("single", np.array([[0.5, 0.0, 0.0]] * 2),
                            np.broadcast_to(sig, (2, 2, 2)).copy())
        _, trace = build_targets(seq, "trace")
        _, det = build_targets(seq, "determinant")
        assert np.allclose(trace, 4.0)
        assert np.allclose(det, 4.0)

    def test_entanglement_raw_target(self):
        rng = np.random.default_rng(11)
        seq = sample_inputs("two", 500, rng)
        qrc, final = build_targets(seq, "entanglement")
        assert qrc.shape == (500, 10)
        # raw -log2 d- against the full symplectic computation
        for k in range(0, 500, 25):
            expected = log_negativity(seq.sigmas[k].reshape(4, 4), clamp=False)
            assert final[k, 0] == pytest.approx(expected, abs=1e-10)

    def test_entanglement_known_value(self):
        from hybridrc.gaussian import two_mode_squeezed_thermal_matrix
        seq = InputSequence("two", np.array([[0.0, 0.5]]),
                            two_mode_squeezed_thermal_matrix(0.0, 0.5)[None])
        _, final = build_targets(seq, "entanglement")
        assert final[0, 0] == pytest.approx(1 / np.log(2), abs=1e-12)

    def test_offdiag_target(self):
        rng = np.random.default_rng(13)
        seq = sample_inputs("single", 20, rng)
        qrc, final = build_targets(seq, "offdiag")
        assert np.array_equal(final[:, 0], seq.sigmas[:, 0, 1])
        assert np.array_equal(qrc, final)

    def test_identities_on_random_draws(self):
        rng = np.random.default_rng(14)
        seq = sample_inputs("single", 2000, rng)
        n_th, r, _ = seq.params.T
        _, det = build_targets(seq, "determinant")
        _, trace = build_targets(seq, "trace")
        assert np.allclose(det[:, 0], (1 + 2 * n_th) ** 2, rtol=1e-10)
        assert np.allclose(trace[:, 0], 2 * (1 + 2 * n_th) * np.cosh(2 * r),
                           rtol=1e-10)

    def test_entanglement_clamped_zero_when_separable(self):
        rng = np.random.default_rng(15)
        seq = sample_inputs("two", 3000, rng)
        _, raw = build_targets(seq, "entanglement")
        n_th, s = seq.params.T
        separable = (1 + 2 * n_th) * np.exp(-2 * s) >= 1.0
        assert np.all(raw[separable, 0] <= 1e-12)
        assert np.all(raw[~separable, 0] > 0.0)

    def test_kind_mismatch(self):
        rng = np.random.default_rng(16)
        seq = sample_inputs("single", 5, rng)
        with pytest.raises(ValueError):
            build_targets(seq, "entanglement")

    def test_task_table(self):
        assert set(TASKS) == {"memory", "trace", "determinant",
                              "entanglement", "offdiag"}
        assert TASKS["memory"].metric == "fidelity"
        assert TASKS["entanglement"].qrc_dim == 10
