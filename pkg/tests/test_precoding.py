import math

import numpy as np
import pytest

import rismimo as rm
from rismimo.precoding import (RHO_TABLE, DacModel, apply_aqnm, mrt_precoder,
                               quantization_noise_covariance, rho_of_bits)


class TestRhoOfBits:
    @pytest.mark.parametrize("bits,expected", list(RHO_TABLE.items()))
    def test_table_values(self, bits, expected):
        assert rho_of_bits(bits) == expected

    def test_infinite(self):
        assert rho_of_bits(math.inf) == 0.0

    @pytest.mark.parametrize("bits", [6, 8, 12])
    def test_formula(self, bits):
        expected = math.sqrt(3.0) * math.pi / 2.0 * 2.0 ** (-2 * bits)
        assert rho_of_bits(bits) == pytest.approx(expected, rel=1e-12)

    def test_strictly_decreasing(self):
        vals = [rho_of_bits(b) for b in range(1, 13)] + [rho_of_bits(math.inf)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_table_formula_continuity(self):
        # formula extended down to the table boundary stays close to the table
        formula_at_5 = math.sqrt(3.0) * math.pi / 2.0 * 2.0 ** (-10)
        assert abs(formula_at_5 - RHO_TABLE[5]) / RHO_TABLE[5] < 0.35

    @pytest.mark.parametrize("bad", [0, -1, 2.5])
    def test_invalid_bits(self, bad):
        with pytest.raises(ValueError, match="positive integer"):
            rho_of_bits(bad)


class TestDacModel:
    def test_alpha_one_only_for_infinite(self):
        assert DacModel.for_bits(math.inf).alpha == 1.0
        for b in range(1, 10):
            model = DacModel.for_bits(b)
            assert 0.0 < model.alpha < 1.0
            assert model.alpha == 1.0 - model.rho


class TestMrtPrecoder:
    def test_unit_vector(self):
        F = np.zeros((1, 4), dtype=complex)
        F[0, 0] = 1.0
        pre = mrt_precoder(F)
        np.testing.assert_allclose(pre.W[:, 0], F[0].conj())
        assert pre.trace_norm == pytest.approx(1.0)

    def test_unit_total_power(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            F = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
            W = mrt_precoder(F).W
            assert np.sum(np.abs(W) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        F = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        w1 = mrt_precoder(F).W
        w2 = mrt_precoder(3.7 * F).W
        np.testing.assert_allclose(w1, w2, atol=1e-15)

    def test_matches_frobenius_oracle(self):
        rng = np.random.default_rng(2)
        F = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        expected = F.conj().T / np.linalg.norm(F, "fro")
        np.testing.assert_allclose(mrt_precoder(F).W, expected, atol=1e-14)

    def test_zero_channel_rejected(self):
        with pytest.raises(ValueError, match="degenerate channel"):
            mrt_precoder(np.zeros((2, 3), dtype=complex))


class TestQuantizationNoiseCovariance:
    def test_ideal_dac_is_silent(self):
        W = np.full((3, 2), 0.5 + 0.1j)
        diag = quantization_noise_covariance(W, DacModel.for_bits(math.inf))
        np.testing.assert_array_equal(diag, np.zeros(3))

    def test_trace_identity(self):
        rng = np.random.default_rng(3)
        F = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        pre = mrt_precoder(F)  # unit Frobenius norm
        dac = DacModel.for_bits(2)
        diag = quantization_noise_covariance(pre, dac)
        assert diag.sum() == pytest.approx(dac.alpha * (1 - dac.alpha), rel=1e-12)

    def test_elementwise_oracle_one_bit(self):
        rng = np.random.default_rng(4)
        W = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        diag = quantization_noise_covariance(W, DacModel.for_bits(1))
        expected = 0.3646 * 0.6354 * np.sum(np.abs(W) ** 2, axis=1)
        np.testing.assert_allclose(diag, expected, rtol=1e-12)


class TestApplyAqnm:
    def test_ideal_dac_identity(self):
        x = np.array([1 + 2j, -0.5j, 3.0])
        out = apply_aqnm(x, DacModel.for_bits(math.inf), np.zeros(3),
                         rm.substream(0, "aqnm"))
        np.testing.assert_array_equal(out, x)

    def test_zero_input_is_pure_noise(self):
        dac = DacModel.for_bits(1)
        diag = np.array([0.2, 0.05, 0.6, 0.01])
        rng = rm.substream(1, "aqnm-zero")
        draws = np.stack([apply_aqnm(np.zeros(4), dac, diag, rng) for _ in range(100_000)])
        emp = (np.abs(draws) ** 2).mean(axis=0)
        np.testing.assert_allclose(emp, diag, rtol=0.02)

    def test_noise_covariance_and_decorrelation(self):
        rng = np.random.default_rng(5)
        F = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        pre = mrt_precoder(F)
        dac = DacModel.for_bits(1)
        diag = quantization_noise_covariance(pre, dac)
        gen = rm.substream(2, "aqnm-cov")
        n_draws = 100_000
        xs = np.empty((n_draws, 4), dtype=complex)
        nq = np.empty((n_draws, 4), dtype=complex)
        for t in range(n_draws):
            s = (gen.standard_normal(2) + 1j * gen.standard_normal(2)) / np.sqrt(2)
            x = pre.W @ s
            xs[t] = x
            nq[t] = apply_aqnm(x, dac, diag, gen) - dac.alpha * x
        cov = nq.conj().T @ nq / n_draws
        np.testing.assert_allclose(np.diag(cov).real, diag, rtol=0.02)
        scale = np.sqrt(np.outer(diag, diag))
        off = (np.abs(cov) / scale)[~np.eye(4, dtype=bool)]
        assert np.all(off < 0.02)
        # noise is uncorrelated with the precoded signal
        cross = np.abs(xs.conj().T @ nq / n_draws)
        norm = np.sqrt(np.outer((np.abs(xs) ** 2).mean(axis=0), diag))
        assert np.all(cross / norm < 0.02)

    def test_negative_diagonal_rejected(self):
        with pytest.raises(ValueError, match="covariance"):
            apply_aqnm(np.zeros(2), DacModel.for_bits(1), np.array([0.1, -0.2]),
                       rm.substream(0, "bad"))
