import math

import numpy as np
import pytest

import rismimo as rm
from rismimo.channels import (ChannelRealization, array_response, build_scene,
                              cascaded_channel, los_components, path_loss, sample_channel)


class TestArrayResponse:
    def test_single_element(self):
        assert array_response(1, 1.234, 0.5) == pytest.approx(1.0)

    def test_broadside(self):
        np.testing.assert_allclose(array_response(4, 0.0, 0.5), np.ones(4))

    def test_endfire_three_elements(self):
        # direct evaluation: spacing 1/2, sin = 1 -> entries exp(j*pi*x)
        got = array_response(3, np.pi / 2, 0.5)
        np.testing.assert_allclose(got, [1.0, -1.0, 1.0], atol=1e-12)

    def test_unit_modulus_and_leading_one(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            x = int(rng.integers(1, 40))
            v = array_response(x, rng.uniform(0, 2 * np.pi), rng.uniform(0.1, 2.0))
            assert v[0] == 1.0 + 0.0j
            np.testing.assert_allclose(np.abs(v), 1.0, atol=1e-12)

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError, match="positive integer"):
            array_response(0, 0.0, 0.5)


class TestPathLoss:
    def test_reference_distance(self):
        assert path_loss(1.0, -30.0, 1.0, 2.8) == pytest.approx(1e-3, rel=1e-12)

    def test_bs_ris_default_geometry(self):
        # BS (0,0) to RIS (5,2): distance sqrt(29), exponent 2.8
        expected = 1e-3 * 29.0 ** (-1.4)
        assert path_loss(math.sqrt(29.0), -30.0, 1.0, 2.8) == pytest.approx(expected, rel=1e-12)

    def test_square_law(self):
        assert path_loss(100.0, -30.0, 1.0, 2.0) == pytest.approx(1e-7, rel=1e-12)

    def test_strictly_decreasing(self):
        d = np.linspace(0.5, 500.0, 50)
        vals = [path_loss(x, -30.0, 1.0, 2.8) for x in d]
        assert np.all(np.diff(vals) < 0)

    def test_nonpositive_distance_rejected(self):
        with pytest.raises(ValueError, match="distance"):
            path_loss(0.0, -30.0, 1.0, 2.8)
        with pytest.raises(ValueError, match="distance"):
            path_loss(-3.0, -30.0, 1.0, 2.8)


class TestBuildScene:
    def test_degenerate_disk(self):
        cfg = rm.make_config(K=4, user_radius=0.0, seed=5)
        gains, users = build_scene(cfg)
        np.testing.assert_allclose(users, np.tile(cfg.user_center, (4, 1)))
        assert np.all(gains.beta == gains.beta[0])

    def test_default_epsilon(self):
        cfg = rm.make_config(seed=5)
        gains, _ = build_scene(cfg)
        assert gains.epsilon == pytest.approx(1e-3 * 29.0 ** (-1.4), rel=1e-12)

    def test_same_seed_reproduces(self):
        cfg = rm.make_config(seed=42)
        g1, u1 = build_scene(cfg)
        g2, u2 = build_scene(cfg)
        np.testing.assert_array_equal(u1, u2)
        np.testing.assert_array_equal(g1.beta, g2.beta)

    def test_users_inside_disk(self):
        cfg = rm.make_config(K=50, seed=3)
        _, users = build_scene(cfg)
        dist = np.hypot(users[:, 0] - cfg.user_center[0], users[:, 1] - cfg.user_center[1])
        assert np.all(dist <= cfg.user_radius + 1e-12)


class TestLosComponents:
    def test_leading_entry(self, small_config):
        g_bar, _ = los_components(small_config)
        assert g_bar[0, 0] == pytest.approx(1.0)

    def test_unit_modulus(self, small_config):
        g_bar, h_bar = los_components(small_config)
        np.testing.assert_allclose(np.abs(g_bar), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.abs(h_bar), 1.0, atol=1e-12)

    def test_rank_one(self, small_config):
        g_bar, _ = los_components(small_config)
        s = np.linalg.svd(g_bar, compute_uv=False)
        assert s[0] == pytest.approx(np.sqrt(small_config.M * small_config.N), rel=1e-12)
        np.testing.assert_allclose(s[1:], 0.0, atol=1e-9)

    def test_aligned_steering_vectors(self):
        cfg = rm.make_config(M=4, N=6, K=1, phi_kt=[1.1], phi_r=1.1, seed=1)
        _, h_bar = los_components(cfg)
        a = array_response(cfg.N, cfg.phi_r, cfg.d_over_lambda)
        assert np.vdot(h_bar[:, 0], a) == pytest.approx(cfg.N)


class TestSampleChannel:
    def test_infinite_factors_collapse_to_los(self):
        cfg = rm.make_config(M=4, N=5, K=2, k_g=math.inf, k_k=math.inf, seed=2)
        gains, _ = build_scene(cfg)
        real = sample_channel(cfg, gains, rm.substream(2, "trial", 0))
        g_bar, h_bar = los_components(cfg)
        np.testing.assert_allclose(real.G, np.sqrt(gains.epsilon) * g_bar, atol=1e-15)
        np.testing.assert_allclose(real.H, h_bar * np.sqrt(gains.beta)[None, :], atol=1e-15)

    def test_per_entry_second_moment(self):
        # E|G_nm|^2 = epsilon regardless of the Rician split
        cfg = rm.make_config(M=2, N=2, K=1, k_g=1.0, seed=9)
        gains, _ = build_scene(cfg)
        acc = 0.0
        n_draws = 100_000
        rng = rm.substream(9, "moment-draws")
        for _ in range(n_draws):
            real = sample_channel(cfg, gains, rng)
            acc += np.abs(real.G) ** 2
        emp = acc / n_draws
        np.testing.assert_allclose(emp, gains.epsilon, rtol=0.02)

    def test_rayleigh_case_zero_mean(self):
        cfg = rm.make_config(M=2, N=2, K=1, k_g=0.0, seed=9)
        gains, _ = build_scene(cfg)
        rng = rm.substream(9, "rayleigh")
        n_draws = 50_000
        mean = np.zeros((2, 2), dtype=complex)
        power = np.zeros((2, 2))
        for _ in range(n_draws):
            real = sample_channel(cfg, gains, rng)
            mean += real.G
            power += np.abs(real.G) ** 2
        np.testing.assert_allclose(np.abs(mean / n_draws), 0.0,
                                   atol=4 * np.sqrt(gains.epsilon / n_draws))
        np.testing.assert_allclose(power / n_draws, gains.epsilon, rtol=0.03)

    def test_scattering_covariance_is_identity(self):
        # vec of the normalized scattering part has identity covariance
        cfg = rm.make_config(M=2, N=2, K=1, k_g=0.0, seed=13)
        gains, _ = build_scene(cfg)
        rng = rm.substream(13, "cov")
        n_draws = 100_000
        vecs = np.empty((n_draws, 4), dtype=complex)
        for t in range(n_draws):
            real = sample_channel(cfg, gains, rng)
            vecs[t] = (real.G / np.sqrt(gains.epsilon)).reshape(-1)
        cov = vecs.conj().T @ vecs / n_draws
        np.testing.assert_allclose(cov, np.eye(4), atol=0.02)

    def test_determinism(self, small_scene):
        cfg, gains, _ = small_scene
        a = sample_channel(cfg, gains, rm.substream(cfg.seed, "mc-trial", 7))
        b = sample_channel(cfg, gains, rm.substream(cfg.seed, "mc-trial", 7))
        np.testing.assert_array_equal(a.G, b.G)
        np.testing.assert_array_equal(a.H, b.H)


def brute_force_cascade(G, H, theta):
    K, M, N = H.shape[1], G.shape[1], G.shape[0]
    F = np.zeros((K, M), dtype=complex)
    for k in range(K):
        for m in range(M):
            for n in range(N):
                F[k, m] += np.conj(H[n, k]) * np.exp(1j * theta[n]) * G[n, m]
    return F


class TestCascadedChannel:
    def test_scalar_chain(self):
        rng = np.random.default_rng(1)
        g = rng.standard_normal(2).view(complex)
        h = rng.standard_normal(2).view(complex)
        theta = np.array([0.7])
        real = ChannelRealization(G=g.reshape(1, 1), H=h.reshape(1, 1))
        f = cascaded_channel(real, theta)
        assert f[0, 0] == pytest.approx(np.conj(h[0]) * np.exp(1j * 0.7) * g[0])

    def test_identity_reflection(self):
        rng = np.random.default_rng(2)
        G = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        H = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        F = cascaded_channel(ChannelRealization(G=G, H=H), np.zeros(3))
        np.testing.assert_allclose(F, H.conj().T @ G, atol=1e-14)

    def test_matches_triple_sum(self):
        rng = np.random.default_rng(3)
        for n in range(1, 5):
            for m in range(1, 5):
                for k in range(1, 5):
                    G = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
                    H = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
                    theta = rng.uniform(0, 2 * np.pi, n)
                    fast = cascaded_channel(ChannelRealization(G=G, H=H), theta)
                    slow = brute_force_cascade(G, H, theta)
                    np.testing.assert_allclose(fast, slow, rtol=1e-10, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(4)
        G = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        H = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        theta = rng.uniform(0, 2 * np.pi, 3)
        c = 2.5 - 1.3j
        f1 = cascaded_channel(ChannelRealization(G=c * G, H=H), theta)
        np.testing.assert_allclose(f1, c * cascaded_channel(ChannelRealization(G=G, H=H), theta))
        f2 = cascaded_channel(ChannelRealization(G=G, H=c * H), theta)
        np.testing.assert_allclose(
            f2, np.conj(c) * cascaded_channel(ChannelRealization(G=G, H=H), theta))

    def test_dimension_mismatch(self):
        real = ChannelRealization(G=np.zeros((3, 2), complex), H=np.zeros((3, 2), complex))
        with pytest.raises(ValueError, match="does not match"):
            cascaded_channel(real, np.zeros(4))
