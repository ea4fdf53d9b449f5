import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmwave_esprit.channel import assemble_channel, draw_paths
from mmwave_esprit.config import SystemConfig
from mmwave_esprit.errors import ConfigurationError
from mmwave_esprit.training import (aggregate_training, aggregated_pilot, build_combiner_block,
                                    build_pilot, build_precoder_block, dft_matrix,
                                    estimate_effective_channel, simulate_uplink)


class TestPilot:
    def test_single_stream(self):
        np.testing.assert_array_equal(build_pilot(1), [[1.0]])

    def test_three_streams_autocorrelation(self):
        s = build_pilot(3)
        assert s.shape == (3, 3)
        assert np.linalg.norm(s @ s.conj().T - 3 * np.eye(3)) < 1e-12

    @given(st.integers(1, 16))
    def test_determinant(self, n_s):
        s = build_pilot(n_s)
        assert abs(np.linalg.det(s)) ** 2 == pytest.approx(float(n_s) ** n_s, rel=1e-9)

    def test_rejects_zero(self):
        with pytest.raises(ConfigurationError):
            build_pilot(0)

    @pytest.mark.parametrize("n", [2, 3, 4, 8])
    def test_dft_columns_orthogonal(self, n):
        u = dft_matrix(n)
        np.testing.assert_allclose(u.conj().T @ u, n * np.eye(n), atol=1e-12)
        np.testing.assert_allclose(np.abs(u), 1.0)


class TestBlocks:
    # hand evaluation: U_2 = [[1, 1], [1, -1]], F_BB = sqrt(2) u_1,
    # F_RF = [u_1, u_2, u_2, u_2]^H / 2 -> F_1 = [sqrt(2), 0, 0, 0]^T
    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_small_precoder_selects_row(self, small_cfg, j):
        f_rf, f_bb, f = build_precoder_block(j, small_cfg)
        expected = np.zeros((4, 1))
        expected[j - 1] = np.sqrt(2)
        np.testing.assert_allclose(f, expected, atol=1e-15)
        np.testing.assert_allclose(np.abs(f_rf), 0.5, atol=1e-15)

    def test_small_combiner_first_block(self, small_cfg):
        _, _, w = build_combiner_block(1, small_cfg)
        np.testing.assert_allclose(w, np.eye(4)[:, :1], atol=1e-15)

    def test_last_combiner_block_fills_bottom(self):
        cfg = SystemConfig(n_bs=12, n_ms=12, n_b_r=4, n_b_t=4, m1=6, m2=6,
                           omp_n_b_t=None, omp_n_b_r=None)
        _, _, w = build_combiner_block(4, cfg)
        alpha_w = 4 / np.sqrt(12)
        np.testing.assert_allclose(w[-3:], alpha_w * np.eye(3), atol=1e-14)
        np.testing.assert_allclose(w[:-3], 0, atol=1e-14)

    def test_combiner_column_norms_equal(self, cfg):
        for i in (1, 5, 10):
            norms = np.linalg.norm(build_combiner_block(i, cfg)[2], axis=0)
            np.testing.assert_allclose(norms, norms[0], rtol=1e-13)

    @pytest.mark.parametrize("j", [0, 11, -1])
    def test_bad_index(self, cfg, j):
        with pytest.raises(IndexError):
            build_precoder_block(j, cfg)
        with pytest.raises(IndexError):
            build_combiner_block(j, cfg)

    def test_streams_must_leave_a_filler_chain(self):
        cfg = SystemConfig(n_s=4, n_b_t=10, n_b_r=10, omp_n_b_t=None, omp_n_b_r=None)
        with pytest.raises(ConfigurationError):
            build_precoder_block(1, cfg)

    def test_constant_modulus_audit(self, cfg):
        plan = aggregate_training(cfg)
        for f_rf, _, _ in plan.precoder_blocks:
            assert np.abs(np.abs(f_rf) - 1 / np.sqrt(cfg.n_ms)).max() < 1e-14
        for w_rf, _, _ in plan.combiner_blocks:
            assert np.abs(np.abs(w_rf) - 1 / np.sqrt(cfg.n_bs)).max() < 1e-14

    def test_power_audit(self, cfg):
        for f_rf, f_bb, _ in aggregate_training(cfg).precoder_blocks:
            assert abs(np.linalg.norm(f_rf @ f_bb) ** 2 - cfg.n_rf_ms) < 1e-10


class TestAggregate:
    def test_reference_precoder_structure(self, cfg):
        plan = aggregate_training(cfg)
        assert plan.f_agg.shape == (64, 30)
        expected = np.vstack([np.eye(30), np.zeros((34, 30))]) * np.sqrt(4 / 3)
        np.testing.assert_allclose(plan.f_agg, expected, atol=1e-13)

    def test_alpha_f_from_power(self, cfg):
        # alpha_f follows from ||F_j||_F^2 = n_rf_ms with F_j = alpha_f [0; I_3; 0]
        plan = aggregate_training(cfg)
        f1 = plan.precoder_blocks[0][2]
        assert plan.alpha_f == pytest.approx(np.sqrt(np.linalg.norm(f1) ** 2 / 3), rel=1e-13)
        assert plan.alpha_f == pytest.approx(np.sqrt(4 / 3), rel=1e-15)

    def test_combiner_gram(self, cfg):
        plan = aggregate_training(cfg)
        assert plan.alpha_w == pytest.approx(4 / 8)
        np.testing.assert_allclose(plan.w_agg.conj().T @ plan.w_agg,
                                   plan.alpha_w ** 2 * np.eye(30), atol=1e-13)

    def test_full_aperture_has_empty_zero_block(self):
        cfg = SystemConfig(n_bs=30, n_ms=30, m1=13, m2=13, omp_n_b_t=None, omp_n_b_r=None)
        plan = aggregate_training(cfg)
        np.testing.assert_allclose(plan.f_agg, plan.alpha_f * np.eye(30), atol=1e-13)

    def test_overflow(self, cfg):
        with pytest.raises(ConfigurationError):
            aggregate_training(cfg, n_b_t=22)

    def test_overhead(self, cfg):
        assert aggregate_training(cfg).pilot_overhead == 300
        assert cfg.pilot_overhead == 300


class TestUplink:
    def test_noiseless(self, cfg, rng):
        plan = aggregate_training(cfg)
        h = assemble_channel(draw_paths(cfg, rng), cfg)
        y = simulate_uplink(h, plan, 0.0)
        h_bar = plan.w_agg.conj().T @ h @ plan.f_agg
        np.testing.assert_allclose(y, h_bar @ aggregated_pilot(plan), atol=1e-12)
        assert y.shape == (30, 30)

    def test_noise_variance_through_combiner(self, cfg):
        plan = aggregate_training(cfg)
        sigma = 0.7
        ys = [simulate_uplink(np.zeros((64, 64)), plan, sigma, np.random.default_rng(k))
              for k in range(12)]
        samples = np.concatenate([y.ravel() for y in ys])
        assert samples.size >= 10_000
        assert np.var(samples) == pytest.approx(plan.alpha_w ** 2 * sigma, rel=0.05)

    def test_noise_needs_rng(self, cfg):
        with pytest.raises(ValueError):
            simulate_uplink(np.zeros((64, 64)), aggregate_training(cfg), 1.0)


class TestEffectiveChannel:
    def test_submatrix_identity_on_random_channels(self, cfg):
        plan = aggregate_training(cfg)
        rng = np.random.default_rng(8)
        for _ in range(200):
            h = assemble_channel(draw_paths(cfg, rng), cfg)
            est = estimate_effective_channel(simulate_uplink(h, plan, 0.0), plan)
            assert np.abs(est.h_bar / est.scale - h[:30, :30]).max() < 1e-12 * np.abs(h).max()

    def test_exact_despreading(self, cfg, rng):
        plan = aggregate_training(cfg)
        h_bar = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
        est = estimate_effective_channel(h_bar @ aggregated_pilot(plan), plan)
        np.testing.assert_allclose(est.h_bar, h_bar, atol=1e-12)
        assert est.scale == pytest.approx(plan.alpha_w * plan.alpha_f)

    def test_noise_variance_after_ls(self, cfg):
        plan = aggregate_training(cfg)
        sigma = 2.0
        samples = np.concatenate([
            estimate_effective_channel(
                simulate_uplink(np.zeros((64, 64)), plan, sigma, np.random.default_rng(k)),
                plan).h_bar.ravel()
            for k in range(12)])
        assert np.var(samples) == pytest.approx(plan.alpha_w ** 2 * sigma / 3, rel=0.05)
