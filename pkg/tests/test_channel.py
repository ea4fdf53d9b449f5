import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmwave_esprit.channel import (PathSet, assemble_channel, assemble_channel_factored,
                                   draw_paths, steering_matrix, steering_vector)
from mmwave_esprit.config import SystemConfig
from mmwave_esprit.errors import ConfigurationError

angles = st.floats(-np.pi / 3, np.pi / 3, allow_nan=False)


class TestSteeringVector:
    def test_broadside_is_flat(self):
        np.testing.assert_allclose(steering_vector(0.0, 4, 0.5), np.full(4, 0.5))

    def test_thirty_degrees_two_elements(self):
        # 2*pi*0.5*sin(pi/6) = pi/2 -> second element is j
        np.testing.assert_allclose(steering_vector(np.pi / 6, 2, 0.5),
                                   np.array([1, 1j]) / np.sqrt(2), atol=1e-15)

    @given(st.floats(-np.pi, np.pi), st.integers(1, 256), st.floats(0.05, 2.0))
    @settings(max_examples=100, deadline=None)
    def test_unit_norm(self, angle, n, delta):
        assert np.linalg.norm(steering_vector(angle, n, delta)) == pytest.approx(1.0, abs=1e-12)

    def test_elementwise_formula(self):
        k = np.arange(7)
        expected = np.exp(2j * np.pi * k * 0.3 * np.sin(0.4)) / np.sqrt(7)
        np.testing.assert_allclose(steering_vector(0.4, 7, 0.3), expected, rtol=1e-14)

    def test_matrix_columns_match_vectors(self):
        th = np.array([-0.5, 0.1, 0.9])
        mat = steering_matrix(th, 16, 0.5)
        for k, t in enumerate(th):
            np.testing.assert_allclose(mat[:, k], steering_vector(t, 16, 0.5), rtol=1e-14)

    @pytest.mark.parametrize("n,delta", [(0, 0.5), (4, 0.0), (4, -1.0)])
    def test_rejects_bad_geometry(self, n, delta):
        with pytest.raises(ConfigurationError):
            steering_vector(0.0, n, delta)


class TestDrawPaths:
    def test_angles_within_support(self, cfg):
        paths = draw_paths(cfg.replace(n_paths=2000), np.random.default_rng(0))
        assert np.all(np.abs(paths.aoa) <= np.pi / 3)
        assert np.all(np.abs(paths.aod) <= np.pi / 3)

    def test_angles_roughly_uniform(self, cfg):
        paths = draw_paths(cfg.replace(n_paths=20000), np.random.default_rng(1))
        hist, _ = np.histogram(paths.aoa, bins=10, range=(-np.pi / 3, np.pi / 3))
        assert np.all(np.abs(hist / 2000 - 1) < 0.1)

    def test_gain_power(self, cfg):
        # law of large numbers on E|alpha|^2 over 1e5 draws
        for var in (1.0, 2.5):
            paths = draw_paths(cfg.replace(n_paths=100_000, sigma_alpha_sq=var),
                               np.random.default_rng(2))
            assert np.mean(np.abs(paths.gains) ** 2) == pytest.approx(var, rel=0.02)

    def test_gains_circular(self, cfg):
        g = draw_paths(cfg.replace(n_paths=100_000), np.random.default_rng(3)).gains
        assert abs(np.mean(g ** 2)) < 0.02
        assert np.var(g.real) == pytest.approx(np.var(g.imag), rel=0.03)

    def test_deterministic(self, cfg):
        a = draw_paths(cfg, np.random.default_rng(42))
        b = draw_paths(cfg, np.random.default_rng(42))
        for name in ("aoa", "aod", "gains"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_min_separation(self, cfg):
        sep = np.radians(2)
        paths = draw_paths(cfg.replace(n_paths=8, min_separation=sep), np.random.default_rng(4))
        for i in range(8):
            for j in range(i + 1, 8):
                assert abs(paths.aoa[i] - paths.aoa[j]) >= sep
                assert abs(paths.aod[i] - paths.aod[j]) >= sep

    def test_impossible_separation(self, cfg):
        with pytest.raises(ConfigurationError):
            draw_paths(cfg.replace(n_paths=5, min_separation=1.0), np.random.default_rng(0))

    def test_pathset_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            PathSet([0.1, 0.2], [0.1], [1.0, 1.0])


class TestAssembleChannel:
    @pytest.mark.parametrize("n_bs,n_ms", [(4, 4), (64, 64), (8, 32)])
    def test_single_broadside_path_is_all_ones(self, n_bs, n_ms):
        cfg = SystemConfig(n_bs=n_bs, n_ms=n_ms, n_rf_bs=2, n_rf_ms=2, n_s=1, n_b_t=2,
                           n_b_r=2, m1=2, m2=1, n_paths=1, omp_n_b_t=None, omp_n_b_r=None)
        h = assemble_channel(PathSet([0.0], [0.0], [1.0]), cfg)
        np.testing.assert_allclose(h, np.ones((n_bs, n_ms)), rtol=1e-14)

    def test_mean_energy(self):
        # E||H||_F^2 = n_bs n_ms for sigma_alpha^2 = 1, over 1e4 draws
        cfg = SystemConfig(n_bs=16, n_ms=16, n_rf_bs=4, n_rf_ms=4, n_s=3, n_b_t=5, n_b_r=5,
                           m1=7, m2=7, omp_n_b_t=None, omp_n_b_r=None)
        rng = np.random.default_rng(5)
        energy = [np.linalg.norm(assemble_channel_factored(draw_paths(cfg, rng), cfg)) ** 2
                  for _ in range(10_000)]
        assert np.mean(energy) == pytest.approx(256, rel=0.03)

    def test_rank_equals_path_count(self, cfg, rng):
        paths = draw_paths(cfg, rng)
        s = np.linalg.svd(assemble_channel(paths, cfg), compute_uv=False)
        assert s[4] > 1e-6 * s[0]
        assert s[5] < 1e-10 * s[0]

    @given(st.lists(st.tuples(angles, angles, st.complex_numbers(max_magnitude=5)),
                    min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_sum_matches_factored(self, triples):
        cfg = SystemConfig(n_bs=32, n_ms=16, n_rf_bs=4, n_rf_ms=4, n_s=3, n_b_t=5, n_b_r=5,
                           m1=7, m2=7, omp_n_b_t=None, omp_n_b_r=None)
        paths = PathSet(*zip(*triples))
        h1 = assemble_channel(paths, cfg)
        h2 = assemble_channel_factored(paths, cfg)
        scale = max(np.abs(h1).max(), 1e-300)
        assert np.abs(h1 - h2).max() <= 1e-12 * scale + 1e-300

    @given(st.floats(0.01, 100))
    @settings(max_examples=30, deadline=None)
    def test_gain_scaling(self, c):
        cfg = SystemConfig()
        paths = draw_paths(cfg, np.random.default_rng(6))
        h = assemble_channel(paths, cfg)
        hc = assemble_channel(PathSet(paths.aoa, paths.aod, c * paths.gains), cfg)
        assert np.linalg.norm(hc) == pytest.approx(c * np.linalg.norm(h), rel=1e-12)

    def test_permutation_invariance(self, cfg, rng):
        paths = draw_paths(cfg, rng)
        h = assemble_channel(paths, cfg)
        hp = assemble_channel(paths.permuted([3, 1, 4, 0, 2]), cfg)
        assert np.abs(h - hp).max() <= 1e-12 * np.abs(h).max()
