import math

import numpy as np
import pytest

from cinesim.flow import (
    FlowField,
    angular_difference,
    build_pyramid,
    circular_mean,
    flow_features,
    grid_points,
    lucas_kanade,
)


def smooth_texture(width, height, seed=0, passes=3):
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 255, size=(height, width))
    for _ in range(passes):
        padded = np.pad(img, 1, mode="edge")
        img = (
            padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2]
            + padded[1:-1, 2:] + padded[1:-1, 1:-1]
        ) / 5.0
    return img


def field_of(vectors):
    vectors = np.asarray(vectors, dtype=float)
    return FlowField(np.zeros_like(vectors), vectors)


class TestLucasKanade:
    def test_recovers_synthetic_translation(self):
        prev = smooth_texture(160, 120, seed=3)
        cur = np.roll(prev, 3, axis=1)  # wrap-cropped 3 px right shift
        points = grid_points(160, 120, n=16, margin=11)
        field = lucas_kanade(prev, cur, points)
        assert len(field) > 100
        dx = np.median(field.vectors[:, 0])
        dy = np.median(np.abs(field.vectors[:, 1]))
        assert abs(dx - 3.0) <= 0.5
        assert dy <= 0.5

    def test_zero_motion(self):
        prev = smooth_texture(120, 90, seed=5)
        points = grid_points(120, 90, n=16, margin=11)
        field = lucas_kanade(prev, prev.copy(), points)
        assert len(field) > 0
        assert np.all(field.magnitudes <= 0.1)

    def test_uniform_frames_drop_all_points(self):
        prev = np.full((90, 120), 128.0)
        cur = np.full((90, 120), 128.0)
        field = lucas_kanade(prev, cur, grid_points(120, 90))
        assert len(field) == 0
        assert flow_features(field) == (0.0, 0.0, 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            lucas_kanade(np.zeros((10, 10)), np.zeros((12, 10)), grid_points(10, 10, n=2, margin=1))

    def test_grid_has_window_margin(self):
        points = grid_points(500, 280, n=16, margin=11)
        assert points.shape == (256, 2)
        assert points[:, 0].min() >= 11 and points[:, 0].max() <= 488
        assert points[:, 1].min() >= 11 and points[:, 1].max() <= 268

    def test_pyramid_shapes(self):
        pyr = build_pyramid(np.zeros((120, 200)), levels=3)
        assert [p.shape for p in pyr] == [(120, 200), (60, 100), (30, 50)]


class TestFlowFeatures:
    def test_hand_computed_two_vector_case(self):
        # F = {1, 3}, phi = {0, pi/2}: mean magnitude 2, phi_bar = pi/4,
        # denominator 2 * (pi/4)^2, PTPT = 4 / (2 * (pi/4)^2) = 32 / pi^2
        field = field_of([[1.0, 0.0], [0.0, 3.0]])
        ptpt, mean_mag, _ = flow_features(field)
        assert mean_mag == pytest.approx(2.0, abs=1e-12)
        assert ptpt == pytest.approx(32.0 / math.pi**2, abs=1e-6)
        assert ptpt == pytest.approx(3.242277, abs=1e-5)

    def test_parallel_vectors_hit_epsilon_floor(self):
        field = field_of([[2.0, 0.0]] * 100)
        ptpt, mean_mag, std_mag = flow_features(field)
        assert ptpt == pytest.approx(200.0 / 1e-4)
        assert mean_mag == 2.0
        assert std_mag == 0.0

    def test_random_angles_match_direct_evaluation(self):
        rng = np.random.default_rng(11)
        angles = rng.uniform(-np.pi, np.pi, size=400)
        vectors = np.column_stack([np.cos(angles), np.sin(angles)])
        field = field_of(vectors)
        ptpt, mean_mag, _ = flow_features(field)
        # direct evaluation of the formula, independent of the implementation
        sins, coss = np.sin(angles).sum(), np.cos(angles).sum()
        phi_bar = math.atan2(sins, coss)
        delta = np.abs((angles - phi_bar + np.pi) % (2 * np.pi) - np.pi)
        expected = vectors.shape[0] * 1.0 / (delta**2).sum()
        assert ptpt == pytest.approx(expected, rel=1e-12)
        assert mean_mag == pytest.approx(1.0, abs=1e-12)

    def test_parallel_exceeds_random_by_10x(self):
        rng = np.random.default_rng(13)
        angles = rng.uniform(-np.pi, np.pi, size=256)
        random_field = field_of(np.column_stack([np.cos(angles), np.sin(angles)]))
        parallel_field = field_of([[1.0, 0.0]] * 256)
        assert flow_features(parallel_field)[0] >= 10 * flow_features(random_field)[0]

    def test_rotation_invariance(self):
        rng = np.random.default_rng(17)
        angles = rng.uniform(-np.pi, np.pi, size=64)
        mags = rng.uniform(0.5, 3.0, size=64)
        base = field_of(np.column_stack([mags * np.cos(angles), mags * np.sin(angles)]))
        for shift in (0.3, 1.7, -2.2):
            rotated = field_of(
                np.column_stack(
                    [mags * np.cos(angles + shift), mags * np.sin(angles + shift)]
                )
            )
            assert flow_features(rotated)[0] == pytest.approx(flow_features(base)[0], rel=1e-9)

    def test_magnitude_scaling_is_linear(self):
        rng = np.random.default_rng(19)
        vectors = rng.normal(size=(50, 2))
        base = flow_features(field_of(vectors))
        for c in (0.5, 2.0, 7.0):
            scaled = flow_features(field_of(c * vectors))
            assert scaled[0] == pytest.approx(c * base[0], rel=1e-9)
            assert scaled[1] == pytest.approx(c * base[1], rel=1e-9)

    def test_angular_difference_wraps(self):
        assert angular_difference(np.array([np.pi - 0.1]), -np.pi + 0.1)[0] == pytest.approx(0.2)
        assert circular_mean(np.array([np.pi - 0.1, -np.pi + 0.1])) == pytest.approx(
            np.pi, abs=1e-9
        ) or circular_mean(np.array([np.pi - 0.1, -np.pi + 0.1])) == pytest.approx(
            -np.pi, abs=1e-9
        )
