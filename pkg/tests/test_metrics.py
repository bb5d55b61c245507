import numpy as np
import pytest

from nodeboost import InputError, detection_rate_at, log_average_rate, roc, roc_points


class TestRoc:
    def test_perfect_separation(self):
        scores = np.array([1.0, 2.0, 3.0, -1.0, -2.0])
        labels = np.array([1, 1, 1, -1, -1])
        report = roc(scores, labels)
        assert report.detection_rate_at_fp == pytest.approx(1.0)
        assert report.log_average_rate == pytest.approx(1.0)

    def test_anti_classifier_never_beats_chance(self):
        rng = np.random.default_rng(2)
        labels = rng.choice([-1, 1], size=400)
        labels[:2] = [1, -1]
        scores = -labels + rng.normal(0, 0.05, size=400)   # anti-correlated
        pts = roc_points(scores, labels)
        for fp in (0.1, 0.3, 0.5, 0.7, 0.9):
            assert detection_rate_at(pts, fp) <= fp + 0.05

    def test_random_scores_chance_level(self):
        rng = np.random.default_rng(3)
        scores = rng.normal(size=10_000)
        labels = rng.choice([-1, 1], size=10_000)
        labels[:2] = [1, -1]
        report = roc(scores, labels)
        assert report.detection_rate_at_fp == pytest.approx(0.5, abs=0.02)

    def test_monotone_in_fp(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=300)
        labels = rng.choice([-1, 1], size=300)
        labels[:2] = [1, -1]
        pts = roc_points(scores, labels)
        assert np.all(np.diff(pts[:, 0]) >= 0)
        assert np.all(np.diff(pts[:, 1]) >= -1e-15)
        assert pts[0, 0] == 0.0
        assert pts[-1, 0] == 1.0 and pts[-1, 1] == 1.0

    def test_rates_within_unit_interval(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=100)
        labels = rng.choice([-1, 1], size=100)
        labels[:2] = [1, -1]
        pts = roc_points(scores, labels)
        assert np.all((pts >= 0.0) & (pts <= 1.0))

    def test_single_class_rejected(self):
        with pytest.raises(InputError):
            roc(np.array([1.0, 2.0]), np.array([1, 1]))

    def test_log_average_positions(self):
        # a flat curve averages to its constant level regardless of spacing
        pts = np.array([[0.0, 0.7], [1.0, 0.7]])
        assert log_average_rate(pts) == pytest.approx(0.7)
