import math

import numpy as np
import pandas as pd
import pytest

from algorithms.flow import (
    fit_exponential_decay, flow_on_critical_manifold, integrate_flow, sample_critical_flow,
    write_trajectory_csv
)
from models.data_models import Trajectory
from models.exceptions import OffManifoldError
from sample_data import load_problem


def synthetic(times, speeds):
    n = len(times)
    return Trajectory(times=np.asarray(times), points=np.zeros((n, 1)), speeds=np.asarray(speeds),
                      f_values=np.zeros(n))


def test_flow_on_sphere_reaches_south_pole(s2_height):
    x0 = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
    trajectory = integrate_flow(s2_height, x0)
    assert trajectory.termination == "speed"
    assert trajectory.limit.submanifold == "S"
    assert np.all(np.diff(trajectory.f_values) <= 1e-12)
    assert trajectory.decay.passed
    assert trajectory.decay.rate == pytest.approx(1.0, rel=0.2)


def test_flow_stays_on_the_manifold(t2_cos):
    x0 = np.array([math.cos(1.0), math.sin(1.0), math.cos(2.0), math.sin(2.0)])
    trajectory = integrate_flow(t2_cos, x0)
    constraint = np.array([t2_cos.manifold.constraint_value(x) for x in trajectory.points])
    assert np.max(np.abs(constraint)) < 1e-9
    assert trajectory.limit.submanifold == "Cpi"


def test_quartic_decay_is_not_exponential():
    problem = load_problem("r1-x4")
    trajectory = integrate_flow(problem, np.array([1.0]))
    assert trajectory.termination == "horizon"
    assert not trajectory.decay.passed


def test_exponential_fit_recovers_rate():
    times = np.linspace(0.0, 30.0, 301)
    fit = fit_exponential_decay(synthetic(times, 3.0 * np.exp(-2.0 * times)))
    assert fit.passed
    assert fit.rate == pytest.approx(2.0, rel=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-10)


def test_exponential_fit_needs_samples():
    times = np.linspace(0.0, 1.0, 5)
    fit = fit_exponential_decay(synthetic(times, np.full(5, 1e-3)))
    assert not fit.passed
    assert "samples" in fit.reason


def test_critical_flow_moves_to_the_minimum_of_h():
    problem = load_problem("s1-zero")
    circle = problem.submanifold("S1")
    end = flow_on_critical_manifold(circle, np.array([0.0, 1.0]), 50.0)
    np.testing.assert_allclose(end, [-1.0, 0.0], atol=1e-6)


def test_critical_flow_fixes_critical_points_of_h():
    circle = load_problem("s1-zero").submanifold("S1")
    np.testing.assert_allclose(flow_on_critical_manifold(circle, np.array([1.0, 0.0]), 10.0), [1.0, 0.0],
                               atol=1e-12)


def test_critical_flow_rejects_bad_input():
    circle = load_problem("s1-zero").submanifold("S1")
    with pytest.raises(ValueError):
        flow_on_critical_manifold(circle, np.array([1.0, 0.0]), -1.0)
    with pytest.raises(OffManifoldError):
        flow_on_critical_manifold(circle, np.array([0.5, 0.0]), 1.0)


def test_sampled_critical_flow_decreases_h():
    problem = load_problem("s1-zero")
    circle = problem.submanifold("S1")
    segment = sample_critical_flow(problem, circle, np.array([0.0, 1.0]), 3.0, samples=20)
    assert len(segment) == 20
    h = [circle.morse_function_h(circle.nearest_params(x)) for x in segment.points]
    assert np.all(np.diff(h) <= 1e-12)


def test_trajectory_csv(tmp_path, s2_height):
    trajectory = integrate_flow(s2_height, np.array([0.6, 0.0, 0.8]))
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(path, trajectory)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["s", "x0", "x1", "x2", "speed", "f"]
    assert len(frame) == len(trajectory)
