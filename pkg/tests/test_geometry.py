import numpy as np
import pytest

from algorithms.geometry import (
    check_morse_bott, find_unlisted_critical_points, gradient, hessian_spectrum, is_morse_bott
)
from models.data_models import MorseBottProblem
from models.exceptions import OffManifoldError
from sample_data import PROBLEMS, load_problem


def test_gradient_is_tangent_to_the_sphere(s2_height):
    g = gradient(s2_height.manifold, s2_height.f, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(g, [0.0, 0.0, 1.0], atol=1e-12)


def test_gradient_vanishes_at_the_poles(s2_height):
    for pole in ([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]):
        assert np.linalg.norm(gradient(s2_height.manifold, s2_height.f, np.array(pole))) < 1e-12


def test_gradient_rejects_points_off_the_manifold(s2_height):
    with pytest.raises(OffManifoldError) as info:
        gradient(s2_height.manifold, s2_height.f, np.array([1.1, 0.0, 0.0]))
    assert info.value.distance > 0.09


def test_hessian_at_the_poles(s2_height):
    north = hessian_spectrum(s2_height.manifold, s2_height.f, np.array([0.0, 0.0, 1.0]))
    south = hessian_spectrum(s2_height.manifold, s2_height.f, np.array([0.0, 0.0, -1.0]))
    np.testing.assert_allclose(north.eigenvalues, [-1.0, -1.0], atol=1e-6)
    np.testing.assert_allclose(south.eigenvalues, [1.0, 1.0], atol=1e-6)
    assert north.negative == 2 and south.negative == 0
    assert north.trusted


def test_hessian_kernel_along_the_equator(s2_z2):
    spectrum = hessian_spectrum(s2_z2.manifold, s2_z2.f, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(spectrum.eigenvalues, [0.0, 2.0], atol=1e-6)
    assert spectrum.zero == 1
    assert spectrum.min_nonzero_magnitude() == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("name", ["s2-height", "s2-z2", "t2-cos", "t2-morse", "s1-zero", "model-x1sq-x2sq"])
def test_registry_examples_are_morse_bott(name):
    reports = check_morse_bott(load_problem(name))
    assert all(r.passed for r in reports), [r.diagnostic for r in reports]


def test_quartic_is_not_morse_bott():
    problem = load_problem("r1-x4")
    reports = check_morse_bott(problem)
    assert not is_morse_bott(problem)
    assert reports[0].worst_mismatch == 1
    assert "kernel" in reports[0].diagnostic


def test_generator_labels(s2_z2):
    labels = {c.label: c.total_index for c in s2_z2.crit_points()}
    assert labels == {"N": 2, "S": 2, "E:s": 1, "E:m": 0}


def test_unlisted_critical_points_are_found(s2_z2):
    poles_only = MorseBottProblem(
        name="poles-only",
        manifold=s2_z2.manifold,
        f=s2_z2.f,
        critical_submanifolds=[s for s in s2_z2.critical_submanifolds if s.dim == 0]
    )
    unlisted = find_unlisted_critical_points(poles_only, samples=16, seed=3)
    assert unlisted
    assert all(abs(x[2]) < 1e-4 for x in unlisted)


def test_complete_listing_has_no_unlisted_points(s2_height):
    assert find_unlisted_critical_points(s2_height, samples=8, seed=3) == []


def test_every_registry_entry_builds():
    for name, builder in PROBLEMS.items():
        problem = builder()
        assert problem.name == name
        for c in problem.crit_points():
            problem.manifold.check_point(c.point, 1e-10)
