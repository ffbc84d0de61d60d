import numpy as np
import pytest

from algorithms.momentmap import (
    alignment, check_equivariance, check_H2, moment, moment_general, moment_grassmann,
    moment_report, moment_toric, to_complex, unitary_lie_basis, verify_moment_identity
)
from models.data_models import ActionKind, LinearGroupAction
from models.exceptions import SingularActionError
from sample_data import ACTIONS, load_action


def random_point(rng, action):
    return to_complex(rng.standard_normal(2 * action.complex_dim))


@pytest.mark.parametrize("name", sorted(ACTIONS))
def test_moment_identity(name, rng):
    action = load_action(name)
    for _ in range(20):
        z = random_point(rng, action)
        xi = rng.standard_normal(action.group_dim)
        assert verify_moment_identity(action, z, xi) < 1e-6


def test_moment_identity_rho_normalization(rng):
    action = LinearGroupAction(name="rho", kind=ActionKind.TORIC, n=3, tau=[1.0, 1.0],
                               A=np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]), normalization="rho")
    for _ in range(10):
        assert verify_moment_identity(action, random_point(rng, action), rng.standard_normal(2)) < 1e-6


def test_circle_moment_is_the_unit_sphere():
    action = load_action("s1-c2")
    assert moment_toric(action, np.array([1.0, 0.0]))[0] == pytest.approx(0.0)
    assert moment_toric(action, np.array([1.0, 1.0j]))[0] == pytest.approx(0.5)


def test_grassmann_moment_vanishes_on_unit_frames():
    B = np.array([[0.6], [0.8j]])
    np.testing.assert_allclose(moment_grassmann(B), 0.0, atol=1e-15)
    np.testing.assert_allclose(moment(load_action("grassmann-2-1"), B.ravel()), 0.0, atol=1e-15)


def test_lie_basis_is_orthonormal():
    basis = unitary_lie_basis(3)
    gram = np.array([[np.real(np.trace(a.conj().T @ b)) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-12)


@pytest.mark.parametrize("name", ["s1-c2", "toric-rank2", "grassmann-2-1", "s1-c2-general"])
def test_equivariance(name, rng):
    action = load_action(name)
    z = random_point(rng, action)
    theta = rng.standard_normal(action.group_dim)
    assert check_equivariance(action, z, theta) < 1e-10


def test_alignment_matches_toric_moment(rng):
    toric = load_action("toric-rank2")
    general, W = alignment(toric)
    for _ in range(5):
        z = random_point(rng, toric)
        np.testing.assert_allclose(moment_toric(toric, z), W @ moment_general(general, z), atol=1e-12)


def test_invalid_actions():
    with pytest.raises(SingularActionError):
        LinearGroupAction(name="flat", kind=ActionKind.TORIC, n=2, tau=[0.0, 0.0],
                          A=np.array([[1.0, 1.0], [2.0, 2.0]]))
    with pytest.raises(SingularActionError):
        LinearGroupAction(name="hermitian", kind=ActionKind.GENERAL, n=2, tau=[0.0],
                          generators=[np.eye(2)])
    with pytest.raises(SingularActionError):
        alignment(load_action("grassmann-2-1"))


def test_H2_holds_on_the_unit_sphere():
    report = check_H2(load_action("s1-c2"), samples=4, seed=7)
    assert report["passed"]
    assert report["quotient_dim"] == 2
    assert report["lagrangian_dim"] == 1
    assert all(abs(p["norm"] - 1.0) < 1e-6 for p in report["samples"])


def test_H2_fails_at_the_origin():
    report = check_H2(load_action("s1-c2", tau=[0.0]), samples=4, seed=7)
    assert not report["passed"]


def test_moment_report():
    report = moment_report(load_action("s1-c2"), seed=7, points=5, samples=2)
    assert report["identity"]["passed"]
    assert report["passed"]
    assert report["identity"]["max_residual"] < 1e-6
