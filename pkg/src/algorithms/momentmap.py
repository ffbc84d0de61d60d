"""
Moment maps of linear unitary actions on C^n and their checks.

Conventions: C^n = R^2n with w(u, v) = Im sum conj(u_j) v_j, X_xi(z) = rho'(xi) z
and d<mu(.), xi> = w(X_xi, .). Lie algebra elements are handled in coordinates
with respect to a fixed basis; ``pairing_gram`` gives the inner product in
those coordinates.
"""

import itertools
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from config import Config
from models.data_models import ActionKind, LinearGroupAction
from models.exceptions import SingularActionError
from utils.logging import log_performance

logger = logging.getLogger(__name__)

REGULAR_TOL = 1e-4


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex).ravel()
    return np.concatenate([z.real, z.imag])


def to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def symplectic_form(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.imag(np.vdot(u, v)))


def unitary_lie_basis(k: int) -> List[np.ndarray]:
    """Basis of u(k), orthonormal for Re tr(A* B)."""
    basis = []
    for p in range(k):
        E = np.zeros((k, k), dtype=complex)
        E[p, p] = 1j
        basis.append(E)
    for p, q in itertools.combinations(range(k), 2):
        E = np.zeros((k, k), dtype=complex)
        E[p, q], E[q, p] = 1.0, -1.0
        basis.append(E / math.sqrt(2.0))
        F = np.zeros((k, k), dtype=complex)
        F[p, q], F[q, p] = 1j, 1j
        basis.append(F / math.sqrt(2.0))
    return basis


def _check_orthonormal(generators: List[np.ndarray]) -> None:
    gram = np.array([[np.real(np.trace(a.conj().T @ b)) for b in generators] for a in generators])
    if gram.size and np.max(np.abs(gram - np.eye(len(generators)))) > 1e-10:
        raise SingularActionError("generators are not orthonormal for Re tr(A* B)")


def moment_toric(action: LinearGroupAction, z: np.ndarray) -> np.ndarray:
    """(1/2) A |z|^2 - tau, or its dual (A A^T)^-1 (1/2) A |z|^2 - tau for the rho pairing."""
    z = np.asarray(z, dtype=complex).ravel()
    A = action.A
    values = 0.5 * A @ np.abs(z) ** 2
    if action.normalization == "rho":
        gram = A @ A.T
        if abs(np.linalg.det(gram)) < 1e-12:
            raise SingularActionError(f"A A^T of {action.name} is singular")
        values = np.linalg.solve(gram, values)
    return values - action.tau


def moment_grassmann(B: np.ndarray) -> np.ndarray:
    """(1/2i)(B* B - id) for an n x k frame B."""
    B = np.asarray(B, dtype=complex)
    return (B.conj().T @ B - np.eye(B.shape[1])) / 2j


def moment_general(action: LinearGroupAction, z: np.ndarray) -> np.ndarray:
    """-(1/2) rho'*(i z z*) - tau in the orthonormal generator basis."""
    _check_orthonormal(action.generators)
    z = np.asarray(z, dtype=complex).ravel()
    izz = 1j * np.outer(z, z.conj())
    values = np.array([-0.5 * np.real(np.trace(g.conj().T @ izz)) for g in action.generators])
    return values - action.tau


def lie_basis(action: LinearGroupAction) -> List[np.ndarray]:
    """rho'(xi_a) on the flattened configuration space for each basis vector xi_a."""
    if action.kind is ActionKind.TORIC:
        return [np.diag(-1j * row).astype(complex) for row in action.A]
    if action.kind is ActionKind.GRASSMANN:
        # X_xi(B) = B xi on row-major vec(B)
        return [np.kron(np.eye(action.n), E.T) for E in unitary_lie_basis(action.k)]
    return list(action.generators)


def pairing_gram(action: LinearGroupAction) -> np.ndarray:
    if action.kind is ActionKind.TORIC and action.normalization == "rho":
        return action.A @ action.A.T
    return np.eye(action.group_dim)


def moment(action: LinearGroupAction, z: np.ndarray) -> np.ndarray:
    """Moment map in Lie algebra coordinates."""
    if action.kind is ActionKind.TORIC:
        return moment_toric(action, z)
    if action.kind is ActionKind.GRASSMANN:
        mu = moment_grassmann(np.asarray(z, dtype=complex).reshape(action.n, action.k))
        return np.array([np.real(np.trace(E.conj().T @ mu)) for E in unitary_lie_basis(action.k)])
    return moment_general(action, z)


def infinitesimal_action(action: LinearGroupAction, xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return sum(c * M for c, M in zip(xi, lie_basis(action)))


def verify_moment_identity(action: LinearGroupAction, z: np.ndarray, xi: np.ndarray,
                           step: float = Config.MOMENT_FD_STEP) -> float:
    """sup over real basis directions v of |d<mu, xi>(v) - w(X_xi(z), v)|."""
    z = np.asarray(z, dtype=complex).ravel()
    xi = np.asarray(xi, dtype=float)
    gram = pairing_gram(action)
    X = infinitesimal_action(action, xi) @ z if np.any(xi) else np.zeros_like(z)

    def pairing(w):
        return float(moment(action, w) @ gram @ xi)

    x = to_real(z)
    residual = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        derivative = (pairing(to_complex(x + e)) - pairing(to_complex(x - e))) / (2.0 * step)
        expected = symplectic_form(X, to_complex(e / step))
        residual = max(residual, abs(derivative - expected))
    return residual


def group_element(action: LinearGroupAction, theta: np.ndarray) -> np.ndarray:
    """rho(exp(xi)) for xi with coordinates theta."""
    return linalg.expm(infinitesimal_action(action, theta))


def check_equivariance(action: LinearGroupAction, z: np.ndarray, theta: np.ndarray) -> float:
    """|mu(rho(g) z) - Ad(g) mu(z)| for g = exp(xi(theta))."""
    z = np.asarray(z, dtype=complex).ravel()
    g = group_element(action, theta)
    moved = moment(action, g @ z)

    if action.kind is ActionKind.TORIC:
        return float(np.max(np.abs(moved - moment(action, z))))

    if action.kind is ActionKind.GRASSMANN:
        # rho(g) B = B u with u = exp(xi) in U(k), and mu(B u) = u* mu(B) u
        u = linalg.expm(sum(c * E for c, E in zip(theta, unitary_lie_basis(action.k))))
        mu = moment_grassmann(z.reshape(action.n, action.k))
        expected = u.conj().T @ mu @ u
        return float(np.max(np.abs(moment_grassmann((g @ z).reshape(action.n, action.k)) - expected)))

    generators = action.generators
    mu_matrix = sum(c * G for c, G in zip(moment(action, z) + action.tau, generators))
    conjugated = g @ mu_matrix @ g.conj().T
    coords = np.array([np.real(np.trace(G.conj().T @ conjugated)) for G in generators])
    leak = float(np.linalg.norm(conjugated - sum(c * G for c, G in zip(coords, generators))))
    return float(np.max(np.abs(moved + action.tau - coords))) + leak


def alignment(action: LinearGroupAction) -> Tuple[LinearGroupAction, np.ndarray]:
    """General-kind copy of a toric action with orthonormal diagonal generators.

    Returns (general action, W) with moment_toric(z) = W moment_general(z).
    """
    if action.kind is not ActionKind.TORIC:
        raise SingularActionError("alignment is defined for toric actions")
    Q, R = np.linalg.qr(action.A.T)
    W = np.linalg.solve(pairing_gram(action), R.T)
    general = LinearGroupAction(
        name=f"{action.name}-general",
        kind=ActionKind.GENERAL,
        n=action.n,
        tau=np.linalg.solve(W, action.tau),
        generators=[np.diag(-1j * Q[:, b]) for b in range(action.k)]
    )
    return general, W


def _moment_jacobian(action: LinearGroupAction, x: np.ndarray, step: float = Config.MOMENT_FD_STEP) -> np.ndarray:
    columns = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        columns.append((moment(action, to_complex(x + e)) - moment(action, to_complex(x - e))) / (2.0 * step))
    return np.array(columns).T


def project_to_level_set(action: LinearGroupAction, x0: np.ndarray) -> Optional[np.ndarray]:
    """Newton iteration x <- x - pinv(d mu) mu towards mu = 0; None on failure."""
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(Config.MOMENT_NEWTON_MAX_ITER):
        value = moment(action, to_complex(x))
        if np.linalg.norm(value) < Config.MOMENT_NEWTON_TOL:
            return x
        x = x - np.linalg.pinv(_moment_jacobian(action, x)) @ value
        if not np.all(np.isfinite(x)):
            return None
    return x if np.linalg.norm(moment(action, to_complex(x))) < Config.MOMENT_NEWTON_TOL else None


def _stabilizer_grid(action: LinearGroupAction) -> List[np.ndarray]:
    d = action.group_dim
    per_axis = max(2, int(math.ceil(Config.STABILIZER_GRID ** (1.0 / d))))
    angles = 2.0 * math.pi * np.arange(per_axis) / per_axis
    return [np.array(theta) for theta in itertools.product(angles, repeat=d) if any(theta)]


def _stabilizer_distance(action: LinearGroupAction, z: np.ndarray, grid: List[np.ndarray]) -> float:
    """Smallest relative displacement |rho(g) z - z| / |z| over non-identity grid elements."""
    norm = np.linalg.norm(z)
    if norm == 0.0:
        return 0.0
    smallest = math.inf
    for theta in grid:
        g = group_element(action, theta)
        if np.linalg.norm(g - np.eye(g.shape[0])) < 1e-9:
            continue
        smallest = min(smallest, float(np.linalg.norm(g @ z - z)) / norm)
    return smallest


@log_performance
def check_H2(action: LinearGroupAction, samples: int = Config.H2_SAMPLES,
             seed: int = Config.DEFAULT_SEED) -> Dict:
    """Sample mu^-1(0): regular value, trivial stabilizers and the quotient dimension."""
    rng = np.random.default_rng(seed)
    grid = _stabilizer_grid(action)
    points = []

    for _ in range(samples):
        x = project_to_level_set(action, rng.standard_normal(2 * action.complex_dim))
        if x is None:
            logger.debug(f"Newton to the zero level of {action.name} failed from a random seed")
            continue
        z = to_complex(x)
        singular_values = linalg.svdvals(_moment_jacobian(action, x))
        smallest = float(singular_values.min()) if singular_values.size else 0.0
        regular = smallest > REGULAR_TOL * max(1.0, float(np.linalg.norm(z)))
        displacement = _stabilizer_distance(action, z, grid)
        points.append({
            "norm": round(float(np.linalg.norm(z)), 10),
            "min_singular_value": smallest,
            "regular": bool(regular),
            "stabilizer_displacement": displacement,
            "free": bool(regular and displacement > Config.FREE_TOL)
        })

    quotient_dim = action.manifold_dim - 2 * action.group_dim
    inconclusive = not points
    passed = not inconclusive and all(p["regular"] and p["free"] for p in points)
    if inconclusive:
        logger.warning(f"H2 check of {action.name} inconclusive: Newton failed on every seed")
    elif not passed:
        logger.warning(f"H2 check of {action.name} failed on {sum(not p['free'] for p in points)} samples")

    return {
        "action": action.name,
        "kind": action.kind.value,
        "tau": [float(t) for t in action.tau],
        "samples": points,
        "quotient_dim": quotient_dim,
        "lagrangian_dim": quotient_dim // 2,
        "inconclusive": inconclusive,
        "passed": passed
    }


def moment_report(action: LinearGroupAction, seed: int = Config.DEFAULT_SEED,
                  points: int = 20, samples: int = Config.H2_SAMPLES) -> Dict:
    """Identity residuals at random points plus the H2 check."""
    rng = np.random.default_rng(seed)
    residuals = []
    for _ in range(points):
        z = to_complex(rng.standard_normal(2 * action.complex_dim))
        xi = rng.standard_normal(action.group_dim)
        residuals.append(verify_moment_identity(action, z, xi))
    worst = max(residuals, default=0.0)
    h2 = check_H2(action, samples=samples, seed=seed)
    identity_ok = worst < Config.MOMENT_RESIDUAL_TOL
    logger.info(f"Moment identity for {action.name}: worst residual {worst:.2e}")
    return {
        "action": action.name,
        "identity": {"points": points, "max_residual": worst, "passed": identity_ok},
        "h2": h2,
        "passed": identity_ok and h2["passed"]
    }
