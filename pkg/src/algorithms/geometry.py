"""
Gradients, tangential Hessians and Morse-Bott checks on embedded manifolds.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import least_squares

from config import Config
from models.data_models import (
    HessianSpectrum, ManifoldModel, MorseBottProblem, ScalarField, SubmanifoldReport
)
from models.exceptions import EngineError, OffManifoldError

logger = logging.getLogger(__name__)


def ambient_gradient(f: ScalarField, y: np.ndarray, step: float = Config.FD_STEP) -> np.ndarray:
    """Euclidean gradient of f at an ambient point."""
    y = np.asarray(y, dtype=float)
    if f.ambient_gradient is not None:
        return np.asarray(f.ambient_gradient(y), dtype=float)
    return _central_gradient(f, y, step)


def _central_gradient(f: ScalarField, y: np.ndarray, step: float) -> np.ndarray:
    grad = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = step
        grad[i] = (f(y + e) - f(y - e)) / (2.0 * step)
    return grad


def _richardson_gradient(f: ScalarField, y: np.ndarray) -> np.ndarray:
    coarse, fine = Config.FD_RICHARDSON_STEPS
    g_coarse = _central_gradient(f, y, coarse)
    g_fine = _central_gradient(f, y, fine)
    return g_fine + (g_fine - g_coarse) / ((coarse / fine) ** 2 - 1.0)


def projected_field(manifold: ManifoldModel, f: ScalarField, y: np.ndarray) -> np.ndarray:
    """P(y) grad F(y), defined on a neighbourhood of the manifold."""
    return manifold.tangent_projector(y) @ ambient_gradient(f, y)


def _directional_check(f: ScalarField, x: np.ndarray, v: np.ndarray, fd_tol: float) -> bool:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return True
    unit = v / norm
    h = Config.FD_STEP
    derivative = (f(x + h * unit) - f(x - h * unit)) / (2.0 * h) * norm
    return abs(derivative - norm ** 2) < fd_tol * (1.0 + norm ** 2)


def gradient(manifold: ManifoldModel, f: ScalarField, x: np.ndarray,
             point_tol: Optional[float] = None, fd_tol: Optional[float] = None) -> np.ndarray:
    """Riemannian gradient of f for the induced metric.

    Raises OffManifoldError when x is farther than ``point_tol`` from the
    constraint set.
    """
    x = np.asarray(x, dtype=float)
    point_tol = Config.POINT_TOL if point_tol is None else point_tol
    fd_tol = Config.FD_TOL if fd_tol is None else fd_tol

    manifold.check_point(x, point_tol)
    P = manifold.tangent_projector(x)
    v = P @ ambient_gradient(f, x)

    if not _directional_check(f, x, v, fd_tol) and f.ambient_gradient is None:
        logger.debug(f"Gradient residual check failed at {np.round(x, 6)}, using Richardson extrapolation")
        v = P @ _richardson_gradient(f, x)
        if not _directional_check(f, x, v, fd_tol):
            logger.warning(f"Gradient of {f.name} failed the directional check at {np.round(x, 6)}")
    return v


def tangential_hessian(manifold: ManifoldModel, f: ScalarField, x: np.ndarray,
                       step: float = Config.HESS_STEP) -> Tuple[np.ndarray, np.ndarray, float]:
    """Hessian of f on the tangent space at x.

    Returns (H, T, residual) where T is an orthonormal tangent basis
    (D x dim), H the symmetrized dim x dim Hessian in that basis and
    residual the asymmetry of the raw finite-difference matrix.
    """
    x = np.asarray(x, dtype=float)
    D = manifold.ambient_dim
    P = manifold.tangent_projector(x)
    K = np.empty((D, D))
    for i in range(D):
        e = np.zeros(D)
        e[i] = step
        K[:, i] = (projected_field(manifold, f, x + e) - projected_field(manifold, f, x - e)) / (2.0 * step)
    Ht = P @ K @ P
    residual = float(np.linalg.norm(Ht - Ht.T))
    Ht = 0.5 * (Ht + Ht.T)
    T = manifold.tangent_basis(x)
    return T.T @ Ht @ T, T, residual


def hessian_eigenbasis(manifold: ManifoldModel, f: ScalarField,
                       x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and ambient eigenvectors (columns) of the tangential Hessian."""
    H, T, _ = tangential_hessian(manifold, f, x)
    eigenvalues, eigenvectors = np.linalg.eigh(H)
    return eigenvalues, T @ eigenvectors


def hessian_spectrum(manifold: ManifoldModel, f: ScalarField, x: np.ndarray,
                     crit_tol: Optional[float] = None) -> HessianSpectrum:
    crit_tol = Config.CRIT_TOL if crit_tol is None else crit_tol
    x = np.asarray(x, dtype=float)
    manifold.check_point(x, Config.POINT_TOL)

    grad_norm = float(np.linalg.norm(gradient(manifold, f, x)))
    H, _, residual = tangential_hessian(manifold, f, x)
    if residual >= Config.HESS_TOL:
        logger.warning(f"Hessian asymmetry {residual:.2e} at {np.round(x, 6)} exceeds tolerance")

    trusted = grad_norm < crit_tol
    if not trusted:
        logger.warning(f"Hessian requested at non-critical point (|grad| = {grad_norm:.2e})")

    return HessianSpectrum(
        eigenvalues=np.sort(np.linalg.eigvalsh(H)),
        symmetry_residual=residual,
        gradient_norm=grad_norm,
        trusted=trusted,
        zero_tol=Config.HESS_ZERO_TOL
    )


def check_morse_bott(problem: MorseBottProblem, tol: Optional[float] = None,
                     samples: int = 8) -> List[SubmanifoldReport]:
    """Compare kernel dimensions of the Hessian with the listed critical submanifolds."""
    crit_tol = Config.CRIT_TOL if tol is None else tol
    reports = []

    for sub in problem.critical_submanifolds:
        kernel_dims, observed, grad_norms = [], [], []
        diagnostic = ""
        for u in sub.sample_params(samples):
            x = sub.point(u)
            try:
                spectrum = hessian_spectrum(problem.manifold, problem.f, x, crit_tol)
            except OffManifoldError as e:
                diagnostic = f"parameterization leaves the manifold at u={np.round(u, 6).tolist()}: {e}"
                logger.error(f"{sub.name}: {diagnostic}")
                break
            kernel_dims.append(spectrum.zero)
            observed.append(spectrum.negative)
            grad_norms.append(spectrum.gradient_norm)

        worst = max((abs(k - sub.dim) for k in kernel_dims), default=sub.dim + 1)
        max_grad = max(grad_norms, default=float('inf'))
        passed = (not diagnostic and worst == 0 and max_grad < crit_tol
                  and all(n == sub.ind_f for n in observed))
        if not passed and not diagnostic:
            if worst:
                diagnostic = f"kernel dimension differs from submanifold dimension by {worst}"
            elif max_grad >= crit_tol:
                diagnostic = f"gradient norm {max_grad:.2e} on the listed critical set"
            else:
                diagnostic = f"normal index {sorted(set(observed))} differs from ind_f={sub.ind_f}"

        logger.info(f"Morse-Bott check {problem.name}/{sub.name}: "
                    f"{'pass' if passed else 'fail'} (kernel {sorted(set(kernel_dims))}, dim {sub.dim})")
        reports.append(SubmanifoldReport(
            name=sub.name,
            expected_dim=sub.dim,
            expected_ind_f=sub.ind_f,
            kernel_dims=kernel_dims,
            observed_ind_f=observed,
            max_gradient_norm=max_grad,
            worst_mismatch=worst,
            passed=passed,
            diagnostic=diagnostic
        ))
    return reports


def is_morse_bott(problem: MorseBottProblem) -> bool:
    return all(report.passed for report in check_morse_bott(problem))


def find_unlisted_critical_points(problem: MorseBottProblem, samples: int = 16,
                                  seed: int = Config.DEFAULT_SEED) -> List[np.ndarray]:
    """Randomized least-squares search for zeros of grad f off the listed critical set."""
    rng = np.random.default_rng(seed)
    manifold = problem.manifold
    unlisted: List[np.ndarray] = []

    for chart in manifold.chart_samplers.values():
        def residual(u, chart=chart):
            return gradient(manifold, problem.f, np.asarray(chart.func(u), dtype=float))

        for _ in range(samples):
            u0 = rng.uniform(chart.low, chart.high)
            try:
                result = least_squares(residual, u0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
            except EngineError as e:
                logger.debug(f"Critical point search from {np.round(u0, 4)} failed: {e}")
                continue
            x = np.asarray(chart.func(result.x), dtype=float)
            if np.linalg.norm(residual(result.x)) >= Config.CRIT_TOL:
                continue
            _, distance = problem.nearest_submanifold(x)
            if distance > Config.CRIT_SEARCH_RADIUS and \
                    all(np.linalg.norm(x - y) > Config.CRIT_SEARCH_RADIUS for y in unlisted):
                logger.warning(f"Unlisted critical point of {problem.name} at {np.round(x, 6)}")
                unlisted.append(x)
    return unlisted
