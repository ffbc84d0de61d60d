"""
Path-space involutions on a dyadic midpoint grid.

Sections xi: [0,1] -> C^n are stored as real vectors of length 2nN, sample by
sample, each sample as (real parts, imaginary parts). On the midpoint grid the
reflection t -> 1-t and every dyadic shift are exact permutations, so all
operators below are signed permutations or spectral functions of them.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from config import Config
from models.data_models import OperatorDomain, PathGrid, PathOperator
from models.exceptions import GridError, NonPositiveSpectrumError
from utils.logging import log_performance

logger = logging.getLogger(__name__)

SPECTRUM_CASES = ((1, 32), (2, 64), (1, 128))

# Eigenvalues of L_k^2 for k = 1, 2, 3 written as nested radicals
_R2 = math.sqrt(2.0)
RADICAL_SPECTRA = {
    1: [2.0],
    2: [4 + 2 * _R2, 4 - 2 * _R2],
    3: [
        2 * (4 + 2 * _R2 + math.sqrt(4 + 2 * _R2) * (1 + _R2)),
        2 * (4 - 2 * _R2 + math.sqrt(4 - 2 * _R2) * (1 - _R2)),
        2 * (4 + 2 * _R2 - math.sqrt(4 + 2 * _R2) * (1 + _R2)),
        2 * (4 - 2 * _R2 - math.sqrt(4 - 2 * _R2) * (1 - _R2)),
    ],
}


def conjugation(n: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def complex_structure(n: int) -> np.ndarray:
    """Multiplication by i on (real parts, imaginary parts)."""
    eye, zero = np.eye(n), np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _on_samples(sample_matrix: np.ndarray, grid: PathGrid, block: Optional[np.ndarray] = None) -> np.ndarray:
    block = np.eye(2 * grid.n) if block is None else block
    return np.kron(sample_matrix, block)


def twisted_shift(N: int, shift: int) -> np.ndarray:
    """xi(t) -> (-1)^floor(t + s) xi(t + s mod 1) for s = shift/N."""
    T = np.zeros((N, N))
    for j in range(N):
        T[j, (j + shift) % N] = (-1.0) ** ((j + shift) // N)
    return T


def build_I1(grid: PathGrid) -> PathOperator:
    """xi(t) -> conj(xi(1 - t))."""
    reflection = np.eye(grid.N)[::-1]
    return PathOperator(
        matrix=_on_samples(reflection, grid, conjugation(grid.n)),
        label="I1", domain=OperatorDomain.FULL, grid=grid
    )


def eigenprojections(I1: PathOperator) -> Tuple[PathOperator, PathOperator]:
    """(pi_plus, pi_minus) = (id + I1)/2, (id - I1)/2."""
    eye = np.eye(I1.matrix.shape[0])
    return (
        PathOperator(matrix=0.5 * (eye + I1.matrix), label="pi+", domain=OperatorDomain.FULL, grid=I1.grid),
        PathOperator(matrix=0.5 * (eye - I1.matrix), label="pi-", domain=OperatorDomain.FULL, grid=I1.grid)
    )


def eigenspace_basis(grid: PathGrid, sign: int) -> np.ndarray:
    """Orthonormal basis (columns) of the (+1) or (-1) eigenspace of I1."""
    plus, minus = eigenprojections(build_I1(grid))
    return linalg.orth((plus if sign > 0 else minus).matrix)


def build_Lk(grid: PathGrid, k: int) -> PathOperator:
    """Signed sum of the 2^k dyadic shifts by 1/2^(k+1) + j/2^k; L_0 = id."""
    if k == 0:
        return PathOperator(matrix=np.eye(grid.dim), label="L0", domain=OperatorDomain.MINUS, grid=grid)
    if not grid.admits(k):
        raise GridError(f"L_{k} needs 2^{k + 1} to divide the grid size {grid.N}")

    N = grid.N
    S = np.zeros((N, N))
    for j in range(2 ** k):
        shift = N // 2 ** (k + 1) + j * N // 2 ** k
        sign = (-1.0) ** (j // 2 ** (k - 1))
        S += sign * twisted_shift(N, shift)
    return PathOperator(matrix=_on_samples(S, grid), label=f"L{k}", domain=OperatorDomain.MINUS, grid=grid)


def restrict(matrix: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return basis.T @ matrix @ basis


def distinct_eigenvalues(values: Iterable[float], rtol: float = Config.EIGEN_DEDUP_RTOL) -> List[float]:
    distinct: List[float] = []
    for value in sorted(values):
        if distinct and abs(value - distinct[-1]) <= rtol * max(1.0, abs(value)):
            continue
        distinct.append(float(value))
    return distinct


def Lk_squared_spectrum(grid: PathGrid, k: int) -> List[float]:
    """Distinct eigenvalues of L_k^2 on E_-1, ascending."""
    Q = eigenspace_basis(grid, -1)
    L = restrict(build_Lk(grid, k).matrix, Q)
    return distinct_eigenvalues(linalg.eigvalsh(L @ L))


def closed_form_spectrum(k: int) -> List[float]:
    """1 / sin^2(pi (2m + 1) / 2^(k+1)) for m < 2^(k-1), ascending."""
    values = [1.0 / math.sin(math.pi * (2 * m + 1) / 2 ** (k + 1)) ** 2 for m in range(2 ** (k - 1))]
    return sorted(values)


def build_I2_minus(grid: PathGrid) -> PathOperator:
    """xi(t) -> (-1)^floor(t + 1/2) i xi(t + 1/2 mod 1)."""
    if grid.N % 2:
        raise GridError("I2 needs an even grid")
    matrix = _on_samples(twisted_shift(grid.N, grid.N // 2), grid, complex_structure(grid.n))
    return PathOperator(matrix=matrix, label="I2-", domain=OperatorDomain.MINUS, grid=grid)


def build_Ik_minus(grid: PathGrid, k: int) -> PathOperator:
    """I_k on E_-1: I2 for k = 2, the spectral normalization of L_(k-2) for k >= 3.

    The matrix acts as zero on E_+1.
    """
    if k == 2:
        return build_I2_minus(grid)
    if k < 2:
        raise ValueError("I1 is not built through the E_-1 extension")

    Q = eigenspace_basis(grid, -1)
    L = restrict(build_Lk(grid, k - 2).matrix, Q)
    eigenvalues, V = linalg.eigh(0.5 * (L + L.T))
    squares = eigenvalues ** 2
    if np.any(squares <= Config.OP_TOL):
        raise NonPositiveSpectrumError(
            f"L_{k - 2}^2 has eigenvalue {squares.min():.3e} on E_-1 of {grid}")
    normalized = V @ np.diag(eigenvalues / np.sqrt(squares)) @ V.T
    return PathOperator(matrix=Q @ normalized @ Q.T, label=f"I{k}-", domain=OperatorDomain.MINUS, grid=grid)


def build_HD(grid: PathGrid) -> Tuple[PathOperator, PathOperator]:
    """H: sections on ``grid`` -> sections on the half grid, xi(t) -> xi(t/2);
    D: the other way, xi(2t) on the first half and conj(xi(2 - 2t)) on the second."""
    half = grid.half()
    M, N, block = half.N, grid.N, 2 * grid.n

    H = np.zeros((half.dim, grid.dim))
    H[:, :M * block] = np.eye(M * block)

    C = conjugation(grid.n)
    D = np.zeros((grid.dim, half.dim))
    for j in range(N):
        rows = slice(j * block, (j + 1) * block)
        if j < M:
            D[rows, j * block:(j + 1) * block] = np.eye(block)
        else:
            i = N - 1 - j
            D[rows, i * block:(i + 1) * block] = C
    return (PathOperator(matrix=H, label="H", domain=OperatorDomain.FULL, grid=grid),
            PathOperator(matrix=D, label="D", domain=OperatorDomain.FULL, grid=grid))


def build_Ik_full(grid: PathGrid, k: int) -> PathOperator:
    """I_k pi_- + I_k pi_+ on the whole section space; I1 itself for k = 1."""
    I1 = build_I1(grid)
    if k == 1:
        return I1
    plus, minus = eigenprojections(I1)
    matrix = build_Ik_minus(grid, k).matrix @ minus.matrix + build_Ik_plus(grid, k).matrix @ plus.matrix
    return PathOperator(matrix=matrix, label=f"I{k}", domain=OperatorDomain.FULL, grid=grid)


def build_Ik_plus(grid: PathGrid, k: int) -> PathOperator:
    """I_k on E_+1 through I_(k+1) = D o I_k o H, starting from I1."""
    if k == 1:
        return PathOperator(matrix=build_I1(grid).matrix, label="I1+", domain=OperatorDomain.PLUS, grid=grid)
    H, D = build_HD(grid)
    inner = build_Ik_full(grid.half(), k - 1)
    return PathOperator(matrix=D.matrix @ inner.matrix @ H.matrix, label=f"I{k}+",
                        domain=OperatorDomain.PLUS, grid=grid)


def sign_matrix(k: int, t: float) -> np.ndarray:
    """The 2^k x 2^k sign matrix A(t) relating L_k xi at t + i/2^k to xi, 0 <= t < 1/2^k."""
    size = 2 ** k
    A = np.empty((size, size))
    for i in range(size):
        for ell in range(size):
            d = ell - i
            exponent = d // 2 ** (k - 1) + d // size + math.floor(t + 1.0 / 2 ** (k + 1) + ell / size)
            A[i, ell] = (-1.0) ** exponent
    return A


def determinant_table(k_max: int, samples: int = 5) -> List[Dict]:
    rows = []
    for k in range(1, k_max + 1):
        width = 1.0 / 2 ** k
        for t in (np.arange(samples) + 0.5) / samples * width:
            observed = abs(float(np.linalg.det(sign_matrix(k, float(t)))))
            expected = 2.0 ** (2 ** k - 1)
            claimed = 2.0 ** (2 ** k)
            rows.append({
                "k": k,
                "t": round(float(t), 12),
                "observed": round(observed, 6),
                "expected": expected,
                "claimed": claimed,
                "matches_claim": abs(observed - claimed) <= 1e-9 * claimed,
                "passed": abs(observed - expected) <= 1e-9 * expected
            })
    return rows


def fixed_set_ladder(grid: PathGrid, max_level: Optional[int] = None) -> Dict:
    """Dimensions of F_2 = E_+1 and F_(k+1) = F_k cap Fix(I_k).

    The ladder runs until only constant real sections remain, which happens
    at k = log2(N) + 1.
    """
    top = int(math.log2(grid.N)) + 1
    max_level = top if max_level is None else min(max_level, top)

    basis = eigenspace_basis(grid, +1)
    dims = [{"level": 2, "dim": int(basis.shape[1])}]
    for k in range(2, max_level + 1):
        I_k = build_Ik_plus(grid, k).matrix
        kernel = linalg.null_space((I_k - np.eye(grid.dim)) @ basis, rcond=1e-10)
        basis = linalg.orth(basis @ kernel) if kernel.size else np.zeros((grid.dim, 0))
        dims.append({"level": k + 1, "dim": int(basis.shape[1])})

    samples = basis.reshape(grid.N, 2 * grid.n, -1) if basis.size else np.zeros((grid.N, 2 * grid.n, 0))
    spread = float(np.max(np.abs(samples - samples.mean(axis=0, keepdims=True)))) if basis.size else 0.0
    imaginary = float(np.max(np.abs(samples[:, grid.n:, :]))) if basis.size else 0.0
    free = (max_level == top and dims[-1]["dim"] == grid.n
            and spread < Config.OP_TOL and imaginary < Config.OP_TOL)
    return {
        "dims": dims,
        "final_dim": dims[-1]["dim"],
        "expected_final_dim": grid.n,
        "constant_residual": spread + imaginary,
        "acts_freely": free
    }


def _norm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix))


def verify_lemma(grid: PathGrid, k_max: int) -> Dict:
    """Residuals of every identity satisfied by L_1 .. L_kmax on E_-1."""
    if not grid.admits(k_max):
        raise GridError(f"grid size {grid.N} does not admit k_max={k_max} (needs 2^{k_max + 1} | N)")

    I1 = build_I1(grid)
    plus, minus = eigenprojections(I1)
    I2 = build_I2_minus(grid).matrix
    Q = eigenspace_basis(grid, -1)
    L = {k: build_Lk(grid, k).matrix for k in range(k_max + 1)}
    residuals: Dict[str, float] = {}

    for k in range(1, k_max + 1):
        residuals[f"well_defined[{k}]"] = _norm(I1.matrix @ L[k] @ minus.matrix + L[k] @ minus.matrix)
        residuals[f"preserves_minus[{k}]"] = _norm(plus.matrix @ L[k] @ minus.matrix)
        residuals[f"commutes_I2[{k}]"] = _norm((L[k] @ I2 - I2 @ L[k]) @ minus.matrix)
        restricted = restrict(L[k], Q)
        residuals[f"self_adjoint[{k}]"] = _norm(restricted - restricted.T)
        for ell in range(k + 1, k_max + 1):
            residuals[f"commutes[{k},{ell}]"] = _norm(L[k] @ L[ell] - L[ell] @ L[k])

    for k in range(0, k_max):
        lower = sum(L[i] for i in range(k)) if k else np.zeros_like(L[0])
        residuals[f"square_recursion[{k}]"] = _norm(
            L[k + 1] @ L[k + 1] - 2.0 * (L[k] @ L[k] + L[k] @ lower))

    singular_values = {
        k: float(linalg.svdvals(restrict(L[k], Q)).min()) for k in range(1, k_max + 1)
    }
    spectra = {}
    for k in range(1, k_max + 1):
        observed = Lk_squared_spectrum(grid, k)
        expected = closed_form_spectrum(k)
        matches = len(observed) == len(expected) and \
            all(abs(a - b) <= Config.SPECTRUM_TOL for a, b in zip(observed, expected))
        spectra[k] = {
            "observed": [round(v, 10) for v in observed],
            "expected": [round(v, 10) for v in expected],
            "positive": all(v > Config.OP_TOL for v in observed),
            "matches": matches
        }
        if not spectra[k]["positive"]:
            logger.error(f"L_{k}^2 has a nonpositive eigenvalue on {grid}")

    determinants = determinant_table(k_max)
    passed = (all(r < Config.OP_TOL for r in residuals.values())
              and all(s > Config.OP_TOL for s in singular_values.values())
              and all(s["matches"] and s["positive"] for s in spectra.values())
              and all(row["passed"] for row in determinants))
    return {
        "grid": {"N": grid.N, "n": grid.n},
        "k_max": k_max,
        "residuals": {name: float(value) for name, value in residuals.items()},
        "min_singular_values": singular_values,
        "spectra": spectra,
        "determinants": determinants,
        "passed": passed
    }


def involution_residuals(grid: PathGrid, k_max: int) -> Dict[str, float]:
    """Involutivity and commutation residuals of I_1 .. I_kmax and of H o D."""
    eye = np.eye(grid.dim)
    I1 = build_I1(grid)
    plus, minus = eigenprojections(I1)
    residuals = {
        "I1^2": _norm(I1.matrix @ I1.matrix - eye),
        "pi+pi-": _norm(plus.matrix @ minus.matrix),
        "pi+ + pi-": _norm(plus.matrix + minus.matrix - eye),
    }

    H, D = build_HD(grid)
    residuals["H o D"] = _norm(H.matrix @ D.matrix - np.eye(grid.half().dim))

    minus_ops = {}
    for k in range(2, max(k_max, 3) + 1):
        minus_ops[k] = build_Ik_minus(grid, k).matrix
        residuals[f"I{k}-^2"] = _norm(minus_ops[k] @ minus_ops[k] @ minus.matrix - minus.matrix)
        plus_op = build_Ik_plus(grid, k).matrix
        residuals[f"I{k}+^2"] = _norm(plus_op @ plus_op @ plus.matrix - plus.matrix)
        residuals[f"I{k}+ range"] = _norm(minus.matrix @ plus_op @ plus.matrix)
    for k in range(3, max(k_max, 3) + 1):
        residuals[f"[I{k}-, I2-]"] = _norm(minus_ops[k] @ minus_ops[2] - minus_ops[2] @ minus_ops[k])
    return residuals


def spectrum_independence(k_max: int, cases: Sequence[Tuple[int, int]] = SPECTRUM_CASES) -> Dict:
    """Largest spread of the L_k^2 spectra over complex dimensions and grid sizes."""
    spread = {}
    for k in range(1, k_max + 1):
        spectra = [Lk_squared_spectrum(PathGrid(N, n), k) for n, N in cases if PathGrid(N, n).admits(k)]
        if len(spectra) < 2 or any(len(s) != len(spectra[0]) for s in spectra):
            spread[k] = 0.0 if len(spectra) < 2 else float('inf')
            continue
        stacked = np.array(spectra)
        spread[k] = float(np.max(stacked.max(axis=0) - stacked.min(axis=0)))
    return {"cases": [list(c) for c in cases], "spread": spread,
            "passed": all(v <= Config.OP_TOL for v in spread.values())}


@log_performance
def verify_involutions(grid: PathGrid, k_max: int) -> Dict:
    """The complete involution report for one grid."""
    lemma = verify_lemma(grid, k_max)
    residuals = involution_residuals(grid, k_max)
    ladder = fixed_set_ladder(grid)
    independence = spectrum_independence(k_max)

    passed = (lemma["passed"] and all(r < Config.OP_TOL for r in residuals.values())
              and ladder["acts_freely"] and independence["passed"])
    if not passed:
        failing = [name for name, value in residuals.items() if value >= Config.OP_TOL]
        logger.warning(f"Involution checks on {grid} failed: {failing or 'lemma/ladder/spectra'}")
    else:
        logger.info(f"Involution checks on {grid} passed for k <= {k_max}")

    return {
        "lemma": lemma,
        "involutions": residuals,
        "ladder": ladder,
        "spectrum_independence": independence,
        "passed": passed
    }
