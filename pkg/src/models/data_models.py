"""
Data models for the Morse-Bott verification engine.
Defines the core entities: manifolds, fields, critical data, trajectories,
cascade flow lines, chain complexes, Novikov elements, path operators,
group actions and run configurations.
"""

from __future__ import annotations
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple
from dataclasses import dataclass, field
from enum import Enum
import math

import networkx as nx
import numpy as np

from models.exceptions import (
    DegenerateConstraintError, GridError, OffManifoldError, ProjectionError,
    SingularActionError
)


Vector = np.ndarray


class PairClass(Enum):
    EMPTY = "empty"
    ZERO_CASCADES_ONLY = "zero_cascades_only"
    POSITIVE_CASCADES_ONLY = "positive_cascades_only"


class OperatorDomain(Enum):
    FULL = "full"
    MINUS = "E-1"
    PLUS = "E+1"


class ActionKind(Enum):
    TORIC = "toric"
    GRASSMANN = "grassmann"
    GENERAL = "general-unitary"


class OutputFormat(Enum):
    JSON = "json"
    CSV = "csv"


def _central_jacobian(func: Callable[[Vector], Vector], x: Vector, step: float) -> np.ndarray:
    """Central-difference Jacobian of a vector valued map, shape (out, in)."""
    x = np.asarray(x, dtype=float)
    columns = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        columns.append((np.atleast_1d(func(x + e)) - np.atleast_1d(func(x - e))) / (2.0 * step))
    if not columns:
        return np.zeros((np.atleast_1d(func(x)).size, 0))
    return np.column_stack(columns)


@dataclass
class ScalarField:
    """A smooth function on the ambient space, optionally with its gradient."""
    name: str
    func: Callable[[Vector], float]
    ambient_gradient: Optional[Callable[[Vector], Vector]] = None

    def __call__(self, x: Vector) -> float:
        return float(self.func(np.asarray(x, dtype=float)))

    def __str__(self):
        return f"Field {self.name}"


@dataclass
class ChartSampler:
    """A named parameterization of (part of) a manifold used to seed searches."""
    name: str
    dim: int
    func: Callable[[Vector], Vector]
    low: Vector
    high: Vector

    def sample(self, rng: np.random.Generator) -> Vector:
        u = rng.uniform(self.low, self.high)
        return np.asarray(self.func(u), dtype=float)


@dataclass
class ManifoldModel:
    """A manifold embedded in R^D as the zero set of a constraint map."""
    name: str
    ambient_dim: int
    dim: int
    constraint: Optional[Callable[[Vector], Vector]] = None
    constraint_jacobian: Optional[Callable[[Vector], np.ndarray]] = None
    chart_samplers: Dict[str, ChartSampler] = field(default_factory=dict)
    fd_step: float = 1e-6

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    def constraint_value(self, x: Vector) -> Vector:
        if self.constraint is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.constraint(np.asarray(x, dtype=float)), dtype=float))

    def jacobian(self, x: Vector) -> np.ndarray:
        """Constraint Jacobian, shape (codim, ambient_dim)."""
        if self.constraint is None:
            return np.zeros((0, self.ambient_dim))
        if self.constraint_jacobian is not None:
            return np.atleast_2d(np.asarray(self.constraint_jacobian(np.asarray(x, dtype=float)), dtype=float))
        return _central_jacobian(self.constraint_value, x, self.fd_step)

    def _checked_jacobian(self, x: Vector) -> np.ndarray:
        J = self.jacobian(x)
        if J.shape[0] == 0:
            return J
        singular_values = np.linalg.svd(J, compute_uv=False)
        if singular_values[-1] <= 1e-12 * max(1.0, singular_values[0]):
            raise DegenerateConstraintError(
                f"constraint Jacobian of {self.name} is rank deficient at {np.round(x, 6)}")
        return J

    def distance(self, x: Vector) -> float:
        """First-order distance of x to the constraint set."""
        c = self.constraint_value(x)
        if c.size == 0:
            return 0.0
        J = self._checked_jacobian(x)
        return float(np.linalg.norm(J.T @ np.linalg.solve(J @ J.T, c)))

    def check_point(self, x: Vector, tol: float) -> None:
        distance = self.distance(x)
        if distance > tol:
            raise OffManifoldError(distance, tol)

    def tangent_projector(self, x: Vector) -> np.ndarray:
        """Orthogonal projector onto ker(d constraint) at x."""
        eye = np.eye(self.ambient_dim)
        if self.constraint is None:
            return eye
        J = self._checked_jacobian(x)
        return eye - J.T @ np.linalg.solve(J @ J.T, J)

    def project_vector(self, y: Vector, v: Vector) -> Vector:
        """Tangential part of v at y without forming the projector."""
        if self.constraint is None:
            return v
        J = self.jacobian(y)
        return v - J.T @ np.linalg.solve(J @ J.T, J @ v)

    def tangent_basis(self, x: Vector) -> np.ndarray:
        """Orthonormal basis of the tangent space as columns, shape (D, dim)."""
        if self.constraint is None:
            return np.eye(self.ambient_dim)
        eigenvalues, eigenvectors = np.linalg.eigh(self.tangent_projector(x))
        return eigenvectors[:, eigenvalues > 0.5]

    def project(self, x: Vector, tol: float = 1e-10, max_iter: int = 5) -> Vector:
        """Newton projection of a nearby ambient point onto the manifold."""
        y = np.asarray(x, dtype=float).copy()
        if self.constraint is None:
            return y
        for _ in range(max_iter):
            c = self.constraint_value(y)
            if np.linalg.norm(c) < tol:
                return y
            J = self._checked_jacobian(y)
            y = y - J.T @ np.linalg.solve(J @ J.T, c)
        if np.linalg.norm(self.constraint_value(y)) < tol:
            return y
        raise ProjectionError(f"projection onto {self.name} did not converge from {np.round(x, 6)}")

    def __str__(self):
        return f"{self.name} (dim {self.dim} in R^{self.ambient_dim})"


@dataclass
class CritHPoint:
    """A critical point of h on a critical submanifold, in chart parameters."""
    label: str
    params: Vector
    ind_h: int


@dataclass
class CriticalSubmanifold:
    """A connected component of crit(f) with its Morse function h and metric g0."""
    name: str
    dim: int
    ind_f: int
    parameterization: Callable[[Vector], Vector]
    locate: Callable[[Vector], Vector]
    morse_function_h: Callable[[Vector], float]
    crit_h: List[CritHPoint] = field(default_factory=list)
    h_gradient: Optional[Callable[[Vector], Vector]] = None
    metric_g0: Optional[Callable[[Vector], np.ndarray]] = None
    period: Optional[Vector] = None
    bounds: Optional[Tuple[Vector, Vector]] = None
    fd_step: float = 1e-6

    def sample_params(self, count: int) -> List[Vector]:
        """Deterministic grid of chart parameters covering the parameter box."""
        if self.dim == 0:
            return [np.zeros(0)]
        if self.bounds is not None:
            low, high = (np.asarray(b, dtype=float) for b in self.bounds)
            endpoint = True
        elif self.period is not None:
            low, high = np.zeros(self.dim), np.asarray(self.period, dtype=float)
            endpoint = False
        else:
            low, high = -np.ones(self.dim), np.ones(self.dim)
            endpoint = True
        per_axis = max(2, int(math.ceil(count ** (1.0 / self.dim))))
        axes = [np.linspace(lo, hi, per_axis, endpoint=endpoint) for lo, hi in zip(low, high)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [np.array(u) for u in np.stack([m.ravel() for m in mesh], axis=1)]

    def wrap(self, u: Vector) -> Vector:
        u = np.asarray(u, dtype=float).reshape(self.dim)
        if self.period is None:
            return u
        return np.mod(u, self.period)

    def point(self, u: Vector) -> Vector:
        return np.asarray(self.parameterization(self.wrap(u)), dtype=float)

    def nearest_params(self, x: Vector) -> Vector:
        if self.dim == 0:
            return np.zeros(0)
        return self.wrap(self.locate(np.asarray(x, dtype=float)))

    def nearest_point(self, x: Vector) -> Vector:
        return self.point(self.nearest_params(x))

    def distance(self, x: Vector) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.nearest_point(x)))

    def tangent_basis(self, u: Vector) -> np.ndarray:
        """Chart derivative d(phi)(u), shape (D, dim)."""
        u = np.asarray(u, dtype=float).reshape(self.dim)
        return _central_jacobian(self.point, u, self.fd_step)

    def metric(self, u: Vector) -> np.ndarray:
        if self.metric_g0 is not None:
            return np.atleast_2d(self.metric_g0(self.wrap(u)))
        basis = self.tangent_basis(u)
        return basis.T @ basis

    def dh(self, u: Vector) -> Vector:
        u = self.wrap(u)
        if self.h_gradient is not None:
            return np.atleast_1d(np.asarray(self.h_gradient(u), dtype=float))
        return _central_jacobian(lambda v: np.atleast_1d(self.morse_function_h(self.wrap(v))),
                                 u, self.fd_step)[0]

    def h_flow_field(self, u: Vector) -> Vector:
        """Negative gradient of h with respect to g0, in chart coordinates."""
        if self.dim == 0:
            return np.zeros(0)
        return -np.linalg.solve(self.metric(u), self.dh(u))

    def h_hessian(self, u: Vector, step: float = 1e-5) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(self.dim)
        H = _central_jacobian(self.dh, u, step)
        return 0.5 * (H + H.T)

    def crit_point(self, label: str) -> CritHPoint:
        for chp in self.crit_h:
            if chp.label == label:
                return chp
        raise KeyError(f"{self.name} has no critical point {label}")

    def __str__(self):
        return f"{self.name} (dim {self.dim}, ind_f {self.ind_f}, {len(self.crit_h)} crit(h))"


@dataclass(eq=False)
class CritPoint:
    """A generator of the Morse-Bott complex: a critical point of h on crit(f)."""
    submanifold: str
    label: str
    point: Vector
    params: Vector
    ind_f: int
    ind_h: int
    f_value: float

    @property
    def total_index(self) -> int:
        return self.ind_f + self.ind_h

    def __str__(self):
        return f"{self.label} (Ind {self.total_index})"


@dataclass
class MorseBottProblem:
    """The quadruple (f, h, g, g0) over an embedded manifold."""
    name: str
    manifold: ManifoldModel
    f: ScalarField
    critical_submanifolds: List[CriticalSubmanifold]
    euler_characteristic: Optional[int] = None
    description: str = ""
    # chart the flow check samples starting points from (first chart when unset)
    flow_chart: Optional[str] = None

    def submanifold(self, name: str) -> CriticalSubmanifold:
        for sub in self.critical_submanifolds:
            if sub.name == name:
                return sub
        raise KeyError(f"{self.name} has no critical submanifold {name}")

    def crit_points(self) -> List[CritPoint]:
        points = []
        for sub in self.critical_submanifolds:
            for chp in sub.crit_h:
                x = sub.point(chp.params)
                points.append(CritPoint(
                    submanifold=sub.name,
                    label=f"{sub.name}:{chp.label}" if sub.dim > 0 else sub.name,
                    point=x,
                    params=np.asarray(chp.params, dtype=float).reshape(sub.dim),
                    ind_f=sub.ind_f,
                    ind_h=chp.ind_h,
                    f_value=self.f(x)
                ))
        return points

    def crit_point(self, label: str) -> CritPoint:
        for c in self.crit_points():
            if c.label == label:
                return c
        raise KeyError(f"{self.name} has no generator {label}")

    def nearest_submanifold(self, x: Vector) -> Tuple[CriticalSubmanifold, float]:
        distances = [(sub.distance(x), i) for i, sub in enumerate(self.critical_submanifolds)]
        distance, index = min(distances)
        return self.critical_submanifolds[index], distance

    def __str__(self):
        return f"{self.name}: {self.f.name} on {self.manifold.name}"


@dataclass
class HessianSpectrum:
    """Eigenvalues of the tangential Hessian at a point."""
    eigenvalues: Vector
    symmetry_residual: float
    gradient_norm: float
    trusted: bool
    zero_tol: float

    @property
    def negative(self) -> int:
        return int(np.sum(self.eigenvalues < -self.zero_tol))

    @property
    def zero(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) <= self.zero_tol))

    @property
    def positive(self) -> int:
        return int(np.sum(self.eigenvalues > self.zero_tol))

    def min_nonzero_magnitude(self) -> Optional[float]:
        magnitudes = np.abs(self.eigenvalues)
        magnitudes = magnitudes[magnitudes > self.zero_tol]
        return float(magnitudes.min()) if magnitudes.size else None


@dataclass
class SubmanifoldReport:
    """Morse-Bott check outcome for one critical submanifold."""
    name: str
    expected_dim: int
    expected_ind_f: int
    kernel_dims: List[int]
    observed_ind_f: List[int]
    max_gradient_norm: float
    worst_mismatch: int
    passed: bool
    diagnostic: str = ""

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "expected_dim": self.expected_dim,
            "expected_ind_f": self.expected_ind_f,
            "kernel_dims": self.kernel_dims,
            "observed_ind_f": self.observed_ind_f,
            "max_gradient_norm": self.max_gradient_norm,
            "worst_mismatch": self.worst_mismatch,
            "passed": self.passed,
            "diagnostic": self.diagnostic
        }


@dataclass
class TrajectoryLimit:
    submanifold: str
    point: Vector
    distance: float


@dataclass
class DecayFit:
    """Log-linear fit speed(s) ~ c * exp(-rate * s) over the asymptotic window."""
    rate: float
    constant: float
    r_squared: float
    samples: int
    window: Tuple[float, float]
    passed: bool
    reason: str = ""

    def to_dict(self) -> Dict:
        return {
            "rate": self.rate,
            "constant": self.constant,
            "r_squared": self.r_squared,
            "samples": self.samples,
            "window": list(self.window),
            "passed": self.passed,
            "reason": self.reason
        }


@dataclass
class Trajectory:
    """Samples of a negative gradient flow line."""
    times: Vector
    points: np.ndarray
    speeds: Vector
    f_values: Vector
    termination: str = "speed"
    limit: Optional[TrajectoryLimit] = None
    origin: Optional[TrajectoryLimit] = None
    decay: Optional[DecayFit] = None

    @property
    def start(self) -> Vector:
        return self.points[0]

    @property
    def end(self) -> Vector:
        return self.points[-1]

    def __len__(self):
        return len(self.times)

    def reversed_in_time(self, negate_f: bool = True) -> 'Trajectory':
        """The same curve traversed backwards, as a flow line of -f."""
        return Trajectory(
            times=self.times[-1] - self.times[::-1],
            points=self.points[::-1].copy(),
            speeds=self.speeds[::-1].copy(),
            f_values=-self.f_values[::-1] if negate_f else self.f_values[::-1].copy(),
            termination=self.termination,
            limit=self.origin,
            origin=self.limit
        )

    def to_csv_rows(self) -> List[List[float]]:
        return [[float(s), *map(float, x), float(v)]
                for s, x, v in zip(self.times, self.points, self.speeds)]


@dataclass
class SearchParams:
    """Budgets and tolerances of the cascade shooting search."""
    seed: int = 7
    scan_points: int = 48
    launch_eps: float = 1e-4
    match_tol: float = 1e-6
    approach_tol: float = 0.5
    dedup_radius: float = 1e-3
    refine_tol: float = 1e-10
    max_shots: int = 100000
    metric_retries: int = 3
    conformal_amplitude: float = 0.05
    dwell_radius: float = 1e-3
    dwell_threshold: float = 5.0
    time_grid_max: float = 20.0
    time_grid_points: int = 24
    stop_speed: float = 1e-9
    horizon: float = 1e3
    max_step: float = 0.1
    h_flow_horizon: float = 200.0

    @classmethod
    def from_config(cls, cfg, **overrides) -> 'SearchParams':
        params = cls(
            seed=cfg.DEFAULT_SEED,
            scan_points=cfg.SCAN_POINTS,
            launch_eps=cfg.LAUNCH_EPS,
            match_tol=cfg.MATCH_TOL,
            approach_tol=cfg.APPROACH_TOL,
            dedup_radius=cfg.DEDUP_RADIUS,
            refine_tol=cfg.REFINE_TOL,
            max_shots=cfg.MAX_SHOTS,
            metric_retries=cfg.METRIC_RETRIES,
            conformal_amplitude=cfg.CONFORMAL_AMPLITUDE,
            dwell_radius=cfg.DWELL_RADIUS,
            dwell_threshold=cfg.DWELL_THRESHOLD,
            time_grid_max=cfg.TIME_GRID_MAX,
            time_grid_points=cfg.TIME_GRID_POINTS,
            stop_speed=cfg.STOP_SPEED,
            horizon=cfg.HORIZON,
            max_step=cfg.MAX_STEP,
            h_flow_horizon=cfg.H_FLOW_HORIZON
        )
        for key, value in overrides.items():
            if value is None:
                continue
            if not hasattr(params, key):
                raise KeyError(f"unknown search parameter {key}")
            setattr(params, key, type(getattr(params, key))(value))
        return params


@dataclass
class CascadeFlowLine:
    """A flow line with m cascades between two generators."""
    source: str
    target: str
    m: int
    cascades: List[Trajectory]
    times: List[float]
    source_witness: Vector
    target_witness: Vector
    morse_segments: List[Trajectory]
    shooting_parameter: float
    branch: Tuple[int, ...]
    miss: float
    chaining_residual: float = 0.0
    dwell_time: float = 0.0
    broken: bool = False

    def fingerprint(self) -> Vector:
        """Endpoints plus the point at the middle f-level, for deduplication."""
        if not self.cascades:
            segment = self.morse_segments[0]
            middle = segment.points[len(segment) // 2]
            return np.concatenate([segment.start, middle, segment.end])
        first, last = self.cascades[0], self.cascades[-1]
        f_mid = 0.5 * (first.f_values[0] + last.f_values[-1])
        stacked_f = np.concatenate([c.f_values for c in self.cascades])
        stacked_x = np.concatenate([c.points for c in self.cascades])
        middle = stacked_x[int(np.argmin(np.abs(stacked_f - f_mid)))]
        return np.concatenate([first.start, middle, last.end])

    def to_csv_rows(self) -> List[List[float]]:
        rows = []
        for k, cascade in enumerate(self.cascades):
            rows.extend([[k, *row] for row in cascade.to_csv_rows()])
        return rows

    def __str__(self):
        state = "broken" if self.broken else "unbroken"
        return f"{self.source} -> {self.target}, m={self.m}, parameter {self.shooting_parameter:.6f} ({state})"


@dataclass
class ChainComplexGF2:
    """Graded mod-2 chain complex generated by the critical points of h."""
    generators: List[CritPoint]
    boundary: Dict[int, np.ndarray]
    graph: nx.DiGraph = field(default_factory=nx.DiGraph)
    top_degree: int = 0

    def generators_in(self, degree: int) -> List[CritPoint]:
        return [c for c in self.generators if c.total_index == degree]

    def degrees(self) -> List[int]:
        return list(range(self.top_degree + 1))

    def boundary_matrix(self, degree: int) -> np.ndarray:
        """Matrix of the boundary from degree to degree-1 (rows: degree-1)."""
        if degree in self.boundary:
            return self.boundary[degree]
        return np.zeros((len(self.generators_in(degree - 1)), len(self.generators_in(degree))),
                        dtype=np.uint8)


@dataclass(frozen=True)
class GammaGroup:
    """Z^d with a degree homomorphism and an energy homomorphism."""
    degree_hom: Tuple[int, ...]
    energy_hom: Tuple[float, ...]

    def __post_init__(self):
        if len(self.degree_hom) != len(self.energy_hom):
            raise ValueError("degree and energy vectors must have the same length")

    @property
    def rank(self) -> int:
        return len(self.degree_hom)

    def degree(self, gamma: Tuple[int, ...]) -> int:
        return int(sum(d * g for d, g in zip(self.degree_hom, gamma)))

    def energy(self, gamma: Tuple[int, ...]) -> float:
        return float(math.fsum(e * g for e, g in zip(self.energy_hom, gamma)))

    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.rank


@dataclass(frozen=True)
class NovikovElement:
    """A truncated formal GF(2) sum of group elements.

    Terms with energy below ``cutoff`` are unknown; ``cutoff = -inf`` marks
    an exact element.
    """
    group: GammaGroup
    terms: FrozenSet[Tuple[int, ...]]
    cutoff: float = -math.inf

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def truncated(self) -> bool:
        return self.cutoff > -math.inf

    def energies(self) -> Dict[Tuple[int, ...], float]:
        return {gamma: self.group.energy(gamma) for gamma in self.terms}

    def leading_energy(self) -> float:
        """Upper bound for the energy of every term, known or truncated."""
        if self.is_zero:
            return self.cutoff
        return max(self.group.energy(gamma) for gamma in self.terms)

    def degrees(self) -> List[int]:
        return sorted({self.group.degree(gamma) for gamma in self.terms})

    def to_json(self) -> Dict:
        return {
            "terms": [[list(gamma), 1] for gamma in sorted(self.terms)],
            "cutoff": None if self.cutoff == -math.inf else self.cutoff
        }

    def __str__(self):
        if self.is_zero:
            return "0"
        return " + ".join("g^" + str(gamma) for gamma in sorted(self.terms))


@dataclass
class PathGrid:
    """Midpoint grid t_j = (j + 1/2)/N for sections with values in C^n."""
    N: int
    n: int = 1

    def __post_init__(self):
        if self.N < 1 or self.N & (self.N - 1):
            raise GridError(f"grid size {self.N} is not a power of two")
        if self.n < 1:
            raise GridError("complex dimension must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.n * self.N

    @property
    def sample_points(self) -> Vector:
        return (np.arange(self.N) + 0.5) / self.N

    def admits(self, k: int) -> bool:
        return self.N % (2 ** (k + 1)) == 0

    def half(self) -> 'PathGrid':
        if self.N % 2:
            raise GridError(f"grid size {self.N} cannot be halved")
        return PathGrid(self.N // 2, self.n)

    def inner(self, xi: Vector, eta: Vector) -> float:
        """Discrete L2 inner product (1/N) sum xi(t_j) . eta(t_j)."""
        return float(np.dot(xi, eta)) / self.N

    def __str__(self):
        return f"PathGrid(N={self.N}, n={self.n})"


@dataclass
class PathOperator:
    """A dense real matrix acting on discretized sections."""
    matrix: np.ndarray
    label: str
    domain: OperatorDomain
    grid: PathGrid

    def __matmul__(self, other):
        if isinstance(other, PathOperator):
            return self.matrix @ other.matrix
        return self.matrix @ other

    def __str__(self):
        return f"{self.label} on {self.domain.value} of {self.grid}"


@dataclass
class LinearGroupAction:
    """A linear unitary action of a compact group on C^n (or on C^{n x k} frames)."""
    name: str
    kind: ActionKind
    n: int
    tau: Vector
    A: Optional[np.ndarray] = None
    k: int = 0
    generators: Optional[List[np.ndarray]] = None
    normalization: str = "euclidean"

    def __post_init__(self):
        self.tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if self.kind is ActionKind.TORIC:
            self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
            self.k = self.A.shape[0]
            if self.A.shape[1] != self.n or np.linalg.matrix_rank(self.A) < self.k:
                raise SingularActionError(f"toric weight matrix of {self.name} must be k x n of rank k")
            if self.normalization not in ("euclidean", "rho"):
                raise SingularActionError(f"unknown normalization {self.normalization}")
        elif self.kind is ActionKind.GENERAL:
            self.generators = [np.asarray(g, dtype=complex) for g in self.generators or []]
            for g in self.generators:
                if g.shape != (self.n, self.n) or np.max(np.abs(g + g.conj().T)) > 1e-12:
                    raise SingularActionError(f"generator of {self.name} is not skew-Hermitian")
        elif self.kind is ActionKind.GRASSMANN:
            if not 0 < self.k <= self.n:
                raise SingularActionError("frame dimension must satisfy 0 < k <= n")

    @property
    def group_dim(self) -> int:
        if self.kind is ActionKind.TORIC:
            return self.k
        if self.kind is ActionKind.GRASSMANN:
            return self.k * self.k
        return len(self.generators)

    @property
    def complex_dim(self) -> int:
        if self.kind is ActionKind.GRASSMANN:
            return self.n * self.k
        return self.n

    @property
    def manifold_dim(self) -> int:
        return 2 * self.complex_dim

    def __str__(self):
        return f"{self.name} ({self.kind.value}, dim G = {self.group_dim})"


@dataclass
class RunConfig:
    """One CLI invocation; identical configs produce identical reports."""
    command: str
    target: Optional[str] = None
    seed: int = 7
    overrides: Dict[str, float] = field(default_factory=dict)
    output: Optional[str] = None
    output_format: OutputFormat = OutputFormat.JSON

    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "target": self.target,
            "seed": self.seed,
            "overrides": dict(sorted(self.overrides.items())),
            "format": self.output_format.value
        }
