"""
Flow lines with cascades between critical points of h.

The search is a shooting method. A line leaves the source through the
unstable sphere of f (or of h when there are no cascades), chains cascades
through finite h-flow segments on intermediate critical submanifolds, and
must land in the stable set of the target. At most one shooting coordinate
is continuous; codimension-one landing conditions are solved by scanning
that coordinate and refining sign changes by bisection.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from config import Config
from models.data_models import (
    CascadeFlowLine, CritHPoint, CritPoint, CriticalSubmanifold, MorseBottProblem,
    PairClass, ScalarField, SearchParams, Trajectory, TrajectoryLimit
)
from models.exceptions import (
    BudgetExhaustedError, NonTransversalError, UnsupportedSearchError, UntrustedCountError
)
from algorithms.flow import (
    flow_on_critical_manifold, flow_parameters, integrate_flow, sample_critical_flow
)
from algorithms.geometry import hessian_eigenbasis
from utils.logging import performance_monitor

logger = logging.getLogger(__name__)

LEVEL_TOL = 1e-9
CORNER_TOL = 1e-8


def index(c: CritPoint) -> int:
    return c.ind_f + c.ind_h


def expected_moduli_dim(c1: CritPoint, c2: CritPoint) -> int:
    return index(c1) - index(c2) - 1


def classify_pair(c1: CritPoint, c2: CritPoint, tol: float = LEVEL_TOL) -> PairClass:
    """Which cascade counts can connect c1 to c2, decided by the f-values alone."""
    if c1.f_value < c2.f_value - tol:
        return PairClass.EMPTY
    if abs(c1.f_value - c2.f_value) <= tol:
        return PairClass.ZERO_CASCADES_ONLY
    return PairClass.POSITIVE_CASCADES_ONLY


def contradicts_class(pair_class: PairClass, m: int) -> bool:
    """Whether a line with m cascades is ruled out by the class of its pair."""
    return (pair_class is PairClass.EMPTY or
            (pair_class is PairClass.ZERO_CASCADES_ONLY and m > 0) or
            (pair_class is PairClass.POSITIVE_CASCADES_ONLY and m == 0))


def submanifold_level(problem: MorseBottProblem, sub: CriticalSubmanifold) -> float:
    return problem.f(sub.point(sub.sample_params(1)[0]))


def critical_levels(problem: MorseBottProblem) -> List[float]:
    levels: List[float] = []
    for value in sorted((submanifold_level(problem, s) for s in problem.critical_submanifolds), reverse=True):
        if not levels or levels[-1] - value > LEVEL_TOL:
            levels.append(value)
    return levels


def max_cascades(problem: MorseBottProblem, c1: CritPoint, c2: CritPoint) -> int:
    """Upper bound on m: each cascade strictly lowers the critical level."""
    levels = [v for v in critical_levels(problem)
              if c2.f_value - LEVEL_TOL <= v <= c1.f_value + LEVEL_TOL]
    return max(0, len(levels) - 1)


def _negated(func):
    return lambda *args: -func(*args)


def _negated_vector(func):
    return lambda *args: -np.asarray(func(*args), dtype=float)


def reversed_problem(problem: MorseBottProblem) -> MorseBottProblem:
    """The quadruple (-f, -h, g, g0): flow lines of it are flow lines of the original run backwards."""
    f = problem.f
    neg_f = ScalarField(
        name=f"-({f.name})",
        func=_negated(f.func),
        ambient_gradient=None if f.ambient_gradient is None else _negated_vector(f.ambient_gradient)
    )
    subs = []
    for sub in problem.critical_submanifolds:
        subs.append(replace(
            sub,
            ind_f=problem.manifold.dim - sub.dim - sub.ind_f,
            morse_function_h=_negated(sub.morse_function_h),
            h_gradient=None if sub.h_gradient is None else _negated_vector(sub.h_gradient),
            crit_h=[CritHPoint(c.label, c.params, sub.dim - c.ind_h) for c in sub.crit_h]
        ))
    return MorseBottProblem(
        name=f"{problem.name} (reversed)",
        manifold=problem.manifold,
        f=neg_f,
        critical_submanifolds=subs,
        euler_characteristic=problem.euler_characteristic,
        description=problem.description
    )


def reverse_line(line: CascadeFlowLine) -> CascadeFlowLine:
    return CascadeFlowLine(
        source=line.target,
        target=line.source,
        m=line.m,
        cascades=[c.reversed_in_time() for c in reversed(line.cascades)],
        times=list(reversed(line.times)),
        source_witness=line.target_witness,
        target_witness=line.source_witness,
        morse_segments=[s.reversed_in_time() for s in reversed(line.morse_segments)],
        shooting_parameter=line.shooting_parameter,
        branch=line.branch,
        miss=line.miss,
        chaining_residual=line.chaining_residual,
        dwell_time=line.dwell_time,
        broken=line.broken
    )


def conformal_factor(rng: np.random.Generator, ambient_dim: int,
                     amplitude: float) -> Callable[[np.ndarray], float]:
    """Random smooth positive factor for a conformal change of the ambient metric."""
    w = rng.normal(size=ambient_dim)
    b = float(rng.uniform(0.0, 2.0 * math.pi))
    return lambda y: 1.0 + amplitude * math.sin(float(w @ y) + b)


def detect_broken(problem: MorseBottProblem, line: CascadeFlowLine,
                  search: SearchParams) -> Tuple[bool, float]:
    """Longest interior dwell near a critical submanifold, and whether it marks a broken line."""
    worst = 0.0
    subs = problem.critical_submanifolds
    for trajectory in line.cascades:
        distances = np.array([[sub.distance(x) for sub in subs] for x in trajectory.points])
        near = distances < search.dwell_radius
        source = int(np.argmin(distances[0]))
        target = int(np.argmin(distances[-1]))
        away_source = np.nonzero(~near[:, source])[0]
        away_target = np.nonzero(~near[:, target])[0]
        if away_source.size == 0 or away_target.size == 0:
            continue
        lo, hi = int(away_source[0]), int(away_target[-1])
        if hi <= lo:
            continue
        dt = np.diff(trajectory.times[lo:hi + 1])
        for j in range(len(subs)):
            inside = near[lo:hi, j] & near[lo + 1:hi + 1, j]
            worst = max(worst, float(np.sum(dt[inside])))
    return worst > search.dwell_threshold, worst


def _orient(v: np.ndarray, ref: Optional[np.ndarray]) -> np.ndarray:
    if ref is not None and abs(float(v @ ref)) > 1e-12:
        return v if v @ ref > 0 else -v
    k = int(np.argmax(np.abs(v)))
    return v if v[k] > 0 else -v


def _periodic_distance(a: float, b: float, period: Optional[float]) -> float:
    d = abs(a - b)
    if period is None:
        return d
    d = d % period
    return min(d, period - d)


@dataclass
class ShootingChain:
    """Submanifolds visited by the cascades and the shooting coordinates they need."""
    subs: List[CriticalSubmanifold]
    scan_source: bool
    slot: Optional[Tuple[str, int]]
    discrete: int


@dataclass
class Shot:
    valid: bool
    reason: str = ""
    g: float = 0.0
    miss: float = math.inf
    satisfied: bool = False
    source: Optional[np.ndarray] = None
    cascades: List[Trajectory] = field(default_factory=list)
    bases: List[np.ndarray] = field(default_factory=list)
    launches: List[np.ndarray] = field(default_factory=list)
    landings: List[np.ndarray] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    vectors: List[np.ndarray] = field(default_factory=list)


class CascadeSearch:
    """Shooting search for flow lines with exactly m cascades from c1 to c2."""

    def __init__(self, problem: MorseBottProblem, c1: CritPoint, c2: CritPoint, m: int,
                 search: SearchParams, metric_factor=None, phase: float = 0.5):
        self.problem = problem
        self.manifold = problem.manifold
        self.c1 = c1
        self.c2 = c2
        self.m = m
        self.search = search
        self.metric_factor = metric_factor
        self.phase = phase
        self.shots = 0
        self.sub1 = problem.submanifold(c1.submanifold)
        self.sub2 = problem.submanifold(c2.submanifold)
        self.target_kind = self._target_kind()
        self._reversed: Optional[MorseBottProblem] = None
        self._target_tangent: Optional[np.ndarray] = None

    # -- planning -------------------------------------------------------

    def _target_kind(self) -> str:
        codim = index(self.c2) if self.m >= 1 else self.c2.ind_h
        if codim == 0:
            return "open"
        if codim == 1 and self.c2.ind_h == 1 and self.sub2.dim == 1 and \
                (self.m == 0 or self.sub2.ind_f == 0):
            return "hyper"
        raise UnsupportedSearchError(
            f"landing condition of codimension {codim} at {self.c2.label} is not supported")

    def chains(self) -> List[ShootingChain]:
        if self.m == 0:
            return []
        level = {s.name: submanifold_level(self.problem, s) for s in self.problem.critical_submanifolds}
        top, bottom = level[self.sub1.name], level[self.sub2.name]
        if self.sub1.name == self.sub2.name:
            return []
        if self.m == 1:
            sequences = [[self.sub1, self.sub2]]
        else:
            middle = sorted(
                (s for s in self.problem.critical_submanifolds
                 if bottom + LEVEL_TOL < level[s.name] < top - LEVEL_TOL),
                key=lambda s: (-level[s.name], s.name))
            sequences = []
            for combo in itertools.combinations(middle, self.m - 1):
                seq = [self.sub1, *combo, self.sub2]
                if all(level[a.name] > level[b.name] + LEVEL_TOL for a, b in zip(seq, seq[1:])):
                    sequences.append(seq)
        plans = [self._plan(seq) for seq in sequences]
        return [p for p in plans if p is not None]

    def _plan(self, seq: List[CriticalSubmanifold]) -> Optional[ShootingChain]:
        continuous: List[Tuple[str, int]] = []
        scan_source = False
        if self.c1.ind_h == 0 or self.sub1.dim == 0:
            pass
        elif self.c1.ind_h == self.sub1.dim == 1 and self.sub1.period is not None:
            scan_source = True
            continuous.append(("source", 0))
        else:
            raise UnsupportedSearchError(f"unstable set of h at {self.c1.label} has dimension {self.c1.ind_h}")

        discrete = 0
        for k, sub in enumerate(seq[:-1]):
            if k > 0 and sub.dim > 0:
                continuous.append(("time", k))
            if sub.ind_f == 0:
                return None
            if sub.ind_f == 1:
                discrete += 1
            elif sub.ind_f == 2:
                continuous.append(("angle", k))
            else:
                raise UnsupportedSearchError(f"launch sphere of dimension {sub.ind_f - 1} at {sub.name}")
        if len(continuous) > 1:
            raise UnsupportedSearchError(
                f"{len(continuous)} continuous shooting parameters between {self.c1.label} and {self.c2.label}")
        return ShootingChain(seq, scan_source, continuous[0] if continuous else None, discrete)

    def _grid(self, slot: Tuple[str, int]) -> Tuple[np.ndarray, Optional[float]]:
        K = self.search.scan_points
        if slot[0] == "source":
            period = float(self.sub1.period[0])
            return (np.arange(K) + self.phase) / K * period, period
        if slot[0] == "angle":
            return 2.0 * math.pi * (np.arange(K) + self.phase) / K, 2.0 * math.pi
        steps = np.geomspace(1e-3, self.search.time_grid_max, self.search.time_grid_points - 1)
        return np.concatenate([[0.0], steps]), None

    # -- shots ------------------------------------------------------------

    def _integrate(self, problem: MorseBottProblem, x0: np.ndarray) -> Trajectory:
        self.shots += 1
        if self.shots > self.search.max_shots:
            raise BudgetExhaustedError(
                f"{self.search.max_shots} shots spent on {self.c1.label} -> {self.c2.label}")
        performance_monitor.record_metric('cascade_shots', 1)
        return integrate_flow(problem, x0, horizon=self.search.horizon,
                              stop_speed=self.search.stop_speed, metric_factor=self.metric_factor,
                              max_step=self.search.max_step, fit=False)

    def _in_unstable_set(self, u: np.ndarray) -> bool:
        back = flow_parameters(self.sub1, u, self.search.h_flow_horizon, backward=True)
        return float(np.linalg.norm(self.sub1.point(back) - self.c1.point)) < 1e-3

    def shoot(self, chain: ShootingChain, branch: Tuple[int, ...], value: Optional[float],
              ref: Optional[List[np.ndarray]]) -> Shot:
        if chain.scan_source:
            u = self.c1.params + value
            if not self._in_unstable_set(u):
                return Shot(valid=False, reason="source outside the unstable set of h")
            x = self.sub1.point(u)
        else:
            x = self.c1.point.copy()

        shot = Shot(valid=True, source=x.copy())
        j = 0
        for k in range(self.m):
            sub = chain.subs[k]
            if k > 0:
                t = float(value) if chain.slot == ("time", k) else 0.0
                x = flow_on_critical_manifold(sub, shot.landings[-1], t)
                shot.times.append(t)
            shot.bases.append(x)

            eigenvalues, eigenvectors = hessian_eigenbasis(self.manifold, self.problem.f, x)
            unstable = eigenvectors[:, eigenvalues < -Config.HESS_ZERO_TOL]
            if unstable.shape[1] != sub.ind_f:
                shot.valid, shot.reason = False, f"unstable dimension {unstable.shape[1]} at {sub.name}"
                return shot
            if sub.ind_f == 1:
                v = _orient(unstable[:, 0], ref[j] if ref and j < len(ref) else None)
                shot.vectors.append(v)
                direction = branch[j] * v
                j += 1
            else:
                direction = math.cos(value) * unstable[:, 0] + math.sin(value) * unstable[:, 1]

            x0 = self.manifold.project(x + self.search.launch_eps * direction,
                                       tol=Config.POINT_TOL, max_iter=Config.NEWTON_MAX_ITER)
            shot.launches.append(x0)
            trajectory = self._integrate(self.problem, x0)
            if trajectory.limit is None or trajectory.limit.submanifold != chain.subs[k + 1].name:
                landed = trajectory.limit.submanifold if trajectory.limit else trajectory.termination
                shot.valid, shot.reason = False, f"cascade {k + 1} ended at {landed}"
                return shot
            shot.cascades.append(trajectory)
            shot.landings.append(trajectory.limit.point)

        self._evaluate_target(shot)
        return shot

    def _tangent_at_target(self) -> np.ndarray:
        if self._target_tangent is None:
            tangent = self.sub2.tangent_basis(self.c2.params)[:, 0]
            self._target_tangent = tangent / np.linalg.norm(tangent)
        return self._target_tangent

    def _evaluate_target(self, shot: Shot) -> None:
        q = shot.landings[-1]
        offset = q - self.c2.point
        if self.target_kind == "open":
            if self.sub2.dim == 0:
                shot.miss = float(np.linalg.norm(offset))
            else:
                u_end = flow_parameters(self.sub2, self.sub2.nearest_params(q), self.search.h_flow_horizon)
                shot.miss = float(np.linalg.norm(self.sub2.point(u_end) - self.c2.point))
            shot.satisfied = shot.miss < self.search.match_tol
        else:
            shot.g = float(offset @ self._tangent_at_target())
            shot.miss = float(np.linalg.norm(offset))
            shot.valid = shot.miss < self.search.approach_tol
            shot.satisfied = shot.miss < self.search.match_tol

    # -- solving ----------------------------------------------------------

    def _bisect(self, chain: ShootingChain, branch: Tuple[int, ...],
                lo: float, shot_lo: Shot, hi: float) -> Tuple[float, Shot]:
        ref = shot_lo.vectors or None
        g_lo = shot_lo.g
        while hi - lo > self.search.refine_tol:
            mid = 0.5 * (lo + hi)
            shot = self.shoot(chain, branch, mid, ref)
            if not shot.valid:
                raise NonTransversalError(f"invalid shot at parameter {mid:.12f} inside a bracket ({shot.reason})")
            if shot.g == 0.0:
                lo = hi = mid
                break
            if (shot.g > 0.0) == (g_lo > 0.0):
                lo, g_lo, ref = mid, shot.g, shot.vectors or ref
            else:
                hi = mid
        performance_monitor.record_metric('bisections', 1)
        value = 0.5 * (lo + hi)
        shot = self.shoot(chain, branch, value, ref)
        if not shot.valid or not shot.satisfied:
            raise NonTransversalError(
                f"refinement at parameter {value:.12f} stalled {shot.miss:.2e} from {self.c2.label}")
        return value, shot

    def _solve_chain(self, chain: ShootingChain) -> List[Tuple[Tuple[int, ...], float, Shot]]:
        candidates = []
        branches = list(itertools.product((1, -1), repeat=chain.discrete))

        if chain.slot is None:
            for branch in branches:
                shot = self.shoot(chain, branch, None, None)
                if shot.valid and shot.satisfied:
                    candidates.append((branch, 0.0, shot))
            return candidates

        grid, period = self._grid(chain.slot)
        for branch in branches:
            samples = []
            ref = None
            for value in grid:
                shot = self.shoot(chain, branch, float(value), ref)
                if shot.vectors:
                    ref = shot.vectors
                samples.append((float(value), shot))

            if self.target_kind == "open":
                candidates.extend((branch, v, s) for v, s in samples if s.valid and s.satisfied)
                continue

            candidates.extend((branch, v, s) for v, s in samples if s.valid and s.satisfied)
            pairs = list(zip(samples[:-1], samples[1:]))
            if period is not None and len(samples) > 1:
                first_value = samples[0][0] + period
                wrapped = self.shoot(chain, branch, first_value, samples[-1][1].vectors or None)
                pairs.append((samples[-1], (first_value, wrapped)))

            for (va, sa), (vb, sb) in pairs:
                if not (sa.valid and sb.valid) or sa.satisfied or sb.satisfied:
                    continue
                if sa.g * sb.g < 0.0:
                    value, shot = self._bisect(chain, branch, va, sa, vb)
                    if chain.slot[0] == "time" and value < CORNER_TOL:
                        logger.debug(f"Dropping corner solution t={value:.2e} for {self.c1.label} -> {self.c2.label}")
                        continue
                    if period is not None:
                        value = value % period
                    candidates.append((branch, value, shot))
        return candidates

    def _solve_zero_cascades(self) -> List[CascadeFlowLine]:
        sub = self.sub1
        if self.c1.ind_h == 0:
            return []
        if self.c1.ind_h > 1:
            raise UnsupportedSearchError(f"unstable set of h at {self.c1.label} has dimension {self.c1.ind_h}")

        eigenvalues, eigenvectors = eigh(sub.h_hessian(self.c1.params), sub.metric(self.c1.params))
        unstable = eigenvectors[:, eigenvalues < -Config.HESS_ZERO_TOL]
        if unstable.shape[1] != 1:
            raise UnsupportedSearchError(f"h at {self.c1.label} has {unstable.shape[1]} unstable directions")
        w = _orient(unstable[:, 0], None)

        lines = []
        for b in (1, -1):
            u0 = sub.wrap(self.c1.params + b * self.search.launch_eps * w)
            u_end = flow_parameters(sub, u0, self.search.h_flow_horizon)
            miss = float(np.linalg.norm(sub.point(u_end) - self.c2.point))
            if miss >= self.search.match_tol:
                continue
            segment = sample_critical_flow(self.problem, sub, sub.point(u0),
                                           self.search.h_flow_horizon, samples=400)
            lines.append(CascadeFlowLine(
                source=self.c1.label,
                target=self.c2.label,
                m=0,
                cascades=[],
                times=[],
                source_witness=self.c1.point,
                target_witness=self.c2.point,
                morse_segments=[segment],
                shooting_parameter=0.0,
                branch=(b,),
                miss=miss,
                chaining_residual=miss
            ))
        return lines

    def _build_line(self, chain: ShootingChain, branch: Tuple[int, ...],
                    value: float, shot: Shot) -> CascadeFlowLine:
        residuals = []
        for k, trajectory in enumerate(shot.cascades):
            if self._reversed is None:
                self._reversed = reversed_problem(self.problem)
            back = self._integrate(self._reversed, shot.launches[k])
            residual = float(np.linalg.norm(back.end - shot.bases[k]))
            trajectory.origin = TrajectoryLimit(chain.subs[k].name, shot.bases[k], residual)
            residuals.append(max(residual, trajectory.limit.distance))

        segments = [sample_critical_flow(self.problem, chain.subs[k], shot.landings[k - 1], shot.times[k - 1])
                    for k in range(1, self.m)]
        line = CascadeFlowLine(
            source=self.c1.label,
            target=self.c2.label,
            m=self.m,
            cascades=shot.cascades,
            times=list(shot.times),
            source_witness=shot.source,
            target_witness=shot.landings[-1],
            morse_segments=segments,
            shooting_parameter=value,
            branch=branch,
            miss=shot.miss,
            chaining_residual=max(residuals, default=0.0)
        )
        if line.chaining_residual >= self.search.match_tol:
            raise NonTransversalError(
                f"cascade endpoints of {line} chain only to {line.chaining_residual:.2e}")
        return line

    def run(self) -> List[CascadeFlowLine]:
        if self.m == 0:
            lines = self._solve_zero_cascades()
            logger.debug(f"{self.c1.label} -> {self.c2.label}, m=0: {len(lines)} lines")
            return lines

        lines: List[CascadeFlowLine] = []
        for chain in self.chains():
            period = self._grid(chain.slot)[1] if chain.slot else None
            existence = self.target_kind == "open" and chain.slot is not None
            candidates = sorted(self._solve_chain(chain), key=lambda c: (c[0], c[1]))
            chain_lines: List[CascadeFlowLine] = []
            for branch, value, shot in candidates:
                close = [other for other in chain_lines if other.branch == branch and
                         _periodic_distance(other.shooting_parameter, value, period) < self.search.dedup_radius]
                if close and existence:
                    continue
                line = self._build_line(chain, branch, value, shot)
                fingerprint = line.fingerprint()
                same_shape = [other for other in chain_lines
                              if np.linalg.norm(other.fingerprint() - fingerprint) < self.search.dedup_radius]
                if close and not same_shape:
                    raise NonTransversalError(
                        f"distinct solutions within {self.search.dedup_radius} of parameter {value:.6f}")
                if close or same_shape:
                    continue
                line.broken, line.dwell_time = detect_broken(self.problem, line, self.search)
                chain_lines.append(line)
            lines.extend(chain_lines)

        logger.debug(f"{self.c1.label} -> {self.c2.label}, m={self.m}: {len(lines)} lines in {self.shots} shots")
        return lines


def _supported(problem: MorseBottProblem, c1: CritPoint, c2: CritPoint, m: int,
               search: SearchParams) -> bool:
    try:
        engine = CascadeSearch(problem, c1, c2, m, search)
        if m == 0 and c1.ind_h > 1:
            return False
        engine.chains()
    except UnsupportedSearchError:
        return False
    return True


def _search_with_retries(problem: MorseBottProblem, c1: CritPoint, c2: CritPoint, m: int,
                         search: SearchParams) -> List[CascadeFlowLine]:
    rng = np.random.default_rng(search.seed)
    metric_factor, phase = None, 0.5
    for attempt in range(search.metric_retries + 1):
        try:
            return CascadeSearch(problem, c1, c2, m, search, metric_factor=metric_factor, phase=phase).run()
        except NonTransversalError as e:
            if attempt == search.metric_retries:
                raise
            logger.warning(f"Non-transversal search {c1.label} -> {c2.label} (m={m}): {e}; "
                           f"perturbing the metric (retry {attempt + 1})")
            metric_factor = conformal_factor(rng, problem.manifold.ambient_dim, search.conformal_amplitude)
            phase = float(rng.uniform(0.1, 0.9))
    return []


def find_cascades(problem: MorseBottProblem, c1: CritPoint, c2: CritPoint, m: int,
                  search: Optional[SearchParams] = None) -> List[CascadeFlowLine]:
    """All flow lines with m cascades from c1 to c2, up to time shift and deduplication.

    When the landing condition at c2 is not one the shooting method handles,
    the search runs on the reversed quadruple from c2 to c1 and the lines are
    turned around.
    """
    search = search or SearchParams.from_config(Config)
    if m < 0:
        raise ValueError("number of cascades must be nonnegative")
    if expected_moduli_dim(c1, c2) < 0:
        return []
    if m == 0 and c1.submanifold != c2.submanifold:
        return []

    if _supported(problem, c1, c2, m, search):
        return _search_with_retries(problem, c1, c2, m, search)

    backwards = reversed_problem(problem)
    r1, r2 = backwards.crit_point(c2.label), backwards.crit_point(c1.label)
    if not _supported(backwards, r1, r2, m, search):
        raise UnsupportedSearchError(f"no supported shooting direction for {c1.label} -> {c2.label} with m={m}")
    logger.debug(f"Searching {c1.label} -> {c2.label} (m={m}) on the reversed quadruple")
    return [reverse_line(line) for line in _search_with_retries(backwards, r1, r2, m, search)]


def count_mod2(problem: MorseBottProblem, c1: CritPoint, c2: CritPoint,
               search: Optional[SearchParams] = None) -> int:
    """Number of unbroken cascade lines from c1 to c2 over all m, modulo 2."""
    search = search or SearchParams.from_config(Config)
    if index(c1) - index(c2) != 1:
        raise ValueError(f"count requires index difference 1, got {index(c1)} and {index(c2)}")

    total = 0
    for m in range(max_cascades(problem, c1, c2) + 1):
        try:
            lines = find_cascades(problem, c1, c2, m, search)
        except (NonTransversalError, BudgetExhaustedError, UnsupportedSearchError) as e:
            raise UntrustedCountError((c1.label, c2.label), str(e))
        unbroken = [line for line in lines if not line.broken]
        if len(unbroken) < len(lines):
            logger.info(f"{len(lines) - len(unbroken)} broken configurations excluded for "
                        f"{c1.label} -> {c2.label} (m={m})")
        total += len(unbroken)
    logger.info(f"n({c1.label}, {c2.label}) = {total} mod 2 = {total % 2}")
    return total % 2


def check_trichotomy(problem: MorseBottProblem, search: Optional[SearchParams] = None) -> Dict:
    """Search every pair and m, and report solutions that contradict classify_pair."""
    search = search or SearchParams.from_config(Config)
    generators = problem.crit_points()
    violations, skipped = [], []
    checked = 0

    for c1, c2 in itertools.permutations(generators, 2):
        if expected_moduli_dim(c1, c2) < 0:
            continue
        pair_class = classify_pair(c1, c2)
        for m in range(max(1, max_cascades(problem, c1, c2)) + 1):
            try:
                lines = find_cascades(problem, c1, c2, m, search)
            except (NonTransversalError, BudgetExhaustedError, UnsupportedSearchError) as e:
                skipped.append({"source": c1.label, "target": c2.label, "m": m, "reason": str(e)})
                continue
            checked += 1
            if lines and contradicts_class(pair_class, m):
                violations.append({"source": c1.label, "target": c2.label, "m": m,
                                   "class": pair_class.value, "lines": len(lines)})

    return {"checked": checked, "violations": violations, "skipped": skipped,
            "passed": not violations}
