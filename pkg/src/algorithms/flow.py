"""
Negative gradient flow on embedded manifolds.
Adaptive RK4 with projection, limit detection on critical submanifolds,
exponential decay fits and the Morse flow of h on a critical submanifold.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from config import Config
from models.data_models import (
    CriticalSubmanifold, DecayFit, MorseBottProblem, Trajectory, TrajectoryLimit
)
from models.exceptions import OffManifoldError
from algorithms.geometry import ambient_gradient
from utils.logging import performance_monitor

logger = logging.getLogger(__name__)

MetricFactor = Optional[Callable[[np.ndarray], float]]

MAX_STEPS = 10 ** 6


class GradientFlowIntegrator:
    """Step-doubling RK4 integrator for s -> y(s) with y' = -grad f(y).

    ``metric_factor`` rescales the induced metric conformally, which only
    reparameterizes trajectories.
    """

    def __init__(self, problem: MorseBottProblem, metric_factor: MetricFactor = None,
                 rtol: float = Config.RTOL, atol: float = Config.ATOL,
                 max_step: float = Config.MAX_STEP, initial_step: float = Config.INITIAL_STEP,
                 min_step: float = Config.MIN_STEP):
        self.problem = problem
        self.manifold = problem.manifold
        self.f = problem.f
        self.metric_factor = metric_factor
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        self.initial_step = min(initial_step, max_step)
        self.min_step = min_step

    def velocity(self, y: np.ndarray) -> np.ndarray:
        v = -self.manifold.project_vector(y, ambient_gradient(self.f, y))
        if self.metric_factor is not None:
            v = v / self.metric_factor(y)
        return v

    def _rk4(self, y: np.ndarray, h: float) -> np.ndarray:
        k1 = self.velocity(y)
        k2 = self.velocity(y + 0.5 * h * k1)
        k3 = self.velocity(y + 0.5 * h * k2)
        k4 = self.velocity(y + h * k3)
        return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step(self, y: np.ndarray, h: float) -> Tuple[np.ndarray, float, float]:
        """One accepted step: (new point, step taken, suggested next step)."""
        while True:
            full = self._rk4(y, h)
            half = self._rk4(self._rk4(y, 0.5 * h), 0.5 * h)
            error = float(np.max(np.abs(half - full))) / 15.0
            scale = self.atol + self.rtol * max(float(np.max(np.abs(y))), float(np.max(np.abs(half))))
            if error <= scale or h <= self.min_step:
                grow = 2.0 if error == 0.0 else min(2.0, 0.9 * (scale / error) ** 0.2)
                h_next = float(np.clip(h * grow, self.min_step, self.max_step))
                return half + (half - full) / 15.0, h, h_next
            h = max(0.5 * h, self.min_step)

    def integrate(self, x0: np.ndarray, horizon: float, stop_speed: float,
                  escape_radius: float = Config.ESCAPE_RADIUS) -> Trajectory:
        y = np.asarray(x0, dtype=float).copy()
        s, h = 0.0, self.initial_step
        times, points, speeds, f_values = [], [], [], []
        termination = "steps"

        for _ in range(MAX_STEPS):
            speed = float(np.linalg.norm(self.velocity(y)))
            times.append(s)
            points.append(y.copy())
            speeds.append(speed)
            f_values.append(self.f(y))

            if speed < stop_speed:
                termination = "speed"
                break
            if s >= horizon:
                termination = "horizon"
                break
            if np.linalg.norm(y) > escape_radius:
                termination = "escape"
                break

            h = min(h, max(horizon - s, self.min_step))
            y_new, h_done, h = self.step(y, h)
            y = self.manifold.project(y_new, tol=Config.POINT_TOL, max_iter=Config.NEWTON_MAX_ITER)
            s += h_done

        performance_monitor.record_metric('flow_integrations', 1)
        performance_monitor.record_metric('flow_steps', len(times))
        return Trajectory(
            times=np.array(times),
            points=np.array(points),
            speeds=np.array(speeds),
            f_values=np.array(f_values),
            termination=termination
        )


def fit_exponential_decay(trajectory: Trajectory,
                          ceiling: float = Config.FIT_SPEED_CEILING,
                          min_samples: int = Config.FIT_MIN_SAMPLES,
                          r2_threshold: float = Config.FIT_R2_THRESHOLD) -> DecayFit:
    """Log-linear fit of speed against time over the asymptotic window.

    The window keeps samples below ``ceiling`` whose log-speed lies in the
    lower half of the observed log-speed range.
    """
    mask = (trajectory.speeds < ceiling) & (trajectory.speeds > 0.0)
    s = trajectory.times[mask]
    log_speed = np.log(trajectory.speeds[mask])

    def failed(reason: str, samples: int) -> DecayFit:
        return DecayFit(rate=0.0, constant=0.0, r_squared=0.0, samples=samples,
                        window=(0.0, 0.0), passed=False, reason=reason)

    if log_speed.size < min_samples:
        return failed(f"only {log_speed.size} samples below speed {ceiling}", int(log_speed.size))

    middle = 0.5 * (log_speed.min() + log_speed.max())
    window = log_speed <= middle
    s, log_speed = s[window], log_speed[window]
    if log_speed.size < min_samples:
        return failed(f"only {log_speed.size} samples in the asymptotic window", int(log_speed.size))

    slope, intercept = np.polyfit(s, log_speed, 1)
    predicted = slope * s + intercept
    ss_res = float(np.sum((log_speed - predicted) ** 2))
    ss_tot = float(np.sum((log_speed - log_speed.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    rate = -float(slope)
    # envelope constant so that speed <= c exp(-rate s) on the window
    constant = float(np.max(np.exp(log_speed + rate * s)))

    passed = rate > 0.0 and r_squared >= r2_threshold
    reason = "" if passed else f"R^2 = {r_squared:.4f} below {r2_threshold}" if rate > 0.0 else "speed not decaying"
    return DecayFit(
        rate=rate,
        constant=constant,
        r_squared=r_squared,
        samples=int(s.size),
        window=(float(s[0]), float(s[-1])),
        passed=passed,
        reason=reason
    )


def identify_limit(problem: MorseBottProblem, trajectory: Trajectory,
                   limit_tol: float = Config.LIMIT_TOL) -> Optional[TrajectoryLimit]:
    sub, distance = problem.nearest_submanifold(trajectory.end)
    if distance >= limit_tol:
        logger.warning(f"Flow on {problem.name} stopped {distance:.2e} away from every critical submanifold")
        return None
    return TrajectoryLimit(submanifold=sub.name, point=sub.nearest_point(trajectory.end), distance=distance)


def integrate_flow(problem: MorseBottProblem, x0: np.ndarray,
                   horizon: Optional[float] = None, stop_speed: Optional[float] = None,
                   metric_factor: MetricFactor = None, max_step: Optional[float] = None,
                   fit: bool = True) -> Trajectory:
    """Integrate y' = -grad f(y) from x0 until it stalls, escapes or runs out of time."""
    horizon = Config.HORIZON if horizon is None else horizon
    stop_speed = Config.STOP_SPEED if stop_speed is None else stop_speed
    x0 = np.asarray(x0, dtype=float)
    problem.manifold.check_point(x0, Config.POINT_TOL)

    integrator = GradientFlowIntegrator(
        problem, metric_factor=metric_factor,
        max_step=Config.MAX_STEP if max_step is None else max_step
    )
    trajectory = integrator.integrate(x0, horizon, stop_speed)

    if trajectory.termination == "speed":
        trajectory.limit = identify_limit(problem, trajectory)
    elif trajectory.termination != "horizon":
        logger.info(f"Flow on {problem.name} from {np.round(x0, 4)} ended by {trajectory.termination}")

    if fit and len(trajectory) > 1:
        trajectory.decay = fit_exponential_decay(trajectory)
    return trajectory


def flow_parameters(sub: CriticalSubmanifold, u0: np.ndarray, t: float,
                    backward: bool = False) -> np.ndarray:
    """Chart parameters after time t of the (negative, or backward) gradient flow of h."""
    u0 = sub.wrap(u0)
    if sub.dim == 0 or t == 0.0:
        return u0
    sign = -1.0 if backward else 1.0
    solution = solve_ivp(lambda s, u: sign * sub.h_flow_field(u), (0.0, t), u0,
                         method='DOP853', rtol=1e-10, atol=1e-12)
    return sub.wrap(solution.y[:, -1])


def flow_on_critical_manifold(sub: CriticalSubmanifold, p: np.ndarray, t: float) -> np.ndarray:
    """Time-t image of p under the negative g0-gradient flow of h."""
    if t < 0.0:
        raise ValueError("flow time must be nonnegative")
    p = np.asarray(p, dtype=float)
    distance = sub.distance(p)
    if distance > Config.LIMIT_TOL:
        raise OffManifoldError(distance, Config.LIMIT_TOL)
    if t == 0.0 or sub.dim == 0:
        return p.copy()
    return sub.point(flow_parameters(sub, sub.nearest_params(p), t))


def sample_critical_flow(problem: MorseBottProblem, sub: CriticalSubmanifold,
                         p: np.ndarray, t: float, samples: int = 50) -> Trajectory:
    """The h-flow segment from p over [0, t] as a Trajectory."""
    u0 = sub.nearest_params(p)
    if sub.dim == 0 or t == 0.0:
        x = sub.point(u0)
        return Trajectory(times=np.zeros(1), points=x[None, :], speeds=np.zeros(1),
                          f_values=np.array([problem.f(x)]), termination="constant")

    t_eval = np.linspace(0.0, t, samples)
    solution = solve_ivp(lambda s, u: sub.h_flow_field(u), (0.0, t), u0,
                         method='DOP853', t_eval=t_eval, rtol=1e-10, atol=1e-12)
    params = [sub.wrap(u) for u in solution.y.T]
    points = np.array([sub.point(u) for u in params])
    speeds = np.array([np.linalg.norm(sub.tangent_basis(u) @ sub.h_flow_field(u)) for u in params])
    return Trajectory(
        times=solution.t,
        points=points,
        speeds=speeds,
        f_values=np.array([problem.f(x) for x in points]),
        termination="time"
    )


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    dim = trajectory.points.shape[1]
    data = {'s': trajectory.times}
    for i in range(dim):
        data[f'x{i}'] = trajectory.points[:, i]
    data['speed'] = trajectory.speeds
    data['f'] = trajectory.f_values
    return pd.DataFrame(data)


def write_trajectory_csv(path, trajectory: Trajectory) -> None:
    trajectory_frame(trajectory).to_csv(path, index=False, float_format='%.12g')
    logger.info(f"Trajectory with {len(trajectory)} samples written to {path}")
