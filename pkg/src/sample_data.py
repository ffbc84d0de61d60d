"""
Built-in examples for the Morse-Bott verification engine.
Creates the registry of quadruples (f, h, g, g0), group actions and Novikov
groups, and loads user-declared ones from TOML run files.
"""

import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import load_run_file
from models.data_models import (
    ActionKind, ChartSampler, CriticalSubmanifold, CritHPoint, GammaGroup,
    LinearGroupAction, ManifoldModel, MorseBottProblem, ScalarField
)
from models.exceptions import ConfigError, SingularActionError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

Monomial = Tuple[float, Sequence[int]]


def _zero_params(_x):
    return np.zeros(0)


def point_submanifold(name: str, x: Sequence[float], ind_f: int) -> CriticalSubmanifold:
    """An isolated nondegenerate critical point."""
    x = np.asarray(x, dtype=float)
    return CriticalSubmanifold(
        name=name,
        dim=0,
        ind_f=ind_f,
        parameterization=lambda u: x,
        locate=_zero_params,
        morse_function_h=lambda u: 0.0,
        crit_h=[CritHPoint(label=name, params=np.zeros(0), ind_h=0)]
    )


def circle_submanifold(name: str, embed: Callable[[float], np.ndarray], locate: Callable[[np.ndarray], float],
                       ind_f: int, labels: Tuple[str, str] = ("max", "min")) -> CriticalSubmanifold:
    """A critical circle parameterized by theta in [0, 1) with h = cos(2 pi theta)."""
    top, bottom = labels
    return CriticalSubmanifold(
        name=name,
        dim=1,
        ind_f=ind_f,
        parameterization=lambda u: embed(float(u[0])),
        locate=lambda x: np.array([locate(x)]),
        morse_function_h=lambda u: math.cos(TWO_PI * u[0]),
        h_gradient=lambda u: np.array([-TWO_PI * math.sin(TWO_PI * u[0])]),
        crit_h=[
            CritHPoint(label=top, params=np.array([0.0]), ind_h=1),
            CritHPoint(label=bottom, params=np.array([0.5]), ind_h=0)
        ],
        period=np.array([1.0])
    )


def _angle(y: float, x: float) -> float:
    return (math.atan2(y, x) / TWO_PI) % 1.0


# Manifolds

def generate_sphere() -> ManifoldModel:
    def chart(u):
        theta, phi = u
        return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])

    return ManifoldModel(
        name="S2",
        ambient_dim=3,
        dim=2,
        constraint=lambda x: np.array([x @ x - 1.0]),
        constraint_jacobian=lambda x: 2.0 * x[None, :],
        chart_samplers={"spherical": ChartSampler("spherical", 2, chart,
                                                  np.array([0.1, 0.0]), np.array([math.pi - 0.1, TWO_PI]))}
    )


def generate_circle() -> ManifoldModel:
    def chart(u):
        return np.array([math.cos(TWO_PI * u[0]), math.sin(TWO_PI * u[0])])

    return ManifoldModel(
        name="S1",
        ambient_dim=2,
        dim=1,
        constraint=lambda x: np.array([x @ x - 1.0]),
        constraint_jacobian=lambda x: 2.0 * x[None, :],
        chart_samplers={"angle": ChartSampler("angle", 1, chart, np.array([0.0]), np.array([1.0]))}
    )


def generate_clifford_torus() -> ManifoldModel:
    def constraint(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 1.0, x[2] ** 2 + x[3] ** 2 - 1.0])

    def jacobian(x):
        return np.array([[2 * x[0], 2 * x[1], 0.0, 0.0], [0.0, 0.0, 2 * x[2], 2 * x[3]]])

    def chart(u):
        return np.array([math.cos(TWO_PI * u[0]), math.sin(TWO_PI * u[0]),
                         math.cos(TWO_PI * u[1]), math.sin(TWO_PI * u[1])])

    return ManifoldModel(
        name="T2",
        ambient_dim=4,
        dim=2,
        constraint=constraint,
        constraint_jacobian=jacobian,
        chart_samplers={"angles": ChartSampler("angles", 2, chart, np.zeros(2), np.ones(2))}
    )


def generate_euclidean(dim: int) -> ManifoldModel:
    return ManifoldModel(
        name=f"R{dim}",
        ambient_dim=dim,
        dim=dim,
        chart_samplers={"box": ChartSampler("box", dim, lambda u: np.asarray(u, dtype=float),
                                            -2.0 * np.ones(dim), 2.0 * np.ones(dim))}
    )


# Quadruples

def generate_s2_height() -> MorseBottProblem:
    f = ScalarField("z", lambda x: x[2], lambda x: np.array([0.0, 0.0, 1.0]))
    return MorseBottProblem(
        name="s2-height",
        manifold=generate_sphere(),
        f=f,
        critical_submanifolds=[
            point_submanifold("N", [0.0, 0.0, 1.0], ind_f=2),
            point_submanifold("S", [0.0, 0.0, -1.0], ind_f=0)
        ],
        euler_characteristic=2,
        description="height function on the round two-sphere"
    )


def generate_s2_z2() -> MorseBottProblem:
    f = ScalarField("z^2", lambda x: x[2] ** 2, lambda x: np.array([0.0, 0.0, 2.0 * x[2]]))
    equator = circle_submanifold(
        "E",
        lambda t: np.array([math.cos(TWO_PI * t), math.sin(TWO_PI * t), 0.0]),
        lambda x: _angle(x[1], x[0]),
        ind_f=0,
        labels=("s", "m")
    )
    return MorseBottProblem(
        name="s2-z2",
        manifold=generate_sphere(),
        f=f,
        critical_submanifolds=[
            point_submanifold("N", [0.0, 0.0, 1.0], ind_f=2),
            point_submanifold("S", [0.0, 0.0, -1.0], ind_f=2),
            equator
        ],
        euler_characteristic=2,
        description="f = z^2 on S^2: two poles and the equator circle"
    )


def generate_t2_cos() -> MorseBottProblem:
    f = ScalarField("x1", lambda x: x[0], lambda x: np.array([1.0, 0.0, 0.0, 0.0]))

    def on_circle(sign):
        return lambda t: np.array([sign, 0.0, math.cos(TWO_PI * t), math.sin(TWO_PI * t)])

    return MorseBottProblem(
        name="t2-cos",
        manifold=generate_clifford_torus(),
        f=f,
        critical_submanifolds=[
            circle_submanifold("C0", on_circle(1.0), lambda x: _angle(x[3], x[2]), ind_f=1),
            circle_submanifold("Cpi", on_circle(-1.0), lambda x: _angle(x[3], x[2]), ind_f=0)
        ],
        euler_characteristic=0,
        description="f = cos(2 pi theta1) on the flat torus, h = cos(2 pi theta2) on both critical circles"
    )


def generate_t2_morse() -> MorseBottProblem:
    f = ScalarField("x1 + x3/2", lambda x: x[0] + 0.5 * x[2], lambda x: np.array([1.0, 0.0, 0.5, 0.0]))
    return MorseBottProblem(
        name="t2-morse",
        manifold=generate_clifford_torus(),
        f=f,
        critical_submanifolds=[
            point_submanifold("max", [1.0, 0.0, 1.0, 0.0], ind_f=2),
            point_submanifold("s1", [1.0, 0.0, -1.0, 0.0], ind_f=1),
            point_submanifold("s2", [-1.0, 0.0, 1.0, 0.0], ind_f=1),
            point_submanifold("min", [-1.0, 0.0, -1.0, 0.0], ind_f=0)
        ],
        euler_characteristic=0,
        description="Morse function cos(2 pi theta1) + cos(2 pi theta2)/2 on the flat torus"
    )


def generate_model_saddle_line() -> MorseBottProblem:
    f = ScalarField("x1^2 - x2^2", lambda x: x[1] ** 2 - x[2] ** 2,
                    lambda x: np.array([0.0, 2.0 * x[1], -2.0 * x[2]]))
    line = CriticalSubmanifold(
        name="L",
        dim=1,
        ind_f=1,
        parameterization=lambda u: np.array([u[0], 0.0, 0.0]),
        locate=lambda x: np.array([x[0]]),
        morse_function_h=lambda u: u[0] ** 2,
        h_gradient=lambda u: np.array([2.0 * u[0]]),
        crit_h=[CritHPoint(label="0", params=np.array([0.0]), ind_h=0)],
        bounds=(np.array([-1.0]), np.array([1.0]))
    )
    manifold = generate_euclidean(3)
    # stable set of the line; flows started off it leave along x2
    manifold.chart_samplers["stable"] = ChartSampler(
        "stable", 2, lambda u: np.array([u[0], u[1], 0.0]), -2.0 * np.ones(2), 2.0 * np.ones(2))
    return MorseBottProblem(
        name="model-x1sq-x2sq",
        manifold=manifold,
        f=f,
        critical_submanifolds=[line],
        description="local model x1^2 - x2^2 on R^3, critical along the x0 axis",
        flow_chart="stable"
    )


def generate_r1_x4() -> MorseBottProblem:
    f = ScalarField("x^4", lambda x: x[0] ** 4, lambda x: np.array([4.0 * x[0] ** 3]))
    return MorseBottProblem(
        name="r1-x4",
        manifold=generate_euclidean(1),
        f=f,
        critical_submanifolds=[point_submanifold("0", [0.0], ind_f=0)],
        description="degenerate critical point: not Morse-Bott, flow decays algebraically"
    )


def generate_s1_zero() -> MorseBottProblem:
    f = ScalarField("0", lambda x: 0.0, lambda x: np.zeros(2))
    circle = circle_submanifold(
        "S1",
        lambda t: np.array([math.cos(TWO_PI * t), math.sin(TWO_PI * t)]),
        lambda x: _angle(x[1], x[0]),
        ind_f=0
    )
    return MorseBottProblem(
        name="s1-zero",
        manifold=generate_circle(),
        f=f,
        critical_submanifolds=[circle],
        euler_characteristic=0,
        description="f = 0 on the circle, h = cos(2 pi theta)"
    )


PROBLEMS: Dict[str, Callable[[], MorseBottProblem]] = {
    "s2-height": generate_s2_height,
    "s2-z2": generate_s2_z2,
    "t2-cos": generate_t2_cos,
    "t2-morse": generate_t2_morse,
    "model-x1sq-x2sq": generate_model_saddle_line,
    "r1-x4": generate_r1_x4,
    "s1-zero": generate_s1_zero,
}

EXPECTED_BETTI = {
    "s2-height": [1, 0, 1],
    "s2-z2": [1, 0, 1],
    "t2-cos": [1, 2, 1],
    "t2-morse": [1, 2, 1],
    "s1-zero": [1, 1],
}

# Pairs of quadruples on the same manifold whose homologies must agree
COMPARISONS = [("s2-z2", "s2-height"), ("t2-cos", "t2-morse")]


# Group actions

def generate_s1_c2(tau: float = 0.5) -> LinearGroupAction:
    return LinearGroupAction(name="s1-c2", kind=ActionKind.TORIC, n=2, tau=[tau], A=np.array([[1.0, 1.0]]))


def generate_toric_rank2(tau: Sequence[float] = (1.0, 1.0)) -> LinearGroupAction:
    return LinearGroupAction(name="toric-rank2", kind=ActionKind.TORIC, n=3, tau=list(tau),
                             A=np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]))


def generate_grassmann_2_1() -> LinearGroupAction:
    return LinearGroupAction(name="grassmann-2-1", kind=ActionKind.GRASSMANN, n=2, k=1, tau=[0.0])


def generate_s1_c2_general(tau: float = 1.0 / (2.0 * math.sqrt(2.0))) -> LinearGroupAction:
    """The diagonal circle on C^2 with its unit-norm generator -i id / sqrt(2)."""
    return LinearGroupAction(name="s1-c2-general", kind=ActionKind.GENERAL, n=2, tau=[tau],
                             generators=[-1j * np.eye(2) / math.sqrt(2.0)])


ACTIONS: Dict[str, Callable[..., LinearGroupAction]] = {
    "s1-c2": generate_s1_c2,
    "toric-rank2": generate_toric_rank2,
    "grassmann-2-1": generate_grassmann_2_1,
    "s1-c2-general": generate_s1_c2_general,
}


def generate_sample_gamma() -> GammaGroup:
    """Z^2 with degrees (2, 4) and rationally independent energies (1, sqrt 2)."""
    return GammaGroup(degree_hom=(2, 4), energy_hom=(1.0, math.sqrt(2.0)))


# TOML declarations

def polynomial(terms: Sequence[Monomial], dim: int) -> Tuple[Callable, Callable]:
    """Value and gradient of sum c * prod x_i^e_i from [coefficient, exponents] pairs."""
    coefficients = np.array([float(c) for c, _ in terms])
    exponents = np.array([list(e) for _, e in terms], dtype=int).reshape(len(terms), dim)

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(coefficients * np.prod(x[None, :] ** exponents, axis=1)))

    def gradient(x):
        x = np.asarray(x, dtype=float)
        grad = np.zeros(dim)
        for i in range(dim):
            lowered = exponents.copy()
            factor = lowered[:, i].astype(float)
            lowered[:, i] = np.maximum(lowered[:, i] - 1, 0)
            grad[i] = np.sum(coefficients * factor * np.prod(x[None, :] ** lowered, axis=1))
        return grad

    return value, gradient


def _declared_manifold(section: Dict) -> ManifoldModel:
    try:
        ambient_dim, dim = int(section["ambient_dim"]), int(section["dim"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"[manifold] needs integer ambient_dim and dim: {e}")
    constraints = [polynomial(p, ambient_dim) for p in section.get("constraints", [])]
    if len(constraints) != ambient_dim - dim:
        raise ConfigError(f"[manifold] needs {ambient_dim - dim} constraint polynomials, got {len(constraints)}")
    if not constraints:
        return generate_euclidean(ambient_dim)
    return ManifoldModel(
        name=section.get("name", "declared"),
        ambient_dim=ambient_dim,
        dim=dim,
        constraint=lambda x: np.array([value(x) for value, _ in constraints]),
        constraint_jacobian=lambda x: np.array([gradient(x) for _, gradient in constraints])
    )


def _declared_submanifold(section: Dict, index: int) -> CriticalSubmanifold:
    name = section.get("name", f"C{index}")
    kind = section.get("kind", "point")
    ind_f = int(section.get("ind_f", 0))
    if kind == "point":
        return point_submanifold(name, section["point"], ind_f)
    if kind == "circle":
        center = np.asarray(section.get("center"), dtype=float)
        u, v = (np.asarray(a, dtype=float) for a in section["axes"])
        radius = float(section.get("radius", 1.0))
        return circle_submanifold(
            name,
            lambda t: center + radius * (math.cos(TWO_PI * t) * u + math.sin(TWO_PI * t) * v),
            lambda x: _angle(float((x - center) @ v), float((x - center) @ u)),
            ind_f=ind_f
        )
    raise ConfigError(f"unknown critical submanifold kind '{kind}'")


def problem_from_dict(data: Dict) -> MorseBottProblem:
    for section in ("manifold", "field", "submanifold"):
        if section not in data:
            raise ConfigError(f"run file has no [{section}] section")
    try:
        manifold = _declared_manifold(data["manifold"])
        value, gradient = polynomial(data["field"]["coefficients"], manifold.ambient_dim)
        subs = [_declared_submanifold(s, i) for i, s in enumerate(data["submanifold"])]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid problem declaration: {e}")
    return MorseBottProblem(
        name=data["manifold"].get("problem", "declared"),
        manifold=manifold,
        f=ScalarField(data["field"].get("name", "f"), value, gradient),
        critical_submanifolds=subs,
        euler_characteristic=data["manifold"].get("euler"),
        description="declared in a run file"
    )


def _complex_matrix(pair) -> np.ndarray:
    real, imag = pair
    return np.asarray(real, dtype=float) + 1j * np.asarray(imag, dtype=float)


def action_from_dict(data: Dict) -> LinearGroupAction:
    section = data.get("action")
    if section is None:
        raise ConfigError("run file has no [action] section")
    try:
        kind = ActionKind(section["kind"])
        return LinearGroupAction(
            name=section.get("name", "declared"),
            kind=kind,
            n=int(section["n"]),
            tau=section.get("tau", [0.0]),
            A=np.asarray(section["A"], dtype=float) if "A" in section else None,
            k=int(section.get("k", 0)),
            generators=[_complex_matrix(g) for g in section.get("generators", [])] or None,
            normalization=section.get("normalization", "euclidean")
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid [action] declaration: {e}")
    except SingularActionError as e:
        raise ConfigError(str(e))


def gamma_from_dict(data: Dict) -> GammaGroup:
    section = data.get("gamma")
    if section is None:
        return generate_sample_gamma()
    try:
        return GammaGroup(degree_hom=tuple(int(d) for d in section["degree"]),
                          energy_hom=tuple(float(e) for e in section["energy"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid [gamma] declaration: {e}")


def read_run_file(path: str) -> Dict:
    try:
        return load_run_file(path)
    except FileNotFoundError:
        raise ConfigError(f"run file {path} not found")
    except Exception as e:
        raise ConfigError(f"cannot parse {path}: {e}")


def load_problem(name: str) -> MorseBottProblem:
    """Registry example by name, or the problem declared in a TOML file."""
    if name in PROBLEMS:
        return PROBLEMS[name]()
    if name.endswith(".toml") or Path(name).is_file():
        return problem_from_dict(read_run_file(name))
    raise ConfigError(f"unknown example '{name}' (known: {', '.join(sorted(PROBLEMS))})")


def load_action(name: str, tau: Optional[Sequence[float]] = None) -> LinearGroupAction:
    if name in ACTIONS:
        action = ACTIONS[name]()
    elif name.endswith(".toml") or Path(name).is_file():
        action = action_from_dict(read_run_file(name))
    else:
        raise ConfigError(f"unknown action '{name}' (known: {', '.join(sorted(ACTIONS))})")
    if tau is not None:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if tau.size == 1 and action.tau.size > 1:
            tau = np.full(action.tau.size, float(tau[0]))
        if tau.size != action.tau.size:
            raise ConfigError(f"tau for {action.name} needs {action.tau.size} components")
        action.tau = tau
    return action


def list_examples() -> List[Dict]:
    rows = []
    for name, builder in sorted(PROBLEMS.items()):
        problem = builder()
        rows.append({"name": name, "manifold": str(problem.manifold), "description": problem.description,
                     "submanifolds": [str(s) for s in problem.critical_submanifolds]})
    return rows
