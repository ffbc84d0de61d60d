"""
Novikov field over GF(2): formal sums of elements of Gamma = Z^d, finite above
every energy level, graded by a degree homomorphism.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from config import Config
from models.data_models import GammaGroup, NovikovElement
from models.exceptions import (
    EnergyDegeneracyError, GroupMismatchError, NovikovZeroDivisionError, ResourceLimitError
)

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]

MAX_SERIES_TERMS = 10 ** 5


def default_group() -> GammaGroup:
    """Z^2 with degrees (2, 4) and rationally independent energies."""
    return GammaGroup(degree_hom=(2, 4), energy_hom=(1.0, math.sqrt(2.0)))


def _check_exponent(gamma: Exponent) -> Exponent:
    if any(abs(g) > Config.EXPONENT_BOUND for g in gamma):
        raise ResourceLimitError(f"exponent {gamma} exceeds the bound {Config.EXPONENT_BOUND}")
    return gamma


def make_element(group: GammaGroup, terms: Iterable[Iterable[int]] = (),
                 cutoff: float = -math.inf) -> NovikovElement:
    """Element with the given terms; repeated terms cancel in pairs."""
    kept = set()
    for term in terms:
        gamma = tuple(int(g) for g in term)
        if len(gamma) != group.rank:
            raise ValueError(f"exponent {gamma} does not have rank {group.rank}")
        _toggle(kept, _check_exponent(gamma))
    kept = {gamma for gamma in kept if group.energy(gamma) >= cutoff}
    return NovikovElement(group=group, terms=frozenset(kept), cutoff=cutoff)


def zero(group: GammaGroup) -> NovikovElement:
    return NovikovElement(group=group, terms=frozenset())


def one(group: GammaGroup) -> NovikovElement:
    return NovikovElement(group=group, terms=frozenset({group.identity()}))


def monomial(group: GammaGroup, gamma: Iterable[int]) -> NovikovElement:
    return make_element(group, [gamma])


def _same_group(a: NovikovElement, b: NovikovElement) -> GammaGroup:
    if a.group != b.group:
        raise GroupMismatchError(f"elements over {a.group} and {b.group}")
    return a.group


def _truncate(group: GammaGroup, terms: Iterable[Exponent], cutoff: float) -> NovikovElement:
    return NovikovElement(
        group=group,
        terms=frozenset(gamma for gamma in terms if group.energy(gamma) >= cutoff),
        cutoff=cutoff
    )


def _toggle(terms: set, gamma: Exponent) -> None:
    if gamma in terms:
        terms.remove(gamma)
    else:
        terms.add(gamma)


def _convolve(a_terms: Iterable[Exponent], b_terms: Iterable[Exponent]) -> set:
    product = set()
    b_terms = list(b_terms)
    for g in a_terms:
        for h in b_terms:
            _toggle(product, _check_exponent(tuple(x + y for x, y in zip(g, h))))
    return product


def nv_add(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    group = _same_group(a, b)
    cutoff = max(a.cutoff, b.cutoff)
    return _truncate(group, a.terms ^ b.terms, cutoff)


def nv_mul(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    """Convolution product; known only above the combined cutoff."""
    group = _same_group(a, b)
    cutoff = max(a.cutoff + b.leading_energy(), b.cutoff + a.leading_energy())
    if math.isnan(cutoff):
        cutoff = -math.inf
    return _truncate(group, _convolve(a.terms, b.terms), cutoff)


def leading_term(a: NovikovElement) -> Exponent:
    """The unique term of maximal energy."""
    if a.is_zero:
        raise NovikovZeroDivisionError("the zero element has no leading term")
    energies = a.energies()
    top = max(energies.values())
    leaders = [gamma for gamma, e in energies.items() if top - e <= Config.ENERGY_TOL]
    if len(leaders) > 1:
        raise EnergyDegeneracyError(f"terms {sorted(leaders)} share the maximal energy {top:.6g}")
    return leaders[0]


def energy_valuation(a: NovikovElement) -> float:
    return a.group.energy(leading_term(a))


def nv_component(a: NovikovElement, degree: int) -> NovikovElement:
    """Homogeneous component of the given degree."""
    return NovikovElement(
        group=a.group,
        terms=frozenset(gamma for gamma in a.terms if a.group.degree(gamma) == degree),
        cutoff=a.cutoff
    )


def is_homogeneous(a: NovikovElement) -> bool:
    return len(a.degrees()) <= 1


def nv_invert(a: NovikovElement, cutoff: Optional[float] = None) -> NovikovElement:
    """Inverse of a = g0 (1 + x) as g0^-1 (1 + x + x^2 + ...), truncated.

    ``cutoff`` bounds the energies of the returned terms; by default it lies
    ``NOVIKOV_DEPTH`` generator energies below -E(g0).
    """
    if a.is_zero:
        raise NovikovZeroDivisionError("cannot invert zero")
    group = a.group
    lead = leading_term(a)
    lead_energy = group.energy(lead)
    if cutoff is None:
        scale = max((abs(e) for e in group.energy_hom), default=1.0) or 1.0
        cutoff = -lead_energy - Config.NOVIKOV_DEPTH * scale
    if a.truncated:
        cutoff = max(cutoff, a.cutoff - 2.0 * lead_energy)

    inverse_lead = tuple(-g for g in lead)
    x = {tuple(g - h for g, h in zip(gamma, lead)) for gamma in a.terms if gamma != lead}
    # the series in x only matters down to this relative energy
    depth = cutoff + lead_energy

    series = {group.identity()}
    power = {group.identity()}
    for _ in range(MAX_SERIES_TERMS):
        power = {gamma for gamma in _convolve(power, x) if group.energy(gamma) >= depth}
        if not power:
            break
        series ^= power
    else:
        raise ResourceLimitError("geometric series did not terminate")

    result = _truncate(group, _convolve(series, [inverse_lead]), cutoff)
    logger.debug(f"Inverted element with {len(a.terms)} terms into {len(result.terms)} terms above {cutoff:.3f}")
    return result


def equal_above(a: NovikovElement, b: NovikovElement, cutoff: float) -> bool:
    group = _same_group(a, b)
    return {g for g in a.terms if group.energy(g) >= cutoff} == {g for g in b.terms if group.energy(g) >= cutoff}


def from_json(group: GammaGroup, data: Dict) -> NovikovElement:
    cutoff = data.get("cutoff")
    terms = []
    for entry in data.get("terms", []):
        exponent, coefficient = entry
        if int(coefficient) % 2:
            terms.append(exponent)
    return make_element(group, terms, -math.inf if cutoff is None else float(cutoff))


def _random_exponents(group: GammaGroup, rng: np.random.Generator, count: int, spread: int) -> List[Exponent]:
    exponents = set()
    while len(exponents) < count:
        exponents.add(tuple(int(v) for v in rng.integers(-spread, spread + 1, size=group.rank)))
    return sorted(exponents)


def random_invertible_element(group: GammaGroup, rng: np.random.Generator,
                              terms: int = 4, spread: int = 3) -> NovikovElement:
    """A random exact element with a unique leading term."""
    while True:
        a = make_element(group, _random_exponents(group, rng, terms, spread))
        try:
            leading_term(a)
        except EnergyDegeneracyError:
            continue
        return a


def random_homogeneous_element(group: GammaGroup, rng: np.random.Generator, degree: int,
                               terms: int = 3, spread: int = 6, attempts: int = 10000) -> NovikovElement:
    """A random element all of whose terms have the given degree."""
    exponents = set()
    for _ in range(attempts):
        gamma = tuple(int(v) for v in rng.integers(-spread, spread + 1, size=group.rank))
        if group.degree(gamma) == degree:
            exponents.add(gamma)
            if len(exponents) == terms:
                break
    if not exponents:
        raise ValueError(f"no exponent of degree {degree} found within spread {spread}")
    return make_element(group, sorted(exponents))


def novikov_selftest(group: GammaGroup, seed: int = Config.DEFAULT_SEED, samples: int = 100,
                     depth: float = 5.0) -> Dict:
    """Inversion round trips, ring axioms and grading additivity on random elements."""
    rng = np.random.default_rng(seed)
    unit = one(group)

    inversions_failed = 0
    for _ in range(samples):
        a = random_invertible_element(group, rng)
        product = nv_mul(a, nv_invert(a, cutoff=-energy_valuation(a) - depth))
        if not equal_above(product, unit, product.cutoff):
            inversions_failed += 1

    axioms_failed = 0
    for _ in range(max(1, samples // 4)):
        a, b, c = (random_invertible_element(group, rng) for _ in range(3))
        if nv_mul(a, b) != nv_mul(b, a) or nv_mul(nv_mul(a, b), c) != nv_mul(a, nv_mul(b, c)):
            axioms_failed += 1

    step = math.gcd(*group.degree_hom) if any(group.degree_hom) else 0
    grading_failed = 0
    for _ in range(samples):
        j, k = (int(v) * step for v in rng.integers(-3, 4, size=2))
        try:
            a = random_homogeneous_element(group, rng, j)
            b = random_homogeneous_element(group, rng, k)
        except ValueError:
            continue
        product = nv_mul(a, b)
        if not set(product.degrees()) <= {j + k}:
            grading_failed += 1

    passed = inversions_failed == 0 and axioms_failed == 0 and grading_failed == 0
    logger.info(f"Novikov self-test seed={seed}: {samples} inversions, "
                f"{inversions_failed} failed; grading failures {grading_failed}")
    return {
        "group": {"degree": list(group.degree_hom), "energy": list(group.energy_hom)},
        "seed": seed,
        "samples": samples,
        "inversions_failed": inversions_failed,
        "axioms_failed": axioms_failed,
        "grading_failed": grading_failed,
        "passed": passed
    }
