import numpy as np
import pytest

from algorithms import cascades
from algorithms.cascades import (
    CascadeSearch, check_trichotomy, classify_pair, contradicts_class, count_mod2, critical_levels,
    detect_broken, expected_moduli_dim, find_cascades, max_cascades, reverse_line, reversed_problem
)
from models.data_models import CascadeFlowLine, MorseBottProblem, PairClass, ScalarField, Trajectory
from sample_data import generate_euclidean, load_problem, point_submanifold


def along_axis(xs, dt=0.5, shift=0.0):
    """A one-cascade line moving along the x axis of the plane through the given abscissae."""
    xs = np.asarray(xs, dtype=float)
    points = np.stack([xs, np.zeros_like(xs)], axis=1)
    trajectory = Trajectory(times=shift + dt * np.arange(len(xs)), points=points,
                            speeds=np.ones(len(xs)), f_values=-xs)
    return CascadeFlowLine(source="a", target="c", m=1, cascades=[trajectory], times=[],
                           source_witness=points[0], target_witness=points[-1], morse_segments=[],
                           shooting_parameter=0.0, branch=(1,), miss=0.0)


@pytest.fixture
def three_points():
    return MorseBottProblem(
        name="three-points",
        manifold=generate_euclidean(2),
        f=ScalarField("-x", lambda x: -x[0], lambda x: np.array([-1.0, 0.0])),
        critical_submanifolds=[point_submanifold(name, [x, 0.0], ind_f=0)
                               for name, x in (("a", 0.0), ("b", 1.0), ("c", 2.0))]
    )


def test_pair_classes(s2_z2):
    north, saddle, bottom = (s2_z2.crit_point(label) for label in ("N", "E:s", "E:m"))
    assert classify_pair(north, saddle) is PairClass.POSITIVE_CASCADES_ONLY
    assert classify_pair(saddle, bottom) is PairClass.ZERO_CASCADES_ONLY
    assert classify_pair(bottom, north) is PairClass.EMPTY


def test_levels_and_cascade_bound(s2_z2, s2_height):
    assert critical_levels(s2_z2) == pytest.approx([1.0, 0.0])
    north, saddle = s2_z2.crit_point("N"), s2_z2.crit_point("E:s")
    assert max_cascades(s2_z2, north, saddle) == 1
    assert max_cascades(s2_z2, saddle, s2_z2.crit_point("E:m")) == 0
    assert expected_moduli_dim(s2_height.crit_point("N"), s2_height.crit_point("S")) == 1


def test_reversed_problem_flips_indices(s2_z2):
    backwards = reversed_problem(s2_z2)
    assert backwards.submanifold("N").ind_f == 0
    assert backwards.submanifold("E").ind_f == 1
    assert backwards.crit_point("E:s").ind_h == 0
    assert backwards.crit_point("E:m").ind_h == 1
    assert backwards.f(s2_z2.crit_point("N").point) == pytest.approx(-1.0)
    assert [c.total_index for c in backwards.crit_points()] == \
        [2 - c.total_index for c in s2_z2.crit_points()]


def test_count_requires_index_difference_one(s2_z2, search):
    with pytest.raises(ValueError):
        count_mod2(s2_z2, s2_z2.crit_point("N"), s2_z2.crit_point("E:m"), search)


def test_negative_cascade_number(s2_z2, search):
    with pytest.raises(ValueError):
        find_cascades(s2_z2, s2_z2.crit_point("N"), s2_z2.crit_point("E:s"), -1, search)


def test_short_circuits(s2_z2, search):
    # index too low for a nonempty moduli space
    assert find_cascades(s2_z2, s2_z2.crit_point("E:m"), s2_z2.crit_point("N"), 1, search) == []
    # zero cascades never leave a critical submanifold
    assert find_cascades(s2_z2, s2_z2.crit_point("N"), s2_z2.crit_point("E:s"), 0, search) == []


@pytest.mark.slow
def test_saddle_to_minimum_inside_the_equator(s2_z2, search):
    lines = find_cascades(s2_z2, s2_z2.crit_point("E:s"), s2_z2.crit_point("E:m"), 0, search)
    assert len(lines) == 2
    assert all(line.m == 0 and not line.broken for line in lines)
    turned = reverse_line(lines[0])
    assert (turned.source, turned.target) == (lines[0].target, lines[0].source)


@pytest.mark.slow
def test_pole_to_saddle_counts_once(s2_z2, search):
    assert count_mod2(s2_z2, s2_z2.crit_point("N"), s2_z2.crit_point("E:s"), search) == 1
    assert count_mod2(s2_z2, s2_z2.crit_point("E:s"), s2_z2.crit_point("E:m"), search) == 0


@pytest.mark.slow
@pytest.mark.parametrize("name", ["s2-height", "s2-z2", "t2-cos", "t2-morse"])
def test_trichotomy(name, search):
    report = check_trichotomy(load_problem(name), search)
    assert report["passed"], report["violations"]
    assert report["checked"] + len(report["skipped"]) > 0


def test_dwell_near_an_intermediate_set_marks_a_broken_line(three_points, search):
    stalled = along_axis(np.concatenate([np.linspace(0.0, 1.0, 11), np.ones(40), np.linspace(1.0, 2.0, 11)[1:]]))
    broken, dwell = detect_broken(three_points, stalled, search)
    assert broken
    assert dwell == pytest.approx(20.0)

    direct = along_axis(np.linspace(0.0, 2.0, 21))
    assert detect_broken(three_points, direct, search) == (False, 0.0)


def test_broken_lines_do_not_count(s2_z2, search, monkeypatch):
    north, saddle = s2_z2.crit_point("N"), s2_z2.crit_point("E:s")
    good = along_axis(np.linspace(0.0, 2.0, 21))
    bad = along_axis(np.linspace(0.0, 2.0, 21))
    bad.broken = True
    found = {1: [bad, good]}
    monkeypatch.setattr(cascades, "find_cascades", lambda problem, c1, c2, m, search: found.get(m, []))
    assert count_mod2(s2_z2, north, saddle, search) == 1
    found[1] = [good, bad, good]
    assert count_mod2(s2_z2, north, saddle, search) == 0


def test_time_shift_keeps_the_fingerprint(search):
    line = along_axis(np.linspace(0.0, 2.0, 2001))
    shifted = along_axis(np.linspace(0.0, 2.0, 4001), dt=0.25, shift=7.5)
    assert np.linalg.norm(line.fingerprint() - shifted.fingerprint()) < search.dedup_radius
    other = along_axis(np.linspace(0.0, 1.5, 2001))
    assert np.linalg.norm(line.fingerprint() - other.fingerprint()) > search.dedup_radius


@pytest.mark.parametrize("m", [0, 1])
def test_search_below_expected_dimension_finds_nothing(s2_z2, search, m):
    bottom, saddle = s2_z2.crit_point("E:m"), s2_z2.crit_point("E:s")
    assert expected_moduli_dim(bottom, saddle) < 0
    assert CascadeSearch(s2_z2, bottom, saddle, m, search).run() == []


def test_contradicting_classes():
    assert contradicts_class(PairClass.EMPTY, 0)
    assert contradicts_class(PairClass.ZERO_CASCADES_ONLY, 1)
    assert not contradicts_class(PairClass.ZERO_CASCADES_ONLY, 0)
    assert contradicts_class(PairClass.POSITIVE_CASCADES_ONLY, 0)
    assert not contradicts_class(PairClass.POSITIVE_CASCADES_ONLY, 2)
