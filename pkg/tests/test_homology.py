import numpy as np
import pytest

from algorithms.homology import (
    betti, build_complex, compare_quadruples, complex_from_counts, complex_to_dict,
    euler_characteristic, gf2_rank, gf2_row_echelon, verify_d_squared
)
from models.data_models import CritPoint
from models.exceptions import DSquaredError, NotMorseBottError
from sample_data import COMPARISONS, EXPECTED_BETTI, load_problem


@pytest.mark.parametrize("matrix, rank", [
    ([[1, 1], [1, 1]], 1),
    (np.eye(3), 3),
    (np.zeros((2, 3)), 0),
    ([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 2),
    (np.zeros((0, 4)), 0),
])
def test_gf2_rank(matrix, rank):
    assert gf2_rank(matrix) == rank


def test_row_echelon_pivots():
    R, pivots = gf2_row_echelon([[0, 1, 1], [1, 1, 0], [1, 0, 1]])
    assert pivots == [0, 1]
    assert not R[2].any()


def test_row_echelon_across_packed_bytes():
    M = np.zeros((3, 20), dtype=np.uint8)
    M[0, [0, 9]] = 1
    M[1, [9, 17]] = 1
    M[2, [0, 17]] = 1
    R, pivots = gf2_row_echelon(M)
    assert R.shape == (3, 20)
    assert pivots == [0, 9]
    assert R[0].tolist() == M[0].tolist()
    assert not R[2].any()
    assert gf2_rank(np.eye(20)) == 20


def generator(label, idx):
    return CritPoint(submanifold=label, label=label, point=np.zeros(1), params=np.zeros(0),
                     ind_f=idx, ind_h=0, f_value=float(idx))


SQUARE = [generator("a", 2), generator("b", 1), generator("c", 1), generator("d", 0)]
VALID = {("a", "b"): 1, ("a", "c"): 1, ("b", "d"): 1, ("c", "d"): 1}


def test_acyclic_square():
    cx = complex_from_counts(SQUARE, VALID, 2)
    assert verify_d_squared(cx)
    assert betti(cx) == [0, 0, 0]
    assert euler_characteristic(cx) == 0


def test_even_counts_vanish():
    counts = {**VALID, ("a", "b"): 2, ("a", "c"): 2}
    assert betti(complex_from_counts(SQUARE, counts, 2)) == [0, 1, 1]


def test_broken_boundary_is_reported():
    counts = {("a", "b"): 1, ("b", "d"): 1, ("c", "d"): 1}
    cx = complex_from_counts(SQUARE, counts, 2)
    assert not verify_d_squared(cx)
    with pytest.raises(DSquaredError):
        betti(cx)
    report = complex_to_dict(cx)
    assert report["betti"] is None and not report["d_squared_ok"]


def test_zero_boundary():
    assert betti(complex_from_counts(SQUARE, {}, 2)) == [1, 2, 1]


def test_generator_order_does_not_matter():
    shuffled = [SQUARE[2], SQUARE[0], SQUARE[3], SQUARE[1]]
    assert betti(complex_from_counts(shuffled, VALID, 2)) == betti(complex_from_counts(SQUARE, VALID, 2))


def test_degenerate_problem_is_rejected(search):
    with pytest.raises(NotMorseBottError):
        build_complex(load_problem("r1-x4"), search)


def test_complex_with_given_counts(s2_z2, t2_cos, search):
    edges = {("N", "E:s"): 1, ("S", "E:s"): 1}
    cx = build_complex(s2_z2, search, counter=lambda p, c1, c2, s: edges.get((c1.label, c2.label), 0))
    assert betti(cx) == [1, 0, 1]
    assert complex_to_dict(cx)["boundary"] == [[2, "N", "E:s"], [2, "S", "E:s"]]

    cx = build_complex(t2_cos, search, counter=lambda *args: 0)
    assert betti(cx) == [1, 2, 1]
    assert euler_characteristic(cx) == 0


def test_sphere_height_needs_no_search(s2_height, search):
    # no pair differs in index by one, so the complex has no boundary
    cx = build_complex(s2_height, search)
    assert betti(cx) == EXPECTED_BETTI["s2-height"]
    assert euler_characteristic(cx) == 2


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(EXPECTED_BETTI))
def test_betti_numbers(name, search):
    assert betti(build_complex(load_problem(name), search)) == EXPECTED_BETTI[name]


@pytest.mark.slow
@pytest.mark.parametrize("first, second", COMPARISONS)
def test_compare_quadruples(first, second, search):
    assert compare_quadruples(load_problem(first), load_problem(second), search)


def test_compare_needs_one_manifold(s2_height, t2_cos, search):
    with pytest.raises(ValueError):
        compare_quadruples(s2_height, t2_cos, search)
