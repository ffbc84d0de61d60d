import math

import numpy as np
import pytest

from algorithms.involutions import (
    RADICAL_SPECTRA, build_HD, build_I1, build_Ik_full, build_Lk, closed_form_spectrum,
    determinant_table, eigenspace_basis, fixed_set_ladder, involution_residuals, Lk_squared_spectrum,
    sign_matrix, spectrum_independence, twisted_shift, verify_involutions, verify_lemma
)
from models.data_models import PathGrid
from models.exceptions import GridError


def test_closed_forms_agree():
    for k, radicals in RADICAL_SPECTRA.items():
        np.testing.assert_allclose(closed_form_spectrum(k), sorted(radicals), atol=1e-12)


@pytest.mark.parametrize("n, N", [(1, 32), (2, 64), (1, 128), (2, 32)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_Lk_squared_spectrum(n, N, k):
    observed = Lk_squared_spectrum(PathGrid(N, n), k)
    np.testing.assert_allclose(observed, closed_form_spectrum(k), atol=1e-8)


def test_first_spectra_values():
    assert Lk_squared_spectrum(PathGrid(32), 1) == pytest.approx([2.0])
    assert Lk_squared_spectrum(PathGrid(32), 2) == pytest.approx([4 - 2 * math.sqrt(2), 4 + 2 * math.sqrt(2)])


def test_twisted_shift_wraps_with_sign():
    T = twisted_shift(4, 1)
    assert T[0, 1] == 1.0 and T[3, 0] == -1.0
    np.testing.assert_array_equal(np.linalg.matrix_power(T, 4), -np.eye(4))


def test_I1_is_an_involution():
    grid = PathGrid(16, 2)
    I1 = build_I1(grid).matrix
    np.testing.assert_array_equal(I1 @ I1, np.eye(grid.dim))
    assert eigenspace_basis(grid, -1).shape == (grid.dim, grid.dim // 2)


def test_lemma_residuals():
    report = verify_lemma(PathGrid(64), 3)
    assert report["passed"]
    for name, value in report["residuals"].items():
        limit = 1e-10 if name.startswith("square_recursion") else 1e-9
        assert value < limit, name
    assert all(s > 0.5 for s in report["min_singular_values"].values())


def test_L0_is_identity():
    grid = PathGrid(8)
    np.testing.assert_array_equal(build_Lk(grid, 0).matrix, np.eye(grid.dim))


def test_grid_guards():
    with pytest.raises(GridError):
        PathGrid(48)
    with pytest.raises(GridError):
        verify_lemma(PathGrid(32), 5)
    with pytest.raises(GridError):
        build_Lk(PathGrid(8), 3)


def test_involution_residuals():
    residuals = involution_residuals(PathGrid(64), 3)
    for name in ("I1^2", "H o D", "I2-^2", "I3-^2", "I2+^2", "I3+^2", "[I3-, I2-]"):
        assert residuals[name] < 1e-9, name
    assert max(residuals.values()) < 1e-9


def test_H_after_D_is_identity():
    grid = PathGrid(16, 1)
    H, D = build_HD(grid)
    np.testing.assert_array_equal(H.matrix @ D.matrix, np.eye(grid.half().dim))


def test_full_operator_is_an_involution():
    grid = PathGrid(32)
    I3 = build_Ik_full(grid, 3).matrix
    np.testing.assert_allclose(I3 @ I3, np.eye(grid.dim), atol=1e-9)


def test_sign_matrix_determinants():
    rows = determinant_table(3)
    assert len(rows) == 15
    observed = {row["k"]: row["observed"] for row in rows}
    assert observed == {1: 2.0, 2: 8.0, 3: 128.0}
    assert all(row["passed"] for row in rows)
    assert not any(row["matches_claim"] for row in rows)
    assert rows[-1]["claimed"] == 256.0


def test_sign_matrix_entries_are_signs():
    A = sign_matrix(2, 0.1)
    assert set(np.unique(A)) <= {-1.0, 1.0}


def test_fixed_set_ladder_halves_to_constants():
    ladder = fixed_set_ladder(PathGrid(16))
    assert [d["dim"] for d in ladder["dims"]] == [16, 8, 4, 2, 1]
    assert ladder["acts_freely"]


def test_spectrum_independence():
    assert spectrum_independence(3)["passed"]


def test_full_report():
    report = verify_involutions(PathGrid(32), 3)
    assert report["passed"]
    assert report["ladder"]["final_dim"] == 1
