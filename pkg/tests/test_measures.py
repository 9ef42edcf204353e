import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderipm.errors import DataError, SizeError, UnsupportedSmoothnessError
from holderipm.measures import (
    DiscreteMeasure,
    MeasureKind,
    NormChoice,
    check_alpha,
    cost_matrix,
    derive_seed,
    grid_measure,
    measure_to_csv,
    merge_atoms,
    read_measure_csv,
    sample_empirical,
    signed_difference,
)


def test_grid_1d_two_points():
    g = grid_measure(1, 2)
    assert np.allclose(g.points.ravel(), [0.25, 0.75])
    assert np.allclose(g.weights, [0.5, 0.5])


def test_grid_2d_four_atoms():
    g = grid_measure(2, 2)
    assert len(g) == 4
    assert np.allclose(g.weights, 0.25)


def test_grid_3d_mass():
    g = grid_measure(3, 16)
    assert len(g) == 4096
    assert abs(g.weights.sum() - 1.0) < 1e-12


def test_grid_cap():
    with pytest.raises(SizeError) as err:
        grid_measure(2, 300)
    assert err.value.size == 90000


def test_measure_rejects_bad_weights():
    with pytest.raises(DataError):
        DiscreteMeasure(np.array([[0.1], [0.2]]), np.array([0.5, 0.6]))
    with pytest.raises(DataError):
        DiscreteMeasure(np.array([[0.1], [0.2]]), np.array([1.5, -0.5]))
    with pytest.raises(DataError):
        DiscreteMeasure(np.array([[1.2]]), np.array([1.0]))
    with pytest.raises(DataError):
        DiscreteMeasure(np.array([[0.1], [0.2]]), np.array([1.0, 1.0]), MeasureKind.SIGNED)


def test_measure_arrays_are_read_only():
    g = grid_measure(1, 4)
    with pytest.raises(ValueError):
        g.weights[0] = 1.0


def test_sampling_deterministic():
    g = grid_measure(2, 8)
    a = sample_empirical(g, 50, seed=7)
    b = sample_empirical(g, 50, seed=7)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sample_empirical(g, 50, seed=8).points)
    assert np.allclose(a.weights, 1 / 50)


def test_sampling_from_dirac():
    s = sample_empirical(DiscreteMeasure.dirac([0.3, 0.4]), 10, seed=1)
    assert np.allclose(s.points, [[0.3, 0.4]])


def test_derive_seed_stable_and_distinct():
    assert derive_seed(5, ("rate", 16, 0)) == derive_seed(5, ("rate", 16, 0))
    seeds = {derive_seed(5, ("rate", n, r)) for n in (16, 32) for r in range(50)}
    assert len(seeds) == 100


def test_cost_matrix_norms():
    pts = np.array([[0.0, 0.0], [0.3, 0.4]])
    assert cost_matrix(pts, NormChoice.L2, 1.0)[0, 1] == pytest.approx(0.5)
    assert cost_matrix(pts, "max-coordinate", 1.0)[0, 1] == pytest.approx(0.4)
    assert cost_matrix(pts, "euclidean", 0.5)[0, 1] == pytest.approx(0.5**0.5)
    assert np.all(np.diag(cost_matrix(pts, "l2", 1.0)) == 0)


def test_check_alpha():
    assert check_alpha(1) == 1.0
    with pytest.raises(UnsupportedSmoothnessError):
        check_alpha(1.5)
    with pytest.raises(ValueError):
        check_alpha(0.0)


def test_norm_parse_aliases():
    assert NormChoice.parse("euclidean") is NormChoice.L2
    assert NormChoice.parse("max") is NormChoice.LINF
    with pytest.raises(ValueError):
        NormChoice.parse("l1")


def test_signed_difference_merges_shared_atoms():
    p = DiscreteMeasure(np.array([[0.1], [0.5]]), np.array([0.5, 0.5]))
    q = DiscreteMeasure(np.array([[0.5], [0.9]]), np.array([0.5, 0.5]))
    pts, w = signed_difference(p, q)
    got = dict(zip(pts.ravel().tolist(), w.tolist()))
    assert got[0.1] == pytest.approx(0.5)
    assert got[0.5] == pytest.approx(0.0)
    assert got[0.9] == pytest.approx(-0.5)


def test_csv_round_trip(tmp_path):
    g = sample_empirical(grid_measure(2, 5), 7, seed=3)
    path = tmp_path / "m.csv"
    path.write_text(measure_to_csv(g))
    back = read_measure_csv(path)
    assert np.array_equal(back.points, g.points)
    assert np.array_equal(back.weights, g.weights)


def test_csv_bad_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("a,b\n0.1,1\n")
    with pytest.raises(DataError):
        read_measure_csv(path)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=30))
def test_merge_atoms_preserves_mass(idx):
    pts = np.array(idx, dtype=float)[:, None] / 4
    w = np.linspace(1, 2, len(idx))
    merged, mw, inverse = merge_atoms(pts, w)
    assert len(np.unique(merged, axis=0)) == len(merged)
    assert mw.sum() == pytest.approx(w.sum())
    assert np.array_equal(merged[inverse], pts)
