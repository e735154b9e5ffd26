import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nlselect.data import (DataError, Dataset, load_dataset, pearson_correlation, standardize,
                           variable_set, write_dataset)


def _write(path, text):
    path.write_text(text)
    return path


def test_load_three_by_two(tmp_path):
    x = _write(tmp_path / "X.csv", "a,b\n1,2\n3,5\n4,4\n")
    y = _write(tmp_path / "y.csv", "y\n0\n1\n1\n")
    ds = load_dataset(x, y)
    assert (ds.n, ds.p) == (3, 2)
    assert ds.names == ("a", "b")
    np.testing.assert_array_equal(ds.y, [0, 1, 1])


def test_outcome_as_named_column(tmp_path):
    x = _write(tmp_path / "X.csv", "a,case,b\n1,0,2\n3,1,5\n4,1,4\n")
    ds = load_dataset(x, "case")
    assert ds.names == ("a", "b")
    np.testing.assert_array_equal(ds.y, [0, 1, 1])


def test_non_binary_outcome(tmp_path):
    x = _write(tmp_path / "X.csv", "a\n1\n2\n3\n")
    y = _write(tmp_path / "y.csv", "y\n0\n2\n1\n")
    with pytest.raises(DataError, match="non-binary outcome"):
        load_dataset(x, y)


def test_constant_column_named(tmp_path):
    x = _write(tmp_path / "X.csv", "a,zero\n1,0\n2,0\n3,0\n")
    y = _write(tmp_path / "y.csv", "y\n0\n1\n1\n")
    with pytest.raises(DataError, match="constant column 'zero'"):
        load_dataset(x, y)


def test_dimension_mismatch(tmp_path):
    x = _write(tmp_path / "X.csv", "a\n1\n2\n3\n")
    y = _write(tmp_path / "y.csv", "y\n0\n1\n")
    with pytest.raises(DataError, match="dimension mismatch"):
        load_dataset(x, y)


def test_unparseable_cell(tmp_path):
    x = _write(tmp_path / "X.csv", "a,b\n1,2\n3,oops\n4,4\n")
    y = _write(tmp_path / "y.csv", "y\n0\n1\n1\n")
    with pytest.raises(DataError, match="unparseable cell 'oops' in column 'b'"):
        load_dataset(x, y)


def test_non_finite_rejected():
    with pytest.raises(DataError, match="non-finite value in column 'V1'"):
        Dataset(np.array([[1.0, 2.0], [2.0, np.inf], [3.0, 1.0]]), np.array([0, 1, 1]))


def test_single_class_rejected():
    with pytest.raises(DataError, match="both classes"):
        Dataset(np.array([[1.0], [2.0]]), np.array([1, 1]))


def test_dataset_is_read_only():
    ds = Dataset(np.array([[1.0], [2.0], [4.0]]), np.array([0, 1, 0]))
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


def test_variable_set_sorted_and_unique():
    assert variable_set([3, 1, 2]) == (1, 2, 3)
    with pytest.raises(ValueError):
        variable_set([1, 1])
    with pytest.raises(ValueError):
        variable_set([5], p=3)


def test_standardize_simple_column():
    ds = Dataset(np.array([[1.0], [2.0], [3.0]]), np.array([0, 1, 0]))
    np.testing.assert_allclose(standardize(ds).X[:, 0], [-1.0, 0.0, 1.0], atol=1e-15)


def test_standardize_moments_recomputed():
    ds = standardize(Dataset(np.array([[10.0], [20.0], [40.0]]), np.array([0, 1, 1])))
    col = ds.X[:, 0]
    assert abs(sum(col) / 3) < 1e-12
    assert abs(np.sqrt(sum(v * v for v in col) / 2) - 1) < 1e-12
    assert ds.standardized
    np.testing.assert_array_equal(ds.y, [0, 1, 1])


def _finite_matrix():
    return arrays(np.float64, (8, 3), elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(_finite_matrix())
def test_standardize_idempotent(X):
    if np.any(np.ptp(X, axis=0) < 1e-3):
        return
    y = np.array([0, 1] * 4)
    once = standardize(Dataset(X, y))
    twice = standardize(Dataset(once.X.copy(), y))
    np.testing.assert_allclose(twice.X, once.X, atol=1e-12)


def test_pearson_self_and_anti():
    ds = Dataset(np.array([[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]]), np.array([0, 1, 0]))
    assert pearson_correlation(ds, 0, 0) == 1.0
    assert pearson_correlation(ds, 0, 1) == pytest.approx(-1.0, abs=1e-15)


def test_pearson_matches_direct_formula():
    a, b = [1.0, 2.0, 3.0, 4.0], [1.0, 3.0, 2.0, 4.0]
    ma, mb = sum(a) / 4, sum(b) / 4
    cov = sum((u - ma) * (v - mb) for u, v in zip(a, b))
    oracle = cov / np.sqrt(sum((u - ma) ** 2 for u in a) * sum((v - mb) ** 2 for v in b))
    ds = Dataset(np.column_stack([a, b]), np.array([0, 1, 0, 1]))
    assert pearson_correlation(ds, 0, 1) == pytest.approx(oracle, abs=1e-14)
    assert oracle == pytest.approx(0.8)


@settings(max_examples=60, deadline=None)
@given(_finite_matrix())
def test_pearson_symmetric_and_bounded(X):
    if np.any(np.ptp(X, axis=0) < 1e-3):
        return
    ds = Dataset(X, np.array([0, 1] * 4))
    for j in range(3):
        for l in range(3):
            r = pearson_correlation(ds, j, l)
            assert r == pearson_correlation(ds, l, j)
            assert abs(r) <= 1 + 1e-12


def test_csv_round_trip_after_standardize(tmp_path):
    rng = np.random.default_rng(0)
    ds = Dataset(rng.normal(size=(20, 4)) * 7 + 3, rng.integers(0, 2, 20))
    write_dataset(ds, tmp_path / "X.csv", tmp_path / "y.csv")
    loaded = load_dataset(tmp_path / "X.csv", tmp_path / "y.csv")
    std = standardize(loaded)
    write_dataset(std, tmp_path / "Xs.csv", tmp_path / "ys.csv")
    again = load_dataset(tmp_path / "Xs.csv", tmp_path / "ys.csv")
    np.testing.assert_allclose(again.X, std.X, atol=1e-9)
    np.testing.assert_allclose(loaded.X, ds.X, atol=1e-9)
    np.testing.assert_array_equal(again.y, ds.y)
