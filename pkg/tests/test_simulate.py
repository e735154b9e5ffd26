import numpy as np
import pytest
from scipy.stats import chi2

from nlselect.data import DataError
from nlselect.simulate import (SimSpec, read_truth, sample_causal_effects, simulate,
                               simulate_genotypes, simulate_phenotype, write_truth)


def test_uncorrelated_when_rho_zero():
    X = simulate_genotypes(SimSpec(n=2000, p=40, rho=0.0, seed=1))
    C = np.corrcoef(X.T)
    off = C[~np.eye(40, dtype=bool)]
    assert abs(off.mean()) < 0.01
    assert np.max(np.abs(off)) < 0.15


def test_strong_adjacent_correlation():
    spec = SimSpec(n=2000, p=30, rho=0.9, block_size=10, maf_range=(0.3, 0.5), seed=2)
    X = simulate_genotypes(spec)
    for b in range(3):
        for j in range(b * 10, b * 10 + 9):
            assert np.corrcoef(X[:, j], X[:, j + 1])[0, 1] > 0.5


def test_values_and_allele_frequency():
    spec = SimSpec(n=2000, p=50, maf_range=(0.1, 0.3), seed=3)
    X = simulate_genotypes(spec)
    assert set(np.unique(X)) <= {0.0, 1.0, 2.0}
    f = X.mean(axis=0) / 2
    assert np.all(f >= 0.1 - 0.05) and np.all(f <= 0.3 + 0.05)


def test_hardy_weinberg():
    X = simulate_genotypes(SimSpec(n=2000, p=200, seed=4))
    ok = 0
    for col in X.T:
        counts = np.array([(col == g).sum() for g in (0, 1, 2)])
        f = (counts[1] + 2 * counts[2]) / (2 * 2000)
        exp = 2000 * np.array([(1 - f) ** 2, 2 * f * (1 - f), f * f])
        stat = np.sum((counts - exp) ** 2 / exp)
        ok += chi2.sf(stat, df=1) >= 0.001
    assert ok >= 0.95 * 200


def test_block_boundaries_independent():
    X = simulate_genotypes(SimSpec(n=2000, p=20, rho=0.9, block_size=10, maf_range=(0.3, 0.5), seed=5))
    assert abs(np.corrcoef(X[:, 9], X[:, 10])[0, 1]) < 0.1


def test_pipeline_deterministic():
    spec = SimSpec(n=100, p=30, n_causal=3, seed=6)
    a, b = simulate(spec), simulate(spec)
    for u, v in zip(a, b):
        assert np.array_equal(np.asarray(u), np.asarray(v))
    other = simulate(SimSpec(n=100, p=30, n_causal=3, seed=7))
    assert not np.array_equal(a[0], other[0])


def test_zero_effects_balanced():
    X = simulate_genotypes(SimSpec(n=4000, p=3, n_causal=0, seed=8))
    y = simulate_phenotype(X, [0, 1], [0.0, 0.0], seed=8)
    assert abs(y.mean() - 0.5) < 3 / np.sqrt(4000)


def test_saturated_effect_tracks_genotype():
    # rare allele: the column is nearly a carrier indicator
    X = simulate_genotypes(SimSpec(n=1000, p=2, maf_range=(0.05, 0.05), n_causal=0, seed=9))
    y = simulate_phenotype(X, [0], [10.0], seed=9)
    carrier = X[:, 0] >= 1
    assert np.mean(y[carrier]) > 0.99
    assert np.mean(y == carrier) > 0.9


def test_phenotype_seeded():
    X = simulate_genotypes(SimSpec(n=200, p=5, n_causal=0, seed=1))
    a = simulate_phenotype(X, [1], [1.0], seed=3)
    assert np.array_equal(a, simulate_phenotype(X, [1], [1.0], seed=3))
    with pytest.raises(ValueError):
        simulate_phenotype(X, [1, 2], [1.0], seed=3)


def test_causal_sampling_edges():
    idx, eff = sample_causal_effects(SimSpec(n=10, p=12, n_causal=12, seed=1))
    assert idx == tuple(range(12))
    _, eff0 = sample_causal_effects(SimSpec(n=10, p=12, n_causal=4, effect_sd=0.0, seed=1))
    assert np.all(eff0 == 0)
    a = sample_causal_effects(SimSpec(n=10, p=100, n_causal=5, seed=2))
    b = sample_causal_effects(SimSpec(n=10, p=100, n_causal=5, seed=2))
    assert a[0] == b[0] and np.array_equal(a[1], b[1])


def test_min_effect_floor():
    _, eff = sample_causal_effects(SimSpec(n=10, p=100, n_causal=20, min_effect=1.0, seed=3))
    assert np.all(np.abs(eff) >= 1.0)


@pytest.mark.parametrize("kw", [dict(maf_range=(0.3, 0.2)), dict(maf_range=(0, 0.2)),
                                dict(rho=1.0), dict(block_size=0), dict(n_causal=30, p=10)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SimSpec(**kw)


def test_redraw_exhaustion():
    with pytest.raises(RuntimeError, match="redraws"):
        simulate_genotypes(SimSpec(n=2, p=3, maf_range=(0.01, 0.01), n_causal=0, seed=0))


def test_truth_round_trip(tmp_path):
    write_truth(tmp_path / "t.csv", (3, 9), np.array([0.25, -1.5]))
    idx, eff = read_truth(tmp_path / "t.csv")
    assert idx == (3, 9)
    np.testing.assert_array_equal(eff, [0.25, -1.5])
    (tmp_path / "bad.csv").write_text("index,effect\nx,1\n")
    with pytest.raises(DataError):
        read_truth(tmp_path / "bad.csv")
