import numpy as np
import pytest

from nlselect.data import Dataset, standardize
from nlselect.simulate import SimSpec, simulate_genotypes, simulate_phenotype


def logistic_data(n, effects, seed, p_noise=0, offset=0.0):
    """Gaussian design with the first len(effects) columns causal."""
    rng = np.random.default_rng(seed)
    k = len(effects)
    X = rng.standard_normal((n, k + p_noise))
    eta = offset + X[:, :k] @ np.asarray(effects, dtype=float)
    y = (rng.uniform(size=n) < 1 / (1 + np.exp(-eta))).astype(float)
    return standardize(Dataset(X, y))


def genotype_data(n, p, seed, causal=(), effects=(), block_size=10, rho=0.5):
    spec = SimSpec(n=n, p=p, block_size=block_size, rho=rho, n_causal=0, seed=seed)
    X = simulate_genotypes(spec)
    y = simulate_phenotype(X, causal, effects, seed)
    return Dataset(X, y)


@pytest.fixture
def small_ds():
    return logistic_data(200, [1.0, -0.8], seed=11, p_noise=4)


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    """Print and keep one PASS/FAIL line; the assertion is left to the caller."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
