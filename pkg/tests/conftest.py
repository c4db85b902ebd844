import numpy as np
import pytest

from robustsub import KernelMatrix, LabeledBinaryDataset, LogDetOracle


def random_logdet(n, seed, dim=4, clustered=False):
    """Random PSD log-det instance; ``clustered`` plants near-duplicates."""
    rng = np.random.default_rng(seed)
    if clustered:
        base = rng.normal(size=dim)
        X = np.vstack([base + 0.05 * rng.normal(size=(n - 3, dim)), rng.normal(size=(3, dim))])
        X = X[rng.permutation(n)]
    else:
        X = rng.normal(size=(n, dim)) * rng.uniform(0.3, 1.5, size=(n, 1))
    K = X @ X.T
    return LogDetOracle(KernelMatrix.explicit(0.5 * (K + K.T)))


def random_binary_dataset(rows, features, seed, classes=2):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, classes, size=rows)
    p = rng.uniform(0.1, 0.9, size=(classes, features))
    X = (rng.random((rows, features)) < p[y]).astype(np.uint8)
    return LabeledBinaryDataset(X, y)


@pytest.fixture
def logdet_small():
    return random_logdet(12, 0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
