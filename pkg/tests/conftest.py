"""Shared builders for randomized test instances."""

import numpy as np
import pytest

from mmdadapt.data import DomainPair, LabeledDataset, one_hot_encode


def random_pair(rng, n_s=None, n_t=None, C=None, d=None, ensure_all_classes=True):
    """A random labeled pair; every class present in both domains by default."""
    C = C or int(rng.integers(2, 5))
    d = d or int(rng.integers(1, 11))
    n_s = n_s or int(rng.integers(C, 31))
    n_t = n_t or int(rng.integers(C, 31))
    ys = rng.integers(1, C + 1, size=n_s)
    yt = rng.integers(1, C + 1, size=n_t)
    if ensure_all_classes:
        ys[:C] = np.arange(1, C + 1)
        yt[:C] = np.arange(1, C + 1)
    return DomainPair(
        source=LabeledDataset(X=rng.normal(size=(d, n_s)), y=ys, class_count=C),
        target=LabeledDataset(X=rng.normal(size=(d, n_t)), y=yt, class_count=C),
    )


def random_onehots(rng, pair):
    return (
        one_hot_encode(pair.source.y, pair.source.class_count),
        one_hot_encode(pair.target.y, pair.target.class_count),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)
