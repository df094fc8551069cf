"""Nearest-neighbor scoring used for pseudo-labels and final accuracy."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def knn1_predict(train_X: np.ndarray, train_y: np.ndarray, test_X: np.ndarray) -> np.ndarray:
    """1-NN labels under squared Euclidean distance.

    Ties go to the smallest training index, which anchors determinism.
    Matrices are column-per-sample.
    """
    train_X = np.asarray(train_X, dtype=float)
    test_X = np.asarray(test_X, dtype=float)
    train_y = np.asarray(train_y)
    if train_X.shape[1] == 0:
        raise DataError("empty training set")
    if train_X.shape[0] != test_X.shape[0]:
        raise DataError("train and test feature dimensions differ")
    out = np.empty(test_X.shape[1], dtype=train_y.dtype)
    for j in range(test_X.shape[1]):
        diff = train_X - test_X[:, j : j + 1]
        d = np.sum(diff * diff, axis=0)
        out[j] = train_y[int(np.argmin(d))]  # argmin takes the first minimum
    return out


def accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of matching labels."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DataError("prediction and truth lengths differ")
    if pred.size == 0:
        raise DataError("cannot score an empty prediction")
    return float(np.mean(pred == truth))
