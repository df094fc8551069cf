"""Weighted and joint-probability MMD matrices.

All builders return n x n symmetric PSD matrices over the stacked sample
order [source columns | target columns]. The joint-probability discrepancy
splits into a same-class term (R_min, to be minimized) and a cross-class
term (R_max, to be maximized); both are assembled from thin class-indicator
factors so the PSD structure is exact by construction.

Class-mean normalizers here are the full domain sizes n_s and n_t, not the
per-class counts. That is what makes these joint-probability terms: each
class is implicitly weighted by its empirical prior. The conditional
matrices (per-class normalizers) are kept separate for the classic
marginal+conditional solvers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import DomainPair, class_counts
from .errors import DataError


@dataclass
class JointProbFactors:
    """Thin factors of the joint-probability discrepancy matrices.

    Ns, Nt: class indicators scaled by 1/n_s, 1/n_t (shape n_s x C, n_t x C).
    Fs: each indicator column repeated C-1 times, scaled by 1/n_s
        (shape n_s x C(C-1)).
    Ft: C blocks, block c being the target indicator matrix with column c
        deleted (remaining columns in ascending order), scaled by 1/n_t.
    """

    Ns: np.ndarray
    Nt: np.ndarray
    Fs: np.ndarray
    Ft: np.ndarray
    class_count: int


def build_joint_prob_factors(Ys: np.ndarray, Yt_pseudo: np.ndarray) -> JointProbFactors:
    """Build the class-indicator factors for R_min and R_max."""
    Ys = np.asarray(Ys, dtype=float)
    Yt = np.asarray(Yt_pseudo, dtype=float)
    if Ys.ndim != 2 or Yt.ndim != 2 or Ys.shape[1] != Yt.shape[1]:
        raise DataError("one-hot matrices must be 2-d with a shared class count")
    C = Ys.shape[1]
    if C < 2:
        raise DataError("need at least two classes")
    n_s, n_t = Ys.shape[0], Yt.shape[0]
    if n_s == 0 or n_t == 0:
        raise DataError("both domains need at least one sample")
    Ns = Ys / n_s
    Nt = Yt / n_t
    # Same-class factor: column c against column c, repeated to match the
    # C-1 cross pairings so R_min and R_max share a column layout.
    Fs = np.repeat(Ys, C - 1, axis=1) / n_s
    Ft = np.hstack([np.delete(Yt, c, axis=1) for c in range(C)]) / n_t
    return JointProbFactors(Ns=Ns, Nt=Nt, Fs=Fs, Ft=Ft, class_count=C)


def build_rmin(factors: JointProbFactors) -> np.ndarray:
    """Same-class joint-probability matrix R_min = B B^T, B = [Ns; -Nt]."""
    B = np.vstack([factors.Ns, -factors.Nt])
    R = B @ B.T
    return (R + R.T) / 2.0


def build_rmax(factors: JointProbFactors) -> np.ndarray:
    """Cross-class joint-probability matrix R_max = B B^T, B = [Fs; -Ft]."""
    B = np.vstack([factors.Fs, -factors.Ft])
    R = B @ B.T
    return (R + R.T) / 2.0


def marginal_mmd_matrix(n_s: int, n_t: int) -> np.ndarray:
    """Whole-domain mean-difference matrix.

    Entries: 1/n_s^2 on the source block, 1/n_t^2 on the target block,
    -1/(n_s n_t) on the cross blocks.
    """
    if n_s < 1 or n_t < 1:
        raise DataError("both domains need at least one sample")
    e = np.concatenate([np.full(n_s, 1.0 / n_s), np.full(n_t, -1.0 / n_t)])
    return np.outer(e, e)


def conditional_mmd_matrices(
    Ys: np.ndarray, Yt_pseudo: np.ndarray
) -> tuple[list[np.ndarray], list[int]]:
    """Per-class mean-difference matrices with per-class normalizers.

    Returns C matrices and the (1-based) classes skipped because one domain
    had no samples of that class; skipped classes contribute a zero matrix.
    """
    Ys = np.asarray(Ys, dtype=float)
    Yt = np.asarray(Yt_pseudo, dtype=float)
    C = Ys.shape[1]
    n = Ys.shape[0] + Yt.shape[0]
    cs, ct = class_counts(Ys), class_counts(Yt)
    mats: list[np.ndarray] = []
    skipped: list[int] = []
    for c in range(C):
        if cs[c] == 0 or ct[c] == 0:
            mats.append(np.zeros((n, n)))
            skipped.append(c + 1)
            continue
        e = np.concatenate([Ys[:, c] / cs[c], -Yt[:, c] / ct[c]])
        mats.append(np.outer(e, e))
    return mats, skipped


def projected_discrepancy(A: np.ndarray, X: np.ndarray, M: np.ndarray) -> float:
    """tr(A^T X M X^T A), clamped at zero against roundoff."""
    P = np.asarray(A).T @ np.asarray(X)
    val = float(np.sum((P @ M) * P))
    return max(val, 0.0)


def bda_weight(pair: DomainPair, Yt_pseudo: np.ndarray, ridge: float = 1e-3) -> float:
    """Balance factor between marginal and conditional terms.

    Each distribution distance is estimated as d = 2(1 - 2*err), clamped to
    [0, 2], where err is the training error of a ridge least-squares domain
    classifier (-1 source, +1 target). mu = 1 - d_m / (d_m + sum_c d_c);
    classes empty in either domain contribute zero. Falls back to 0.5 when
    every distance vanishes.
    """
    Xs, Xt = pair.source.X, pair.target.X
    if Xs.shape[1] < 2 or Xt.shape[1] < 2:
        raise DataError("bda weight needs at least 2 samples per domain")
    Yt = np.asarray(Yt_pseudo, dtype=float)
    d_m = _proxy_a_distance(Xs, Xt, ridge)
    d_cs = 0.0
    for c in range(pair.source.class_count):
        src = Xs[:, pair.source.y == c + 1]
        tgt = Xt[:, Yt[:, c] > 0]
        if src.shape[1] == 0 or tgt.shape[1] == 0:
            continue
        d_cs += _proxy_a_distance(src, tgt, ridge)
    den = d_m + d_cs
    if den == 0.0:
        warnings.warn("all domain distances vanished; falling back to mu = 0.5")
        return 0.5
    return float(min(max(1.0 - d_m / den, 0.0), 1.0))


def _proxy_a_distance(Xs: np.ndarray, Xt: np.ndarray, ridge: float) -> float:
    """Distance proxy from the training error of a linear domain classifier."""
    G = np.hstack([Xs, Xt]).T
    G = np.hstack([G, np.ones((G.shape[0], 1))])
    y = np.concatenate([-np.ones(Xs.shape[1]), np.ones(Xt.shape[1])])
    w = np.linalg.solve(G.T @ G + ridge * np.eye(G.shape[1]), G.T @ y)
    pred = np.where(G @ w > 0, 1.0, -1.0)
    err = float(np.mean(pred != y))
    return float(min(max(2.0 * (1.0 - 2.0 * err), 0.0), 2.0))
