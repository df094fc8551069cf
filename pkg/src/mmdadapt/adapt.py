"""Projection solvers: joint-probability (jpda/jp) and weighted (tca/jda/bda).

Every algorithm is the same alternating loop: build a discrepancy matrix R
over the stacked samples from the current pseudo-labels, solve the trailing
eigenpairs of (G R G^T + lam*I, G H G^T + ridge*I) for the projection A,
re-label the target by 1-NN in the projected space, repeat T times. G is the
raw feature matrix (primal) or a gram matrix (kernelized); only R differs
between algorithms:

    jpda / jp   R = R_min - mu * R_max           (mu = 0 for jp)
    tca         R = M_0                          (T forced to 1)
    jda         R = M_0 + sum_c M_c
    bda         R = (1-mu_b) M_0 + mu_b sum_c M_c, mu_b from bda_weight

Per-iteration transfer and discriminative terms are always the projected
R_min / R_max traces, whatever R the algorithm minimized, so convergence
traces are comparable across algorithms.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .classify import accuracy, knn1_predict
from .data import AdaptConfig, DomainPair, one_hot_encode
from .errors import ConfigError, NumericalError
from .kernels import KernelSpec, gram, resolve_bandwidth
from .mmd import (
    bda_weight,
    build_joint_prob_factors,
    build_rmax,
    build_rmin,
    conditional_mmd_matrices,
    marginal_mmd_matrix,
    projected_discrepancy,
)
from .eigensolve import assemble_pencil, solve_trailing

# A direction is usable when the ridge carries at most this share of its
# constraint mass; keeping only such directions bounds ||A^T B A - I|| by
# the same number.
_RIDGE_MASS_TOL = 1e-4


def centering_matrix(n: int) -> np.ndarray:
    """H = I - (1/n) ones(n, n)."""
    return np.eye(n) - np.full((n, n), 1.0 / n)


@dataclass
class Projection:
    """A fitted map to the shared subspace.

    matrix is d x p for primal fits and n x p for kernelized ones, in which
    case anchors holds the training columns the gram rows refer to.
    """

    matrix: np.ndarray
    kind: str
    bandwidth: float | None = None
    anchors: np.ndarray | None = None


def transform(proj: Projection, X: np.ndarray) -> np.ndarray:
    """Project new column-sample data into the fitted subspace."""
    X = np.asarray(X, dtype=float)
    if proj.kind == "primal":
        return proj.matrix.T @ X
    spec = KernelSpec(kind=proj.kind, bandwidth=proj.bandwidth)
    return proj.matrix.T @ gram(proj.anchors, X, spec)


@dataclass
class IterationRecord:
    index: int
    pseudo_labels: np.ndarray
    accuracy: float | None
    transfer: float
    discriminative: float
    objective: float
    bda_mu: float | None
    constraint_gap: float
    wall_time: float

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "index": self.index,
            "pseudo_labels": [int(v) for v in self.pseudo_labels],
            "accuracy": self.accuracy,
            "transfer": self.transfer,
            "discriminative": self.discriminative,
            "objective": self.objective,
            "bda_mu": self.bda_mu,
            "constraint_gap": self.constraint_gap,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


@dataclass
class FitReport:
    algorithm: str
    p_requested: int
    p_used: int
    rank_reduced: bool
    kernel: str
    bandwidth: float | None
    iterations: list[IterationRecord] = field(default_factory=list)
    final_accuracy: float | None = None
    total_wall: float = 0.0

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "algorithm": self.algorithm,
            "p_requested": self.p_requested,
            "p_used": self.p_used,
            "rank_reduced": self.rank_reduced,
            "kernel": self.kernel,
            "bandwidth": self.bandwidth,
            "iterations": [r.to_dict(include_timing) for r in self.iterations],
            "final_accuracy": self.final_accuracy,
        }
        if include_timing:
            out["total_wall"] = self.total_wall
        return out


@dataclass
class FitResult:
    projection: Projection
    pseudo_labels: np.ndarray
    report: FitReport


def fit(pair: DomainPair, config: AdaptConfig) -> FitResult:
    """Dispatch on config.algorithm."""
    if config.algorithm in ("jp", "jpda"):
        return jpda_fit(pair, config)
    return weighted_fit(pair, config)


def jpda_fit(pair: DomainPair, config: AdaptConfig) -> FitResult:
    """Joint-probability solver; jp is the mu = 0 special case."""
    mu = 0.0 if config.algorithm == "jp" else config.mu
    return _fit_loop(pair, config, joint_mu=mu, weights=None)


def weighted_fit(
    pair: DomainPair,
    config: AdaptConfig,
    weights: tuple[float, float] | None = None,
) -> FitResult:
    """Marginal+conditional solver: tca (1,0), jda (1,1), bda balanced."""
    if weights is None:
        weights = config.weights
    if weights is None:
        if config.algorithm == "tca":
            weights = (1.0, 0.0)
        elif config.algorithm == "jda":
            weights = (1.0, 1.0)
        elif config.algorithm == "bda":
            weights = None  # per-iteration balance
        else:
            raise ConfigError(
                f"weighted_fit needs explicit weights for algorithm {config.algorithm!r}"
            )
    return _fit_loop(pair, config, joint_mu=None, weights=weights)


def _fit_loop(
    pair: DomainPair,
    config: AdaptConfig,
    joint_mu: float | None,
    weights: tuple[float, float] | None,
) -> FitResult:
    t_start = time.perf_counter()
    Xs, Xt = pair.source.X, pair.target.X
    ns, nt = Xs.shape[1], Xt.shape[1]
    n = ns + nt
    C = pair.source.class_count
    X = pair.stacked()

    kspec = config.kernel or KernelSpec("primal")
    if kspec.kind == "primal":
        G = X
        bandwidth = None
    else:
        bandwidth = kspec.bandwidth
        if kspec.kind == "rbf" and bandwidth is None:
            bandwidth = resolve_bandwidth(X)
        G = gram(X, X, KernelSpec(kind=kspec.kind, bandwidth=bandwidth))
    m = G.shape[0]

    p_used = min(config.p, m)
    H = centering_matrix(n)
    Ys = one_hot_encode(pair.source.y, C)
    truth = pair.target.y

    iters = 1 if config.algorithm == "tca" else config.iters
    pseudo = knn1_predict(Xs, pair.source.y, Xt)

    report = FitReport(
        algorithm=config.algorithm,
        p_requested=config.p,
        p_used=p_used,
        rank_reduced=p_used < config.p,
        kernel=kspec.kind,
        bandwidth=bandwidth,
    )

    A = None
    frozen_mu = config.bda_mu
    for it in range(iters):
        t_iter = time.perf_counter()
        Yt = one_hot_encode(pseudo, C)
        factors = build_joint_prob_factors(Ys, Yt)
        Rmin = build_rmin(factors)
        Rmax = build_rmax(factors)

        bda_mu_used = None
        if joint_mu is not None:
            pencil = assemble_pencil(G, Rmin, Rmax, joint_mu, config.lam, H)
        else:
            M0 = marginal_mmd_matrix(ns, nt)
            Mc, _skipped = conditional_mmd_matrices(Ys, Yt)
            if weights is None:  # bda
                if frozen_mu is None:
                    bda_mu_used = bda_weight(pair, Yt)
                    if config.freeze_bda_mu:
                        frozen_mu = bda_mu_used
                else:
                    bda_mu_used = frozen_mu
                w1, w2 = 1.0 - bda_mu_used, bda_mu_used
            else:
                w1, w2 = weights
            R = w1 * M0 + w2 * np.add.reduce(Mc)
            pencil = assemble_pencil(G, R, None, 0.0, config.lam, H)
        ridge_abs = config.ridge * float(np.trace(pencil.B)) / m
        eig = solve_trailing(pencil, m, ridge_abs)
        # Directions whose constraint mass is mostly ridge belong to the
        # numerical null space of B; keep the trailing usable ones only.
        mass = ridge_abs * np.sum(eig.vectors * eig.vectors, axis=0)
        usable = np.flatnonzero(mass <= _RIDGE_MASS_TOL)
        if usable.size == 0:
            raise NumericalError(
                "no usable eigen-directions: the scatter matrix is degenerate"
            )
        take = usable[: min(p_used, usable.size)]
        if take.size < p_used:
            p_used = int(take.size)
            report.p_used = p_used
            report.rank_reduced = True
        A = eig.vectors[:, take]
        values = eig.values[take]

        Zs = A.T @ G[:, :ns]
        Zt = A.T @ G[:, ns:]
        pseudo = knn1_predict(Zs, pair.source.y, Zt)
        if np.unique(pseudo).size == 1:
            warnings.warn(
                f"pseudo-labels collapsed to class {int(pseudo[0])} "
                f"at iteration {it + 1}"
            )

        gap = float(np.max(np.abs(A.T @ pencil.B @ A - np.eye(p_used))))
        report.iterations.append(
            IterationRecord(
                index=it + 1,
                pseudo_labels=pseudo.copy(),
                accuracy=accuracy(pseudo, truth) if truth is not None else None,
                transfer=projected_discrepancy(A, G, Rmin),
                discriminative=projected_discrepancy(A, G, Rmax),
                objective=float(np.sum(values)),
                bda_mu=bda_mu_used,
                constraint_gap=gap,
                wall_time=time.perf_counter() - t_iter,
            )
        )

    report.final_accuracy = report.iterations[-1].accuracy
    report.total_wall = time.perf_counter() - t_start
    proj = Projection(
        matrix=A,
        kind=kspec.kind,
        bandwidth=bandwidth,
        anchors=X.copy() if kspec.kind != "primal" else None,
    )
    return FitResult(projection=proj, pseudo_labels=pseudo, report=report)
