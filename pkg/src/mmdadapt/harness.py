"""Experiment harness: dataset files, runs, sweeps, traces, embeddings.

Dataset format: UTF-8 CSV, one sample per row, d feature columns followed by
one integer label column (labels 1..C). An optional single header row is
auto-detected. A target file may omit the label column, in which case the
run is not scored. All emitted CSVs can be read back by the loaders here.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .adapt import fit
from .classify import accuracy, knn1_predict
from .data import ALGORITHMS, AdaptConfig, DomainPair, LabeledDataset
from .datagen import ShiftSpec, generate_pair
from .errors import ConfigError, DataError, NumericalError
from .kernels import KERNEL_KINDS, KernelSpec

NORMALIZE_MODES = ("none", "l2col", "zscore")

PRESETS = {
    # Linear kernel and a heavier regularizer suit the small dense feature
    # sets of the classic object-recognition benchmark.
    "office-caltech": {"kernel": "linear", "lam": 1.0},
}


@dataclass
class ExperimentConfig:
    """Everything one run needs; the echo of this is what replays a run."""

    source: str | None = None
    target: str | None = None
    synth: ShiftSpec | None = None
    algorithms: list[str] = field(default_factory=lambda: ["tca", "jda", "bda", "jpda"])
    p: int = 100
    iters: int = 10
    mu: float = 0.1
    lam: float = 0.1
    kernel: str = "primal"
    bandwidth: float | None = None
    ridge: float = 1e-6
    seed: int = 0
    out: str = "."
    jobs: int = 1
    preset: str | None = None
    freeze_bda_mu: bool = False
    bda_mu: float | None = None
    normalize: str = "none"

    def __post_init__(self):
        if self.kernel not in KERNEL_KINDS:
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.normalize not in NORMALIZE_MODES:
            raise ConfigError(f"unknown normalize mode {self.normalize!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r}")
        if (self.source is None) != (self.target is None):
            raise ConfigError("provide both --source and --target, or neither")
        if self.source is None and self.synth is None:
            self.synth = ShiftSpec(seed=self.seed)

    def echo(self) -> dict:
        out = {
            "source": self.source,
            "target": self.target,
            "algorithms": list(self.algorithms),
            "p": self.p,
            "iters": self.iters,
            "mu": self.mu,
            "lam": self.lam,
            "kernel": self.kernel,
            "bandwidth": self.bandwidth,
            "ridge": self.ridge,
            "seed": self.seed,
            "out": self.out,
            "jobs": self.jobs,
            "preset": self.preset,
            "freeze_bda_mu": self.freeze_bda_mu,
            "bda_mu": self.bda_mu,
            "normalize": self.normalize,
        }
        if self.synth is not None:
            out.update(
                synth_kind=self.synth.kind,
                synth_magnitude=self.synth.magnitude,
                synth_n_per_class=self.synth.n_per_class,
                synth_classes=self.synth.class_count,
                synth_dim=self.synth.dim,
                synth_seed=self.synth.seed,
            )
        return out


def config_from_echo(echo: dict) -> ExperimentConfig:
    """Rebuild a config from a RunReport echo (replay path)."""
    synth = None
    if "synth_kind" in echo:
        synth = ShiftSpec(
            kind=echo["synth_kind"],
            magnitude=echo["synth_magnitude"],
            n_per_class=echo["synth_n_per_class"],
            class_count=echo["synth_classes"],
            dim=echo["synth_dim"],
            seed=echo["synth_seed"],
        )
    keys = (
        "source target p iters mu lam kernel bandwidth ridge seed out jobs "
        "preset freeze_bda_mu bda_mu normalize"
    ).split()
    kwargs = {k: echo[k] for k in keys if k in echo}
    return ExperimentConfig(synth=synth, algorithms=list(echo["algorithms"]), **kwargs)


@dataclass
class RunReport:
    version: str
    seed: int
    config_echo: dict
    raw_accuracy: float | None
    algorithms: dict
    stage_wall: dict
    # Solvers never see target labels; when the target file carries them
    # they feed accuracy columns only, and the report says so here.
    target_labels: str = "absent"

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "version": self.version,
            "seed": self.seed,
            "config": self.config_echo,
            "target_labels": self.target_labels,
            "raw_accuracy": self.raw_accuracy,
            "algorithms": {
                name: rep.to_dict(include_timing) for name, rep in self.algorithms.items()
            },
        }
        if include_timing:
            out["stage_wall"] = self.stage_wall
        return out


def load_dataset(
    path: str,
    feature_dim: int | None = None,
    class_count: int | None = None,
) -> LabeledDataset:
    """Read a dataset CSV.

    Without feature_dim the last column must be the label column. With it,
    a file with exactly feature_dim columns loads as unlabeled. Errors carry
    1-based line numbers.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty file")

    start = 1 if _looks_like_header(lines[0]) else 0
    rows: list[list[float]] = []
    linenos: list[int] = []
    ncol = None
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        toks = [t.strip() for t in raw]
        if not toks or all(t == "" for t in toks):
            continue
        if ncol is None:
            ncol = len(toks)
        elif len(toks) != ncol:
            raise DataError(f"{path}:{lineno}: expected {ncol} columns, got {len(toks)}")
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise DataError(f"{path}:{lineno}: malformed number") from None
        linenos.append(lineno)
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.array(rows)
    bad = np.flatnonzero(~np.isfinite(arr).all(axis=1))
    if bad.size:
        raise DataError(f"{path}:{linenos[bad[0]]}: non-finite value")

    labeled = True
    if feature_dim is not None:
        if arr.shape[1] == feature_dim:
            labeled = False
        elif arr.shape[1] != feature_dim + 1:
            raise DataError(
                f"{path}: expected {feature_dim} or {feature_dim + 1} columns, "
                f"got {arr.shape[1]}"
            )
    elif arr.shape[1] < 2:
        raise DataError(f"{path}: need at least one feature column plus labels")

    if not labeled:
        if class_count is None:
            raise DataError(f"{path}: unlabeled data needs a class count from the source")
        return LabeledDataset(X=arr.T, y=None, class_count=class_count)

    feats, labs = arr[:, :-1], arr[:, -1]
    off = np.flatnonzero(labs != np.floor(labs))
    if off.size:
        raise DataError(f"{path}:{linenos[off[0]]}: label is not an integer")
    labs = labs.astype(int)
    if class_count is None:
        if labs.min() < 1:
            i = int(np.flatnonzero(labs < 1)[0])
            raise DataError(f"{path}:{linenos[i]}: label {labs[i]} below 1")
        class_count = int(labs.max())
        if class_count < 2:
            raise DataError(f"{path}: need at least two classes")
    return LabeledDataset(X=feats.T, y=labs, class_count=class_count)


def save_dataset(path: str, ds: LabeledDataset) -> None:
    """Write a dataset in the loadable CSV format (header row included)."""
    header = [f"f{j}" for j in range(ds.dim)]
    if ds.y is not None:
        header.append("label")
    rows = []
    for i in range(ds.n):
        row = [repr(float(v)) for v in ds.X[:, i]]
        if ds.y is not None:
            row.append(str(int(ds.y[i])))
        rows.append(row)
    write_table(path, header, rows)


def _looks_like_header(row: list[str]) -> bool:
    toks = [t.strip() for t in row if t.strip() != ""]
    if not toks:
        return False
    for t in toks:
        try:
            float(t)
        except ValueError:
            return True
    return False


def write_table(path: str, header: list[str], rows: list) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def read_table(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    return rows[0], rows[1:]


def resolve_pair(config: ExperimentConfig) -> DomainPair:
    """Load or generate the domain pair, then apply normalization."""
    if config.source is not None:
        src = load_dataset(config.source)
        tgt = load_dataset(config.target, feature_dim=src.dim, class_count=src.class_count)
        pair = DomainPair(source=src, target=tgt)
    else:
        pair = generate_pair(config.synth).pair
    return _normalize(pair, config.normalize)


def _normalize(pair: DomainPair, mode: str) -> DomainPair:
    if mode == "none":
        return pair
    Xs, Xt = pair.source.X.copy(), pair.target.X.copy()
    if mode == "l2col":
        for X in (Xs, Xt):
            norms = np.linalg.norm(X, axis=0)
            norms[norms == 0] = 1.0
            X /= norms
    else:  # zscore over the pooled samples
        pooled = np.hstack([Xs, Xt])
        mean = pooled.mean(axis=1, keepdims=True)
        std = pooled.std(axis=1, keepdims=True)
        std[std == 0] = 1.0
        Xs = (Xs - mean) / std
        Xt = (Xt - mean) / std
    return DomainPair(
        source=LabeledDataset(X=Xs, y=pair.source.y, class_count=pair.source.class_count),
        target=LabeledDataset(X=Xt, y=pair.target.y, class_count=pair.target.class_count),
    )


def adapt_config_for(config: ExperimentConfig, algorithm: str) -> AdaptConfig:
    kernel = None
    if config.kernel != "primal":
        kernel = KernelSpec(kind=config.kernel, bandwidth=config.bandwidth)
    return AdaptConfig(
        algorithm=algorithm,
        p=config.p,
        iters=config.iters,
        mu=config.mu,
        lam=config.lam,
        kernel=kernel,
        ridge=config.ridge,
        seed=config.seed,
        freeze_bda_mu=config.freeze_bda_mu,
        bda_mu=config.bda_mu,
    )


def run(config: ExperimentConfig, write: bool = True) -> RunReport:
    """Fit every requested algorithm once; emit report.json and accuracy.csv."""
    stage = {}
    t0 = time.perf_counter()
    pair = resolve_pair(config)
    stage["load"] = time.perf_counter() - t0

    truth = pair.target.y
    t0 = time.perf_counter()
    raw_pred = knn1_predict(pair.source.X, pair.source.y, pair.target.X)
    raw_acc = accuracy(raw_pred, truth) if truth is not None else None
    stage["raw"] = time.perf_counter() - t0

    reports = {}
    for algo in config.algorithms:
        t0 = time.perf_counter()
        reports[algo] = fit(pair, adapt_config_for(config, algo)).report
        stage[f"fit:{algo}"] = time.perf_counter() - t0

    report = RunReport(
        version=__version__,
        seed=config.seed,
        config_echo=config.echo(),
        raw_accuracy=raw_acc,
        algorithms=reports,
        stage_wall=stage,
        target_labels="scoring only" if truth is not None else "absent",
    )
    if write:
        write_run_outputs(report, config.out)
    return report


def write_run_outputs(report: RunReport, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    rows = [["raw_1nn", _fmt(report.raw_accuracy)]]
    for name, rep in report.algorithms.items():
        rows.append([name, _fmt(rep.final_accuracy)])
    write_table(os.path.join(out_dir, "accuracy.csv"), ["algorithm", "accuracy"], rows)


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def _sweep_cell(args) -> float:
    config, algo, param, value, seed = args
    cell = replace(config, algorithms=[algo], seed=seed, out=config.out)
    if param == "mu":
        cell = replace(cell, mu=value)
    else:
        cell = replace(cell, lam=value)
    if cell.synth is not None:
        cell = replace(cell, synth=replace(cell.synth, seed=seed))
    pair = resolve_pair(cell)
    if pair.target.y is None:
        raise ConfigError("sweep needs a labeled target for scoring")
    res = fit(pair, adapt_config_for(cell, algo))
    return float(res.report.final_accuracy)


def sweep(
    config: ExperimentConfig,
    param: str,
    values: list[float],
    seeds: list[int],
    write: bool = True,
) -> list[dict]:
    """Grid of (algorithm, value, seed) cells; one row per cell plus group stats."""
    if param not in ("mu", "lambda"):
        raise ConfigError("sweep param must be 'mu' or 'lambda'")
    if not values or not seeds:
        raise ConfigError("sweep needs at least one value and one seed")
    key = "mu" if param == "mu" else "lam"
    cells = [
        (config, algo, key, v, s)
        for algo in config.algorithms
        for v in values
        for s in seeds
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            accs = list(pool.map(_sweep_cell, cells))
    else:
        accs = [_sweep_cell(c) for c in cells]

    rows = []
    i = 0
    for algo in config.algorithms:
        for v in values:
            group = accs[i : i + len(seeds)]
            mean = float(np.mean(group))
            std = float(np.std(group))
            for s, acc in zip(seeds, group):
                rows.append(
                    {
                        "algorithm": algo,
                        "param": param,
                        "value": v,
                        "seed": s,
                        "accuracy": acc,
                        "mean_accuracy": mean,
                        "std_accuracy": std,
                    }
                )
            i += len(seeds)
    if write:
        os.makedirs(config.out, exist_ok=True)
        write_table(
            os.path.join(config.out, "sweep.csv"),
            ["algorithm", "param", "value", "seed", "accuracy", "mean_accuracy", "std_accuracy"],
            [
                [
                    r["algorithm"],
                    r["param"],
                    repr(float(r["value"])),
                    str(r["seed"]),
                    repr(r["accuracy"]),
                    repr(r["mean_accuracy"]),
                    repr(r["std_accuracy"]),
                ]
                for r in rows
            ],
        )
    return rows


def trace(config: ExperimentConfig, write: bool = True) -> list[dict]:
    """Per-iteration projected discrepancy and accuracy for one algorithm."""
    algo = config.algorithms[0]
    if algo == "tca":
        raise ConfigError("trace needs an iterative algorithm; tca runs a single step")
    pair = resolve_pair(config)
    res = fit(pair, adapt_config_for(config, algo))
    rows = [
        {"iteration": r.index, "mmd": r.transfer, "accuracy": r.accuracy}
        for r in res.report.iterations
    ]
    if write:
        os.makedirs(config.out, exist_ok=True)
        write_table(
            os.path.join(config.out, "trace.csv"),
            ["iteration", "mmd", "accuracy"],
            [[str(r["iteration"]), repr(r["mmd"]), _fmt(r["accuracy"])] for r in rows],
        )
    return rows


def embed2d(config: ExperimentConfig, write: bool = True) -> list[dict]:
    """Top-2 principal components of the projected pair, for scatter plots."""
    algo = config.algorithms[0]
    pair = resolve_pair(config)
    res = fit(pair, adapt_config_for(config, algo))
    if res.report.p_used < 2:
        raise ConfigError(
            f"embedding needs p >= 2 but only {res.report.p_used} directions "
            "were available; request a larger p"
        )
    from .adapt import transform

    Z = transform(res.projection, pair.stacked())
    Zc = Z - Z.mean(axis=1, keepdims=True)
    if not np.any(np.abs(Zc) > 0):
        raise NumericalError("projected features have zero variance; nothing to embed")
    U, _s, _vt = np.linalg.svd(Zc, full_matrices=False)
    for k in range(2):
        col = U[:, k]
        if col[int(np.argmax(np.abs(col)))] < 0:
            U[:, k] = -col
    E = U[:, :2].T @ Zc

    ns = pair.source.n
    truth = pair.target.y
    rows = []
    for i in range(E.shape[1]):
        if i < ns:
            domain, cls = "source", int(pair.source.y[i])
        else:
            j = i - ns
            cls = int(truth[j]) if truth is not None else int(res.pseudo_labels[j])
            domain = "target"
        rows.append({"pc1": float(E[0, i]), "pc2": float(E[1, i]), "domain": domain, "class": cls})
    if write:
        os.makedirs(config.out, exist_ok=True)
        write_table(
            os.path.join(config.out, "embedding.csv"),
            ["pc1", "pc2", "domain", "class"],
            [[repr(r["pc1"]), repr(r["pc2"]), r["domain"], str(r["class"])] for r in rows],
        )
    return rows


def datagen_cmd(config: ExperimentConfig) -> tuple[str, str]:
    """Write a generated pair as source.csv / target.csv in the out dir."""
    gen = generate_pair(config.synth)
    os.makedirs(config.out, exist_ok=True)
    src = os.path.join(config.out, "source.csv")
    tgt = os.path.join(config.out, "target.csv")
    save_dataset(src, gen.pair.source)
    save_dataset(tgt, gen.pair.target)
    return src, tgt
