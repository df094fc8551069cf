"""File formats, run/sweep/trace/embed drivers, and replayability."""

import json
import math
import os

import numpy as np
import pytest

from mmdadapt.data import DomainPair, LabeledDataset
from mmdadapt.datagen import ShiftSpec, generate_pair
from mmdadapt.errors import ConfigError, DataError
from mmdadapt.harness import (
    PRESETS,
    ExperimentConfig,
    config_from_echo,
    datagen_cmd,
    embed2d,
    load_dataset,
    read_table,
    resolve_pair,
    run,
    save_dataset,
    sweep,
    trace,
)


def _write(path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


# ----------------------------------------------------------------- loading


def test_load_basic_with_and_without_header(tmp_path):
    body = "1.0,2.0,1\n3.0,4.0,2\n5.0,6.0,1\n"
    plain = _write(tmp_path / "plain.csv", body)
    headed = _write(tmp_path / "headed.csv", "x,y,label\n" + body)
    for path in (plain, headed):
        ds = load_dataset(path)
        assert ds.X.shape == (2, 3)
        np.testing.assert_array_equal(ds.y, [1, 2, 1])
        assert ds.class_count == 2
    np.testing.assert_array_equal(load_dataset(plain).X, load_dataset(headed).X)


def test_load_unlabeled_target_by_feature_dim(tmp_path):
    path = _write(tmp_path / "t.csv", "1.0,2.0\n3.0,4.0\n")
    ds = load_dataset(path, feature_dim=2, class_count=3)
    assert ds.y is None
    assert ds.class_count == 3
    assert ds.X.shape == (2, 2)
    with pytest.raises(DataError, match="class count"):
        load_dataset(path, feature_dim=2)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "empty file"),
        ("x,y,label\n", "no data rows"),
        ("1.0,2.0,1\n3.0,4.0\n", ":2"),
        ("1.0,2.0,1\n1.0,nan,2\n", ":2"),
        ("1.0,2.0,1.5\n", "not an integer"),
        ("1.0,2.0,0\n", "below 1"),
        ("1.0,2.0,1\n3.0,oops,2\n", "malformed"),
        ("5\n6\n", "at least one feature"),
    ],
)
def test_load_errors_name_the_line(tmp_path, text, fragment):
    path = _write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError, match=fragment):
        load_dataset(path)


def test_load_missing_file():
    with pytest.raises(DataError, match="cannot read"):
        load_dataset("/nonexistent/nope.csv")


def test_load_wrong_width_against_feature_dim(tmp_path):
    path = _write(tmp_path / "w.csv", "1.0,2.0,3.0,4.0\n")
    with pytest.raises(DataError, match="expected 2 or 3 columns"):
        load_dataset(path, feature_dim=2)


def test_save_load_round_trip_is_exact(tmp_path):
    gen = generate_pair(ShiftSpec(n_per_class=5, seed=12))
    for name, ds in (("s", gen.pair.source), ("t", gen.pair.target)):
        path = str(tmp_path / f"{name}.csv")
        save_dataset(path, ds)
        back = load_dataset(path)
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.y, ds.y)
        assert back.class_count == ds.class_count


def test_save_load_unlabeled_round_trip(tmp_path):
    ds = LabeledDataset(X=np.array([[1.5, -2.0], [0.25, 4.0]]), y=None, class_count=2)
    path = str(tmp_path / "u.csv")
    save_dataset(path, ds)
    back = load_dataset(path, feature_dim=2, class_count=2)
    assert back.y is None
    np.testing.assert_array_equal(back.X, ds.X)


# ------------------------------------------------------------------ config


def test_config_autofills_synth_from_seed():
    cfg = ExperimentConfig(seed=9)
    assert cfg.synth == ShiftSpec(seed=9)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"source": "only.csv"},
        {"algorithms": ["jpda", "nope"]},
        {"kernel": "poly"},
        {"jobs": 0},
        {"normalize": "minmax"},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_config_echo_round_trip():
    cfg = ExperimentConfig(
        synth=ShiftSpec(magnitude=30.0, n_per_class=8, seed=4),
        algorithms=["jpda", "tca"],
        p=7,
        iters=3,
        mu=0.05,
        lam=0.5,
        normalize="zscore",
    )
    assert config_from_echo(cfg.echo()) == cfg


def test_presets_registry():
    assert PRESETS["office-caltech"] == {"kernel": "linear", "lam": 1.0}


# ----------------------------------------------------------------- running


def test_zero_shift_run_all_algorithms_match_raw():
    cfg = ExperimentConfig(synth=ShiftSpec(magnitude=0.0, seed=0))
    report = run(cfg, write=False)
    assert report.raw_accuracy is not None and report.raw_accuracy > 0.9
    assert set(report.algorithms) == {"tca", "jda", "bda", "jpda"}
    for rep in report.algorithms.values():
        assert rep.final_accuracy >= report.raw_accuracy - 0.02
    assert report.target_labels == "scoring only"


def test_run_replays_exactly_from_echo():
    cfg = ExperimentConfig(
        synth=ShiftSpec(seed=3), algorithms=["jpda", "bda"], p=2, iters=4
    )
    first = run(cfg, write=False)
    again = run(config_from_echo(first.config_echo), write=False)
    assert first.to_dict(include_timing=False) == again.to_dict(include_timing=False)


def test_run_writes_report_and_accuracy_csv(tmp_path):
    out = str(tmp_path / "res")
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=8, seed=1), algorithms=["jpda"], p=2, iters=2, out=out
    )
    report = run(cfg)
    with open(os.path.join(out, "report.json"), encoding="utf-8") as fh:
        blob = json.load(fh)
    assert blob["raw_accuracy"] == report.raw_accuracy
    assert blob["algorithms"]["jpda"]["final_accuracy"] == pytest.approx(
        report.algorithms["jpda"].final_accuracy
    )
    assert "stage_wall" in blob and "fit:jpda" in blob["stage_wall"]
    header, rows = read_table(os.path.join(out, "accuracy.csv"))
    assert header == ["algorithm", "accuracy"]
    assert [r[0] for r in rows] == ["raw_1nn", "jpda"]
    assert float(rows[0][1]) == report.raw_accuracy


def test_run_unlabeled_target_scores_nothing(tmp_path):
    gen = generate_pair(ShiftSpec(n_per_class=6, seed=2))
    src = str(tmp_path / "s.csv")
    tgt = str(tmp_path / "t.csv")
    save_dataset(src, gen.pair.source)
    save_dataset(tgt, LabeledDataset(X=gen.pair.target.X, y=None, class_count=3))
    out = str(tmp_path / "o")
    cfg = ExperimentConfig(source=src, target=tgt, algorithms=["jpda"], p=2, iters=2, out=out)
    report = run(cfg)
    assert report.target_labels == "absent"
    assert report.raw_accuracy is None
    assert report.algorithms["jpda"].final_accuracy is None
    _header, rows = read_table(os.path.join(out, "accuracy.csv"))
    assert rows[0] == ["raw_1nn", ""]


def test_single_pass_algorithm_is_cheapest_stage():
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=20, dim=40, seed=0),
        algorithms=["tca", "jpda"],
        p=2,
        iters=10,
    )
    report = run(cfg, write=False)
    assert report.stage_wall["fit:tca"] < report.stage_wall["fit:jpda"]


# --------------------------------------------------------------- normalize


def test_normalize_l2col_unit_columns():
    cfg = ExperimentConfig(synth=ShiftSpec(n_per_class=5, seed=6), normalize="l2col")
    pair = resolve_pair(cfg)
    np.testing.assert_allclose(np.linalg.norm(pair.source.X, axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(pair.target.X, axis=0), 1.0, atol=1e-12)


def test_normalize_zscore_pools_both_domains():
    cfg = ExperimentConfig(synth=ShiftSpec(n_per_class=5, seed=6), normalize="zscore")
    pair = resolve_pair(cfg)
    pooled = pair.stacked()
    np.testing.assert_allclose(pooled.mean(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(pooled.std(axis=1), 1.0, atol=1e-12)


def test_normalize_none_keeps_data():
    spec = ShiftSpec(n_per_class=5, seed=6)
    pair = resolve_pair(ExperimentConfig(synth=spec))
    np.testing.assert_array_equal(pair.source.X, generate_pair(spec).pair.source.X)


# ------------------------------------------------------------------- trace


def test_trace_canonical_instance_frozen():
    cfg = ExperimentConfig(synth=ShiftSpec(seed=7), algorithms=["jpda"], p=2)
    rows = trace(cfg, write=False)
    assert len(rows) == 10
    assert rows[0]["mmd"] == pytest.approx(8.71686630180048e-05, rel=1e-9)
    assert rows[-1]["mmd"] <= rows[0]["mmd"]
    assert all(r["accuracy"] is not None for r in rows)


def test_trace_single_iteration(tmp_path):
    out = str(tmp_path / "tr")
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=8, seed=1), algorithms=["jpda"], p=2, iters=1, out=out
    )
    rows = trace(cfg)
    assert len(rows) == 1 and rows[0]["iteration"] == 1
    header, body = read_table(os.path.join(out, "trace.csv"))
    assert header == ["iteration", "mmd", "accuracy"]
    assert len(body) == 1
    assert float(body[0][1]) == pytest.approx(rows[0]["mmd"])


def test_trace_identical_domains_mmd_is_zero(tmp_path):
    src = generate_pair(ShiftSpec(n_per_class=8, seed=5)).pair.source
    s = str(tmp_path / "s.csv")
    t = str(tmp_path / "t.csv")
    save_dataset(s, src)
    save_dataset(t, src)
    cfg = ExperimentConfig(source=s, target=t, algorithms=["jpda"], p=2, iters=3)
    rows = trace(cfg, write=False)
    assert all(r["mmd"] <= 1e-10 for r in rows)
    assert rows[-1]["accuracy"] == 1.0


def test_trace_rejects_single_step_algorithm():
    cfg = ExperimentConfig(algorithms=["tca"])
    with pytest.raises(ConfigError, match="tca"):
        trace(cfg, write=False)


# ----------------------------------------------------------------- embed2d


def test_embed2d_shape_and_csv(tmp_path):
    out = str(tmp_path / "e")
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=6, seed=2), algorithms=["jpda"], p=2, iters=2, out=out
    )
    rows = embed2d(cfg)
    assert len(rows) == 36
    assert sum(r["domain"] == "source" for r in rows) == 18
    assert {r["class"] for r in rows} <= {1, 2, 3}
    header, body = read_table(os.path.join(out, "embedding.csv"))
    assert header == ["pc1", "pc2", "domain", "class"]
    assert len(body) == 36
    assert all(math.isfinite(float(r[0])) and math.isfinite(float(r[1])) for r in body)


def test_embed2d_needs_two_directions(tmp_path):
    src = _write(tmp_path / "s.csv", "0.0,1\n1.0,1\n5.0,2\n6.0,2\n")
    tgt = _write(tmp_path / "t.csv", "0.5,1\n5.5,2\n")
    cfg = ExperimentConfig(source=src, target=tgt, algorithms=["jpda"], iters=1)
    with pytest.raises(ConfigError, match="p >= 2"):
        embed2d(cfg, write=False)


def test_embed2d_distances_invariant_under_input_rotation(tmp_path):
    spec = ShiftSpec(n_per_class=15, seed=4)
    pair = generate_pair(spec).pair
    th = math.radians(45.0)
    Q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])

    def embed_of(p: DomainPair):
        s, t = str(tmp_path / "qs.csv"), str(tmp_path / "qt.csv")
        save_dataset(s, p.source)
        save_dataset(t, p.target)
        cfg = ExperimentConfig(source=s, target=t, algorithms=["jpda"], p=2, iters=2)
        rows = embed2d(cfg, write=False)
        return np.array([[r["pc1"], r["pc2"]] for r in rows])

    E1 = embed_of(pair)
    rotated = DomainPair(
        source=LabeledDataset(X=Q @ pair.source.X, y=pair.source.y, class_count=3),
        target=LabeledDataset(X=Q @ pair.target.X, y=pair.target.y, class_count=3),
    )
    E2 = embed_of(rotated)
    d1 = np.linalg.norm(E1[:, None, :] - E1[None, :, :], axis=2)
    d2 = np.linalg.norm(E2[:, None, :] - E2[None, :, :], axis=2)
    np.testing.assert_allclose(d1, d2, atol=1e-7)


# ------------------------------------------------------------------- sweep


def test_sweep_single_cell_matches_run():
    base = ExperimentConfig(
        synth=ShiftSpec(n_per_class=8, seed=0), algorithms=["jpda"], p=2, iters=3
    )
    rows = sweep(base, "mu", [0.1], [0], write=False)
    assert len(rows) == 1
    direct = run(base, write=False).algorithms["jpda"].final_accuracy
    assert rows[0]["accuracy"] == direct
    assert rows[0]["mean_accuracy"] == rows[0]["accuracy"]
    assert rows[0]["std_accuracy"] == 0.0


def test_sweep_grid_shape_stats_and_csv(tmp_path):
    out = str(tmp_path / "sw")
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=8, seed=0),
        algorithms=["jpda", "tca"],
        p=2,
        iters=2,
        out=out,
    )
    rows = sweep(cfg, "lambda", [0.1, 1.0], [0, 1, 2])
    assert len(rows) == 12
    group = [r for r in rows if r["algorithm"] == "jpda" and r["value"] == 0.1]
    assert len(group) == 3
    accs = [r["accuracy"] for r in group]
    assert group[0]["mean_accuracy"] == pytest.approx(float(np.mean(accs)))
    assert group[0]["std_accuracy"] == pytest.approx(float(np.std(accs)))
    header, body = read_table(os.path.join(out, "sweep.csv"))
    assert header == ["algorithm", "param", "value", "seed", "accuracy", "mean_accuracy", "std_accuracy"]
    assert len(body) == 12
    assert {r[0] for r in body} == {"jpda", "tca"}


def test_sweep_parallel_equals_serial():
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=6, seed=0), algorithms=["jpda"], p=2, iters=2
    )
    serial = sweep(cfg, "mu", [0.01, 0.1], [0, 1], write=False)
    from dataclasses import replace

    parallel = sweep(replace(cfg, jobs=2), "mu", [0.01, 0.1], [0, 1], write=False)
    assert serial == parallel


def test_sweep_varies_seed_of_generated_data():
    # the noise-padded layout is hard enough that seeds do not all tie at 1.0
    cfg = ExperimentConfig(
        synth=ShiftSpec(n_per_class=30, dim=40, seed=0), algorithms=["jpda"], p=2, iters=2
    )
    rows = sweep(cfg, "mu", [0.1], [0, 1, 2, 3], write=False)
    assert len({r["accuracy"] for r in rows}) > 1


@pytest.mark.parametrize(
    "param,values,seeds",
    [("gamma", [0.1], [0]), ("mu", [], [0]), ("mu", [0.1], [])],
)
def test_sweep_argument_validation(param, values, seeds):
    cfg = ExperimentConfig(algorithms=["jpda"])
    with pytest.raises(ConfigError):
        sweep(cfg, param, values, seeds, write=False)


def test_sweep_needs_labeled_target(tmp_path):
    gen = generate_pair(ShiftSpec(n_per_class=5, seed=1))
    s, t = str(tmp_path / "s.csv"), str(tmp_path / "t.csv")
    save_dataset(s, gen.pair.source)
    save_dataset(t, LabeledDataset(X=gen.pair.target.X, y=None, class_count=3))
    cfg = ExperimentConfig(source=s, target=t, algorithms=["jpda"], p=2, iters=1)
    with pytest.raises(ConfigError, match="labeled target"):
        sweep(cfg, "mu", [0.1], [0], write=False)


# ----------------------------------------------------------------- datagen


def test_datagen_cmd_writes_loadable_pair(tmp_path):
    out = str(tmp_path / "gen")
    cfg = ExperimentConfig(synth=ShiftSpec(n_per_class=4, seed=8), out=out)
    src, tgt = datagen_cmd(cfg)
    pair = DomainPair(
        source=load_dataset(src),
        target=load_dataset(tgt, feature_dim=2, class_count=3),
    )
    gen = generate_pair(ShiftSpec(n_per_class=4, seed=8))
    np.testing.assert_array_equal(pair.source.X, gen.pair.source.X)
    np.testing.assert_array_equal(pair.target.X, gen.pair.target.X)
