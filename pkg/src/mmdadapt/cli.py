"""Command-line entry point.

Subcommands: run, sweep, trace, embed2d, datagen. Settings resolve in the
order built-in defaults < preset < config file < flags (flags win). Exit
codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .datagen import SHIFT_KINDS, ShiftSpec
from .errors import ConfigError, DataError, NumericalError
from .harness import (
    NORMALIZE_MODES,
    PRESETS,
    ExperimentConfig,
    datagen_cmd,
    embed2d,
    run,
    sweep,
    trace,
)
from .kernels import KERNEL_KINDS

_REQUIRED_FILE_KEYS = ("algo", "p", "iters", "mu", "lam", "kernel", "seed")

# config-file key -> canonical name; several spellings accepted
_KEY_ALIASES = {
    "algorithm": "algo",
    "algorithms": "algo",
    "t": "iters",
    "lambda": "lam",
    "n-per-class": "n_per_class",
    "bda-mu": "bda_mu",
    "freeze-bda-mu": "freeze_bda_mu",
}

_INT_KEYS = {"p", "iters", "seed", "jobs", "n_per_class", "classes", "dim"}
_FLOAT_KEYS = {"mu", "lam", "bandwidth", "ridge", "bda_mu", "magnitude"}
_BOOL_KEYS = {"freeze_bda_mu"}
_STR_KEYS = {"source", "target", "kernel", "out", "preset", "normalize", "synth"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmdadapt",
        description="MMD-based domain adaptation runs, sweeps and traces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value settings file")
    common.add_argument("--source", help="source dataset CSV")
    common.add_argument("--target", help="target dataset CSV")
    common.add_argument("--algo", help="comma-separated algorithms (tca,jda,bda,jp,jpda)")
    common.add_argument("--p", type=int, help="subspace dimension")
    common.add_argument("--iters", type=int, help="pseudo-label refinement count T")
    common.add_argument("--mu", type=float, help="cross-class term weight")
    common.add_argument("--lambda", dest="lam", type=float, help="regularizer weight")
    common.add_argument("--kernel", choices=KERNEL_KINDS)
    common.add_argument("--bandwidth", type=float, help="rbf bandwidth (default: median)")
    common.add_argument("--ridge", type=float, help="relative ridge for the eigensolver")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, help="parallel sweep workers")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument(
        "--freeze-bda-mu",
        dest="freeze_bda_mu",
        action="store_true",
        default=None,
        help="compute the bda balance once and reuse it",
    )
    common.add_argument("--bda-mu", dest="bda_mu", type=float, help="fixed bda balance")
    common.add_argument("--normalize", choices=NORMALIZE_MODES)
    common.add_argument("--synth", choices=SHIFT_KINDS, help="synthetic shift kind")
    common.add_argument("--magnitude", type=float, help="shift magnitude")
    common.add_argument("--n-per-class", dest="n_per_class", type=int)
    common.add_argument("--classes", type=int)
    common.add_argument("--dim", type=int)

    sub.add_parser("run", parents=[common], help="fit algorithms once, emit report")
    sw = sub.add_parser("sweep", parents=[common], help="grid over mu or lambda x seeds")
    sw.add_argument("--param", choices=("mu", "lambda"), required=True)
    sw.add_argument("--values", required=True, help="comma-separated grid values")
    sw.add_argument("--seeds", required=True, help="comma list or a:b range")
    sub.add_parser("trace", parents=[common], help="per-iteration discrepancy/accuracy")
    sub.add_parser("embed2d", parents=[common], help="2-d embedding of projected pair")
    sub.add_parser("datagen", parents=[common], help="write a synthetic pair as CSV")
    return parser


def _convert(key: str, value: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            low = value.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(value)
        if key == "algo":
            return [a.strip() for a in value.split(",") if a.strip()]
        if key in _STR_KEYS:
            return value
    except ValueError:
        raise ConfigError(f"{where}: bad value {value!r} for {key}") from None
    raise ConfigError(f"{where}: unknown key {key!r}")


def parse_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = s.split("=", 1)
        key = _KEY_ALIASES.get(k.strip().lower(), k.strip().lower())
        out[key] = _convert(key, v.strip(), f"{path}:{lineno}")
    missing = [k for k in _REQUIRED_FILE_KEYS if k not in out]
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")
    return out


_SYNTH_KEYS = ("synth", "magnitude", "n_per_class", "classes", "dim")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults < preset < config file < flags into one config."""
    file_vals = parse_config_file(args.config) if args.config else {}
    flag_vals = {}
    for key in (
        "source target algo p iters mu lam kernel bandwidth ridge seed out jobs "
        "preset freeze_bda_mu bda_mu normalize synth magnitude n_per_class classes dim"
    ).split():
        v = getattr(args, key, None)
        if v is not None:
            flag_vals[key] = [a.strip() for a in v.split(",")] if key == "algo" else v

    preset_name = flag_vals.get("preset", file_vals.get("preset"))
    merged: dict = {}
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigError(f"unknown preset {preset_name!r}")
        merged.update(PRESETS[preset_name])
        merged["preset"] = preset_name
    merged.update(file_vals)
    merged.update(flag_vals)

    synth_given = any(k in merged for k in _SYNTH_KEYS)
    synth = None
    if synth_given:
        if "source" in merged:
            raise ConfigError("give dataset files or synthetic settings, not both")
        spec_kwargs = {}  # unset fields fall back to the ShiftSpec defaults
        for cli_key, field_name in (
            ("synth", "kind"),
            ("magnitude", "magnitude"),
            ("n_per_class", "n_per_class"),
            ("classes", "class_count"),
            ("dim", "dim"),
        ):
            if cli_key in merged:
                spec_kwargs[field_name] = merged.pop(cli_key)
        synth = ShiftSpec(seed=merged.get("seed", 0), **spec_kwargs)
    for k in _SYNTH_KEYS:
        merged.pop(k, None)

    algorithms = merged.pop("algo", None)
    kwargs = dict(merged)
    if algorithms is not None:
        kwargs["algorithms"] = algorithms
    if synth is not None:
        kwargs["synth"] = synth
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _parse_seeds(spec: str) -> list[int]:
    spec = spec.strip()
    try:
        if ":" in spec:
            a, b = spec.split(":", 1)
            lo, hi = int(a), int(b)
            if hi <= lo:
                raise ValueError
            return list(range(lo, hi))
        return [int(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad seed spec {spec!r}; use a comma list or a:b") from None


def _parse_values(spec: str) -> list[float]:
    try:
        vals = [float(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad value list {spec!r}") from None
    if not vals:
        raise ConfigError("empty value list")
    return vals


def _algo_given(args: argparse.Namespace) -> bool:
    if getattr(args, "algo", None) is not None:
        return True
    return bool(args.config) and "algo" in parse_config_file(args.config)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        if args.command in ("trace", "embed2d") and not _algo_given(args):
            config.algorithms = ["jpda"]

        if args.command == "run":
            report = run(config)
            if report.raw_accuracy is not None:
                print(f"raw_1nn {report.raw_accuracy:.4f}")
            for name, rep in report.algorithms.items():
                acc = "n/a" if rep.final_accuracy is None else f"{rep.final_accuracy:.4f}"
                print(f"{name} {acc}")
            print(f"wrote report.json and accuracy.csv to {config.out}")
        elif args.command == "sweep":
            rows = sweep(config, args.param, _parse_values(args.values), _parse_seeds(args.seeds))
            seen = []
            for r in rows:
                key = (r["algorithm"], r["value"])
                if key not in seen:
                    seen.append(key)
                    print(
                        f"{r['algorithm']} {args.param}={r['value']:g} "
                        f"mean={r['mean_accuracy']:.4f} std={r['std_accuracy']:.4f}"
                    )
            print(f"wrote sweep.csv to {config.out}")
        elif args.command == "trace":
            for r in trace(config):
                acc = "n/a" if r["accuracy"] is None else f"{r['accuracy']:.4f}"
                print(f"iter {r['iteration']:3d} mmd={r['mmd']:.6g} acc={acc}")
            print(f"wrote trace.csv to {config.out}")
        elif args.command == "embed2d":
            rows = embed2d(config)
            print(f"embedded {len(rows)} samples; wrote embedding.csv to {config.out}")
        elif args.command == "datagen":
            if config.synth is None:
                raise ConfigError("datagen needs synthetic settings (--synth and friends)")
            src, tgt = datagen_cmd(config)
            print(f"wrote {src} and {tgt}")
    except (ConfigError, DataError, NumericalError) as exc:
        code = {"ConfigError": 2, "DataError": 3, "NumericalError": 4}[type(exc).__name__]
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(record), file=sys.stderr)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
