"""Command line: fit, sample, evaluate, experiment, inspect.

Every tunable is a config key. Keys can come from a ``key=value`` file
(``--config``, ``#`` starts a comment) and from ``--key value`` flags, which
win over the file. Exit codes: 0 success, 1 usage, 2 data error, 3 training
divergence, 4 I/O.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields

from . import gan
from ._io import atomic_write_text
from .bench import BenchmarkSpec, ExperimentConfig, MLPConfig, run_experiment
from .bench.data import parse_ratio
from .bench.experiment import CLASSIFIERS, STRATEGIES, DataSource
from .codec import MAX_MODES, SchemaError, fit_schema, load_csv

log = logging.getLogger("rctgan")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3, 4
DEFAULT_SEED = ExperimentConfig().seed


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Key:
    name: str
    default: str
    help: str


def _gan_keys() -> list[Key]:
    cfg = gan.GanConfig()
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        text = ",".join(map(str, v)) if isinstance(v, tuple) else str(v)
        out.append(Key(f.name, text, "GAN: " + f.name.replace("_", " ")))
    return out


def _other_keys() -> list[Key]:
    exp, mlp, bench = ExperimentConfig(), MLPConfig(), BenchmarkSpec()
    return [
        Key("max_modes", str(MAX_MODES), "codec: most mixture modes per continuous column"),
        Key("ratio", f"1:{exp.ratio}", "split: failure:normal ratio"),
        Key("train_fraction", str(exp.train_fraction), "split: train share of each class"),
        Key("positive", "1", "split: target value of the minority (failure) class"),
        Key("seeds", str(exp.seeds), "experiment: repetitions per cell"),
        Key("strategies", ",".join(exp.strategies), "experiment: augmentation strategies"),
        Key("classifiers", ",".join(exp.classifiers), "experiment: downstream classifiers"),
        Key("policy", exp.policy, "experiment: mixing policy (parity | literal-1to1)"),
        Key("rf_trees", str(exp.rf_trees), "experiment: random forest size"),
        Key("mlp_hidden", ",".join(map(str, mlp.hidden)), "experiment: MLP hidden widths"),
        Key("mlp_lr", str(mlp.lr), "experiment: MLP learning rate"),
        Key("mlp_epochs", str(mlp.epochs), "experiment: MLP epochs"),
        Key("mlp_batch_size", str(mlp.batch_size), "experiment: MLP batch size"),
        Key("projections", str(exp.projections), "experiment: write 2-D projection CSVs"),
        Key("jobs", str(exp.jobs), "experiment: parallel worker processes"),
        Key("bench_rows", str(bench.n_rows), "synthetic benchmark: rows"),
        Key("bench_continuous", str(bench.n_continuous), "synthetic benchmark: continuous features"),
        Key("bench_separation", str(bench.separation), "synthetic benchmark: minority offset in stddevs"),
        Key("bench_modes", str(bench.majority_modes), "synthetic benchmark: majority mixture modes"),
    ]


KEYS = _gan_keys() + _other_keys()
KEY_INDEX = {k.name: k for k in KEYS}


def read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep:
                raise UsageError(f"{path}:{n}: expected key=value")
            if key not in KEY_INDEX:
                raise UsageError(f"{path}:{n}: unknown config key {key!r}")
            out[key] = value.strip()
    return out


def resolve_config(args) -> dict[str, str]:
    """Defaults, then the config file, then explicit flags."""
    values = {k.name: k.default for k in KEYS}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for k in KEYS:
        v = getattr(args, k.name, None)
        if v is not None:
            values[k.name] = v
    return values


def gan_config(values: dict[str, str]) -> gan.GanConfig:
    names = {f.name for f in fields(gan.GanConfig)}
    try:
        return gan.GanConfig.from_strings({k: v for k, v in values.items() if k in names})
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _bool(text: str) -> bool:
    return gan._parse_like(True, text)


def experiment_config(values: dict[str, str], seed: int) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            strategies=tuple(s.strip() for s in values["strategies"].split(",") if s.strip()),
            classifiers=tuple(s.strip() for s in values["classifiers"].split(",") if s.strip()),
            seeds=int(values["seeds"]), seed=seed, ratio=parse_ratio(values["ratio"]),
            train_fraction=float(values["train_fraction"]), policy=values["policy"],
            rf_trees=int(values["rf_trees"]),
            mlp=MLPConfig(tuple(int(h) for h in values["mlp_hidden"].split(",")), float(values["mlp_lr"]),
                          int(values["mlp_epochs"]), int(values["mlp_batch_size"])),
            gan=gan_config(values),
            benchmark=BenchmarkSpec(n_rows=int(values["bench_rows"]), ratio=parse_ratio(values["ratio"]),
                                    n_continuous=int(values["bench_continuous"]),
                                    separation=float(values["bench_separation"]),
                                    majority_modes=int(values["bench_modes"])),
            projections=_bool(values["projections"]), jobs=int(values["jobs"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _coerce_label(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _load_table(args, values):
    if not args.data:
        raise UsageError("--data is required")
    table = load_csv(args.data, layout=args.layout, target=args.target, model=args.drive_model)
    if table.target is None:
        raise UsageError("--target is required for generic CSV input")
    if table.skipped_rows:
        log.warning("skipped %d unparsable rows", table.skipped_rows)
    return table


# --------------------------------------------------------------------------- commands


def cmd_fit(args) -> int:
    values = resolve_config(args)
    cfg = gan_config(values)
    table = _load_table(args, values)
    schema = fit_schema(table.frame, table.kinds, table.target, int(values["max_modes"]))
    os.makedirs(args.out, exist_ok=True)
    hook = gan.MetricsCSV()
    ckpt = gan.fit(table.frame, schema, cfg, args.seed, hooks=[hook])
    ckpt.save(os.path.join(args.out, "model.rctg"))
    atomic_write_text(os.path.join(args.out, "schema.txt"), schema.to_text())
    atomic_write_text(os.path.join(args.out, "losses.csv"), hook.text())
    if ckpt.metrics:
        m = ckpt.metrics[-1]
        print(f"step {m.step}: loss_d={m.loss_d:.6f} loss_c={m.loss_c:.6f} loss_g={m.loss_g:.6f} gp={m.gp:.6f}")
    print(f"wrote {os.path.join(args.out, 'model.rctg')}")
    return EXIT_OK


def cmd_sample(args) -> int:
    ckpt = gan.Checkpoint.load(args.checkpoint)
    cls = _coerce_label(args.cls)
    ckpt.schema.target_meta.category_index(cls)  # unknown class -> SchemaError
    rows = gan.sample(ckpt, cls, args.count, seed=args.seed)
    text = rows.to_csv(index=False, lineterminator="\n")
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)
    return EXIT_OK


def _source(args, values):
    if args.synthetic_benchmark:
        return None
    table = _load_table(args, values)
    return DataSource(table.frame, table.kinds, table.target, _coerce_label(values["positive"]))


def _write_report(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    atomic_write_text(os.path.join(out_dir, "report.csv"), report.to_csv())
    atomic_write_text(os.path.join(out_dir, "report.txt"), report.to_table())
    atomic_write_text(os.path.join(out_dir, "stability.csv"), report.stability_csv())
    for run in report.gan_runs:
        atomic_write_text(os.path.join(out_dir, f"losses_{run.strategy}_seed{run.seed_index}.csv"),
                          gan.metrics_to_csv(run.metrics))
    for key, frame in report.projections.items():
        atomic_write_text(os.path.join(out_dir, f"projection_{key}.csv"),
                          frame.to_csv(index=False, lineterminator="\n", float_format="%.10g"))


def cmd_experiment(args) -> int:
    values = resolve_config(args)
    cfg = experiment_config(values, args.seed)
    report = run_experiment(cfg, _source(args, values))
    _write_report(report, args.out)
    print(report.to_table(), end="")
    return EXIT_DATA if report.all_failed else EXIT_OK


def cmd_evaluate(args) -> int:
    values = resolve_config(args)
    values["strategies"] = args.strategy
    values["classifiers"] = args.classifier
    cfg = experiment_config(values, args.seed)
    report = run_experiment(cfg, _source(args, values))
    if args.out:
        _write_report(report, args.out)
    for c in report.cells:
        status = f"{c.g_mean:.6f}" if not c.error else "error: " + c.error
        print(f"{c.strategy} {c.classifier} seed {c.seed_index}: g_mean {status}")
    print(f"median g_mean {report.median(args.strategy, args.classifier) * 100:.2f}%")
    return EXIT_DATA if report.all_failed else EXIT_OK


def cmd_inspect(args) -> int:
    ckpt = gan.Checkpoint.load(args.checkpoint)
    print(f"format version {gan.CKPT_VERSION}, seed {ckpt.seed}")
    print(f"target {ckpt.schema.target!r} classes {ckpt.schema.target_meta.categories}")
    print(f"encoded width {ckpt.schema.encoded_width}, cond width {ckpt.schema.cond_width}")
    print("[config]")
    print(ckpt.config.to_text(), end="")
    print("[blocks]")
    for name, arr in ckpt.blocks():
        print(f"{name} {arr.shape[0]}x{arr.shape[1]}")
    return EXIT_OK


# --------------------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_keys(p, names=None):
    group = p.add_argument_group("config keys (also accepted in --config files as key=value)")
    for k in KEYS:
        if names is None or k.name in names:
            group.add_argument("--" + k.name.replace("_", "-"), dest=k.name, metavar="V",
                               help=f"{k.help} (default: {k.default})")
    p.add_argument("--config", help="key=value config file; flags override it")


def _add_data(p):
    p.add_argument("--data", help="input CSV")
    p.add_argument("--layout", choices=("generic", "backblaze"), default="generic", help="CSV layout")
    p.add_argument("--target", help="target column (backblaze layout: failure)")
    p.add_argument("--drive-model", default="ST4000DM000", help="backblaze layout: drive model to keep")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rctgan", description="Residual conditional tabular GAN for imbalanced failure data.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    gan_names = {f.name for f in fields(gan.GanConfig)} | {"max_modes"}

    p = sub.add_parser("fit", help="train a GAN on a CSV table")
    _add_data(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default: {DEFAULT_SEED})")
    p.add_argument("--out", required=True, help="output directory")
    _add_keys(p, gan_names)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw synthetic rows of one class from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--class", dest="cls", required=True, help="target class to generate")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default: {DEFAULT_SEED})")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_sample)

    for name, func, helptext in (("experiment", cmd_experiment, "run the strategy x classifier matrix"),
                                 ("evaluate", cmd_evaluate, "run one strategy with one classifier")):
        p = sub.add_parser(name, help=helptext)
        _add_data(p)
        p.add_argument("--synthetic-benchmark", action="store_true", help="use the generated benchmark table")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default: {DEFAULT_SEED})")
        if name == "evaluate":
            p.add_argument("--strategy", choices=STRATEGIES, required=True)
            p.add_argument("--classifier", choices=CLASSIFIERS, required=True)
            p.add_argument("--out", help="optional output directory")
        else:
            p.add_argument("--out", default="experiment_out", help="output directory (default: experiment_out)")
        _add_keys(p)
        p.set_defaults(func=func)

    p = sub.add_parser("inspect", help="print checkpoint metadata")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("experiment", "evaluate") and not args.synthetic_benchmark and not args.data:
        parser.error("give --data or --synthetic-benchmark")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rctgan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except gan.TrainingDivergence as exc:
        print(f"rctgan: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except gan.CheckpointError as exc:
        print(f"rctgan: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"rctgan: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SchemaError, ValueError, KeyError) as exc:
        print(f"rctgan: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
