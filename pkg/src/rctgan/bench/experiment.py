"""Strategy x classifier x seed evaluation matrix."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .. import gan
from ..codec import fit_schema
from .augment import augment
from .data import BenchmarkSpec, SplitSpec, benchmark_kinds, build_dataset, make_synthetic_benchmark
from .features import FeatureEncoder
from .metrics import ConfusionMatrix, g_mean
from .mlp import MLPConfig, fit_mlp
from .projection import project_2d
from .trees import fit_dt, fit_rf

log = logging.getLogger(__name__)

STRATEGIES = ("none", "smote", "ctgan", "rctgan")
CLASSIFIERS = ("DT", "RF", "MLP")
STABILITY_TAIL = 0.2
_STREAM = {"data": 0, "split": 1, "augment": 2, "gan": 3, "sample": 4, "DT": 5, "RF": 6, "MLP": 7}


def _rng(base: int, seed_index: int, stream: str, strategy: str = "") -> np.random.Generator:
    tag = STRATEGIES.index(strategy) + 1 if strategy in STRATEGIES else 0
    return np.random.default_rng([base, seed_index, _STREAM[stream], tag])


def _int_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 63 - 1))


@dataclass
class DataSource:
    frame: pd.DataFrame
    kinds: dict[str, str]
    target: str
    positive: object = 1


@dataclass
class ExperimentConfig:
    strategies: tuple = STRATEGIES
    classifiers: tuple = CLASSIFIERS
    seeds: int = 5
    seed: int = 7
    ratio: int = 100
    train_fraction: float = 0.8
    policy: str = "parity"
    rf_trees: int = 45
    mlp: MLPConfig = field(default_factory=MLPConfig)
    gan: gan.GanConfig = field(default_factory=gan.GanConfig)
    benchmark: BenchmarkSpec = field(default_factory=BenchmarkSpec)
    projections: bool = True
    jobs: int = 1

    def __post_init__(self):
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                raise ValueError(f"unknown classifier {c!r}")
        if self.seeds <= 0:
            raise ValueError("seeds must be positive")


@dataclass
class CellResult:
    strategy: str
    classifier: str
    seed_index: int
    g_mean: float
    confusion: ConfusionMatrix | None
    error: str = ""
    seconds: float = 0.0


@dataclass
class GanRun:
    strategy: str
    seed_index: int
    metrics: list

    @property
    def tail_abs_critic_loss(self) -> float:
        """Mean |loss_d| over the final 20% of steps."""
        if not self.metrics:
            return float("nan")
        k = max(1, int(round(len(self.metrics) * STABILITY_TAIL)))
        return float(np.mean([abs(m.loss_d) for m in self.metrics[-k:]]))


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    cells: list[CellResult]
    gan_runs: list[GanRun] = field(default_factory=list)
    projections: dict[str, pd.DataFrame] = field(default_factory=dict)

    def values(self, strategy: str, classifier: str) -> list[float]:
        return [c.g_mean for c in self.cells
                if c.strategy == strategy and c.classifier == classifier and not c.error]

    def median(self, strategy: str, classifier: str) -> float:
        v = self.values(strategy, classifier)
        return float(np.median(v)) if v else float("nan")

    @property
    def all_failed(self) -> bool:
        return all(c.error for c in self.cells)

    def to_csv(self) -> str:
        lines = ["strategy,classifier,seed,g_mean,tp,fn,fp,tn,status"]
        for c in self.cells:
            cm = c.confusion
            counts = f"{cm.tp},{cm.fn},{cm.fp},{cm.tn}" if cm else ",,,"
            status = "ok" if not c.error else "error: " + c.error.replace(",", ";").replace("\n", " ")
            lines.append(f"{c.strategy},{c.classifier},{c.seed_index},{_fmt(c.g_mean)},{counts},{status}")
        for s in self.config.strategies:
            for k in self.config.classifiers:
                lines.append(f"{s},{k},median,{_fmt(self.median(s, k))},,,,,"
                             f"{len(self.values(s, k))}/{self.config.seeds} seeds")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        """Median G-mean in percent: strategies as rows, classifiers as columns, then per-seed values."""
        cfg = self.config
        head = [f"G-mean (%)  1:{cfg.ratio}, median of {cfg.seeds} seeds"]
        width = max(len(s) for s in cfg.strategies) + 2
        head.append("strategy".ljust(width) + "".join(k.rjust(9) for k in cfg.classifiers))
        for s in cfg.strategies:
            head.append(s.ljust(width) + "".join(_pct(self.median(s, k)).rjust(9) for k in cfg.classifiers))
        head.append("")
        head.append("per-seed G-mean (%)")
        for s in cfg.strategies:
            for k in cfg.classifiers:
                per = {c.seed_index: c for c in self.cells if c.strategy == s and c.classifier == k}
                vals = [_pct(per[i].g_mean) if i in per and not per[i].error else "err"
                        for i in range(cfg.seeds)]
                head.append(f"{s.ljust(width)}{k.ljust(5)}" + " ".join(v.rjust(7) for v in vals))
        return "\n".join(head) + "\n"

    def stability_csv(self) -> str:
        lines = ["strategy,seed,steps,tail_mean_abs_loss_d"]
        for r in self.gan_runs:
            lines.append(f"{r.strategy},{r.seed_index},{len(r.metrics)},{_fmt(r.tail_abs_critic_loss)}")
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return "nan" if not np.isfinite(v) else f"{v:.6f}"


def _pct(v: float) -> str:
    return "-" if not np.isfinite(v) else f"{100 * v:.2f}"


def _source_for(cfg: ExperimentConfig, source: DataSource | None, seed_index: int) -> DataSource:
    if source is not None:
        return source
    rows, _ = make_synthetic_benchmark(cfg.benchmark, _rng(cfg.seed, seed_index, "data"))
    return DataSource(rows, benchmark_kinds(cfg.benchmark), cfg.benchmark.target, 1)


def _run_unit(cfg: ExperimentConfig, source: DataSource | None, strategy: str, seed_index: int):
    """One strategy on one seed: split, augment, then every classifier."""
    src = _source_for(cfg, source, seed_index)
    spec = SplitSpec(cfg.ratio, cfg.train_fraction, positive=src.positive)
    split = build_dataset(src.frame, src.target, spec, _rng(cfg.seed, seed_index, "split"))
    gan_run = None
    projection = None
    try:
        if strategy in ("ctgan", "rctgan"):
            gcfg = replace(cfg.gan, mode=strategy)
            schema = fit_schema(split.train, src.kinds, src.target)
            ckpt = gan.fit(split.train, schema, gcfg, _int_seed(_rng(cfg.seed, seed_index, "gan", strategy)))
            gan_run = GanRun(strategy, seed_index, ckpt.metrics)
            sample_seed = _int_seed(_rng(cfg.seed, seed_index, "sample", strategy))
            sampler = lambda n: gan.sample(ckpt, src.positive, n, seed=sample_seed)  # noqa: E731
            mixed = augment(split.train, "gan", src.target, _rng(cfg.seed, seed_index, "augment", strategy),
                            policy=cfg.policy, positive=src.positive, sampler=sampler)
        else:
            mixed = augment(split.train, strategy, src.target, _rng(cfg.seed, seed_index, "augment", strategy),
                            kinds=src.kinds, policy=cfg.policy, positive=src.positive)
    except Exception as exc:  # a failed synthesizer fails its cells, not the run
        log.warning("%s seed %d: augmentation failed: %s", strategy, seed_index, exc)
        msg = f"{type(exc).__name__}: {exc}"
        return [CellResult(strategy, k, seed_index, float("nan"), None, msg) for k in cfg.classifiers], gan_run, None
    if len(mixed.index.intersection(split.test.index)):
        raise AssertionError("test rows leaked into the training set")
    enc = FeatureEncoder(src.kinds, src.target).fit(mixed)
    x_train = enc.transform(mixed)
    y_train = (mixed[src.target] == src.positive).to_numpy().astype(np.int64)
    x_test = enc.transform(split.test)
    y_test = (split.test[src.target] == src.positive).to_numpy().astype(np.int64)
    if cfg.projections and seed_index == 0 and strategy != "none":
        synth = mixed.index < 0
        projection = project_2d(enc.transform(split.train), x_train[synth],
                                real_labels=(split.train[src.target] == src.positive).astype(int).to_numpy(),
                                synth_labels=np.ones(int(synth.sum()), dtype=int))
    cells = []
    for k in cfg.classifiers:
        t0 = time.perf_counter()
        rng = _rng(cfg.seed, seed_index, k, strategy)
        try:
            if k == "DT":
                model = fit_dt(x_train, y_train, rng)
            elif k == "RF":
                model = fit_rf(x_train, y_train, rng, n_trees=cfg.rf_trees)
            else:
                model = fit_mlp(x_train, y_train, rng, cfg.mlp, n_classes=2)
            cm = ConfusionMatrix.from_labels(y_test, model.predict(x_test))
            cells.append(CellResult(strategy, k, seed_index, g_mean(cm), cm,
                                    seconds=time.perf_counter() - t0))
        except Exception as exc:
            log.warning("%s/%s seed %d failed: %s", strategy, k, seed_index, exc)
            cells.append(CellResult(strategy, k, seed_index, float("nan"), None,
                                    f"{type(exc).__name__}: {exc}", time.perf_counter() - t0))
    return cells, gan_run, projection


def _run_unit_packed(args):
    return _run_unit(*args)


def run_experiment(cfg: ExperimentConfig, source: DataSource | None = None) -> ExperimentReport:
    """Evaluate every strategy x classifier over ``cfg.seeds`` seeds.

    ``source`` None uses a fresh synthetic benchmark table per seed. GAN
    strategies fit on the train split only. Results do not depend on
    ``cfg.jobs``: every unit derives its randomness from (seed, seed index,
    stage, strategy).
    """
    units = [(cfg, source, s, i) for i in range(cfg.seeds) for s in cfg.strategies]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_unit_packed, units))
    else:
        results = [_run_unit(*u) for u in units]
    cells, runs, projections = [], [], {}
    for (_, _, strategy, i), (unit_cells, run, proj) in zip(units, results):
        cells += unit_cells
        if run is not None:
            runs.append(run)
        if proj is not None:
            projections[f"{strategy}_seed{i}"] = proj
    order = {s: n for n, s in enumerate(cfg.strategies)}
    kord = {k: n for n, k in enumerate(cfg.classifiers)}
    cells.sort(key=lambda c: (order[c.strategy], kord[c.classifier], c.seed_index))
    runs.sort(key=lambda r: (order[r.strategy], r.seed_index))
    return ExperimentReport(cfg, cells, runs, projections)
