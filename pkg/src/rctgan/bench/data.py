"""Train/test construction at a fixed imbalance ratio, and the synthetic benchmark table."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)


def parse_ratio(text) -> int:
    """``"1:100"`` -> 100 (normal rows per failure row)."""
    if isinstance(text, (int, np.integer)):
        ratio = int(text)
    else:
        left, sep, right = str(text).partition(":")
        if not sep:
            ratio = int(left)
        else:
            if int(left) != 1:
                raise ValueError(f"ratio must look like 1:N, got {text!r}")
            ratio = int(right)
    if ratio <= 0:
        raise ValueError(f"ratio must be positive, got {text!r}")
    return ratio


@dataclass
class SplitSpec:
    ratio: int = 100
    train_fraction: float = 0.8
    n_failures: int | None = None  # None: every failure row
    positive: object = 1

    def __post_init__(self):
        self.ratio = parse_ratio(self.ratio)
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")

    def counts(self, n_failures: int) -> dict[str, int]:
        f_train = int(round(n_failures * self.train_fraction))
        f_test = n_failures - f_train
        return {"train_failure": f_train, "train_normal": self.ratio * f_train,
                "test_failure": f_test, "test_normal": self.ratio * f_test}


@dataclass
class Split:
    train: pd.DataFrame
    test: pd.DataFrame
    counts: dict[str, int] = field(default_factory=dict)

    def check_disjoint(self) -> None:
        overlap = self.train.index.intersection(self.test.index)
        if len(overlap):
            raise AssertionError(f"{len(overlap)} rows appear in both train and test")


def build_dataset(rows: pd.DataFrame, target: str, spec: SplitSpec, rng: np.random.Generator) -> Split:
    """Stratified 8:2 split, normals subsampled to ``spec.ratio`` per failure.

    Row ids (the frame index) are kept so that leakage can be checked later.
    """
    if not rows.index.is_unique:
        raise ValueError("row index must be unique")
    is_pos = (rows[target] == spec.positive).to_numpy()
    pos = rows.index[is_pos].to_numpy()
    neg = rows.index[~is_pos].to_numpy()
    n_f = len(pos) if spec.n_failures is None else spec.n_failures
    if n_f > len(pos) or n_f < 2:
        raise ValueError(f"need at least 2 and at most {len(pos)} failure rows, asked for {n_f}")
    c = spec.counts(n_f)
    need = c["train_normal"] + c["test_normal"]
    if need > len(neg):
        raise ValueError(f"insufficient rows: ratio 1:{spec.ratio} needs {need} normal rows, "
                         f"only {len(neg)} available")
    pos = rng.permutation(pos)[:n_f]
    neg = rng.permutation(neg)[:need]
    train_ids = np.concatenate([pos[:c["train_failure"]], neg[:c["train_normal"]]])
    test_ids = np.concatenate([pos[c["train_failure"]:], neg[c["train_normal"]:]])
    split = Split(rows.loc[rng.permutation(train_ids)], rows.loc[rng.permutation(test_ids)], c)
    split.check_disjoint()
    log.info("split 1:%d train %d/%d test %d/%d", spec.ratio, c["train_failure"],
             c["train_normal"], c["test_failure"], c["test_normal"])
    return split


@dataclass
class BenchmarkSpec:
    """Two-class table with Gaussian-mixture continuous features and one correlated discrete column."""

    n_rows: int = 5050
    ratio: int = 100
    n_continuous: int = 8
    separation: float = 3.0  # distance of the minority mean from the majority modes, in stddevs
    majority_modes: int = 2
    discrete_levels: tuple = ("a", "b", "c")
    target: str = "failure"

    def __post_init__(self):
        self.ratio = parse_ratio(self.ratio)
        self.discrete_levels = tuple(self.discrete_levels)

    @property
    def n_minority(self) -> int:
        return self.n_rows // (self.ratio + 1)


def make_synthetic_benchmark(spec: BenchmarkSpec, rng: np.random.Generator):
    """Returns ``(rows, truth)``.

    Majority rows come from an equal-weight mixture of ``majority_modes`` unit
    Gaussians; minority rows from one unit Gaussian displaced from the
    majority centroid by ``separation`` along a random unit direction. The
    discrete column ``d`` favours its first level for the minority class.
    ``truth`` holds the generating means and level probabilities.
    """
    d = spec.n_continuous
    n_min = spec.n_minority
    n_maj = spec.n_rows - n_min
    modes = rng.normal(0.0, 1.0, size=(spec.majority_modes, d))
    modes -= modes.mean(axis=0)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    spread = np.abs(modes @ direction).max() if spec.majority_modes > 1 else 0.0
    min_mean = direction * (spread + spec.separation)
    comp = rng.integers(0, spec.majority_modes, size=n_maj)
    x_maj = modes[comp] + rng.standard_normal((n_maj, d))
    x_min = min_mean + rng.standard_normal((n_min, d))
    k = len(spec.discrete_levels)
    p_maj = np.full(k, 1.0 / k)
    p_min = np.full(k, 0.2 / max(k - 1, 1))
    p_min[0] = 0.8 if k > 1 else 1.0
    d_maj = rng.choice(k, size=n_maj, p=p_maj)
    d_min = rng.choice(k, size=n_min, p=p_min)
    x = np.vstack([x_maj, x_min])
    order = rng.permutation(spec.n_rows)
    frame = pd.DataFrame(x[order], columns=[f"x{i}" for i in range(d)])
    frame["d"] = np.array(spec.discrete_levels, dtype=object)[np.concatenate([d_maj, d_min])[order]]
    frame[spec.target] = np.concatenate([np.zeros(n_maj, np.int64), np.ones(n_min, np.int64)])[order]
    truth = {"majority_means": modes, "minority_mean": min_mean, "discrete_p_majority": p_maj,
             "discrete_p_minority": p_min, "n_minority": n_min}
    return frame, truth


def benchmark_kinds(spec: BenchmarkSpec) -> dict[str, str]:
    kinds = {f"x{i}": "continuous" for i in range(spec.n_continuous)}
    kinds["d"] = "discrete"
    kinds[spec.target] = "discrete"
    return kinds
