"""Table -> numeric matrix for the downstream classifiers."""

from __future__ import annotations

import numpy as np
import pandas as pd

STD_FLOOR = 1e-12


class FeatureEncoder:
    """z-scored continuous columns followed by one-hot discrete columns.

    Statistics and category lists come from the frame passed to :meth:`fit`;
    unseen categories encode as all zeros.
    """

    def __init__(self, kinds: dict[str, str], target: str):
        self.kinds = {k: v for k, v in kinds.items() if k != target}
        self.target = target
        self.mean: dict[str, float] = {}
        self.std: dict[str, float] = {}
        self.categories: dict[str, list] = {}

    def fit(self, frame: pd.DataFrame) -> "FeatureEncoder":
        for name, kind in self.kinds.items():
            col = frame[name]
            if kind == "continuous":
                v = col.to_numpy(dtype=np.float64)
                self.mean[name] = float(v.mean())
                self.std[name] = max(float(v.std()), STD_FLOOR)
            else:
                self.categories[name] = sorted(set(col.tolist()), key=repr)
        return self

    @property
    def width(self) -> int:
        return len(self.mean) + sum(len(c) for c in self.categories.values())

    def transform(self, frame: pd.DataFrame) -> np.ndarray:
        parts = []
        for name, kind in self.kinds.items():
            col = frame[name]
            if kind == "continuous":
                v = col.to_numpy(dtype=np.float64)
                parts.append(((v - self.mean[name]) / self.std[name])[:, None])
            else:
                cats = self.categories[name]
                lookup = {c: i for i, c in enumerate(cats)}
                idx = np.array([lookup.get(v, -1) for v in col.tolist()])
                block = np.zeros((len(frame), len(cats)))
                hit = idx >= 0
                block[np.flatnonzero(hit), idx[hit]] = 1.0
                parts.append(block)
        return np.hstack(parts) if parts else np.zeros((len(frame), 0))

    def labels(self, frame: pd.DataFrame, classes: list) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(classes)}
        return np.array([lookup[v] for v in frame[self.target].tolist()], dtype=np.int64)
