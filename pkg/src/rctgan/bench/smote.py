"""SMOTE oversampling for mixed tables."""

from __future__ import annotations

import numpy as np
import pandas as pd

K_NEIGHBORS = 5


def smote(minority: pd.DataFrame, kinds: dict[str, str], count: int,
          rng: np.random.Generator, k: int = K_NEIGHBORS) -> pd.DataFrame:
    """``count`` new rows, each on the segment between a random minority row and
    one of its ``k`` nearest minority neighbours.

    Distances use the z-scored continuous columns. Continuous cells are
    interpolated; discrete cells are copied from the base row.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    n = len(minority)
    if n == 0:
        raise ValueError("smote needs at least one minority row")
    cont = [c for c, kd in kinds.items() if kd == "continuous" and c in minority.columns]
    x = minority[cont].to_numpy(dtype=np.float64)
    base = rng.integers(0, n, size=count)
    if n == 1:
        out = minority.iloc[base].reset_index(drop=True)
        return out
    z = (x - x.mean(axis=0)) / np.maximum(x.std(axis=0), 1e-12)
    d2 = ((z[:, None, :] - z[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    kk = min(k, n - 1)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :kk]
    partner = neighbors[base, rng.integers(0, kk, size=count)]
    gap = rng.random((count, 1))
    out = minority.iloc[base].reset_index(drop=True).copy()
    out[cont] = x[base] + gap * (x[partner] - x[base])
    return out
