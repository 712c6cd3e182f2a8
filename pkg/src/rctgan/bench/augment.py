"""Mix synthetic failure rows into a training split."""

from __future__ import annotations

from typing import Callable

import numpy as np
import pandas as pd

from .smote import smote

POLICIES = ("parity", "literal-1to1")


def synthetic_count(train: pd.DataFrame, target: str, positive, policy: str) -> int:
    n_pos = int((train[target] == positive).sum())
    if policy == "parity":
        return max(len(train) - 2 * n_pos, 0)
    if policy == "literal-1to1":
        return len(train)
    raise ValueError(f"unknown mixing policy {policy!r}; expected one of {POLICIES}")


def augment(train: pd.DataFrame, strategy: str, target: str, rng: np.random.Generator,
            kinds: dict[str, str] | None = None, policy: str = "parity", positive=1,
            sampler: Callable[[int], pd.DataFrame] | None = None) -> pd.DataFrame:
    """Return ``train`` plus synthetic failure rows, shuffled together.

    ``strategy`` is ``none`` (``train`` itself is returned), ``smote``
    (needs ``kinds``), or ``gan`` (``sampler(count)`` must return decoded
    failure rows). Parity adds failures until both classes are equal;
    literal-1to1 adds as many synthetic rows as there are real ones.
    Synthetic rows get negative ids so they can never collide with real ones.
    """
    if strategy == "none":
        return train
    count = synthetic_count(train, target, positive, policy)
    if strategy == "smote":
        if kinds is None:
            raise ValueError("smote needs column kinds")
        synth = smote(train[train[target] == positive], kinds, count, rng)
    elif strategy == "gan":
        if sampler is None:
            raise ValueError("gan strategy needs a fitted sampler")
        synth = sampler(count)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if len(synth) != count:
        raise ValueError(f"sampler returned {len(synth)} rows, expected {count}")
    synth = synth[list(train.columns)].copy()
    synth[target] = positive
    synth.index = pd.RangeIndex(-1, -1 - count, -1)
    mixed = pd.concat([train, synth])
    return mixed.iloc[rng.permutation(len(mixed))]
