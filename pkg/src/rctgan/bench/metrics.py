"""Confusion counts and G-mean."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_labels(cls, y_true, y_pred, positive=1) -> "ConfusionMatrix":
        t = np.asarray(y_true) == positive
        p = np.asarray(y_pred) == positive
        return cls(int((t & p).sum()), int((t & ~p).sum()), int((~t & p).sum()), int((~t & ~p).sum()))

    @property
    def tpr(self) -> float:
        return self.tp / (self.tp + self.fn)

    @property
    def tnr(self) -> float:
        return self.tn / (self.tn + self.fp)


def g_mean(c: ConfusionMatrix) -> float:
    """sqrt(TPR * TNR); both classes must be present in the test set."""
    if c.tp + c.fn == 0:
        raise ValueError("g_mean: no positive rows in the test set")
    if c.tn + c.fp == 0:
        raise ValueError("g_mean: no negative rows in the test set")
    return float(np.sqrt(c.tpr * c.tnr))
