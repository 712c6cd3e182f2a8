"""Three-layer perceptron classifier trained with the package's autograd."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autograd as ag


@dataclass
class MLPConfig:
    hidden: tuple = (128, 64)
    lr: float = 2e-4
    epochs: int = 100
    batch_size: int = 128


@dataclass
class MLPModel:
    net: list
    params: ag.ParamSet

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        tape = ag.Tape("eval")
        return ag.softmax(ag.forward(self.net, self.params, np.asarray(x, dtype=np.float64), tape)).value

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)


def build_mlp(in_dim: int, n_classes: int, hidden=(128, 64)) -> list[ag.LayerSpec]:
    net, dim = [], in_dim
    for h in hidden:
        net += [ag.linear(dim, h), ag.relu_layer(h)]
        dim = h
    net.append(ag.linear(dim, n_classes))
    return net


def fit_mlp(x, y, rng: np.random.Generator, cfg: MLPConfig | None = None,
            n_classes: int | None = None) -> MLPModel:
    """Adam on mean cross-entropy, shuffled minibatches, fixed epoch count."""
    cfg = cfg or MLPConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(x) == 0:
        raise ValueError("empty training set")
    n_classes = n_classes or int(y.max()) + 1
    net = build_mlp(x.shape[1], n_classes, cfg.hidden)
    params = ag.init_params(net, "mlp", rng)
    onehot = np.eye(n_classes)[y]
    for _ in range(cfg.epochs):
        order = rng.permutation(len(x))
        for start in range(0, len(x), cfg.batch_size):
            rows = order[start: start + cfg.batch_size]
            tape = ag.Tape()
            logits = ag.forward(net, params, x[rows], tape)
            loss = -ag.sum_all(ag.log_softmax(logits) * onehot[rows]) / len(rows)
            ag.adam_step(params, ag.backward(tape, loss), cfg.lr)
    return MLPModel(net, params)
