"""Small dense reverse-mode differentiation engine.

Everything is a 2-D float64 array. A :class:`Tape` records every operation
applied to :class:`Var` handles; :func:`backward` walks the tape once in
reverse and returns gradients for every parameter block bound to it.

Networks are flat lists of :class:`LayerSpec`. A ``concat`` layer closes a
residual block: it concatenates the block's input with the current
activation, so ``[linear, batchnorm1d, relu, concat]`` is the block
``concat(x, relu(bn(linear(x))))``.

The gradient penalty needs d critic / d input as something that can itself be
differentiated. :func:`input_gradient_graph` builds that gradient out of the
same tape primitives, layer by layer, so an ordinary first-order
:func:`backward` over the tape picks up the second-order terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

Tensor2 = np.ndarray

BN_MOMENTUM = 0.9
BN_EPS = 1e-5


class NonFiniteError(FloatingPointError):
    """An operation produced NaN or Inf."""


class ShapeError(ValueError):
    pass


def as_tensor2(x) -> Tensor2:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D tensor, got shape {a.shape}")
    return a


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    for axis in (0, 1):
        if shape[axis] == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Var:
    """Handle to one node on a tape."""

    __slots__ = ("tape", "id")

    def __init__(self, tape: "Tape", node_id: int):
        self.tape = tape
        self.id = node_id

    @property
    def value(self) -> np.ndarray:
        return self.tape.values[self.id]

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def __repr__(self):
        return f"Var(id={self.id}, shape={self.shape})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)


class Tape:
    """Ordered record of operations. Node ids are creation order, hence topological."""

    def __init__(self, mode: str = "train"):
        if mode not in ("train", "eval"):
            raise ValueError(f"unknown tape mode {mode!r}")
        self.mode = mode
        self.values: list[np.ndarray] = []
        self.parents: list[tuple] = []
        self.backfns: list[Callable | None] = []
        self.kinds: list[str] = []
        self.leaves: dict[str, int] = {}

    @property
    def training(self) -> bool:
        return self.mode == "train"

    def __len__(self):
        return len(self.values)

    def _push(self, kind: str, value: np.ndarray, parents=(), backfn=None) -> Var:
        if not np.all(np.isfinite(value)):
            raise NonFiniteError(f"non-finite values produced by op {kind!r} (node {len(self.values)})")
        self.values.append(value)
        self.parents.append(tuple(parents))
        self.backfns.append(backfn)
        self.kinds.append(kind)
        return Var(self, len(self.values) - 1)

    def constant(self, value) -> Var:
        return self._push("const", as_tensor2(value))

    def leaf(self, name: str, value) -> Var:
        """A named differentiable input; :func:`backward` reports its gradient."""
        if name in self.leaves:
            return Var(self, self.leaves[name])
        v = self._push("leaf", as_tensor2(value))
        self.leaves[name] = v.id
        return v

    def param(self, params: "ParamSet", block: str) -> Var:
        return self.leaf(f"{params.name}.{block}", params.blocks[block])


def _lift(tape: Tape, x) -> tuple[int | None, np.ndarray]:
    if isinstance(x, Var):
        if x.tape is not tape:
            raise ValueError("operands live on different tapes")
        return x.id, x.value
    return None, as_tensor2(x) if not np.isscalar(x) else np.float64(x)


def _tape_of(*xs) -> Tape:
    for x in xs:
        if isinstance(x, Var):
            return x.tape
    raise TypeError("at least one operand must be a Var")


def _binary(kind, a, b, fwd, da, db) -> Var:
    tape = _tape_of(a, b)
    ia, va = _lift(tape, a)
    ib, vb = _lift(tape, b)
    out = np.asarray(fwd(va, vb), dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"{kind}: result is not 2-D")
    sa, sb = np.shape(va), np.shape(vb)

    def backfn(g):
        ga = _unbroadcast(da(g, va, vb), sa) if ia is not None else None
        gb = _unbroadcast(db(g, va, vb), sb) if ib is not None else None
        return ga, gb

    return tape._push(kind, out, (ia, ib), backfn)


def add(a, b) -> Var:
    return _binary("add", a, b, np.add, lambda g, x, y: g, lambda g, x, y: g)


def sub(a, b) -> Var:
    return _binary("sub", a, b, np.subtract, lambda g, x, y: g, lambda g, x, y: -g)


def mul(a, b) -> Var:
    return _binary("mul", a, b, np.multiply, lambda g, x, y: g * y, lambda g, x, y: g * x)


def div(a, b) -> Var:
    return _binary(
        "div", a, b, np.divide,
        lambda g, x, y: g / y,
        lambda g, x, y: -g * x / (y * y),
    )


def matmul(a, b) -> Var:
    tape = _tape_of(a, b)
    ia, va = _lift(tape, a)
    ib, vb = _lift(tape, b)
    if va.shape[1] != vb.shape[0]:
        raise ShapeError(f"matmul: {va.shape} @ {vb.shape}")

    def backfn(g):
        return (g @ vb.T if ia is not None else None,
                va.T @ g if ib is not None else None)

    return tape._push("matmul", va @ vb, (ia, ib), backfn)


def _unary(kind, x: Var, value: np.ndarray, dfn) -> Var:
    return x.tape._push(kind, value, (x.id,), lambda g: (dfn(g),))


def transpose(x: Var) -> Var:
    return _unary("transpose", x, x.value.T.copy(), lambda g: g.T)


def relu(x: Var) -> Var:
    mask = x.value > 0
    return _unary("relu", x, np.where(mask, x.value, 0.0), lambda g: g * mask)


def leaky_relu(x: Var, alpha: float) -> Var:
    slope = np.where(x.value > 0, 1.0, alpha)
    return _unary("leaky_relu", x, x.value * slope, lambda g: g * slope)


def tanh(x: Var) -> Var:
    y = np.tanh(x.value)
    return _unary("tanh", x, y, lambda g: g * (1.0 - y * y))


def exp(x: Var) -> Var:
    y = np.exp(x.value)
    return _unary("exp", x, y, lambda g: g * y)


def log(x: Var, floor: float = 0.0) -> Var:
    v = np.maximum(x.value, floor) if floor > 0 else x.value
    # gradient is zero where the floor is active
    live = x.value >= floor if floor > 0 else True
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(v)
    return _unary("log", x, y, lambda g: g * live / v)


def sqrt(x: Var) -> Var:
    y = np.sqrt(x.value)
    return _unary("sqrt", x, y, lambda g: g * 0.5 / y)


def square(x: Var) -> Var:
    v = x.value
    return _unary("square", x, v * v, lambda g: 2.0 * g * v)


def sum_all(x: Var) -> Var:
    shape = x.shape
    return _unary("sum", x, np.array([[x.value.sum()]]), lambda g: np.broadcast_to(g, shape).copy())


def mean_all(x: Var) -> Var:
    shape, n = x.shape, x.value.size
    return _unary("mean", x, np.array([[x.value.mean()]]), lambda g: np.full(shape, g[0, 0] / n))


def mean_rows(x: Var) -> Var:
    """Column-wise mean over rows, shape (1, cols)."""
    n = x.shape[0]
    return _unary("mean_rows", x, x.value.mean(axis=0, keepdims=True),
                  lambda g: np.repeat(g / n, n, axis=0))


def sum_cols(x: Var) -> Var:
    """Row-wise sum across columns, shape (rows, 1)."""
    c = x.shape[1]
    return _unary("sum_cols", x, x.value.sum(axis=1, keepdims=True),
                  lambda g: np.repeat(g, c, axis=1))


def softmax(x: Var) -> Var:
    z = x.value - x.value.max(axis=1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=1, keepdims=True)
    return _unary("softmax", x, y, lambda g: y * (g - (g * y).sum(axis=1, keepdims=True)))


def log_softmax(x: Var) -> Var:
    z = x.value - x.value.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    y = z - lse
    p = np.exp(y)
    return _unary("log_softmax", x, y, lambda g: g - p * g.sum(axis=1, keepdims=True))


def slice_cols(x: Var, start: int, stop: int) -> Var:
    shape = x.shape

    def dfn(g):
        out = np.zeros(shape)
        out[:, start:stop] = g
        return out

    return _unary("slice", x, x.value[:, start:stop].copy(), dfn)


def slice_rows(x: Var, start: int, stop: int) -> Var:
    shape = x.shape

    def dfn(g):
        out = np.zeros(shape)
        out[start:stop] = g
        return out

    return _unary("slice_rows", x, x.value[start:stop].copy(), dfn)


def reshape(x: Var, rows: int, cols: int) -> Var:
    shape = x.shape
    if rows * cols != x.value.size:
        raise ShapeError(f"cannot reshape {shape} to ({rows}, {cols})")
    return _unary("reshape", x, x.value.reshape(rows, cols).copy(), lambda g: g.reshape(shape))


def concat_cols(xs: Sequence) -> Var:
    tape = _tape_of(*xs)
    lifted = [_lift(tape, x) for x in xs]
    vals = [as_tensor2(v) for _, v in lifted]
    rows = {v.shape[0] for v in vals}
    if len(rows) != 1:
        raise ShapeError(f"concat: row counts differ {sorted(rows)}")
    bounds = np.cumsum([0] + [v.shape[1] for v in vals])

    def backfn(g):
        return tuple(g[:, bounds[k]:bounds[k + 1]] if i is not None else None
                     for k, (i, _) in enumerate(lifted))

    return tape._push("concat", np.concatenate(vals, axis=1),
                      tuple(i for i, _ in lifted), backfn)


def concat_rows(xs: Sequence) -> Var:
    tape = _tape_of(*xs)
    lifted = [_lift(tape, x) for x in xs]
    vals = [as_tensor2(v) for _, v in lifted]
    bounds = np.cumsum([0] + [v.shape[0] for v in vals])

    def backfn(g):
        return tuple(g[bounds[k]:bounds[k + 1]] if i is not None else None
                     for k, (i, _) in enumerate(lifted))

    return tape._push("concat_rows", np.concatenate(vals, axis=0),
                      tuple(i for i, _ in lifted), backfn)


def backward(tape: Tape, loss: Var) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss w.r.t. every named leaf on the tape.

    Leaves the loss does not depend on get zero gradients. Raises if the loss
    is not 1x1 or reaches no leaf at all.
    """
    if loss.tape is not tape:
        raise ValueError("loss is not recorded on this tape")
    if loss.shape != (1, 1):
        raise ShapeError(f"loss must be 1x1, got {loss.shape}")
    grads: list[np.ndarray | None] = [None] * (loss.id + 1)
    grads[loss.id] = np.ones((1, 1))
    for nid in range(loss.id, -1, -1):
        g = grads[nid]
        fn = tape.backfns[nid]
        if g is None or fn is None:
            continue
        for pid, pg in zip(tape.parents[nid], fn(g)):
            if pid is None or pg is None:
                continue
            grads[pid] = pg if grads[pid] is None else grads[pid] + pg
    out = {}
    reached = False
    for name, nid in tape.leaves.items():
        g = grads[nid] if nid <= loss.id else None
        reached |= g is not None
        out[name] = np.zeros_like(tape.values[nid]) if g is None else g
    if not reached:
        raise ValueError("loss is detached from every parameter block")
    return out


# ---------------------------------------------------------------------------
# parameters and layers


class ParamSet:
    """Named trainable blocks, non-trainable buffers, and Adam state."""

    def __init__(self, name: str):
        self.name = name
        self.blocks: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def add(self, block: str, value) -> None:
        value = as_tensor2(value).copy()
        self.blocks[block] = value
        self.m[block] = np.zeros_like(value)
        self.v[block] = np.zeros_like(value)

    def grads_from(self, grads: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        prefix = self.name + "."
        return {k[len(prefix):]: g for k, g in grads.items() if k.startswith(prefix)}

    def copy(self) -> "ParamSet":
        ps = ParamSet(self.name)
        ps.blocks = {k: v.copy() for k, v in self.blocks.items()}
        ps.buffers = {k: v.copy() for k, v in self.buffers.items()}
        ps.m = {k: v.copy() for k, v in self.m.items()}
        ps.v = {k: v.copy() for k, v in self.v.items()}
        ps.t = self.t
        return ps

    def n_params(self) -> int:
        return sum(v.size for v in self.blocks.values())


def adam_step(params: ParamSet, grads: dict[str, np.ndarray], lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> ParamSet:
    """In-place Adam update with bias correction; returns ``params``.

    ``grads`` may be keyed either by bare block name or by the
    ``"<paramset>.<block>"`` keys :func:`backward` produces.
    """
    own = params.grads_from(grads) or grads
    for k in params.blocks:
        if k not in own:
            raise KeyError(f"no gradient for block {params.name}.{k}")
        if own[k].shape != params.blocks[k].shape:
            raise ShapeError(f"gradient shape {own[k].shape} != block {k} {params.blocks[k].shape}")
    params.t += 1
    t = params.t
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for k, p in params.blocks.items():
        g = own[k]
        m = params.m[k]
        v = params.v[k]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params


LAYER_KINDS = ("linear", "batchnorm1d", "relu", "leakyrelu", "dropout", "softmax", "tanh", "concat")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_dim: int
    out_dim: int
    alpha: float = 0.2
    p: float = 0.5

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.in_dim <= 0 or self.out_dim <= 0:
            raise ValueError("layer dims must be positive")
        if self.kind == "leakyrelu" and not 0 < self.alpha < 1:
            raise ValueError("leaky slope must lie in (0, 1)")
        if self.kind == "dropout" and not 0 < self.p < 1:
            raise ValueError("dropout rate must lie in (0, 1)")


def linear(i, o):
    return LayerSpec("linear", i, o)


def batchnorm(d):
    return LayerSpec("batchnorm1d", d, d)


def relu_layer(d):
    return LayerSpec("relu", d, d)


def leaky_layer(d, alpha=0.2):
    return LayerSpec("leakyrelu", d, d, alpha=alpha)


def dropout_layer(d, p=0.5):
    return LayerSpec("dropout", d, d, p=p)


def softmax_layer(d):
    return LayerSpec("softmax", d, d)


def tanh_layer(d):
    return LayerSpec("tanh", d, d)


def residual_block(in_dim: int, width: int) -> list[LayerSpec]:
    """``concat(x, relu(bn(linear(x))))``, output width ``in_dim + width``."""
    return [linear(in_dim, width), batchnorm(width), relu_layer(width),
            LayerSpec("concat", width, in_dim + width)]


def check_net(net: Sequence[LayerSpec]) -> None:
    if not net:
        raise ValueError("empty network")
    block_in = net[0].in_dim
    cur = net[0].in_dim
    for i, layer in enumerate(net):
        if layer.kind == "concat":
            if layer.in_dim != cur or layer.out_dim != cur + block_in:
                raise ShapeError(f"layer {i}: concat dims {layer.in_dim}->{layer.out_dim} "
                                 f"do not match block input {block_in} + {cur}")
            cur = layer.out_dim
            block_in = cur
            continue
        if layer.in_dim != cur:
            raise ShapeError(f"layer {i} ({layer.kind}) expects {layer.in_dim} inputs, gets {cur}")
        cur = layer.out_dim


def net_dims(net: Sequence[LayerSpec]) -> list[int]:
    """Input width, then the width entering each later linear layer, then the output width."""
    dims = [net[0].in_dim]
    for i, layer in enumerate(net):
        if i + 1 == len(net) or net[i + 1].kind == "linear":
            dims.append(layer.out_dim)
    return dims


def init_params(net: Sequence[LayerSpec], name: str, rng: np.random.Generator) -> ParamSet:
    """Uniform(+-sqrt(1/fan_in)) weights, zero biases, unit BN scale."""
    check_net(net)
    ps = ParamSet(name)
    for i, layer in enumerate(net):
        if layer.kind == "linear":
            bound = np.sqrt(1.0 / layer.in_dim)
            ps.add(f"{i}.weight", rng.uniform(-bound, bound, size=(layer.in_dim, layer.out_dim)))
            ps.add(f"{i}.bias", np.zeros((1, layer.out_dim)))
        elif layer.kind == "batchnorm1d":
            ps.add(f"{i}.gamma", np.ones((1, layer.out_dim)))
            ps.add(f"{i}.beta", np.zeros((1, layer.out_dim)))
            ps.buffers[f"{i}.running_mean"] = np.zeros((1, layer.out_dim))
            ps.buffers[f"{i}.running_var"] = np.ones((1, layer.out_dim))
    return ps


@dataclass
class _Trace:
    """Per-layer record kept for building input gradients."""
    layer: LayerSpec
    index: int
    x: Var
    y: Var
    aux: dict


def forward(net: Sequence[LayerSpec], params: ParamSet, x, tape: Tape,
            rng: np.random.Generator | None = None, trace: list | None = None,
            update_stats: bool = True) -> Var:
    """Run ``net`` on ``x`` and record it on ``tape``.

    In eval mode batchnorm uses its running statistics and dropout is the
    identity. Training-mode dropout draws its mask from ``rng``.
    """
    if not isinstance(x, Var):
        x = tape.constant(x)
    if x.shape[1] != net[0].in_dim:
        raise ShapeError(f"network expects {net[0].in_dim} input columns, got {x.shape[1]}")
    h = x
    block_in = x
    for i, layer in enumerate(net):
        aux: dict = {}
        inp = h
        kind = layer.kind
        if kind == "linear":
            aux["weight"] = tape.param(params, f"{i}.weight")
            h = matmul(h, aux["weight"]) + tape.param(params, f"{i}.bias")
        elif kind == "batchnorm1d":
            gamma = tape.param(params, f"{i}.gamma")
            beta = tape.param(params, f"{i}.beta")
            if tape.training:
                n = h.shape[0]
                if n < 2:
                    raise ShapeError("batchnorm needs at least 2 rows in training mode")
                mu = mean_rows(h)
                centered = h - mu
                var = mean_rows(square(centered))
                inv_std = div(1.0, sqrt(var + BN_EPS))
                xhat = centered * inv_std
                if update_stats:
                    rm = params.buffers[f"{i}.running_mean"]
                    rv = params.buffers[f"{i}.running_var"]
                    rm *= BN_MOMENTUM
                    rm += (1 - BN_MOMENTUM) * mu.value
                    rv *= BN_MOMENTUM
                    rv += (1 - BN_MOMENTUM) * var.value * n / (n - 1)
                aux.update(xhat=xhat, inv_std=inv_std)
            else:
                inv_std = 1.0 / np.sqrt(params.buffers[f"{i}.running_var"] + BN_EPS)
                xhat = (h - params.buffers[f"{i}.running_mean"]) * inv_std
                aux.update(inv_std_const=inv_std)
            aux["gamma"] = gamma
            h = xhat * gamma + beta
        elif kind == "relu":
            aux["slope"] = (h.value > 0).astype(np.float64)
            h = relu(h)
        elif kind == "leakyrelu":
            aux["slope"] = np.where(h.value > 0, 1.0, layer.alpha)
            h = leaky_relu(h, layer.alpha)
        elif kind == "dropout":
            if tape.training:
                if rng is None:
                    raise ValueError("training-mode dropout needs an rng")
                keep = 1.0 - layer.p
                mask = (rng.random(h.shape) < keep) / keep
                aux["slope"] = mask
                h = h * mask
            else:
                aux["slope"] = None
        elif kind == "softmax":
            h = softmax(h)
        elif kind == "tanh":
            h = tanh(h)
        elif kind == "concat":
            aux["skip_width"] = block_in.shape[1]
            h = concat_cols([block_in, h])
            block_in = h
        if trace is not None:
            trace.append(_Trace(layer, i, inp, h, aux))
    return h


def _layer_vjp(rec: _Trace, g: Var) -> Var:
    """Upstream gradient ``g`` w.r.t. the layer output -> gradient w.r.t. its input,
    expressed in tape primitives."""
    kind = rec.layer.kind
    if kind == "linear":
        return matmul(g, transpose(rec.aux["weight"]))
    if kind == "batchnorm1d":
        gg = g * rec.aux["gamma"]
        if "xhat" in rec.aux:
            xhat = rec.aux["xhat"]
            return rec.aux["inv_std"] * (gg - mean_rows(gg) - xhat * mean_rows(gg * xhat))
        return gg * rec.aux["inv_std_const"]
    if kind in ("relu", "leakyrelu"):
        return g * rec.aux["slope"]
    if kind == "dropout":
        return g if rec.aux["slope"] is None else g * rec.aux["slope"]
    if kind == "tanh":
        return g * (1.0 - square(rec.y))
    if kind == "softmax":
        y = rec.y
        return y * (g - sum_cols(g * y))
    raise NotImplementedError(f"no input-gradient construction registered for {kind!r}")


INPUT_GRADIENT_KINDS = ("linear", "batchnorm1d", "relu", "leakyrelu", "dropout", "tanh", "softmax", "concat")


def input_gradient_graph(net: Sequence[LayerSpec], params: ParamSet, x, tape: Tape,
                         rng: np.random.Generator | None = None,
                         update_stats: bool = False) -> tuple[Var, Var]:
    """Forward ``x`` through ``net`` and build d(sum of outputs)/dx on the tape.

    Returns ``(output, grad)``. ``grad`` has the shape of ``x`` and is made of
    differentiable tape ops, so a loss on it backpropagates into ``params``.
    For row-independent nets (no training-mode batchnorm) each row of ``grad``
    is that row's own input gradient; with batchnorm the batch coupling is
    included exactly.
    """
    for layer in net:
        if layer.kind not in INPUT_GRADIENT_KINDS:
            raise NotImplementedError(f"no input-gradient construction registered for {layer.kind!r}")
    if not isinstance(x, Var):
        x = tape.leaf(f"_input{len(tape)}", x)
    trace: list[_Trace] = []
    out = forward(net, params, x, tape, rng=rng, trace=trace, update_stats=update_stats)
    g = tape.constant(np.ones(out.shape))
    # stack of pending skip gradients, one per open residual block
    pending: list[Var] = []
    for rec in reversed(trace):
        if rec.layer.kind == "concat":
            w = rec.aux["skip_width"]
            total = rec.y.shape[1]
            pending.append(slice_cols(g, 0, w))
            g = slice_cols(g, w, total)
            continue
        g = _layer_vjp(rec, g)
        # reaching the first layer of a block: fold its skip gradient back in
        if pending and _starts_block(trace, rec):
            g = g + pending.pop()
    if pending:
        raise RuntimeError("unbalanced residual blocks in input-gradient construction")
    return out, g


def _starts_block(trace: list[_Trace], rec: _Trace) -> bool:
    return rec.index == 0 or trace[rec.index - 1].layer.kind == "concat"
