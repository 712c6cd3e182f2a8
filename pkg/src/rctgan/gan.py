"""Residual conditional tabular GAN.

Three networks trained in alternation:

* generator: noise + conditional vector -> encoded row, through two
  residual-concat blocks (``Linear, BN, ReLU`` then concat with the block input);
* critic: ``pac`` packed rows (each with its conditional vector) -> a score,
  trained as a WGAN critic with gradient penalty; residual-concat blocks in
  ``rctgan`` mode, the plain LeakyReLU/Dropout net in ``ctgan`` mode;
* classifier (``rctgan`` mode only): one unpacked encoded row -> N real
  classes plus a "synthetic" class.

The generator minimizes the critic's negated score, the classifier's
cross-entropy toward the row's real class, and the conditional-consistency
cross-entropy between the conditioned column and what it generated.
"""

from __future__ import annotations

import io
import logging
import struct
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable

import numpy as np
import pandas as pd

from . import autograd as ag
from .autograd import ParamSet, Tape, Var
from .codec import (ConditionalSampler, EncodedMatrix, TableSchema, condition_for,
                    decode, encode, sample_conditions)

log = logging.getLogger(__name__)

CKPT_MAGIC = b"RCTG"
CKPT_VERSION = 1
LOG_FLOOR = 1e-12
GP_NORM_EPS = 1e-12


class TrainingDivergence(RuntimeError):
    """A loss went non-finite during training."""


class CheckpointError(ValueError):
    pass


# --------------------------------------------------------------------------- config


@dataclass
class GanConfig:
    noise_dim: int = 128
    pac: int = 10
    batch_size: int = 500
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.9
    adam_eps: float = 1e-8
    epochs: int = 300
    steps_per_epoch: int = 0  # 0: rows // batch_size
    gp_lambda: float = 10.0
    gumbel_tau: float = 0.2
    gen_width: int = 256
    gen_blocks: int = 2
    critic_width: int = 256
    critic_blocks: int = 2
    critic_residual: bool = True
    classifier_dims: tuple = (256, 128)
    classifier_dropout: float = 0.5
    leaky_alpha: float = 0.2
    critic_dropout: float = 0.5
    mode: str = "rctgan"

    def __post_init__(self):
        self.classifier_dims = tuple(int(d) for d in self.classifier_dims)
        self.validate()

    def validate(self):
        if self.mode not in ("rctgan", "ctgan"):
            raise ValueError(f"mode must be rctgan or ctgan, got {self.mode!r}")
        for name in ("noise_dim", "pac", "batch_size", "gen_width", "gen_blocks",
                     "critic_width", "critic_blocks"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epochs < 0 or self.steps_per_epoch < 0:
            raise ValueError("epochs and steps_per_epoch must be non-negative")
        if self.batch_size % self.pac:
            raise ValueError(f"batch_size {self.batch_size} is not divisible by pac {self.pac}")
        if any(d <= 0 for d in self.classifier_dims):
            raise ValueError("classifier dims must be positive")

    @property
    def uses_classifier(self) -> bool:
        return self.mode == "rctgan"

    @property
    def residual_critic(self) -> bool:
        return self.mode == "rctgan" and self.critic_residual

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(map(str, v))
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GanConfig":
        vals = {}
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if ln:
                k, _, v = ln.partition("=")
                vals[k.strip()] = v.strip()
        return cls.from_strings(vals)

    @classmethod
    def from_strings(cls, vals: dict[str, str]) -> "GanConfig":
        types = {f.name: f.type for f in fields(cls)}
        defaults = asdict(cls())
        kw = {}
        for k, v in vals.items():
            if k not in types:
                raise ValueError(f"unknown GAN config key {k!r}")
            kw[k] = _parse_like(defaults[k], v)
        return cls(**kw)


def _parse_like(default, text: str):
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        return tuple(int(x) for x in text.split(",") if x.strip())
    return text


# --------------------------------------------------------------------------- networks


def build_generator(cfg: GanConfig, schema: TableSchema) -> list[ag.LayerSpec]:
    dim = cfg.noise_dim + schema.cond_width
    net: list[ag.LayerSpec] = []
    for _ in range(cfg.gen_blocks):
        net += ag.residual_block(dim, cfg.gen_width)
        dim += cfg.gen_width
    net.append(ag.linear(dim, schema.encoded_width))
    return net


def build_critic(cfg: GanConfig, schema: TableSchema) -> list[ag.LayerSpec]:
    dim = cfg.pac * (schema.encoded_width + schema.cond_width)
    net: list[ag.LayerSpec] = []
    for _ in range(cfg.critic_blocks):
        if cfg.residual_critic:
            net += ag.residual_block(dim, cfg.critic_width)
            dim += cfg.critic_width
        else:
            net += [ag.linear(dim, cfg.critic_width), ag.leaky_layer(cfg.critic_width, cfg.leaky_alpha),
                    ag.dropout_layer(cfg.critic_width, cfg.critic_dropout)]
            dim = cfg.critic_width
    net.append(ag.linear(dim, 1))
    return net


def build_classifier(cfg: GanConfig, schema: TableSchema) -> list[ag.LayerSpec]:
    dim = schema.encoded_width
    net: list[ag.LayerSpec] = []
    for width in cfg.classifier_dims:
        net += [ag.linear(dim, width), ag.leaky_layer(width, cfg.leaky_alpha),
                ag.dropout_layer(width, cfg.classifier_dropout)]
        dim = width
    n_out = schema.n_classes + 1
    net += [ag.linear(dim, n_out), ag.softmax_layer(n_out)]
    return net


@dataclass
class Networks:
    generator: list
    critic: list
    classifier: list | None

    @classmethod
    def build(cls, cfg: GanConfig, schema: TableSchema) -> "Networks":
        return cls(build_generator(cfg, schema), build_critic(cfg, schema),
                   build_classifier(cfg, schema) if cfg.uses_classifier else None)


# --------------------------------------------------------------------------- ops


def pack(rows, pac: int):
    """Concatenate consecutive groups of ``pac`` rows feature-wise.

    Works on arrays and on tape variables (as a differentiable reshape).
    """
    n, w = rows.shape
    if pac <= 0 or n % pac:
        raise ValueError(f"{n} rows cannot be packed in groups of {pac}")
    if isinstance(rows, Var):
        return ag.reshape(rows, n // pac, pac * w)
    return np.asarray(rows, dtype=np.float64).reshape(n // pac, pac * w)


def _nonempty(x, what):
    size = x.value.size if isinstance(x, Var) else np.size(x)
    if size == 0:
        raise ValueError(f"{what}: empty input")


def loss_g(fake_scores):
    """Negated mean critic score of generated samples."""
    _nonempty(fake_scores, "loss_g")
    if isinstance(fake_scores, Var):
        return -ag.mean_all(fake_scores)
    return -float(np.mean(fake_scores))


def loss_d(real_scores, fake_scores):
    """Negated gap between mean real and mean fake critic scores."""
    _nonempty(real_scores, "loss_d")
    _nonempty(fake_scores, "loss_d")
    if isinstance(real_scores, Var) or isinstance(fake_scores, Var):
        return ag.mean_all(fake_scores) - ag.mean_all(real_scores)
    return -(float(np.mean(real_scores)) - float(np.mean(fake_scores)))


def loss_c(pred, target):
    """Mean over rows of ``-sum(target * log(pred))``, log clamped at 1e-12."""
    pv = pred.value if isinstance(pred, Var) else np.asarray(pred, dtype=np.float64)
    tv = np.asarray(target, dtype=np.float64)
    if pv.shape != tv.shape:
        raise ValueError(f"loss_c: prediction {pv.shape} vs target {tv.shape}")
    if isinstance(pred, Var):
        return -ag.sum_all(ag.log(pred, floor=LOG_FLOOR) * tv) / pv.shape[0]
    return float(-(tv * np.log(np.maximum(pv, LOG_FLOOR))).sum() / pv.shape[0])


def loss_total(loss_d_value, loss_c_value):
    if isinstance(loss_d_value, Var) or isinstance(loss_c_value, Var):
        return loss_d_value + loss_c_value
    total = float(loss_d_value) + float(loss_c_value)
    if not np.isfinite(total):
        raise ValueError("loss_total: non-finite input")
    return total


def gradient_penalty(critic: list, params: ParamSet, real_packed, fake_packed,
                     rng: np.random.Generator, gp_lambda: float, tape: Tape,
                     dropout_rng: np.random.Generator | None = None) -> Var:
    """``gp_lambda * mean((|grad_x critic(x_hat)| - 1)^2)`` on random interpolates.

    One interpolation weight per pack. The gradient is built on ``tape`` so
    the result backpropagates into the critic parameters.
    """
    real = np.asarray(real_packed.value if isinstance(real_packed, Var) else real_packed)
    fake = np.asarray(fake_packed.value if isinstance(fake_packed, Var) else fake_packed)
    if real.shape != fake.shape:
        raise ValueError(f"gradient_penalty: real {real.shape} vs fake {fake.shape}")
    u = rng.random((real.shape[0], 1))
    x_hat = u * real + (1.0 - u) * fake
    _, grad = ag.input_gradient_graph(critic, params, x_hat, tape, rng=dropout_rng or rng)
    norm = ag.sqrt(ag.sum_cols(ag.square(grad)) + GP_NORM_EPS)
    return ag.mean_all(ag.square(norm - 1.0)) * gp_lambda


def _gumbel_softmax(logits: Var, tau: float, rng: np.random.Generator) -> Var:
    u = rng.random(logits.shape)
    g = -np.log(-np.log(np.clip(u, 1e-20, 1 - 1e-12)))
    return ag.softmax((logits + g) * (1.0 / tau))


def apply_activations(raw: Var, schema: TableSchema, tau: float, rng: np.random.Generator) -> Var:
    """tanh on alpha slices, gumbel-softmax on one-hot slices."""
    parts = []
    for span in schema.spans():
        piece = ag.slice_cols(raw, span.offset, span.offset + span.width)
        parts.append(ag.tanh(piece) if span.role == "alpha" else _gumbel_softmax(piece, tau, rng))
    return ag.concat_cols(parts)


def harden(data: np.ndarray, schema: TableSchema) -> np.ndarray:
    """Snap every one-hot slice to its argmax."""
    out = data.copy()
    for span in schema.spans():
        if span.role == "alpha":
            continue
        block = out[:, span.offset: span.offset + span.width]
        hard = np.zeros_like(block)
        hard[np.arange(len(block)), block.argmax(axis=1)] = 1.0
        out[:, span.offset: span.offset + span.width] = hard
    return out


def _generator_forward(net, params, cond: np.ndarray, cfg: GanConfig, schema: TableSchema,
                       rng: np.random.Generator, tape: Tape) -> tuple[Var, Var]:
    if cond.shape[1] != schema.cond_width:
        raise ValueError(f"cond width {cond.shape[1]} != schema cond width {schema.cond_width}")
    z = rng.standard_normal((cond.shape[0], cfg.noise_dim))
    raw = ag.forward(net, params, np.hstack([z, cond]), tape, rng=rng)
    return raw, apply_activations(raw, schema, cfg.gumbel_tau, rng)


def generate(gen_params: ParamSet, schema: TableSchema, cfg: GanConfig, cond: np.ndarray,
             rng: np.random.Generator, hard: bool = True, training: bool = False) -> EncodedMatrix:
    """Draw rows for a batch of conditional vectors.

    ``hard`` snaps one-hot slices to argmax (sampling time). ``training``
    uses batch statistics in batchnorm instead of the running averages.
    """
    net = build_generator(cfg, schema)
    tape = Tape("train" if training else "eval")
    cond = np.atleast_2d(np.asarray(cond, dtype=np.float64))
    _, out = _generator_forward(net, gen_params, cond, cfg, schema, rng, tape)
    data = harden(out.value, schema) if hard else out.value.copy()
    return EncodedMatrix(data, schema.spans())


# --------------------------------------------------------------------------- training


@dataclass
class StepMetrics:
    step: int
    loss_d: float
    loss_c: float
    loss_g: float
    gp: float


@dataclass
class GanState:
    cfg: GanConfig
    schema: TableSchema
    nets: Networks
    generator: ParamSet
    critic: ParamSet
    classifier: ParamSet | None
    data: np.ndarray
    sampler: ConditionalSampler
    step: int = 0

    @classmethod
    def init(cls, encoded: EncodedMatrix, schema: TableSchema, cfg: GanConfig,
             rng: np.random.Generator) -> "GanState":
        nets = Networks.build(cfg, schema)
        gen = ag.init_params(nets.generator, "generator", rng)
        critic = ag.init_params(nets.critic, "critic", rng)
        clf = ag.init_params(nets.classifier, "classifier", rng) if nets.classifier else None
        sampler = ConditionalSampler(encoded, schema)
        target_groups = sampler.groups[[c.name for c in schema.discrete_columns].index(schema.target)]
        for cat, pool in zip(schema.target_meta.categories, target_groups):
            if len(pool) == 0:
                raise ValueError(f"no training rows of class {cat!r}")
        return cls(cfg, schema, nets, gen, critic, clf, encoded.data, sampler)


def _target_labels(state: GanState, rows: np.ndarray) -> np.ndarray:
    span = state.schema.category_span(state.schema.target)
    return rows[:, span.offset: span.offset + span.width].argmax(axis=1)


def _onehot(labels: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((len(labels), width))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def _cond_loss(raw: Var, schema: TableSchema, col_ids: np.ndarray, cat_ids: np.ndarray) -> Var:
    """Cross-entropy between each row's conditioned column logits and its condition."""
    n = raw.shape[0]
    total = None
    for j, meta in enumerate(schema.discrete_columns):
        rows = col_ids == j
        if not rows.any():
            continue
        span = schema.category_span(meta.name)
        logp = ag.log_softmax(ag.slice_cols(raw, span.offset, span.offset + span.width))
        target = np.zeros((n, span.width))
        target[np.flatnonzero(rows), cat_ids[rows]] = 1.0
        term = ag.sum_all(logp * target)
        total = term if total is None else total + term
    return -total / n


def _check(value: float, what: str, step: int):
    if not np.isfinite(value):
        raise TrainingDivergence(f"step {step}: {what} is {value}")


def train_step(state: GanState, rng: np.random.Generator) -> StepMetrics:
    """One critic update, one classifier update (rctgan mode), one generator update."""
    cfg, schema = state.cfg, state.schema
    B = cfg.batch_size
    try:
        # (a) critic
        col, cat, cond = sample_conditions(schema, B, rng)
        perm = rng.permutation(B)
        real = state.data[state.sampler.draw(col[perm], cat[perm], rng)]
        real_cond = cond[perm]
        _, fake_var = _generator_forward(state.nets.generator, state.generator, cond, cfg,
                                         schema, rng, Tape())
        fake = fake_var.value
        real_p = pack(np.hstack([real, real_cond]), cfg.pac)
        fake_p = pack(np.hstack([fake, cond]), cfg.pac)
        n_packs = real_p.shape[0]
        tape = Tape()
        # real and fake packs share one batch so batchnorm cannot normalize away
        # a shift between the two distributions
        scores = ag.forward(state.nets.critic, state.critic, np.vstack([real_p, fake_p]), tape, rng=rng)
        ld = loss_d(ag.slice_rows(scores, 0, n_packs), ag.slice_rows(scores, n_packs, 2 * n_packs))
        gp = gradient_penalty(state.nets.critic, state.critic, real_p, fake_p, rng, cfg.gp_lambda, tape)
        ag.adam_step(state.critic, ag.backward(tape, ld + gp), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
        ld_v, gp_v = ld.value[0, 0], gp.value[0, 0]

        # (b) classifier
        lc_v = 0.0
        n_cls = schema.n_classes
        if cfg.uses_classifier:
            labels = np.concatenate([_target_labels(state, real), np.full(B, n_cls)])
            tape = Tape()
            pred = ag.forward(state.nets.classifier, state.classifier, np.vstack([real, fake]), tape, rng=rng)
            lc = loss_c(pred, _onehot(labels, n_cls + 1))
            ag.adam_step(state.classifier, ag.backward(tape, lc), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
            lc_v = lc.value[0, 0]

        # (c) generator
        col, cat, cond = sample_conditions(schema, B, rng)
        tape = Tape()
        raw, fake_var = _generator_forward(state.nets.generator, state.generator, cond, cfg, schema, rng, tape)
        joint = ag.concat_rows([real_p, pack(ag.concat_cols([fake_var, cond]), cfg.pac)])
        scores = ag.forward(state.nets.critic, state.critic, joint, tape, rng=rng, update_stats=False)
        y_fake = ag.slice_rows(scores, n_packs, 2 * n_packs)
        total = loss_g(y_fake) + _cond_loss(raw, schema, col, cat)
        if cfg.uses_classifier:
            target_j = [c.name for c in schema.discrete_columns].index(schema.target)
            own = _target_labels(state, fake_var.value)
            labels = np.where(col == target_j, cat, own)
            pred = ag.forward(state.nets.classifier, state.classifier, fake_var, tape, rng=rng,
                              update_stats=False)
            total = total + loss_c(pred, _onehot(labels, n_cls + 1))
        ag.adam_step(state.generator, ag.backward(tape, total), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
        lg_v = total.value[0, 0]
    except ag.NonFiniteError as exc:
        raise TrainingDivergence(f"step {state.step}: {exc}") from exc
    for name, v in (("loss_d", ld_v), ("gp", gp_v), ("loss_c", lc_v), ("loss_g", lg_v)):
        _check(v, name, state.step)
    metrics = StepMetrics(state.step, float(ld_v), float(lc_v), float(lg_v), float(gp_v))
    state.step += 1
    return metrics


# --------------------------------------------------------------------------- checkpoint


@dataclass
class Checkpoint:
    schema: TableSchema
    config: GanConfig
    params: dict[str, ParamSet]
    seed: int
    metrics: list[StepMetrics] = field(default_factory=list, repr=False)

    def blocks(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for role in ("generator", "critic", "classifier"):
            ps = self.params.get(role)
            if ps is None:
                continue
            out += [(f"{role}.{k}", v) for k, v in ps.blocks.items()]
            out += [(f"{role}.{k}", v) for k, v in ps.buffers.items()]
        return out

    def to_bytes(self) -> bytes:
        """Little-endian container::

            b"RCTG" | u32 version | u32 n + schema text | u32 n + config text
            | u64 seed | u32 block count
            | per block: u16 n + name | u32 rows | u32 cols | rows*cols f64
        """
        buf = io.BytesIO()
        buf.write(CKPT_MAGIC)
        buf.write(struct.pack("<I", CKPT_VERSION))
        for text in (self.schema.to_text(), self.config.to_text()):
            raw = text.encode("utf-8")
            buf.write(struct.pack("<I", len(raw)))
            buf.write(raw)
        buf.write(struct.pack("<Q", self.seed))
        blocks = self.blocks()
        buf.write(struct.pack("<I", len(blocks)))
        for name, arr in blocks:
            raw = name.encode("utf-8")
            buf.write(struct.pack("<H", len(raw)))
            buf.write(raw)
            buf.write(struct.pack("<II", *arr.shape))
            buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        view = memoryview(data)
        pos = 0

        def take(n):
            nonlocal pos
            if pos + n > len(view):
                raise CheckpointError("truncated checkpoint")
            out = view[pos: pos + n]
            pos += n
            return out

        if bytes(take(4)) != CKPT_MAGIC:
            raise CheckpointError("bad checkpoint magic")
        (version,) = struct.unpack("<I", take(4))
        if version != CKPT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        texts = []
        for _ in range(2):
            (n,) = struct.unpack("<I", take(4))
            texts.append(bytes(take(n)).decode("utf-8"))
        schema = TableSchema.from_text(texts[0])
        cfg = GanConfig.from_text(texts[1])
        (seed,) = struct.unpack("<Q", take(8))
        (count,) = struct.unpack("<I", take(4))
        raw_blocks = {}
        for _ in range(count):
            (n,) = struct.unpack("<H", take(2))
            name = bytes(take(n)).decode("utf-8")
            rows, cols = struct.unpack("<II", take(8))
            arr = np.frombuffer(bytes(take(8 * rows * cols)), dtype="<f8").reshape(rows, cols)
            raw_blocks[name] = arr.astype(np.float64)
        if pos != len(view):
            raise CheckpointError("trailing bytes after checkpoint")
        nets = Networks.build(cfg, schema)
        params = {}
        for role, net in (("generator", nets.generator), ("critic", nets.critic),
                          ("classifier", nets.classifier)):
            if net is None:
                continue
            template = ag.init_params(net, role, np.random.default_rng(0))
            for k in list(template.blocks) + list(template.buffers):
                key = f"{role}.{k}"
                if key not in raw_blocks:
                    raise CheckpointError(f"checkpoint lacks block {key}")
                store = template.blocks if k in template.blocks else template.buffers
                if raw_blocks[key].shape != store[k].shape:
                    raise CheckpointError(f"block {key} has shape {raw_blocks[key].shape}, "
                                          f"config implies {store[k].shape}")
                store[k] = raw_blocks.pop(key).copy()
            params[role] = template
        if raw_blocks:
            raise CheckpointError(f"unexpected blocks: {sorted(raw_blocks)}")
        return cls(schema, cfg, params, seed)

    def save(self, path) -> None:
        from ._io import atomic_write_bytes
        atomic_write_bytes(path, self.to_bytes())

    @classmethod
    def load(cls, path) -> "Checkpoint":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


# --------------------------------------------------------------------------- fit / sample


Hook = Callable[[StepMetrics], None]


def fit(rows: pd.DataFrame, schema: TableSchema, cfg: GanConfig, seed: int,
        hooks: Iterable[Hook] = ()) -> Checkpoint:
    """Train on ``rows`` and return the final checkpoint.

    Runs ``epochs * steps_per_epoch`` steps (``steps_per_epoch`` defaults to
    ``len(rows) // batch_size``, at least 1). Every step's metrics go to each hook.
    """
    rng = np.random.default_rng(seed)
    encoded = encode(rows, schema, rng)
    state = GanState.init(encoded, schema, cfg, rng)
    per_epoch = cfg.steps_per_epoch or max(1, len(rows) // cfg.batch_size)
    hooks = list(hooks)
    history = []
    for _ in range(cfg.epochs * per_epoch):
        m = train_step(state, rng)
        history.append(m)
        for h in hooks:
            h(m)
    params = {"generator": state.generator, "critic": state.critic}
    if state.classifier is not None:
        params["classifier"] = state.classifier
    return Checkpoint(schema, cfg, params, seed, history)


def sample(ckpt: Checkpoint, cls, count: int, seed: int = 0, max_rounds: int = 50) -> pd.DataFrame:
    """``count`` decoded rows of target class ``cls``.

    Rows are generated with the condition fixed to ``cls``; rows whose own
    target slice disagrees are rejected and redrawn for up to ``max_rounds``
    rounds, after which any shortfall is filled with the condition's class.
    """
    schema, cfg = ckpt.schema, ckpt.config
    cond = condition_for(schema, schema.target, cls)
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return decode(np.zeros((0, schema.encoded_width)), schema)
    rng = np.random.default_rng(seed)
    span = schema.category_span(schema.target)
    kept = []
    have = 0
    for _ in range(max_rounds):
        n = max(count - have, 1)
        out = generate(ckpt.params["generator"], schema, cfg, np.tile(cond.vector, (n, 1)), rng).data
        ok = out[:, span.offset: span.offset + span.width].argmax(axis=1) == cond.category_id
        kept.append(out[ok])
        have += int(ok.sum())
        if have >= count:
            break
    data = np.vstack(kept)[:count]
    if len(data) < count:
        log.info("sample: %d of %d rows forced to class %r after rejection rounds",
                 count - len(data), count, cls)
        extra = generate(ckpt.params["generator"], schema, cfg,
                         np.tile(cond.vector, (count - len(data), 1)), rng).data
        data = np.vstack([data, extra])
    data[:, span.offset: span.offset + span.width] = _onehot(
        np.full(count, cond.category_id), span.width)
    return decode(data, schema)


class MetricsCSV:
    """Hook that appends ``step,loss_d,loss_c,loss_g,gp`` lines to a text buffer."""

    header = "step,loss_d,loss_c,loss_g,gp"

    def __init__(self):
        self.lines = [self.header]

    def __call__(self, m: StepMetrics) -> None:
        self.lines.append(f"{m.step},{m.loss_d!r},{m.loss_c!r},{m.loss_g!r},{m.gp!r}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def metrics_to_csv(metrics: Iterable[StepMetrics]) -> str:
    w = MetricsCSV()
    for m in metrics:
        w(m)
    return w.text()
