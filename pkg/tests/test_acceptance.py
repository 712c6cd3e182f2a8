"""Acceptance gate: one test per criterion, each recording a pass/fail line.

The lines are printed in pytest's terminal summary (see conftest.py).
Criteria 8 and 9 share one desk-scale experiment and take several minutes.
"""

import time

import numpy as np
import pandas as pd
import pytest

from rctgan import autograd as ag
from rctgan import cli, codec, gan
from rctgan.bench import (ConfusionMatrix, ExperimentConfig, SplitSpec, build_dataset, g_mean,
                          run_experiment)

from conftest import ACCEPTANCE_LINES
from helpers import central_difference, reference_shape_schema, rel_err
from test_autograd import _PRIMITIVES

# Reduced training for the desk-scale run; everything else stays at defaults.
DESK_EPOCHS = 100
DESK_SEEDS = 5
DESK_BUDGET_S = 15 * 60


def _record(n, ok, detail):
    ACCEPTANCE_LINES[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, detail


# ---------------------------------------------------------------- 1. gradients

_LAYERS = {
    "linear": lambda: [ag.linear(4, 3)],
    "relu": lambda: [ag.linear(4, 6), ag.relu_layer(6)],
    "leakyrelu": lambda: [ag.linear(4, 6), ag.leaky_layer(6, 0.2)],
    "tanh": lambda: [ag.linear(4, 6), ag.tanh_layer(6)],
    "batchnorm": lambda: [ag.linear(4, 6), ag.batchnorm(6)],
    "dropout": lambda: [ag.linear(4, 6), ag.dropout_layer(6, 0.5)],
    "softmax": lambda: [ag.linear(4, 6), ag.softmax_layer(6)],
    "residual": lambda: ag.residual_block(4, 5),
}


def _pre_batchnorm_biases(net):
    """Biases feeding straight into batchnorm: their gradient is identically zero."""
    return {f"{i}.bias" for i, (a, b) in enumerate(zip(net, net[1:]))
            if a.kind == "linear" and b.kind.startswith("batchnorm")}


def _worst_param_error(net, name, x, seed, n_coords=20):
    """Worst relative error over ``n_coords`` coordinates with a nonzero true gradient.

    Coordinates in pre-batchnorm biases are drawn too, but checked absolutely:
    relative error is meaningless when the exact value is 0.
    """
    ps = ag.init_params(net, name, np.random.default_rng(seed))
    weights = np.random.default_rng(seed + 1).normal(size=(x.shape[0], net[-1].out_dim))
    zero_blocks = _pre_batchnorm_biases(net)

    def run(tape):
        out = ag.forward(net, ps, x, tape, rng=np.random.default_rng(seed + 2), update_stats=False)
        return ag.sum_all(out * weights)

    tape = ag.Tape()
    grads = ps.grads_from(ag.backward(tape, run(tape)))
    pick = np.random.default_rng(seed + 3)
    blocks = sorted(ps.blocks)
    worst, checked = 0.0, 0
    while checked < n_coords:
        b = blocks[pick.integers(len(blocks))]
        idx = tuple(int(pick.integers(s)) for s in ps.blocks[b].shape)
        fd = central_difference(lambda: run(ag.Tape()).value[0, 0], ps.blocks[b], idx)
        if b in zero_blocks:
            if abs(grads[b][idx]) > 1e-12 or abs(fd) > 1e-8:
                return np.inf
            continue
        worst = max(worst, rel_err(grads[b][idx], fd))
        checked += 1
    return worst


def _worst_primitive_error(fn, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))

    def run():
        tape = ag.Tape()
        out = fn(tape.leaf("a", a), tape.leaf("b", b))
        wts = np.linspace(-1.0, 1.5, out.value.size).reshape(out.shape)
        return tape, ag.sum_all(out * wts)

    tape, loss = run()
    grads = ag.backward(tape, loss)
    worst = 0.0
    for key, arr in (("a", a), ("b", b)):
        for idx in np.ndindex(arr.shape):
            fd = central_difference(lambda: run()[1].value[0, 0], arr, idx)
            worst = max(worst, rel_err(grads[key][idx], fd))
    return worst


def test_criterion_1_gradient_correctness():
    t0 = time.perf_counter()
    errors = {}
    for i, (name, fn) in enumerate(sorted(_PRIMITIVES.items())):
        errors[name] = _worst_primitive_error(fn, 100 + i)
    x = np.random.default_rng(1).normal(size=(10, 4))
    for i, (name, make) in enumerate(sorted(_LAYERS.items())):
        errors["layer " + name] = _worst_param_error(make(), "net", x, 200 + i)
    schema = reference_shape_schema()
    cfg = gan.GanConfig()
    nets = gan.Networks.build(cfg, schema)
    rng = np.random.default_rng(2)
    cond = schema.cond_width
    errors["generator"] = _worst_param_error(
        nets.generator, "generator", rng.normal(size=(8, cfg.noise_dim + cond)), 300)
    errors["critic"] = _worst_param_error(
        nets.critic, "critic", rng.normal(size=(4, cfg.pac * (schema.encoded_width + cond))), 400)
    errors["classifier"] = _worst_param_error(
        nets.classifier, "classifier", rng.normal(size=(8, schema.encoded_width)), 500)
    elapsed = time.perf_counter() - t0
    worst = max(errors, key=errors.get)
    ok = errors[worst] < 1e-4 and elapsed < 60
    _record(1, ok, f"{len(errors)} ops/nets, worst rel err {errors[worst]:.2e} ({worst}), {elapsed:.1f}s")


# ---------------------------------------------------------------- 2. penalty oracle


def _linear_critic_penalty(norm):
    net = [ag.linear(6, 1)]
    ps = ag.init_params(net, "critic", np.random.default_rng(0))
    w = np.random.default_rng(1).normal(size=(6, 1))
    ps.blocks["0.weight"][:] = w / np.linalg.norm(w) * norm
    rng = np.random.default_rng(2)
    real, fake = rng.normal(size=(8, 6)), rng.normal(size=(8, 6))
    return gan.gradient_penalty(net, ps, real, fake, rng, 10.0, ag.Tape()).value[0, 0]


def test_criterion_2_gradient_penalty_oracle():
    p3, p1 = _linear_critic_penalty(3.0), _linear_critic_penalty(1.0)
    ok = abs(p3 - 40.0) <= 1e-6 and abs(p1) <= 1e-9
    _record(2, ok, f"|w|=3 -> {p3:.10f} (want 40), |w|=1 -> {p1:.2e} (want 0)")


# ---------------------------------------------------------------- 3. shapes


def test_criterion_3_table_shapes():
    schema = reference_shape_schema()
    nets = gan.Networks.build(gan.GanConfig(noise_dim=128, pac=10), schema)
    g, c, k = (ag.net_dims(n) for n in (nets.generator, nets.critic, nets.classifier))
    ok = (schema.encoded_width == 69 and g == [130, 386, 642, 69]
          and c == [710, 966, 1222, 1] and k[-1] == 3)
    _record(3, ok, f"generator {g}, critic {c}, classifier out {k[-1]}")


# ---------------------------------------------------------------- 4. codec round trip


def test_criterion_4_codec_round_trip():
    rng = np.random.default_rng(4)
    n = 1000
    comp = rng.random(n) < 0.4
    rows = pd.DataFrame({
        "bimodal": np.where(comp, rng.normal(-30, 3, n), rng.normal(50, 8, n)),
        "heavy": rng.lognormal(3.0, 1.2, n),
        "flat": rng.uniform(-1, 1, n),
        "colour": rng.choice(["red", "green", "blue", "grey"], n, p=[0.5, 0.3, 0.15, 0.05]),
        "failure": (rng.random(n) < 0.05).astype(int),
    })
    schema = codec.fit_schema(rows, None, "failure")
    back = codec.decode(codec.encode(rows, schema, np.random.default_rng(5)), schema)
    discrete_ok = all(back[c].tolist() == rows[c].tolist() for c in ("colour", "failure"))
    worst = max(float(np.max(np.abs(back[c] - rows[c]) / np.maximum(np.abs(rows[c]), 1e-300)))
                for c in ("bimodal", "heavy", "flat"))
    _record(4, discrete_ok and worst <= 1e-9,
            f"discrete exact: {discrete_ok}, worst continuous rel err {worst:.2e}")


# ---------------------------------------------------------------- 5. training-by-sampling


def test_criterion_5_condition_sampling_rates():
    col = codec.ColumnMeta("y", "discrete", categories=[0, 1], counts=[99_000, 1_000])
    schema = codec.TableSchema([col], "y")
    expected = np.log1p(np.array([99_000.0, 1_000.0]))
    expected /= expected.sum()
    _, cats, _ = codec.sample_conditions(schema, 100_000, np.random.default_rng(5))
    rates = np.bincount(cats, minlength=2) / 100_000
    rel = np.abs(rates - expected) / expected
    _record(5, bool(np.all(rel <= 0.02)),
            f"rates {np.round(rates, 4).tolist()} vs weights {np.round(expected, 4).tolist()}, "
            f"worst rel {rel.max():.4f}")


# ---------------------------------------------------------------- 6. dataset counts


def test_criterion_6_dataset_counts():
    y = np.r_[np.ones(218, int), np.zeros(110_000, int)]
    pool = pd.DataFrame({"v": np.arange(len(y), dtype=float), "failure": y})
    got = {}
    for ratio in ("1:100", "1:500"):
        split = build_dataset(pool, "failure", SplitSpec(ratio), np.random.default_rng(6))
        split.check_disjoint()
        got[ratio] = [int((part.failure == k).sum()) for part in (split.train, split.test) for k in (1, 0)]
    want = {"1:100": [174, 17400, 44, 4400], "1:500": [174, 87000, 44, 22000]}
    _record(6, got == want, f"train/test (fail, normal): {got}")


# ---------------------------------------------------------------- 7. g-mean


def test_criterion_7_g_mean_examples():
    vals = [g_mean(ConfusionMatrix(44, 0, 0, 4400)), g_mean(ConfusionMatrix(0, 44, 0, 4400)),
            g_mean(ConfusionMatrix(40, 4, 44, 4356))]
    ok = vals[0] == 1.0 and vals[1] == 0.0 and abs(vals[2] - 0.948683) <= 1e-6
    _record(7, ok, f"g_mean examples {[round(v, 6) for v in vals]}")


# ---------------------------------------------------------------- 8-9. desk-scale run


@pytest.fixture(scope="module")
def desk_run():
    cfg = ExperimentConfig(strategies=("none", "rctgan"), classifiers=("DT",), seeds=DESK_SEEDS,
                           gan=gan.GanConfig(epochs=DESK_EPOCHS), projections=False)
    t0 = time.perf_counter()
    report = run_experiment(cfg)
    return report, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_8_desk_scale_rctgan_beats_none(desk_run):
    report, elapsed = desk_run
    none, rct = report.median("none", "DT"), report.median("rctgan", "DT")
    per = " ".join(f"{v:.3f}" for v in report.values("rctgan", "DT"))
    ok = rct - none >= 0.10 and elapsed < DESK_BUDGET_S
    _record(8, ok, f"DT median none {none:.4f}, rctgan {rct:.4f} (gap {rct - none:+.4f}, need +0.10); "
                   f"rctgan per seed {per}; {elapsed / 60:.1f} min")


@pytest.mark.slow
def test_criterion_9_critic_loss_settles(desk_run, tmp_path_factory):
    report, _ = desk_run
    tails = {r.seed_index: r.tail_abs_critic_loss for r in report.gan_runs}
    bad = sorted(i for i, v in tails.items() if not v < 1.0)
    detail = f"tail mean |loss_d| {[round(tails[i], 3) for i in sorted(tails)]}"
    if bad:
        out = tmp_path_factory.mktemp("loss_curves")
        for r in report.gan_runs:
            if r.seed_index in bad:
                (out / f"losses_rctgan_seed{r.seed_index}.csv").write_text(gan.metrics_to_csv(r.metrics))
        detail += f"; curves for seeds {bad} in {out}"
    _record(9, len(tails) == DESK_SEEDS and len(tails) - len(bad) >= 4, detail)


# ---------------------------------------------------------------- 10-11. report and determinism

_TINY = """noise_dim=16
pac=5
batch_size=50
epochs=2
steps_per_epoch=3
gen_width=32
critic_width=32
classifier_dims=32,16
seeds=3
strategies=none,ctgan,rctgan
classifiers=DT
bench_rows=1010
bench_continuous=4
"""


@pytest.fixture(scope="module")
def cli_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("experiment")
    conf = root / "tiny.conf"
    conf.write_text(_TINY)
    codes = []
    for name in ("a", "b"):
        codes.append(cli.main(["experiment", "--synthetic-benchmark", "--seed", "7",
                               "--config", str(conf), "--out", str(root / name)]))
    return root, codes


def test_criterion_10_ctgan_and_rctgan_side_by_side(cli_runs):
    root, codes = cli_runs
    table = (root / "a" / "report.txt").read_text()
    report = pd.read_csv(root / "a" / "report.csv", dtype=str)
    medians = report[report.seed == "median"]
    per_seed = report[report.seed != "median"]
    ok = codes[0] == 0
    for s in ("ctgan", "rctgan"):
        ok &= (medians.strategy == s).sum() == 1 and (per_seed.strategy == s).sum() == 3
        ok &= any(line.split()[0] == s for line in table.splitlines() if line.strip())
    med = {s: medians[medians.strategy == s].g_mean.iloc[0] for s in ("ctgan", "rctgan")}
    _record(10, bool(ok), f"report.csv medians {med} plus 3 per-seed rows each; report.txt table")


def test_criterion_11_deterministic_report(cli_runs):
    root, codes = cli_runs
    a, b = (root / n / "report.csv" for n in ("a", "b"))
    same = codes == [0, 0] and a.read_bytes() == b.read_bytes()
    _record(11, same, f"two runs of experiment --synthetic-benchmark --seed 7: "
                      f"report.csv {'byte-identical' if same else 'DIFFERS'}")
