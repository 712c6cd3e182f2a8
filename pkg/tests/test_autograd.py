import numpy as np
import pytest

from rctgan import autograd as ag
from rctgan.autograd import LayerSpec, ParamSet, Tape

from helpers import central_difference, random_coords, rel_err


def _params_for(net, seed=0):
    return ag.init_params(net, "net", np.random.default_rng(seed))


# ---------------------------------------------------------------- forward

def test_zero_weight_linear_gives_zero():
    net = [ag.linear(4, 3)]
    ps = _params_for(net)
    ps.blocks["0.weight"][:] = 0.0
    x = np.random.default_rng(1).normal(size=(5, 4))
    out = ag.forward(net, ps, x, Tape())
    assert np.all(out.value == 0.0)


def test_identity_linear_is_identity():
    net = [ag.linear(4, 4)]
    ps = _params_for(net)
    ps.blocks["0.weight"][:] = np.eye(4)
    x = np.random.default_rng(2).normal(size=(3, 4))
    out = ag.forward(net, ps, x, Tape())
    np.testing.assert_array_equal(out.value, x)


def test_two_layer_net_matches_hand_product():
    net = [ag.linear(4, 2), ag.relu_layer(2), ag.linear(2, 1)]
    ps = _params_for(net)
    W1 = [[0.5, -1.0], [0.25, 0.0], [-0.5, 1.0], [1.0, 0.5]]
    b1 = [0.1, -0.2]
    W2 = [[2.0], [-1.0]]
    b2 = [0.3]
    ps.blocks["0.weight"][:] = W1
    ps.blocks["0.bias"][:] = [b1]
    ps.blocks["2.weight"][:] = W2
    ps.blocks["2.bias"][:] = [b2]
    x = [[1.0, 2.0, 3.0, 4.0], [-1.0, 0.0, 1.0, 0.0], [0.0, -2.0, 0.5, 1.0]]

    expected = []
    for row in x:
        hidden = []
        for j in range(2):
            s = b1[j] + sum(row[i] * W1[i][j] for i in range(4))
            hidden.append(max(s, 0.0))
        expected.append(b2[0] + sum(hidden[j] * W2[j][0] for j in range(2)))
    out = ag.forward(net, ps, np.array(x), Tape())
    np.testing.assert_allclose(out.value[:, 0], expected, rtol=1e-12)


def test_dimension_mismatch_raises():
    net = [ag.linear(4, 3)]
    with pytest.raises(ag.ShapeError):
        ag.forward(net, _params_for(net), np.zeros((2, 5)), Tape())


def test_non_finite_is_an_error():
    tape = Tape()
    x = tape.leaf("x", [[0.0, 1.0]])
    with pytest.raises(ag.NonFiniteError):
        ag.log(x)


def test_bad_chain_rejected():
    with pytest.raises(ag.ShapeError):
        ag.check_net([ag.linear(3, 4), ag.linear(5, 2)])


# ---------------------------------------------------------------- backward

def test_linear_sum_gradient_is_outer_product_and_matches_fd():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(6, 4))
    W = rng.normal(size=(4, 3))

    def loss_value():
        return float((x @ W).sum())

    tape = Tape()
    w = tape.leaf("W", W)
    grads = ag.backward(tape, ag.sum_all(ag.matmul(tape.constant(x), w)))
    expected = np.outer(x.sum(axis=0), np.ones(3))
    np.testing.assert_allclose(grads["W"], expected, rtol=1e-12)
    for idx in np.ndindex(W.shape):
        fd = central_difference(loss_value, W, idx)
        assert rel_err(grads["W"][idx], fd) < 1e-6


def test_constant_block_gets_zero_gradient():
    tape = Tape()
    a = tape.leaf("a", [[1.0, 2.0]])
    tape.leaf("unused", [[3.0]])
    grads = ag.backward(tape, ag.sum_all(a * a))
    assert np.all(grads["unused"] == 0.0)
    np.testing.assert_allclose(grads["a"], [[2.0, 4.0]])


def test_backward_rejects_non_scalar_and_detached():
    tape = Tape()
    a = tape.leaf("a", [[1.0, 2.0]])
    with pytest.raises(ag.ShapeError):
        ag.backward(tape, a * 2.0)
    tape2 = Tape()
    c = tape2.constant([[1.0]])
    with pytest.raises(ValueError, match="detached"):
        ag.backward(tape2, c * 2.0)


def test_backward_leaves_tape_reusable():
    tape = Tape()
    a = tape.leaf("a", [[1.5]])
    loss = ag.sum_all(ag.square(a))
    n = len(tape)
    g1 = ag.backward(tape, loss)
    g2 = ag.backward(tape, loss)
    assert len(tape) == n
    np.testing.assert_array_equal(g1["a"], g2["a"])


def _fd_check_network(net, x, n_coords=20, seed=0, mode="train", loss_weights=None):
    """Weighted-sum loss over the net output; compare param grads to central differences."""
    ps = _params_for(net, seed)
    rng = np.random.default_rng(seed + 100)
    out_dim = net[-1].out_dim
    wts = loss_weights if loss_weights is not None else rng.normal(size=(x.shape[0], out_dim))

    def run(tape):
        out = ag.forward(net, ps, x, tape, rng=np.random.default_rng(7), update_stats=False)
        return ag.sum_all(out * wts)

    tape = Tape(mode)
    grads = ps.grads_from(ag.backward(tape, run(tape)))
    worst = 0.0
    for name, block in ps.blocks.items():
        for idx in random_coords(block.shape, n_coords, rng):
            fd = central_difference(lambda: run(Tape(mode)).value[0, 0], block, idx)
            worst = max(worst, rel_err(grads[name][idx], fd))
    return worst


def test_composite_relu_net_matches_fd():
    net = [ag.linear(5, 7), ag.relu_layer(7), ag.linear(7, 3)]
    x = np.random.default_rng(4).normal(size=(8, 5))
    assert _fd_check_network(net, x) < 1e-4


@pytest.mark.parametrize("layers", [
    lambda: [ag.linear(4, 6), ag.batchnorm(6)],
    lambda: [ag.linear(4, 6), ag.leaky_layer(6, 0.2)],
    lambda: [ag.linear(4, 6), ag.dropout_layer(6, 0.5)],
    lambda: [ag.linear(4, 6), ag.tanh_layer(6)],
    lambda: [ag.linear(4, 6), ag.softmax_layer(6)],
    lambda: ag.residual_block(4, 5) + [ag.linear(9, 2)],
], ids=["batchnorm", "leakyrelu", "dropout", "tanh", "softmax", "residual-concat"])
def test_layer_gradients_match_fd(layers):
    x = np.random.default_rng(5).normal(size=(10, 4))
    assert _fd_check_network(layers(), x) < 1e-4


def test_batchnorm_eval_mode_gradients_match_fd():
    net = [ag.linear(4, 6), ag.batchnorm(6), ag.relu_layer(6), ag.linear(6, 1)]
    x = np.random.default_rng(6).normal(size=(10, 4))
    assert _fd_check_network(net, x, mode="eval") < 1e-4


_PRIMITIVES = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / (ag.square(b) + 1.0),
    "matmul": lambda a, b: ag.matmul(a, ag.transpose(b)),
    "broadcast_row": lambda a, b: a * ag.mean_rows(b),
    "broadcast_col": lambda a, b: a - ag.sum_cols(b),
    "relu": lambda a, b: ag.relu(a) * b,
    "leaky_relu": lambda a, b: ag.leaky_relu(a, 0.2) * b,
    "tanh": lambda a, b: ag.tanh(a * b),
    "exp": lambda a, b: ag.exp(a) * b,
    "log": lambda a, b: ag.log(ag.square(a) + 0.5) * b,
    "sqrt": lambda a, b: ag.sqrt(ag.square(a) + 0.1) * b,
    "softmax": lambda a, b: ag.softmax(a) * b,
    "log_softmax": lambda a, b: ag.log_softmax(a) * b,
    "slice": lambda a, b: ag.slice_cols(a, 1, 3) * ag.slice_cols(b, 0, 2),
    "slice_rows": lambda a, b: ag.slice_rows(a, 1, 3) * ag.slice_rows(b, 0, 2),
    "concat": lambda a, b: ag.concat_cols([a, b * b]),
    "concat_rows": lambda a, b: ag.concat_rows([a, a * b]),
    "reshape": lambda a, b: ag.reshape(a * b, 2, 6),
    "mean_all": lambda a, b: ag.mean_all(a * b) * a,
}


@pytest.mark.parametrize("name", sorted(_PRIMITIVES))
def test_primitive_gradients_match_fd(name):
    rng = np.random.default_rng(sum(map(ord, name)))
    A = rng.normal(size=(3, 4))
    B = rng.normal(size=(3, 4))
    fn = _PRIMITIVES[name]

    def run():
        tape = Tape()
        out = fn(tape.leaf("a", A), tape.leaf("b", B))
        wts = np.linspace(-1.0, 1.5, out.value.size).reshape(out.shape)
        return tape, ag.sum_all(out * wts)

    tape, loss = run()
    grads = ag.backward(tape, loss)
    for key, arr in (("a", A), ("b", B)):
        for idx in np.ndindex(arr.shape):
            fd = central_difference(lambda: run()[1].value[0, 0], arr, idx)
            assert rel_err(grads[key][idx], fd) < 1e-4, (key, idx)


# ---------------------------------------------------------------- layer properties

def test_batchnorm_training_normalizes():
    net = [ag.batchnorm(5)]
    ps = _params_for(net)
    x = np.random.default_rng(8).normal(3.0, 7.0, size=(64, 5))
    out = ag.forward(net, ps, x, Tape()).value
    assert np.all(np.abs(out.mean(axis=0)) < 1e-6)
    # eps in the denominator shrinks the variance by var/(var+eps)
    var = x.var(axis=0)
    np.testing.assert_allclose(out.var(axis=0), var / (var + ag.BN_EPS), atol=1e-12)
    assert np.all(np.abs(out.var(axis=0) - 1.0) < 1e-6)


def test_batchnorm_running_stats_ema():
    net = [ag.batchnorm(2)]
    ps = _params_for(net)
    x = np.array([[1.0, 2.0], [3.0, 6.0]])
    ag.forward(net, ps, x, Tape())
    np.testing.assert_allclose(ps.buffers["0.running_mean"], 0.1 * x.mean(axis=0, keepdims=True))
    unbiased = x.var(axis=0, ddof=1, keepdims=True)
    np.testing.assert_allclose(ps.buffers["0.running_var"], 0.9 + 0.1 * unbiased)
    out = ag.forward(net, ps, x, Tape("eval")).value
    expected = (x - ps.buffers["0.running_mean"]) / np.sqrt(ps.buffers["0.running_var"] + ag.BN_EPS)
    np.testing.assert_allclose(out, expected)


def test_dropout_inference_identity_and_training_unbiased():
    net = [ag.dropout_layer(4, 0.5)]
    ps = _params_for(net)
    x = np.random.default_rng(9).normal(size=(1, 4)) + 2.0
    np.testing.assert_array_equal(ag.forward(net, ps, x, Tape("eval")).value, x)
    rng = np.random.default_rng(10)
    tiled = np.repeat(x, 10_000, axis=0)
    out = ag.forward(net, ps, tiled, Tape(), rng=rng).value
    np.testing.assert_allclose(out.mean(axis=0), x[0], rtol=0.02)


def test_softmax_rows_sum_to_one():
    tape = Tape()
    z = tape.leaf("z", np.random.default_rng(11).normal(scale=20.0, size=(50, 7)))
    y = ag.softmax(z).value
    np.testing.assert_allclose(y.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(y > 0)


# ---------------------------------------------------------------- input gradients

def test_linear_critic_input_gradient_is_weight():
    net = [ag.linear(5, 1)]
    ps = _params_for(net)
    w = np.array([[1.0], [-2.0], [0.5], [3.0], [0.0]])
    ps.blocks["0.weight"][:] = w
    x = np.random.default_rng(12).normal(size=(4, 5))
    _, g = ag.input_gradient_graph(net, ps, x, Tape())
    np.testing.assert_allclose(g.value, np.repeat(w.T, 4, axis=0))


def test_relu_critic_positive_region_gradient_is_weight_product():
    net = [ag.linear(3, 4), ag.relu_layer(4), ag.linear(4, 1)]
    ps = _params_for(net)
    ps.blocks["0.bias"][:] = 100.0  # every unit active
    x = np.random.default_rng(13).normal(size=(5, 3))
    _, g = ag.input_gradient_graph(net, ps, x, Tape())
    prod = ps.blocks["0.weight"] @ ps.blocks["2.weight"]
    np.testing.assert_allclose(g.value, np.repeat(prod.T, 5, axis=0), rtol=1e-12)


@pytest.mark.parametrize("mode", ["train", "eval"])
def test_input_gradient_matches_perturbation(mode):
    net = (ag.residual_block(6, 8) + ag.residual_block(14, 8)
           + [ag.linear(22, 1)])
    ps = _params_for(net, seed=3)
    x = np.random.default_rng(14).normal(size=(7, 6))
    if mode == "eval":
        ag.forward(net, ps, x, Tape())  # populate running stats

    def total():
        return ag.forward(net, ps, x, Tape(mode), update_stats=False).value.sum()

    _, g = ag.input_gradient_graph(net, ps, x, Tape(mode))
    for idx in np.ndindex(x.shape):
        fd = central_difference(total, x, idx)
        assert rel_err(g.value[idx], fd) < 1e-4


def test_input_gradient_rejects_unknown_kind(monkeypatch):
    monkeypatch.setattr(ag, "INPUT_GRADIENT_KINDS", ("linear",))
    net = [ag.linear(2, 2), ag.tanh_layer(2)]
    with pytest.raises(NotImplementedError):
        ag.input_gradient_graph(net, _params_for(net), np.zeros((2, 2)), Tape())


def _penalty_grads(net, ps, x, with_penalty):
    tape = Tape()
    out, g = ag.input_gradient_graph(net, ps, x, tape)
    loss = ag.mean_all(out)
    if with_penalty:
        norm = ag.sqrt(ag.sum_cols(ag.square(g)) + 1e-12)
        loss = loss + ag.mean_all(ag.square(norm - 1.0))
    return ps.grads_from(ag.backward(tape, loss)), loss.value[0, 0]


def test_penalty_second_order_contribution():
    net = ag.residual_block(4, 6) + [ag.linear(10, 1)]
    ps = _params_for(net, seed=5)
    x = np.random.default_rng(15).normal(size=(8, 4))
    plain, _ = _penalty_grads(net, ps, x, False)
    pen, _ = _penalty_grads(net, ps, x, True)
    assert np.abs(plain["0.weight"] - pen["0.weight"]).max() > 1e-6
    # and the second-order gradient is right
    rng = np.random.default_rng(16)
    for name, block in ps.blocks.items():
        for idx in random_coords(block.shape, 5, rng):
            fd = central_difference(lambda: _penalty_grads(net, ps, x, True)[1], block, idx)
            assert rel_err(pen[name][idx], fd) < 1e-4, (name, idx)


# ---------------------------------------------------------------- adam

def test_adam_zero_gradient_no_move():
    ps = ParamSet("p")
    ps.add("w", [[1.0, -2.0]])
    ag.adam_step(ps, {"w": np.zeros((1, 2))}, lr=0.1)
    np.testing.assert_array_equal(ps.blocks["w"], [[1.0, -2.0]])
    assert ps.t == 1


def test_adam_first_step_hand_trace():
    lr, b1, b2, eps = 2e-4, 0.9, 0.999, 1e-8
    g = 0.37
    m = (1 - b1) * g
    v = (1 - b2) * g * g
    mhat = m / (1 - b1)
    vhat = v / (1 - b2)
    expected = 0.5 - lr * mhat / (vhat ** 0.5 + eps)
    ps = ParamSet("p")
    ps.add("w", [[0.5]])
    ag.adam_step(ps, {"p.w": np.array([[g]])}, lr=lr)
    assert ps.blocks["w"][0, 0] == pytest.approx(expected, rel=1e-14)
    assert 0.5 - ps.blocks["w"][0, 0] == pytest.approx(lr, rel=1e-6)


def test_adam_constant_gradient_moves_monotonically():
    ps = ParamSet("p")
    ps.add("w", [[0.0]])
    trail = []
    for _ in range(200):
        ag.adam_step(ps, {"w": np.array([[1.5]])}, lr=0.01)
        trail.append(ps.blocks["w"][0, 0])
    assert np.all(np.diff(trail) < 0)
    assert ps.t == 200


def test_adam_shape_mismatch():
    ps = ParamSet("p")
    ps.add("w", [[0.0, 1.0]])
    with pytest.raises(ag.ShapeError):
        ag.adam_step(ps, {"w": np.zeros((2, 1))}, lr=0.1)
