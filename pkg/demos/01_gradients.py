"""A short tour of the tape autograd.

Builds a tiny network, takes reverse-mode gradients, and checks one of
them against a central difference. Then shows the input gradient that
the WGAN-GP penalty is built from.
"""

import numpy as np

from rctgan import autograd as ag

rng = np.random.default_rng(0)
net = [ag.linear(3, 4), ag.leaky_layer(4, 0.2), ag.linear(4, 1)]
params = ag.init_params(net, "net", rng)
x = rng.normal(size=(5, 3))


def loss_value():
    out = ag.forward(net, params, x, ag.Tape(), rng=None, update_stats=False)
    return ag.sum_all(out).value[0, 0]


tape = ag.Tape()
out = ag.forward(net, params, x, tape, rng=None, update_stats=False)
grads = params.grads_from(ag.backward(tape, ag.sum_all(out)))

# Nudge one weight both ways and compare.
w = params.blocks["0.weight"]
h = 1e-5
w[0, 0] += h
up = loss_value()
w[0, 0] -= 2 * h
down = loss_value()
w[0, 0] += h
print("tape gradient      ", grads["0.weight"][0, 0])
print("central difference ", (up - down) / (2 * h))

# For a linear critic the input gradient is just the weight row.
critic = [ag.linear(3, 1)]
cparams = ag.init_params(critic, "critic", rng)
_, grad_x = ag.input_gradient_graph(critic, cparams, x, ag.Tape())
print("input gradient row ", grad_x.value[0])
print("critic weight      ", cparams.blocks["0.weight"][:, 0])
