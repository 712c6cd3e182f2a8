"""Finite-difference oracle shared by the gradient tests.

Only forward values are used here, never the tape's backward pass.
"""

import numpy as np

from rctgan.codec import ColumnMeta, TableSchema


def central_difference(f, array, index, h=1e-5):
    """d f / d array[index] by central differences; ``array`` is perturbed in place and restored."""
    old = array[index]
    array[index] = old + h
    fp = f()
    array[index] = old - h
    fm = f()
    array[index] = old
    return (fp - fm) / (2 * h)


def rel_err(a, b, floor=1e-6):
    """Relative error; the floor absorbs FD rounding noise on gradients that are exactly zero."""
    return abs(a - b) / max(abs(a), abs(b), floor)


def random_coords(shape, n, rng):
    flat = rng.choice(int(np.prod(shape)), size=min(n, int(np.prod(shape))), replace=False)
    return [np.unravel_index(i, shape) for i in flat]


def reference_shape_schema() -> TableSchema:
    """Encoded width 69 with a 2-category target: 5 ten-mode columns (11 wide each),
    6 single-mode columns (2 wide each), target (2 wide)."""
    cols = []
    for i in range(5):
        cols.append(ColumnMeta(f"m{i}", "continuous", weights=np.full(10, 0.1),
                               means=np.arange(10.0), stds=np.ones(10)))
    for i in range(6):
        cols.append(ColumnMeta(f"s{i}", "continuous", weights=[1.0], means=[0.0], stds=[1.0]))
    cols.append(ColumnMeta("failure", "discrete", categories=[0, 1], counts=[17400, 174]))
    return TableSchema(cols, "failure")
