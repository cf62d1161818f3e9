"""Independent reference computations used by the tests.

Kept deliberately naive: scalar loops over every index, no shared code
with the package.
"""

import itertools
import math

import numpy as np


def dct_coefficient(variant, n, k, length):
    """Weight of input index ``n`` in output ``k`` for a 1-D unnormalised DCT."""
    if variant == 1:
        c = math.cos(math.pi * n * k / (length - 1))
        return c / 2 if n in (0, length - 1) else c
    if variant == 2:
        return math.cos(math.pi * (2 * n + 1) * k / (2 * length))
    if variant == 3:
        c = math.cos(math.pi * n * (2 * k + 1) / (2 * length))
        return c / 2 if n == 0 else c
    return math.cos(math.pi * (2 * n + 1) * (2 * k + 1) / (4 * length))


def dct_multisum(x, variant=4):
    """Direct multi-index sum over all input positions for every output position."""
    x = np.asarray(x, dtype=np.float64)
    shape = x.shape
    out = np.zeros(shape)
    positions = list(itertools.product(*(range(s) for s in shape)))
    for k in positions:
        total = 0.0
        for n in positions:
            w = 1.0
            for axis, length in enumerate(shape):
                w *= dct_coefficient(variant, n[axis], k[axis], length)
            total += w * x[n]
        out[k] = total
    return out


def dct_matrix_oracle(variant, length):
    return np.array([[dct_coefficient(variant, n, k, length) for n in range(length)]
                     for k in range(length)])


def dct_separable(x, variant=4):
    """Per-axis matrix products built from the scalar coefficient function."""
    x = np.asarray(x, dtype=np.float64)
    for axis, length in enumerate(x.shape):
        m = dct_matrix_oracle(variant, length)
        x = np.moveaxis(np.tensordot(m, x, axes=(1, axis)), 0, axis)
    return x


def weighted_average(weights, vectors):
    total = sum(weights)
    out = np.zeros_like(np.asarray(vectors[0], dtype=np.float64))
    for w, v in zip(weights, vectors):
        out = out + (w / total) * np.asarray(v, dtype=np.float64)
    return out


def softmax_xent(w, b, x, y):
    """Mean cross-entropy of a linear softmax model, one sample at a time."""
    total = 0.0
    for xi, yi in zip(x, y):
        logits = [sum(xi[j] * w[j][c] for j in range(len(xi))) + b[c] for c in range(len(b))]
        m = max(logits)
        lse = m + math.log(sum(math.exp(v - m) for v in logits))
        total += lse - logits[yi]
    return total / len(y)
