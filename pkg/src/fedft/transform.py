"""Separable multi-dimensional DCT (types I-IV) over model tensors.

All variants use unnormalised kernels and are applied by direct
matrix products along every axis, O(N^2) per axis:

    I    X[k] = x[0]/2 + (-1)^k x[N-1]/2 + sum_{n=1}^{N-2} x[n] cos(pi n k / (N-1))
    II   X[k] = sum_n x[n] cos(pi (2n+1) k / 2N)
    III  X[k] = x[0]/2 + sum_{n>=1} x[n] cos(pi n (2k+1) / 2N)
    IV   X[k] = sum_n x[n] cos(pi (2n+1)(2k+1) / 4N)

Inverses: I -> (2/(N-1)) I, II -> (2/N) III, III -> (2/N) II, IV -> (2/N) IV,
one factor per transformed axis.

``method="fft"`` computes the same values through ``scipy.fft.dctn``
(whose unnormalised kernels are exactly twice these per axis); the direct
matrix form is the default and the reference.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft

from .tensor import ModelParams

__all__ = [
    "DctVariant",
    "FrequencyModel",
    "dct_forward",
    "dct_inverse",
    "transform_model",
    "inverse_model",
    "reconstruction_error",
]


class DctVariant(enum.Enum):
    I = 1
    II = 2
    III = 3
    IV = 4

    @classmethod
    def parse(cls, value) -> "DctVariant":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        text = str(value).strip().upper().removeprefix("DCT-").removeprefix("DCT")
        if text.isdigit():
            return cls(int(text))
        try:
            return cls[text]
        except KeyError:
            raise ValueError(f"unknown DCT variant {value!r}") from None


def _cos_table(phase, period):
    # cos(2 pi phase / period) with the integer phase reduced first, so the
    # float argument stays below 2 pi and large axes keep full precision
    return np.cos((2.0 * np.pi / period) * (phase % period))


def _dct1(n):
    if n < 2:
        raise ValueError("DCT-I needs every axis length >= 2")
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = _cos_table(k * j, 2 * (n - 1))
    m[:, 0] *= 0.5
    m[:, -1] *= 0.5
    return m


def _dct2(n):
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return _cos_table((2 * j + 1) * k, 4 * n)


def _dct3(n):
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = _cos_table(j * (2 * k + 1), 4 * n)
    m[:, 0] *= 0.5
    return m


def _dct4(n):
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return _cos_table((2 * j + 1) * (2 * k + 1), 8 * n)


_FORWARD = {DctVariant.I: _dct1, DctVariant.II: _dct2, DctVariant.III: _dct3, DctVariant.IV: _dct4}


@lru_cache(maxsize=64)
def _matrix(variant: DctVariant, n: int, inverse: bool) -> np.ndarray:
    if not inverse:
        m = _FORWARD[variant](n)
    elif variant is DctVariant.I:
        m = (2.0 / (n - 1)) * _dct1(n)
    elif variant is DctVariant.II:
        m = (2.0 / n) * _dct3(n)
    elif variant is DctVariant.III:
        m = (2.0 / n) * _dct2(n)
    else:
        m = (2.0 / n) * _dct4(n)
    m.setflags(write=False)
    return m


_INVERSE_PARTNER = {DctVariant.I: DctVariant.I, DctVariant.II: DctVariant.III,
                    DctVariant.III: DctVariant.II, DctVariant.IV: DctVariant.IV}


def _apply_fft(x, variant, inverse):
    kind = _INVERSE_PARTNER[variant] if inverse else variant
    out = scipy.fft.dctn(x, type=kind.value) / 2.0 ** x.ndim
    if inverse:
        for n in x.shape:
            out *= 2.0 / (n - 1) if variant is DctVariant.I else 2.0 / n
    return out


def _apply(t, variant, inverse, method="direct"):
    variant = DctVariant.parse(variant)
    x = np.asarray(t, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.size == 0:
        raise ValueError("cannot transform an empty tensor")
    if variant is DctVariant.I and min(x.shape) < 2:
        raise ValueError(f"DCT-I needs every axis length >= 2, got shape {list(x.shape)}")
    if method == "fft":
        return np.ascontiguousarray(_apply_fft(x, variant, inverse))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    for axis, n in enumerate(x.shape):
        m = _matrix(variant, n, inverse)
        x = np.moveaxis(np.tensordot(m, x, axes=(1, axis)), 0, axis)
    return np.ascontiguousarray(x)


def dct_forward(t, variant=DctVariant.IV, method: str = "direct") -> np.ndarray:
    """Forward DCT along every axis of ``t``; shape is preserved."""
    return _apply(t, variant, False, method)


def dct_inverse(t, variant=DctVariant.IV, method: str = "direct") -> np.ndarray:
    """Exact inverse of :func:`dct_forward` for the same variant."""
    return _apply(t, variant, True, method)


@dataclass(frozen=True)
class FrequencyModel:
    """DCT coefficients of a model, tensor by tensor."""

    params: ModelParams
    variant: DctVariant = DctVariant.IV
    method: str = "direct"

    @property
    def names(self):
        return self.params.names

    @property
    def shapes(self):
        return self.params.shapes

    def __iter__(self):
        return iter(self.params)

    @cached_property
    def _tensor_space(self) -> ModelParams:
        # every client inverts the same broadcast; compute it once
        return self.params.map(lambda a: dct_inverse(a, self.variant, self.method))


def transform_model(m: ModelParams, variant=DctVariant.IV, method: str = "direct") -> FrequencyModel:
    variant = DctVariant.parse(variant)
    return FrequencyModel(m.map(lambda a: dct_forward(a, variant, method)), variant, method)


def inverse_model(f: FrequencyModel) -> ModelParams:
    return f._tensor_space


def reconstruction_error(m: ModelParams, variant=DctVariant.IV,
                         method: str = "direct") -> tuple[float, float]:
    """Max and mean of ``|inverse(forward(w)) - w|`` over all elements."""
    rebuilt = inverse_model(transform_model(m, variant, method))
    err = np.abs((rebuilt - m).flatten())
    if err.size == 0:
        return 0.0, 0.0
    return float(err.max()), float(err.mean())
