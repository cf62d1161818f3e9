"""Positional high-frequency pruning of DCT coefficients and payload sizing.

Pruning keeps a contiguous prefix of every tensor's last axis, so the
receiver only needs the retained length to rebuild the dense tensor; no
index side-channel is transmitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import ModelParams
from .transform import DctVariant, FrequencyModel

__all__ = [
    "CostModel",
    "FrequencyUpdate",
    "pruned_length",
    "prune",
    "densify",
    "payload_bytes",
    "payload_megabytes",
    "dense_payload_bytes",
]

MEGABYTE = 10**6


@dataclass(frozen=True)
class CostModel:
    bytes_per_value: int = 4

    def __post_init__(self):
        if self.bytes_per_value not in (4, 8):
            raise ValueError(f"bytes_per_value must be 4 or 8, got {self.bytes_per_value}")


@dataclass(frozen=True)
class FrequencyUpdate:
    """Truncated coefficient tensors as they travel upstream.

    ``coefficients`` holds each tensor cut to its retained last-axis prefix;
    ``full_shapes`` records the shapes :func:`densify` restores.
    """

    coefficients: ModelParams
    full_shapes: tuple[tuple[int, ...], ...]
    alpha_requested: float
    alpha_realized: float
    variant: DctVariant = DctVariant.IV
    method: str = "direct"

    @property
    def retained_lengths(self) -> tuple[int, ...]:
        return tuple(a.shape[-1] for a in self.coefficients.arrays)

    @property
    def retained_count(self) -> int:
        return self.coefficients.size

    @property
    def total_count(self) -> int:
        return sum(math.prod(s) for s in self.full_shapes)

    def equals(self, other: "FrequencyUpdate") -> bool:
        return (
            self.full_shapes == other.full_shapes
            and self.variant == other.variant
            and self.alpha_realized == other.alpha_realized
            and self.coefficients.equals(other.coefficients)
        )


def pruned_length(alpha: float, length: int) -> int:
    """Number of trailing indices zeroed on an axis of ``length``.

    Round half up, then clamp so at least one coefficient survives.
    """
    n = math.floor(alpha * length + 0.5)
    return max(0, min(n, length - 1))


def prune(f: FrequencyModel, alpha: float) -> FrequencyUpdate:
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    kept, total, retained = [], 0, 0
    for name, a in f.params:
        length = a.shape[-1]
        keep = length - pruned_length(alpha, length)
        kept.append((name, a[..., :keep]))
        total += a.size
        retained += a.size // length * keep
    return FrequencyUpdate(
        coefficients=ModelParams(kept),
        full_shapes=f.params.shapes,
        alpha_requested=float(alpha),
        alpha_realized=1.0 - retained / total,
        variant=f.variant,
        method=f.method,
    )


def densify(u: FrequencyUpdate) -> FrequencyModel:
    out = []
    for (name, a), shape in zip(u.coefficients, u.full_shapes):
        full = np.zeros(shape)
        full[..., : a.shape[-1]] = a
        out.append((name, full))
    return FrequencyModel(ModelParams(out), u.variant, u.method)


def payload_bytes(u: FrequencyUpdate, cost: CostModel = CostModel()) -> int:
    return u.retained_count * cost.bytes_per_value


def payload_megabytes(u: FrequencyUpdate, cost: CostModel = CostModel()) -> float:
    return payload_bytes(u, cost) / MEGABYTE


def dense_payload_bytes(m: ModelParams, cost: CostModel = CostModel()) -> int:
    """Upload size of an unpruned model sent as-is."""
    return m.size * cost.bytes_per_value
