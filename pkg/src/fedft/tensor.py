"""Model parameter containers, linear algebra over them, and seeded RNG.

A model is an ordered list of named float64 arrays.  Arrays held by a
:class:`ModelParams` are marked read-only, so instances can be shared
between clients without defensive copies.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ShapeError

__all__ = [
    "ModelParams",
    "SeedSpec",
    "linear_combine",
    "model_stats",
    "gaussian_model",
]


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    if out.ndim == 0:
        out = out.reshape(1)
    out.setflags(write=False)
    return out


class ModelParams:
    """Ordered, immutable collection of named float64 tensors."""

    __slots__ = ("_names", "_arrays")

    def __init__(self, entries: Iterable[tuple[str, np.ndarray]]):
        names, arrays = [], []
        for name, array in entries:
            if name in names:
                raise ValueError(f"duplicate tensor name {name!r}")
            names.append(str(name))
            arrays.append(_frozen(array))
        self._names = tuple(names)
        self._arrays = tuple(arrays)

    @classmethod
    def _wrap(cls, names, arrays):
        # Fast path for internal results that are already fresh float64 arrays.
        obj = cls.__new__(cls)
        for a in arrays:
            a.setflags(write=False)
        obj._names = tuple(names)
        obj._arrays = tuple(arrays)
        return obj

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def arrays(self) -> tuple[np.ndarray, ...]:
        return self._arrays

    @property
    def shapes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(a.shape for a in self._arrays)

    @property
    def size(self) -> int:
        return sum(a.size for a in self._arrays)

    def __len__(self):
        return len(self._names)

    def __iter__(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(zip(self._names, self._arrays))

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._arrays[self._names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __repr__(self):
        body = ", ".join(f"{n}{list(a.shape)}" for n, a in self)
        return f"{type(self).__name__}({body})"

    def compatible_with(self, other: "ModelParams") -> bool:
        return self._names == other._names and self.shapes == other.shapes

    def check_compatible(self, other: "ModelParams") -> None:
        if len(self) != len(other):
            raise ShapeError(f"tensor count differs: {len(self)} vs {len(other)}")
        for (n1, a1), (n2, a2) in zip(self, other):
            if n1 != n2 or a1.shape != a2.shape:
                raise ShapeError(
                    f"tensor mismatch: {n1}{list(a1.shape)} vs {n2}{list(a2.shape)}"
                )

    def map(self, fn) -> "ModelParams":
        """Apply ``fn`` to every tensor, keeping names and order."""
        return ModelParams._wrap(
            self._names, [np.asarray(fn(a), dtype=np.float64) for a in self._arrays]
        )

    def flatten(self) -> np.ndarray:
        """All elements concatenated in tensor order, row-major within each."""
        if not self._arrays:
            return np.zeros(0)
        return np.concatenate([a.ravel() for a in self._arrays])

    def unflatten(self, vector: np.ndarray) -> "ModelParams":
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != self.size:
            raise ShapeError(f"vector of length {vector.size} cannot fill {self.size} slots")
        out, start = [], 0
        for a in self._arrays:
            out.append(vector[start:start + a.size].reshape(a.shape).copy())
            start += a.size
        return ModelParams._wrap(self._names, out)

    def zeros_like(self) -> "ModelParams":
        return ModelParams._wrap(self._names, [np.zeros(a.shape) for a in self._arrays])

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self._arrays)

    def equals(self, other: "ModelParams") -> bool:
        """Exact (bitwise value) equality including names and shapes."""
        return self.compatible_with(other) and all(
            np.array_equal(a, b) for a, b in zip(self._arrays, other._arrays)
        )

    def __add__(self, other: "ModelParams") -> "ModelParams":
        self.check_compatible(other)
        return ModelParams._wrap(self._names, [a + b for a, b in zip(self._arrays, other._arrays)])

    def __sub__(self, other: "ModelParams") -> "ModelParams":
        self.check_compatible(other)
        return ModelParams._wrap(self._names, [a - b for a, b in zip(self._arrays, other._arrays)])

    def scale(self, factor: float) -> "ModelParams":
        return ModelParams._wrap(self._names, [a * factor for a in self._arrays])


def linear_combine(coeffs: Sequence[float], models: Sequence[ModelParams]) -> ModelParams:
    """Elementwise ``sum(coeffs[i] * models[i])``.

    Terms are accumulated left to right, so the result is bit-reproducible
    for a fixed ordering of ``models``.
    """
    if len(models) == 0:
        raise ValueError("linear_combine needs at least one model")
    if len(coeffs) != len(models):
        raise ValueError(f"{len(coeffs)} coefficients for {len(models)} models")
    first = models[0]
    for m in models[1:]:
        first.check_compatible(m)
    out = []
    for j in range(len(first)):
        acc = float(coeffs[0]) * first.arrays[j]
        for c, m in zip(coeffs[1:], models[1:]):
            acc = acc + float(c) * m.arrays[j]
        out.append(acc)
    return ModelParams._wrap(first.names, out)


def model_stats(model: ModelParams) -> tuple[float, float]:
    """Grand mean and population variance over every element of every tensor."""
    flat = model.flatten()
    if flat.size == 0:
        raise ValueError("model has no elements")
    mean = float(flat.mean())
    return mean, float(np.mean((flat - mean) ** 2))


def gaussian_model(shapes, mean: float = 0.0, stddev: float = 1.0, seed=0,
                   names: Sequence[str] | None = None) -> ModelParams:
    """Model with i.i.d. Normal(mean, stddev**2) entries.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if stddev < 0:
        raise ValueError(f"stddev must be non-negative, got {stddev}")
    rng = seed if isinstance(seed, np.random.Generator) else SeedSpec(seed).rng("gaussian_model")
    if names is None:
        names = [f"t{i}" for i in range(len(shapes))]
    entries = []
    for name, shape in zip(names, shapes):
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        entries.append((name, mean + stddev * rng.standard_normal(shape)))
    return ModelParams(entries)


def _tag(value) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value) & 0xFFFFFFFF
    return zlib.crc32(str(value).encode("utf-8"))


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus the rule for deriving independent child streams.

    A child stream for ``(purpose, round, client)`` is
    ``Generator(PCG64(SeedSequence(global_seed, spawn_key=key)))`` where
    ``key = (crc32(purpose), round + 1, crc32(client))``; a missing round or
    client contributes 0.  Integer client ids are used as-is (mod 2**32).
    Streams therefore do not depend on the order in which clients run.
    """

    global_seed: int

    def seed_sequence(self, purpose: str, round_index: int | None = None,
                      client=None) -> np.random.SeedSequence:
        key = (
            _tag(purpose),
            0 if round_index is None else int(round_index) + 1,
            0 if client is None else _tag(client),
        )
        return np.random.SeedSequence(int(self.global_seed) & (2**64 - 1), spawn_key=key)

    def rng(self, purpose: str, round_index: int | None = None, client=None) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(purpose, round_index, client)))

    def child_seed(self, purpose: str, round_index: int | None = None, client=None) -> int:
        """A 64-bit integer seed for APIs that want a plain int."""
        state = self.seed_sequence(purpose, round_index, client).generate_state(2, np.uint32)
        return int(state[0]) | (int(state[1]) << 32)
