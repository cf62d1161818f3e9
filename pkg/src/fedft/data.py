"""Federated datasets: synthetic non-IID generator, presets, LEAF-style JSON I/O.

LEAF-style file layout::

    {
      "users": ["f_00000", ...],
      "num_samples": [34, ...],
      "user_data": {"f_00000": {"x": [[...], ...], "y": [3, 7, ...]}, ...},
      "num_classes": 10            # optional; inferred as max(y) + 1 if absent
    }

A single file carries each user's samples in order; the last
``max(1, round(0.2 * n))`` samples of a user form the test split.  A
separate test file with the same layout may be given instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .tensor import SeedSpec

__all__ = [
    "ClientShard",
    "FederatedDataset",
    "Preset",
    "holdout_count",
    "generate_synthetic",
    "dataset_presets",
    "load_leaf_json",
    "write_leaf_json",
    "label_entropy",
]


@dataclass(frozen=True, eq=False)
class ClientShard:
    client_id: str
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray

    @property
    def n_train(self) -> int:
        return len(self.train_y)

    @property
    def n_test(self) -> int:
        return len(self.test_y)

    @property
    def n_samples(self) -> int:
        return self.n_train + self.n_test

    def equals(self, other: "ClientShard") -> bool:
        return self.client_id == other.client_id and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("train_x", "train_y", "test_x", "test_y")
        )


@dataclass(frozen=True, eq=False)
class FederatedDataset:
    shards: tuple[ClientShard, ...]
    num_classes: int
    feature_dim: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [s.client_id for s in self.shards]
        if len(set(ids)) != len(ids):
            raise ValueError("client ids must be unique")

    @property
    def client_ids(self) -> list[str]:
        return [s.client_id for s in self.shards]

    @property
    def total_samples(self) -> int:
        return sum(s.n_samples for s in self.shards)

    def shard(self, client_id: str) -> ClientShard:
        for s in self.shards:
            if s.client_id == client_id:
                return s
        raise KeyError(client_id)

    def pooled(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All train and all test samples concatenated across clients."""
        cat = np.concatenate
        return (
            cat([s.train_x for s in self.shards]), cat([s.train_y for s in self.shards]),
            cat([s.test_x for s in self.shards]), cat([s.test_y for s in self.shards]),
        )

    def equals(self, other: "FederatedDataset") -> bool:
        return (
            self.num_classes == other.num_classes
            and self.feature_dim == other.feature_dim
            and len(self.shards) == len(other.shards)
            and all(a.equals(b) for a, b in zip(self.shards, other.shards))
        )


def holdout_count(n: int) -> int:
    """Size of the held-out split for a client with ``n`` samples."""
    return max(1, math.floor(0.2 * n + 0.5))


def _split(client_id, x, y):
    n_test = holdout_count(len(y))
    cut = len(y) - n_test
    return ClientShard(client_id, x[:cut], y[:cut], x[cut:], y[cut:])


def generate_synthetic(num_clients: int, num_classes: int, feature_dim: int,
                       classes_per_client: int, samples_range=(10, 60),
                       class_separation: float = 3.0, seed: int = 0) -> FederatedDataset:
    """Class-conditional Gaussian clients with a restricted label set each.

    Class means are ``class_separation * sqrt(2)`` times a random orthonormal
    frame: a regular simplex with edge ``2 * class_separation``, so every mean
    lies ``class_separation`` noise standard deviations from each pairwise
    decision boundary.  Features add unit-variance isotropic noise.  Each
    client picks ``classes_per_client`` distinct classes, a sample count
    uniformly from ``samples_range`` (inclusive), labels balanced round-robin
    over its classes, and keeps the final 20% as its test split.
    """
    lo, hi = samples_range
    problems = []
    if num_clients < 1:
        problems.append("num_clients must be >= 1")
    if num_classes < 1:
        problems.append("num_classes must be >= 1")
    if feature_dim < num_classes:
        problems.append("feature_dim must be >= num_classes")
    if not 1 <= classes_per_client <= num_classes:
        problems.append("classes_per_client must lie in [1, num_classes]")
    if lo < 2 or hi < lo:
        problems.append("samples_range must satisfy 2 <= min <= max")
    if class_separation < 0:
        problems.append("class_separation must be non-negative")
    if problems:
        raise ValueError("; ".join(problems))

    seeds = SeedSpec(seed)
    frame_rng = seeds.rng("class_means")
    q, _ = np.linalg.qr(frame_rng.standard_normal((feature_dim, num_classes)))
    means = (class_separation * math.sqrt(2.0)) * q.T

    shards = []
    for i in range(num_clients):
        cid = f"f_{i:05d}"
        rng = seeds.rng("client_data", client=i)
        classes = np.sort(rng.choice(num_classes, size=classes_per_client, replace=False))
        n = int(rng.integers(lo, hi + 1))
        y = rng.permutation(classes[np.arange(n) % classes_per_client])
        x = means[y] + rng.standard_normal((n, feature_dim))
        shards.append(_split(cid, x, y.astype(np.int64)))
    return FederatedDataset(
        tuple(shards), num_classes, feature_dim,
        provenance={
            "kind": "synthetic", "num_clients": num_clients, "num_classes": num_classes,
            "feature_dim": feature_dim, "classes_per_client": classes_per_client,
            "samples_range": [lo, hi], "class_separation": class_separation, "seed": seed,
        },
    )


@dataclass(frozen=True)
class Preset:
    """Generator arguments plus the matching federation hyper-parameters."""

    name: str
    num_clients: int
    num_classes: int
    feature_dim: int
    classes_per_client: int
    learning_rate: float
    clients_per_round: int
    n_clusters: int
    samples_range: tuple[int, int] = (10, 60)
    class_separation: float = 3.0

    def generator_kwargs(self) -> dict:
        return dict(
            num_clients=self.num_clients, num_classes=self.num_classes,
            feature_dim=self.feature_dim, classes_per_client=self.classes_per_client,
            samples_range=self.samples_range, class_separation=self.class_separation,
        )


# full-scale clients, classes, features, classes/client, lr, K, clusters,
# samples per client, class separation
_PRESETS = {
    "mnist_like": (1000, 10, 784, 2, 0.03, 20, 5, (10, 60), 3.5),
    "femnist_like": (200, 10, 784, 3, 0.003, 20, 9, (10, 60), 3.0),
    "mex_like": (30, 7, 1280, 2, 0.01, 10, 3, (10, 60), 3.0),
    "goodreads_like": (100, 2, 2517, 2, 0.3, 20, 11, (2, 10), 3.0),
}


def dataset_presets(name: str, classes_per_client: int | None = None,
                    scale: float = 0.1, min_clients: int = 10,
                    class_separation: float | None = None) -> Preset:
    """Desk-scale stand-ins for the four benchmark corpora.

    ``femnist_like(c)`` may be spelled ``"femnist_like(2)"`` or passed
    ``classes_per_client=2``.  Client counts are multiplied by ``scale``
    (at least ``min_clients``); K and the cluster count are clamped so
    they never exceed the scaled population.
    """
    base = name.strip()
    if base.endswith(")") and "(" in base:
        base, arg = base[:-1].split("(", 1)
        classes_per_client = int(arg)
    if base not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(_PRESETS)}")
    clients, classes, dim, cpc, lr, k, clusters, samples, sep = _PRESETS[base]
    if classes_per_client is not None:
        if base != "femnist_like":
            raise ValueError("only femnist_like takes a classes-per-client argument")
        cpc = classes_per_client
    clients = max(min_clients, int(round(clients * scale)))
    k = min(k, clients)
    return Preset(
        name=base if classes_per_client is None else f"{base}({cpc})",
        num_clients=clients, num_classes=classes, feature_dim=dim,
        classes_per_client=cpc, learning_rate=lr, clients_per_round=k,
        n_clusters=min(clusters, k), samples_range=samples,
        class_separation=sep if class_separation is None else class_separation,
    )


def label_entropy(shard: ClientShard) -> float:
    """Shannon entropy (nats) of a shard's training label distribution."""
    _, counts = np.unique(shard.train_y, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


class LeafFormatError(ValueError):
    pass


def _parse_users(doc, where, num_classes=None):
    if not isinstance(doc, dict) or not {"users", "user_data"} <= doc.keys():
        raise LeafFormatError(f"{where}: expected an object with 'users' and 'user_data'")
    users = doc["users"]
    if len(set(users)) != len(users):
        dupes = sorted({u for u in users if users.count(u) > 1})
        raise LeafFormatError(f"{where}: duplicate user ids {dupes}")
    counts = doc.get("num_samples")
    if counts is not None and len(counts) != len(users):
        raise LeafFormatError(f"{where}: 'num_samples' length differs from 'users'")
    out, dim = {}, None
    for i, uid in enumerate(users):
        entry = doc["user_data"].get(uid)
        if entry is None:
            raise LeafFormatError(f"{where}: user {uid!r} has no user_data")
        try:
            x = np.asarray(entry["x"], dtype=np.float64)
            y = np.asarray(entry["y"])
        except (KeyError, ValueError, TypeError) as exc:
            raise LeafFormatError(f"{where}: user {uid!r}: bad x/y ({exc})") from None
        if x.ndim != 2 or x.shape[0] != len(y):
            raise LeafFormatError(f"{where}: user {uid!r}: x must be a list of equal-length rows matching y")
        if len(y) == 0:
            raise LeafFormatError(f"{where}: user {uid!r} has no samples")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.mod(y, 1) == 0):
                raise LeafFormatError(f"{where}: user {uid!r}: labels must be integers")
            y = y.astype(np.int64)
        if y.min() < 0 or (num_classes is not None and y.max() >= num_classes):
            raise LeafFormatError(f"{where}: user {uid!r}: label outside [0, {num_classes})")
        if counts is not None and counts[i] != len(y):
            raise LeafFormatError(f"{where}: user {uid!r}: num_samples says {counts[i]}, found {len(y)}")
        if dim is None:
            dim = x.shape[1]
        elif x.shape[1] != dim:
            raise LeafFormatError(f"{where}: user {uid!r}: feature length {x.shape[1]} != {dim}")
        out[str(uid)] = (x, y.astype(np.int64))
    return out, dim


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise LeafFormatError(f"{path}: malformed JSON ({exc})") from None


def load_leaf_json(path, test_path=None, num_classes: int | None = None) -> FederatedDataset:
    doc = _read(path)
    if num_classes is None and isinstance(doc, dict):
        num_classes = doc.get("num_classes")
    users, dim = _parse_users(doc, path, num_classes)
    if test_path is None:
        shards = [_split(uid, x, y) for uid, (x, y) in users.items()]
    else:
        tdoc = _read(test_path)
        tusers, tdim = _parse_users(tdoc, test_path, num_classes)
        if tdim != dim and tusers:
            raise LeafFormatError(f"{test_path}: feature length {tdim} != {dim}")
        missing = [u for u in users if u not in tusers]
        if missing:
            raise LeafFormatError(f"{test_path}: no test data for users {missing[:5]}")
        shards = [ClientShard(uid, x, y, *tusers[uid]) for uid, (x, y) in users.items()]
    if not shards:
        raise LeafFormatError(f"{path}: no users")
    if num_classes is None:
        num_classes = int(max(max(s.train_y.max(), s.test_y.max()) for s in shards)) + 1
    return FederatedDataset(tuple(shards), int(num_classes), int(dim),
                            provenance={"kind": "file", "path": str(path)})


def write_leaf_json(dataset: FederatedDataset, path) -> Path:
    """Write ``dataset`` in the single-file layout understood by :func:`load_leaf_json`."""
    for s in dataset.shards:
        if s.n_test != holdout_count(s.n_samples):
            raise ValueError(f"client {s.client_id!r}: split is not the single-file 80/20 layout")
    doc = {
        "users": dataset.client_ids,
        "num_samples": [s.n_samples for s in dataset.shards],
        "num_classes": dataset.num_classes,
        "user_data": {
            s.client_id: {
                "x": np.concatenate([s.train_x, s.test_x]).tolist(),
                "y": np.concatenate([s.train_y, s.test_y]).tolist(),
            }
            for s in dataset.shards
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")
    return path
