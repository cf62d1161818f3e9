"""Round engine for FedAvg, FedProx and FedSim, with or without FedFT.

In FedFT mode the server's global model lives in DCT coefficient space.
Clients inverse-transform the broadcast, train locally in tensor space,
and send back a pruned transform of either their update difference
(``route="difference"``) or their whole model (``route="complete"``).
Because the DCT is linear, the server averages coefficients directly.

Baseline mode is plain tensor-space federated learning with dense uploads;
it never touches the transform or pruning code.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FederationError
from .learning import LearnerSpec, evaluate, init_params, local_update_prox, local_update_sgd
from .pruning import (
    CostModel, FrequencyUpdate, MEGABYTE, dense_payload_bytes, densify, payload_bytes, prune,
)
from .reporting import RoundRecord
from .tensor import ModelParams, SeedSpec, linear_combine, model_stats
from .transform import DctVariant, FrequencyModel, inverse_model, transform_model

__all__ = [
    "StrategyConfig",
    "ServerState",
    "ClientResult",
    "select_clients",
    "client_round",
    "aggregate_fedavg",
    "aggregate_fedsim",
    "cluster_clients",
    "FederatedRun",
    "run_experiment",
    "run_seeds",
]

log = logging.getLogger(__name__)

STRATEGIES = ("fedavg", "fedprox", "fedsim")
ROUTES = ("difference", "complete")
DEFAULT_PROX_MU = 0.01


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str = "fedavg"
    fedft: bool = True
    route: str = "difference"
    alpha: float = 0.0
    prune_start_round: int = 0
    clients_per_round: int = 10
    n_clusters: int = 1
    total_rounds: int = 50
    variant: DctVariant = DctVariant.IV
    seed: int = 0
    proximal_mu: float | None = None  # None: 0.01 for FedProx, unused otherwise
    bytes_per_value: int = 4
    dct_method: str = "direct"

    def __post_init__(self):
        object.__setattr__(self, "strategy", self.strategy.lower())
        object.__setattr__(self, "route", self.route.lower())
        object.__setattr__(self, "variant", DctVariant.parse(self.variant))
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self, num_clients: int | None = None) -> list[str]:
        out = []
        if self.strategy not in STRATEGIES:
            out.append(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.route not in ROUTES:
            out.append(f"route must be one of {ROUTES}, got {self.route!r}")
        if not 0.0 <= self.alpha < 1.0:
            out.append(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.total_rounds < 0:
            out.append("total_rounds must be non-negative")
        if not 0 <= self.prune_start_round <= max(self.total_rounds, 0):
            out.append("prune_start_round must lie in [0, total_rounds]")
        if self.clients_per_round < 1:
            out.append("clients_per_round must be >= 1")
        if num_clients is not None and self.clients_per_round > num_clients:
            out.append(f"clients_per_round {self.clients_per_round} exceeds {num_clients} clients")
        if self.strategy == "fedsim" and not 1 <= self.n_clusters <= self.clients_per_round:
            out.append("n_clusters must lie in [1, clients_per_round]")
        if self.proximal_mu is not None and self.proximal_mu < 0:
            out.append("proximal_mu must be non-negative")
        if self.bytes_per_value not in (4, 8):
            out.append("bytes_per_value must be 4 or 8")
        if self.dct_method not in ("direct", "fft"):
            out.append("dct_method must be 'direct' or 'fft'")
        return out

    @property
    def mu(self) -> float:
        if self.strategy != "fedprox":
            return 0.0
        return DEFAULT_PROX_MU if self.proximal_mu is None else float(self.proximal_mu)

    @property
    def label(self) -> str:
        return f"fedft_{self.strategy}" if self.fedft else self.strategy

    def alpha_at(self, round_index: int) -> float:
        return self.alpha if round_index >= self.prune_start_round else 0.0


@dataclass
class ServerState:
    """Global model plus upload accounting.

    ``global_model`` is a :class:`FrequencyModel` in FedFT mode and a
    :class:`ModelParams` otherwise.  ``client_upload_bytes`` sums what each
    client actually sent; ``per_client_bytes`` sums one update's size per
    round (the t x payload accounting used in the reports).
    """

    global_model: FrequencyModel | ModelParams
    round: int = 0
    client_upload_bytes: dict[str, int] = field(default_factory=dict)
    per_client_bytes: int = 0

    @property
    def total_upload_bytes(self) -> int:
        return sum(self.client_upload_bytes.values())

    def tensor_model(self) -> ModelParams:
        if isinstance(self.global_model, FrequencyModel):
            return inverse_model(self.global_model)
        return self.global_model


@dataclass(frozen=True)
class ClientResult:
    client_id: str
    n_samples: int
    update: FrequencyUpdate | ModelParams
    payload_bytes: int
    local_model: ModelParams
    delta: ModelParams
    stats: dict = field(default_factory=dict)

    @property
    def payload_mb(self) -> float:
        return self.payload_bytes / MEGABYTE


def select_clients(all_ids, k: int, round_index: int, seed) -> list[str]:
    """Uniform sample of ``k`` ids without replacement, returned sorted."""
    ids = sorted(all_ids)
    if k > len(ids):
        raise ValueError(f"cannot select {k} of {len(ids)} clients")
    if k < 0:
        raise ValueError("k must be non-negative")
    seeds = seed if isinstance(seed, SeedSpec) else SeedSpec(seed)
    picked = seeds.rng("select", round_index).choice(len(ids), size=k, replace=False)
    return [ids[i] for i in sorted(picked)]


def _var(m):
    return model_stats(m)[1]


def client_round(global_model, shard, spec: LearnerSpec, config: StrategyConfig,
                 round_index: int, seed) -> ClientResult:
    """One client's work for a round: receive, train, encode, report size."""
    rng = seed if isinstance(seed, np.random.Generator) else (
        (seed if isinstance(seed, SeedSpec) else SeedSpec(seed)).rng("local", round_index, shard.client_id))
    w_t = inverse_model(global_model) if config.fedft else global_model
    if config.strategy == "fedprox":
        w_new = local_update_prox(w_t, w_t, shard, replace(spec, proximal_mu=config.mu), rng)
    else:
        w_new = local_update_sgd(w_t, shard, spec, rng)
    delta = w_new - w_t
    cost = CostModel(config.bytes_per_value)
    stats = {"var_w": _var(w_new), "var_dw": _var(delta)}
    if config.fedft:
        alpha = config.alpha_at(round_index)
        pruned_w = prune(transform_model(w_new, config.variant, config.dct_method), alpha)
        pruned_dw = prune(transform_model(delta, config.variant, config.dct_method), alpha)
        update = pruned_dw if config.route == "difference" else pruned_w
        stats["var_w_hat"] = _var(densify(pruned_w).params)
        stats["var_dw_hat"] = _var(densify(pruned_dw).params)
        stats["alpha_realized"] = update.alpha_realized
        size = payload_bytes(update, cost)
    else:
        update = w_new
        stats["var_w_hat"] = stats["var_dw_hat"] = float("nan")
        stats["alpha_realized"] = 0.0
        size = dense_payload_bytes(w_new, cost)
    return ClientResult(shard.client_id, shard.n_train, update, size, w_new, delta, stats)


def _client_models(updates, global_model, route):
    """What each client contributes to the average, in the server's space."""
    models = []
    for u in updates:
        if isinstance(u, FrequencyUpdate):
            coeffs = densify(u).params
            models.append(global_model.params + coeffs if route == "difference" else coeffs)
        else:
            models.append(global_model + u if route == "difference" else u)
    return models


def _wrap_like(global_model, params):
    if isinstance(global_model, FrequencyModel):
        return FrequencyModel(params, global_model.variant, global_model.method)
    return params


def _weights(sizes):
    total = float(sum(sizes))
    if total <= 0:
        raise ValueError("total client size must be positive")
    return [n / total for n in sizes]


def aggregate_fedavg(updates, sizes, global_model, route: str = "difference"):
    """Size-weighted average of client contributions.

    Frequency updates with ``route="difference"`` give
    ``sum n_k/n (w_hat_t + dw_hat_k)``; ``"complete"`` gives
    ``sum n_k/n w_hat_k``.  Plain :class:`ModelParams` updates are averaged
    the same way in tensor space (``"complete"`` is ordinary FedAvg).
    """
    if len(updates) == 0:
        raise ValueError("no updates to aggregate")
    weights = _weights(sizes)
    return _wrap_like(global_model,
                      linear_combine(weights, _client_models(updates, global_model, route)))


def aggregate_fedsim(updates, sizes, assignments, global_model, route: str = "difference"):
    """Two-level FedSim average.

    Clients are first size-weighted within their cluster, then the cluster
    models are averaged with equal weight.  Returns ``(global, n_clusters)``
    where the count excludes empty clusters.
    """
    if len(updates) == 0:
        raise ValueError("no updates to aggregate")
    if len(assignments) != len(updates):
        raise ValueError("one cluster assignment per update is required")
    models = _client_models(updates, global_model, route)
    cluster_models = []
    for label in sorted(set(int(a) for a in assignments)):
        members = [i for i, a in enumerate(assignments) if int(a) == label]
        weights = _weights([sizes[i] for i in members])
        cluster_models.append(linear_combine(weights, [models[i] for i in members]))
    c = len(cluster_models)
    return _wrap_like(global_model, linear_combine([1.0 / c] * c, cluster_models)), c


def cluster_clients(vectors, n_clusters: int, seed, max_iter: int = 100,
                    tol: float = 1e-6) -> tuple[np.ndarray, int]:
    """Seeded k-means over flattened client update vectors.

    Centroids start at k-means++ picks among the distinct vectors.  Returns
    labels ``0..k-1`` (numbered by first appearance) and the effective
    ``k``, which shrinks when there are fewer distinct vectors than
    requested clusters or a cluster empties out.
    """
    x = np.array([np.asarray(v, dtype=np.float64).ravel() for v in vectors])
    if len(x) == 0:
        raise ValueError("no vectors to cluster")
    if not 1 <= n_clusters <= len(x):
        raise ValueError(f"n_clusters must lie in [1, {len(x)}], got {n_clusters}")
    rng = seed if isinstance(seed, np.random.Generator) else (
        seed if isinstance(seed, SeedSpec) else SeedSpec(seed)).rng("cluster")
    distinct = np.unique(x, axis=0)
    k = min(n_clusters, len(distinct))
    centroids = [distinct[rng.integers(len(distinct))]]
    for _ in range(1, k):
        d2 = np.min([((distinct - c) ** 2).sum(axis=1) for c in centroids], axis=0)
        centroids.append(distinct[rng.choice(len(distinct), p=d2 / d2.sum())])
    centroids = np.array(centroids)
    labels = np.zeros(len(x), dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        used = np.unique(labels)
        new = np.array([x[labels == j].mean(axis=0) for j in used])
        if len(used) < len(centroids):
            # drop emptied clusters and continue with the survivors
            centroids = new
            continue
        shift = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        if shift < tol:
            break
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    order = {}
    for lab in labels:
        order.setdefault(int(lab), len(order))
    return np.array([order[int(l)] for l in labels], dtype=np.int64), len(order)


def _cluster_vector(result: ClientResult):
    u = result.update
    if isinstance(u, FrequencyUpdate):
        return densify(u).params.flatten()
    return result.delta.flatten()


class FederatedRun:
    """One seeded federated training run over a dataset."""

    def __init__(self, dataset, spec: LearnerSpec, config: StrategyConfig, seed=None):
        problems = config.problems(len(dataset.shards))
        if dataset.feature_dim != spec.input_dim or dataset.num_classes != spec.num_classes:
            problems.append(
                f"learner is {spec.input_dim}->{spec.num_classes} but dataset is "
                f"{dataset.feature_dim}->{dataset.num_classes}"
            )
        if problems:
            raise ValueError("; ".join(problems))
        self.dataset = dataset
        self.spec = spec
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.seeds = SeedSpec(self.seed)
        self._shards = {s.client_id: s for s in dataset.shards}
        w0 = init_params(spec, self.seeds.rng("init"))
        g0 = transform_model(w0, config.variant, config.dct_method) if config.fedft else w0
        self.state = ServerState(global_model=g0)
        self.cost = CostModel(config.bytes_per_value)

    def step(self) -> RoundRecord:
        cfg, t = self.config, self.state.round
        ids = select_clients(self._shards, cfg.clients_per_round, t, self.seeds)
        results = [
            client_round(self.state.global_model, self._shards[cid], self.spec, cfg, t,
                         self.seeds.rng("local", t, cid))
            for cid in ids
        ]
        updates = [r.update for r in results]
        sizes = [r.n_samples for r in results]
        route = cfg.route if cfg.fedft else "complete"
        effective = None
        if cfg.strategy == "fedsim":
            labels, effective = cluster_clients(
                [_cluster_vector(r) for r in results], cfg.n_clusters,
                self.seeds.rng("cluster", t))
            new_global, effective = aggregate_fedsim(
                updates, sizes, labels, self.state.global_model, route)
        else:
            new_global = aggregate_fedavg(updates, sizes, self.state.global_model, route)

        params = new_global.params if isinstance(new_global, FrequencyModel) else new_global
        if not params.is_finite():
            raise FederationError("global model became non-finite", round_index=t)
        self.state.global_model = new_global
        acc, _ = evaluate(self.state.tensor_model(), self.dataset.shards)

        for r in results:
            self.state.client_upload_bytes[r.client_id] = (
                self.state.client_upload_bytes.get(r.client_id, 0) + r.payload_bytes)
        per_update = results[0].payload_bytes
        if any(r.payload_bytes != per_update for r in results):
            per_update = sum(r.payload_bytes for r in results) / len(results)
        self.state.per_client_bytes += per_update
        self.state.round = t + 1

        def mean_stat(key):
            return float(np.mean([r.stats[key] for r in results]))

        return RoundRecord(
            round=t,
            weighted_accuracy=acc,
            per_round_payload_mb=per_update / MEGABYTE,
            cumulative_payload_mb=self.state.per_client_bytes / MEGABYTE,
            var_w=mean_stat("var_w"),
            var_dw=mean_stat("var_dw"),
            var_w_hat=mean_stat("var_w_hat"),
            var_dw_hat=mean_stat("var_dw_hat"),
            alpha_realized=mean_stat("alpha_realized"),
            effective_clusters=effective,
            seed=self.seed,
        )

    def run(self, rounds: int | None = None) -> list[RoundRecord]:
        rounds = self.config.total_rounds if rounds is None else rounds
        records = []
        for _ in range(rounds):
            rec = self.step()
            log.debug("seed %s round %d acc %.4f", self.seed, rec.round, rec.weighted_accuracy)
            records.append(rec)
        return records


def run_experiment(dataset, spec: LearnerSpec, config: StrategyConfig,
                   seed=None) -> list[RoundRecord]:
    return FederatedRun(dataset, spec, config, seed).run()


def run_seeds(dataset, spec: LearnerSpec, config: StrategyConfig,
              seeds) -> dict[int, list[RoundRecord]]:
    """Repeat an experiment once per seed; feed the result to ``aggregate_seeds``."""
    return {s: run_experiment(dataset, spec, config, seed=s) for s in seeds}
