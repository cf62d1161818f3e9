"""Federated learning with model exchange in DCT frequency space."""

from .errors import ConfigError, FederationError, ShapeError
from .tensor import ModelParams, SeedSpec, gaussian_model, linear_combine, model_stats
from .transform import (
    DctVariant, FrequencyModel, dct_forward, dct_inverse, inverse_model,
    reconstruction_error, transform_model,
)
from .pruning import (
    CostModel, FrequencyUpdate, dense_payload_bytes, densify, payload_bytes,
    payload_megabytes, prune, pruned_length,
)
from .learning import (
    LearnerSpec, evaluate, forward_loss, init_params, local_update_prox,
    local_update_sgd, loss_and_grad,
)
from .data import (
    ClientShard, FederatedDataset, dataset_presets, generate_synthetic,
    label_entropy, load_leaf_json, write_leaf_json,
)
from .federation import (
    FederatedRun, StrategyConfig, aggregate_fedavg, aggregate_fedsim, client_round,
    cluster_clients, run_experiment, run_seeds, select_clients,
)
from .reporting import RoundRecord, aggregate_seeds, read_csv, write_csv

__version__ = "0.1.0"
