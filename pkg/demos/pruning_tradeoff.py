# %% [markdown]
# Accuracy against upload cost on the mnist_like preset.  Each row trains
# the same federation with a different pruning rate.

# %%
import numpy as np

from fedft import LearnerSpec, StrategyConfig, dataset_presets, generate_synthetic, run_seeds
from fedft.reporting import aggregate_seeds

preset = dataset_presets("mnist_like")
data = generate_synthetic(**preset.generator_kwargs(), seed=0)
spec = LearnerSpec(data.feature_dim, data.num_classes, learning_rate=preset.learning_rate)
print(f"{len(data.shards)} clients, {data.total_samples} samples, K={preset.clients_per_round}")

# %%
ROUNDS, SEEDS = 30, [0, 1]
rows = []
for alpha in (0.0, 0.1, 0.2, 0.3, 0.5):
    cfg = StrategyConfig(alpha=alpha, clients_per_round=preset.clients_per_round,
                         total_rounds=ROUNDS)
    curve = aggregate_seeds(run_seeds(data, spec, cfg, SEEDS))
    rows.append((alpha, curve.mean["weighted_accuracy"][-1],
                 curve.mean["cumulative_payload_mb"][-1]))

# %%
base_cost = rows[0][2]
print("alpha  accuracy  cost_mb  cost_ratio")
for alpha, acc, cost in rows:
    print(f"{alpha:5.1f}  {acc:8.4f}  {cost:7.4f}  {cost / base_cost:10.3f}")

# %%
# Pruning only after the model has settled keeps nearly all the accuracy.
late = StrategyConfig(alpha=0.4, prune_start_round=ROUNDS // 2,
                      clients_per_round=preset.clients_per_round, total_rounds=ROUNDS)
curve = aggregate_seeds(run_seeds(data, spec, late, SEEDS))
print(f"alpha 0.4 from round {ROUNDS // 2}: accuracy "
      f"{curve.mean['weighted_accuracy'][-1]:.4f}, cost {curve.mean['cumulative_payload_mb'][-1]:.4f} MB")
print("per-round payload:", np.unique(curve.mean["per_round_payload_mb"]))
