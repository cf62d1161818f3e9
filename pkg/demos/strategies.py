# %% [markdown]
# FedAvg, FedProx and FedSim with and without the frequency-space exchange,
# driven through a JSON config the same way the command line does it.

# %%
import json
from pathlib import Path

from fedft import read_csv
from fedft.runner import cmd_run, load_config

config_path = Path(__file__).with_name("configs") / "strategies.json"
print(json.dumps(json.loads(config_path.read_text()), indent=2))

# %%
cfg = load_config(config_path)
paths = cmd_run(cfg)

# %%
for path in paths:
    cols = read_csv(path)
    print(f"{path.name:40s} final acc {cols['weighted_accuracy'][-1]:.4f}  "
          f"cost {cols['cumulative_payload_mb'][-1]:.4f} MB")

# %%
# Update variance in frequency space: the difference model is far smaller
# than the full model, which is what makes it prunable.
cols = read_csv(Path(cfg.output_dir) / "strategies_fedft_fedavg_0.2.csv")
print("Var(w_hat)  first/last:", cols["var_w_hat"][0], cols["var_w_hat"][-1])
print("Var(dw_hat) first/last:", cols["var_dw_hat"][0], cols["var_dw_hat"][-1])
