import json

import numpy as np
import pytest

from fedft import load_leaf_json, read_csv
from fedft.cli import main
from fedft.errors import ConfigError
from fedft.runner import (
    cmd_run, cmd_sweep_alpha, parse_config, strategy_configs, suite_manifest,
)

SMALL = {"num_clients": 12, "num_classes": 10, "feature_dim": 20, "classes_per_client": 2,
         "samples_range": [10, 30], "seed": 1}


def write_config(tmp_path, **doc):
    doc.setdefault("dataset", SMALL)
    doc.setdefault("output_dir", str(tmp_path / "out"))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_generate_preset(tmp_path, capsys):
    out = tmp_path / "mnist.json"
    assert main(["generate", "--preset", "mnist_like", "--seed", "7", "--out", str(out)]) == 0
    data = load_leaf_json(out)
    assert len(data.shards) == 100 and data.feature_dim == 784
    first = out.read_bytes()
    assert main(["generate", "--preset", "mnist_like", "--seed", "7", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_generate_from_config(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "d.json"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(load_leaf_json(out).shards) == 12


def test_too_many_classes_per_client_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, dataset={**SMALL, "classes_per_client": 11})
    assert main(["generate", "--config", str(cfg)]) == 2
    assert "classes_per_client" in capsys.readouterr().err


def test_all_problems_reported_together():
    with pytest.raises(ConfigError) as info:
        parse_config({"dataset": {"preset": "mnist_like", "classes_per_client": 20},
                      "learner": {"architecture": "rnn"},
                      "strategy": {"alpha": 1.5, "route": "up", "variant": "IX"},
                      "seeds": [], "bogus": 1})
    assert len(info.value.problems) == 7


def test_k_larger_than_population_rejected():
    with pytest.raises(ConfigError, match="clients_per_round"):
        parse_config({"dataset": SMALL, "strategy": {"clients_per_round": 50}})


def test_missing_and_malformed_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", "--config", str(bad)]) == 2


def test_run_five_rounds_baseline(tmp_path, capsys):
    cfg = write_config(tmp_path, name="t", strategy={"fedft": False, "rounds": 5,
                                                      "clients_per_round": 4})
    assert main(["run", "--config", str(cfg)]) == 0
    path = tmp_path / "out" / "t_fedavg_0.csv"
    assert capsys.readouterr().out.strip() == str(path)
    assert len(read_csv(path)["round"]) == 5


def test_realized_alpha_for_length_ten(tmp_path):
    cfg = write_config(tmp_path, name="a", strategy={"alpha": 0.1, "rounds": 2,
                                                      "clients_per_round": 4})
    assert main(["run", "--config", str(cfg)]) == 0
    col = read_csv(tmp_path / "out" / "a_fedft_fedavg_0.1.csv")["alpha_realized"]
    np.testing.assert_array_equal(col, [0.1, 0.1])


def test_out_and_seed_override(tmp_path):
    cfg = write_config(tmp_path, name="o", strategy={"rounds": 1, "clients_per_round": 3},
                       seeds=[0, 1, 2])
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x"), "--seed", "5"]) == 0
    assert (tmp_path / "x" / "o_fedft_fedavg_0.csv").exists()


def test_runtime_failure_exits_1_with_round(tmp_path, capsys):
    cfg = write_config(tmp_path, learner={"architecture": "mlp", "hidden": [8],
                                          "learning_rate": 1e12, "local_epochs": 5},
                       strategy={"rounds": 4, "clients_per_round": 4})
    with np.errstate(all="ignore"):
        assert main(["run", "--config", str(cfg)]) == 1
    assert "round" in capsys.readouterr().err


def test_full_suite_manifest():
    configs = suite_manifest("paper")
    grid = set()
    for cfg in configs:
        for sc in strategy_configs(cfg):
            assert sc.alpha == 0.0
            grid.add((cfg.dataset["preset"], sc.strategy, sc.fedft))
    assert len(grid) == 4 * 3 * 2
    assert {g[0] for g in grid} == {"mnist_like", "femnist_like", "mex_like", "goodreads_like"}


def test_unknown_suite():
    with pytest.raises(ConfigError):
        suite_manifest("full")


def test_smoke_suite_runs(tmp_path):
    assert main(["run", "--suite", "smoke", "--out", str(tmp_path)]) == 0
    assert len(list(tmp_path.glob("smoke_*.csv"))) == 9


def test_sweep_zero_alpha_costs_dense(tmp_path):
    cfg = parse_config({"name": "z", "dataset": SMALL, "output_dir": str(tmp_path),
                        "strategy": {"rounds": 4, "clients_per_round": 4}})
    _, (summary,) = cmd_sweep_alpha(cfg, [0.0])
    rows = summary.read_text().splitlines()
    assert rows[0] == "alpha,final_accuracy,cumulative_cost_mb" and len(rows) == 2
    # 20x10 weights plus 10 biases, 4 bytes each, 4 rounds
    assert float(rows[1].split(",")[2]) == pytest.approx(4 * 210 * 4 / 1e6, rel=1e-12)


def test_sweep_cost_decreases_on_mnist_like(tmp_path):
    cfg = parse_config({"name": "m", "dataset": {"preset": "mnist_like", "seed": 0},
                        "output_dir": str(tmp_path),
                        "learner": {"local_epochs": 2}, "strategy": {"rounds": 2}})
    _, (summary,) = cmd_sweep_alpha(cfg, [0.0, 0.1, 0.2])
    costs = [float(r.split(",")[2]) for r in summary.read_text().splitlines()[1:]]
    assert costs[0] > costs[1] > costs[2]
    assert costs[0] == pytest.approx(2 * 0.0314, rel=1e-12)


def test_sweep_two_phase_cost(tmp_path):
    cfg = parse_config({"name": "p", "dataset": SMALL, "output_dir": str(tmp_path),
                        "learner": {"local_epochs": 1},
                        "strategy": {"rounds": 100, "prune_start_round": 50,
                                     "clients_per_round": 3}})
    _, (summary,) = cmd_sweep_alpha(cfg, [0.3])
    cost = float(summary.read_text().splitlines()[1].split(",")[2])
    dense = 210 * 4 / 1e6
    pruned = (20 * 7 + 7) * 4 / 1e6
    assert cost == pytest.approx(50 * dense + 50 * pruned, rel=1e-12)


def test_sweep_cli_alphas(tmp_path):
    cfg = write_config(tmp_path, name="s", strategy={"rounds": 2, "clients_per_round": 4})
    assert main(["sweep", "--config", str(cfg), "--alphas", "0,0.5"]) == 0
    assert (tmp_path / "out" / "s_fedft_fedavg_sweep.csv").exists()
    assert main(["sweep", "--config", str(cfg), "--alphas", "0,1.2"]) == 2


def test_cmd_run_is_byte_deterministic(tmp_path):
    doc = {"name": "d", "dataset": SMALL, "seeds": [0, 1],
           "strategy": {"strategy": ["fedavg", "fedsim"], "alpha": [0.0, 0.2], "rounds": 3,
                        "clients_per_round": 4, "n_clusters": 2}}
    a = cmd_run(parse_config({**doc, "output_dir": str(tmp_path / "a")}))
    b = cmd_run(parse_config({**doc, "output_dir": str(tmp_path / "b")}))
    assert len(a) == 4
    for x, y in zip(a, b):
        assert x.name == y.name and x.read_bytes() == y.read_bytes()
