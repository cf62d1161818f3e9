import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fedft import RoundRecord, aggregate_seeds, read_csv, write_csv
from fedft.reporting import CSV_COLUMNS, NUMERIC_FIELDS, csv_filename, write_summary_csv

HEADER = ("round,weighted_accuracy,per_round_payload_mb,cumulative_payload_mb,"
          "var_w,var_dw,var_w_hat,var_dw_hat,alpha_realized,acc_stddev")


def rec(t, acc, seed=0, **kw):
    base = dict(per_round_payload_mb=0.01, cumulative_payload_mb=0.01 * (t + 1), var_w=1.0,
                var_dw=0.5, var_w_hat=2.0, var_dw_hat=1.0, alpha_realized=0.1)
    base.update(kw)
    return RoundRecord(round=t, weighted_accuracy=acc, seed=seed, **base)


def test_one_seed_is_its_own_mean():
    stream = [rec(0, 0.3), rec(1, 0.5)]
    c = aggregate_seeds({0: stream})
    np.testing.assert_array_equal(c.mean["weighted_accuracy"], [0.3, 0.5])
    np.testing.assert_array_equal(c.std["weighted_accuracy"], [0.0, 0.0])


def test_two_seed_mean():
    c = aggregate_seeds([[rec(0, 0.4, 0)], [rec(0, 0.6, 1)]])
    assert c.mean["weighted_accuracy"][0] == pytest.approx(0.5)
    assert c.std["weighted_accuracy"][0] == pytest.approx(0.1)
    assert c.seeds == (0, 1)


def test_many_seeds_concentrate():
    rng = np.random.default_rng(0)
    noise = 0.05
    streams = [[rec(t, 0.7 + noise * rng.standard_normal(), s) for t in range(20)]
               for s in range(35)]
    c = aggregate_seeds(streams)
    # about 95% of rounds should fall within two standard errors
    inside = np.abs(c.mean["weighted_accuracy"] - 0.7) < 2 * noise / np.sqrt(35)
    assert inside.mean() >= 0.85


def test_ragged_rounds_rejected():
    with pytest.raises(ValueError):
        aggregate_seeds([[rec(0, 0.1)], [rec(0, 0.1), rec(1, 0.2)]])


def test_select_commutes_with_aggregation():
    streams = [[rec(t, 0.1 * t + s, s) for t in range(3)] for s in range(3)]
    full = aggregate_seeds(streams).select(["weighted_accuracy", "var_w"])
    assert set(full.mean) == {"weighted_accuracy", "var_w"}
    np.testing.assert_array_equal(full.mean["var_w"], aggregate_seeds(streams).mean["var_w"])


def test_header_and_empty_file(tmp_path):
    path = write_csv([], tmp_path / "empty.csv")
    assert path.read_text() == HEADER + "\n"
    assert ",".join(CSV_COLUMNS) == HEADER


def test_rows_and_format(tmp_path):
    path = write_csv([rec(0, 1 / 3), rec(1, 0.5)], tmp_path / "r.csv")
    lines = path.read_text().split("\n")
    assert lines[0] == HEADER and lines[-1] == "" and len(lines) == 4
    assert lines[1].split(",")[1] == "0.3333333333"


def test_round_trip_ten_digits(tmp_path):
    rng = np.random.default_rng(3)
    streams = [[rec(t, rng.random(), s, var_w=rng.random() * 1e-4) for t in range(6)]
               for s in range(2)]
    c = aggregate_seeds(streams)
    back = read_csv(write_csv(c, tmp_path / "c.csv"))
    np.testing.assert_array_equal(back["round"], np.arange(6))
    for name in CSV_COLUMNS[1:-1]:
        np.testing.assert_allclose(back[name], c.mean[name], rtol=5e-10)
    np.testing.assert_allclose(back["acc_stddev"], c.std["weighted_accuracy"], rtol=5e-10, atol=1e-300)


def test_nan_fields_survive(tmp_path):
    back = read_csv(write_csv([rec(0, 0.5, var_w_hat=float("nan"))], tmp_path / "n.csv"))
    assert np.isnan(back["var_w_hat"][0])


def test_byte_identical_output(tmp_path):
    stream = [rec(t, 0.1 * t) for t in range(4)]
    a = write_csv(stream, tmp_path / "a.csv").read_bytes()
    b = write_csv(list(stream), tmp_path / "b.csv").read_bytes()
    assert a == b


def test_summary_and_naming(tmp_path):
    path = write_summary_csv([(0.0, 0.9, 1.5), (0.1, 0.88, 1.35)], tmp_path / "s.csv")
    assert path.read_text() == "alpha,final_accuracy,cumulative_cost_mb\n0,0.9,1.5\n0.1,0.88,1.35\n"
    assert csv_filename("mnist", "fedft_fedavg", 0.1) == "mnist_fedft_fedavg_0.1.csv"
    assert csv_filename("mnist", "fedavg", 0) == "mnist_fedavg_0.csv"


def test_unwritable_path_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        write_csv([], blocker / "sub" / "out.csv")


@given(st.lists(st.floats(0, 1), min_size=1, max_size=5), st.integers(1, 4))
def test_mean_within_range(accs, n_seeds):
    streams = [[rec(t, a, s) for t, a in enumerate(accs)] for s in range(n_seeds)]
    c = aggregate_seeds(streams)
    np.testing.assert_allclose(c.mean["weighted_accuracy"], accs, atol=1e-15)
    assert set(NUMERIC_FIELDS) <= set(c.mean)
