"""Per-round records, seed averaging and CSV emission."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "RoundRecord",
    "Curve",
    "CSV_COLUMNS",
    "aggregate_seeds",
    "write_csv",
    "read_csv",
    "write_summary_csv",
    "csv_filename",
]

CSV_COLUMNS = (
    "round", "weighted_accuracy", "per_round_payload_mb", "cumulative_payload_mb",
    "var_w", "var_dw", "var_w_hat", "var_dw_hat", "alpha_realized", "acc_stddev",
)
SUMMARY_COLUMNS = ("alpha", "final_accuracy", "cumulative_cost_mb")


@dataclass(frozen=True)
class RoundRecord:
    """Metrics after one round.

    Payload figures are per client: ``per_round_payload_mb`` is the size of
    one upstream update this round and ``cumulative_payload_mb`` their sum
    over rounds so far.  The ``var_*`` fields are population variances
    averaged over the round's selected clients; ``*_hat`` are taken on the
    pruned DCT coefficients and are NaN for runs that never transform.
    """

    round: int
    weighted_accuracy: float
    per_round_payload_mb: float
    cumulative_payload_mb: float
    var_w: float
    var_dw: float
    var_w_hat: float
    var_dw_hat: float
    alpha_realized: float
    effective_clusters: int | None = None
    seed: int = 0


NUMERIC_FIELDS = tuple(
    f.name for f in fields(RoundRecord) if f.name not in ("round", "seed")
)


@dataclass(frozen=True)
class Curve:
    """Per-round mean and population standard deviation across seeds."""

    rounds: np.ndarray
    mean: Mapping[str, np.ndarray]
    std: Mapping[str, np.ndarray]
    seeds: tuple[int, ...] = ()

    def __len__(self):
        return len(self.rounds)

    def select(self, names: Sequence[str]) -> "Curve":
        return Curve(self.rounds, {n: self.mean[n] for n in names},
                     {n: self.std[n] for n in names}, self.seeds)


def _as_float(value):
    return math.nan if value is None else float(value)


def aggregate_seeds(records_by_seed) -> Curve:
    """Average record streams of several seeds round by round.

    Accepts a mapping ``seed -> records`` or a sequence of record lists.
    All streams must cover the same rounds.
    """
    if isinstance(records_by_seed, Mapping):
        seeds = tuple(records_by_seed)
        streams = [list(records_by_seed[s]) for s in seeds]
    else:
        streams = [list(r) for r in records_by_seed]
        seeds = tuple(r[0].seed if r else i for i, r in enumerate(streams))
    if not streams:
        raise ValueError("no record streams to aggregate")
    rounds = [r.round for r in streams[0]]
    for s, stream in zip(seeds, streams):
        if [r.round for r in stream] != rounds:
            raise ValueError(f"seed {s} covers different rounds than seed {seeds[0]}")
    mean, std = {}, {}
    for name in NUMERIC_FIELDS:
        table = np.array([[_as_float(getattr(r, name)) for r in stream] for stream in streams],
                         dtype=np.float64).reshape(len(streams), len(rounds))
        mean[name] = table.mean(axis=0)
        std[name] = table.std(axis=0)
    return Curve(np.array(rounds, dtype=np.int64), mean, std, seeds)


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _rows(curve: Curve):
    for i, r in enumerate(curve.rounds):
        row = [str(int(r))]
        row += [_fmt(curve.mean[name][i]) for name in CSV_COLUMNS[1:-1]]
        row.append(_fmt(curve.std["weighted_accuracy"][i]))
        yield row


def write_csv(curve, path) -> Path:
    """Write a curve (or a single-seed record list) as CSV."""
    if not isinstance(curve, Curve):
        records = list(curve)
        curve = aggregate_seeds([records]) if records else None
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            if curve is not None:
                writer.writerows(_rows(curve))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Parse a file written by :func:`write_csv` into column arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(float(v))
    out = {h: np.array(v, dtype=np.float64) for h, v in cols.items()}
    if "round" in out:
        out["round"] = out["round"].astype(np.int64)
    return out


def write_summary_csv(rows, path) -> Path:
    """``rows``: iterable of ``(alpha, final_accuracy, cumulative_cost_mb)``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for alpha, acc, cost in rows:
            writer.writerow([_fmt(alpha), _fmt(acc), _fmt(cost)])
    return path


def csv_filename(experiment: str, strategy: str, alpha: float) -> str:
    return f"{experiment}_{strategy}_{format(float(alpha), 'g')}.csv"
