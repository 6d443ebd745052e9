"""Readers for the stream laboratory's file contracts, plus normalization.

Stream CSV: header `seq,delta_ms,type_code,price_ticks,qty,bid_px,bid_qty,
ask_px,ask_qty,bucket`, integer fields, with a JSON sidecar at
<path>.meta.json carrying bounds. Pair CSV: the book-update training pairs
with a trailing `recoverable` flag. Feature vectors are laid out as
[dt, type-onehot(4), price, qty, bid_price, bid_qty, ask_price, ask_qty],
every field affinely mapped into [-1, 1] by the sidecar's bounds.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STREAM_HEADER = "seq,delta_ms,type_code,price_ticks,qty,bid_px,bid_qty,ask_px,ask_qty,bucket"
PAIRS_HEADER = (
    "delta_ms,type_code,price_ticks,qty,"
    "prev_bid_px,prev_bid_qty,prev_ask_px,prev_ask_qty,"
    "next_bid_px,next_bid_qty,next_ask_px,next_ask_qty,recoverable"
)

FEATURE_DIM = 11  # dt + onehot(4) + price + qty + 4 quote fields
N_BUCKETS = 24


@dataclass(frozen=True)
class Bounds:
    """Normalization bounds from the stream sidecar."""

    price_lo: int
    price_hi: int
    dt_hi: int
    qty_hi: int
    price_min: int
    price_max: int
    qty_max: int
    day_start_ms: int
    day_end_ms: int
    symbol: str
    tick_size: float

    @property
    def day_span_ms(self) -> int:
        return self.day_end_ms - self.day_start_ms


def read_sidecar(csv_path: str | Path) -> Bounds:
    meta = json.loads(Path(str(csv_path) + ".meta.json").read_text(encoding="utf-8"))
    norm = meta["normalization"]
    dt_hi = norm.get("dt_hi_ms")
    qty_hi = norm.get("qty_hi")
    return Bounds(
        price_lo=norm["price_lo"],
        price_hi=norm["price_hi"],
        dt_hi=dt_hi if dt_hi is not None else meta["day_end_ms"] - meta["day_start_ms"],
        qty_hi=qty_hi if qty_hi is not None else meta["qty_max"],
        price_min=meta["price_min"],
        price_max=meta["price_max"],
        qty_max=meta["qty_max"],
        day_start_ms=meta["day_start_ms"],
        day_end_ms=meta["day_end_ms"],
        symbol=meta["symbol"],
        tick_size=meta["tick_size"],
    )


def read_stream_rows(csv_path: str | Path) -> np.ndarray:
    """Integer matrix of the 10 stream columns, one row per observation."""
    lines = Path(csv_path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != STREAM_HEADER:
        raise ValueError(f"unexpected stream header in {csv_path}")
    return np.array(
        [[int(v) for v in line.split(",")] for line in lines[1:] if line], dtype=np.int64
    )


def _unit(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.clip(2.0 * (x - lo) / (hi - lo) - 1.0, -1.0, 1.0)


def _from_unit(y: float, lo: float, hi: float) -> int:
    y = min(1.0, max(-1.0, y))
    return round(lo + (y + 1.0) * (hi - lo) / 2.0)


def stream_features(rows: np.ndarray, bounds: Bounds) -> tuple[np.ndarray, np.ndarray]:
    """(features[n, 11], buckets[n]) for stream rows, normalized to [-1, 1].

    Absent-side quotes (quantity 0) pin their price channel to the side
    extreme, matching the writer's convention.
    """
    n = rows.shape[0]
    feats = np.zeros((n, FEATURE_DIM), dtype=np.float32)
    feats[:, 0] = _unit(rows[:, 1], 0, bounds.dt_hi)
    feats[np.arange(n), 1 + rows[:, 2]] = 1.0
    feats[:, 5] = _unit(rows[:, 3], bounds.price_lo, bounds.price_hi)
    feats[:, 6] = _unit(rows[:, 4], 0, bounds.qty_hi)
    bid_absent = rows[:, 6] == 0
    ask_absent = rows[:, 8] == 0
    feats[:, 7] = np.where(bid_absent, -1.0, _unit(rows[:, 5], bounds.price_lo, bounds.price_hi))
    feats[:, 8] = _unit(rows[:, 6], 0, bounds.qty_hi)
    feats[:, 9] = np.where(ask_absent, 1.0, _unit(rows[:, 7], bounds.price_lo, bounds.price_hi))
    feats[:, 10] = _unit(rows[:, 8], 0, bounds.qty_hi)
    return feats, rows[:, 9].copy()


def load_stream(csv_path: str | Path) -> tuple[np.ndarray, np.ndarray, Bounds]:
    bounds = read_sidecar(csv_path)
    rows = read_stream_rows(csv_path)
    feats, buckets = stream_features(rows, bounds)
    return feats, buckets, bounds


@dataclass(frozen=True)
class PairData:
    """Book-update pairs: inputs, normalized labels, and integer label grids."""

    inputs: np.ndarray       # [n, 12]: dt, onehot4, price, qty, prev quote fields (4), recoverable excluded
    labels: np.ndarray       # [n, 4]: next bid_p, bid_q, ask_p, ask_q normalized
    prev_quotes: np.ndarray  # [n, 4] normalized (same 4 channels as labels)
    label_ints: np.ndarray   # [n, 4] integer (px, qty, px, qty)
    recoverable: np.ndarray  # [n] bool


def load_pairs(pairs_path: str | Path, bounds: Bounds) -> PairData:
    lines = Path(pairs_path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != PAIRS_HEADER:
        raise ValueError(f"unexpected pairs header in {pairs_path}")
    raw = np.array(
        [[int(v) for v in line.split(",")] for line in lines[1:] if line], dtype=np.int64
    )
    n = raw.shape[0]
    inputs = np.zeros((n, 12), dtype=np.float32)
    inputs[:, 0] = _unit(raw[:, 0], 0, bounds.dt_hi)
    inputs[np.arange(n), 1 + raw[:, 1]] = 1.0
    inputs[:, 5] = _unit(raw[:, 2], bounds.price_lo, bounds.price_hi)
    inputs[:, 6] = _unit(raw[:, 3], 0, bounds.qty_hi)

    def quote_feats(px_col, qty_col, absent_value):
        absent = raw[:, qty_col] == 0
        px = np.where(absent, absent_value, _unit(raw[:, px_col], bounds.price_lo, bounds.price_hi))
        return px, _unit(raw[:, qty_col], 0, bounds.qty_hi)

    inputs[:, 7], inputs[:, 8] = quote_feats(4, 5, -1.0)
    inputs[:, 9], inputs[:, 10] = quote_feats(6, 7, 1.0)
    inputs[:, 11] = 0.0  # reserved channel keeps the conv width even

    labels = np.zeros((n, 4), dtype=np.float32)
    labels[:, 0], labels[:, 1] = quote_feats(8, 9, -1.0)
    labels[:, 2], labels[:, 3] = quote_feats(10, 11, 1.0)
    return PairData(
        inputs=inputs,
        labels=labels,
        prev_quotes=inputs[:, 7:11].copy(),
        label_ints=raw[:, 8:12].copy(),
        recoverable=raw[:, 12].astype(bool),
    )


def denorm_quotes(pred: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Round normalized quote predictions back to the integer grid.

    Quantities rounding to zero collapse the side to its sentinel encoding
    (extreme price, quantity 0), mirroring the stream writer.
    """
    out = np.zeros_like(pred, dtype=np.int64)
    for i, row in enumerate(pred):
        bq = max(0, _from_unit(row[1], 0, bounds.qty_hi))
        aq = max(0, _from_unit(row[3], 0, bounds.qty_hi))
        bp = bounds.price_min if bq == 0 else _from_unit(row[0], bounds.price_lo, bounds.price_hi)
        ap = bounds.price_max if aq == 0 else _from_unit(row[2], bounds.price_lo, bounds.price_hi)
        out[i] = (bp, bq, ap, aq)
    return out


def spaced_window_starts(
    n_rows: int, k: int, batch_size: int, min_gap: int, rng: np.random.Generator
) -> np.ndarray:
    """batch_size window starts with pairwise gaps > min_gap, uniform over
    feasible placements (bijection with plain combinations)."""
    n_windows = n_rows - k
    span = n_windows - (batch_size - 1) * min_gap
    if span < batch_size:
        raise ValueError(
            f"stream too short for {batch_size} windows spaced > {min_gap}: "
            f"max feasible {(n_windows - 1) // (min_gap + 1) + 1}"
        )
    ys = np.sort(rng.choice(span, size=batch_size, replace=False))
    return ys + np.arange(batch_size) * min_gap


def history_batch(
    feats: np.ndarray,
    buckets: np.ndarray,
    k: int,
    batch_size: int,
    min_gap: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(histories[b, k, 11], targets[b, 11], target_buckets[b]) per the spacing rule."""
    starts = spaced_window_starts(len(feats), k, batch_size, min_gap, rng)
    histories = np.stack([feats[s : s + k] for s in starts])
    targets = feats[starts + k]
    return histories, targets, buckets[starts + k]
