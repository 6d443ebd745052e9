"""Conditioning windows and well-spaced training batches.

A batch is usable for i.i.d.-style training only if its windows are far
enough apart that they do not overlap; the spacing rule enforces pairwise
start-index gaps strictly greater than min_gap (default k + 1, the weakest
gap making windows disjoint).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .order_model import MarketObservation, Stream
from .stream_io import normalize

DEFAULT_K = 20


@dataclass(frozen=True)
class HistoryWindow:
    """k consecutive observations plus the one they condition."""

    history: tuple[MarketObservation, ...]
    target: MarketObservation
    bucket: int
    start_index: int


class BatchInfeasibleError(ValueError):
    """Requested batch cannot satisfy the spacing rule; carries the maximum that can."""

    def __init__(self, requested: int, max_feasible: int):
        super().__init__(
            f"batch of {requested} spaced windows infeasible; maximum feasible is {max_feasible}"
        )
        self.max_feasible = max_feasible


def _window_at(stream: Stream, start: int, k: int) -> HistoryWindow:
    target = stream.observations[start + k]
    return HistoryWindow(
        history=stream.observations[start : start + k],
        target=target,
        bucket=target.bucket,
        start_index=start,
    )


def windows(stream: Stream, k: int = DEFAULT_K, within_bucket: bool = False) -> list[HistoryWindow]:
    """All k-history windows, in order: one per start index 0..len-k-1.

    With within_bucket set, windows whose observations span a time-bucket
    boundary are omitted.
    """
    n = len(stream)
    if n <= k:
        raise ValueError(f"stream length {n} must exceed history length {k}")
    out = [_window_at(stream, s, k) for s in range(n - k)]
    if within_bucket:
        out = [w for w in out if w.history[0].bucket == w.bucket]
    return out


def max_feasible_batch(n_windows: int, min_gap: int) -> int:
    """Largest count of start indices in [0, n_windows) with pairwise gaps > min_gap."""
    if n_windows <= 0:
        return 0
    return (n_windows - 1) // (min_gap + 1) + 1


def sample_batch(
    stream: Stream,
    batch_size: int = 64,
    min_gap: int | None = None,
    rng: np.random.Generator | None = None,
    k: int = DEFAULT_K,
    within_bucket: bool = False,
) -> list[HistoryWindow]:
    """batch_size windows with pairwise start gaps strictly greater than min_gap.

    Uniform over all feasible placements (via the standard bijection between
    spaced tuples and plain combinations), deterministic under the rng seed.
    Raises BatchInfeasibleError naming the maximum feasible size.
    """
    if min_gap is None:
        min_gap = k + 1
    if min_gap < k + 1:
        raise ValueError("min_gap must be at least k + 1 so windows cannot overlap")
    if rng is None:
        rng = np.random.default_rng()
    n = len(stream)
    if n <= k:
        raise ValueError(f"stream length {n} must exceed history length {k}")
    n_windows = n - k

    if within_bucket:
        return _sample_batch_rejection(stream, batch_size, min_gap, rng, k)

    max_b = max_feasible_batch(n_windows, min_gap)
    if batch_size > max_b:
        raise BatchInfeasibleError(batch_size, max_b)
    # gaps > min_gap  <=>  y_i = x_i - i*min_gap are distinct increasing in a
    # shrunken range; sampling combinations there is uniform over placements
    span = n_windows - (batch_size - 1) * min_gap
    ys = np.sort(rng.choice(span, size=batch_size, replace=False))
    starts = [int(y + i * min_gap) for i, y in enumerate(ys)]
    return [_window_at(stream, s, k) for s in starts]


def _sample_batch_rejection(stream, batch_size, min_gap, rng, k, max_tries: int = 10_000):
    candidates = [w.start_index for w in windows(stream, k, within_bucket=True)]
    max_b = max_feasible_batch_from_starts(candidates, min_gap)
    if batch_size > max_b:
        raise BatchInfeasibleError(batch_size, max_b)
    for _ in range(max_tries):
        picks = np.sort(rng.choice(len(candidates), size=batch_size, replace=False))
        starts = [candidates[i] for i in picks]
        if all(b - a > min_gap for a, b in zip(starts, starts[1:])):
            return [_window_at(stream, s, k) for s in starts]
    raise BatchInfeasibleError(batch_size, max_b)


def max_feasible_batch_from_starts(starts: list[int], min_gap: int) -> int:
    """Greedy maximum of spaced picks from an arbitrary sorted start set."""
    count = 0
    last = None
    for s in starts:
        if last is None or s - last > min_gap:
            count += 1
            last = s
    return count


def export_batches(
    stream: Stream,
    path: str | Path,
    n_batches: int,
    batch_size: int = 64,
    min_gap: int | None = None,
    k: int = DEFAULT_K,
    rng: np.random.Generator | None = None,
) -> None:
    """Write sampled batches as normalized numeric text.

    Columns: batch,window,row,dt,t_buy,t_sell,t_cancel_buy,t_cancel_sell,
    price,qty,bid_price,bid_qty,ask_price,ask_qty,bucket. Rows 0..k-1 are the
    history (oldest first); row k is the target.
    """
    if rng is None:
        rng = np.random.default_rng()
    norm = normalize(stream)
    lines = [
        "batch,window,row,dt,t_buy,t_sell,t_cancel_buy,t_cancel_sell,"
        "price,qty,bid_price,bid_qty,ask_price,ask_qty,bucket"
    ]
    for b in range(n_batches):
        batch = sample_batch(stream, batch_size, min_gap, rng, k)
        for w, window in enumerate(batch):
            for r in range(k + 1):
                row = norm[window.start_index + r]
                oh = ",".join(repr(v) for v in row.type_onehot)
                lines.append(
                    f"{b},{w},{r},{row.dt!r},{oh},{row.price!r},{row.qty!r},"
                    f"{row.bid_price!r},{row.bid_qty!r},{row.ask_price!r},{row.ask_qty!r},"
                    f"{row.bucket}"
                )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
