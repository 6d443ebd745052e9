"""Stream file format, ten-level relevance filtering, and [-1, 1] normalization.

File format: one CSV per stream, header line
    seq,delta_ms,type_code,price_ticks,qty,bid_px,bid_qty,ask_px,ask_qty,bucket
with integer-only fields, UTF-8, LF line endings. Absent-side quotes are
stored as their sentinel encoding (extreme price, quantity 0). A JSON
sidecar at <path>.meta.json carries the StreamConfig.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .matching_engine import OrderBook, replay
from .order_model import (
    LimitOrder,
    MarketObservation,
    Normalization,
    OrderType,
    Quote,
    Stream,
    StreamConfig,
)

HEADER = "seq,delta_ms,type_code,price_ticks,qty,bid_px,bid_qty,ask_px,ask_qty,bucket"

RELEVANCE_LEVELS = 10  # book depth within which a resting order counts as relevant


class StreamParseError(ValueError):
    """Malformed stream file; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def config_to_dict(cfg: StreamConfig) -> dict:
    norm = cfg.normalization
    return {
        "symbol": cfg.symbol,
        "tick_size": cfg.tick_size,
        "price_min": cfg.price_min,
        "price_max": cfg.price_max,
        "qty_max": cfg.qty_max,
        "day_start_ms": cfg.day_start_ms,
        "day_end_ms": cfg.day_end_ms,
        "normalization": {
            "price_lo": norm.price_lo,
            "price_hi": norm.price_hi,
            "dt_hi_ms": norm.dt_hi_ms,
            "qty_hi": norm.qty_hi,
        },
    }


def config_from_dict(d: dict) -> StreamConfig:
    n = d["normalization"]
    return StreamConfig(
        symbol=d["symbol"],
        tick_size=d["tick_size"],
        price_min=d["price_min"],
        price_max=d["price_max"],
        qty_max=d["qty_max"],
        day_start_ms=d["day_start_ms"],
        day_end_ms=d["day_end_ms"],
        normalization=Normalization(
            price_lo=n["price_lo"],
            price_hi=n["price_hi"],
            dt_hi_ms=n.get("dt_hi_ms"),
            qty_hi=n.get("qty_hi"),
        ),
    )


def write_stream(stream: Stream, path: str | Path) -> None:
    """Write the stream CSV and its config sidecar (lossless round-trip)."""
    path = Path(path)
    rows = [HEADER]
    for i, obs in enumerate(stream.observations):
        o = obs.order
        rows.append(
            f"{i},{o.interarrival_ms},{int(o.otype)},{o.price_ticks},{o.quantity},"
            f"{obs.best_bid.price_ticks},{obs.best_bid.quantity},"
            f"{obs.best_ask.price_ticks},{obs.best_ask.quantity},{obs.bucket}"
        )
    rows.append("")
    path.write_text("\n".join(rows), encoding="utf-8", newline="\n")
    sidecar_path(path).write_text(
        json.dumps(config_to_dict(stream.config), indent=2) + "\n", encoding="utf-8"
    )


def read_stream(path: str | Path) -> Stream:
    """Parse a stream CSV plus sidecar. Raises StreamParseError with a line number.

    Format-strict, semantics-lenient: field types and column counts are
    enforced here; observation invariants are validate_observation's job.
    """
    path = Path(path)
    side = sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"missing config sidecar {side}")
    cfg = config_from_dict(json.loads(side.read_text(encoding="utf-8")))

    observations = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != HEADER:
            raise StreamParseError(1, f"bad header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 10:
                raise StreamParseError(line_no, f"expected 10 columns, got {len(parts)}")
            try:
                seq, delta, code, px, qty, bpx, bq, apx, aq, bucket = map(int, parts)
            except ValueError as exc:
                raise StreamParseError(line_no, f"non-integer field ({exc})") from None
            if seq != line_no - 2:
                raise StreamParseError(line_no, f"sequence number {seq} out of order")
            if not 0 <= code <= 3:
                raise StreamParseError(line_no, f"type code {code} outside 0..3")
            observations.append(
                MarketObservation(
                    order=LimitOrder(delta, OrderType(code), px, qty),
                    best_bid=Quote(bpx, bq),
                    best_ask=Quote(apx, aq),
                    bucket=bucket,
                )
            )
    return Stream(cfg, tuple(observations))


# -- ten-level relevance filter -------------------------------------------


@dataclass(frozen=True)
class PreprocessResult:
    stream: Stream
    kept_indices: tuple[int, ...]
    dropped_orders: int
    dropped_cancels: int


def preprocess(raw_orders, cfg: StreamConfig) -> PreprocessResult:
    """Drop orders that never matter within RELEVANCE_LEVELS of the best quotes.

    Pass 1 replays the full sequence, marking an order relevant if it ever
    transacts (either side of a fill) or if it rests within the top ten
    levels of its side at any post-apply state. Pass 2 drops irrelevant
    orders, reduces each cancel to the quantity it removed from surviving
    orders (dropping cancels left with none), folds dropped inter-arrival
    gaps into the next survivor, and re-replays for consistent quotes.
    """
    orders = list(raw_orders)
    n = len(orders)
    relevant = bytearray(n)
    cancel_sources: dict[int, tuple[tuple[int, int], ...]] = {}
    # highest entry seq already marked per (is_bid, price) level
    mark_ptr: dict[tuple[bool, int], int] = {}

    book = OrderBook(cfg)
    for i, order in enumerate(orders):
        result = book.apply(order)
        if order.otype.is_cancel:
            cancel_sources[i] = result.consumed
        else:
            if result.consumed:
                relevant[i] = 1  # transacted on arrival
                for seq, _qty in result.consumed:
                    relevant[seq] = 1  # resting counterparty transacted
        # sample the post-apply book: mark everything resting in the top levels
        for bid_side in (True, False):
            for queue in book._top_queues(bid_side, RELEVANCE_LEVELS):
                if not queue:
                    continue
                newest = queue[-1][0]
                key = (bid_side, orders[newest].price_ticks)
                ptr = mark_ptr.get(key, -1)
                if newest <= ptr:
                    continue
                for entry in reversed(queue):
                    if entry[0] <= ptr:
                        break
                    relevant[entry[0]] = 1
                mark_ptr[key] = newest

    survivors: list[LimitOrder] = []
    kept_indices: list[int] = []
    dropped_orders = 0
    dropped_cancels = 0
    carry = 0
    for i, order in enumerate(orders):
        carry += order.interarrival_ms
        if order.otype.is_cancel:
            kept_qty = sum(q for seq, q in cancel_sources[i] if relevant[seq])
            if kept_qty == 0:
                dropped_cancels += 1
                continue
            survivors.append(
                LimitOrder(carry, order.otype, order.price_ticks, kept_qty)
            )
        else:
            if not relevant[i]:
                dropped_orders += 1
                continue
            survivors.append(
                LimitOrder(carry, order.otype, order.price_ticks, order.quantity)
            )
        kept_indices.append(i)
        carry = 0

    return PreprocessResult(
        stream=replay(survivors, cfg),
        kept_indices=tuple(kept_indices),
        dropped_orders=dropped_orders,
        dropped_cancels=dropped_cancels,
    )


# -- normalization ----------------------------------------------------------


@dataclass(frozen=True)
class NormalizedObservation:
    """One observation projected onto [-1, 1] floats for model training."""

    dt: float
    type_onehot: tuple[float, float, float, float]
    price: float
    qty: float
    bid_price: float
    bid_qty: float
    ask_price: float
    ask_qty: float
    bucket: int


def _bounds(cfg: StreamConfig) -> tuple[int, int, int, int]:
    norm = cfg.normalization
    if norm.price_lo is None or norm.price_hi is None:
        raise ValueError("config normalization bounds missing")
    dt_hi = norm.dt_hi_ms if norm.dt_hi_ms is not None else cfg.day_span_ms
    qty_hi = norm.qty_hi if norm.qty_hi is not None else cfg.qty_max
    return norm.price_lo, norm.price_hi, dt_hi, qty_hi


def _to_unit(x: float, lo: float, hi: float) -> float:
    y = 2.0 * (x - lo) / (hi - lo) - 1.0
    return -1.0 if y < -1.0 else (1.0 if y > 1.0 else y)


def _from_unit(y: float, lo: float, hi: float) -> int:
    y = -1.0 if y < -1.0 else (1.0 if y > 1.0 else y)
    return round(lo + (y + 1.0) * (hi - lo) / 2.0)


def normalize(stream: Stream) -> list[NormalizedObservation]:
    """Affine-map every field into [-1, 1] (clipped). Sentinel quotes map to
    the side extreme so they survive the round trip exactly."""
    cfg = stream.config
    p_lo, p_hi, dt_hi, qty_hi = _bounds(cfg)
    out = []
    for obs in stream.observations:
        o = obs.order
        onehot = tuple(1.0 if int(o.otype) == k else 0.0 for k in range(4))
        bid, ask = obs.best_bid, obs.best_ask
        out.append(
            NormalizedObservation(
                dt=_to_unit(o.interarrival_ms, 0, dt_hi),
                type_onehot=onehot,
                price=_to_unit(o.price_ticks, p_lo, p_hi),
                qty=_to_unit(o.quantity, 0, qty_hi),
                bid_price=-1.0 if not bid.present else _to_unit(bid.price_ticks, p_lo, p_hi),
                bid_qty=_to_unit(bid.quantity, 0, qty_hi),
                ask_price=1.0 if not ask.present else _to_unit(ask.price_ticks, p_lo, p_hi),
                ask_qty=_to_unit(ask.quantity, 0, qty_hi),
                bucket=obs.bucket,
            )
        )
    return out


def denormalize(seq, cfg: StreamConfig) -> Stream:
    """Invert normalize: clip to [-1, 1], then round back to the integer grids.

    Quote quantities rounding to 0 reconstruct the absent-side sentinel;
    order quantities are floored at 1 (a zero-quantity order is invalid).
    """
    p_lo, p_hi, dt_hi, qty_hi = _bounds(cfg)
    observations = []
    for row in seq:
        code = max(range(4), key=lambda k: row.type_onehot[k])
        qty = max(1, _from_unit(row.qty, 0, qty_hi))
        order = LimitOrder(
            interarrival_ms=_from_unit(row.dt, 0, dt_hi),
            otype=OrderType(code),
            price_ticks=_from_unit(row.price, p_lo, p_hi),
            quantity=qty,
        )
        bid_qty = _from_unit(row.bid_qty, 0, qty_hi)
        ask_qty = _from_unit(row.ask_qty, 0, qty_hi)
        bid = cfg.absent_bid() if bid_qty == 0 else Quote(_from_unit(row.bid_price, p_lo, p_hi), bid_qty)
        ask = cfg.absent_ask() if ask_qty == 0 else Quote(_from_unit(row.ask_price, p_lo, p_hi), ask_qty)
        observations.append(
            MarketObservation(order=order, best_bid=bid, best_ask=ask, bucket=row.bucket)
        )
    return Stream(cfg, tuple(observations))
