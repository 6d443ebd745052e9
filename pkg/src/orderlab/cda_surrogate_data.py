"""Training pairs for a learned book-update surrogate, labeled by the exact
engine, plus scoring of surrogate predictions.

A pair maps (order, previous best quotes) to the next best quotes. The
recoverable flag records whether that label is a function of the pair's
inputs alone: it is computed by re-applying the order to a book containing
only the two previous best levels and checking the result against the label.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .matching_engine import OrderBook
from .order_model import LimitOrder, OrderType, Quote, Stream, StreamConfig
from .stream_io import _bounds, _to_unit


@dataclass(frozen=True)
class SurrogatePair:
    order: LimitOrder
    prev_bid: Quote
    prev_ask: Quote
    next_bid: Quote
    next_ask: Quote
    recoverable: bool


def _two_quote_next(
    order: LimitOrder, prev_bid: Quote, prev_ask: Quote, cfg: StreamConfig
) -> tuple[Quote, Quote]:
    """Quotes after applying the order to a book holding only the two best levels."""
    book = OrderBook(cfg)
    if prev_bid.present:
        book.apply(LimitOrder(0, OrderType.BUY, prev_bid.price_ticks, prev_bid.quantity))
    if prev_ask.present:
        book.apply(LimitOrder(0, OrderType.SELL, prev_ask.price_ticks, prev_ask.quantity))
    book.apply(order)
    return book.best_bid(), book.best_ask()


def export_pairs(stream: Stream) -> list[SurrogatePair]:
    """One pair per observation; the stream must carry exact-engine quotes."""
    cfg = stream.config
    prev_bid, prev_ask = cfg.absent_bid(), cfg.absent_ask()
    pairs = []
    for obs in stream.observations:
        label = (obs.best_bid, obs.best_ask)
        recoverable = _two_quote_next(obs.order, prev_bid, prev_ask, cfg) == label
        pairs.append(
            SurrogatePair(
                order=obs.order,
                prev_bid=prev_bid,
                prev_ask=prev_ask,
                next_bid=obs.best_bid,
                next_ask=obs.best_ask,
                recoverable=recoverable,
            )
        )
        prev_bid, prev_ask = label
    return pairs


PAIRS_HEADER = (
    "delta_ms,type_code,price_ticks,qty,"
    "prev_bid_px,prev_bid_qty,prev_ask_px,prev_ask_qty,"
    "next_bid_px,next_bid_qty,next_ask_px,next_ask_qty,recoverable"
)


def write_pairs(pairs, path: str | Path) -> None:
    lines = [PAIRS_HEADER]
    for p in pairs:
        o = p.order
        lines.append(
            f"{o.interarrival_ms},{int(o.otype)},{o.price_ticks},{o.quantity},"
            f"{p.prev_bid.price_ticks},{p.prev_bid.quantity},"
            f"{p.prev_ask.price_ticks},{p.prev_ask.quantity},"
            f"{p.next_bid.price_ticks},{p.next_bid.quantity},"
            f"{p.next_ask.price_ticks},{p.next_ask.quantity},{int(p.recoverable)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pairs(path: str | Path) -> list[SurrogatePair]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != PAIRS_HEADER:
        raise ValueError("bad pairs header")
    pairs = []
    for line in lines[1:]:
        if not line:
            continue
        d, t, px, q, bb, bbq, ba, baq, nb, nbq, na, naq, rec = map(int, line.split(","))
        pairs.append(
            SurrogatePair(
                order=LimitOrder(d, OrderType(t), px, q),
                prev_bid=Quote(bb, bbq),
                prev_ask=Quote(ba, baq),
                next_bid=Quote(nb, nbq),
                next_ask=Quote(na, naq),
                recoverable=bool(rec),
            )
        )
    return pairs


@dataclass(frozen=True)
class SurrogateScore:
    mse_price: float
    mse_qty: float
    top_level_accuracy: float
    recoverable_accuracy: float
    nonrecoverable_accuracy: float
    recoverable_fraction: float


def score_surrogate(predictions, pairs, cfg: StreamConfig) -> SurrogateScore:
    """Score predicted (bid, ask) quote pairs against exported labels.

    MSE is computed over the normalized price/quantity fields; accuracy is
    exact top-of-book match, reported overall and split by the recoverable
    flag.
    """
    predictions = list(predictions)
    pairs = list(pairs)
    if len(predictions) != len(pairs):
        raise ValueError(f"{len(predictions)} predictions for {len(pairs)} pairs")
    if not pairs:
        raise ValueError("no pairs to score")
    p_lo, p_hi, _dt_hi, qty_hi = _bounds(cfg)

    se_price = se_qty = 0.0
    hits = hits_rec = hits_non = n_rec = 0
    for (pred_bid, pred_ask), pair in zip(predictions, pairs):
        for pred, label in ((pred_bid, pair.next_bid), (pred_ask, pair.next_ask)):
            dp = _to_unit(pred.price_ticks, p_lo, p_hi) - _to_unit(label.price_ticks, p_lo, p_hi)
            dq = _to_unit(pred.quantity, 0, qty_hi) - _to_unit(label.quantity, 0, qty_hi)
            se_price += dp * dp
            se_qty += dq * dq
        exact = pred_bid == pair.next_bid and pred_ask == pair.next_ask
        hits += exact
        if pair.recoverable:
            n_rec += 1
            hits_rec += exact
        else:
            hits_non += exact

    n = len(pairs)
    n_non = n - n_rec
    return SurrogateScore(
        mse_price=se_price / (2 * n),
        mse_qty=se_qty / (2 * n),
        top_level_accuracy=hits / n,
        recoverable_accuracy=hits_rec / n_rec if n_rec else float("nan"),
        nonrecoverable_accuracy=hits_non / n_non if n_non else float("nan"),
        recoverable_fraction=n_rec / n,
    )
