"""Order-stream data model: orders, quotes, observations, and stream containers.

Prices are integer ticks throughout; quantities and inter-arrival times are
integers. Mapping to [-1, 1] floats happens only at I/O boundaries (see
stream_io). All types are immutable value objects, safe to share across
threads once constructed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class OrderType(enum.IntEnum):
    """The four order kinds, serializable as a 2-bit code."""

    BUY = 0
    SELL = 1
    CANCEL_BUY = 2
    CANCEL_SELL = 3

    @property
    def is_cancel(self) -> bool:
        return self in (OrderType.CANCEL_BUY, OrderType.CANCEL_SELL)

    @property
    def is_bid_side(self) -> bool:
        """True for order types acting on the buy side of the book."""
        return self in (OrderType.BUY, OrderType.CANCEL_BUY)

    @classmethod
    def from_code(cls, code: int) -> "OrderType":
        if code not in (0, 1, 2, 3):
            raise ValueError(f"order type code must be 0..3, got {code}")
        return cls(code)


N_BUCKETS = 24  # the trading day is split into this many equal intervals


@dataclass(frozen=True)
class LimitOrder:
    """One limit order or cancel: inter-arrival gap, type, price, quantity."""

    interarrival_ms: int
    otype: OrderType
    price_ticks: int
    quantity: int


@dataclass(frozen=True)
class Quote:
    """A best bid or best ask: price level and total resting quantity there.

    quantity == 0 is reserved for the absent-side sentinel, whose price sits
    at the side's extreme bound (price_min for bids, price_max for asks).
    """

    price_ticks: int
    quantity: int

    @property
    def present(self) -> bool:
        return self.quantity > 0


@dataclass(frozen=True)
class MarketObservation:
    """One order together with the post-application best quotes and time bucket."""

    order: LimitOrder
    best_bid: Quote
    best_ask: Quote
    bucket: int


@dataclass(frozen=True)
class Normalization:
    """Affine-map bounds used when projecting integer fields into [-1, 1].

    price_lo/price_hi are required; dt_hi_ms and qty_hi default to the
    config's day span and qty_max so round-trips stay lossless.
    """

    price_lo: int
    price_hi: int
    dt_hi_ms: int | None = None
    qty_hi: int | None = None


@dataclass(frozen=True)
class StreamConfig:
    """Per-symbol stream metadata: bounds, day span, and normalization."""

    symbol: str
    tick_size: float
    price_min: int
    price_max: int
    qty_max: int
    day_start_ms: int
    day_end_ms: int
    normalization: Normalization

    def __post_init__(self) -> None:
        if self.price_min >= self.price_max:
            raise ValueError("price_min must be < price_max")
        if self.day_start_ms >= self.day_end_ms:
            raise ValueError("day_start_ms must be < day_end_ms")

    @property
    def day_span_ms(self) -> int:
        return self.day_end_ms - self.day_start_ms

    def absent_bid(self) -> Quote:
        return Quote(self.price_min, 0)

    def absent_ask(self) -> Quote:
        return Quote(self.price_max, 0)


@dataclass(frozen=True)
class Stream:
    """An ordered day of observations for one symbol."""

    config: StreamConfig
    observations: tuple[MarketObservation, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not isinstance(self.observations, tuple):
            object.__setattr__(self, "observations", tuple(self.observations))

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def n_total(self) -> int:
        return len(self.observations)

    def max_per_bucket(self) -> int:
        """Largest observation count in any single time bucket."""
        counts = [0] * N_BUCKETS
        for obs in self.observations:
            counts[obs.bucket] += 1
        return max(counts)

    def arrival_times_ms(self) -> list[int]:
        """Absolute arrival time of each observation (day_start + cumulative gaps)."""
        t = self.config.day_start_ms
        out = []
        for obs in self.observations:
            t += obs.order.interarrival_ms
            out.append(t)
        return out

    def slice(self, start: int, stop: int) -> "Stream":
        """Sub-stream of observations[start:stop] under the same config."""
        return Stream(self.config, self.observations[start:stop])


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


def bucket_of(elapsed_ms: int, cfg: StreamConfig) -> int:
    """Index of the day interval containing an absolute timestamp.

    The day is divided into N_BUCKETS equal intervals; the right endpoint
    clamps into the last one.
    """
    if elapsed_ms < cfg.day_start_ms or elapsed_ms > cfg.day_end_ms:
        raise ValueError(
            f"timestamp {elapsed_ms} outside day [{cfg.day_start_ms}, {cfg.day_end_ms}]"
        )
    b = N_BUCKETS * (elapsed_ms - cfg.day_start_ms) // cfg.day_span_ms
    return min(b, N_BUCKETS - 1)


def _order_violations(order: LimitOrder, cfg: StreamConfig) -> list[str]:
    v = []
    if order.interarrival_ms < 0:
        v.append("interarrival_ms < 0")
    elif order.interarrival_ms > cfg.day_span_ms:
        v.append("interarrival_ms exceeds day span")
    if order.quantity < 1:
        v.append("quantity < 1")
    elif order.quantity > cfg.qty_max:
        v.append("quantity exceeds qty_max")
    if not cfg.price_min <= order.price_ticks <= cfg.price_max:
        v.append("price outside [price_min, price_max]")
    return v


def _quote_violations(quote: Quote, side: str, cfg: StreamConfig) -> list[str]:
    v = []
    if quote.quantity < 0:
        v.append(f"{side} quote quantity < 0")
    sentinel = cfg.absent_bid() if side == "bid" else cfg.absent_ask()
    if quote.quantity == 0 and quote.price_ticks != sentinel.price_ticks:
        v.append(f"zero-quantity {side} quote is not the absent-side sentinel")
    if not cfg.price_min <= quote.price_ticks <= cfg.price_max:
        v.append(f"{side} quote price outside bounds")
    return v


def validate_observation(obs: MarketObservation, cfg: StreamConfig) -> ValidationResult:
    """Check every type invariant of one observation against the config.

    Violations are data, not failures: the result lists everything wrong.
    """
    v = _order_violations(obs.order, cfg)
    v += _quote_violations(obs.best_bid, "bid", cfg)
    v += _quote_violations(obs.best_ask, "ask", cfg)
    if obs.best_bid.present and obs.best_ask.present:
        if obs.best_bid.price_ticks >= obs.best_ask.price_ticks:
            v.append("crossed quotes")
    if not 0 <= obs.bucket < N_BUCKETS:
        v.append(f"bucket outside [0, {N_BUCKETS - 1}]")
    return ValidationResult(ok=not v, violations=tuple(v))


def validate_order(order: LimitOrder, cfg: StreamConfig) -> ValidationResult:
    """Order-level subset of validate_observation (what a matching engine needs)."""
    v = _order_violations(order, cfg)
    return ValidationResult(ok=not v, violations=tuple(v))
