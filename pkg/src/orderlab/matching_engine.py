"""Exact continuous double auction over integer price ticks.

Price-time priority: an incoming buy/sell sweeps opposite levels while its
limit is satisfied, fills price at the resting order, FIFO within a level;
the remainder rests. Cancels remove quantity at a (side, price) level,
oldest resting quantity first. The book is never crossed after apply().
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from sortedcontainers import SortedDict

from .order_model import (
    LimitOrder,
    MarketObservation,
    OrderType,
    Quote,
    Stream,
    StreamConfig,
    bucket_of,
    validate_order,
)


@dataclass(frozen=True)
class Transaction:
    """One fill: priced at the incumbent (resting) order's level."""

    price_ticks: int
    quantity: int
    aggressor_side: OrderType  # BUY or SELL


@dataclass(frozen=True)
class BookSnapshot:
    """Top-of-book depth, best-first per side."""

    bid_levels: tuple[tuple[int, int], ...]
    ask_levels: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ApplyResult:
    """Fills plus provenance: consumed lists (entry_seq, qty) for every resting
    entry an order matched against or canceled out of the book."""

    transactions: tuple[Transaction, ...]
    cancel_noop: bool = False
    consumed: tuple[tuple[int, int], ...] = ()


class _Level:
    """One price level: FIFO queue of [seq, qty] resting entries plus a running total."""

    __slots__ = ("queue", "total")

    def __init__(self) -> None:
        self.queue: deque[list[int]] = deque()
        self.total = 0


class ReplayError(ValueError):
    """An order in a replayed sequence failed validation."""

    def __init__(self, index: int, violations: tuple[str, ...]):
        super().__init__(f"order {index} invalid: {'; '.join(violations)}")
        self.index = index
        self.violations = violations


class OrderBook:
    """Two-sided price-level store. Single-writer; snapshots are immutable copies."""

    def __init__(self, cfg: StreamConfig):
        self.cfg = cfg
        self._bids: SortedDict[int, _Level] = SortedDict()
        self._asks: SortedDict[int, _Level] = SortedDict()
        self._next_seq = 0
        self.bid_total = 0  # resting quantity across all bid levels
        self.ask_total = 0

    # -- queries ----------------------------------------------------------

    def best_bid(self) -> Quote:
        if not self._bids:
            return self.cfg.absent_bid()
        price, level = self._bids.peekitem(-1)
        return Quote(price, level.total)

    def best_ask(self) -> Quote:
        if not self._asks:
            return self.cfg.absent_ask()
        price, level = self._asks.peekitem(0)
        return Quote(price, level.total)

    def snapshot_top(self, levels: int = 10) -> BookSnapshot:
        if levels < 1:
            raise ValueError("levels must be >= 1")
        bids = tuple(
            (p, self._bids[p].total) for p in self._bids.islice(reverse=True)
        )[:levels]
        asks = tuple((p, self._asks[p].total) for p in self._asks.islice())[:levels]
        return BookSnapshot(bid_levels=bids, ask_levels=asks)

    def bid_levels(self):
        """(price, level_total) pairs, best (highest) first."""
        for p in self._bids.islice(reverse=True):
            yield p, self._bids[p].total

    def ask_levels(self):
        """(price, level_total) pairs, best (lowest) first."""
        for p in self._asks.islice():
            yield p, self._asks[p].total

    def _top_queues(self, bid_side: bool, n: int):
        """Live entry queues of the n best levels on one side (for the relevance filter)."""
        book = self._bids if bid_side else self._asks
        count = 0
        for p in book.islice(reverse=bid_side):
            yield book[p].queue
            count += 1
            if count >= n:
                return

    # -- mutation ---------------------------------------------------------

    def apply(self, order: LimitOrder) -> ApplyResult:
        """Process one order; returns fills and a no-op flag for dead cancels."""
        if order.otype in (OrderType.BUY, OrderType.SELL):
            fills, consumed = self._match(order, order.otype)
            return ApplyResult(fills, consumed=consumed)
        consumed = self._cancel(order)
        return ApplyResult((), cancel_noop=not consumed, consumed=consumed)

    def _match(self, order: LimitOrder, side: OrderType):
        remaining = order.quantity
        fills: list[Transaction] = []
        consumed: list[tuple[int, int]] = []
        if side == OrderType.BUY:
            book, own, limit_ok = self._asks, self._bids, lambda p: p <= order.price_ticks
            best_index = 0
        else:
            book, own, limit_ok = self._bids, self._asks, lambda p: p >= order.price_ticks
            best_index = -1

        while remaining > 0 and book:
            price, level = book.peekitem(best_index)
            if not limit_ok(price):
                break
            queue = level.queue
            while remaining > 0 and queue:
                entry = queue[0]
                take = entry[1] if entry[1] <= remaining else remaining
                fills.append(Transaction(price, take, side))
                consumed.append((entry[0], take))
                entry[1] -= take
                level.total -= take
                remaining -= take
                if entry[1] == 0:
                    queue.popleft()
            if not queue:
                del book[price]

        filled = order.quantity - remaining
        if side == OrderType.BUY:
            self.ask_total -= filled
        else:
            self.bid_total -= filled

        if remaining > 0:
            level = own.get(order.price_ticks)
            if level is None:
                level = _Level()
                own[order.price_ticks] = level
            level.queue.append([self._next_seq, remaining])
            level.total += remaining
            if side == OrderType.BUY:
                self.bid_total += remaining
            else:
                self.ask_total += remaining
        self._next_seq += 1
        return tuple(fills), tuple(consumed)

    def _cancel(self, order: LimitOrder) -> tuple[tuple[int, int], ...]:
        """Remove up to order.quantity at the named level, oldest first.

        Returns the (entry_seq, qty) pairs actually removed (empty for a dead level).
        """
        book = self._bids if order.otype == OrderType.CANCEL_BUY else self._asks
        level = book.get(order.price_ticks)
        self._next_seq += 1
        if level is None:
            return ()
        to_remove = order.quantity
        removed: list[tuple[int, int]] = []
        total_removed = 0
        queue = level.queue
        while to_remove > 0 and queue:
            entry = queue[0]
            take = entry[1] if entry[1] <= to_remove else to_remove
            entry[1] -= take
            level.total -= take
            to_remove -= take
            removed.append((entry[0], take))
            total_removed += take
            if entry[1] == 0:
                queue.popleft()
        if not queue:
            del book[order.price_ticks]
        if order.otype == OrderType.CANCEL_BUY:
            self.bid_total -= total_removed
        else:
            self.ask_total -= total_removed
        return tuple(removed)


def replay(orders, cfg: StreamConfig) -> Stream:
    """Apply a whole order sequence and emit the observation stream.

    Each observation carries the post-apply best quotes and the time bucket
    of the order's absolute arrival time. Pure: identical input gives an
    identical Stream. Raises ReplayError at the first invalid order.
    """
    book = OrderBook(cfg)
    observations = []
    elapsed = cfg.day_start_ms
    for i, order in enumerate(orders):
        result = validate_order(order, cfg)
        if not result.ok:
            raise ReplayError(i, result.violations)
        elapsed += order.interarrival_ms
        if elapsed > cfg.day_end_ms:
            raise ReplayError(i, ("cumulative arrival time exceeds day_end_ms",))
        book.apply(order)
        observations.append(
            MarketObservation(
                order=order,
                best_bid=book.best_bid(),
                best_ask=book.best_ask(),
                bucket=bucket_of(elapsed, cfg),
            )
        )
    return Stream(cfg, tuple(observations))
