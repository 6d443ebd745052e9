"""Shared fixtures and independent reference implementations (oracles)."""
from __future__ import annotations

import random

import pytest

from orderlab.order_model import (
    LimitOrder,
    Normalization,
    OrderType,
    StreamConfig,
)
from orderlab.synthetic_simulator import SimConfig, simulate


@pytest.fixture
def small_cfg() -> StreamConfig:
    return StreamConfig(
        symbol="TST",
        tick_size=0.01,
        price_min=900,
        price_max=1100,
        qty_max=500,
        day_start_ms=0,
        day_end_ms=86_400_000,
        normalization=Normalization(price_lo=900, price_hi=1100),
    )


@pytest.fixture(scope="session")
def sim_stream_300k():
    """The full-size simulator run shared by the acceptance criteria."""
    return simulate(SimConfig(seed=42))


@pytest.fixture(scope="session")
def sim_stream_small():
    """A quick simulator run for integration-style module tests."""
    return simulate(SimConfig(horizon_s=30.0, n_orders_target=9_000, seed=7))


def random_orders(rng: random.Random, n: int, cfg: StreamConfig, n_prices: int = 10, max_qty: int = 5):
    """Random order sequence over a small price grid, all four types."""
    base = (cfg.price_min + cfg.price_max) // 2
    prices = [base + i for i in range(n_prices)]
    orders = []
    for _ in range(n):
        otype = OrderType(rng.randrange(4))
        orders.append(
            LimitOrder(
                interarrival_ms=rng.randrange(3),
                otype=otype,
                price_ticks=rng.choice(prices),
                quantity=rng.randint(1, max_qty),
            )
        )
    return orders


class NaiveBook:
    """Reference matcher that rescans the whole resting set for every fill.

    Deliberately structure-free: resting orders live in one flat list; price
    and time priority are found by scanning. Used as the ground-truth oracle
    for the engine's transaction stream.
    """

    def __init__(self):
        self.rest = []  # [side_is_bid, price, qty, seq]
        self._seq = 0

    def apply(self, order: LimitOrder):
        fills = []
        seq = self._seq
        self._seq += 1
        if order.otype in (OrderType.BUY, OrderType.SELL):
            is_buy = order.otype == OrderType.BUY
            remaining = order.quantity
            while remaining > 0:
                best = None
                for e in self.rest:
                    if e[0] == is_buy:
                        continue  # same side
                    if is_buy and e[1] > order.price_ticks:
                        continue
                    if not is_buy and e[1] < order.price_ticks:
                        continue
                    if best is None:
                        best = e
                    elif is_buy and (e[1] < best[1] or (e[1] == best[1] and e[3] < best[3])):
                        best = e
                    elif not is_buy and (e[1] > best[1] or (e[1] == best[1] and e[3] < best[3])):
                        best = e
                if best is None:
                    break
                take = min(remaining, best[2])
                fills.append((best[1], take, order.otype))
                best[2] -= take
                remaining -= take
                if best[2] == 0:
                    self.rest.remove(best)
            if remaining > 0:
                self.rest.append([is_buy, order.price_ticks, remaining, seq])
        else:
            is_buy = order.otype == OrderType.CANCEL_BUY
            to_remove = order.quantity
            matches = sorted(
                (e for e in self.rest if e[0] == is_buy and e[1] == order.price_ticks),
                key=lambda e: e[3],
            )
            for e in matches:
                if to_remove == 0:
                    break
                take = min(to_remove, e[2])
                e[2] -= take
                to_remove -= take
                if e[2] == 0:
                    self.rest.remove(e)
        return fills

    def best_bid(self):
        prices = [e[1] for e in self.rest if e[0]]
        return max(prices) if prices else None

    def best_ask(self):
        prices = [e[1] for e in self.rest if not e[0]]
        return min(prices) if prices else None

    def total_qty(self):
        return sum(e[2] for e in self.rest)
