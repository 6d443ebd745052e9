"""Agent-based synthetic market: background traders around a mean-reverting
fundamental, unit-quantity limit orders, exact matching.

Arrivals follow a homogeneous Poisson process. Each arrival flips a fair
coin for side, then either submits a one-unit limit order priced at the
current fundamental plus Gaussian noise, or (with the configured
probability) cancels one uniformly chosen resting unit on its own side,
falling back to a submit when that side is empty. Every run is a pure
function of its config, seed included.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .matching_engine import OrderBook
from .order_model import (
    LimitOrder,
    MarketObservation,
    Normalization,
    OrderType,
    Stream,
    StreamConfig,
    bucket_of,
)


@dataclass(frozen=True)
class FundamentalConfig:
    mean_reversion_rate: float = 0.05
    shock_std: float = 1.0
    initial: float = 10_000.0
    mean: float | None = None  # defaults to initial

    def resolved_mean(self) -> float:
        return self.initial if self.mean is None else self.mean


@dataclass(frozen=True)
class AgentConfig:
    arrival_rate: float | None = None  # per second; default n_orders_target / horizon_s
    surplus_offset_mean: float = 2.0  # buyers shade below the fundamental, sellers above
    surplus_offset_std: float = 3.0
    buy_probability: float = 0.5
    cancel_probability: float = 0.25


@dataclass(frozen=True)
class SimConfig:
    horizon_s: float = 1000.0
    n_orders_target: int = 300_000
    fundamental: FundamentalConfig = FundamentalConfig()
    agent: AgentConfig = AgentConfig()
    seed: int = 0
    symbol: str = "SYN"
    tick_size: float = 0.01
    price_min: int = 9_500
    price_max: int = 10_500
    qty_max: int = 1_000

    def __post_init__(self) -> None:
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be positive")
        if self.n_orders_target < 1:
            raise ValueError("n_orders_target must be >= 1")
        if not 0.0 <= self.fundamental.mean_reversion_rate <= 1.0:
            raise ValueError("mean_reversion_rate must be in [0, 1]")
        if self.fundamental.shock_std < 0:
            raise ValueError("shock_std must be >= 0")
        if self.agent.surplus_offset_std <= 0:
            raise ValueError("surplus_offset_std must be positive")
        if not 0.0 <= self.agent.buy_probability <= 1.0:
            raise ValueError("buy_probability must be in [0, 1]")
        if not 0.0 <= self.agent.cancel_probability < 1.0:
            raise ValueError("cancel_probability must be in [0, 1)")

    @property
    def rate(self) -> float:
        r = self.agent.arrival_rate
        return self.n_orders_target / self.horizon_s if r is None else r


def sim_config_from_dict(d: dict) -> SimConfig:
    fund = FundamentalConfig(**d.get("fundamental", {}))
    agent = AgentConfig(**d.get("agent", {}))
    top = {k: v for k, v in d.items() if k not in ("fundamental", "agent")}
    return SimConfig(fundamental=fund, agent=agent, **top)


def _arrival_times_ms(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """Poisson arrival times in integer milliseconds, strictly within the horizon."""
    horizon = cfg.horizon_s
    expected = cfg.rate * horizon
    block = int(expected + 6.0 * np.sqrt(expected)) + 16
    gaps = rng.exponential(1.0 / cfg.rate, size=block)
    t = np.cumsum(gaps)
    while t[-1] <= horizon:
        more = rng.exponential(1.0 / cfg.rate, size=block)
        t = np.concatenate([t, t[-1] + np.cumsum(more)])
    t = t[t <= horizon]
    return np.round(t * 1000.0).astype(np.int64)


def _fundamental_values(cfg: SimConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Discrete mean-reverting recursion, one step per arrival."""
    kappa = cfg.fundamental.mean_reversion_rate
    mean = cfg.fundamental.resolved_mean()
    shocks = rng.normal(0.0, cfg.fundamental.shock_std, size=n)
    values = np.empty(n)
    f = cfg.fundamental.initial
    for i in range(n):
        f = f + kappa * (mean - f) + shocks[i]
        values[i] = f
    return values


def fundamental_path(cfg: SimConfig) -> np.ndarray:
    """Fundamental value at each Poisson arrival time (same draws as simulate)."""
    rng = np.random.default_rng(cfg.seed)
    times = _arrival_times_ms(cfg, rng)
    return _fundamental_values(cfg, len(times), rng)


def _uniform_resting_price(book: OrderBook, bid_side: bool, u: float) -> int:
    """Price of the u-th resting unit (u in [0,1)), walking levels best-first."""
    total = book.bid_total if bid_side else book.ask_total
    target = int(u * total)
    acc = 0
    levels = book.bid_levels() if bid_side else book.ask_levels()
    price = None
    for price, qty in levels:
        acc += qty
        if acc > target:
            return price
    return price  # numerical guard; unreachable when total > 0


def stream_config_for(cfg: SimConfig) -> StreamConfig:
    return StreamConfig(
        symbol=cfg.symbol,
        tick_size=cfg.tick_size,
        price_min=cfg.price_min,
        price_max=cfg.price_max,
        qty_max=cfg.qty_max,
        day_start_ms=0,
        day_end_ms=int(cfg.horizon_s * 1000),
        normalization=Normalization(price_lo=cfg.price_min, price_hi=cfg.price_max),
    )


def simulate(cfg: SimConfig) -> Stream:
    """Run the market and return its observation stream.

    Output equals matching_engine.replay of the emitted orders, with the
    normalization bounds set from observed ranges so the observed price
    range maps onto [-1, 1].
    """
    rng = np.random.default_rng(cfg.seed)
    times = _arrival_times_ms(cfg, rng)
    n = len(times)
    fundamentals = _fundamental_values(cfg, n, rng)
    buy_draws = rng.random(n)
    cancel_draws = rng.random(n)
    offsets = rng.normal(0.0, cfg.agent.surplus_offset_std, size=n)
    unit_draws = rng.random(n)

    scfg = stream_config_for(cfg)
    book = OrderBook(scfg)
    observations = []
    prev_t = 0
    max_quote_qty = 0
    p_cancel = cfg.agent.cancel_probability
    shade_mean = cfg.agent.surplus_offset_mean
    p_min, p_max = cfg.price_min, cfg.price_max

    for i in range(n):
        t = int(times[i])
        delta = t - prev_t
        prev_t = t
        is_buy = buy_draws[i] < cfg.agent.buy_probability
        resting = book.bid_total if is_buy else book.ask_total
        if cancel_draws[i] < p_cancel and resting > 0:
            price = _uniform_resting_price(book, is_buy, unit_draws[i])
            otype = OrderType.CANCEL_BUY if is_buy else OrderType.CANCEL_SELL
        else:
            shade = -shade_mean if is_buy else shade_mean
            price = round(fundamentals[i] + shade + offsets[i])
            price = p_min if price < p_min else (p_max if price > p_max else price)
            otype = OrderType.BUY if is_buy else OrderType.SELL
        order = LimitOrder(delta, otype, price, 1)
        book.apply(order)
        bid, ask = book.best_bid(), book.best_ask()
        if bid.quantity > max_quote_qty:
            max_quote_qty = bid.quantity
        if ask.quantity > max_quote_qty:
            max_quote_qty = ask.quantity
        observations.append(
            MarketObservation(order=order, best_bid=bid, best_ask=ask, bucket=bucket_of(t, scfg))
        )

    if not observations:
        return Stream(scfg, ())
    prices = [o.order.price_ticks for o in observations]
    deltas = [o.order.interarrival_ms for o in observations]
    lo, hi = min(prices), max(prices)
    final_cfg = replace(
        scfg,
        normalization=Normalization(
            price_lo=lo,
            price_hi=hi if hi > lo else lo + 1,
            dt_hi_ms=max(max(deltas), 1),
            qty_hi=max(max_quote_qty, 1),
        ),
    )
    return Stream(final_cfg, tuple(observations))
