"""Finite-memory baseline generator: a smoothed higher-order Markov model
over coarsened order symbols, with exact engine quotes at generation time.

Coarsening maps an observation to (order type, price-offset bucket relative
to the same-side best quote, log2 quantity bucket, order-of-magnitude
inter-arrival bucket). Conditional distributions are count tables per time
bucket with count-proportional back-off interpolation down to a
Laplace-smoothed unigram.
"""
from __future__ import annotations

import json
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matching_engine import OrderBook
from .order_model import (
    LimitOrder,
    MarketObservation,
    OrderType,
    Quote,
    Stream,
    StreamConfig,
    bucket_of,
)

REL_SPAN = 4  # price offsets clamp to [-REL_SPAN, +REL_SPAN]
N_REL = 2 * REL_SPAN + 1
N_QTY = 11
N_DT = 6
ALPHABET = 4 * N_REL * N_QTY * N_DT  # 2376

# deterministic de-coarsening representatives
_REL_REPS = list(range(-REL_SPAN, REL_SPAN + 1))
_QTY_REPS = [1] + [round(1.5 * 2**b) for b in range(1, N_QTY)]
_DT_REPS = [4] + [round(10**b * 3.162) for b in range(1, N_DT)]


@dataclass(frozen=True)
class CoarseSymbol:
    otype: OrderType
    rel_price_bucket: int  # -4 means "<= -4", +4 means ">= +4"
    qty_bucket: int
    dt_bucket: int

    @property
    def id(self) -> int:
        r = self.rel_price_bucket + REL_SPAN
        return ((int(self.otype) * N_REL + r) * N_QTY + self.qty_bucket) * N_DT + self.dt_bucket

    @classmethod
    def from_id(cls, sym: int) -> "CoarseSymbol":
        sym, d = divmod(sym, N_DT)
        sym, q = divmod(sym, N_QTY)
        t, r = divmod(sym, N_REL)
        return cls(OrderType(t), r - REL_SPAN, q, d)


def _dt_bucket(ms: int) -> int:
    # order-of-magnitude (digit count) bucket: 0..9 -> 0, 10..99 -> 1, ...
    if ms <= 0:
        return 0
    return min(len(str(ms)) - 1, N_DT - 1)


def _qty_bucket(qty: int) -> int:
    return min(qty.bit_length() - 1, N_QTY - 1)


def _rel_bucket(price: int, reference: int) -> int:
    rel = price - reference
    if rel < -REL_SPAN:
        return -REL_SPAN
    if rel > REL_SPAN:
        return REL_SPAN
    return rel


def coarsen(obs: MarketObservation, prev_bid: Quote, prev_ask: Quote) -> CoarseSymbol:
    """Deterministic bucketing of one observation.

    The price offset is taken against the best same-side quote current when
    the order arrives (the book state it acts on), so fitting and generation
    see the same convention.
    """
    o = obs.order
    ref = prev_bid if o.otype.is_bid_side else prev_ask
    return CoarseSymbol(
        otype=o.otype,
        rel_price_bucket=_rel_bucket(o.price_ticks, ref.price_ticks),
        qty_bucket=_qty_bucket(o.quantity),
        dt_bucket=_dt_bucket(o.interarrival_ms),
    )


def _symbol_id(order: LimitOrder, prev_bid: Quote, prev_ask: Quote) -> int:
    ref = prev_bid if order.otype.is_bid_side else prev_ask
    r = _rel_bucket(order.price_ticks, ref.price_ticks) + REL_SPAN
    return ((int(order.otype) * N_REL + r) * N_QTY + _qty_bucket(order.quantity)) * N_DT + _dt_bucket(
        order.interarrival_ms
    )


def coarse_symbol_ids(stream: Stream) -> list[int]:
    """Symbol id per observation, referenced to each order's pre-apply quotes."""
    cfg = stream.config
    prev_bid, prev_ask = cfg.absent_bid(), cfg.absent_ask()
    out = []
    for obs in stream.observations:
        out.append(_symbol_id(obs.order, prev_bid, prev_ask))
        prev_bid, prev_ask = obs.best_bid, obs.best_ask
    return out


def coarsen_stream(stream: Stream) -> list[CoarseSymbol]:
    """coarsen() over a whole stream, tracking the pre-apply quotes."""
    return [CoarseSymbol.from_id(s) for s in coarse_symbol_ids(stream)]


POOLED = 24  # pseudo-bucket index for tables pooled over all time buckets


def _ctx_key(bucket: int, order: int, ctx, k_eff: int) -> int:
    acc = bucket * (k_eff + 1) + order
    for s in ctx:
        acc = acc * ALPHABET + s
    return acc


class MarkovModel:
    """Per-time-bucket conditional count tables with back-off interpolation.

    The back-off ladder at each context order first consults the bucket's own
    table, then the bucket-pooled table (the per-bucket slices of a day are
    sparse), stepping down one order when both are thin; interpolation
    weights grow with context counts and shrink with alpha, so the
    large-alpha limit of every conditional is uniform. The base of the
    ladder is the pooled unigram under Laplace-alpha smoothing.
    """

    def __init__(self, k_eff: int, alpha: float, gamma: float, tables: dict):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.k_eff = k_eff
        self.alpha = alpha
        self.gamma = gamma
        self.tables = tables

    def _ladder(self, ctx, bucket: int):
        """(table, weight_scale) pairs from most to least specific level."""
        ctx = tuple(ctx)[-self.k_eff :] if self.k_eff else ()
        out = []
        for j in range(len(ctx), 0, -1):
            suffix = ctx[len(ctx) - j :]
            for b in (bucket, POOLED):
                tbl = self.tables.get(_ctx_key(b, j, suffix, self.k_eff))
                if tbl is not None:
                    out.append(tbl)
        tbl = self.tables.get(_ctx_key(bucket, 0, (), self.k_eff))
        if tbl is not None:
            out.append(tbl)
        return out

    def _base(self):
        """Pooled unigram (always present after fit)."""
        return self.tables.get(_ctx_key(POOLED, 0, (), self.k_eff))

    # -- probability ------------------------------------------------------

    def probability(self, sym: int, ctx, bucket: int) -> float:
        """Interpolated P(sym | last-k_eff context, time bucket)."""
        base = self._base()
        if base is None:
            p = 1.0 / ALPHABET
        else:
            syms, cum, total = base
            p = (_count_of(syms, cum, sym) + self.alpha) / (total + self.alpha * ALPHABET)
        for syms, cum, total in reversed(self._ladder(ctx, bucket)):
            lam = total / (total + self.gamma + self.alpha)
            p = lam * (_count_of(syms, cum, sym) / total) + (1.0 - lam) * p
        return p

    def distribution(self, ctx, bucket: int) -> np.ndarray:
        """Full conditional vector over the alphabet (test-facing; sums to 1)."""
        vec = np.full(ALPHABET, self.alpha)
        total = 0.0
        base = self._base()
        if base is not None:
            syms, cum, tot = base
            vec[np.array(syms)] += np.diff(np.concatenate([[0], cum]))
            total = tot
        vec /= total + self.alpha * ALPHABET
        for syms, cum, tot in reversed(self._ladder(ctx, bucket)):
            lam = tot / (tot + self.gamma + self.alpha)
            ml = np.zeros(ALPHABET)
            ml[np.array(syms)] = np.diff(np.concatenate([[0], cum])) / tot
            vec = lam * ml + (1.0 - lam) * vec
        return vec

    # -- sampling ---------------------------------------------------------

    def sample(self, ctx, bucket: int, rng: np.random.Generator) -> int:
        """Draw one symbol; descends the back-off ladder, so it matches
        probability() without materializing the full distribution."""
        for syms, cum, total in self._ladder(ctx, bucket):
            if rng.random() < total / (total + self.gamma + self.alpha):
                return _weighted_pick(syms, cum, total, rng)
        base = self._base()
        if base is not None:
            syms, cum, total = base
            if rng.random() < total / (total + self.alpha * ALPHABET):
                return _weighted_pick(syms, cum, total, rng)
        return int(rng.integers(ALPHABET))

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "k_eff": self.k_eff,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "alphabet": ALPHABET,
            "tables": {
                str(key): [list(syms), list(cum)] for key, (syms, cum, _t) in self.tables.items()
            },
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MarkovModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload["alphabet"] != ALPHABET:
            raise ValueError("model alphabet does not match this build")
        tables = {}
        for key, (syms, cum) in payload["tables"].items():
            tables[int(key)] = (tuple(syms), tuple(cum), cum[-1] if cum else 0)
        return cls(payload["k_eff"], payload["alpha"], payload["gamma"], tables)


def _count_of(syms, cum, sym) -> int:
    i = bisect_right(syms, sym) - 1
    if i < 0 or syms[i] != sym:
        return 0
    return cum[i] - (cum[i - 1] if i > 0 else 0)


def _weighted_pick(syms, cum, total, rng) -> int:
    u = rng.random() * total
    return syms[bisect_right(cum, u)]


def fit(stream: Stream, k_eff: int = 3, alpha: float = 0.01, gamma: float = 5.0) -> MarkovModel:
    """Estimate count tables from every order-(0..k_eff) context in the stream."""
    if len(stream) == 0:
        raise ValueError("empty stream")
    if k_eff < 0:
        raise ValueError("k_eff must be >= 0")
    symbols = coarse_symbol_ids(stream)
    buckets = [o.bucket for o in stream.observations]

    raw: dict[int, dict[int, int]] = {}
    n = len(symbols)
    for i in range(n):
        nxt = symbols[i]
        for j in range(min(k_eff, i) + 1):
            ctx = symbols[i - j : i]
            for b in (buckets[i], POOLED):
                key = _ctx_key(b, j, ctx, k_eff)
                inner = raw.get(key)
                if inner is None:
                    inner = {}
                    raw[key] = inner
                inner[nxt] = inner.get(nxt, 0) + 1

    tables = {}
    for key, inner in raw.items():
        syms = tuple(sorted(inner))
        cum = []
        acc = 0
        for s in syms:
            acc += inner[s]
            cum.append(acc)
        tables[key] = (syms, tuple(cum), acc)
    return MarkovModel(k_eff, alpha, gamma, tables)


def _reference_price(book: OrderBook, bid_side: bool, cfg: StreamConfig) -> int:
    """Live same-side best; falls back to the opposite best, then the
    normalization mid-range when the book is still empty."""
    own = book.best_bid() if bid_side else book.best_ask()
    if own.present:
        return own.price_ticks
    opp = book.best_ask() if bid_side else book.best_bid()
    if opp.present:
        return opp.price_ticks - 1 if bid_side else opp.price_ticks + 1
    norm = cfg.normalization
    return (norm.price_lo + norm.price_hi) // 2


def generate(
    model: MarkovModel,
    seed_history,
    n: int,
    cfg: StreamConfig,
    rng: np.random.Generator,
) -> Stream:
    """Autoregressively sample n observations, running every de-coarsened
    order through the exact engine for true quotes.

    The seed history is replayed into the generation book first, so the
    continuation starts from the state those observations built (pass the
    training stream's tail, or all of it, for a warm book). The generated
    timeline restarts at day start. De-coarsening uses deterministic bucket
    representatives; the open-ended price buckets use their boundary
    offsets. Inter-arrival gaps clamp at day end so the stream invariants
    always hold.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    ctx: deque[int] = deque(maxlen=model.k_eff if model.k_eff else 1)
    book = OrderBook(cfg)
    for obs in seed_history:
        ctx.append(_symbol_id(obs.order, book.best_bid(), book.best_ask()))
        book.apply(obs.order)

    elapsed = cfg.day_start_ms
    observations = []
    for _ in range(n):
        sym = model.sample(tuple(ctx) if model.k_eff else (), bucket_of(elapsed, cfg), rng)
        cs = CoarseSymbol.from_id(sym)
        dt = min(_DT_REPS[cs.dt_bucket], cfg.day_end_ms - elapsed)
        qty = min(_QTY_REPS[cs.qty_bucket], cfg.qty_max)
        ref = _reference_price(book, cs.otype.is_bid_side, cfg)
        price = ref + _REL_REPS[cs.rel_price_bucket + REL_SPAN]
        price = max(cfg.price_min, min(cfg.price_max, price))
        order = LimitOrder(dt, cs.otype, price, qty)
        pre_bid, pre_ask = book.best_bid(), book.best_ask()
        elapsed += dt
        book.apply(order)
        obs = MarketObservation(
            order=order,
            best_bid=book.best_bid(),
            best_ask=book.best_ask(),
            bucket=bucket_of(elapsed, cfg),
        )
        observations.append(obs)
        ctx.append(_symbol_id(order, pre_bid, pre_ask))
    return Stream(cfg, tuple(observations))
