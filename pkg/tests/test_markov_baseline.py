import numpy as np
import pytest
from hypothesis import given, strategies as st

from orderlab.markov_baseline import (
    ALPHABET,
    CoarseSymbol,
    MarkovModel,
    coarse_symbol_ids,
    coarsen,
    coarsen_stream,
    fit,
    generate,
)
from orderlab.matching_engine import replay
from orderlab.order_model import (
    LimitOrder,
    MarketObservation,
    OrderType,
    Quote,
    validate_observation,
)


def obs_with(cfg, price, qty=1, delta=1, otype=OrderType.BUY, bid=(1000, 5), ask=(1005, 5)):
    return MarketObservation(
        order=LimitOrder(delta, otype, price, qty),
        best_bid=Quote(*bid),
        best_ask=Quote(*ask),
        bucket=0,
    )


class TestCoarsen:
    def test_buy_at_best_bid_is_rel_zero(self, small_cfg):
        obs = obs_with(small_cfg, price=1000)
        sym = coarsen(obs, Quote(1000, 5), Quote(1005, 5))
        assert sym.rel_price_bucket == 0

    def test_qty_bucket_log2_endpoints(self, small_cfg):
        s1 = coarsen(obs_with(small_cfg, 1000, qty=1), Quote(1000, 5), Quote(1005, 5))
        s1024 = coarsen(obs_with(small_cfg, 1000, qty=1024), Quote(1000, 5), Quote(1005, 5))
        assert s1.qty_bucket == 0 and s1024.qty_bucket == 10

    def test_dt_bucket_magnitude_boundaries(self, small_cfg):
        ref = (Quote(1000, 5), Quote(1005, 5))
        def dt_of(ms):
            return coarsen(obs_with(small_cfg, 1000, delta=ms), *ref).dt_bucket
        assert dt_of(999) == 2
        assert dt_of(1000) == 3
        assert dt_of(0) == 0
        assert dt_of(9) == 0
        assert dt_of(10) == 1
        assert dt_of(10_000_000) == 5  # clamp

    def test_rel_bucket_clamps(self, small_cfg):
        deep = coarsen(obs_with(small_cfg, 900), Quote(1000, 5), Quote(1005, 5))
        high = coarsen(obs_with(small_cfg, 1100), Quote(1000, 5), Quote(1005, 5))
        assert deep.rel_price_bucket == -4 and high.rel_price_bucket == 4

    def test_sell_references_ask_side(self, small_cfg):
        obs = obs_with(small_cfg, price=1005, otype=OrderType.SELL)
        sym = coarsen(obs, Quote(1000, 5), Quote(1005, 5))
        assert sym.rel_price_bucket == 0

    def test_alphabet_size(self):
        assert ALPHABET == 4 * 9 * 11 * 6

    @given(
        st.integers(0, 3),
        st.integers(-4, 4),
        st.integers(0, 10),
        st.integers(0, 5),
    )
    def test_id_round_trip(self, t, r, q, d):
        sym = CoarseSymbol(OrderType(t), r, q, d)
        assert CoarseSymbol.from_id(sym.id) == sym
        assert 0 <= sym.id < ALPHABET


def cycle_stream(small_cfg, cycles=200):
    """Deterministic three-symbol cycle resting deep below a stable best bid."""
    orders = [
        LimitOrder(1, OrderType.BUY, 1000, 50),
        LimitOrder(1, OrderType.SELL, 1010, 50),
    ]
    for _ in range(cycles):
        orders.append(LimitOrder(4, OrderType.BUY, 996, 1))    # A: q0, dt0
        orders.append(LimitOrder(32, OrderType.BUY, 996, 3))   # B: q1, dt1
        orders.append(LimitOrder(316, OrderType.BUY, 996, 6))  # C: q2, dt2
    return replay(orders, small_cfg)


class TestFit:
    def test_repeating_sequence_learns_transition(self, small_cfg):
        stream = cycle_stream(small_cfg)
        model = fit(stream, k_eff=1, alpha=1e-9)
        syms = coarse_symbol_ids(stream)
        a, b = syms[2], syms[3]
        assert syms[5] == a  # the cycle really repeats
        assert model.probability(b, (a,), bucket=0) > 0.99

    def test_large_alpha_flattens_to_uniform(self, small_cfg):
        stream = cycle_stream(small_cfg, cycles=30)
        model = fit(stream, k_eff=1, alpha=1e9)
        dist = model.distribution((coarse_symbol_ids(stream)[2],), bucket=0)
        assert np.allclose(dist, 1.0 / ALPHABET, rtol=1e-3)

    def test_conditional_rows_sum_to_one(self, small_cfg):
        stream = cycle_stream(small_cfg, cycles=50)
        model = fit(stream, k_eff=3, alpha=0.5)
        syms = coarse_symbol_ids(stream)
        for ctx in [(), (syms[2],), tuple(syms[2:5]), (1, 2, 3)]:
            dist = model.distribution(ctx, bucket=0)
            assert abs(dist.sum() - 1.0) < 1e-12
            total = sum(model.probability(s, ctx, 0) for s in range(ALPHABET))
            assert abs(total - 1.0) < 1e-9

    def test_sample_matches_distribution(self, small_cfg):
        stream = cycle_stream(small_cfg, cycles=100)
        model = fit(stream, k_eff=2, alpha=0.1)
        syms = coarse_symbol_ids(stream)
        ctx = tuple(syms[2:4])
        rng = np.random.default_rng(0)
        draws = [model.sample(ctx, 0, rng) for _ in range(4000)]
        dist = model.distribution(ctx, 0)
        top = int(np.argmax(dist))
        freq = draws.count(top) / len(draws)
        assert abs(freq - dist[top]) < 0.05

    def test_empty_stream_rejected(self, small_cfg):
        with pytest.raises(ValueError):
            fit(replay([], small_cfg))


class TestGenerate:
    def test_zero_length_continuation(self, small_cfg):
        stream = cycle_stream(small_cfg, cycles=10)
        model = fit(stream, k_eff=1)
        out = generate(model, stream.observations, 0, small_cfg, np.random.default_rng(0))
        assert len(out) == 0

    def test_reproduces_deterministic_cycle(self, small_cfg):
        stream = cycle_stream(small_cfg, cycles=300)
        model = fit(stream, k_eff=1, alpha=1e-12, gamma=1e-12)
        out = generate(model, stream.observations, 30, small_cfg, np.random.default_rng(1))
        # the first re-coarsened symbol lacks the seed book's reference quote,
        # so alignment starts at the second
        got = [CoarseSymbol.from_id(s) for s in coarse_symbol_ids(out)]
        want_cycle = coarsen_stream(stream)[2:5]
        for i in range(2, len(got)):
            prev = got[i - 1]
            idx = next(j for j, w in enumerate(want_cycle) if w == prev)
            assert got[i] == want_cycle[(idx + 1) % 3]

    def test_output_passes_all_invariants(self, small_cfg, sim_stream_small):
        model = fit(sim_stream_small, k_eff=2)
        out = generate(
            model, sim_stream_small.observations, 2000,
            sim_stream_small.config, np.random.default_rng(2),
        )
        cfg = sim_stream_small.config
        for obs in out.observations:
            assert validate_observation(obs, cfg).ok
        buckets = [o.bucket for o in out.observations]
        assert all(a <= b for a, b in zip(buckets, buckets[1:]))
        assert out.arrival_times_ms()[-1] <= cfg.day_end_ms

    def test_seeded_determinism(self, small_cfg, sim_stream_small):
        model = fit(sim_stream_small, k_eff=2)
        a = generate(model, sim_stream_small.observations, 500,
                     sim_stream_small.config, np.random.default_rng(3))
        b = generate(model, sim_stream_small.observations, 500,
                     sim_stream_small.config, np.random.default_rng(3))
        assert a == b


class TestPersistence:
    def test_save_load_round_trip(self, sim_stream_small, tmp_path):
        model = fit(sim_stream_small, k_eff=2, alpha=0.05, gamma=3.0)
        path = tmp_path / "model.json"
        model.save(path)
        loaded = MarkovModel.load(path)
        assert loaded.k_eff == 2 and loaded.alpha == 0.05 and loaded.gamma == 3.0
        syms = coarse_symbol_ids(sim_stream_small)
        ctx = tuple(syms[10:12])
        for s in syms[:20]:
            assert model.probability(s, ctx, 0) == loaded.probability(s, ctx, 0)
        rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
        draws1 = [model.sample(ctx, 0, rng1) for _ in range(50)]
        draws2 = [loaded.sample(ctx, 0, rng2) for _ in range(50)]
        assert draws1 == draws2
