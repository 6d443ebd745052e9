import pytest
from hypothesis import given, strategies as st

from orderlab.order_model import (
    N_BUCKETS,
    LimitOrder,
    MarketObservation,
    Normalization,
    OrderType,
    Quote,
    Stream,
    StreamConfig,
    bucket_of,
    validate_observation,
)


def make_obs(cfg, price=1000, qty=1, bid=(999, 5), ask=(1001, 5), bucket=0, delta=10):
    return MarketObservation(
        order=LimitOrder(delta, OrderType.BUY, price, qty),
        best_bid=Quote(*bid),
        best_ask=Quote(*ask),
        bucket=bucket,
    )


class TestOrderType:
    def test_four_variants_with_two_bit_codes(self):
        assert len(OrderType) == 4
        assert sorted(int(t) for t in OrderType) == [0, 1, 2, 3]
        for t in OrderType:
            assert OrderType.from_code(int(t)) is t

    def test_bad_code_rejected(self):
        with pytest.raises(ValueError):
            OrderType.from_code(4)

    def test_side_and_cancel_flags(self):
        assert OrderType.BUY.is_bid_side and OrderType.CANCEL_BUY.is_bid_side
        assert not OrderType.SELL.is_bid_side and not OrderType.CANCEL_SELL.is_bid_side
        assert OrderType.CANCEL_BUY.is_cancel and not OrderType.SELL.is_cancel


class TestValidateObservation:
    def test_valid_observation_ok(self, small_cfg):
        result = validate_observation(make_obs(small_cfg), small_cfg)
        assert result.ok and result.violations == ()

    def test_zero_quantity_flagged(self, small_cfg):
        result = validate_observation(make_obs(small_cfg, qty=0), small_cfg)
        assert not result.ok
        assert any("quantity < 1" in v for v in result.violations)

    def test_crossed_quotes_flagged(self, small_cfg):
        result = validate_observation(make_obs(small_cfg, bid=(1001, 5), ask=(1000, 5)), small_cfg)
        assert not result.ok
        assert any("crossed" in v for v in result.violations)

    def test_price_out_of_bounds_flagged(self, small_cfg):
        result = validate_observation(make_obs(small_cfg, price=2000), small_cfg)
        assert any("price outside" in v for v in result.violations)

    def test_zero_qty_quote_must_be_sentinel(self, small_cfg):
        result = validate_observation(make_obs(small_cfg, bid=(999, 0)), small_cfg)
        assert any("sentinel" in v for v in result.violations)
        ok = validate_observation(
            make_obs(small_cfg, bid=(small_cfg.price_min, 0)), small_cfg
        )
        assert ok.ok

    def test_bucket_out_of_range_flagged(self, small_cfg):
        result = validate_observation(make_obs(small_cfg, bucket=24), small_cfg)
        assert any("bucket" in v for v in result.violations)

    def test_violations_are_data_not_exceptions(self, small_cfg):
        obs = make_obs(small_cfg, qty=0, bid=(1001, 5), ask=(1000, 5))
        result = validate_observation(obs, small_cfg)
        assert len(result.violations) >= 2


class TestBucketOf:
    def test_day_start_is_bucket_zero(self, small_cfg):
        assert bucket_of(small_cfg.day_start_ms, small_cfg) == 0

    def test_day_end_clamps_to_last_bucket(self, small_cfg):
        assert bucket_of(small_cfg.day_end_ms, small_cfg) == N_BUCKETS - 1

    def test_midday_value(self, small_cfg):
        # 24 h day: 13.5 h in -> floor(24 * 13.5/24) = 13
        elapsed = small_cfg.day_start_ms + int(13.5 * 3_600_000)
        assert bucket_of(elapsed, small_cfg) == 13

    def test_out_of_day_raises(self, small_cfg):
        with pytest.raises(ValueError):
            bucket_of(small_cfg.day_start_ms - 1, small_cfg)
        with pytest.raises(ValueError):
            bucket_of(small_cfg.day_end_ms + 1, small_cfg)

    @given(st.integers(min_value=0, max_value=86_400_000))
    def test_monotone_in_elapsed(self, t):
        cfg = StreamConfig(
            symbol="T", tick_size=0.01, price_min=0, price_max=10, qty_max=10,
            day_start_ms=0, day_end_ms=86_400_000,
            normalization=Normalization(price_lo=0, price_hi=10),
        )
        b = bucket_of(t, cfg)
        assert 0 <= b < N_BUCKETS
        if t > 0:
            assert bucket_of(t - 1, cfg) <= b

    def test_surjective_over_full_day(self, small_cfg):
        step = small_cfg.day_span_ms // (4 * N_BUCKETS)
        seen = {bucket_of(t, small_cfg) for t in range(0, small_cfg.day_end_ms + 1, step)}
        assert seen == set(range(N_BUCKETS))


class TestStream:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            StreamConfig(
                symbol="T", tick_size=0.01, price_min=10, price_max=10, qty_max=1,
                day_start_ms=0, day_end_ms=1, normalization=Normalization(0, 1),
            )
        with pytest.raises(ValueError):
            StreamConfig(
                symbol="T", tick_size=0.01, price_min=0, price_max=10, qty_max=1,
                day_start_ms=5, day_end_ms=5, normalization=Normalization(0, 1),
            )

    def test_arrival_times_accumulate_deltas(self, small_cfg):
        obs = [make_obs(small_cfg, delta=d) for d in (5, 0, 10)]
        stream = Stream(small_cfg, tuple(obs))
        assert stream.arrival_times_ms() == [5, 5, 15]
        assert stream.n_total == 3

    def test_max_per_bucket(self, small_cfg):
        obs = [make_obs(small_cfg, bucket=b) for b in (0, 0, 1)]
        assert Stream(small_cfg, tuple(obs)).max_per_bucket() == 2

    def test_slice_preserves_config(self, small_cfg):
        stream = Stream(small_cfg, tuple(make_obs(small_cfg) for _ in range(5)))
        part = stream.slice(1, 3)
        assert len(part) == 2 and part.config is small_cfg
