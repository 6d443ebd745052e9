import numpy as np
import pytest

from gan_trainer import data


class TestStreamLoading:
    def test_feature_matrix_shape_and_range(self, small_stream):
        feats, buckets, bounds = data.load_stream(small_stream)
        assert feats.shape[1] == data.FEATURE_DIM
        assert feats.min() >= -1.0 and feats.max() <= 1.0
        assert buckets.min() >= 0 and buckets.max() < data.N_BUCKETS

    def test_onehot_matches_type_codes(self, small_stream):
        rows = data.read_stream_rows(small_stream)
        feats, _b, _bounds = data.load_stream(small_stream)
        onehot = feats[:, 1:5]
        assert np.array_equal(np.argmax(onehot, axis=1), rows[:, 2])
        assert np.allclose(onehot.sum(axis=1), 1.0)

    def test_price_endpoints_hit_unit_bounds(self, small_stream):
        rows = data.read_stream_rows(small_stream)
        feats, _b, bounds = data.load_stream(small_stream)
        lo_idx = int(np.argmin(rows[:, 3]))
        hi_idx = int(np.argmax(rows[:, 3]))
        assert feats[lo_idx, 5] == -1.0
        assert feats[hi_idx, 5] == 1.0

    def test_bad_header_rejected(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("not,a,stream\n")
        with pytest.raises(ValueError):
            data.read_stream_rows(p)


class TestPairLoading:
    def test_pair_shapes(self, small_pairs, small_stream):
        bounds = data.read_sidecar(small_stream)
        pairs = data.load_pairs(small_pairs, bounds)
        n = len(pairs.inputs)
        assert pairs.inputs.shape == (n, 12)
        assert pairs.labels.shape == (n, 4)
        assert pairs.label_ints.shape == (n, 4)
        assert pairs.recoverable.dtype == bool

    def test_labels_round_trip_to_int_grid(self, small_pairs, small_stream):
        bounds = data.read_sidecar(small_stream)
        pairs = data.load_pairs(small_pairs, bounds)
        back = data.denorm_quotes(pairs.labels, bounds)
        assert np.array_equal(back, pairs.label_ints)


class TestSpacedSampling:
    def test_gaps_exceed_minimum(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            starts = data.spaced_window_starts(2_000, 20, 64, 21, rng)
            diffs = np.diff(np.sort(starts))
            assert (diffs > 21).all()

    def test_infeasible_raises_with_max(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError, match="max feasible"):
            data.spaced_window_starts(500, 20, 64, 21, rng)

    def test_history_batch_alignment(self, small_stream):
        feats, buckets, _bounds = data.load_stream(small_stream)
        rng = np.random.default_rng(1)
        h, x, b = data.history_batch(feats, buckets, 20, 8, 21, rng)
        assert h.shape == (8, 20, data.FEATURE_DIM)
        assert x.shape == (8, data.FEATURE_DIM)
        assert b.shape == (8,)
