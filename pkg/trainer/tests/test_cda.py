import numpy as np
import torch

from gan_trainer import data
from gan_trainer.cda_net import CdaNet, load_cda, pretrain_cda, save_cda
from gan_trainer.config import CdaConfig


def constant_label_pairs(n=512):
    """Toy dataset whose label never moves: quotes always (0.1, -0.4, 0.3, -0.4)."""
    rng = np.random.default_rng(0)
    inputs = np.zeros((n, 12), dtype=np.float32)
    inputs[:, 0] = rng.uniform(-1, 1, n)
    inputs[np.arange(n), 1 + rng.integers(0, 4, n)] = 1.0
    inputs[:, 5] = rng.uniform(-1, 1, n)
    inputs[:, 6] = rng.uniform(-1, 1, n)
    label = np.array([0.1, -0.4, 0.3, -0.4], dtype=np.float32)
    inputs[:, 7:11] = label  # prev equals next: residual target is zero
    labels = np.tile(label, (n, 1))
    bounds = data.Bounds(
        price_lo=0, price_hi=100, dt_hi=1000, qty_hi=10,
        price_min=0, price_max=100, qty_max=10,
        day_start_ms=0, day_end_ms=1000, symbol="T", tick_size=0.01,
    )
    label_ints = data.denorm_quotes(labels, bounds)
    return (
        data.PairData(
            inputs=inputs,
            labels=labels,
            prev_quotes=inputs[:, 7:11].copy(),
            label_ints=label_ints,
            recoverable=np.ones(n, dtype=bool),
        ),
        bounds,
    )


class TestPretrain:
    def test_constant_labels_drive_mse_to_zero(self):
        pairs, bounds = constant_label_pairs()
        _net, report = pretrain_cda(pairs, bounds, CdaConfig(epochs=12, batch_size=64, seed=1))
        assert report.mse < 1e-4
        assert report.exact_accuracy == 1.0

    def test_output_shape_is_two_quotes(self):
        net = CdaNet(32)
        out = net(torch.zeros(9, 12))
        assert out.shape == (9, 4)

    def test_recoverable_accuracy_at_least_nonrecoverable(self, small_pairs, small_stream):
        bounds = data.read_sidecar(small_stream)
        pairs = data.load_pairs(small_pairs, bounds)
        _net, report = pretrain_cda(pairs, bounds, CdaConfig(epochs=6, seed=0))
        assert report.recoverable_accuracy >= report.nonrecoverable_accuracy

    def test_empty_dataset_rejected(self):
        pairs, bounds = constant_label_pairs(1)
        empty = data.PairData(
            inputs=pairs.inputs[:0], labels=pairs.labels[:0],
            prev_quotes=pairs.prev_quotes[:0], label_ints=pairs.label_ints[:0],
            recoverable=pairs.recoverable[:0],
        )
        import pytest

        with pytest.raises(ValueError):
            pretrain_cda(empty, bounds)


class TestPersistence:
    def test_save_load_identical_outputs(self, tmp_path):
        pairs, bounds = constant_label_pairs(128)
        net, _report = pretrain_cda(pairs, bounds, CdaConfig(epochs=2, batch_size=64))
        path = tmp_path / "cda.pt"
        save_cda(net, path)
        loaded = load_cda(path)
        x = torch.from_numpy(pairs.inputs[:16])
        assert torch.equal(net(x), loaded(x))

    def test_loaded_weights_frozen(self, tmp_path):
        pairs, bounds = constant_label_pairs(64)
        net, _ = pretrain_cda(pairs, bounds, CdaConfig(epochs=1, batch_size=64))
        path = tmp_path / "cda.pt"
        save_cda(net, path)
        loaded = load_cda(path)
        assert all(not p.requires_grad for p in loaded.parameters())
