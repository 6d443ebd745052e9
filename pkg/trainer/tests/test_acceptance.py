"""Secondary acceptance criteria, one test per criterion with a PASS line.

The fixtures come from the primary component's CLI; the primary is consumed
only through its documented file formats, and the final format check runs
the primary's own reader in a subprocess.
"""
import subprocess
import time

import numpy as np
import torch

from gan_trainer import data
from gan_trainer.config import GanConfig
from gan_trainer.generate import generate_rows, write_generated_stream
from gan_trainer.models import penalty_from_grad_norms
from gan_trainer.train import train, write_log


def report(name: str, detail: str = "") -> None:
    print(f"\nACCEPTANCE PASS: {name}" + (f" ({detail})" if detail else ""))


def ks_distance(a, b):
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    grid = np.concatenate([a, b])
    return float(
        np.max(
            np.abs(
                np.searchsorted(a, grid, side="right") / len(a)
                - np.searchsorted(b, grid, side="right") / len(b)
            )
        )
    )


def test_cda_surrogate_accuracy(pretrained_cda):
    """Pretrained on ~100k exported pairs: held-out exact top-of-book match
    >= 0.90 on recoverable rows; the overall gap is explained by the
    non-recoverable fraction."""
    _net, rep, n_pairs = pretrained_cda
    assert n_pairs >= 100_000

    assert rep.recoverable_accuracy >= 0.90, (
        f"recoverable exact accuracy {rep.recoverable_accuracy:.3f} < 0.90"
    )
    assert rep.nonrecoverable_accuracy <= rep.recoverable_accuracy
    # accuracy lost overall must be attributable to the flagged fraction
    gap = rep.recoverable_accuracy - rep.exact_accuracy
    assert gap <= (1.0 - rep.recoverable_fraction) + 1e-9

    report(
        "CDA surrogate",
        f"recoverable exact {rep.recoverable_accuracy:.3f} >= 0.90 "
        f"(overall {rep.exact_accuracy:.3f}, non-recoverable {rep.nonrecoverable_accuracy:.3f}, "
        f"flagged fraction {1 - rep.recoverable_fraction:.3f})",
    )


def test_wgan_smoke_and_shape(train_stream_50k, heldout_stream, pretrained_cda, tmp_path):
    """50k-order training with 100 critic steps per generator step: finite
    losses, a 20k-order generated file the primary reader accepts, and
    pooled price KS <= 0.30 against held-out simulator data."""
    started = time.monotonic()

    # gradient penalty is exactly zero at unit-norm gradients
    assert penalty_from_grad_norms(torch.ones(128)).item() == 0.0

    cda_net, _rep, _n = pretrained_cda
    feats, buckets, bounds = data.load_stream(train_stream_50k)
    feats, buckets = feats[:50_000], buckets[:50_000]
    cfg = GanConfig(seed=0)
    assert cfg.critic_steps_per_iter == 100
    result = train(feats, buckets, cda_net, cfg)
    assert len(result.log) == cfg.iterations
    for row in result.log:
        assert np.isfinite(row.critic_wasserstein)
        assert np.isfinite(row.critic_loss)
        assert np.isfinite(row.generator_loss)
    write_log(result.log, tmp_path / "train_log.csv")

    rows = generate_rows(result.generator, cda_net, feats[-cfg.k :], bounds, 20_000, seed=1)
    out = tmp_path / "generated.csv"
    write_generated_stream(rows, train_stream_50k, out)

    check = subprocess.run(
        [
            "python3",
            "-c",
            "from orderlab.stream_io import read_stream; "
            f"s = read_stream({str(out)!r}); print(len(s))",
        ],
        capture_output=True,
        text=True,
    )
    assert check.returncode == 0, f"primary reader rejected the file: {check.stderr}"
    assert check.stdout.strip() == "20000"

    held_prices = data.read_stream_rows(heldout_stream)[:, 3]
    ks = ks_distance(rows[:, 3], held_prices)
    assert ks <= 0.30, f"pooled price KS {ks:.3f} exceeds 0.30"

    elapsed = time.monotonic() - started
    report(
        "WGAN smoke and shape",
        f"{cfg.iterations} iterations x 100 critic steps, losses finite, "
        f"20k rows readable by the primary, price KS {ks:.3f} <= 0.30, {elapsed:.0f}s",
    )
