"""Fixtures built through the primary component's CLI (file interface only)."""
import json
import subprocess

import pytest


def run_primary(*argv):
    result = subprocess.run(
        ["orderlab", *map(str, argv)], capture_output=True, text=True
    )
    assert result.returncode == 0, result.stderr
    return result.stdout


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("streams")


@pytest.fixture(scope="session")
def small_stream(fixture_dir):
    """A quick 6k-order simulator stream."""
    cfg = fixture_dir / "small_sim.json"
    cfg.write_text(json.dumps({"horizon_s": 20.0, "n_orders_target": 6_000}))
    out = fixture_dir / "small.csv"
    run_primary("simulate", "--config", cfg, "--seed", 5, "--out", out)
    return out


@pytest.fixture(scope="session")
def small_pairs(fixture_dir, small_stream):
    out = fixture_dir / "small_pairs.csv"
    run_primary("export-cda", "--in", small_stream, "--out", out)
    return out


@pytest.fixture(scope="session")
def train_stream_50k(fixture_dir):
    """The 50k-order training stream for the WGAN criteria."""
    cfg = fixture_dir / "train_sim.json"
    cfg.write_text(json.dumps({"horizon_s": 170.0, "n_orders_target": 51_000}))
    out = fixture_dir / "train50k.csv"
    run_primary("simulate", "--config", cfg, "--seed", 21, "--out", out)
    return out


@pytest.fixture(scope="session")
def heldout_stream(fixture_dir):
    """Held-out simulator data: same process, fresh seed."""
    cfg = fixture_dir / "held_sim.json"
    cfg.write_text(json.dumps({"horizon_s": 170.0, "n_orders_target": 51_000}))
    out = fixture_dir / "held.csv"
    run_primary("simulate", "--config", cfg, "--seed", 22, "--out", out)
    return out


@pytest.fixture(scope="session")
def cda_stream_100k(fixture_dir):
    """Simulator stream for the book-update pair export: a high cancel rate
    and wider price dispersion keep best-level totals small, so the
    quantity grid stays coarse."""
    cfg = fixture_dir / "cda_sim.json"
    cfg.write_text(
        json.dumps(
            {
                "horizon_s": 360.0,
                "n_orders_target": 108_000,
                "agent": {
                    "surplus_offset_mean": 2.0,
                    "surplus_offset_std": 5.0,
                    "cancel_probability": 0.45,
                },
            }
        )
    )
    out = fixture_dir / "cda.csv"
    run_primary("simulate", "--config", cfg, "--seed", 77, "--out", out)
    return out


@pytest.fixture(scope="session")
def cda_pairs_100k(fixture_dir, cda_stream_100k):
    out = fixture_dir / "cda_pairs.csv"
    run_primary("export-cda", "--in", cda_stream_100k, "--out", out)
    return out


@pytest.fixture(scope="session")
def pretrained_cda(cda_stream_100k, cda_pairs_100k):
    """The full pretraining run shared by both acceptance criteria."""
    from gan_trainer import data
    from gan_trainer.cda_net import pretrain_cda
    from gan_trainer.config import CdaConfig

    bounds = data.read_sidecar(cda_stream_100k)
    pairs = data.load_pairs(cda_pairs_100k, bounds)
    net, report = pretrain_cda(pairs, bounds, CdaConfig(seed=0))
    return net, report, len(pairs.inputs)
