"""Autoregressive generation: the trained generator is fed its own outputs
as history, and the result is written in the primary stream file format."""
from __future__ import annotations

import shutil
from pathlib import Path

import numpy as np
import torch

from .cda_net import CdaNet
from .data import N_BUCKETS, STREAM_HEADER, Bounds, stream_features
from .models import Generator


def _from_unit(y: float, lo: float, hi: float) -> int:
    y = min(1.0, max(-1.0, y))
    return round(lo + (y + 1.0) * (hi - lo) / 2.0)


def _bucket_of(elapsed: int, bounds: Bounds) -> int:
    b = N_BUCKETS * (elapsed - bounds.day_start_ms) // bounds.day_span_ms
    return min(b, N_BUCKETS - 1)


def generate_rows(
    generator: Generator,
    cda_net: CdaNet,
    seed_feats: np.ndarray,
    bounds: Bounds,
    n: int,
    seed: int = 0,
) -> np.ndarray:
    """n generated stream rows (integer columns) continuing seed_feats.

    Each step denormalizes the generator output to the integer grids (order
    quantity floors at 1; inter-arrival clamps at day end; quote quantities
    rounding to 0 become the absent-side sentinel), then feeds the
    re-normalized grid row back as history.
    """
    k = seed_feats.shape[0]
    torch.set_num_threads(1)
    torch.manual_seed(seed)
    history = torch.from_numpy(seed_feats.astype(np.float32)).unsqueeze(0)
    elapsed = bounds.day_start_ms
    rows = []
    generator.eval()
    with torch.no_grad():
        for i in range(n):
            bucket = _bucket_of(elapsed, bounds)
            noise = torch.rand(1, generator.noise_dim) * 2.0 - 1.0
            x = generator(history, torch.tensor([bucket]), noise, cda_net)[0].numpy()

            dt = max(0, _from_unit(x[0], 0, bounds.dt_hi))
            dt = min(dt, bounds.day_end_ms - elapsed)
            code = int(np.argmax(x[1:5]))
            price = _from_unit(x[5], bounds.price_lo, bounds.price_hi)
            price = max(bounds.price_min, min(bounds.price_max, price))
            qty = max(1, _from_unit(x[6], 0, bounds.qty_hi))
            bq = max(0, _from_unit(x[8], 0, bounds.qty_hi))
            aq = max(0, _from_unit(x[10], 0, bounds.qty_hi))
            bp = bounds.price_min if bq == 0 else _from_unit(x[7], bounds.price_lo, bounds.price_hi)
            ap = bounds.price_max if aq == 0 else _from_unit(x[9], bounds.price_lo, bounds.price_hi)
            elapsed += dt
            rows.append((i, dt, code, price, qty, bp, bq, ap, aq, _bucket_of(elapsed, bounds)))

            row_ints = np.array([rows[-1]], dtype=np.int64)
            feats, _buckets = stream_features(row_ints, bounds)
            history = torch.cat(
                [history[:, 1:], torch.from_numpy(feats).unsqueeze(0)], dim=1
            )
    return np.array(rows, dtype=np.int64)


def write_generated_stream(rows: np.ndarray, seed_stream_path: str | Path, out_path: str | Path) -> None:
    """Write rows in the stream CSV format, copying the seed stream's sidecar."""
    out_path = Path(out_path)
    lines = [STREAM_HEADER]
    lines += [",".join(str(int(v)) for v in row) for row in rows]
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    shutil.copyfile(
        str(seed_stream_path) + ".meta.json", str(out_path) + ".meta.json"
    )
