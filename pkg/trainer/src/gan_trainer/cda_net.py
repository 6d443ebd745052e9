"""Learned book-update surrogate: (order, current best quotes) -> next quotes.

A fully connected layer followed by three 1-d convolutions, trained with
plain MSE on normalized quote labels. The inputs are augmented with the
price-versus-quote difference channels (derived from the same fields), and
the head predicts residuals over the previous quotes, so no-change
transitions and copy-the-order-price transitions are both near-linear.
Weights are frozen after pretraining for use inside the generator.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .config import CdaConfig
from .data import Bounds, PairData, denorm_quotes

AUG_DIM = 16  # 12 raw channels + price-minus-bid/ask diffs + qty copies


def augment(inputs: torch.Tensor) -> torch.Tensor:
    """Append difference channels: order price vs prev bid/ask price, and
    order qty vs prev quote quantities."""
    price = inputs[:, 5:6]
    qty = inputs[:, 6:7]
    bid_px, bid_q = inputs[:, 7:8], inputs[:, 8:9]
    ask_px, ask_q = inputs[:, 9:10], inputs[:, 10:11]
    return torch.cat(
        [inputs, price - bid_px, price - ask_px, qty - bid_q, qty - ask_q], dim=1
    )


class CdaNet(nn.Module):
    def __init__(self, hidden: int = 128):
        super().__init__()
        self.fc = nn.Linear(AUG_DIM, hidden)
        self.convs = nn.Sequential(
            nn.Conv1d(1, 16, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(16, 16, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(16, 4, kernel_size=5, padding=2),
            nn.ReLU(),
        )
        self.head = nn.Sequential(
            nn.Linear(4 * hidden + AUG_DIM, hidden),
            nn.ReLU(),
            nn.Linear(hidden, 4),
        )

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        """inputs[b, 12] -> next-quote prediction[b, 4] (residual over prev)."""
        aug = augment(inputs)
        h = torch.relu(self.fc(aug))
        h = self.convs(h.unsqueeze(1)).flatten(1)
        delta = self.head(torch.cat([h, aug], dim=1))
        prev = inputs[:, 7:11]
        return prev + delta


@dataclass(frozen=True)
class CdaEvalReport:
    mse: float
    exact_accuracy: float
    recoverable_accuracy: float
    nonrecoverable_accuracy: float
    recoverable_fraction: float


def evaluate_cda(
    net: CdaNet, pairs: PairData, bounds: Bounds, idx: np.ndarray
) -> CdaEvalReport:
    """Held-out MSE and exact top-of-book match, split by the recoverable flag."""
    net.eval()
    with torch.no_grad():
        pred = net(torch.from_numpy(pairs.inputs[idx])).numpy()
    mse = float(np.mean((pred - pairs.labels[idx]) ** 2))
    grid = denorm_quotes(pred, bounds)
    exact = np.all(grid == pairs.label_ints[idx], axis=1)
    rec = pairs.recoverable[idx]
    n_rec = int(rec.sum())
    n_non = len(idx) - n_rec
    return CdaEvalReport(
        mse=mse,
        exact_accuracy=float(exact.mean()),
        recoverable_accuracy=float(exact[rec].mean()) if n_rec else float("nan"),
        nonrecoverable_accuracy=float(exact[~rec].mean()) if n_non else float("nan"),
        recoverable_fraction=n_rec / len(idx),
    )


def pretrain_cda(
    pairs: PairData, bounds: Bounds, cfg: CdaConfig = CdaConfig()
) -> tuple[CdaNet, CdaEvalReport]:
    """MSE training with a held-out split; returns the net and its report."""
    torch.set_num_threads(1)  # tiny ops thrash across cores
    n = len(pairs.inputs)
    if n == 0:
        raise ValueError("empty pair dataset")
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    n_hold = max(1, int(n * cfg.holdout_fraction))
    hold_idx, train_idx = order[:n_hold], order[n_hold:]
    if len(train_idx) == 0:
        train_idx = hold_idx

    net = CdaNet(cfg.hidden)
    opt = torch.optim.Adam(net.parameters(), lr=cfg.lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=cfg.epochs)
    inputs = torch.from_numpy(pairs.inputs[train_idx])
    labels = torch.from_numpy(pairs.labels[train_idx])
    loss_fn = nn.MSELoss()
    net.train()
    for _epoch in range(cfg.epochs):
        perm = torch.from_numpy(rng.permutation(len(inputs)))
        for lo in range(0, len(inputs), cfg.batch_size):
            idx = perm[lo : lo + cfg.batch_size]
            opt.zero_grad()
            loss = loss_fn(net(inputs[idx]), labels[idx])
            loss.backward()
            opt.step()
        sched.step()
    report = evaluate_cda(net, pairs, bounds, hold_idx)
    for p in net.parameters():
        p.requires_grad_(False)
    return net, report


def save_cda(net: CdaNet, path: str | Path) -> None:
    torch.save({"hidden": net.fc.out_features, "state": net.state_dict()}, path)


def load_cda(path: str | Path) -> CdaNet:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    net = CdaNet(payload["hidden"])
    net.load_state_dict(payload["state"])
    for p in net.parameters():
        p.requires_grad_(False)
    net.eval()
    return net
