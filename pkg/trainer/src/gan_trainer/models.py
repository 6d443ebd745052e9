"""Conditional WGAN-GP networks: LSTM history encoders, convolutional
generator and critic, and the gradient-penalty term.

The generator emits the order fields directly (bounded by tanh, type as a
4-way softmax) and delegates the next best bid/ask to the frozen book-update
surrogate, exactly as at generation time.
"""
from __future__ import annotations

import torch
from torch import nn

from .data import FEATURE_DIM, N_BUCKETS


def bucket_channel(buckets: torch.Tensor) -> torch.Tensor:
    """Time-bucket index scaled into [-1, 1] as a conditioning scalar."""
    return (2.0 * buckets.float() / (N_BUCKETS - 1) - 1.0).unsqueeze(1)


class HistoryEncoder(nn.Module):
    def __init__(self, hidden: int):
        super().__init__()
        self.lstm = nn.LSTM(FEATURE_DIM, hidden, batch_first=True)

    def forward(self, histories: torch.Tensor) -> torch.Tensor:
        _out, (h_n, _c) = self.lstm(histories)
        return h_n[-1]


class Generator(nn.Module):
    def __init__(self, noise_dim: int = 100, hidden: int = 64):
        super().__init__()
        self.noise_dim = noise_dim
        self.encoder = HistoryEncoder(hidden)
        self.fc = nn.Linear(hidden + noise_dim + 1, 4 * hidden)
        self.convs = nn.Sequential(
            nn.Conv1d(4, 16, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(16, 16, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(16, 8, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(8, 4, kernel_size=5, padding=2),
            nn.ReLU(),
        )
        # heads see the noise directly: variance is then a one-step gradient
        # away instead of hiding behind the conv stack
        self.cont_head = nn.Linear(4 * hidden + noise_dim, 3)  # dt, price, qty
        self.type_head = nn.Linear(4 * hidden + noise_dim, 4)
        nn.init.normal_(self.cont_head.weight, std=0.1)
        # output calibration (dt, price, qty): center + scale * tanh keeps
        # the rollout inside the observed marginals from the first step
        self.register_buffer("out_center", torch.zeros(3))
        self.register_buffer("out_scale", torch.ones(3))

    def calibrate(self, feats) -> None:
        """Set output centers/scales from the training stream's dt, price,
        and qty channels (scale = 3 std, floored for dynamic range)."""
        cols = torch.as_tensor(feats[:, [0, 5, 6]], dtype=torch.float32)
        self.out_center.copy_(cols.mean(dim=0))
        self.out_scale.copy_(torch.clamp(3.0 * cols.std(dim=0), 0.05, 1.0))

    def forward(
        self,
        histories: torch.Tensor,
        buckets: torch.Tensor,
        noise: torch.Tensor,
        cda_net: nn.Module,
    ) -> torch.Tensor:
        """-> x[b, 11]: [dt, type probs(4), price, qty, quotes(4) via the surrogate]."""
        h = self.encoder(histories)
        z = torch.cat([h, noise, bucket_channel(buckets)], dim=1)
        feat = torch.relu(self.fc(z))
        feat = self.convs(feat.view(feat.shape[0], 4, -1)).flatten(1)
        feat = torch.cat([feat, noise], dim=1)
        cont = torch.tanh(self.cont_head(feat))
        # straight-through Gumbel sample: real types are exact one-hots, so a
        # soft simplex point would hand the critic a free tell, and a plain
        # argmax collapses to one corner
        logits = self.type_head(feat)
        gumbel = -torch.log(-torch.log(torch.rand_like(logits) + 1e-20) + 1e-20)
        y = torch.softmax(logits + gumbel, dim=1)
        hard = torch.zeros_like(y).scatter_(1, y.argmax(dim=1, keepdim=True), 1.0)
        type_probs = hard + y - y.detach()
        scaled = torch.clamp(self.out_center + self.out_scale * cont, -1.0, 1.0)
        dt = scaled[:, 0:1]
        price = scaled[:, 1:2]
        qty = scaled[:, 2:3]
        prev_quotes = histories[:, -1, 7:11]
        pad = torch.zeros_like(dt)
        cda_in = torch.cat([dt, type_probs, price, qty, prev_quotes, pad], dim=1)
        quotes = torch.clamp(cda_net(cda_in), -1.0, 1.0)
        return torch.cat([dt, type_probs, price, qty, quotes], dim=1)


class Critic(nn.Module):
    def __init__(self, hidden: int = 64):
        super().__init__()
        self.encoder = HistoryEncoder(hidden)
        self.fc = nn.Linear(hidden + FEATURE_DIM + 1, 4 * hidden)
        self.convs = nn.Sequential(
            nn.Conv1d(4, 16, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(16, 8, kernel_size=5, padding=2),
            nn.ReLU(),
            nn.Conv1d(8, 4, kernel_size=5, padding=2),
            nn.ReLU(),
        )
        self.head = nn.Linear(4 * hidden, 1)

    def forward(
        self, histories: torch.Tensor, buckets: torch.Tensor, x: torch.Tensor
    ) -> torch.Tensor:
        h = self.encoder(histories)
        z = torch.cat([h, x, bucket_channel(buckets)], dim=1)
        feat = torch.relu(self.fc(z))
        feat = self.convs(feat.view(feat.shape[0], 4, -1)).flatten(1)
        return self.head(feat).squeeze(1)


def penalty_from_grad_norms(norms: torch.Tensor) -> torch.Tensor:
    """The gradient-penalty functional: mean squared deviation of the norms
    from 1. Exactly zero at unit-norm gradients."""
    return ((norms - 1.0) ** 2).mean()


def gradient_penalty(
    critic: Critic,
    histories: torch.Tensor,
    buckets: torch.Tensor,
    real_x: torch.Tensor,
    fake_x: torch.Tensor,
) -> torch.Tensor:
    """Penalty on critic gradients at random interpolates of real and fake
    targets (histories stay real)."""
    eps = torch.rand(real_x.shape[0], 1, device=real_x.device)
    interp = (eps * real_x + (1.0 - eps) * fake_x).requires_grad_(True)
    scores = critic(histories, buckets, interp)
    grads = torch.autograd.grad(
        outputs=scores.sum(), inputs=interp, create_graph=True
    )[0]
    return penalty_from_grad_norms(grads.norm(2, dim=1))
