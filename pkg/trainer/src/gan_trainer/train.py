"""WGAN-GP training loop: many critic updates per generator update, spaced
history batches, frozen book-update surrogate inside the generator."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .cda_net import CdaNet
from .config import GanConfig
from .data import history_batch
from .models import Critic, Generator, gradient_penalty


class TrainingDiverged(RuntimeError):
    def __init__(self, iteration: int, what: str):
        super().__init__(f"non-finite {what} at iteration {iteration}")
        self.iteration = iteration


@dataclass
class LogRow:
    iteration: int
    critic_wasserstein: float
    critic_loss: float
    generator_loss: float


@dataclass
class TrainResult:
    generator: Generator
    critic: Critic
    log: list[LogRow]


def write_log(log: list[LogRow], path: str | Path) -> None:
    lines = ["iteration,critic_wasserstein,critic_loss,generator_loss"]
    for row in log:
        lines.append(
            f"{row.iteration},{row.critic_wasserstein!r},{row.critic_loss!r},{row.generator_loss!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_checkpoint(result: TrainResult, cfg: GanConfig, path: str | Path) -> None:
    torch.save(
        {
            "noise_dim": cfg.noise_dim,
            "hidden": cfg.hidden,
            "generator": result.generator.state_dict(),
            "critic": result.critic.state_dict(),
        },
        path,
    )


def load_generator(path: str | Path) -> Generator:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    gen = Generator(payload["noise_dim"], payload["hidden"])
    gen.load_state_dict(payload["generator"])
    gen.eval()
    return gen


def train(
    feats: np.ndarray,
    buckets: np.ndarray,
    cda_net: CdaNet,
    cfg: GanConfig = GanConfig(),
) -> TrainResult:
    """Alternating optimization: cfg.critic_steps_per_iter critic updates,
    then one generator update, for cfg.iterations iterations.

    Histories are always real data; generator outputs enter the critic and
    the gradient penalty as the candidate next observation. Raises
    TrainingDiverged on the first non-finite loss.
    """
    torch.set_num_threads(1)  # tiny ops thrash across cores
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    generator = Generator(cfg.noise_dim, cfg.hidden)
    generator.calibrate(feats)
    critic = Critic(cfg.hidden)
    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.lr_generator, betas=cfg.adam_betas)
    opt_c = torch.optim.Adam(critic.parameters(), lr=cfg.lr_critic, betas=cfg.adam_betas)

    def batch():
        h, x, b = history_batch(feats, buckets, cfg.k, cfg.batch_size, cfg.gap, rng)
        return (
            torch.from_numpy(h),
            torch.from_numpy(x),
            torch.from_numpy(b),
        )

    def noise(n):
        return torch.rand(n, cfg.noise_dim) * 2.0 - 1.0

    log: list[LogRow] = []
    for it in range(cfg.iterations):
        w_estimate = 0.0
        c_loss_val = 0.0
        for _ in range(cfg.critic_steps_per_iter):
            h, x_real, b = batch()
            with torch.no_grad():
                x_fake = generator(h, b, noise(len(x_real)), cda_net)
            opt_c.zero_grad()
            score_real = critic(h, b, x_real)
            score_fake = critic(h, b, x_fake)
            gp = gradient_penalty(critic, h, b, x_real, x_fake)
            c_loss = score_fake.mean() - score_real.mean() + cfg.gp_weight * gp
            if not torch.isfinite(c_loss):
                raise TrainingDiverged(it, "critic loss")
            c_loss.backward()
            opt_c.step()
            with torch.no_grad():
                w_estimate = float(score_real.mean() - score_fake.mean())
                c_loss_val = float(c_loss)

        h, _x_real, b = batch()
        opt_g.zero_grad()
        x_fake = generator(h, b, noise(h.shape[0]), cda_net)
        g_loss = -critic(h, b, x_fake).mean()
        if not torch.isfinite(g_loss):
            raise TrainingDiverged(it, "generator loss")
        g_loss.backward()
        opt_g.step()
        log.append(LogRow(it, w_estimate, c_loss_val, float(g_loss.detach())))
    return TrainResult(generator=generator, critic=critic, log=log)
