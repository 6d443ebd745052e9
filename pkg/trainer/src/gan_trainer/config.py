"""Hyperparameter bundle for the conditional WGAN-GP trainer."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GanConfig:
    k: int = 20
    noise_dim: int = 100  # uniform noise, symmetric about zero on [-1, 1]
    batch_size: int = 64
    critic_steps_per_iter: int = 100
    gp_weight: float = 10.0
    lr_generator: float = 1e-3
    lr_critic: float = 1e-4
    adam_betas: tuple[float, float] = (0.5, 0.9)
    iterations: int = 30
    hidden: int = 64
    min_gap: int | None = None  # defaults to k + 1, the non-overlap minimum
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("k", "noise_dim", "batch_size", "critic_steps_per_iter", "iterations", "hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gp_weight < 0 or self.lr_generator <= 0 or self.lr_critic <= 0:
            raise ValueError("invalid optimizer hyperparameters")

    @property
    def gap(self) -> int:
        return self.min_gap if self.min_gap is not None else self.k + 1


@dataclass(frozen=True)
class CdaConfig:
    epochs: int = 80
    batch_size: int = 256
    lr: float = 2e-3
    hidden: int = 128
    holdout_fraction: float = 0.1
    seed: int = 0
