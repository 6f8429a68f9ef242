"""
PPO hyperparameters (defaults are the published selection) and run sizing
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(default=1e-4, gt=0)
    gamma: float = Field(default=0.995, gt=0, lt=1)
    gae_lambda: float = Field(default=0.97, ge=0, le=1)
    clip: float = Field(default=0.3, gt=0)
    kl_coeff: float = Field(default=0.2, ge=0)
    kl_target: Optional[float] = Field(default=None, gt=0)
    entropy_coeff: float = Field(default=0.0, ge=0)
    vf_coeff: float = Field(default=1.0, ge=0)
    grad_clip: Optional[float] = Field(default=None, gt=0)

    rollout_workers: int = Field(default=4, ge=1)
    steps_per_iteration: int = Field(default=8192, ge=1)
    minibatch_size: int = Field(default=512, ge=1)
    epochs_per_iteration: int = Field(default=10, ge=1)
    sequence_length: int = Field(default=32, ge=1)
    max_iterations: int = Field(default=300, ge=0)

    early_stop_patience: int = Field(default=30, ge=1)
    early_stop_window: int = Field(default=20, ge=1)
    early_stop_min_improvement: float = Field(default=0.005, ge=0)

    hidden_size: int = Field(default=128, ge=1)
    log_std_init: float = -0.5
    checkpoint_iterations: list[int] = Field(default_factory=lambda: [5])

    @model_validator(mode="after")
    def _check_sizes(self) -> "TrainConfig":
        if self.steps_per_iteration < self.rollout_workers * self.sequence_length:
            raise ValueError(
                "steps_per_iteration must give every worker at least one full sequence chunk"
            )
        return self

    @property
    def steps_per_worker(self) -> int:
        return self.steps_per_iteration // self.rollout_workers

    @property
    def chunks_per_minibatch(self) -> int:
        return max(1, self.minibatch_size // self.sequence_length)
