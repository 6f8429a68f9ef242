"""
Sample sizes and seeds for the explainability analyses
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class ExplainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_background: int = Field(default=1024, gt=0)
    n_test: int = Field(default=120, gt=0)
    n_saliency_states: int = Field(default=800, gt=0)
    background_subsample: Optional[int] = Field(default=None, gt=0)
    n_permutations: int = Field(default=2000, ge=50)
    sweep_points: int = Field(default=61, ge=2)
    sweep_pressures: List[float] = Field(default_factory=lambda: [7.9, 8.0, 8.1, 8.2, 8.3])
    time_steps: int = Field(default=240, gt=0)
    levels_template: Optional[List[float]] = None
    background_seed: int = 1
    test_seed: int = 2
    saliency_seed: int = 3
    permutation_seed: int = 4
