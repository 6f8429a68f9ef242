"""
Gradient saliency: mean absolute input gradient of the summed setpoints
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
import pandas as pd

from errors import NumericalError
from explain.config import ExplainConfig
from policy.evaluation import PolicyLike, input_gradient

logger = logging.getLogger("Explain")

MAX_DISCARD_FRACTION = 0.01

StateSampler = Callable[[int, Optional[int]], np.ndarray]


@dataclass(frozen=True)
class SensitivityProfile:
    importance: np.ndarray
    n_samples: int
    labels: List[str]
    n_discarded: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"feature": self.labels, "saliency": self.importance})


def saliency_profile(
    policy: PolicyLike,
    config: ExplainConfig,
    state_sampler: StateSampler,
    labels: Optional[List[str]] = None,
) -> SensitivityProfile:
    """G_j = mean over sampled states of |∂(Σ_k a_k)/∂s_j|

    Rows with non-finite gradients are dropped; more than 1 % dropped is an error.
    """
    states = state_sampler(config.n_saliency_states, config.saliency_seed)
    grads = np.atleast_2d(input_gradient(policy, states))
    finite = np.all(np.isfinite(grads), axis=1)
    n_discarded = int((~finite).sum())
    if n_discarded > MAX_DISCARD_FRACTION * len(grads):
        raise NumericalError(
            f"{n_discarded} of {len(grads)} saliency samples had non-finite gradients"
        )
    if n_discarded:
        logger.warning(f"⚠️  discarded {n_discarded} saliency samples with non-finite gradients")

    labels = labels or [f"s{j}" for j in range(grads.shape[1])]
    return SensitivityProfile(
        importance=np.abs(grads[finite]).mean(axis=0),
        n_samples=int(finite.sum()),
        labels=list(labels),
        n_discarded=n_discarded,
    )
