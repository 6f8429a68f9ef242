"""
Interventional Shapley values for the summed setpoint output

Coalitions are bitmasks: bit j set means feature j is taken from the
explained state, otherwise from the background sample. The coalition value
is the mean over the background of the summed deterministic action.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from errors import ConfigurationError
from policy.evaluation import PolicyLike, numpy_policy

MAX_EXACT_FEATURES = 12
ROWS_PER_CHUNK = 262144

BatchPolicy = Callable[[np.ndarray], np.ndarray]


@dataclass
class AttributionResult:
    state: np.ndarray
    labels: List[str]
    phi: np.ndarray
    phi_per_action: np.ndarray
    baseline: float
    output: float
    method: str
    n_permutations: Optional[int] = None
    stderr: Optional[np.ndarray] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def efficiency_gap(self) -> float:
        return float(self.phi.sum() - (self.output - self.baseline))

    def waterfall(self) -> List[Dict[str, Any]]:
        """Contributions ordered by magnitude, walking from E[f(X)] to f(s)"""
        steps = []
        running = self.baseline
        for j in np.argsort(-np.abs(self.phi), kind="stable"):
            steps.append({
                "feature": self.labels[j],
                "value": float(self.state[j]),
                "phi": float(self.phi[j]),
                "start": running,
                "end": running + float(self.phi[j]),
            })
            running += float(self.phi[j])
        return steps

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "state": self.state.tolist(),
            "features": list(self.labels),
            "phi": self.phi.tolist(),
            "phi_per_action": self.phi_per_action.tolist(),
            "baseline": self.baseline,
            "output": self.output,
            "method": self.method,
        }
        if self.n_permutations is not None:
            record["n_permutations"] = self.n_permutations
        if self.stderr is not None:
            record["stderr"] = self.stderr.tolist()
        record.update(self.extra)
        return record


def _as_batch_policy(policy: PolicyLike) -> BatchPolicy:
    fn = numpy_policy(policy)
    return lambda x: np.atleast_2d(fn(x)).reshape(x.shape[0], -1)


def mask_matrix(masks: np.ndarray, n_features: int) -> np.ndarray:
    """[M, F] boolean inclusion table, (mask >> j) & 1"""
    return ((np.asarray(masks)[:, None] >> np.arange(n_features)) & 1).astype(bool)


def coalition_values(
    f: BatchPolicy, state: np.ndarray, background: np.ndarray, masks: np.ndarray
) -> np.ndarray:
    """v(S) per action for every mask, shape [M, X]"""
    state = np.asarray(state, dtype=np.float64)
    background = np.atleast_2d(np.asarray(background, dtype=np.float64))
    n_bg, n_features = background.shape
    include = mask_matrix(masks, n_features)
    per_chunk = max(1, ROWS_PER_CHUNK // n_bg)
    out = []
    for start in range(0, len(include), per_chunk):
        inc = include[start:start + per_chunk]
        mixed = np.where(inc[:, None, :], state[None, None, :], background[None, :, :])
        actions = f(mixed.reshape(-1, n_features))
        out.append(actions.reshape(len(inc), n_bg, -1).mean(axis=1))
    return np.concatenate(out)


def shapley_weights(n_features: int) -> np.ndarray:
    """|S|!(|F|−|S|−1)!/|F|! for |S| = 0..F−1, computed exactly then rounded once"""
    total = math.factorial(n_features)
    return np.array([
        float(Fraction(math.factorial(s) * math.factorial(n_features - s - 1), total))
        for s in range(n_features)
    ])


def _labels(labels: Optional[Sequence[str]], n: int) -> List[str]:
    return list(labels) if labels is not None else [f"s{j}" for j in range(n)]


def shap_exact(
    policy: PolicyLike,
    state: np.ndarray,
    background: np.ndarray,
    labels: Optional[Sequence[str]] = None,
) -> AttributionResult:
    """Shapley values by enumerating all 2^F coalitions"""
    state = np.asarray(state, dtype=np.float64)
    n_features = state.size
    if n_features > MAX_EXACT_FEATURES:
        raise ConfigurationError(
            f"exact enumeration supports at most {MAX_EXACT_FEATURES} features, got {n_features}; "
            "use shap_sampled instead"
        )
    f = _as_batch_policy(policy)
    masks = np.arange(2 ** n_features)
    values = coalition_values(f, state, background, masks)
    sizes = mask_matrix(masks, n_features).sum(axis=1)
    weights = shapley_weights(n_features)

    phi = np.zeros((values.shape[1], n_features))
    for j in range(n_features):
        without = masks[(masks >> j) & 1 == 0]
        with_j = without | (1 << j)
        w = weights[sizes[without]]
        phi[:, j] = (w[:, None] * (values[with_j] - values[without])).sum(axis=0)

    return AttributionResult(
        state=state,
        labels=_labels(labels, n_features),
        phi=phi.sum(axis=0),
        phi_per_action=phi,
        baseline=float(values[0].sum()),
        output=float(values[-1].sum()),
        method="exact",
    )


def shap_sampled(
    policy: PolicyLike,
    state: np.ndarray,
    background: np.ndarray,
    n_permutations: int,
    seed: Optional[int] = None,
    labels: Optional[Sequence[str]] = None,
) -> AttributionResult:
    """Permutation-sampling estimate with per-feature standard errors

    Each permutation contributes the marginal gains along its prefix chain;
    coalition values are computed once per distinct prefix.
    """
    if n_permutations < 50:
        raise ConfigurationError(f"n_permutations must be at least 50, got {n_permutations}")
    state = np.asarray(state, dtype=np.float64)
    n_features = state.size
    f = _as_batch_policy(policy)
    rng = np.random.default_rng(seed)
    permutations = np.stack([rng.permutation(n_features) for _ in range(n_permutations)])

    bits = np.left_shift(1, permutations)
    prefixes = np.concatenate([np.zeros((n_permutations, 1), dtype=np.int64), np.cumsum(bits, axis=1)], axis=1)
    unique = np.unique(prefixes)
    values = coalition_values(f, state, background, unique)
    lookup = values[np.searchsorted(unique, prefixes)]          # [P, F+1, X]
    gains = np.diff(lookup, axis=1)                              # [P, F, X]

    contributions = np.zeros((n_permutations, values.shape[1], n_features))
    rows = np.arange(n_permutations)[:, None]
    contributions[rows, :, permutations] = gains
    phi_per_action = contributions.mean(axis=0)
    totals = contributions.sum(axis=1)

    return AttributionResult(
        state=state,
        labels=_labels(labels, n_features),
        phi=phi_per_action.sum(axis=0),
        phi_per_action=phi_per_action,
        baseline=float(lookup[0, 0].sum()),
        output=float(lookup[0, -1].sum()),
        method="permutation",
        n_permutations=n_permutations,
        stderr=totals.std(axis=0, ddof=1) / math.sqrt(n_permutations),
    )


def shap(policy: PolicyLike, state: np.ndarray, background: np.ndarray, n_permutations: int = 2000,
         seed: Optional[int] = None, labels: Optional[Sequence[str]] = None) -> AttributionResult:
    """Exact when the feature count allows it, sampled otherwise"""
    if np.size(state) <= MAX_EXACT_FEATURES:
        return shap_exact(policy, state, background, labels)
    return shap_sampled(policy, state, background, n_permutations, seed, labels)
