"""
JSON / CSV writers for explain outputs
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, Sequence, Union

import numpy as np
import pandas as pd

from explain.shapley import AttributionResult


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_json(payload: Any, path: Union[str, Path]) -> Path:
    """Write JSON with numpy values converted and NaN written as null"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2))
    return path


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def attribution_records(results: Sequence[AttributionResult]) -> Dict[str, Any]:
    return {"records": [r.to_dict() for r in results]}


def attribution_frame(results: Sequence[AttributionResult]) -> pd.DataFrame:
    """One row per explained state, one phi column per feature"""
    rows = []
    for i, r in enumerate(results):
        row = {"state": i, "baseline": r.baseline, "output": r.output, "method": r.method}
        row.update({f"phi_{label}": float(v) for label, v in zip(r.labels, r.phi)})
        row.update({f"value_{label}": float(v) for label, v in zip(r.labels, r.state)})
        rows.append(row)
    return pd.DataFrame(rows)
