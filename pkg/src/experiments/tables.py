from pathlib import Path
from typing import List

import pandas as pd

from shared.types import MetricsRecord
from trainer.state import METRIC_COLUMNS

FLOAT_FORMAT = "%.12g"


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Header row, fixed column order, fixed float format: reruns are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def metrics_frame(records: List[MetricsRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in records], columns=list(METRIC_COLUMNS))
