"""CSV and JSON readers/writers for response data."""
import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..utils import config, get_logger
from ..utils.errors import EmptyDataError, ResponseValidationError
from .responses import RawResponses, ResponseMatrix

logger = get_logger(__name__)


def _looks_like_header(first_row: Sequence[str]) -> bool:
    for cell in first_row:
        cell = str(cell).strip()
        if cell == "" or cell.lower() == "nan":
            continue
        try:
            int(float(cell))
        except ValueError:
            return True
    return False


def read_responses_csv(
    path: Path | str,
    missing_code: Optional[int] = None,
    header: Optional[bool] = None,
) -> RawResponses:
    """
    Read one row per unit, one column per item.

    Empty cells and the missing sentinel are both treated as missing.

    Args:
        path: CSV file
        missing_code: sentinel for missing cells (config default 999)
        header: whether the first line names the items; detected when None
    """
    code = config.missing_code if missing_code is None else missing_code
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyDataError(f"No rows in {path}")
    if frame.empty:
        raise EmptyDataError(f"No rows in {path}")

    if header is None:
        header = _looks_like_header(frame.iloc[0].tolist())
    if header:
        frame = frame.iloc[1:].reset_index(drop=True)
    if frame.empty:
        raise EmptyDataError(f"No data rows in {path}")

    cells = frame.apply(lambda col: col.str.strip())
    blank = cells.eq("") | cells.apply(lambda col: col.str.lower()).eq("na")
    numeric = cells.mask(blank, str(code)).apply(pd.to_numeric, errors="coerce")

    bad = numeric.isna().to_numpy()
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ResponseValidationError(int(i), int(j), cells.iat[i, j], "not an integer")

    values = numeric.to_numpy(dtype=float)
    logger.info(f"Read {values.shape[0]} units x {values.shape[1]} items from {path}")
    return RawResponses(rows=values, missing_code=code)


def write_responses_csv(raw: RawResponses, path: Path | str, header: bool = True) -> None:
    """Write responses in the format read_responses_csv accepts."""
    columns = [f"item{j + 1}" for j in range(raw.r)]
    frame = pd.DataFrame(raw.rows, columns=columns)
    frame.to_csv(path, index=False, header=header)
    logger.info(f"Wrote {raw.n} units to {path}")


def write_json(payload: dict, path: Path | str | None) -> str:
    """Serialize to indented JSON; write to `path` when given and return the text."""
    text = json.dumps(payload, indent=2, sort_keys=False, default=_json_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def read_json(path: Path | str) -> dict:
    with open(path, "r") as f:
        return json.load(f)


def read_response_matrix_json(path: Path | str) -> ResponseMatrix:
    return ResponseMatrix.from_dict(read_json(path))


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")
