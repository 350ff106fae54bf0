"""
Point-set CSV files.

Header `space,c0,c1,...`; each row is one point, its `space` column naming
the space kind. Product points concatenate the x and y coordinate blocks;
the split index comes from the spec's space descriptor.
"""
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
import structlog

from ..domain.spaces import PointSpace
from ..errors import DomainError, SchemaError

logger = structlog.get_logger()

SPHERE_FILE_TOLERANCE = 1e-8


def read_points(path: Union[str, Path], space: PointSpace) -> np.ndarray:
    """Load and validate points against `space`; errors name the 0-based data row."""
    try:
        frame = pd.read_csv(path, dtype={"space": str}, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f"point file {path} is empty") from e
    except pd.errors.ParserError as e:
        raise SchemaError(f"point file {path} is not valid CSV: {e}") from e

    columns = list(frame.columns)
    if not columns or columns[0] != "space":
        raise SchemaError(f"point file header must start with 'space', got {columns[:1]}")
    coords = columns[1:]
    if len(coords) != space.coord_dim:
        raise SchemaError(
            f"point file has {len(coords)} coordinate columns, the space needs {space.coord_dim}",
            witness={"columns": len(coords), "expected": space.coord_dim},
        )
    if frame.empty:
        raise SchemaError(f"point file {path} has no points")

    labels = frame["space"].astype(str).str.strip()
    wrong = labels[labels != space.kind.value]
    if not wrong.empty:
        row = int(wrong.index[0])
        raise SchemaError(
            f"row {row} declares space {wrong.iloc[0]!r}, expected {space.kind.value!r}",
            witness={"row": row},
        )

    values = frame[coords].apply(pd.to_numeric, errors="coerce")
    bad = values.isna().any(axis=1)
    if bad.any():
        row = int(bad.idxmax())
        raise SchemaError(f"row {row} has a missing or non-numeric coordinate", witness={"row": row})

    points = values.to_numpy(dtype=float)
    try:
        points = space.validate(points, tolerance=SPHERE_FILE_TOLERANCE)
    except DomainError as e:
        logger.error("point_validation_failed", path=str(path), error=str(e))
        raise
    points = space.project(points)
    logger.debug("points_loaded", path=str(path), n_points=len(points), space=space.kind.value)
    return points


def write_points(path: Union[str, Path], points: np.ndarray, space: PointSpace) -> Path:
    """Write points in the CSV layout read_points expects."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    frame = pd.DataFrame(points, columns=[f"c{k}" for k in range(points.shape[1])])
    frame.insert(0, "space", space.kind.value)
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path
