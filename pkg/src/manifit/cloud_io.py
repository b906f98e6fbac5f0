"""CSV point-cloud files and JSON reports.

Clouds are stored with a header row ``x0..x{D-1}`` and one point per row.
Values are written with the shortest decimal that round-trips the 64-bit
float, so save/load is bit-exact.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataError
from .geometry import PointCloud


def write_cloud_csv(cloud: PointCloud, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(cloud.dim)])
        for row in cloud.points:
            writer.writerow([repr(float(v)) for v in row])


def read_cloud_csv(path) -> PointCloud:
    """Load a cloud CSV; parse errors name the offending row and column."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        dim = len(header)
        if dim < 1:
            raise DataError(f"{path}: header row is empty")
        for j, name in enumerate(header):
            if name.strip() != f"x{j}":
                raise DataError(
                    f"{path}: header column {j + 1} must be 'x{j}', got {name!r}"
                )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate trailing blank lines
            if len(row) != dim:
                raise DataError(
                    f"{path}: row {lineno}: expected {dim} columns, got {len(row)}"
                )
            values = []
            for j, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column x{j}: not a number: {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}: row {lineno}, column x{j}: non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)
    if not rows:
        return PointCloud(np.empty((0, dim)))
    return PointCloud(np.array(rows, dtype=float))


def write_json(payload: dict, path):
    path = Path(path)
    with path.open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
