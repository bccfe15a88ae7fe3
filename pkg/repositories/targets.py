import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from core.exceptions import MissingNodes, SchemaMismatch
from core.models import ActivationFamily, ActivationSpec, Grid

logger = logging.getLogger(__name__)

NODE_TOL = 1e-9


def coordinate_columns(dim: int) -> list[str]:
    return [f"x_{i}" for i in range(1, dim + 1)]


class TargetRepository:
    """CSV access for sampled targets, sampled activations and evaluation points."""

    def read_table(self, path: str | Path, dim: int, with_value: bool = True) -> pd.DataFrame:
        logger.info(f"Reading {path}")
        frame = pd.read_csv(path, float_precision="round_trip")
        expected = coordinate_columns(dim) + (["value"] if with_value else [])
        if list(frame.columns) != expected:
            raise SchemaMismatch(f"{path} has columns {list(frame.columns)}, expected {expected}")
        if frame.isna().any().any():
            raise SchemaMismatch(f"{path} has empty cells")
        return frame

    def ingest_target_csv(self, path: str | Path, grid: Grid) -> np.ndarray:
        """
        Align CSV samples to the grid nodes. Rows off the nodes are binned to
        the nearest node (averaged per node); every node needs a value.
        """
        frame = self.read_table(path, grid.dim)
        points = frame[coordinate_columns(grid.dim)].to_numpy(dtype=float)
        values = frame["value"].to_numpy(dtype=float)

        if points.shape == grid.nodes.shape and np.array_equal(points, grid.nodes):
            return values

        distance, nearest = cKDTree(grid.nodes).query(points)
        scattered = distance > NODE_TOL * (1.0 + grid.half_width)
        if np.any(scattered):
            logger.warning(
                f"{int(np.sum(scattered))} rows of {path} are off the grid; binning to nearest nodes"
            )
        binned = pd.Series(values).groupby(nearest).mean()
        if len(binned) < grid.size:
            raise MissingNodes(f"{path} covers {len(binned)} of {grid.size} grid nodes")
        return binned.sort_index().to_numpy(dtype=float)

    def load_sampled_activation(self, path: str | Path, dim: int) -> ActivationSpec:
        """Activation sampled on a full tensor grid, interpolated multilinearly."""
        columns = coordinate_columns(dim)
        frame = self.read_table(path, dim).sort_values(columns, kind="mergesort")
        axes = tuple(tuple(np.unique(frame[column].to_numpy(dtype=float))) for column in columns)
        expected = int(np.prod([len(axis) for axis in axes]))
        if len(frame) != expected or frame.duplicated(columns).any():
            raise SchemaMismatch(f"{path} is not a full tensor grid of samples")
        return ActivationSpec(
            family=ActivationFamily.SAMPLED,
            dim=dim,
            axes=axes,
            values=tuple(frame["value"].to_numpy(dtype=float)),
        )

    def read_points(self, path: str | Path, dim: int) -> np.ndarray:
        frame = self.read_table(path, dim, with_value=False)
        return frame.to_numpy(dtype=float)

    def values_frame(self, points: np.ndarray, values: np.ndarray) -> pd.DataFrame:
        frame = pd.DataFrame(points, columns=coordinate_columns(points.shape[1]))
        frame["value"] = values
        return frame
