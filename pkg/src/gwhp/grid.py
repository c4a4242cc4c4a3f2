"""Structured-grid geometry and field containers shared by all numerical modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered 2D grid with physical extents.

    Default is the 64x64 grid of 2 m cells (128 m x 128 m x 1 m domain).
    Row-major storage convention throughout: flat index = j*nx + i, i.e.
    arrays are shaped (ny, nx) with A[j, i].
    """

    nx: int = 64
    ny: int = 64
    dx: float = 2.0
    dy: float = 2.0
    thickness: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid needs at least one cell per axis, got {self.nx}x{self.ny}")
        if self.dx <= 0 or self.dy <= 0 or self.thickness <= 0:
            raise ValueError("cell sizes and thickness must be positive")

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def extent_x(self) -> float:
        return self.nx * self.dx

    @property
    def extent_y(self) -> float:
        return self.ny * self.dy

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.thickness

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"cell ({i}, {j}) outside {self.nx}x{self.ny} grid")
        return ((i + 0.5) * self.dx, (j + 0.5) * self.dy)

    def center_cell_index(self) -> tuple[int, int]:
        # Even-sized grids have no exact center cell; (nx//2, ny//2) is within
        # half a cell of the geometric center and is the injection convention.
        return (self.nx // 2, self.ny // 2)

    def flat_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"cell ({i}, {j}) outside {self.nx}x{self.ny} grid")
        return j * self.nx + i

    def cell_of_flat(self, k: int) -> tuple[int, int]:
        if not (0 <= k < self.n_cells):
            raise IndexError(f"flat index {k} outside grid of {self.n_cells} cells")
        return (k % self.nx, k // self.nx)

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def center_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of cell-center coordinates, each shaped (ny, nx)."""
        return np.meshgrid(self.x_centers(), self.y_centers())


def cell_center(grid: Grid, i: int, j: int) -> tuple[float, float]:
    return grid.cell_center(i, j)


def center_cell_index(grid: Grid) -> tuple[int, int]:
    return grid.center_cell_index()


def _as_field_array(grid: Grid, values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        if arr.size != grid.n_cells:
            raise ValueError(f"{name}: expected {grid.n_cells} values, got {arr.size}")
        arr = arr.reshape(grid.ny, grid.nx)
    elif arr.shape != (grid.ny, grid.nx):
        raise ValueError(f"{name}: expected shape {(grid.ny, grid.nx)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: values must be finite")
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Cell-centered scalar field. `values` is (ny, nx), row-major over cells."""

    grid: Grid
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _as_field_array(self.grid, self.values, "values"))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def at(self, i: int, j: int) -> float:
        self.grid.flat_index(i, j)  # bounds check
        return float(self.values[j, i])

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values, self.unit)


@dataclass(frozen=True)
class VectorField:
    """Cell-centered 2D vector field with components stored like ScalarField."""

    grid: Grid
    x_values: np.ndarray
    y_values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "x_values", _as_field_array(self.grid, self.x_values, "x_values"))
        object.__setattr__(self, "y_values", _as_field_array(self.grid, self.y_values, "y_values"))

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.x_values, self.y_values)

    def at(self, i: int, j: int) -> tuple[float, float]:
        self.grid.flat_index(i, j)  # bounds check
        return (float(self.x_values[j, i]), float(self.y_values[j, i]))


DEFAULT_GRID = Grid()
