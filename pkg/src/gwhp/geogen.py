"""Random permeability fields (thin-plate-spline interpolated control grids)
and random pressure-gradient boundary conditions."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid, ScalarField, DEFAULT_GRID

PERM_MIN_DEFAULT = 2.1e-9
PERM_MAX_DEFAULT = 4.1e-8
CONTROL_GRID_SIZES = (4, 6, 8)

# Uniform range (per component, Pa/m) for the boundary pressure gradient.
# Calibrated against the simulator: mid-range permeability then gives Darcy
# speeds of a few 1e-6 m/s and plumes tens of meters long within 720 days.
GRADIENT_LIMIT_DEFAULT = 150.0

RNG_NAME = "pcg64"
# Independent seed streams so adding a draw never shifts the others.
_STREAM_GRID_SIZE = 0
_STREAM_CONTROL_VALUES = 1
_STREAM_GRADIENT = 2


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, stream))))


@dataclass(frozen=True)
class GeologySpec:
    """Everything that determines one random geology realization.

    `gradient_x`/`gradient_y` hold the sampled boundary pressure gradient
    (Pa/m). `control_values` optionally pins the permeability control values
    explicitly (planner UI edits); when None they are drawn from `seed`.
    """

    seed: int
    control_grid_size: int = 4
    perm_min: float = PERM_MIN_DEFAULT
    perm_max: float = PERM_MAX_DEFAULT
    gradient_x: float = 0.0
    gradient_y: float = 0.0
    control_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.control_grid_size not in CONTROL_GRID_SIZES:
            raise ValueError(f"control_grid_size must be one of {CONTROL_GRID_SIZES}")
        if not (0 < self.perm_min < self.perm_max):
            raise ValueError("need 0 < perm_min < perm_max")
        if self.control_values is not None:
            n = self.control_grid_size ** 2
            if len(self.control_values) != n:
                raise ValueError(f"control_values needs {n} entries")
            object.__setattr__(self, "control_values", tuple(float(v) for v in self.control_values))

    def to_json(self) -> dict:
        doc = {
            "seed": int(self.seed),
            "control_grid_size": self.control_grid_size,
            "perm_min": self.perm_min,
            "perm_max": self.perm_max,
            "gradient_x": self.gradient_x,
            "gradient_y": self.gradient_y,
        }
        if self.control_values is not None:
            doc["control_values"] = list(self.control_values)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "GeologySpec":
        allowed = {"seed", "control_grid_size", "perm_min", "perm_max",
                   "gradient_x", "gradient_y", "control_values"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown GeologySpec keys: {sorted(unknown)}")
        if "seed" not in doc:
            raise ValueError("GeologySpec requires 'seed'")
        kwargs = dict(doc)
        if "control_values" in kwargs and kwargs["control_values"] is not None:
            kwargs["control_values"] = tuple(kwargs["control_values"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ControlPointSet:
    positions: np.ndarray  # (n, 2) meters
    values: np.ndarray     # (n,) permeability

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        val = np.asarray(self.values, dtype=float).reshape(-1)
        if len(pos) != len(val):
            raise ValueError("positions and values length mismatch")
        # pairwise-distinct positions (coincident points make TPS singular)
        d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        if d.min() <= 0.0:
            raise ValueError("control point positions must be pairwise distinct")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)

    def __len__(self) -> int:
        return len(self.values)


def control_lattice(size: int, grid: Grid) -> np.ndarray:
    """size x size points spread evenly over the domain with a half-spacing
    margin from the boundary; row-major order."""
    sx = grid.extent_x / size
    sy = grid.extent_y / size
    xs = (np.arange(size) + 0.5) * sx
    ys = (np.arange(size) + 0.5) * sy
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])


def sample_control_points(spec: GeologySpec, grid: Grid = DEFAULT_GRID) -> ControlPointSet:
    """Control lattice with i.i.d. uniform values in [perm_min, perm_max];
    deterministic given spec.seed (or taken verbatim from spec.control_values)."""
    positions = control_lattice(spec.control_grid_size, grid)
    if spec.control_values is not None:
        values = np.asarray(spec.control_values, dtype=float)
    else:
        rng = _rng(spec.seed, _STREAM_CONTROL_VALUES)
        values = rng.uniform(spec.perm_min, spec.perm_max, size=len(positions))
    return ControlPointSet(positions, values)


def _tps_kernel(r: np.ndarray) -> np.ndarray:
    # phi(r) = r^2 ln r, with phi(0) = 0
    out = np.zeros_like(r)
    mask = r > 0.0
    rm = r[mask]
    out[mask] = rm * rm * np.log(rm)
    return out


def tps_solve(points: ControlPointSet) -> tuple[np.ndarray, np.ndarray]:
    """Solve the thin-plate-spline system for (weights, affine coefficients).

    Standard TPS with orthogonality side conditions:
        [Phi  P] [w]   [v]
        [P^T  0] [a] = [0]
    where Phi_ij = phi(|x_i - x_j|) and P rows are [1, x, y].
    """
    n = len(points)
    if n < 3:
        raise ValueError("TPS needs at least 3 control points")
    pos = points.positions
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    phi = _tps_kernel(d)
    P = np.column_stack([np.ones(n), pos])
    A = np.zeros((n + 3, n + 3))
    A[:n, :n] = phi
    A[:n, n:] = P
    A[n:, :n] = P.T
    b = np.zeros(n + 3)
    b[:n] = points.values
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular TPS system (collinear or coincident points): {exc}") from exc
    return sol[:n], sol[n:]


def tps_evaluate(points: ControlPointSet, weights: np.ndarray, affine: np.ndarray,
                 xy: np.ndarray) -> np.ndarray:
    """Evaluate the TPS interpolant at `xy` (m, 2)."""
    d = np.linalg.norm(xy[:, None, :] - points.positions[None, :, :], axis=-1)
    return _tps_kernel(d) @ weights + affine[0] + affine[1] * xy[:, 0] + affine[2] * xy[:, 1]


def tps_interpolate(points: ControlPointSet, grid: Grid,
                    floor: float | None = None) -> ScalarField:
    """Permeability field sampled at all cell centers from the TPS interpolant.

    Output is clamped from below at `floor` (default min(values)/10) so spline
    undershoot can never produce non-positive permeability.
    """
    weights, affine = tps_solve(points)
    X, Y = grid.center_mesh()
    xy = np.column_stack([X.ravel(), Y.ravel()])
    vals = tps_evaluate(points, weights, affine, xy).reshape(grid.ny, grid.nx)
    if floor is None:
        floor = float(points.values.min()) / 10.0
    if floor <= 0.0:
        raise ValueError("clamping floor must be positive")
    return ScalarField(grid, np.maximum(vals, floor), unit="m2/(Pa.s)")


def permeability_field(spec: GeologySpec, grid: Grid = DEFAULT_GRID) -> ScalarField:
    points = sample_control_points(spec, grid)
    return tps_interpolate(points, grid, floor=spec.perm_min / 10.0)


def sample_pressure_gradient(spec: GeologySpec,
                             limit: float = GRADIENT_LIMIT_DEFAULT) -> tuple[float, float]:
    """Deterministic uniform draw of (gx, gy), each in [-limit, limit] Pa/m."""
    rng = _rng(spec.seed, _STREAM_GRADIENT)
    gx, gy = rng.uniform(-limit, limit, size=2)
    return float(gx), float(gy)


def sample_control_grid_size(seed: int) -> int:
    rng = _rng(seed, _STREAM_GRID_SIZE)
    return int(rng.choice(CONTROL_GRID_SIZES))


def realize_geology(seed: int, perm_min: float = PERM_MIN_DEFAULT,
                    perm_max: float = PERM_MAX_DEFAULT,
                    gradient_limit: float = GRADIENT_LIMIT_DEFAULT) -> GeologySpec:
    """Draw a complete GeologySpec (grid size + gradient recorded) from one seed."""
    spec = GeologySpec(seed=seed, control_grid_size=sample_control_grid_size(seed),
                       perm_min=perm_min, perm_max=perm_max)
    gx, gy = sample_pressure_gradient(spec, limit=gradient_limit)
    return replace(spec, gradient_x=gx, gradient_y=gy)
