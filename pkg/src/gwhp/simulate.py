"""High-fidelity data generator: steady pressure solve, Darcy velocity, and
explicit upwind advection-diffusion heat transport to a pseudo steady state."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid, ScalarField, VectorField, DEFAULT_GRID
from . import geogen
from .geogen import GeologySpec

WATER_MOLAR_MASS = 18.01528       # kg/kmol
AMBIENT_TEMPERATURE_DEFAULT = 10.0  # degC, initial groundwater temperature

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class SimParams:
    """Physical constants of the coupled flow/heat problem.

    eta/kappa/enthalpy_ref follow the reference simulation parameter table;
    heat_capacity and porosity are not published and are config-exposed.
    """

    eta: float = 55.3454010547        # molar density of water, kmol/m^3
    kappa: float = 0.5                # thermal conductivity, W/(m K)
    enthalpy_ref: float = 1.134945    # specific enthalpy of water at 10 degC, kJ/mol
    heat_capacity: float = 4.0e6      # volumetric heat capacity, J/(m^3 K)
    porosity: float = 0.2

    def __post_init__(self):
        for name in ("eta", "kappa", "enthalpy_ref", "heat_capacity", "porosity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def water_density(self) -> float:
        return self.eta * WATER_MOLAR_MASS  # kg/m^3

    def thermal_diffusivity(self) -> float:
        return self.kappa / self.heat_capacity  # m^2/s

    def volumetric_rate(self, mass_rate: float) -> float:
        """kg/s -> m^3/s via molar units (mass -> kmol via molar mass, kmol -> m^3 via eta)."""
        return mass_rate / WATER_MOLAR_MASS / self.eta

    def molar_rate(self, mass_rate: float) -> float:
        return mass_rate / WATER_MOLAR_MASS  # kmol/s

    def enthalpy_rate(self, mass_rate: float) -> float:
        """Injected enthalpy flow, kW (bookkeeping only)."""
        return self.molar_rate(mass_rate) * self.enthalpy_ref * 1000.0


@dataclass(frozen=True)
class WellSpec:
    cell: tuple[int, int]
    mass_rate: float = 0.05              # kg/s
    injection_temperature: float = 15.0  # degC

    def __post_init__(self):
        i, j = self.cell
        object.__setattr__(self, "cell", (int(i), int(j)))
        if self.mass_rate <= 0:
            raise ValueError("mass_rate must be positive")
        if self.injection_temperature <= AMBIENT_TEMPERATURE_DEFAULT:
            raise ValueError("injection_temperature must exceed the 10 degC ambient")

    def to_json(self) -> dict:
        return {"cell": [self.cell[0], self.cell[1]],
                "mass_rate": self.mass_rate,
                "injection_temperature": self.injection_temperature}

    @classmethod
    def from_json(cls, doc: dict) -> "WellSpec":
        allowed = {"cell", "mass_rate", "injection_temperature"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown WellSpec keys: {sorted(unknown)}")
        if "cell" not in doc:
            raise ValueError("WellSpec requires 'cell'")
        return cls(cell=tuple(doc["cell"]),
                   mass_rate=doc.get("mass_rate", 0.05),
                   injection_temperature=doc.get("injection_temperature", 15.0))


@dataclass(frozen=True)
class TransportConfig:
    total_time_days: float = 720.0
    cfl: float = 0.9                   # fraction of the scheme's stability limit
    steady_tol: float = 1e-6           # K per step; early-exit threshold
    ambient_temperature: float = 10.0  # degC

    def __post_init__(self):
        if self.total_time_days <= 0:
            raise ValueError("total_time_days must be positive")
        if not (0 < self.cfl <= 1.0):
            raise ValueError("cfl must be in (0, 1]")
        if self.steady_tol < 0:
            raise ValueError("steady_tol must be non-negative")


@dataclass(frozen=True)
class ScenarioSpec:
    """Seeds + geology + well + grid: fully determines one simulation."""

    geology: GeologySpec
    well: WellSpec
    grid: Grid = DEFAULT_GRID
    scenario_id: str = ""

    def __post_init__(self):
        i, j = self.well.cell
        self.grid.flat_index(i, j)  # bounds check
        if not self.scenario_id:
            object.__setattr__(self, "scenario_id", f"seed{self.geology.seed}")

    def to_json(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "geology": self.geology.to_json(),
            "well": self.well.to_json(),
            "grid": {"nx": self.grid.nx, "ny": self.grid.ny, "dx": self.grid.dx,
                     "dy": self.grid.dy, "thickness": self.grid.thickness},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ScenarioSpec":
        allowed = {"scenario_id", "geology", "well", "grid"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown ScenarioSpec keys: {sorted(unknown)}")
        grid = Grid(**doc["grid"]) if "grid" in doc else DEFAULT_GRID
        return cls(geology=GeologySpec.from_json(doc["geology"]),
                   well=WellSpec.from_json(doc["well"]),
                   grid=grid,
                   scenario_id=doc.get("scenario_id", ""))


@dataclass(frozen=True)
class Sample:
    """One simulated scenario: (K, P, q, T) on a shared grid."""

    spec: ScenarioSpec
    permeability: ScalarField
    pressure: ScalarField
    velocity: VectorField
    temperature: ScalarField
    steady_reached: bool = True
    simulated_days: float = 0.0
    steps: int = 0

    def __post_init__(self):
        g = self.spec.grid
        for f in (self.permeability, self.pressure, self.temperature):
            if f.grid != g:
                raise ValueError("all sample fields must share the scenario grid")
        if self.velocity.grid != g:
            raise ValueError("all sample fields must share the scenario grid")
        if self.temperature.values.min() < AMBIENT_TEMPERATURE_DEFAULT - 1e-6:
            raise ValueError("temperature below ambient: injection only heats")


def generate_scenario(master_seed: int, index: int, grid: Grid = DEFAULT_GRID,
                      well: WellSpec | None = None,
                      gradient_limit: float = geogen.GRADIENT_LIMIT_DEFAULT) -> ScenarioSpec:
    """Deterministic scenario for (master_seed, index); the well defaults to the
    domain-center cell."""
    child = np.random.SeedSequence((int(master_seed), int(index)))
    seed = int(child.generate_state(1, dtype=np.uint64)[0])
    geology = geogen.realize_geology(seed, gradient_limit=gradient_limit)
    if well is None:
        well = WellSpec(cell=grid.center_cell_index())
    return ScenarioSpec(geology=geology, well=well, grid=grid,
                        scenario_id=f"s{master_seed}-{index:05d}")


# ---------------------------------------------------------------------------
# Pressure solve: -div(K grad P) = q_src, 5-point FV, harmonic face K,
# Dirichlet boundary values on the domain edge (imposed at half-cell distance).
# ---------------------------------------------------------------------------

def _face_transmissibilities(K: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Interior-face transmissibilities (m^3/(Pa s)): Tx (ny, nx-1), Ty (ny-1, nx)."""
    ax = grid.dy * grid.thickness
    ay = grid.dx * grid.thickness
    kl, kr = K[:, :-1], K[:, 1:]
    Tx = ax * (2.0 * kl * kr / (kl + kr)) / grid.dx
    kb, kt = K[:-1, :], K[1:, :]
    Ty = ay * (2.0 * kb * kt / (kb + kt)) / grid.dy
    return Tx, Ty


def _boundary_transmissibilities(K: np.ndarray, grid: Grid):
    """Half-cell transmissibilities of the four boundary-face strips."""
    ax = grid.dy * grid.thickness
    ay = grid.dx * grid.thickness
    west = ax * K[:, 0] / (grid.dx / 2.0)
    east = ax * K[:, -1] / (grid.dx / 2.0)
    south = ay * K[0, :] / (grid.dy / 2.0)
    north = ay * K[-1, :] / (grid.dy / 2.0)
    return west, east, south, north


def _boundary_face_coords(grid: Grid):
    xc, yc = grid.x_centers(), grid.y_centers()
    west = np.column_stack([np.zeros(grid.ny), yc])
    east = np.column_stack([np.full(grid.ny, grid.extent_x), yc])
    south = np.column_stack([xc, np.zeros(grid.nx)])
    north = np.column_stack([xc, np.full(grid.nx, grid.extent_y)])
    return west, east, south, north


def assemble_pressure_system(K: ScalarField,
                             boundary: Callable[[np.ndarray, np.ndarray], np.ndarray],
                             source: np.ndarray):
    """Build the SPD sparse system A P = b for the pressure equation.

    `boundary(x, y)` evaluates the Dirichlet pressure on the domain edge;
    `source` is the per-cell volumetric injection rate (m^3/s), shape (ny, nx).
    """
    grid = K.grid
    k = K.values
    if k.min() <= 0.0:
        raise ValueError("permeability must be strictly positive")
    nx, ny = grid.nx, grid.ny
    n = grid.n_cells
    Tx, Ty = _face_transmissibilities(k, grid)
    tw, te, ts, tn = _boundary_transmissibilities(k, grid)

    diag = np.zeros((ny, nx))
    b = np.asarray(source, dtype=float).copy()

    # interior couplings
    diag[:, :-1] += Tx
    diag[:, 1:] += Tx
    diag[:-1, :] += Ty
    diag[1:, :] += Ty
    # Dirichlet boundary faces fold into diagonal + rhs
    cw, ce, cs, cn = _boundary_face_coords(grid)
    diag[:, 0] += tw
    b[:, 0] += tw * boundary(cw[:, 0], cw[:, 1])
    diag[:, -1] += te
    b[:, -1] += te * boundary(ce[:, 0], ce[:, 1])
    diag[0, :] += ts
    b[0, :] += ts * boundary(cs[:, 0], cs[:, 1])
    diag[-1, :] += tn
    b[-1, :] += tn * boundary(cn[:, 0], cn[:, 1])

    idx = np.arange(n).reshape(ny, nx)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [diag.ravel()]
    # x-neighbors
    r = idx[:, :-1].ravel(); c = idx[:, 1:].ravel(); v = -Tx.ravel()
    rows += [r, c]; cols += [c, r]; vals += [v, v]
    # y-neighbors
    r = idx[:-1, :].ravel(); c = idx[1:, :].ravel(); v = -Ty.ravel()
    rows += [r, c]; cols += [c, r]; vals += [v, v]

    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return A, b.ravel()


def solve_pressure_system(K: ScalarField,
                          boundary: Callable[[np.ndarray, np.ndarray], np.ndarray],
                          source: np.ndarray,
                          rtol: float = 1e-12,
                          residual_tol: float = 1e-10) -> ScalarField:
    """CG solve with Jacobi preconditioning; verifies the discrete residual."""
    A, b = assemble_pressure_system(K, boundary, source)
    n = A.shape[0]
    # Jacobi preconditioner; the operator is SPD after Dirichlet elimination
    M = sp.diags(1.0 / A.diagonal())
    x0 = np.asarray(boundary(*[c.ravel() for c in K.grid.center_mesh()]), dtype=float)
    p, info = spla.cg(A, b, x0=x0, rtol=rtol, atol=0.0, maxiter=50 * int(math.isqrt(n) + 1) * 40, M=M)
    bnorm = np.linalg.norm(b)
    res = np.linalg.norm(A @ p - b) / (bnorm if bnorm > 0 else 1.0)
    if info != 0 or res > residual_tol:
        raise RuntimeError(
            f"pressure solver did not converge: info={info}, relative residual={res:.3e}")
    return ScalarField(K.grid, p.reshape(K.grid.ny, K.grid.nx), unit="Pa")


def well_source_array(grid: Grid, well: WellSpec | None, params: SimParams) -> np.ndarray:
    source = np.zeros((grid.ny, grid.nx))
    if well is not None:
        i, j = well.cell
        source[j, i] = params.volumetric_rate(well.mass_rate)
    return source


def solve_pressure(K: ScalarField, gradient: tuple[float, float],
                   well: WellSpec | None = None,
                   params: SimParams = SimParams()) -> ScalarField:
    """Steady pressure with Dirichlet boundary P(x, y) = gx*x + gy*y and the
    well mass source (converted to a volumetric rate via molar density)."""
    gx, gy = gradient
    boundary = lambda x, y: gx * x + gy * y
    return solve_pressure_system(K, boundary, well_source_array(K.grid, well, params))


def _face_velocities(K: np.ndarray, P: np.ndarray, grid: Grid):
    """Darcy velocity (m/s) on interior faces: ux (ny, nx-1), uy (ny-1, nx).

    Face K is the harmonic mean, consistent with the pressure solve.
    """
    kl, kr = K[:, :-1], K[:, 1:]
    kh = 2.0 * kl * kr / (kl + kr)
    ux = -kh * (P[:, 1:] - P[:, :-1]) / grid.dx
    kb, kt = K[:-1, :], K[1:, :]
    kh = 2.0 * kb * kt / (kb + kt)
    uy = -kh * (P[1:, :] - P[:-1, :]) / grid.dy
    return ux, uy


def darcy_velocity(K: ScalarField, P: ScalarField) -> VectorField:
    """q = -K grad P averaged from faces to cell centers; boundary cells copy
    their single interior face (the Dirichlet face value is not recoverable
    from P alone)."""
    if K.grid != P.grid:
        raise ValueError("permeability and pressure must share a grid")
    grid = K.grid
    ux, uy = _face_velocities(K.values, P.values, grid)
    qx = np.empty((grid.ny, grid.nx))
    qy = np.empty((grid.ny, grid.nx))
    if grid.nx > 1:
        qx[:, 1:-1] = 0.5 * (ux[:, :-1] + ux[:, 1:])
        qx[:, 0] = ux[:, 0]
        qx[:, -1] = ux[:, -1]
    else:
        qx[:] = 0.0
    if grid.ny > 1:
        qy[1:-1, :] = 0.5 * (uy[:-1, :] + uy[1:, :])
        qy[0, :] = uy[0, :]
        qy[-1, :] = uy[-1, :]
    else:
        qy[:] = 0.0
    return VectorField(grid, qx, qy, unit="m/s")


def pressure_net_flux(K: ScalarField, P: ScalarField, gradient: tuple[float, float],
                      well: WellSpec | None = None,
                      params: SimParams = SimParams()):
    """Per-cell net volumetric outflux (m^3/s) reconstructed from face fluxes,
    and the largest |face flux|; used for discrete mass-conservation checks."""
    grid = K.grid
    k, p = K.values, P.values
    gx, gy = gradient
    Tx, Ty = _face_transmissibilities(k, grid)
    fx = Tx * (p[:, :-1] - p[:, 1:])   # flux from cell (i) into (i+1)
    fy = Ty * (p[:-1, :] - p[1:, :])
    tw, te, ts, tn = _boundary_transmissibilities(k, grid)
    cw, ce, cs, cn = _boundary_face_coords(grid)
    # outflow through each boundary strip
    out_w = tw * (p[:, 0] - (gx * cw[:, 0] + gy * cw[:, 1]))
    out_e = te * (p[:, -1] - (gx * ce[:, 0] + gy * ce[:, 1]))
    out_s = ts * (p[0, :] - (gx * cs[:, 0] + gy * cs[:, 1]))
    out_n = tn * (p[-1, :] - (gx * cn[:, 0] + gy * cn[:, 1]))

    net = np.zeros((grid.ny, grid.nx))
    net[:, :-1] += fx
    net[:, 1:] -= fx
    net[:-1, :] += fy
    net[1:, :] -= fy
    net[:, 0] += out_w
    net[:, -1] += out_e
    net[0, :] += out_s
    net[-1, :] += out_n
    net -= well_source_array(grid, well, params)
    fluxes = [np.abs(fx).max(initial=0.0), np.abs(fy).max(initial=0.0),
              np.abs(out_w).max(initial=0.0), np.abs(out_e).max(initial=0.0),
              np.abs(out_s).max(initial=0.0), np.abs(out_n).max(initial=0.0)]
    return net, max(fluxes)


# ---------------------------------------------------------------------------
# Heat transport: explicit first-order upwind advection (advective form, at
# pore velocity q/porosity) + central diffusion kappa/c, zero-diffusive-flux
# and upwind-outflow boundaries, implicit well mixing.
# ---------------------------------------------------------------------------

def _face_normal_velocities(q: VectorField):
    """Face-normal Darcy velocities including boundary faces:
    ux (ny, nx+1), uy (ny+1, nx); interior faces average the two cells."""
    qx, qy = q.x_values, q.y_values
    ny, nx = qx.shape
    ux = np.empty((ny, nx + 1))
    ux[:, 1:-1] = 0.5 * (qx[:, :-1] + qx[:, 1:])
    ux[:, 0] = qx[:, 0]
    ux[:, -1] = qx[:, -1]
    uy = np.empty((ny + 1, nx))
    uy[1:-1, :] = 0.5 * (qy[:-1, :] + qy[1:, :])
    uy[0, :] = qy[0, :]
    uy[-1, :] = qy[-1, :]
    return ux, uy


def _stability_rate(q: VectorField, params: SimParams, grid: Grid) -> np.ndarray:
    """Per-cell rate (1/s) whose inverse bounds the explicit stable step."""
    ux, uy = _face_normal_velocities(q)
    n = params.porosity
    inflow = (np.maximum(ux[:, :-1], 0.0) + np.maximum(-ux[:, 1:], 0.0)) / (n * grid.dx) \
           + (np.maximum(uy[:-1, :], 0.0) + np.maximum(-uy[1:, :], 0.0)) / (n * grid.dy)
    D = params.thermal_diffusivity()
    return inflow + 2.0 * D * (1.0 / grid.dx ** 2 + 1.0 / grid.dy ** 2)


def stable_dt(q: VectorField, params: SimParams, cfl: float = 0.9) -> float:
    """Largest dt (seconds) honoring the scheme's max-principle CFL bound."""
    rate = _stability_rate(q, params, q.grid).max()
    if rate <= 0.0:
        return float("inf")
    return cfl / rate


def advance_temperature(T: ScalarField, q: VectorField, well: WellSpec | None,
                        params: SimParams, dt: float,
                        ambient: float = AMBIENT_TEMPERATURE_DEFAULT) -> ScalarField:
    """One explicit step. Raises on CFL violation (the scheme's bound includes
    the porosity division and the diffusive rate, so respecting it guarantees
    the 10..15 degC maximum principle)."""
    grid = T.grid
    if q.grid != grid:
        raise ValueError("temperature and velocity must share a grid")
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = _stability_rate(q, params, grid)
    if dt * rate.max() > 1.0 + 1e-12:
        raise ValueError(
            f"CFL violation: dt={dt:.3e} s exceeds stable limit {1.0 / rate.max():.3e} s")

    t = T.values
    n = params.porosity
    ux, uy = _face_normal_velocities(q)

    # inflow-upwind advection; boundary inflow carries ambient water
    tw = np.empty_like(t); tw[:, 1:] = t[:, :-1]; tw[:, 0] = ambient
    te = np.empty_like(t); te[:, :-1] = t[:, 1:]; te[:, -1] = ambient
    ts = np.empty_like(t); ts[1:, :] = t[:-1, :]; ts[0, :] = ambient
    tn = np.empty_like(t); tn[:-1, :] = t[1:, :]; tn[-1, :] = ambient
    adv = (np.maximum(ux[:, :-1], 0.0) * (tw - t) + np.maximum(-ux[:, 1:], 0.0) * (te - t)) / (n * grid.dx) \
        + (np.maximum(uy[:-1, :], 0.0) * (ts - t) + np.maximum(-uy[1:, :], 0.0) * (tn - t)) / (n * grid.dy)

    # 5-point diffusion with zero-flux (mirror) boundaries
    D = params.thermal_diffusivity()
    pad = np.pad(t, 1, mode="edge")
    lap = (pad[1:-1, 2:] - 2.0 * t + pad[1:-1, :-2]) / grid.dx ** 2 \
        + (pad[2:, 1:-1] - 2.0 * t + pad[:-2, 1:-1]) / grid.dy ** 2

    out = t + dt * (adv + D * lap)

    if well is not None:
        # implicit mixing of the injected volume into the bulk cell volume;
        # keeps c*V*dT equal to the injected c*Q*dt*(T_inj - T) energy and the
        # update a convex combination (bounds preserved for any dt)
        i, j = well.cell
        f = params.volumetric_rate(well.mass_rate) * dt / grid.cell_volume
        out[j, i] = (out[j, i] + f * well.injection_temperature) / (1.0 + f)

    return ScalarField(grid, out, unit=T.unit or "degC")


def run_scenario(spec: ScenarioSpec, config: TransportConfig = TransportConfig(),
                 params: SimParams = SimParams()) -> Sample:
    """geogen -> pressure -> velocity -> transport to pseudo steady state."""
    grid = spec.grid
    geology = spec.geology
    K = geogen.permeability_field(geology, grid)
    gradient = (geology.gradient_x, geology.gradient_y)
    P = solve_pressure(K, gradient, spec.well, params)
    q = darcy_velocity(K, P)

    total = config.total_time_days * SECONDS_PER_DAY
    dt = stable_dt(q, params, config.cfl)
    n_steps = max(1, int(math.ceil(total / dt)))
    dt = total / n_steps

    T = ScalarField(grid, np.full((grid.ny, grid.nx), config.ambient_temperature), unit="degC")
    steady = False
    steps_done = 0
    for step in range(n_steps):
        T_new = advance_temperature(T, q, spec.well, params, dt,
                                    ambient=config.ambient_temperature)
        delta = np.abs(T_new.values - T.values).max()
        T = T_new
        steps_done = step + 1
        if delta < config.steady_tol:
            steady = True
            break

    return Sample(spec=spec, permeability=K, pressure=P, velocity=q, temperature=T,
                  steady_reached=steady, simulated_days=steps_done * dt / SECONDS_PER_DAY,
                  steps=steps_done)


def plume_centroid_offset(sample: Sample, ambient: float = AMBIENT_TEMPERATURE_DEFAULT):
    """Temperature-weighted centroid of (T - ambient) relative to the well, in meters."""
    grid = sample.spec.grid
    w = np.clip(sample.temperature.values - ambient, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        return (0.0, 0.0)
    X, Y = grid.center_mesh()
    cx = float((w * X).sum() / total)
    cy = float((w * Y).sum() / total)
    wx, wy = grid.cell_center(*sample.spec.well.cell)
    return (cx - wx, cy - wy)
