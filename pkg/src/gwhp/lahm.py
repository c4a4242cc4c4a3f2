"""Analytical baseline: temperature surplus downstream of a point injection in
a uniform ambient flow (2D moving-line-source plume with an erfc arrival
front). Serves as the fast overlay the learned model is compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .grid import Grid, ScalarField


@dataclass(frozen=True)
class LahmParams:
    injection_rate: float = 5.015e-5  # injected volume flux, m^3/s (0.05 kg/s of water)
    delta_t_inj: float = 5.0          # temperature surplus of injected water, K
    velocity: float = 1.0e-6          # uniform ambient Darcy speed, m/s (plume axis = +x)
    alpha_l: float = 1.8              # longitudinal dispersivity, m
    alpha_t: float = 0.18             # transverse dispersivity, m
    thickness: float = 1.0            # aquifer thickness, m
    porosity: float = 0.2
    retardation: float = 2.0          # heat front lags pore water by this factor
    time: float = 720.0 * 86400.0     # elapsed time since injection start, s

    def __post_init__(self):
        if self.velocity <= 0:
            raise ValueError("velocity must be strictly positive")
        if not (self.alpha_l >= self.alpha_t > 0):
            raise ValueError("dispersivities must satisfy alpha_l >= alpha_t > 0")
        if self.thickness <= 0:
            raise ValueError("thickness must be strictly positive")
        if not (0 < self.porosity < 1):
            raise ValueError("porosity must lie in (0, 1)")
        if self.injection_rate <= 0 or self.delta_t_inj <= 0:
            raise ValueError("injection_rate and delta_t_inj must be strictly positive")
        if self.retardation <= 0 or self.time <= 0:
            raise ValueError("retardation and time must be strictly positive")

    @property
    def seepage_velocity(self) -> float:
        """Pore (advective) velocity v_a = q / n, the speed entering the kernel."""
        return self.velocity / self.porosity

    def to_json(self) -> dict:
        return {"injection_rate": self.injection_rate, "delta_t_inj": self.delta_t_inj,
                "velocity": self.velocity, "alpha_l": self.alpha_l,
                "alpha_t": self.alpha_t, "thickness": self.thickness,
                "porosity": self.porosity, "retardation": self.retardation,
                "time": self.time}

    @classmethod
    def from_json(cls, doc: dict) -> "LahmParams":
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown LahmParams keys: {sorted(unknown)}")
        return cls(**doc)


def lahm_delta_t(params: LahmParams, x, y):
    """Temperature surplus (K) at (x, y) relative to the injection point, with
    the ambient flow along +x.

    Vectorized over x and y. Zero for x <= 0 (the plume is uni-directional)
    and capped at delta_t_inj, which also covers the near-well singularity of
    the 1/sqrt(x) profile.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = params
    va = p.seepage_velocity
    t = p.time

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gauss = np.exp(-(y * y) / (4.0 * p.alpha_t * x))
        denom = 4.0 * p.porosity * p.thickness * va * np.sqrt(np.pi * p.alpha_t * x)
        profile = (p.delta_t_inj * p.injection_rate) / denom * gauss

        # erfc -> 2 as t -> inf, doubling `profile` into the steady plume
        r = np.sqrt(x * x + y * y * (p.alpha_l / p.alpha_t))
        front = erfc((r - va * t / p.retardation)
                     / (2.0 * np.sqrt(va * p.alpha_l * t / p.retardation)))
        dt = profile * front

    dt = np.where(x > 0.0, dt, 0.0)
    dt = np.nan_to_num(dt, nan=0.0, posinf=p.delta_t_inj)
    return np.minimum(dt, p.delta_t_inj)


def lahm_field(params: LahmParams, grid: Grid, well_cell: tuple[int, int],
               flow_angle: float = 0.0, ambient: float = 10.0) -> ScalarField:
    """Absolute temperature on a grid: ambient plus the surplus evaluated in
    the frame rotated by flow_angle (radians, counterclockwise from +x) around
    the well cell center."""
    i, j = well_cell
    wx, wy = grid.cell_center(i, j)
    X, Y = grid.center_mesh()
    dx, dy = X - wx, Y - wy
    c, s = math.cos(flow_angle), math.sin(flow_angle)
    xr = c * dx + s * dy
    yr = -s * dx + c * dy
    values = ambient + lahm_delta_t(params, xr, yr)
    return ScalarField(grid, values, unit="degC")
