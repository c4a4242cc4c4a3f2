"""HTTP inference service: scenario in, field channels out.

POST /v1/predict with a geology + well + mode document returns the five field
channels (permeability, pressure, qx, qy, temperature) packed in the binary
field container, base64-embedded in JSON by default or raw bytes on request.
GET /v1/model and /v1/health report loaded-model metadata and readiness.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import threading
import time
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import fieldio, geogen, simulate, surrogate
from .lahm import LahmParams, lahm_field
from .simulate import ScenarioSpec, SimParams, TransportConfig, WellSpec

SERVICE_VERSION = "1"


class ScenarioRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    geology: dict
    well: dict
    mode: Literal["surrogate", "simulate", "lahm"]
    lahm: dict | None = None
    encoding: Literal["base64", "binary"] = "base64"


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def _grid_meta(grid) -> dict:
    return {"nx": grid.nx, "ny": grid.ny, "dx": grid.dx, "dy": grid.dy,
            "thickness": grid.thickness}


def _pack_channels(channels: dict[str, np.ndarray]) -> bytes:
    return fieldio.pack_fields(channels)


def _solve_static(spec: ScenarioSpec, params: SimParams, with_well: bool = True):
    """geogen -> pressure -> velocity (no transient transport)."""
    K = geogen.permeability_field(spec.geology, spec.grid)
    gradient = (spec.geology.gradient_x, spec.geology.gradient_y)
    well = spec.well if with_well else None
    P = simulate.solve_pressure(K, gradient, well, params)
    q = simulate.darcy_velocity(K, P)
    return K, P, q


def create_app(model_path: str | None = None, max_simulations: int = 1,
               cors_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="gwhp inference service", version=SERVICE_VERSION)
    if cors_origin:
        app.add_middleware(CORSMiddleware, allow_origins=[cors_origin],
                           allow_methods=["*"], allow_headers=["*"])

    app.state.model = None
    app.state.fingerprint = None
    if model_path is not None:
        raw = Path(model_path).read_bytes()
        app.state.model = surrogate.load_model(model_path)
        app.state.fingerprint = hashlib.sha256(raw).hexdigest()
    app.state.sim_gate = threading.Semaphore(max(1, int(max_simulations)))
    app.state.params = SimParams()

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc.errors()[:3]))

    @app.get("/v1/health")
    def health():
        return {"live": True, "ready": app.state.model is not None}

    @app.get("/v1/model")
    def model_info():
        model = app.state.model
        if model is None:
            return _error(503, "model_not_loaded", "no model file was loaded")
        stats = model.norm_stats
        return {
            "format_version": surrogate.MODEL_VERSION,
            "parameter_count": model.parameter_count(),
            "config": model.config.to_json(),
            "norm_stats": stats.to_json() if stats is not None else None,
            "fingerprint": app.state.fingerprint,
        }

    @app.post("/v1/predict")
    def predict(req: ScenarioRequest):
        if app.state.model is None:
            return _error(503, "model_not_loaded", "no model file was loaded")
        params: SimParams = app.state.params
        try:
            spec = ScenarioSpec(geology=geogen.GeologySpec.from_json(req.geology),
                                well=WellSpec.from_json(req.well))
            lahm_params = LahmParams.from_json(req.lahm) if req.lahm else LahmParams()
        except (ValueError, TypeError, IndexError) as exc:
            return _error(400, "invalid_spec", str(exc))

        grid = spec.grid
        acquired = False
        if req.mode == "simulate":
            acquired = app.state.sim_gate.acquire(blocking=False)
            if not acquired:
                return _error(429, "too_many_simulations",
                              "simulation concurrency limit reached; retry later")
        t0 = time.perf_counter()
        try:
            if req.mode == "simulate":
                sample = simulate.run_scenario(spec, TransportConfig(), params)
                K, P, q, T = (sample.permeability, sample.pressure,
                              sample.velocity, sample.temperature)
            elif req.mode == "surrogate":
                K, P, q = _solve_static(spec, params)
                T = surrogate.infer(app.state.model, q)
            else:  # lahm
                K, P, q = _solve_static(spec, params, with_well=False)
                i, j = spec.well.cell
                wq = (float(q.x_values[j, i]), float(q.y_values[j, i]))
                speed = math.hypot(*wq)
                if speed <= 0.0:
                    return _error(400, "invalid_spec",
                                  "analytic plume needs a nonzero ambient flow at the well")
                lp = LahmParams(**{**lahm_params.to_json(), "velocity": speed})
                T = lahm_field(lp, grid, spec.well.cell,
                               flow_angle=math.atan2(wq[1], wq[0]))
        except ValueError as exc:
            return _error(400, "invalid_spec", str(exc))
        except RuntimeError as exc:
            return _error(500, "solver_failure", str(exc))
        finally:
            if acquired:
                app.state.sim_gate.release()
        elapsed_ms = (time.perf_counter() - t0) * 1000.0

        channels = {"permeability": K.values, "pressure": P.values,
                    "qx": q.x_values, "qy": q.y_values, "temperature": T.values}
        payload = _pack_channels(channels)
        provenance = {"mode": req.mode, "service_version": SERVICE_VERSION,
                      "model_fingerprint": app.state.fingerprint,
                      "timing_ms": round(elapsed_ms, 3)}
        if req.encoding == "binary":
            return Response(content=payload, media_type="application/octet-stream",
                            headers={
                                "X-Provenance": json.dumps(provenance, sort_keys=True),
                                "X-Grid": json.dumps(_grid_meta(grid), sort_keys=True),
                            })
        return {"grid": _grid_meta(grid),
                "channel_names": list(channels),
                "container_b64": base64.b64encode(payload).decode("ascii"),
                "provenance": provenance}

    return app


def run_server(model_path: str | None, port: int = 8000, max_simulations: int = 1,
               cors_origin: str | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn
    app = create_app(model_path=model_path, max_simulations=max_simulations,
                     cors_origin=cors_origin)
    uvicorn.run(app, host=host, port=port, log_level="info")
