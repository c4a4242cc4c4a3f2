"""Evaluation: plume-mass relative error, signed error maps, latency stats,
and rendered prediction/target/error comparisons."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField, VectorField, DEFAULT_GRID
from .dataset import DatasetSplit, T_OFFSET, denormalize_input, denormalize_target
from .surrogate import SurrogateModel, infer
from .lahm import LahmParams, lahm_field


def relative_error(predicted: ScalarField, target: ScalarField) -> float:
    """sum |pred - target| / sum |target|. Callers pass offset temperatures
    (T minus the 10 degC ambient) so the denominator measures plume mass; the
    orientation is fixed (denominator is the target)."""
    if predicted.grid != target.grid:
        raise ValueError("fields must share a grid")
    denom = np.abs(target.values).sum()
    if denom == 0.0:
        raise ValueError("relative error undefined for an all-zero target")
    return float(np.abs(predicted.values - target.values).sum() / denom)


def error_map(predicted: ScalarField, target: ScalarField) -> ScalarField:
    """Signed per-cell error (predicted minus target), in K."""
    if predicted.grid != target.grid:
        raise ValueError("fields must share a grid")
    return ScalarField(predicted.grid, predicted.values - target.values, unit="K")


def _percentiles(samples_ms: list[float]) -> dict[str, float]:
    arr = np.asarray(samples_ms)
    return {"p50": float(np.percentile(arr, 50)),
            "p90": float(np.percentile(arr, 90)),
            "p99": float(np.percentile(arr, 99)),
            "max": float(arr.max()),
            "count": int(arr.size)}


@dataclass(frozen=True)
class EvalReport:
    source_ids: tuple[str, ...]
    per_sample_relative_error: tuple[float, ...]
    per_sample_max_abs_error: tuple[float, ...]
    aggregate_relative_error: float
    latency_ms: dict
    error_fields: tuple[ScalarField, ...] = ()

    def to_json(self) -> dict:
        return {
            "aggregate_relative_error": self.aggregate_relative_error,
            "latency_ms": self.latency_ms,
            "samples": [
                {"source_id": sid, "relative_error": rel, "max_abs_error_k": mx}
                for sid, rel, mx in zip(self.source_ids,
                                        self.per_sample_relative_error,
                                        self.per_sample_max_abs_error)
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")


def render_triptych(predicted: ScalarField, target: ScalarField, path,
                    lahm_overlay: ScalarField | None = None, title: str = "") -> None:
    """Side-by-side prediction / target / signed error PNG with fixed
    colormaps; optional analytic-plume contour on the prediction panel."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = predicted.grid
    extent = (0.0, grid.extent_x, 0.0, grid.extent_y)
    err = predicted.values - target.values
    vmax = max(abs(err).max(), 1e-12)
    tmin = min(predicted.values.min(), target.values.min())
    tmax = max(predicted.values.max(), target.values.max())

    fig, axes = plt.subplots(1, 3, figsize=(13, 4), constrained_layout=True)
    for ax, vals, name, cmap, lim in (
            (axes[0], predicted.values, "prediction", "coolwarm", (tmin, tmax)),
            (axes[1], target.values, "target", "coolwarm", (tmin, tmax)),
            (axes[2], err, "error (K)", "RdBu_r", (-vmax, vmax))):
        im = ax.imshow(vals, origin="lower", extent=extent, cmap=cmap,
                       vmin=lim[0], vmax=lim[1])
        ax.set_title(name)
        ax.set_xlabel("x (m)")
        fig.colorbar(im, ax=ax, shrink=0.85)
    axes[0].set_ylabel("y (m)")
    if lahm_overlay is not None:
        X, Y = grid.center_mesh()
        axes[0].contour(X, Y, lahm_overlay.values, levels=[10.5, 11.0, 12.0],
                        colors="k", linewidths=0.8)
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=110)
    plt.close(fig)


def evaluate_test_set(model: SurrogateModel, split: DatasetSplit,
                      lahm_params: LahmParams | None = None,
                      grid: Grid = DEFAULT_GRID,
                      render_dir=None) -> EvalReport:
    """Infer every test pair, score on offset temperatures, time each forward
    pass, and optionally render one triptych per sample."""
    if not split.test:
        raise ValueError("test split is empty")
    stats = model.norm_stats or split.stats
    if stats is None:
        raise ValueError("no normalization stats available for evaluation")
    if render_dir is not None:
        render_dir = Path(render_dir)
        render_dir.mkdir(parents=True, exist_ok=True)

    ids, rels, maxes, err_fields, lat = [], [], [], [], []
    num = 0.0
    den = 0.0
    for k, pair in enumerate(split.test):
        qx, qy = denormalize_input(pair.input, stats)
        velocity = VectorField(grid, qx, qy, unit="m/s")
        t0 = time.perf_counter()
        predicted = infer(model, velocity)
        lat.append((time.perf_counter() - t0) * 1000.0)
        target = ScalarField(grid, denormalize_target(pair.target, stats), unit="degC")

        pred_off = ScalarField(grid, predicted.values - T_OFFSET)
        targ_off = ScalarField(grid, target.values - T_OFFSET)
        ids.append(pair.source_id)
        rels.append(relative_error(pred_off, targ_off))
        maxes.append(float(np.abs(predicted.values - target.values).max()))
        err_fields.append(error_map(predicted, target))
        num += np.abs(pred_off.values - targ_off.values).sum()
        den += np.abs(targ_off.values).sum()

        if render_dir is not None:
            overlay = None
            if lahm_params is not None:
                i, j = grid.center_cell_index()
                wq = (float(qx[j, i]), float(qy[j, i]))
                angle = float(np.arctan2(wq[1], wq[0]))
                speed = float(np.hypot(*wq))
                if speed > 0:
                    overlay = lahm_field(
                        LahmParams(**{**lahm_params.to_json(), "velocity": speed}),
                        grid, (i, j), flow_angle=angle)
            render_triptych(predicted, target,
                            render_dir / f"test_{k:03d}_{pair.source_id}.png",
                            lahm_overlay=overlay, title=pair.source_id)

    if den == 0.0:
        raise ValueError("aggregate relative error undefined: zero plume mass")
    return EvalReport(source_ids=tuple(ids),
                      per_sample_relative_error=tuple(rels),
                      per_sample_max_abs_error=tuple(maxes),
                      aggregate_relative_error=float(num / den),
                      latency_ms=_percentiles(lat),
                      error_fields=tuple(err_fields))
