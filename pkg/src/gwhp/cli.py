"""Command-line entry point: dataset generation, training, evaluation,
single-shot prediction, analytic plume rendering, and serving.

Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, dataset, fieldio, geogen, simulate
from .grid import Grid, DEFAULT_GRID
from .lahm import LahmParams, lahm_field
from .simulate import ScenarioSpec, SimParams, TransportConfig

CONFIG_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (they are validation failures)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seeds: dict
    inputs: list[str]
    outputs: list[str]
    elapsed_s: float
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def write(self, path) -> None:
        doc = {"command": self.command, "config_hash": self.config_hash,
               "seeds": self.seeds, "inputs": self.inputs, "outputs": self.outputs,
               "elapsed_s": round(self.elapsed_s, 3), "version": self.version}
        doc.update(self.extra)
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _hash_config(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _require_keys(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown {where} keys: {sorted(unknown)}")


def _load_config(path) -> dict:
    doc = json.loads(Path(path).read_text())
    _require_keys(doc, {"version", "split", "model", "train"}, "config")
    if doc.get("version") != CONFIG_VERSION:
        raise ValueError(f"config version must be {CONFIG_VERSION}")
    _require_keys(doc.get("split", {}),
                  {"seed", "val_fraction", "test_count", "augment_per_sample"},
                  "config.split")
    _require_keys(doc.get("train", {}),
                  {"learning_rate", "batch_size", "epochs", "seed", "checkpoint_every"},
                  "config.train")
    return doc


DEFAULT_SPLIT = {"seed": 0, "val_fraction": 0.2, "test_count": 20, "augment_per_sample": 3}


# --- datagen ----------------------------------------------------------------

def _sample_path(out_dir: Path, index: int) -> Path:
    return out_dir / f"sample_{index:05d}.gwhp"


def _datagen_one(task: tuple[int, int, str, float]) -> tuple[int, str, str]:
    """Worker: returns (index, scenario_id, error-or-empty)."""
    master_seed, index, out_dir, days = task
    try:
        spec = simulate.generate_scenario(master_seed, index)
        sample = simulate.run_scenario(spec, TransportConfig(total_time_days=days))
        fieldio.save_sample(sample, _sample_path(Path(out_dir), index))
        return index, spec.scenario_id, ""
    except Exception as exc:  # per-scenario isolation; reported at the end
        return index, "", f"{type(exc).__name__}: {exc}"


def cmd_datagen(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    tasks = [(args.seed, k, str(out_dir), args.days) for k in range(args.count)]
    results = []
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_datagen_one, tasks))
    else:
        results = [_datagen_one(t) for t in tasks]

    failures = [(k, err) for k, _, err in results if err]
    files = [{"file": _sample_path(out_dir, k).name, "index": k, "scenario_id": sid}
             for k, sid, err in sorted(results) if not err]
    for k, err in failures:
        print(f"scenario {k} failed: {err}", file=sys.stderr)

    dataset.write_manifest(out_dir / "manifest.json", files=files, master_seed=args.seed)
    cfg = {"count": args.count, "seed": args.seed, "days": args.days}
    RunManifest(command="datagen", config_hash=_hash_config(cfg),
                seeds={"master_seed": args.seed}, inputs=[],
                outputs=[str(out_dir)], elapsed_s=time.perf_counter() - t0,
                extra={"failed": len(failures), "generated": len(files)}
                ).write(out_dir / "run_manifest.json")
    print(f"generated {len(files)}/{args.count} samples in {out_dir}")
    return 2 if failures else 0


def _load_samples(data_dir: Path) -> list:
    manifest = dataset.read_manifest(data_dir / "manifest.json")
    samples = []
    for entry in manifest["files"]:
        samples.append(fieldio.load_sample(data_dir / entry["file"]))
    if not samples:
        raise ValueError(f"no samples listed in {data_dir / 'manifest.json'}")
    return samples


# --- train ------------------------------------------------------------------

def cmd_train(args) -> int:

    from . import surrogate  # torch import deferred so light commands start fast

    cfg = _load_config(args.config) if args.config else {"version": CONFIG_VERSION}
    split_cfg = {**DEFAULT_SPLIT, **cfg.get("split", {})}
    model_cfg = surrogate.ModelConfig.from_json(cfg.get("model", {}))
    train_cfg = surrogate.TrainConfig(**cfg.get("train", {}))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    samples = _load_samples(Path(args.data))
    split = dataset.build_splits(samples, **split_cfg)
    print(f"split: {len(split.train)} train / {len(split.validation)} val / "
          f"{len(split.test)} test pairs")

    model = surrogate.build_model(model_cfg, seed=train_cfg.seed, norm_stats=split.stats)
    print(f"model: {model.parameter_count()} parameters")
    model, history = surrogate.train(model, split, train_cfg, log=True)

    model_path = out_dir / "model.gwnn"
    surrogate.save_model(model, model_path)
    (out_dir / "history.json").write_text(json.dumps(history, indent=2) + "\n")

    full_cfg = {"version": CONFIG_VERSION, "split": split_cfg,
                "model": model_cfg.to_json(),
                "train": {"learning_rate": train_cfg.learning_rate,
                          "batch_size": train_cfg.batch_size, "epochs": train_cfg.epochs,
                          "seed": train_cfg.seed,
                          "checkpoint_every": train_cfg.checkpoint_every}}
    RunManifest(command="train", config_hash=_hash_config(full_cfg),
                seeds={"split_seed": split_cfg["seed"], "train_seed": train_cfg.seed},
                inputs=[str(args.data)], outputs=[str(model_path)],
                elapsed_s=time.perf_counter() - t0,
                extra={"config": full_cfg, "split_assignment": split.assignment(),
                       "best_epoch": history.get("best_epoch"),
                       "best_val_loss": history.get("best_val_loss")}
                ).write(out_dir / "manifest.json")
    print(f"saved {model_path} (best val mse: {history.get('best_val_loss')})")
    return 0


# --- eval -------------------------------------------------------------------

def cmd_eval(args) -> int:
    from . import evalkit, surrogate

    cfg = _load_config(args.config) if args.config else {"version": CONFIG_VERSION}
    split_cfg = {**DEFAULT_SPLIT, **cfg.get("split", {})}
    model = surrogate.load_model(args.model)
    t0 = time.perf_counter()
    samples = _load_samples(Path(args.data))
    split = dataset.build_splits(samples, **split_cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = evalkit.evaluate_test_set(model, split, lahm_params=LahmParams(),
                                       grid=samples[0].spec.grid,
                                       render_dir=out_dir / "renders")
    report.save(out_dir / "report.json")

    print(f"{'sample':<16} {'rel err':>9} {'max |err| K':>12}")
    for sid, rel, mx in zip(report.source_ids, report.per_sample_relative_error,
                            report.per_sample_max_abs_error):
        print(f"{sid:<16} {rel:>9.4f} {mx:>12.4f}")
    print(f"aggregate relative error: {report.aggregate_relative_error:.4%}")
    print(f"median inference latency: {report.latency_ms['p50']:.1f} ms")

    RunManifest(command="eval", config_hash=_hash_config(split_cfg),
                seeds={"split_seed": split_cfg["seed"]},
                inputs=[str(args.model), str(args.data)], outputs=[str(out_dir)],
                elapsed_s=time.perf_counter() - t0,
                extra={"aggregate_relative_error": report.aggregate_relative_error}
                ).write(out_dir / "manifest.json")
    return 0


# --- predict ----------------------------------------------------------------

def cmd_predict(args) -> int:
    from . import surrogate

    model = surrogate.load_model(args.model)
    spec = ScenarioSpec.from_json(json.loads(Path(args.scenario).read_text()))
    t0 = time.perf_counter()
    params = SimParams()
    K = geogen.permeability_field(spec.geology, spec.grid)
    P = simulate.solve_pressure(K, (spec.geology.gradient_x, spec.geology.gradient_y),
                                spec.well, params)
    q = simulate.darcy_velocity(K, P)
    T = surrogate.infer(model, q)
    out = Path(args.out)
    fieldio.write_fields(out, {"permeability": K.values, "pressure": P.values,
                               "qx": q.x_values, "qy": q.y_values,
                               "temperature": T.values})
    RunManifest(command="predict", config_hash=_hash_config(spec.to_json()),
                seeds={"geology_seed": spec.geology.seed},
                inputs=[str(args.model), str(args.scenario)], outputs=[str(out)],
                elapsed_s=time.perf_counter() - t0
                ).write(out.with_suffix(".manifest.json"))
    print(f"wrote {out} (plume max {T.values.max():.2f} degC)")
    return 0


# --- lahm -------------------------------------------------------------------

def cmd_lahm(args) -> int:
    doc = json.loads(Path(args.params).read_text())
    _require_keys(doc, {"version", "lahm", "grid", "well_cell", "flow_angle"}, "params")
    if doc.get("version") != CONFIG_VERSION:
        raise ValueError(f"params version must be {CONFIG_VERSION}")
    params = LahmParams.from_json(doc.get("lahm", {}))
    grid = Grid(**doc["grid"]) if "grid" in doc else DEFAULT_GRID
    well_cell = tuple(doc.get("well_cell", grid.center_cell_index()))
    t0 = time.perf_counter()
    field_t = lahm_field(params, grid, well_cell, flow_angle=doc.get("flow_angle", 0.0))
    out = Path(args.out)
    fieldio.write_fields(out, {"temperature": field_t.values})
    RunManifest(command="lahm", config_hash=_hash_config(doc), seeds={},
                inputs=[str(args.params)], outputs=[str(out)],
                elapsed_s=time.perf_counter() - t0
                ).write(out.with_suffix(".manifest.json"))
    print(f"wrote {out}")
    return 0


# --- serve ------------------------------------------------------------------

def _env_override(args) -> None:
    env = os.environ
    if "GWHP_MODEL" in env:
        args.model = env["GWHP_MODEL"]
    if "GWHP_PORT" in env:
        args.port = int(env["GWHP_PORT"])
    if "GWHP_MAX_SIMULATIONS" in env:
        args.max_simulations = int(env["GWHP_MAX_SIMULATIONS"])
    if "GWHP_CORS_ORIGIN" in env:
        args.cors_origin = env["GWHP_CORS_ORIGIN"]


def cmd_serve(args) -> int:
    from .service import run_server

    _env_override(args)
    run_server(model_path=args.model, port=args.port,
               max_simulations=args.max_simulations, cors_origin=args.cors_origin,
               host=args.host)
    return 0


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gwhp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("datagen", help="simulate scenarios into a dataset directory")
    d.add_argument("--count", type=int, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--days", type=float, default=720.0)
    d.set_defaults(fn=cmd_datagen)

    t = sub.add_parser("train", help="train the surrogate on a dataset directory")
    t.add_argument("--data", required=True)
    t.add_argument("--config", default=None)
    t.add_argument("--out", required=True)
    t.set_defaults(fn=cmd_train)

    e = sub.add_parser("eval", help="score a model on the held-out test split")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--config", default=None)
    e.add_argument("--out", default="eval_out")
    e.set_defaults(fn=cmd_eval)

    pr = sub.add_parser("predict", help="one scenario file -> field container")
    pr.add_argument("--model", required=True)
    pr.add_argument("--scenario", required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(fn=cmd_predict)

    la = sub.add_parser("lahm", help="render the analytic plume to a field container")
    la.add_argument("--params", required=True)
    la.add_argument("--out", required=True)
    la.set_defaults(fn=cmd_lahm)

    s = sub.add_parser("serve", help="run the HTTP inference service")
    s.add_argument("--model", default=None)
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--max-simulations", type=int, default=1)
    s.add_argument("--cors-origin", default=None)
    s.add_argument("--host", default="127.0.0.1")
    s.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
